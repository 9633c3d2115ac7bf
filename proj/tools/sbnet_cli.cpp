// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: `sweep` (Monte Carlo campaigns), `single` (one
// realization with the full solver trace), `oracle` (grid-search cross-check)
// and `selftest` (quick invariant battery).
//
// Exit codes: 0 on full success, 2 when the run finished but some rows failed
// (Infeasible/Error), 1 on configuration errors.
#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "sbnet/baselines.hpp"
#include "sbnet/harness.hpp"

namespace {

constexpr const char* kVersion = "sbnet 1.0.0";

struct CliOptions {
    sbnet::ScenarioConfig scenario;
    std::vector<std::string> scheme_names{"proposed"};
    std::string sweep_name = "none";
    int grid_points = 50;  // oracle subcommand
};

// Options shared by the solver-driven subcommands; kebab-case flags mirror the
// ScenarioConfig field names.
void add_scenario_options(CLI::App& cmd, CliOptions& o) {
    sbnet::ScenarioConfig& s = o.scenario;
    cmd.add_option("--num-mus,-K", s.drop.K, "Number of macro users");
    cmd.add_option("--num-sbs,-N", s.drop.N, "Number of small cells");
    cmd.add_option("--num-antennas,-M", s.drop.M, "Number of MBS antennas");
    cmd.add_option("--area-side-m", s.drop.area_side_m, "Deployment square side (m)");
    cmd.add_option("--su-radius-m", s.drop.su_radius_m, "SU drop radius around its SBS (m)");
    cmd.add_option("--phi", s.fading.phi, "Path-loss constant");
    cmd.add_option("--alpha-pl", s.fading.alpha_pl, "Path-loss exponent");
    cmd.add_option("--shadow-sigma-db", s.fading.shadow_sigma_db, "Shadowing std dev (dB)");
    cmd.add_option("--noise-power", s.fading.noise_power, "Noise power (W)");
    cmd.add_option("--gamma-si", s.fading.gamma_si, "Residual self-interference factor");
    cmd.add_option("--sinr-gap", s.fading.sinr_gap, "SINR gap to capacity");
    cmd.add_option("--p-mbs-max-w", s.limits.p_mbs_max_w, "MBS power budget (W)");
    cmd.add_option("--p-sbs-max-w", s.limits.p_sbs_max_w, "Per-SBS power cap (W)");
    cmd.add_option("--r-min-mu", s.limits.r_min_mu, "MU rate floor (bits/s/Hz)");
    cmd.add_option("--r-min-su", s.limits.r_min_su, "SU rate floor (bits/s/Hz)");
    cmd.add_option("--t1-max", s.solver.t1_max, "Outer retightening cap");
    cmd.add_option("--t2-max", s.solver.t2_max, "Inner CCCP round cap");
    cmd.add_option("--t3-max", s.solver.t3_max, "Feasibility-search round cap");
    cmd.add_option("--eps1", s.solver.eps1, "Outer objective tolerance (bits/s/Hz)");
    cmd.add_option("--eps2", s.solver.eps2, "Inner objective tolerance (bits/s/Hz)");
    cmd.add_option("--eps3", s.solver.eps3, "Feasibility slack tolerance");
    cmd.add_option("--seed", s.seed, "Base RNG seed");
}

std::vector<sbnet::SchemeId> parse_schemes(const std::vector<std::string>& names) {
    std::vector<sbnet::SchemeId> out;
    for (const std::string& n : names) out.push_back(sbnet::scheme_from_string(n));
    return out;
}

int cmd_sweep(CliOptions& o) {
    sbnet::ScenarioConfig& s = o.scenario;
    s.sweep = sbnet::sweep_axis_from_string(o.sweep_name);
    s.schemes = parse_schemes(o.scheme_names);
    s.validate();

    const std::vector<sbnet::ResultRow> rows = sbnet::run_sweep(s);
    sbnet::emit_outputs(rows, s, kVersion);

    int failed = 0;
    for (const sbnet::ResultRow& r : rows)
        if (r.termination == "Infeasible" || r.termination == "Error") ++failed;
    std::printf("%zu rows written to %s (%d failed)\n", rows.size(), s.output_dir.c_str(),
                failed);
    return failed ? 2 : 0;
}

int cmd_single(CliOptions& o) {
    const sbnet::ScenarioConfig& s = o.scenario;
    const sbnet::NetworkTopology topo = sbnet::drop_topology(s.drop, s.seed);
    const sbnet::ChannelRealization ch = sbnet::build_effective_gains(topo, s.fading, s.seed);
    const sbnet::SolverReport rep = sbnet::solve_overall(ch, s.fading, s.limits, s.solver);

    std::printf("termination=%s objective=%.12g outer=%d inner=%d engine_iters=%d "
                "wall_time_s=%.3f\n",
                sbnet::to_string(rep.termination), rep.objective, rep.outer_iterations,
                rep.inner_iterations_total, rep.engine_iterations_total, rep.wall_time_s);
    if (rep.termination == sbnet::Termination::Infeasible) return 2;

    std::printf("trace (outer,inner,objective,min_residual):\n");
    for (const sbnet::IterRecord& r : rep.trace)
        std::printf("  %3d %3d %.12g %.3e\n", r.outer, r.inner, r.objective, r.min_residual);
    std::printf("powers (W):");
    for (int j = 0; j < rep.final_p.size(); ++j) std::printf(" %.6g", rep.final_p(j));
    std::printf("\nrates mu:");
    for (int k = 0; k < rep.final_rates.r_mu.size(); ++k)
        std::printf(" %.6g", rep.final_rates.r_mu(k));
    std::printf("  bh:");
    for (int n = 0; n < rep.final_rates.r_bh.size(); ++n)
        std::printf(" %.6g", rep.final_rates.r_bh(n));
    std::printf("  su:");
    for (int n = 0; n < rep.final_rates.r_su.size(); ++n)
        std::printf(" %.6g", rep.final_rates.r_su(n));
    std::printf("\nC1 activity:");
    for (int n = 0; n < rep.c1_activity.size(); ++n) std::printf(" %.3e", rep.c1_activity(n));
    std::printf("\n");
    return 0;
}

int cmd_oracle(CliOptions& o) {
    const sbnet::ScenarioConfig& s = o.scenario;
    const int dim = s.drop.K + 2 * s.drop.N;
    if (std::pow(static_cast<double>(o.grid_points), dim) > 1e8)
        throw sbnet::InvalidInput("grid too large; reduce --grid-points or the instance size");

    const sbnet::NetworkTopology topo = sbnet::drop_topology(s.drop, s.seed);
    const sbnet::ChannelRealization ch = sbnet::build_effective_gains(topo, s.fading, s.seed);
    sbnet::GridSpec grid;
    grid.points_per_axis = o.grid_points;
    const auto [p, bfs_obj] = sbnet::bfs_oracle(ch.g, s.fading, s.limits, grid);
    const sbnet::SolverReport rep = sbnet::solve_overall(ch, s.fading, s.limits, s.solver);

    std::printf("bfs objective:  %.12g\n", bfs_obj);
    if (rep.termination == sbnet::Termination::Infeasible) {
        std::printf("cccp: Infeasible (grid found a point; solver phase-I failed)\n");
        return 2;
    }
    std::printf("cccp objective: %.12g (%s)\nratio cccp/bfs: %.6f\n", rep.objective,
                sbnet::to_string(rep.termination), rep.objective / bfs_obj);
    return 0;
}

int cmd_selftest(CliOptions& o) {
    int failures = 0;
    auto check = [&failures](const char* name, bool ok) {
        std::printf("  %-34s %s\n", name, ok ? "ok" : "FAIL");
        if (!ok) ++failures;
    };

    // SCAM bound tightness and lower-bound property
    bool scam_ok = true;
    sbnet::Rng rng(99);
    for (int i = 0; i < 1000 && scam_ok; ++i) {
        const double z0 = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
        auto [a, m] = sbnet::scam_constants(z0);
        scam_ok = std::abs(a * std::log2(z0) + m - std::log2(1.0 + z0)) <= 1e-12;
        for (int j = 0; j < 10 && scam_ok; ++j) {
            const double z = std::exp(rng.uniform(std::log(1e-4), std::log(1e4)));
            scam_ok = a * std::log2(z) + m <= std::log2(1.0 + z) + 1e-12;
        }
    }
    check("scam bound tight + lower bound", scam_ok);

    // end-to-end solve: monotone trace, feasible iterates, feasible optimum
    sbnet::ScenarioConfig s = o.scenario;
    s.drop.K = 2;
    s.drop.N = 2;
    s.drop.M = 16;
    s.limits.r_min_mu = 0.2;
    s.limits.r_min_su = 0.05;
    bool monotone = true, feasible = true, solved = false;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const sbnet::NetworkTopology topo = sbnet::drop_topology(s.drop, seed);
        const sbnet::ChannelRealization ch = sbnet::build_effective_gains(topo, s.fading, seed);
        const sbnet::SolverReport rep =
            sbnet::solve_overall(ch, s.fading, s.limits, s.solver);
        if (rep.termination == sbnet::Termination::Infeasible) continue;
        solved = true;
        double prev = -1e300;
        for (const sbnet::IterRecord& r : rep.trace) {
            if (r.outer < 0) continue;
            if (r.min_residual < -1e-8) feasible = false;
            if (r.inner > 0 && r.objective < prev - 1e-8) monotone = false;
            prev = r.objective;
        }
        const sbnet::PowerVector p = sbnet::PowerVector::from_log_flat(rep.final_x, 2, 2);
        feasible = feasible &&
                   sbnet::check_constraints(p, ch.g, s.fading, s.limits).feasible;
    }
    check("solver ran on sample instances", solved);
    check("inner traces nondecreasing", monotone);
    check("iterates satisfy original constraints", feasible);

    // reproducibility across worker counts
    s.droppings = 3;
    s.schemes = {sbnet::SchemeId::FdNoMassiveMimo};
    s.workers = 1;
    const std::vector<sbnet::ResultRow> a = sbnet::run_sweep(s);
    s.workers = 4;
    const std::vector<sbnet::ResultRow> b = sbnet::run_sweep(s);
    bool same = a.size() == b.size();
    for (size_t i = 0; same && i < a.size(); ++i)
        same = a[i].total_se == b[i].total_se && a[i].termination == b[i].termination;
    check("sweep independent of worker count", same);

    std::printf(failures ? "selftest FAILED\n" : "selftest passed\n");
    return failures ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Power allocation for full-duplex self-backhauled small cells under a "
                 "massive-MIMO macro downlink"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "Flat key=value config file; command line overrides it");
    app.require_subcommand(1);

    CliOptions o;

    CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over droppings");
    add_scenario_options(*sweep, o);
    sweep->add_option("--sweep", o.sweep_name, "Sweep axis: none|num_mus|num_sbs|gamma_si");
    sweep->add_option("--sweep-values", o.scenario.sweep_values, "Sweep axis values")
        ->delimiter(',');
    sweep->add_option("--droppings", o.scenario.droppings, "Droppings per sweep value");
    sweep->add_option("--schemes", o.scheme_names,
                      "Schemes: proposed|hd|fd|wired (full names accepted)")
        ->delimiter(',');
    sweep->add_option("--output-dir", o.scenario.output_dir, "Output directory")
        ->envname("SBNET_OUTPUT_DIR");
    sweep->add_option("--workers", o.scenario.workers, "Worker threads (0 = hardware)");

    CLI::App* single = app.add_subcommand("single", "Solve one realization, dump the trace");
    add_scenario_options(*single, o);

    CLI::App* oracle = app.add_subcommand("oracle", "Grid-search cross-check on one instance");
    add_scenario_options(*oracle, o);
    oracle->add_option("--grid-points", o.grid_points, "Grid points per power axis");

    CLI::App* selftest = app.add_subcommand("selftest", "Run the built-in invariant battery");
    add_scenario_options(*selftest, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) return cmd_sweep(o);
        if (single->parsed()) return cmd_single(o);
        if (oracle->parsed()) return cmd_oracle(o);
        if (selftest->parsed()) return cmd_selftest(o);
    } catch (const sbnet::InvalidInput& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
