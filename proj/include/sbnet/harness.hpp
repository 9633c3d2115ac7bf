// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sbnet/baselines.hpp"
#include "sbnet/cccp.hpp"
#include "sbnet/channel.hpp"
#include "sbnet/common.hpp"
#include "sbnet/topology.hpp"

namespace sbnet {

enum class SweepAxis { None, NumMus, NumSbs, GammaSi };

inline const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::None: return "none";
        case SweepAxis::NumMus: return "num_mus";
        case SweepAxis::NumSbs: return "num_sbs";
        case SweepAxis::GammaSi: return "gamma_si";
    }
    return "?";
}

inline SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "none") return SweepAxis::None;
    if (s == "num_mus") return SweepAxis::NumMus;
    if (s == "num_sbs") return SweepAxis::NumSbs;
    if (s == "gamma_si") return SweepAxis::GammaSi;
    throw InvalidInput("unknown sweep axis: " + s);
}

struct ScenarioConfig {
    DropConfig drop;
    FadingParams fading;
    PowerLimits limits;
    SolverConfig solver;
    SweepAxis sweep = SweepAxis::None;
    std::vector<double> sweep_values{0.0};
    int droppings = 100;
    std::vector<SchemeId> schemes{SchemeId::ProposedFdMassiveMimo};
    std::uint64_t seed = 1;
    std::string output_dir = "results";
    int workers = 0;  // 0 = hardware concurrency

    void validate() const {
        if (sweep_values.empty()) throw InvalidInput("sweep values must be nonempty");
        if (droppings < 1) throw InvalidInput("droppings must be >= 1");
        if (schemes.empty()) throw InvalidInput("schemes must be nonempty");
    }
};

struct ResultRow {
    std::string scheme;
    std::string sweep_param;
    double sweep_value = 0.0;
    int dropping = 0;
    double total_se = 0.0;
    double mu_se = 0.0;
    double su_se = 0.0;
    double backhaul_power_w = 0.0;
    int iterations = 0;
    std::string termination;
    double wall_time_ms = 0.0;  // measured; see emit_outputs for what gets written where
};

namespace detail {

inline void apply_sweep_value(ScenarioConfig& cfg, double value) {
    switch (cfg.sweep) {
        case SweepAxis::None: break;
        case SweepAxis::NumMus: cfg.drop.K = static_cast<int>(value); break;
        case SweepAxis::NumSbs: cfg.drop.N = static_cast<int>(value); break;
        case SweepAxis::GammaSi: cfg.fading.gamma_si = value; break;
    }
}

inline std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// One dropping of one sweep point: shared topology/channel, every scheme run
// on the same realization. Never throws for per-scheme failures.
inline std::vector<ResultRow> run_point(const ScenarioConfig& base, int sweep_index,
                                        int dropping) {
    ScenarioConfig cfg = base;
    const double value = base.sweep_values[sweep_index];
    detail::apply_sweep_value(cfg, value);

    std::vector<ResultRow> rows;
    const std::uint64_t drop_seed =
        mix_seed(cfg.seed, static_cast<std::uint64_t>(sweep_index),
                 static_cast<std::uint64_t>(dropping));

    ChannelRealization ch;
    bool channel_ok = true;
    std::string channel_error;
    try {
        const NetworkTopology topo = drop_topology(cfg.drop, drop_seed);
        ch = build_effective_gains(topo, cfg.fading, drop_seed);
    } catch (const std::exception& e) {
        channel_ok = false;
        channel_error = e.what();
    }

    for (SchemeId scheme : cfg.schemes) {
        ResultRow row;
        row.scheme = to_string(scheme);
        row.sweep_param = to_string(cfg.sweep);
        row.sweep_value = value;
        row.dropping = dropping;
        if (!channel_ok) {
            row.termination = "Error";
            rows.push_back(std::move(row));
            continue;
        }
        try {
            const SchemeResult res = run_scheme(scheme, ch, cfg.fading, cfg.limits, cfg.solver);
            row.termination = to_string(res.termination);
            row.iterations = res.iterations;
            row.wall_time_ms = res.wall_time_s * 1e3;
            if (res.termination != Termination::Infeasible) {
                row.total_se = res.rates.total;
                row.mu_se = res.rates.r_mu.sum();
                row.su_se = res.rates.r_su.size() ? res.rates.r_su.sum() : 0.0;
                row.backhaul_power_w = res.backhaul_power_w;
            }
        } catch (const std::exception&) {
            row.termination = "Error";
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Full sweep over (sweep value, dropping) on a worker pool. Output order is
// stable by (scheme position, sweep value, dropping), independent of workers.
inline std::vector<ResultRow> run_sweep(const ScenarioConfig& cfg) {
    cfg.validate();
    const int n_points = static_cast<int>(cfg.sweep_values.size()) * cfg.droppings;
    std::vector<std::vector<ResultRow>> per_point(n_points);

    int workers = cfg.workers > 0 ? cfg.workers
                                  : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, n_points));

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_points) return;
            const int sweep_index = i / cfg.droppings;
            const int dropping = i % cfg.droppings;
            per_point[i] = run_point(cfg, sweep_index, dropping);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // order rows by (scheme, sweep value, dropping)
    std::vector<ResultRow> rows;
    rows.reserve(static_cast<size_t>(n_points) * cfg.schemes.size());
    for (size_t s = 0; s < cfg.schemes.size(); ++s)
        for (int i = 0; i < n_points; ++i)
            rows.push_back(per_point[i][s]);
    return rows;
}

inline constexpr const char* kResultsHeader =
    "scheme,sweep_param,sweep_value,dropping,total_se,mu_se,su_se,backhaul_power_w,"
    "iterations,termination,wall_time_ms";

// Writes results.csv, summary.csv, timings.csv, a gnuplot script and the run
// manifest. results.csv is byte-reproducible for a fixed config+seed, so its
// wall_time_ms column is pinned to 0; measured timings live in timings.csv.
inline void emit_outputs(const std::vector<ResultRow>& rows, const ScenarioConfig& cfg,
                         const std::string& code_version = "unknown") {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);

    {
        std::ofstream f(dir / "results.csv", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write to " + cfg.output_dir);
        f << kResultsHeader << "\n";
        for (const ResultRow& r : rows) {
            f << r.scheme << ',' << r.sweep_param << ',' << detail::fmt_full(r.sweep_value) << ','
              << r.dropping << ',' << detail::fmt_full(r.total_se) << ','
              << detail::fmt_full(r.mu_se) << ',' << detail::fmt_full(r.su_se) << ','
              << detail::fmt_full(r.backhaul_power_w) << ',' << r.iterations << ','
              << r.termination << ',' << 0 << "\n";
        }
    }
    {
        std::ofstream f(dir / "timings.csv", std::ios::binary);
        f << "scheme,sweep_param,sweep_value,dropping,wall_time_ms\n";
        for (const ResultRow& r : rows)
            f << r.scheme << ',' << r.sweep_param << ',' << detail::fmt_full(r.sweep_value) << ','
              << r.dropping << ',' << detail::fmt_full(r.wall_time_ms) << "\n";
    }

    // summary: mean and normal-approximation 95% CI per (scheme, sweep value)
    {
        std::ofstream f(dir / "summary.csv", std::ios::binary);
        f << "scheme,sweep_param,sweep_value,n_ok,n_failed,mean_total_se,ci95_total_se,"
             "mean_mu_se,mean_su_se,mean_backhaul_power_w\n";
        for (const SchemeId scheme : cfg.schemes) {
            const std::string sname = to_string(scheme);
            for (double v : cfg.sweep_values) {
                double sum = 0, sumsq = 0, mu = 0, su = 0, bp = 0;
                int n_ok = 0, n_failed = 0;
                for (const ResultRow& r : rows) {
                    if (r.scheme != sname || r.sweep_value != v) continue;
                    if (r.termination == "Infeasible" || r.termination == "Error") {
                        ++n_failed;
                        continue;
                    }
                    ++n_ok;
                    sum += r.total_se;
                    sumsq += r.total_se * r.total_se;
                    mu += r.mu_se;
                    su += r.su_se;
                    bp += r.backhaul_power_w;
                }
                const double mean = n_ok ? sum / n_ok : 0.0;
                double ci = 0.0;
                if (n_ok > 1) {
                    const double var = std::max(0.0, (sumsq - n_ok * mean * mean) / (n_ok - 1));
                    ci = 1.959963984540054 * std::sqrt(var / n_ok);
                }
                f << sname << ',' << to_string(cfg.sweep) << ',' << detail::fmt_full(v) << ','
                  << n_ok << ',' << n_failed << ',' << detail::fmt_full(mean) << ','
                  << detail::fmt_full(ci) << ',' << detail::fmt_full(n_ok ? mu / n_ok : 0.0) << ','
                  << detail::fmt_full(n_ok ? su / n_ok : 0.0) << ','
                  << detail::fmt_full(n_ok ? bp / n_ok : 0.0) << "\n";
            }
        }
    }
    {
        std::ofstream f(dir / "plot_sweep.gp", std::ios::binary);
        f << "# gnuplot script: mean total spectral efficiency per scheme over the sweep\n"
             "set datafile separator ','\n"
             "set key autotitle columnhead\n"
             "set xlabel '" << to_string(cfg.sweep) << "'\n"
             "set ylabel 'mean total SE (bits/s/Hz)'\n"
             "set term pngcairo size 900,600\n"
             "set output 'sweep_total_se.png'\n"
             "plot for [s in '";
        for (size_t i = 0; i < cfg.schemes.size(); ++i)
            f << (i ? " " : "") << to_string(cfg.schemes[i]);
        f << "'] 'summary.csv' using 3:(strcol(1) eq s ? $6 : NaN):7 with yerrorlines title s\n";
    }
    {
        std::ofstream f(dir / "run_manifest.txt", std::ios::binary);
        f << "code_version=" << code_version << "\n"
          << "seed=" << cfg.seed << "\n"
          << "sweep=" << to_string(cfg.sweep) << "\n"
          << "sweep_values=";
        for (size_t i = 0; i < cfg.sweep_values.size(); ++i)
            f << (i ? "," : "") << detail::fmt_full(cfg.sweep_values[i]);
        f << "\n"
          << "droppings=" << cfg.droppings << "\n"
          << "schemes=";
        for (size_t i = 0; i < cfg.schemes.size(); ++i)
            f << (i ? "," : "") << to_string(cfg.schemes[i]);
        f << "\n"
          << "M=" << cfg.drop.M << "\nK=" << cfg.drop.K << "\nN=" << cfg.drop.N << "\n"
          << "area_side_m=" << detail::fmt_full(cfg.drop.area_side_m) << "\n"
          << "su_radius_m=" << detail::fmt_full(cfg.drop.su_radius_m) << "\n"
          << "phi=" << detail::fmt_full(cfg.fading.phi) << "\n"
          << "alpha_pl=" << detail::fmt_full(cfg.fading.alpha_pl) << "\n"
          << "shadow_sigma_db=" << detail::fmt_full(cfg.fading.shadow_sigma_db) << "\n"
          << "noise_power=" << detail::fmt_full(cfg.fading.noise_power) << "\n"
          << "gamma_si=" << detail::fmt_full(cfg.fading.gamma_si) << "\n"
          << "sinr_gap=" << detail::fmt_full(cfg.fading.sinr_gap) << "\n"
          << "p_mbs_max_w=" << detail::fmt_full(cfg.limits.p_mbs_max_w) << "\n"
          << "p_sbs_max_w=" << detail::fmt_full(cfg.limits.p_sbs_max_w) << "\n"
          << "r_min_mu=" << detail::fmt_full(cfg.limits.r_min_mu) << "\n"
          << "r_min_su=" << detail::fmt_full(cfg.limits.r_min_su) << "\n";
    }
}

// parses the results.csv schema back into rows (used by tests and tooling)
inline std::vector<ResultRow> parse_results_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(f, line);
    if (line != kResultsHeader) throw std::runtime_error("unexpected results.csv header");
    std::vector<ResultRow> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t pos = 0;
        while (true) {
            const size_t c = line.find(',', pos);
            fields.push_back(line.substr(pos, c == std::string::npos ? c : c - pos));
            if (c == std::string::npos) break;
            pos = c + 1;
        }
        if (fields.size() != 11) throw std::runtime_error("malformed results.csv row");
        ResultRow r;
        r.scheme = fields[0];
        r.sweep_param = fields[1];
        r.sweep_value = std::stod(fields[2]);
        r.dropping = std::stoi(fields[3]);
        r.total_se = std::stod(fields[4]);
        r.mu_se = std::stod(fields[5]);
        r.su_se = std::stod(fields[6]);
        r.backhaul_power_w = std::stod(fields[7]);
        r.iterations = std::stoi(fields[8]);
        r.termination = fields[9];
        r.wall_time_ms = std::stod(fields[10]);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace sbnet
