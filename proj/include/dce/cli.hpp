// cli.hpp — Experiment runner behind the command-line tool (run, spectrum, sweep)

#pragma once

#include "dce/config.hpp"
#include "dce/io.hpp"
#include "dce/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace dce {

struct RunSummary {
    double peak_concurrence{std::numeric_limits<double>::quiet_NaN()};
    double t_peak{std::numeric_limits<double>::quiet_NaN()};
    double final_leakage{std::numeric_limits<double>::quiet_NaN()};
    double wall_seconds{0.0};
    std::optional<double> omega1_ghz;

    std::string line() const {
        std::ostringstream s;
        s << "peak_concurrence=" << format_sig(peak_concurrence) << " t_peak=" << format_sig(t_peak);
        if (omega1_ghz && std::isfinite(t_peak)) s << " t_peak_ns=" << format_sig(t_peak / (2.0 * std::numbers::pi * *omega1_ghz));
        s << " final_leakage=" << format_sig(final_leakage) << " wall_s=" << format_sig(std::round(wall_seconds * 100.0) / 100.0);
        return s.str();
    }
};

inline RunSummary summarize(const TimeSeries& ts) {
    RunSummary r;
    if (ts.has("concurrence") && ts.rows() > 0) {
        const auto& c = ts.column("concurrence");
        const auto it = std::max_element(c.begin(), c.end());
        r.peak_concurrence = *it;
        r.t_peak = ts.times[static_cast<std::size_t>(it - c.begin())];
    }
    if (ts.has("leakage") && ts.rows() > 0) r.final_leakage = ts.column("leakage").back();
    return r;
}

inline int worker_threads() {
    if (const char* env = std::getenv("DCE_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
        throw ConfigError("DCE_THREADS must be a positive integer");
    }
    return 1;
}

namespace detail {

inline void require_csv(const ExperimentConfig& c) {
    if (c.output.csv_path.empty()) throw ConfigError("[output] csv_path is required");
}

inline double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

// `run`: one propagation, CSV (+ optional SVG), summary.
inline RunSummary command_run(const ExperimentConfig& c) {
    detail::require_csv(c);
    const auto t0 = std::chrono::steady_clock::now();
    const TimeSeries ts = run_protocol(c.model, c.simulation, c.output.columns);
    std::ostringstream csv;
    write_series_csv(csv, ts);
    write_file_atomic(c.output.csv_path, csv.str());
    if (!c.output.svg_path.empty()) write_file_atomic(c.output.svg_path, render_series_svg(ts));
    RunSummary r = summarize(ts);
    r.wall_seconds = detail::elapsed(t0);
    r.omega1_ghz = c.output.omega1_ghz;
    return r;
}

// `spectrum`: lowest levels of subsystem 1 over a g/omega grid.
inline std::size_t command_spectrum(const ExperimentConfig& c) {
    detail::require_csv(c);
    const auto rows = rabi_spectrum(c.model, c.spectrum.grid(), c.spectrum.levels, c.simulation.max_n_max);
    std::ostringstream csv;
    write_spectrum_csv(csv, rows);
    write_file_atomic(c.output.csv_path, csv.str());
    if (!c.output.svg_path.empty()) {
        std::vector<double> x = c.spectrum.grid();
        std::vector<std::pair<std::string, std::vector<double>>> series;
        const auto levels = static_cast<std::size_t>(c.spectrum.levels);
        for (std::size_t k = 0; k < levels; ++k) {
            std::vector<double> y;
            for (std::size_t i = 0; i < x.size(); ++i) y.push_back(rows[i * levels + k].energy);
            series.emplace_back("level " + std::to_string(k), std::move(y));
        }
        write_file_atomic(c.output.svg_path, render_svg(x, series, "g0/omega"));
    }
    return rows.size();
}

// `sweep`: one run per value, executed on up to `threads` workers, assembled
// in value order so the CSV does not depend on scheduling.
inline std::vector<RunSummary> command_sweep(const ExperimentConfig& c, int threads) {
    detail::require_csv(c);
    if (!c.sweep) throw ConfigError("sweep requires a [sweep] section");
    const auto& sw = *c.sweep;
    const std::size_t n = sw.values.size();
    std::vector<ExperimentConfig> configs(n, c);
    for (std::size_t i = 0; i < n; ++i) apply_setting(configs[i], sw.field, format_number(sw.values[i]));

    std::vector<TimeSeries> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::vector<double> walls(n, 0.0);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            const auto t0 = std::chrono::steady_clock::now();
            try {
                results[i] = run_protocol(configs[i].model, configs[i].simulation, configs[i].output.columns);
            } catch (...) {
                errors[i] = std::current_exception();
            }
            walls[i] = detail::elapsed(t0);
        }
    };
    const auto workers = static_cast<std::size_t>(std::max(1, std::min<int>(threads, static_cast<int>(n))));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    const std::string key = sw.field.substr(sw.field.find('.') + 1);
    std::ostringstream csv;
    std::vector<RunSummary> out;
    for (std::size_t i = 0; i < n; ++i) {
        write_series_csv(csv, results[i], key, sw.values[i], i == 0);
        RunSummary r = summarize(results[i]);
        r.wall_seconds = walls[i];
        r.omega1_ghz = c.output.omega1_ghz;
        out.push_back(r);
    }
    write_file_atomic(c.output.csv_path, csv.str());
    return out;
}

} // namespace dce
