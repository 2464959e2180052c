// dce_cli.cpp — Command-line runner: run, spectrum, sweep, presets

#include "dce/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

int exit_code_for(const dce::Error& e) {
    switch (e.category()) {
    case dce::ErrorCategory::config: return 2;
    case dce::ErrorCategory::truncation: return 3;
    case dce::ErrorCategory::numerical: return 4;
    }
    return 1;
}

const char* category_name(int code) {
    switch (code) {
    case 2: return "config";
    case 3: return "truncation";
    case 4: return "numerical";
    }
    return "internal";
}

int fail(int code, const std::string& what) {
    std::fprintf(stderr, "error category=%s: %s\n", category_name(code), what.c_str());
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement generation between qubit-resonator pairs via a dynamical Casimir drive"};
    app.require_subcommand(1);

    std::string cfg_path;
    auto* run = app.add_subcommand("run", "Propagate one configuration and write its time series");
    run->add_option("config", cfg_path, "INI configuration file")->required();
    auto* spectrum = app.add_subcommand("spectrum", "Rabi spectrum versus g0/omega");
    spectrum->add_option("config", cfg_path, "INI configuration file")->required();
    auto* sweep = app.add_subcommand("sweep", "Repeat a run over one scalar field (DCE_THREADS workers)");
    sweep->add_option("config", cfg_path, "INI configuration file")->required();
    auto* presets = app.add_subcommand("presets", "List the built-in presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (presets->parsed()) {
            for (const auto& p : dce::preset_list()) std::printf("%-18s %-15s %s\n", p.name.c_str(), p.figure.c_str(), p.description.c_str());
            return 0;
        }
        const auto cfg = dce::load_config(cfg_path);
        if (run->parsed()) {
            if (cfg.sweep) throw dce::ConfigError("[sweep] section given to 'run'; use 'sweep'");
            std::printf("%s\n", dce::command_run(cfg).line().c_str());
        } else if (spectrum->parsed()) {
            const auto rows = dce::command_spectrum(cfg);
            std::printf("rows=%zu csv=%s\n", rows, cfg.output.csv_path.c_str());
        } else if (sweep->parsed()) {
            const auto summaries = dce::command_sweep(cfg, dce::worker_threads());
            for (std::size_t i = 0; i < summaries.size(); ++i)
                std::printf("%s=%s %s\n", cfg.sweep->field.c_str(), dce::format_sig(cfg.sweep->values[i]).c_str(),
                            summaries[i].line().c_str());
        }
    } catch (const dce::Error& e) {
        return fail(exit_code_for(e), e.what());
    } catch (const std::invalid_argument& e) {
        return fail(2, e.what());
    } catch (const std::exception& e) {
        return fail(4, e.what());
    }
    return 0;
}
