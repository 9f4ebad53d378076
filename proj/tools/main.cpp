#include "driftlab/config.hpp"
#include "driftlab/csv_io.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw driftlab::IoError(path, "cannot open config file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int workers_from_env() {
    const char* value = std::getenv("DRIFTLAB_WORKERS");
    if (value == nullptr || *value == '\0') {
        return 0;  // auto
    }
    try {
        const int workers = std::stoi(value);
        return workers < 0 ? 0 : workers;
    } catch (const std::exception&) {
        throw std::invalid_argument("DRIFTLAB_WORKERS must be a non-negative integer");
    }
}

// "out.csv" + "_dp" -> "out_dp.csv"
std::string derived_path(const std::string& base, const std::string& suffix) {
    const auto dot = base.rfind('.');
    if (dot == std::string::npos || base.find('/', dot) != std::string::npos) {
        return base + suffix;
    }
    return base.substr(0, dot) + suffix + base.substr(dot);
}

void run_experiment(const driftlab::ExperimentConfig& cfg) {
    using namespace driftlab;

    const SystemModel model = build_model(cfg);
    RunOptions opts;
    opts.workers = workers_from_env();

    switch (cfg.command) {
        case Command::Trace: {
            const bool multi = cfg.schemes.size() > 1;
            for (const SchemeId scheme : cfg.schemes) {
                const TraceReport report = run_trace(model, scheme, cfg.h, cfg.t_end,
                                                     cfg.samples, cfg.seed, cfg.observable, opts);
                const std::string path =
                    multi ? derived_path(cfg.output_path, "_" + to_string(scheme))
                          : cfg.output_path;
                emit_trace_csv(report, path);
                std::cout << "trace " << cfg.model_id << "/" << to_string(scheme) << " ("
                          << to_string(cfg.observable) << ", M=" << cfg.samples << ") -> " << path
                          << "\n";
            }
            break;
        }
        case Command::Strong: {
            const ConvergenceReport report =
                run_strong(model, cfg.schemes.front(), cfg.h_list, *cfg.h_ref, cfg.t_end,
                           cfg.samples, cfg.seed, *cfg.reference_scheme, opts);
            emit_convergence_csv(report, cfg.output_path);
            std::cout << "strong " << cfg.model_id << "/" << to_string(cfg.schemes.front())
                      << " fitted_slope=" << format_double(report.fitted_slope) << " -> "
                      << cfg.output_path << "\n";
            break;
        }
        case Command::Weak: {
            std::optional<WeakReference> reference;
            if (!model.has_exact_moments()) {
                if (!cfg.reference_scheme || !cfg.h_ref) {
                    throw std::invalid_argument(
                        "model '" + cfg.model_id +
                        "' has no exact moments; set reference_scheme and h_ref");
                }
                reference = WeakReference{*cfg.reference_scheme, *cfg.h_ref};
            }
            const WeakReport weak = run_weak(model, cfg.schemes.front(), cfg.h_list, cfg.t_end,
                                             cfg.samples, cfg.seed, reference, opts);
            const auto reports = weak.to_reports();
            const bool both = cfg.weak_m1 && cfg.weak_m2;
            for (const ConvergenceReport& report : reports) {
                const bool is_m1 = report.mode == ConvergenceMode::WeakM1;
                if ((is_m1 && !cfg.weak_m1) || (!is_m1 && !cfg.weak_m2)) {
                    continue;
                }
                const std::string path =
                    both ? derived_path(cfg.output_path, is_m1 ? "_m1" : "_m2")
                         : cfg.output_path;
                emit_convergence_csv(report, path);
                std::cout << "weak " << cfg.model_id << "/" << to_string(cfg.schemes.front())
                          << " " << to_string(report.mode)
                          << " fitted_slope=" << format_double(report.fitted_slope) << " -> "
                          << path << "\n";
            }
            break;
        }
        case Command::Single: {
            const auto states = run_single(model, cfg.schemes.front(), cfg.h, cfg.t_end,
                                           cfg.seed, opts);
            std::vector<double> grid(states.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                grid[i] = static_cast<double>(i) * cfg.h;
            }
            emit_single_csv(grid, states, cfg.output_path);
            std::cout << "single " << cfg.model_id << "/" << to_string(cfg.schemes.front())
                      << " (" << states.size() << " grid points) -> " << cfg.output_path << "\n";
            break;
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"driftlab: Monte Carlo experiments for stochastic Hamiltonian and Poisson "
                 "systems with additive noise"};

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<long> samples_override;
    std::optional<std::string> output_override;

    app.add_option("config", config_path, "experiment config file (key = value lines)")
        ->required();
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--samples", samples_override, "override the config sample count");
    app.add_option("--output", output_override, "override the config output path");

    CLI11_PARSE(app, argc, argv);

    try {
        driftlab::ExperimentConfig cfg = driftlab::parse_config(read_file(config_path));
        if (seed_override) {
            cfg.seed = *seed_override;
        }
        if (samples_override) {
            if (*samples_override < 1) {
                throw std::invalid_argument("--samples must be >= 1");
            }
            cfg.samples = *samples_override;
        }
        if (output_override) {
            cfg.output_path = *output_override;
        }
        run_experiment(cfg);
        return 0;
    } catch (const driftlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const driftlab::NonConvergenceError& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return 3;
    } catch (const driftlab::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
