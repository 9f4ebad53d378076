#pragma once

#include "driftlab/harness.hpp"
#include "driftlab/models.hpp"

#include <optional>
#include <string>
#include <vector>

namespace driftlab {

enum class Command { Trace, Strong, Weak, Single };
std::string to_string(Command command);

/// One experiment, parsed from a flat `key = value` document. Defaults follow
/// the built-in model parameters; see parse_config for the key list.
struct ExperimentConfig {
    Command command = Command::Trace;
    std::string model_id;
    std::vector<SchemeId> schemes{SchemeId::DP};
    double sigma_scalar = 1.0;
    std::optional<Eigen::MatrixXd> sigma_matrix;
    std::optional<StateVec> initial_value;
    double h = 0.0;                // trace / single
    std::vector<double> h_list;    // strong / weak, sorted decreasing
    std::optional<double> h_ref;   // strong (defaults to min(h_list)/4), weak reference
    double t_end = 0.0;
    long samples = 0;
    std::uint64_t seed = 0x5EED;
    Observable observable = Observable::Energy;
    bool weak_m1 = true;
    bool weak_m2 = true;
    std::optional<SchemeId> reference_scheme;
    std::string output_path;
};

/// Parses and validates a config document. Recognized keys:
///   command, model, scheme, sigma, sigma_row (repeatable), initial_value,
///   h, h_list, h_ref, t_end, samples, seed, observable, moments,
///   reference_scheme, output.
/// Lists are comma separated; `#` starts a comment line. Throws ConfigError
/// (UnknownKey / MissingRequired / DimensionMismatch) naming the offending
/// key.
ExperimentConfig parse_config(const std::string& text);

/// Instantiates the configured model with its sigma and initial value.
SystemModel build_model(const ExperimentConfig& config);

} // namespace driftlab
