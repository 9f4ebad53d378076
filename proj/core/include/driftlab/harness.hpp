#pragma once

#include "driftlab/brownian.hpp"
#include "driftlab/integrators.hpp"
#include "driftlab/models.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace driftlab {

enum class Observable { Energy, Casimir };
std::string to_string(Observable observable);
Observable parse_observable(const std::string& name);

/// Sample statistics of an observable along the time grid, next to the
/// exact-solution drift line.
struct TraceReport {
    std::vector<double> time_grid;
    std::vector<double> sample_mean;
    std::vector<double> std_error;
    std::vector<double> predicted;
    Observable observable = Observable::Energy;
    SchemeId scheme = SchemeId::DP;
    long samples = 0;
};

enum class ConvergenceMode { Strong, WeakM1, WeakM2 };
std::string to_string(ConvergenceMode mode);

struct ConvergenceReport {
    std::vector<double> step_sizes;  // strictly decreasing
    std::vector<double> errors;
    double fitted_slope = 0.0;
    ConvergenceMode mode = ConvergenceMode::Strong;
    SchemeId scheme = SchemeId::DP;
    long samples = 0;
    std::string reference;  // what the errors were measured against
};

/// Weak-study errors kept per state component, so per-moment slopes can be
/// checked individually; to_reports() collapses to the max over components.
struct WeakReport {
    std::vector<double> step_sizes;
    Eigen::MatrixXd first_moment_errors;   // dim x n_steps entries
    Eigen::MatrixXd second_moment_errors;  // dim x n_steps entries
    SchemeId scheme = SchemeId::DP;
    long samples = 0;
    std::string reference;

    double slope_first(Eigen::Index component) const;
    double slope_second(Eigen::Index component) const;
    std::vector<ConvergenceReport> to_reports() const;  // {WeakM1, WeakM2}
};

struct RunOptions {
    int workers = 0;  // 0 = one per hardware thread
    SolverSettings solver;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
};

/// Ordinary least squares of y against x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// OLS slope of log(err) against log(h). Throws std::invalid_argument on
/// fewer than two points or non-positive values.
double fit_slope(const std::vector<double>& hs, const std::vector<double>& errs);

/// Integrates `samples` independent paths from the model's initial value and
/// records mean, standard error and the predicted drift line of the
/// observable at every grid time. Requires h to divide t_end.
TraceReport run_trace(const SystemModel& model, SchemeId scheme, double h, double t_end,
                      long samples, std::uint64_t seed, Observable observable,
                      const RunOptions& opts = {});

/// Mean-square error at t_end against a reference scheme at step h_ref driven
/// by the same Brownian path (coarsened per step size).
ConvergenceReport run_strong(const SystemModel& model, SchemeId scheme,
                             const std::vector<double>& h_list, double h_ref, double t_end,
                             long samples, std::uint64_t seed, SchemeId reference_scheme,
                             const RunOptions& opts = {});

/// Surrogate moment reference for models without closed forms: empirical
/// moments of `scheme` at step h_ref on an independent sample block.
struct WeakReference {
    SchemeId scheme = SchemeId::DP;
    double h_ref = 0.0;
};

/// First/second moment errors at t_end per step size; independent paths per
/// step size. Uses the model's exact moments, or `reference` when absent.
WeakReport run_weak(const SystemModel& model, SchemeId scheme, const std::vector<double>& h_list,
                    double t_end, long samples, std::uint64_t seed,
                    std::optional<WeakReference> reference = std::nullopt,
                    const RunOptions& opts = {});

/// Single trajectory (sample index 0), states recorded at every grid time.
std::vector<StateVec> run_single(const SystemModel& model, SchemeId scheme, double h,
                                 double t_end, std::uint64_t seed, const RunOptions& opts = {});

} // namespace driftlab
