#pragma once

#include "driftlab/models.hpp"

#include <string>

namespace driftlab {

enum class SchemeId {
    DP,                      // noise half-kick / energy-preserving midstep / half-kick
    EM,                      // Euler-Maruyama
    BEM,                     // backward (implicit) Euler-Maruyama
    STM,                     // exact-rotation trigonometric method (oscillator only)
    SPLIT_SYMPLECTIC_EULER,  // DP sandwich with a symplectic Euler midstep
    SPLIT_STORMER_VERLET,    // DP sandwich with a Stormer-Verlet midstep
    SPLIT_EULER,             // DP sandwich with an explicit Euler midstep
    SPLIT_HEUN,              // DP sandwich with a Heun midstep
};

/// String ids as used in configs: "dp", "em", "bem", "stm", "symp",
/// "stormer_verlet", "split_euler", "split_heun".
SchemeId parse_scheme_id(const std::string& name);
std::string to_string(SchemeId id);

enum class SplitVariant { SymplecticEuler, StormerVerlet, Euler, Heun };

struct SolverSettings {
    // Mixed absolute/relative tolerance on the max-norm of the fixed-point
    // update, scaled by (1 + |y|_inf).
    double fp_tolerance = 1e-12;
    int fp_max_iters = 100;
    // Gauss-Legendre node count for the averaged-gradient fallback, 1..5.
    int quadrature_nodes = 3;
};

struct StepDiagnostics {
    int fp_iterations = 0;
    double fp_residual = 0.0;
    bool converged = true;
};

/// Scratch buffers for the one-step maps; one per thread.
struct StepperWorkspace {
    StateVec y_old, y_trial, grad, avg_grad, mid, kicked, stage, dw_sum;
    Eigen::MatrixXd b;
};

/// Averaged gradient int_0^1 grad H(y1 + theta (y2 - y1)) dtheta: the model's
/// closed form when present, Gauss-Legendre quadrature otherwise.
void averaged_gradient(const SystemModel& model, const StateVec& y1, const StateVec& y2,
                       const SolverSettings& settings, StateVec& out, StepperWorkspace& ws);

/// Implicit energy-preserving midstep
///   y2 = y1 + h B((y1+y2)/2) int_0^1 grad H(y1 + theta(y2-y1)) dtheta,
/// solved by fixed-point iteration from the explicit Euler predictor.
/// Throws NonConvergenceError when the iteration budget runs out.
StepDiagnostics ep_midstep(const SystemModel& model, const StateVec& y1, double h,
                           const SolverSettings& settings, StateVec& y2, StepperWorkspace& ws);

/// Full drift-preserving step: half noise kick, ep_midstep, half noise kick.
/// `dw_first_half` and `dw_second_half` are the Wiener increments over
/// [t, t+h/2] and [t+h/2, t+h].
StepDiagnostics dp_step(const SystemModel& model, const StateVec& x, double h,
                        Eigen::Ref<const Eigen::VectorXd> dw_first_half,
                        Eigen::Ref<const Eigen::VectorXd> dw_second_half,
                        const SolverSettings& settings, StateVec& out, StepperWorkspace& ws);

/// Euler-Maruyama: x + h B(x) grad H(x) + sigma dw.
void em_step(const SystemModel& model, const StateVec& x, double h,
             Eigen::Ref<const Eigen::VectorXd> dw_full, StateVec& out, StepperWorkspace& ws);

/// Backward Euler-Maruyama: solves y = x + h B(y) grad H(y) + sigma dw with
/// the same fixed-point policy as ep_midstep.
StepDiagnostics bem_step(const SystemModel& model, const StateVec& x, double h,
                         Eigen::Ref<const Eigen::VectorXd> dw_full, const SolverSettings& settings,
                         StateVec& out, StepperWorkspace& ws);

/// Trigonometric method for the oscillator: exact rotation applied to the
/// state kicked at the left endpoint. Throws std::invalid_argument for other
/// models.
void stm_step(const SystemModel& model, const StateVec& x, double h,
              Eigen::Ref<const Eigen::VectorXd> dw_full, StateVec& out, StepperWorkspace& ws);

/// Same noise/deterministic/noise sandwich as dp_step with the midstep
/// replaced by a classic deterministic one-step method. SymplecticEuler and
/// StormerVerlet require a separable model.
void split_det_step(const SystemModel& model, const StateVec& x, double h,
                    Eigen::Ref<const Eigen::VectorXd> dw_first_half,
                    Eigen::Ref<const Eigen::VectorXd> dw_second_half,
                    SplitVariant variant, StateVec& out, StepperWorkspace& ws);

/// One step of `scheme` consuming the two half-step increments. Full-step
/// schemes (EM, BEM, STM) consume their sum.
StepDiagnostics scheme_step(const SystemModel& model, SchemeId scheme, const StateVec& x,
                            double h, Eigen::Ref<const Eigen::VectorXd> dw_first_half,
                            Eigen::Ref<const Eigen::VectorXd> dw_second_half,
                            const SolverSettings& settings, StateVec& out, StepperWorkspace& ws);

/// True when `scheme` can integrate `model` (STM is oscillator-only, the
/// symplectic split variants need a p/q partition).
bool scheme_supports(SchemeId scheme, const SystemModel& model);

} // namespace driftlab
