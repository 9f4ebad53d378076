#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

namespace driftlab {

using StateVec = Eigen::VectorXd;

/// Quadratic invariant C(X) = 1/2 X^T A X with A symmetric and
/// grad C(X)^T B(X) = 0 for all X.
struct CasimirForm {
    Eigen::MatrixXd a_matrix;

    double value(const StateVec& x) const { return 0.5 * x.dot(a_matrix * x); }
};

/// Constant additive diffusion. `sigma_full` is the full-state n-by-d matrix;
/// `noise_block_hessian` is the constant d-by-d matrix
/// sigma_full^T (hess H) sigma_full that the model declares so the expected
/// energy drift can be predicted without symbolic differentiation.
struct NoiseModel {
    Eigen::MatrixXd sigma_full;
    Eigen::Index wiener_dim = 0;
    Eigen::MatrixXd noise_block_hessian;
};

struct MomentEstimates {
    StateVec mean;           // componentwise E[X_i(t)]
    StateVec second_moment;  // componentwise E[X_i(t)^2]
};

/// One SDE instance dX = B(X) grad H(X) dt + sigma_full dW.
/// All callbacks are pure functions of their inputs; instances are immutable
/// after construction and safe to share across threads.
struct SystemModel {
    std::string id;
    Eigen::Index dim = 0;
    // m for separable kinetic-plus-potential Hamiltonians (dim = 2m, state
    // ordered as (p, q)); 0 when no p/q partition exists.
    Eigen::Index half_dim = 0;

    std::function<void(const StateVec&, Eigen::MatrixXd&)> poisson;  // writes B(X)
    std::function<double(const StateVec&)> hamiltonian;
    std::function<void(const StateVec&, StateVec&)> grad_h;
    // Optional closed form of the averaged gradient
    // int_0^1 grad H(y1 + theta (y2 - y1)) dtheta; empty when only the
    // quadrature fallback is available.
    std::function<void(const StateVec&, const StateVec&, StateVec&)> discrete_gradient;

    NoiseModel noise;
    std::optional<CasimirForm> casimir;
    // Closed-form moments of the exact solution, available for linear models.
    std::function<MomentEstimates(const StateVec&, double)> exact_moments;

    StateVec initial_value;

    bool separable() const { return half_dim > 0; }
    bool has_discrete_gradient() const { return static_cast<bool>(discrete_gradient); }
    bool has_exact_moments() const { return static_cast<bool>(exact_moments); }
};

/// Linear oscillator H(p,q) = p^2/2 + q^2/2 with B = J and one-dimensional
/// noise of strength `sigma_scale` on p.
SystemModel make_oscillator(double sigma_scale);

/// Pendulum H(p,q) = p^2/2 - cos(q), B = J, one-dimensional noise on p.
SystemModel make_pendulum(double sigma_scale);

/// Free particle H(p,q) = p^2/2, B = J; zero-potential edge case used by
/// tests and available from the CLI for debugging.
SystemModel make_free_particle(double sigma_scale);

/// Rigid body angular momentum equations: quadratic H with moments of
/// inertia (0.345, 0.653, 1), Casimir |X|^2/2, and a 3-by-d noise matrix.
/// Throws std::invalid_argument if sigma has more than 3 columns or not 3 rows.
SystemModel make_rigid_body(const Eigen::MatrixXd& sigma);

/// Exact first and second moments of the linear oscillator at time t from
/// initial state x0. Throws std::invalid_argument for other models.
MomentEstimates exact_oscillator_moments(const SystemModel& model, const StateVec& x0, double t);

/// Expected energy E[H(X(t))] = h0 + Tr(noise_block_hessian) t / 2.
double predicted_energy(const SystemModel& model, double h0, double t);

/// Expected Casimir E[C(X(t))] = c0 + Tr(sigma^T A sigma) t / 2.
/// Throws std::invalid_argument if the model has no Casimir.
double predicted_casimir(const SystemModel& model, double c0, double t);

} // namespace driftlab
