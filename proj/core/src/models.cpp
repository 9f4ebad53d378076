#include "driftlab/models.hpp"

#include <cmath>
#include <stdexcept>

namespace driftlab {

namespace {

Eigen::MatrixXd canonical_j2() {
    Eigen::MatrixXd j(2, 2);
    j << 0.0, -1.0,
         1.0,  0.0;
    return j;
}

NoiseModel scalar_p_noise(double sigma_scale) {
    NoiseModel noise;
    noise.sigma_full = Eigen::MatrixXd::Zero(2, 1);
    noise.sigma_full(0, 0) = sigma_scale;
    noise.wiener_dim = 1;
    noise.noise_block_hessian = Eigen::MatrixXd::Constant(1, 1, sigma_scale * sigma_scale);
    return noise;
}

} // namespace

SystemModel make_oscillator(double sigma_scale) {
    SystemModel m;
    m.id = "oscillator";
    m.dim = 2;
    m.half_dim = 1;
    const Eigen::MatrixXd j = canonical_j2();
    m.poisson = [j](const StateVec&, Eigen::MatrixXd& b) { b = j; };
    m.hamiltonian = [](const StateVec& x) { return 0.5 * x.squaredNorm(); };
    m.grad_h = [](const StateVec& x, StateVec& g) { g = x; };
    // grad H is linear, so the averaged gradient is grad H at the midpoint.
    m.discrete_gradient = [](const StateVec& y1, const StateVec& y2, StateVec& g) {
        g = 0.5 * (y1 + y2);
    };
    m.noise = scalar_p_noise(sigma_scale);
    m.initial_value = (StateVec(2) << 0.0, 1.0).finished();

    const double sigma = sigma_scale;
    m.exact_moments = [sigma](const StateVec& x0, double t) {
        MomentEstimates out;
        const double c = std::cos(t), s = std::sin(t);
        out.mean = StateVec(2);
        out.mean << c * x0(0) - s * x0(1),
                    s * x0(0) + c * x0(1);
        // Ito isometry on the variation-of-constants solution:
        // Var p = sigma^2 int_0^t cos^2, Var q = sigma^2 int_0^t sin^2.
        const double var_p = sigma * sigma * (0.5 * t + 0.25 * std::sin(2.0 * t));
        const double var_q = sigma * sigma * (0.5 * t - 0.25 * std::sin(2.0 * t));
        out.second_moment = StateVec(2);
        out.second_moment << out.mean(0) * out.mean(0) + var_p,
                             out.mean(1) * out.mean(1) + var_q;
        return out;
    };
    return m;
}

SystemModel make_pendulum(double sigma_scale) {
    SystemModel m;
    m.id = "pendulum";
    m.dim = 2;
    m.half_dim = 1;
    const Eigen::MatrixXd j = canonical_j2();
    m.poisson = [j](const StateVec&, Eigen::MatrixXd& b) { b = j; };
    m.hamiltonian = [](const StateVec& x) { return 0.5 * x(0) * x(0) - std::cos(x(1)); };
    m.grad_h = [](const StateVec& x, StateVec& g) {
        g.resize(2);
        g << x(0), std::sin(x(1));
    };
    m.discrete_gradient = [](const StateVec& y1, const StateVec& y2, StateVec& g) {
        g.resize(2);
        g(0) = 0.5 * (y1(0) + y2(0));
        const double dq = y2(1) - y1(1);
        // Removable singularity at q2 = q1; the midpoint sine has relative
        // error O(dq^2), below roundoff at this threshold.
        if (std::abs(dq) <= 1e-8) {
            g(1) = std::sin(0.5 * (y1(1) + y2(1)));
        } else {
            g(1) = (std::cos(y1(1)) - std::cos(y2(1))) / dq;
        }
    };
    m.noise = scalar_p_noise(sigma_scale);
    m.initial_value = (StateVec(2) << 1.0, std::sqrt(2.0)).finished();
    return m;
}

SystemModel make_free_particle(double sigma_scale) {
    SystemModel m;
    m.id = "free_particle";
    m.dim = 2;
    m.half_dim = 1;
    const Eigen::MatrixXd j = canonical_j2();
    m.poisson = [j](const StateVec&, Eigen::MatrixXd& b) { b = j; };
    m.hamiltonian = [](const StateVec& x) { return 0.5 * x(0) * x(0); };
    m.grad_h = [](const StateVec& x, StateVec& g) {
        g.resize(2);
        g << x(0), 0.0;
    };
    m.discrete_gradient = [](const StateVec& y1, const StateVec& y2, StateVec& g) {
        g.resize(2);
        g << 0.5 * (y1(0) + y2(0)), 0.0;
    };
    m.noise = scalar_p_noise(sigma_scale);
    m.initial_value = (StateVec(2) << 1.0, 0.0).finished();
    return m;
}

SystemModel make_rigid_body(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != 3) {
        throw std::invalid_argument("rigid body noise matrix must have 3 rows, got " +
                                    std::to_string(sigma.rows()));
    }
    if (sigma.cols() < 1 || sigma.cols() > 3) {
        throw std::invalid_argument("rigid body noise matrix must have 1 to 3 columns, got " +
                                    std::to_string(sigma.cols()));
    }

    SystemModel m;
    m.id = "rigid_body";
    m.dim = 3;
    m.half_dim = 0;

    const Eigen::Vector3d inertia(0.345, 0.653, 1.0);
    const Eigen::Vector3d inv_inertia = inertia.cwiseInverse();

    m.poisson = [](const StateVec& x, Eigen::MatrixXd& b) {
        b.resize(3, 3);
        b <<  0.0,  -x(2),  x(1),
              x(2),  0.0,  -x(0),
             -x(1),  x(0),  0.0;
    };
    m.hamiltonian = [inv_inertia](const StateVec& x) {
        return 0.5 * (x(0) * x(0) * inv_inertia(0) +
                      x(1) * x(1) * inv_inertia(1) +
                      x(2) * x(2) * inv_inertia(2));
    };
    m.grad_h = [inv_inertia](const StateVec& x, StateVec& g) {
        g = x.cwiseProduct(inv_inertia);
    };
    // Quadratic H: averaged gradient = grad H at the midpoint.
    m.discrete_gradient = [inv_inertia](const StateVec& y1, const StateVec& y2, StateVec& g) {
        g = (0.5 * (y1 + y2)).cwiseProduct(inv_inertia);
    };

    m.noise.sigma_full = sigma;
    m.noise.wiener_dim = sigma.cols();
    m.noise.noise_block_hessian = sigma.transpose() * inv_inertia.asDiagonal() * sigma;

    m.casimir = CasimirForm{Eigen::MatrixXd::Identity(3, 3)};
    m.initial_value = (StateVec(3) << 0.8, 0.6, 0.0).finished();
    return m;
}

MomentEstimates exact_oscillator_moments(const SystemModel& model, const StateVec& x0, double t) {
    if (model.id != "oscillator" || !model.has_exact_moments()) {
        throw std::invalid_argument("exact moments are only available for the oscillator model");
    }
    return model.exact_moments(x0, t);
}

double predicted_energy(const SystemModel& model, double h0, double t) {
    return h0 + 0.5 * model.noise.noise_block_hessian.trace() * t;
}

double predicted_casimir(const SystemModel& model, double c0, double t) {
    if (!model.casimir) {
        throw std::invalid_argument("model '" + model.id + "' has no Casimir");
    }
    const Eigen::MatrixXd& s = model.noise.sigma_full;
    const double slope = 0.5 * (s.transpose() * model.casimir->a_matrix * s).trace();
    return c0 + slope * t;
}

} // namespace driftlab
