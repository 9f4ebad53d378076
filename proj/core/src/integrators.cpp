#include "driftlab/integrators.hpp"

#include "driftlab/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace driftlab {

namespace {

struct GaussLegendreRule {
    int count;
    double nodes[5];    // on [0,1]
    double weights[5];  // sum to 1
};

// Gauss-Legendre rules mapped from [-1,1] to [0,1]; k nodes integrate
// polynomials of degree <= 2k-1 exactly.
constexpr GaussLegendreRule kGaussRules[5] = {
    {1, {0.5}, {1.0}},
    {2,
     {0.21132486540518713, 0.7886751345948129},
     {0.5, 0.5}},
    {3,
     {0.1127016653792583, 0.5, 0.8872983346207417},
     {0.2777777777777778, 0.4444444444444444, 0.2777777777777778}},
    {4,
     {0.06943184420297371, 0.33000947820757187, 0.6699905217924281, 0.9305681557970262},
     {0.1739274225687269, 0.32607257743127305, 0.32607257743127305, 0.1739274225687269}},
    {5,
     {0.04691007703066802, 0.23076534494715845, 0.5, 0.7692346550528415, 0.9530899229693319},
     {0.11846344252809454, 0.23931433524968323, 0.28444444444444444, 0.23931433524968323,
      0.11846344252809454}},
};

double scaled_update_norm(const StateVec& next, const StateVec& prev) {
    const double delta = (next - prev).lpNorm<Eigen::Infinity>();
    return delta / (1.0 + next.lpNorm<Eigen::Infinity>());
}

void check_solver_settings(const SolverSettings& settings) {
    if (!(settings.fp_tolerance > 0.0) || settings.fp_max_iters < 1) {
        throw std::invalid_argument("fp_tolerance must be positive and fp_max_iters >= 1");
    }
}

} // namespace

SchemeId parse_scheme_id(const std::string& name) {
    if (name == "dp") return SchemeId::DP;
    if (name == "em") return SchemeId::EM;
    if (name == "bem") return SchemeId::BEM;
    if (name == "stm") return SchemeId::STM;
    if (name == "symp") return SchemeId::SPLIT_SYMPLECTIC_EULER;
    if (name == "stormer_verlet") return SchemeId::SPLIT_STORMER_VERLET;
    if (name == "split_euler") return SchemeId::SPLIT_EULER;
    if (name == "split_heun") return SchemeId::SPLIT_HEUN;
    throw std::invalid_argument("unknown scheme id '" + name + "'");
}

std::string to_string(SchemeId id) {
    switch (id) {
        case SchemeId::DP: return "dp";
        case SchemeId::EM: return "em";
        case SchemeId::BEM: return "bem";
        case SchemeId::STM: return "stm";
        case SchemeId::SPLIT_SYMPLECTIC_EULER: return "symp";
        case SchemeId::SPLIT_STORMER_VERLET: return "stormer_verlet";
        case SchemeId::SPLIT_EULER: return "split_euler";
        case SchemeId::SPLIT_HEUN: return "split_heun";
    }
    return "unknown";
}

bool scheme_supports(SchemeId scheme, const SystemModel& model) {
    switch (scheme) {
        case SchemeId::STM:
            return model.id == "oscillator";
        case SchemeId::SPLIT_SYMPLECTIC_EULER:
        case SchemeId::SPLIT_STORMER_VERLET:
            return model.separable();
        default:
            return true;
    }
}

void averaged_gradient(const SystemModel& model, const StateVec& y1, const StateVec& y2,
                       const SolverSettings& settings, StateVec& out, StepperWorkspace& ws) {
    if (model.has_discrete_gradient()) {
        model.discrete_gradient(y1, y2, out);
        return;
    }
    if (settings.quadrature_nodes < 1 || settings.quadrature_nodes > 5) {
        throw std::invalid_argument("quadrature_nodes must be in 1..5");
    }
    const GaussLegendreRule& rule = kGaussRules[settings.quadrature_nodes - 1];
    out.setZero(y1.size());
    for (int i = 0; i < rule.count; ++i) {
        ws.stage = y1 + rule.nodes[i] * (y2 - y1);
        model.grad_h(ws.stage, ws.grad);
        out += rule.weights[i] * ws.grad;
    }
}

StepDiagnostics ep_midstep(const SystemModel& model, const StateVec& y1, double h,
                           const SolverSettings& settings, StateVec& y2, StepperWorkspace& ws) {
    check_solver_settings(settings);
    // Explicit Euler predictor.
    model.grad_h(y1, ws.grad);
    model.poisson(y1, ws.b);
    ws.y_old.noalias() = ws.b * ws.grad;
    ws.y_old *= h;
    ws.y_old += y1;

    double residual = 0.0;
    for (int iter = 1; iter <= settings.fp_max_iters; ++iter) {
        averaged_gradient(model, y1, ws.y_old, settings, ws.avg_grad, ws);
        ws.mid = 0.5 * (y1 + ws.y_old);
        model.poisson(ws.mid, ws.b);
        y2.noalias() = ws.b * ws.avg_grad;
        y2 *= h;
        y2 += y1;

        residual = scaled_update_norm(y2, ws.y_old);
        if (residual <= settings.fp_tolerance) {
            return {iter, residual, true};
        }
        ws.y_old.swap(y2);
    }
    throw NonConvergenceError("energy-preserving midstep did not converge in " +
                                  std::to_string(settings.fp_max_iters) +
                                  " fixed-point iterations (residual " +
                                  std::to_string(residual) + "); reduce the step size",
                              residual, settings.fp_max_iters);
}

StepDiagnostics dp_step(const SystemModel& model, const StateVec& x, double h,
                        Eigen::Ref<const Eigen::VectorXd> dw_first_half,
                        Eigen::Ref<const Eigen::VectorXd> dw_second_half,
                        const SolverSettings& settings, StateVec& out, StepperWorkspace& ws) {
    ws.kicked = x;
    ws.kicked.noalias() += model.noise.sigma_full * dw_first_half;
    const StepDiagnostics diag = ep_midstep(model, ws.kicked, h, settings, out, ws);
    out.noalias() += model.noise.sigma_full * dw_second_half;
    return diag;
}

void em_step(const SystemModel& model, const StateVec& x, double h,
             Eigen::Ref<const Eigen::VectorXd> dw_full, StateVec& out, StepperWorkspace& ws) {
    model.grad_h(x, ws.grad);
    model.poisson(x, ws.b);
    out.noalias() = ws.b * ws.grad;
    out *= h;
    out += x;
    out.noalias() += model.noise.sigma_full * dw_full;
}

StepDiagnostics bem_step(const SystemModel& model, const StateVec& x, double h,
                         Eigen::Ref<const Eigen::VectorXd> dw_full, const SolverSettings& settings,
                         StateVec& out, StepperWorkspace& ws) {
    check_solver_settings(settings);
    ws.kicked = x;
    ws.kicked.noalias() += model.noise.sigma_full * dw_full;

    // Predictor: one explicit Euler drift from the kicked state.
    model.grad_h(ws.kicked, ws.grad);
    model.poisson(ws.kicked, ws.b);
    ws.y_old.noalias() = ws.b * ws.grad;
    ws.y_old *= h;
    ws.y_old += ws.kicked;

    double residual = 0.0;
    for (int iter = 1; iter <= settings.fp_max_iters; ++iter) {
        model.grad_h(ws.y_old, ws.grad);
        model.poisson(ws.y_old, ws.b);
        out.noalias() = ws.b * ws.grad;
        out *= h;
        out += ws.kicked;

        residual = scaled_update_norm(out, ws.y_old);
        if (residual <= settings.fp_tolerance) {
            return {iter, residual, true};
        }
        ws.y_old.swap(out);
    }
    throw NonConvergenceError("backward Euler-Maruyama solve did not converge in " +
                                  std::to_string(settings.fp_max_iters) +
                                  " fixed-point iterations (residual " +
                                  std::to_string(residual) + "); reduce the step size",
                              residual, settings.fp_max_iters);
}

void stm_step(const SystemModel& model, const StateVec& x, double h,
              Eigen::Ref<const Eigen::VectorXd> dw_full, StateVec& out, StepperWorkspace& ws) {
    if (model.id != "oscillator") {
        throw std::invalid_argument("stm is only defined for the oscillator model");
    }
    ws.kicked = x;
    ws.kicked.noalias() += model.noise.sigma_full * dw_full;
    const double c = std::cos(h), s = std::sin(h);
    out.resize(2);
    out(0) = c * ws.kicked(0) - s * ws.kicked(1);
    out(1) = s * ws.kicked(0) + c * ws.kicked(1);
}

void split_det_step(const SystemModel& model, const StateVec& x, double h,
                    Eigen::Ref<const Eigen::VectorXd> dw_first_half,
                    Eigen::Ref<const Eigen::VectorXd> dw_second_half,
                    SplitVariant variant, StateVec& out, StepperWorkspace& ws) {
    ws.kicked = x;
    ws.kicked.noalias() += model.noise.sigma_full * dw_first_half;
    const Eigen::Index m = model.half_dim;

    switch (variant) {
        case SplitVariant::SymplecticEuler: {
            if (!model.separable()) {
                throw std::invalid_argument("symplectic Euler midstep needs a separable model");
            }
            model.grad_h(ws.kicked, ws.grad);
            out = ws.kicked;
            out.head(m) -= h * ws.grad.tail(m);
            out.tail(m) += h * out.head(m);
            break;
        }
        case SplitVariant::StormerVerlet: {
            if (!model.separable()) {
                throw std::invalid_argument("Stormer-Verlet midstep needs a separable model");
            }
            model.grad_h(ws.kicked, ws.grad);
            out = ws.kicked;
            out.head(m) -= 0.5 * h * ws.grad.tail(m);
            out.tail(m) += h * out.head(m);
            model.grad_h(out, ws.grad);
            out.head(m) -= 0.5 * h * ws.grad.tail(m);
            break;
        }
        case SplitVariant::Euler: {
            model.grad_h(ws.kicked, ws.grad);
            model.poisson(ws.kicked, ws.b);
            out.noalias() = ws.b * ws.grad;
            out *= h;
            out += ws.kicked;
            break;
        }
        case SplitVariant::Heun: {
            model.grad_h(ws.kicked, ws.grad);
            model.poisson(ws.kicked, ws.b);
            ws.stage.noalias() = ws.b * ws.grad;  // k1
            ws.y_trial = ws.kicked + h * ws.stage;
            model.grad_h(ws.y_trial, ws.grad);
            model.poisson(ws.y_trial, ws.b);
            out.noalias() = ws.b * ws.grad;  // k2
            out += ws.stage;
            out *= 0.5 * h;
            out += ws.kicked;
            break;
        }
    }
    out.noalias() += model.noise.sigma_full * dw_second_half;
}

StepDiagnostics scheme_step(const SystemModel& model, SchemeId scheme, const StateVec& x,
                            double h, Eigen::Ref<const Eigen::VectorXd> dw_first_half,
                            Eigen::Ref<const Eigen::VectorXd> dw_second_half,
                            const SolverSettings& settings,
                            StateVec& out, StepperWorkspace& ws) {
    switch (scheme) {
        case SchemeId::DP:
            return dp_step(model, x, h, dw_first_half, dw_second_half, settings, out, ws);
        case SchemeId::EM:
            ws.dw_sum = dw_first_half + dw_second_half;
            em_step(model, x, h, ws.dw_sum, out, ws);
            return {};
        case SchemeId::BEM:
            ws.dw_sum = dw_first_half + dw_second_half;
            return bem_step(model, x, h, ws.dw_sum, settings, out, ws);
        case SchemeId::STM:
            ws.dw_sum = dw_first_half + dw_second_half;
            stm_step(model, x, h, ws.dw_sum, out, ws);
            return {};
        case SchemeId::SPLIT_SYMPLECTIC_EULER:
            split_det_step(model, x, h, dw_first_half, dw_second_half,
                           SplitVariant::SymplecticEuler, out, ws);
            return {};
        case SchemeId::SPLIT_STORMER_VERLET:
            split_det_step(model, x, h, dw_first_half, dw_second_half,
                           SplitVariant::StormerVerlet, out, ws);
            return {};
        case SchemeId::SPLIT_EULER:
            split_det_step(model, x, h, dw_first_half, dw_second_half, SplitVariant::Euler, out,
                           ws);
            return {};
        case SchemeId::SPLIT_HEUN:
            split_det_step(model, x, h, dw_first_half, dw_second_half, SplitVariant::Heun, out,
                           ws);
            return {};
    }
    throw std::logic_error("unhandled scheme id");
}

} // namespace driftlab
