// Acceptance suite: runs every target experiment at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero if any criterion
// fails.

#include "driftlab/brownian.hpp"
#include "driftlab/csv_io.hpp"
#include "driftlab/harness.hpp"
#include "driftlab/integrators.hpp"
#include "driftlab/models.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace driftlab;

namespace {

constexpr std::uint64_t kSeed = 0x5EED;
int failures = 0;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(int index, const std::string& name, bool pass, const std::string& details) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << index << ": " << name;
    if (!details.empty()) {
        std::cout << " (" << details << ")";
    }
    std::cout << std::endl;
    if (!pass) {
        ++failures;
    }
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream out;
    out.precision(digits);
    out << v;
    return out.str();
}

// Largest |mean - predicted| / std_error over the grid; grid points with zero
// standard error must match the line exactly.
struct TraceCheck {
    bool ok = true;
    double max_z = 0.0;
};

TraceCheck check_four_se(const TraceReport& r) {
    TraceCheck c;
    for (std::size_t i = 0; i < r.time_grid.size(); ++i) {
        const double dev = std::abs(r.sample_mean[i] - r.predicted[i]);
        if (r.std_error[i] == 0.0) {
            c.ok = c.ok && dev == 0.0;
        } else {
            c.max_z = std::max(c.max_z, dev / r.std_error[i]);
            c.ok = c.ok && dev <= 4.0 * r.std_error[i];
        }
    }
    return c;
}

Eigen::MatrixXd scalar_rb_sigma(double s) {
    return (Eigen::MatrixXd(3, 1) << s, 0.0, 0.0).finished();
}

std::vector<double> dyadic_grid(int from, int to) {
    std::vector<double> hs;
    for (int k = from; k <= to; ++k) {
        hs.push_back(std::pow(2.0, -k));
    }
    return hs;
}

StateVec random_state(std::mt19937_64& rng, Eigen::Index dim, double box = 1.0) {
    std::uniform_real_distribution<double> dist(-box, box);
    StateVec x(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        x(i) = dist(rng);
    }
    return x;
}

void criterion_1_oscillator_trace() {
    Timer timer;
    const SystemModel m = make_oscillator(1.0);
    const TraceReport r = run_trace(m, SchemeId::DP, 100.0 / 256.0, 100.0, 10000, kSeed,
                                    Observable::Energy);
    const TraceCheck c = check_four_se(r);
    report(1, "oscillator energy trace stays within 4 standard errors", c.ok,
           "max z=" + fmt(c.max_z) + ", " + fmt(timer.seconds(), 2) + "s");
}

void criterion_2_rigid_body_trace() {
    Timer timer;
    const SystemModel m = make_rigid_body(scalar_rb_sigma(0.25));
    const TraceReport energy =
        run_trace(m, SchemeId::DP, 0.125, 4.0, 10000, kSeed, Observable::Energy);
    const TraceReport casimir =
        run_trace(m, SchemeId::DP, 0.125, 4.0, 10000, kSeed, Observable::Casimir);
    const TraceCheck ce = check_four_se(energy);
    const TraceCheck cc = check_four_se(casimir);

    const double e_slope = (energy.predicted.back() - energy.predicted.front()) / 4.0;
    const double c_slope = (casimir.predicted.back() - casimir.predicted.front()) / 4.0;
    const bool constants_ok = std::abs(energy.predicted.front() - 1.203186) <= 2e-5 &&
                              std::abs(e_slope - 0.090580) <= 1e-5 &&
                              std::abs(casimir.predicted.front() - 0.5) <= 1e-12 &&
                              std::abs(c_slope - 0.03125) <= 1e-12;

    report(2, "rigid body energy and casimir traces follow the predicted lines",
           ce.ok && cc.ok && constants_ok,
           "max z energy=" + fmt(ce.max_z) + ", casimir=" + fmt(cc.max_z) + ", " +
               fmt(timer.seconds(), 2) + "s");
}

void criterion_3_two_dimensional_noise() {
    Timer timer;
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(3, 2);
    sigma(0, 0) = 0.25;
    sigma(1, 1) = 0.25;
    const SystemModel m = make_rigid_body(sigma);

    const double h = 4.0 / 64.0;
    const TraceReport energy =
        run_trace(m, SchemeId::DP, h, 4.0, 10000, kSeed, Observable::Energy);
    const TraceReport casimir =
        run_trace(m, SchemeId::DP, h, 4.0, 10000, kSeed, Observable::Casimir);
    const TraceCheck ce = check_four_se(energy);
    const TraceCheck cc = check_four_se(casimir);

    const double e_slope = (energy.predicted.back() - energy.predicted.front()) / 4.0;
    const double c_slope = (casimir.predicted.back() - casimir.predicted.front()) / 4.0;
    const double e_expected = 0.5 * (0.0625 / 0.345 + 0.0625 / 0.653);
    const bool slopes_ok =
        std::abs(c_slope - 0.0625) <= 1e-12 && std::abs(e_slope - e_expected) <= 1e-12;

    report(3, "two-dimensional-noise rigid body traces follow the predicted lines",
           ce.ok && cc.ok && slopes_ok,
           "energy slope=" + fmt(e_slope, 6) + ", casimir slope=" + fmt(c_slope, 6) +
               ", max z=" + fmt(std::max(ce.max_z, cc.max_z)) + ", " + fmt(timer.seconds(), 2) +
               "s");
}

void criterion_4_deterministic_preservation() {
    Timer timer;
    bool ok = true;
    std::string details;

    {
        const SystemModel m = make_pendulum(0.0);
        const auto states = run_single(m, SchemeId::DP, 0.01, 100.0, kSeed);
        const double h0 = m.hamiltonian(states.front());
        double max_dev = 0.0;
        for (const StateVec& x : states) {
            max_dev = std::max(max_dev, std::abs(m.hamiltonian(x) - h0));
        }
        ok = ok && max_dev <= 1e-8;
        details += "pendulum dH=" + fmt(max_dev, 2);
    }
    {
        const SystemModel m = make_rigid_body(Eigen::MatrixXd::Zero(3, 1));
        const auto states = run_single(m, SchemeId::DP, 0.01, 100.0, kSeed);
        const double h0 = m.hamiltonian(states.front());
        const double c0 = m.casimir->value(states.front());
        double max_h = 0.0, max_c = 0.0;
        for (const StateVec& x : states) {
            max_h = std::max(max_h, std::abs(m.hamiltonian(x) - h0));
            max_c = std::max(max_c, std::abs(m.casimir->value(x) - c0));
        }
        ok = ok && max_h <= 1e-8 && max_c <= 1e-8;
        details += ", rigid dH=" + fmt(max_h, 2) + " dC=" + fmt(max_c, 2);
    }
    report(4, "noise-free drift-preserving runs conserve H and C to 1e-8", ok,
           details + ", " + fmt(timer.seconds(), 2) + "s");
}

void criterion_5_strong_order() {
    Timer timer;
    const std::vector<double> hs = dyadic_grid(6, 10);
    const double h_ref = std::pow(2.0, -12);

    const SystemModel osc = make_oscillator(1.0);
    const ConvergenceReport dp_osc =
        run_strong(osc, SchemeId::DP, hs, h_ref, 1.0, 1000, kSeed, SchemeId::STM);

    const SystemModel rb = make_rigid_body(scalar_rb_sigma(0.25));
    const ConvergenceReport dp_rb =
        run_strong(rb, SchemeId::DP, hs, h_ref, 0.75, 1000, kSeed, SchemeId::DP);

    const ConvergenceReport em_osc =
        run_strong(osc, SchemeId::EM, hs, h_ref, 1.0, 1000, kSeed, SchemeId::STM);

    bool dp_monotone = true;
    for (std::size_t i = 1; i < dp_osc.errors.size(); ++i) {
        dp_monotone = dp_monotone && dp_osc.errors[i] < dp_osc.errors[i - 1];
    }

    const bool dp_osc_ok =
        dp_osc.fitted_slope >= 0.8 && dp_osc.fitted_slope <= 1.2 && dp_monotone;
    const bool dp_rb_ok = dp_rb.fitted_slope >= 0.8 && dp_rb.fitted_slope <= 1.2;
    const bool em_ok = em_osc.fitted_slope >= 0.35 && em_osc.fitted_slope <= 0.65;

    report(5, "strong convergence slopes (DP in [0.8,1.2]; EM in [0.35,0.65])",
           dp_osc_ok && dp_rb_ok && em_ok,
           "DP oscillator=" + fmt(dp_osc.fitted_slope) + ", DP rigid=" +
               fmt(dp_rb.fitted_slope) + ", EM oscillator=" + fmt(em_osc.fitted_slope) + ", " +
               fmt(timer.seconds(), 2) + "s");
}

void criterion_6_weak_order() {
    Timer timer;
    const SystemModel m = make_oscillator(0.1);
    const std::vector<double> hs = dyadic_grid(4, 8);
    const WeakReport weak = run_weak(m, SchemeId::DP, hs, 1.0, 100000, kSeed);

    const double sp = weak.slope_first(0), sq = weak.slope_first(1);
    const double sp2 = weak.slope_second(0), sq2 = weak.slope_second(1);
    auto in_band = [](double s) { return s >= 1.6 && s <= 2.4; };
    const bool ok = in_band(sp) && in_band(sq) && in_band(sp2) && in_band(sq2);

    report(6, "weak moment-error slopes all in [1.6,2.4]", ok,
           "E[p]=" + fmt(sp) + ", E[q]=" + fmt(sq) + ", E[p^2]=" + fmt(sp2) + ", E[q^2]=" +
               fmt(sq2) + ", M=100000, " + fmt(timer.seconds(), 2) + "s");
}

void criterion_7_baseline_traces() {
    Timer timer;
    const SystemModel m = make_oscillator(1.0);
    const double h = 100.0 / 256.0;

    const TraceReport em = run_trace(m, SchemeId::EM, h, 100.0, 10000, kSeed,
                                     Observable::Energy);
    bool em_explodes = false;
    double t_cross = -1.0;
    for (std::size_t i = 1; i + 1 < em.time_grid.size(); ++i) {
        if (em.sample_mean[i] > 2.0 * em.predicted[i]) {
            em_explodes = true;
            t_cross = em.time_grid[i];
            break;
        }
    }

    const TraceReport bem = run_trace(m, SchemeId::BEM, h, 100.0, 10000, kSeed,
                                      Observable::Energy);
    const bool bem_lags = bem.sample_mean.back() < 0.5 * bem.predicted.back();

    report(7, "EM mean energy explodes past 2x the line; BEM stays under 0.5x at T",
           em_explodes && bem_lags,
           "EM crosses at t=" + fmt(t_cross) + ", BEM(T)/line=" +
               fmt(bem.sample_mean.back() / bem.predicted.back()) + ", " +
               fmt(timer.seconds(), 2) + "s");
}

void criterion_8_symplectic_splitting() {
    Timer timer;
    const SystemModel m = make_oscillator(1.0);
    const double h = 100.0 / 128.0;

    auto fit_mean_line = [&](SchemeId scheme) {
        const TraceReport r = run_trace(m, scheme, h, 100.0, 10000, kSeed, Observable::Energy);
        return linear_fit(r.time_grid, r.sample_mean);
    };

    const LinearFit symp = fit_mean_line(SchemeId::SPLIT_SYMPLECTIC_EULER);
    const LinearFit verlet = fit_mean_line(SchemeId::SPLIT_STORMER_VERLET);
    auto drift_ok = [](const LinearFit& f) {
        return std::abs(f.slope - 0.5) <= 0.125 && f.r_squared >= 0.99;
    };

    const TraceReport euler = run_trace(m, SchemeId::SPLIT_EULER, h, 100.0, 10000, kSeed,
                                        Observable::Energy);
    bool euler_explodes = false;
    for (std::size_t i = 1; i + 1 < euler.time_grid.size(); ++i) {
        if (euler.sample_mean[i] > 10.0 * euler.predicted[i]) {
            euler_explodes = true;
            break;
        }
    }

    report(8, "symplectic splittings drift linearly near rate 0.5; split Euler explodes",
           drift_ok(symp) && drift_ok(verlet) && euler_explodes,
           "SYMP slope=" + fmt(symp.slope) + " R2=" + fmt(symp.r_squared, 5) + ", ST slope=" +
               fmt(verlet.slope) + " R2=" + fmt(verlet.r_squared, 5) + ", " +
               fmt(timer.seconds(), 2) + "s");
}

bool property_midstep_preservation() {
    std::mt19937_64 rng(401);
    std::vector<SystemModel> models;
    models.push_back(make_oscillator(1.0));
    models.push_back(make_pendulum(1.0));
    models.push_back(make_free_particle(1.0));
    models.push_back(make_rigid_body(scalar_rb_sigma(0.25)));
    StepperWorkspace ws;
    StateVec y2;
    for (const SystemModel& m : models) {
        for (const double h : {1e-2, 1e-1}) {
            for (int i = 0; i < 1000; ++i) {
                const StateVec y1 = random_state(rng, m.dim);
                ep_midstep(m, y1, h, {}, y2, ws);
                if (std::abs(m.hamiltonian(y2) - m.hamiltonian(y1)) > 1e-10) {
                    return false;
                }
                if (m.casimir &&
                    std::abs(m.casimir->value(y2) - m.casimir->value(y1)) > 1e-10) {
                    return false;
                }
            }
        }
    }
    return true;
}

bool property_skew_symmetry() {
    std::mt19937_64 rng(402);
    std::vector<SystemModel> models;
    models.push_back(make_oscillator(1.0));
    models.push_back(make_pendulum(1.0));
    models.push_back(make_rigid_body(scalar_rb_sigma(0.25)));
    Eigen::MatrixXd b;
    for (const SystemModel& m : models) {
        for (int i = 0; i < 1000; ++i) {
            const StateVec x = random_state(rng, m.dim, 2.0);
            m.poisson(x, b);
            if ((b + b.transpose()).cwiseAbs().maxCoeff() > 1e-14) {
                return false;
            }
        }
    }
    return true;
}

bool property_discrete_gradient_identity() {
    std::mt19937_64 rng(403);
    std::vector<SystemModel> models;
    models.push_back(make_oscillator(1.0));
    models.push_back(make_pendulum(1.0));
    models.push_back(make_rigid_body(scalar_rb_sigma(0.25)));
    StateVec g;
    for (const SystemModel& m : models) {
        for (int i = 0; i < 1000; ++i) {
            const StateVec y1 = random_state(rng, m.dim, 2.0);
            const StateVec y2 = random_state(rng, m.dim, 2.0);
            m.discrete_gradient(y1, y2, g);
            if (std::abs(g.dot(y2 - y1) - (m.hamiltonian(y2) - m.hamiltonian(y1))) > 1e-10) {
                return false;
            }
        }
    }
    return true;
}

bool property_quadrature_exactness() {
    StepperWorkspace ws;
    const StateVec zero = StateVec::Zero(1);
    const StateVec one = StateVec::Ones(1);
    for (int nodes = 1; nodes <= 5; ++nodes) {
        SolverSettings settings;
        settings.quadrature_nodes = nodes;
        for (int degree = 0; degree <= 2 * nodes - 1; ++degree) {
            SystemModel m;
            m.id = "monomial";
            m.dim = 1;
            m.grad_h = [degree](const StateVec& x, StateVec& g) {
                g.resize(1);
                g(0) = std::pow(x(0), degree);
            };
            StateVec out;
            averaged_gradient(m, zero, one, settings, out, ws);
            if (std::abs(out(0) - 1.0 / (degree + 1)) > 1e-13) {
                return false;
            }
        }
    }
    return true;
}

bool property_closed_form_equivalence() {
    const SystemModel m = make_oscillator(1.0);
    std::mt19937_64 rng(404);
    std::normal_distribution<double> gauss(0.0, 0.6);
    StepperWorkspace ws;
    StateVec out;
    for (int i = 0; i < 200; ++i) {
        const StateVec x = random_state(rng, 2, 2.0);
        const double h = i % 2 == 0 ? 100.0 / 256.0 : 0.1;
        const double w1 = gauss(rng), w2 = gauss(rng);
        dp_step(m, x, h, (StateVec(1) << w1).finished(), (StateVec(1) << w2).finished(), {},
                out, ws);
        const double f = 1.0 / (1.0 + h * h / 4.0);
        const double p = x(0) + w1, q = x(1);
        StateVec expected(2);
        expected(0) = f * ((1.0 - h * h / 4.0) * p - h * q) + w2;
        expected(1) = f * (h * p + (1.0 - h * h / 4.0) * q);
        if ((out - expected).cwiseAbs().maxCoeff() > 1e-11) {
            return false;
        }
    }
    return true;
}

bool property_coarsening_exactness() {
    const BrownianPath p = sample_path(kSeed, 3, 2, 0.0625, 64);
    const BrownianPath by4 = coarsen(p, 4);
    const BrownianPath twice = coarsen(coarsen(p, 2), 2);
    if (by4.increments != twice.increments) {
        return false;
    }
    const BrownianPath by2 = coarsen(p, 2);
    for (Eigen::Index j = 0; j < by2.increments.cols(); ++j) {
        for (Eigen::Index c = 0; c < 2; ++c) {
            if (by2.increments(c, j) !=
                p.increments(c, 2 * j) + p.increments(c, 2 * j + 1)) {
                return false;
            }
        }
    }
    return true;
}

bool property_worker_reproducibility() {
    const SystemModel m = make_pendulum(1.0);
    RunOptions opts;
    opts.workers = 1;
    const TraceReport a = run_trace(m, SchemeId::DP, 0.1, 1.0, 256, kSeed,
                                    Observable::Energy, opts);
    opts.workers = 4;
    const TraceReport b = run_trace(m, SchemeId::DP, 0.1, 1.0, 256, kSeed,
                                    Observable::Energy, opts);
    opts.workers = 16;
    const TraceReport c = run_trace(m, SchemeId::DP, 0.1, 1.0, 256, kSeed,
                                    Observable::Energy, opts);
    return a.sample_mean == b.sample_mean && a.sample_mean == c.sample_mean &&
           a.std_error == b.std_error && a.std_error == c.std_error;
}

void criterion_9_property_suites() {
    Timer timer;
    struct Entry {
        const char* name;
        bool ok;
    };
    const Entry entries[] = {
        {"midstep preservation", property_midstep_preservation()},
        {"skew symmetry", property_skew_symmetry()},
        {"discrete gradient identity", property_discrete_gradient_identity()},
        {"quadrature exactness", property_quadrature_exactness()},
        {"closed-form map equivalence", property_closed_form_equivalence()},
        {"coarsening exactness", property_coarsening_exactness()},
        {"worker reproducibility", property_worker_reproducibility()},
    };
    bool ok = true;
    std::string bad;
    for (const Entry& e : entries) {
        ok = ok && e.ok;
        if (!e.ok) {
            bad += std::string(bad.empty() ? "" : ", ") + e.name;
        }
    }
    report(9, "statistics-free property suites", ok,
           (ok ? std::string("all 7 suites") : "failing: " + bad) + ", " +
               fmt(timer.seconds(), 2) + "s");
}

} // namespace

// With no argument runs every criterion; with an index 1..9 runs just that
// one (used by ctest to report them separately).
int main(int argc, char** argv) {
    void (*criteria[])() = {
        criterion_1_oscillator_trace,   criterion_2_rigid_body_trace,
        criterion_3_two_dimensional_noise, criterion_4_deterministic_preservation,
        criterion_5_strong_order,       criterion_6_weak_order,
        criterion_7_baseline_traces,    criterion_8_symplectic_splitting,
        criterion_9_property_suites,
    };
    constexpr int n = static_cast<int>(sizeof(criteria) / sizeof(criteria[0]));

    if (argc > 1) {
        const int index = std::atoi(argv[1]);
        if (index < 1 || index > n) {
            std::cerr << "usage: " << argv[0] << " [criterion 1.." << n << "]\n";
            return 2;
        }
        criteria[index - 1]();
        return failures == 0 ? 0 : 1;
    }

    Timer total;
    for (const auto& criterion : criteria) {
        criterion();
    }
    std::cout << (failures == 0 ? "all criteria passed" :
                                  std::to_string(failures) + " criterion(s) failed")
              << " in " << fmt(total.seconds(), 3) << "s" << std::endl;
    return failures == 0 ? 0 : 1;
}
