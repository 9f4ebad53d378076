#include <doctest.h>

#include "driftlab/errors.hpp"
#include "driftlab/harness.hpp"

#include <cmath>

using namespace driftlab;

namespace {

Eigen::MatrixXd scalar_rb_sigma(double s) {
    return (Eigen::MatrixXd(3, 1) << s, 0.0, 0.0).finished();
}

} // namespace

TEST_CASE("fit_slope recovers exact power laws") {
    const std::vector<double> hs = {0.5, 0.25, 0.125, 0.0625};
    std::vector<double> linear(hs.size()), quadratic(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        linear[i] = 3.0 * hs[i];
        quadratic[i] = 2.0 * hs[i] * hs[i];
    }
    CHECK(fit_slope(hs, linear) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit_slope(hs, quadratic) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("fit_slope flattens on a synthetic noise floor") {
    std::vector<double> hs, errs;
    for (int k = 0; k <= 8; ++k) {
        const double h = std::pow(2.0, -k);
        hs.push_back(h);
        errs.push_back(1e-3 * h + 1e-7);
    }
    CHECK(fit_slope(hs, errs) < 1.0);
}

TEST_CASE("fit_slope rejects bad input") {
    CHECK_THROWS_AS(fit_slope({0.5}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_slope({0.5, 0.25}, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_slope({0.5, -0.25}, {1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("linear_fit recovers an exact line") {
    const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
    const std::vector<double> y = {1.0, 3.0, 5.0, 7.0};
    const LinearFit fit = linear_fit(x, y);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("run_trace on a noiseless single sample is the deterministic trajectory") {
    const SystemModel m = make_oscillator(0.0);
    const TraceReport r = run_trace(m, SchemeId::DP, 0.25, 1.0, 1, 99, Observable::Energy);
    REQUIRE(r.time_grid.size() == 5);
    for (std::size_t i = 0; i < r.time_grid.size(); ++i) {
        CHECK(r.std_error[i] == 0.0);
        CHECK(r.sample_mean[i] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(r.predicted[i] == 0.5);
    }
}

TEST_CASE("run_trace sample mean stays within four standard errors of the line") {
    const SystemModel m = make_oscillator(1.0);
    const TraceReport r =
        run_trace(m, SchemeId::DP, 5.0 / 16.0, 5.0, 500, 0x5EED, Observable::Energy);
    for (std::size_t i = 1; i < r.time_grid.size(); ++i) {
        CHECK(std::abs(r.sample_mean[i] - r.predicted[i]) <= 4.0 * r.std_error[i]);
    }
}

TEST_CASE("run_trace statistics at t = 0 are exact") {
    const SystemModel rb = make_rigid_body(scalar_rb_sigma(0.25));
    const TraceReport r =
        run_trace(rb, SchemeId::DP, 0.125, 1.0, 100, 0x5EED, Observable::Energy);
    CHECK(r.sample_mean.front() == rb.hamiltonian(rb.initial_value));
    CHECK(r.std_error.front() == 0.0);
    CHECK(r.predicted.front() == r.sample_mean.front());
}

TEST_CASE("run_trace casimir on the rigid body") {
    const SystemModel rb = make_rigid_body(scalar_rb_sigma(0.25));
    const TraceReport r =
        run_trace(rb, SchemeId::DP, 0.125, 4.0, 400, 0x5EED, Observable::Casimir);
    CHECK(r.predicted.front() == doctest::Approx(0.5));
    CHECK(r.predicted.back() == doctest::Approx(0.625));
    for (std::size_t i = 1; i < r.time_grid.size(); ++i) {
        CHECK(std::abs(r.sample_mean[i] - r.predicted[i]) <= 4.0 * r.std_error[i]);
    }
}

TEST_CASE("run_trace validates its inputs") {
    const SystemModel osc = make_oscillator(1.0);
    CHECK_THROWS_AS(run_trace(osc, SchemeId::DP, 0.3, 1.0, 10, 1, Observable::Energy),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_trace(osc, SchemeId::DP, 0.25, 1.0, 10, 1, Observable::Casimir),
                    std::invalid_argument);
    const SystemModel rb = make_rigid_body(scalar_rb_sigma(0.25));
    CHECK_THROWS_AS(run_trace(rb, SchemeId::STM, 0.25, 1.0, 10, 1, Observable::Energy),
                    std::invalid_argument);
}

TEST_CASE("run_trace reports are bitwise identical across worker counts") {
    const SystemModel m = make_pendulum(1.0);
    RunOptions one, four, sixteen;
    one.workers = 1;
    four.workers = 4;
    sixteen.workers = 16;
    const TraceReport a = run_trace(m, SchemeId::DP, 0.1, 1.0, 300, 0x5EED,
                                    Observable::Energy, one);
    const TraceReport b = run_trace(m, SchemeId::DP, 0.1, 1.0, 300, 0x5EED,
                                    Observable::Energy, four);
    const TraceReport c = run_trace(m, SchemeId::DP, 0.1, 1.0, 300, 0x5EED,
                                    Observable::Energy, sixteen);
    CHECK(a.sample_mean == b.sample_mean);
    CHECK(a.sample_mean == c.sample_mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.std_error == c.std_error);
}

TEST_CASE("run_trace propagates non-convergence with the failing sample and step") {
    const SystemModel m = make_pendulum(1.0);
    try {
        run_trace(m, SchemeId::DP, 12.5, 100.0, 4, 0x5EED, Observable::Energy);
        FAIL("expected NonConvergenceError");
    } catch (const NonConvergenceError& e) {
        CHECK(e.sample >= 0);
        CHECK(e.step >= 0);
        CHECK(std::string(e.what()).find("sample") != std::string::npos);
    }
}

TEST_CASE("run_strong recovers order one for the drift-preserving scheme") {
    const SystemModel m = make_oscillator(1.0);
    const std::vector<double> hs = {0.125, 0.0625, 0.03125};
    const ConvergenceReport r =
        run_strong(m, SchemeId::DP, hs, 1.0 / 128.0, 1.0, 64, 0x5EED, SchemeId::STM);
    CHECK(r.errors.size() == 3);
    CHECK(r.errors[0] > r.errors[1]);
    CHECK(r.errors[1] > r.errors[2]);
    CHECK(r.fitted_slope > 0.7);
    CHECK(r.fitted_slope < 1.3);
    CHECK(r.mode == ConvergenceMode::Strong);
}

TEST_CASE("run_strong validates the step grid") {
    const SystemModel m = make_oscillator(1.0);
    CHECK_THROWS_AS(
        run_strong(m, SchemeId::DP, {0.0625, 0.125}, 1.0 / 128.0, 1.0, 8, 1, SchemeId::STM),
        std::invalid_argument);
    CHECK_THROWS_AS(run_strong(m, SchemeId::DP, {0.125, 0.0625}, 0.0625, 1.0, 8, 1,
                               SchemeId::STM),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_strong(m, SchemeId::DP, {}, 0.0625, 1.0, 8, 1, SchemeId::STM),
                    std::invalid_argument);
}

TEST_CASE("run_weak without noise measures the deterministic order") {
    const SystemModel m = make_oscillator(0.0);
    const std::vector<double> hs = {0.25, 0.125, 0.0625, 0.03125};

    const WeakReport dp = run_weak(m, SchemeId::DP, hs, 1.0, 1, 0x5EED);
    CHECK(dp.reference == "exact moments");
    for (Eigen::Index c = 0; c < 2; ++c) {
        CHECK(dp.slope_first(c) > 1.8);
        CHECK(dp.slope_first(c) < 2.2);
        CHECK(dp.slope_second(c) > 1.8);
        CHECK(dp.slope_second(c) < 2.2);
    }

    const WeakReport em = run_weak(m, SchemeId::EM, hs, 1.0, 1, 0x5EED);
    CHECK(em.slope_first(0) > 0.8);
    CHECK(em.slope_first(0) < 1.2);
}

TEST_CASE("run_weak falls back to an empirical reference") {
    const SystemModel m = make_pendulum(0.0);
    const std::vector<double> hs = {0.25, 0.125, 0.0625};
    CHECK_THROWS_AS(run_weak(m, SchemeId::DP, hs, 1.0, 1, 1), std::invalid_argument);

    const WeakReport r = run_weak(m, SchemeId::DP, hs, 1.0, 1, 1,
                                  WeakReference{SchemeId::DP, 0.25 / 64.0});
    CHECK(r.reference.find("dp") != std::string::npos);
    for (Eigen::Index c = 0; c < 2; ++c) {
        CHECK(r.slope_first(c) > 1.5);
        CHECK(r.slope_first(c) < 2.5);
    }
}

TEST_CASE("weak reports collapse to max-over-component tables") {
    const SystemModel m = make_oscillator(0.0);
    const std::vector<double> hs = {0.25, 0.125, 0.0625};
    const WeakReport weak = run_weak(m, SchemeId::DP, hs, 1.0, 1, 0x5EED);
    const auto reports = weak.to_reports();
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].mode == ConvergenceMode::WeakM1);
    CHECK(reports[1].mode == ConvergenceMode::WeakM2);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        CHECK(reports[0].errors[i] ==
              weak.first_moment_errors.col(static_cast<Eigen::Index>(i)).maxCoeff());
        CHECK(reports[1].errors[i] ==
              weak.second_moment_errors.col(static_cast<Eigen::Index>(i)).maxCoeff());
    }
}

TEST_CASE("run_single is deterministic and starts at the initial value") {
    const SystemModel m = make_oscillator(1.0);
    const auto a = run_single(m, SchemeId::DP, 0.25, 2.0, 0x5EED);
    const auto b = run_single(m, SchemeId::DP, 0.25, 2.0, 0x5EED);
    REQUIRE(a.size() == 9);
    CHECK(a[0] == m.initial_value);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
    }
    const auto other = run_single(m, SchemeId::DP, 0.25, 2.0, 0x5EEE);
    CHECK(a.back() != other.back());
}
