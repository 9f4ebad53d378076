#include "driftlab/harness.hpp"

#include "driftlab/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>

namespace driftlab {

namespace {

// Samples are accumulated in fixed chunks of this size; the chunk partition
// and the reduction tree are functions of the sample count alone, so reports
// are bitwise identical for any worker count.
constexpr long kChunkSize = 64;

long checked_steps(double h, double t_end) {
    if (!(h > 0.0) || !(t_end > 0.0)) {
        throw std::invalid_argument("h and t_end must be positive");
    }
    const long n = std::lround(t_end / h);
    if (n < 1 || std::abs(static_cast<double>(n) * h - t_end) >
                     1e-9 * std::max(1.0, std::abs(t_end))) {
        throw std::invalid_argument("step size h must divide t_end");
    }
    return n;
}

long checked_factor(double coarse, double fine) {
    const long f = std::lround(coarse / fine);
    if (f < 1 || std::abs(static_cast<double>(f) * fine - coarse) > 1e-12 * coarse) {
        throw std::invalid_argument("step sizes must be integer multiples of the reference step");
    }
    return f;
}

int resolve_workers(int requested, long n_chunks) {
    long w = requested > 0
                 ? requested
                 : static_cast<long>(std::max(1u, std::thread::hardware_concurrency()));
    return static_cast<int>(std::clamp(w, 1L, std::max(1L, n_chunks)));
}

// Runs chunk_fn(0..n_chunks) on a transient worker pool. Chunks are
// independent; any exception aborts the run and the one from the lowest
// started chunk index is rethrown.
void run_chunks(long n_chunks, int workers_requested, const std::function<void(long)>& chunk_fn) {
    const int workers = resolve_workers(workers_requested, n_chunks);
    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::mutex err_mutex;
    long err_chunk = -1;
    std::exception_ptr error;

    auto worker_loop = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const long c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) {
                break;
            }
            try {
                chunk_fn(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (err_chunk < 0 || c < err_chunk) {
                    err_chunk = c;
                    error = std::current_exception();
                }
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };

    if (workers == 1) {
        worker_loop();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers) - 1);
        for (int i = 0; i + 1 < workers; ++i) {
            pool.emplace_back(worker_loop);
        }
        worker_loop();
        for (auto& t : pool) {
            t.join();
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

// Balanced-tree sum over per-chunk accumulators, keyed by chunk index.
Eigen::VectorXd pairwise_sum(const std::vector<Eigen::VectorXd>& chunks, long lo, long hi) {
    if (hi - lo == 1) {
        return chunks[lo];
    }
    const long mid = lo + (hi - lo) / 2;
    return pairwise_sum(chunks, lo, mid) + pairwise_sum(chunks, mid, hi);
}

NonConvergenceError with_location(const NonConvergenceError& e, long sample, long step) {
    return NonConvergenceError(std::string(e.what()) + " [sample " + std::to_string(sample) +
                                   ", step " + std::to_string(step) + "]",
                               e.residual, e.iterations, sample, step);
}

void require_scheme(SchemeId scheme, const SystemModel& model) {
    if (!scheme_supports(scheme, model)) {
        throw std::invalid_argument("scheme '" + to_string(scheme) +
                                    "' does not support model '" + model.id + "'");
    }
}

} // namespace

std::string to_string(Observable observable) {
    return observable == Observable::Energy ? "energy" : "casimir";
}

Observable parse_observable(const std::string& name) {
    if (name == "energy") return Observable::Energy;
    if (name == "casimir") return Observable::Casimir;
    throw std::invalid_argument("unknown observable '" + name + "'");
}

std::string to_string(ConvergenceMode mode) {
    switch (mode) {
        case ConvergenceMode::Strong: return "strong";
        case ConvergenceMode::WeakM1: return "weak_m1";
        case ConvergenceMode::WeakM2: return "weak_m2";
    }
    return "unknown";
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("linear fit needs at least two (x, y) pairs");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("linear fit needs at least two distinct x values");
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    return fit;
}

double fit_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
    if (hs.size() != errs.size() || hs.size() < 2) {
        throw std::invalid_argument("slope fit needs at least two (h, error) pairs");
    }
    std::vector<double> lx(hs.size()), ly(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        if (!(hs[i] > 0.0) || !(errs[i] > 0.0)) {
            throw std::invalid_argument("slope fit needs positive step sizes and errors");
        }
        lx[i] = std::log(hs[i]);
        ly[i] = std::log(errs[i]);
    }
    return linear_fit(lx, ly).slope;
}

TraceReport run_trace(const SystemModel& model, SchemeId scheme, double h, double t_end,
                      long samples, std::uint64_t seed, Observable observable,
                      const RunOptions& opts) {
    require_scheme(scheme, model);
    if (observable == Observable::Casimir && !model.casimir) {
        throw std::invalid_argument("model '" + model.id + "' has no Casimir to trace");
    }
    if (samples < 1) {
        throw std::invalid_argument("samples must be >= 1");
    }
    const long n_steps = checked_steps(h, t_end);
    const long grid = n_steps + 1;
    const double fine_h = 0.5 * h;

    auto observe = [&](const StateVec& x) {
        return observable == Observable::Energy ? model.hamiltonian(x) : model.casimir->value(x);
    };

    const long n_chunks = (samples + kChunkSize - 1) / kChunkSize;
    std::vector<Eigen::VectorXd> sum_chunks(n_chunks), sq_chunks(n_chunks);

    // Observables are accumulated as deviations from their deterministic
    // initial value, which kills the cancellation noise in the variance and
    // keeps the t = 0 statistics exact.
    const double base = observe(model.initial_value);

    run_chunks(n_chunks, opts.workers, [&](long c) {
        StepperWorkspace ws;
        Eigen::VectorXd sums = Eigen::VectorXd::Zero(grid);
        Eigen::VectorXd sqs = Eigen::VectorXd::Zero(grid);
        StateVec x, x_next;
        const long begin = c * kChunkSize;
        const long end = std::min(samples, begin + kChunkSize);
        for (long s = begin; s < end; ++s) {
            const BrownianPath path =
                sample_path(seed, s, model.noise.wiener_dim, fine_h, 2 * n_steps);
            x = model.initial_value;
            double v = observe(x) - base;
            sums(0) += v;
            sqs(0) += v * v;
            for (long k = 0; k < n_steps; ++k) {
                try {
                    scheme_step(model, scheme, x, h, path.increments.col(2 * k),
                                path.increments.col(2 * k + 1), opts.solver, x_next, ws);
                } catch (const NonConvergenceError& e) {
                    throw with_location(e, s, k);
                }
                x.swap(x_next);
                v = observe(x) - base;
                sums(k + 1) += v;
                sqs(k + 1) += v * v;
            }
        }
        sum_chunks[c] = std::move(sums);
        sq_chunks[c] = std::move(sqs);
    });

    const Eigen::VectorXd total = pairwise_sum(sum_chunks, 0, n_chunks);
    const Eigen::VectorXd total_sq = pairwise_sum(sq_chunks, 0, n_chunks);

    TraceReport report;
    report.observable = observable;
    report.scheme = scheme;
    report.samples = samples;
    report.time_grid.resize(grid);
    report.sample_mean.resize(grid);
    report.std_error.resize(grid);
    report.predicted.resize(grid);

    const double m = static_cast<double>(samples);
    for (long g = 0; g < grid; ++g) {
        const double t = static_cast<double>(g) * h;
        const double dev_mean = total(g) / m;
        double var = 0.0;
        if (samples > 1) {
            var = std::max(0.0, (total_sq(g) - m * dev_mean * dev_mean) / (m - 1.0));
        }
        report.time_grid[g] = t;
        report.sample_mean[g] = base + dev_mean;
        report.std_error[g] = std::sqrt(var / m);
        report.predicted[g] = observable == Observable::Energy
                                  ? predicted_energy(model, base, t)
                                  : predicted_casimir(model, base, t);
    }
    return report;
}

ConvergenceReport run_strong(const SystemModel& model, SchemeId scheme,
                             const std::vector<double>& h_list, double h_ref, double t_end,
                             long samples, std::uint64_t seed, SchemeId reference_scheme,
                             const RunOptions& opts) {
    require_scheme(scheme, model);
    require_scheme(reference_scheme, model);
    if (h_list.empty()) {
        throw std::invalid_argument("h_list must not be empty");
    }
    for (std::size_t i = 1; i < h_list.size(); ++i) {
        if (!(h_list[i] < h_list[i - 1])) {
            throw std::invalid_argument("h_list must be strictly decreasing");
        }
    }
    if (!(h_ref < h_list.back())) {
        throw std::invalid_argument("h_ref must be smaller than every h in h_list");
    }
    if (samples < 1) {
        throw std::invalid_argument("samples must be >= 1");
    }

    const long n_ref = checked_steps(h_ref, t_end);
    const std::size_t n_h = h_list.size();
    std::vector<long> steps(n_h);
    std::vector<long> factors(n_h);
    for (std::size_t i = 0; i < n_h; ++i) {
        steps[i] = checked_steps(h_list[i], t_end);
        factors[i] = checked_factor(h_list[i], h_ref);
    }
    const double fine_h = 0.5 * h_ref;
    const long n_fine = 2 * n_ref;

    const long n_chunks = (samples + kChunkSize - 1) / kChunkSize;
    std::vector<Eigen::VectorXd> errsq_chunks(n_chunks);

    run_chunks(n_chunks, opts.workers, [&](long c) {
        StepperWorkspace ws;
        Eigen::VectorXd errsq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_h));
        StateVec x, x_next, x_ref;
        const long begin = c * kChunkSize;
        const long end = std::min(samples, begin + kChunkSize);
        for (long s = begin; s < end; ++s) {
            const BrownianPath fine =
                sample_path(seed, s, model.noise.wiener_dim, fine_h, n_fine);

            x_ref = model.initial_value;
            for (long k = 0; k < n_ref; ++k) {
                try {
                    scheme_step(model, reference_scheme, x_ref, h_ref, fine.increments.col(2 * k),
                                fine.increments.col(2 * k + 1), opts.solver, x_next, ws);
                } catch (const NonConvergenceError& e) {
                    throw with_location(e, s, k);
                }
                x_ref.swap(x_next);
            }

            for (std::size_t i = 0; i < n_h; ++i) {
                const BrownianPath coarse = coarsen(fine, factors[i]);
                x = model.initial_value;
                for (long k = 0; k < steps[i]; ++k) {
                    try {
                        scheme_step(model, scheme, x, h_list[i], coarse.increments.col(2 * k),
                                    coarse.increments.col(2 * k + 1), opts.solver, x_next, ws);
                    } catch (const NonConvergenceError& e) {
                        throw with_location(e, s, k);
                    }
                    x.swap(x_next);
                }
                errsq(static_cast<Eigen::Index>(i)) += (x - x_ref).squaredNorm();
            }
        }
        errsq_chunks[c] = std::move(errsq);
    });

    const Eigen::VectorXd total = pairwise_sum(errsq_chunks, 0, n_chunks);

    ConvergenceReport report;
    report.mode = ConvergenceMode::Strong;
    report.scheme = scheme;
    report.samples = samples;
    report.step_sizes = h_list;
    report.errors.resize(n_h);
    for (std::size_t i = 0; i < n_h; ++i) {
        report.errors[i] = std::sqrt(total(static_cast<Eigen::Index>(i)) /
                                     static_cast<double>(samples));
    }
    report.fitted_slope = fit_slope(report.step_sizes, report.errors);
    report.reference = "coupled " + to_string(reference_scheme) +
                       " at h_ref=" + std::to_string(h_ref);
    return report;
}

namespace {

// Empirical componentwise mean and second moment of `scheme` at t_end, over
// `samples` paths whose global sample indices start at block_index*samples.
std::pair<Eigen::VectorXd, Eigen::VectorXd> moment_block(
    const SystemModel& model, SchemeId scheme, double h, double t_end, long samples,
    std::uint64_t seed, long block_index, const RunOptions& opts) {
    const long n_steps = checked_steps(h, t_end);
    const double fine_h = 0.5 * h;
    const long n_chunks = (samples + kChunkSize - 1) / kChunkSize;
    std::vector<Eigen::VectorXd> sum_chunks(n_chunks), sq_chunks(n_chunks);
    const long offset = block_index * samples;

    run_chunks(n_chunks, opts.workers, [&](long c) {
        StepperWorkspace ws;
        Eigen::VectorXd sums = Eigen::VectorXd::Zero(model.dim);
        Eigen::VectorXd sqs = Eigen::VectorXd::Zero(model.dim);
        StateVec x, x_next;
        const long begin = c * kChunkSize;
        const long end = std::min(samples, begin + kChunkSize);
        for (long s = begin; s < end; ++s) {
            const long stream = offset + s;
            const BrownianPath path =
                sample_path(seed, stream, model.noise.wiener_dim, fine_h, 2 * n_steps);
            x = model.initial_value;
            for (long k = 0; k < n_steps; ++k) {
                try {
                    scheme_step(model, scheme, x, h, path.increments.col(2 * k),
                                path.increments.col(2 * k + 1), opts.solver, x_next, ws);
                } catch (const NonConvergenceError& e) {
                    throw with_location(e, stream, k);
                }
                x.swap(x_next);
            }
            sums += x;
            sqs += x.cwiseProduct(x);
        }
        sum_chunks[c] = std::move(sums);
        sq_chunks[c] = std::move(sqs);
    });

    const double m = static_cast<double>(samples);
    Eigen::VectorXd mean = pairwise_sum(sum_chunks, 0, n_chunks) / m;
    Eigen::VectorXd second = pairwise_sum(sq_chunks, 0, n_chunks) / m;
    return {std::move(mean), std::move(second)};
}

} // namespace

WeakReport run_weak(const SystemModel& model, SchemeId scheme, const std::vector<double>& h_list,
                    double t_end, long samples, std::uint64_t seed,
                    std::optional<WeakReference> reference, const RunOptions& opts) {
    require_scheme(scheme, model);
    if (h_list.empty()) {
        throw std::invalid_argument("h_list must not be empty");
    }
    for (std::size_t i = 1; i < h_list.size(); ++i) {
        if (!(h_list[i] < h_list[i - 1])) {
            throw std::invalid_argument("h_list must be strictly decreasing");
        }
    }
    if (samples < 1) {
        throw std::invalid_argument("samples must be >= 1");
    }
    if (!model.has_exact_moments() && !reference) {
        throw std::invalid_argument("model '" + model.id +
                                    "' has no exact moments; a weak reference is required");
    }

    const std::size_t n_h = h_list.size();
    WeakReport report;
    report.scheme = scheme;
    report.samples = samples;
    report.step_sizes = h_list;
    report.first_moment_errors.resize(model.dim, static_cast<Eigen::Index>(n_h));
    report.second_moment_errors.resize(model.dim, static_cast<Eigen::Index>(n_h));

    Eigen::VectorXd target_mean, target_second;
    if (model.has_exact_moments()) {
        const MomentEstimates exact = model.exact_moments(model.initial_value, t_end);
        target_mean = exact.mean;
        target_second = exact.second_moment;
        report.reference = "exact moments";
    } else {
        auto [mean, second] = moment_block(model, reference->scheme, reference->h_ref, t_end,
                                           samples, seed, static_cast<long>(n_h), opts);
        target_mean = std::move(mean);
        target_second = std::move(second);
        report.reference = "empirical " + to_string(reference->scheme) +
                           " at h_ref=" + std::to_string(reference->h_ref);
    }

    for (std::size_t i = 0; i < n_h; ++i) {
        auto [mean, second] =
            moment_block(model, scheme, h_list[i], t_end, samples, seed,
                         static_cast<long>(i), opts);
        report.first_moment_errors.col(static_cast<Eigen::Index>(i)) =
            (mean - target_mean).cwiseAbs();
        report.second_moment_errors.col(static_cast<Eigen::Index>(i)) =
            (second - target_second).cwiseAbs();
    }
    return report;
}

double WeakReport::slope_first(Eigen::Index component) const {
    std::vector<double> errs(step_sizes.size());
    for (std::size_t i = 0; i < step_sizes.size(); ++i) {
        errs[i] = first_moment_errors(component, static_cast<Eigen::Index>(i));
    }
    return fit_slope(step_sizes, errs);
}

double WeakReport::slope_second(Eigen::Index component) const {
    std::vector<double> errs(step_sizes.size());
    for (std::size_t i = 0; i < step_sizes.size(); ++i) {
        errs[i] = second_moment_errors(component, static_cast<Eigen::Index>(i));
    }
    return fit_slope(step_sizes, errs);
}

std::vector<ConvergenceReport> WeakReport::to_reports() const {
    std::vector<ConvergenceReport> out(2);
    for (int which = 0; which < 2; ++which) {
        const Eigen::MatrixXd& errors =
            which == 0 ? first_moment_errors : second_moment_errors;
        ConvergenceReport& r = out[which];
        r.mode = which == 0 ? ConvergenceMode::WeakM1 : ConvergenceMode::WeakM2;
        r.scheme = scheme;
        r.samples = samples;
        r.reference = reference;
        r.step_sizes = step_sizes;
        r.errors.resize(step_sizes.size());
        for (std::size_t i = 0; i < step_sizes.size(); ++i) {
            r.errors[i] = errors.col(static_cast<Eigen::Index>(i)).maxCoeff();
        }
        r.fitted_slope = fit_slope(r.step_sizes, r.errors);
    }
    return out;
}

std::vector<StateVec> run_single(const SystemModel& model, SchemeId scheme, double h,
                                 double t_end, std::uint64_t seed, const RunOptions& opts) {
    require_scheme(scheme, model);
    const long n_steps = checked_steps(h, t_end);
    const BrownianPath path =
        sample_path(seed, 0, model.noise.wiener_dim, 0.5 * h, 2 * n_steps);
    std::vector<StateVec> states;
    states.reserve(static_cast<std::size_t>(n_steps) + 1);
    states.push_back(model.initial_value);
    StepperWorkspace ws;
    StateVec x = model.initial_value, x_next;
    for (long k = 0; k < n_steps; ++k) {
        try {
            scheme_step(model, scheme, x, h, path.increments.col(2 * k),
                        path.increments.col(2 * k + 1), opts.solver, x_next, ws);
        } catch (const NonConvergenceError& e) {
            throw with_location(e, 0, k);
        }
        x.swap(x_next);
        states.push_back(x);
    }
    return states;
}

} // namespace driftlab
