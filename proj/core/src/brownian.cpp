#include "driftlab/brownian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace driftlab {

namespace {

// splitmix64 finalizer; full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t key_chain(std::uint64_t seed, std::uint64_t sample, std::uint64_t counter) {
    std::uint64_t k = mix64(seed);
    k = mix64(k ^ mix64(sample + 0x6a09e667f3bcc909ULL));
    k = mix64(k ^ mix64(counter + 0xbb67ae8584caa73bULL));
    return k;
}

// 53-bit uniforms; u1 in (0,1] so the log below is finite.
inline double to_unit_positive(std::uint64_t bits) {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}
inline double to_unit(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace

double counter_gaussian(std::uint64_t master_seed, long sample_index, std::uint64_t counter) {
    const std::uint64_t k = key_chain(master_seed, static_cast<std::uint64_t>(sample_index),
                                      counter);
    const double u1 = to_unit_positive(mix64(k));
    const double u2 = to_unit(mix64(k ^ 0x3c6ef372fe94f82bULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

BrownianPath sample_path(std::uint64_t master_seed, long sample_index, Eigen::Index wiener_dim,
                         double finest_h, long n_fine) {
    if (!(finest_h > 0.0)) {
        throw std::invalid_argument("finest_h must be positive");
    }
    if (n_fine < 1 || wiener_dim < 1) {
        throw std::invalid_argument("path needs at least one increment and one component");
    }
    BrownianPath path;
    path.wiener_dim = wiener_dim;
    path.resolution = finest_h;
    path.master_seed = master_seed;
    path.sample_index = sample_index;
    path.increments.resize(wiener_dim, n_fine);
    const double scale = std::sqrt(finest_h);
    for (long j = 0; j < n_fine; ++j) {
        for (Eigen::Index c = 0; c < wiener_dim; ++c) {
            const std::uint64_t counter =
                static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(wiener_dim) +
                static_cast<std::uint64_t>(c);
            path.increments(c, j) = scale * counter_gaussian(master_seed, sample_index, counter);
        }
    }
    return path;
}

BrownianPath coarsen(const BrownianPath& path, long factor) {
    if (factor < 1) {
        throw std::invalid_argument("coarsening factor must be >= 1");
    }
    if (path.size() % factor != 0) {
        throw std::invalid_argument("coarsening factor " + std::to_string(factor) +
                                    " does not divide path length " +
                                    std::to_string(path.size()));
    }
    BrownianPath out = path;
    out.resolution = path.resolution * static_cast<double>(factor);

    // Halve while the factor is even, then sum any odd remainder
    // left-to-right. Dyadic factors therefore compose exactly.
    long remaining = factor;
    Eigen::MatrixXd cur = path.increments;
    while (remaining % 2 == 0) {
        const Eigen::Index half = cur.cols() / 2;
        Eigen::MatrixXd next(cur.rows(), half);
        for (Eigen::Index j = 0; j < half; ++j) {
            next.col(j) = cur.col(2 * j) + cur.col(2 * j + 1);
        }
        cur.swap(next);
        remaining /= 2;
    }
    if (remaining > 1) {
        const Eigen::Index blocks = cur.cols() / remaining;
        Eigen::MatrixXd next(cur.rows(), blocks);
        for (Eigen::Index j = 0; j < blocks; ++j) {
            next.col(j) = cur.col(j * remaining);
            for (long i = 1; i < remaining; ++i) {
                next.col(j) += cur.col(j * remaining + i);
            }
        }
        cur.swap(next);
    }
    out.increments.swap(cur);
    return out;
}

} // namespace driftlab
