#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace driftlab {

/// Wiener increments at a fixed resolution, one column per increment.
/// Every entry is a pure function of (master_seed, sample_index, position),
/// so paths are reproducible regardless of generation order or thread count.
struct BrownianPath {
    Eigen::Index wiener_dim = 0;
    double resolution = 0.0;  // time step of each increment
    std::uint64_t master_seed = 0;
    long sample_index = 0;
    Eigen::MatrixXd increments;  // wiener_dim x n_increments, N(0, resolution I) columns

    long size() const { return static_cast<long>(increments.cols()); }
};

/// N(0,1) draw keyed on (master_seed, sample_index, counter); counter-based,
/// stateless.
double counter_gaussian(std::uint64_t master_seed, long sample_index, std::uint64_t counter);

/// n_fine independent increments of a d-dimensional Wiener process at
/// resolution finest_h. Component c of increment j uses counter j*d + c.
BrownianPath sample_path(std::uint64_t master_seed, long sample_index, Eigen::Index wiener_dim,
                         double finest_h, long n_fine);

/// Sums consecutive blocks of `factor` increments and scales the resolution
/// accordingly. Block sums use a fixed halving order, so coarsening by 2
/// twice is bitwise identical to coarsening by 4 once. Throws
/// std::invalid_argument when factor does not divide the path length.
BrownianPath coarsen(const BrownianPath& path, long factor);

} // namespace driftlab
