#pragma once

#include "pdmd/snapshot.hpp"

namespace pdmd {

struct PodBasis {
    Matrix modes;                // m x n, orthonormal columns
    RealVector singular_values;  // full spectrum, non-increasing, length min(m, K)

    Eigen::Index rank() const { return modes.cols(); }
    Eigen::Index m() const { return modes.rows(); }
};

/// [X^{mu_1} ... X^{mu_p}] in member order.
Matrix assemble_global_matrix(const ParametricSnapshotSet& set);

/// Columns per SVD path: above this ratio of rows to columns the Gram
/// ("method of snapshots") eigendecomposition is used instead of a direct SVD.
inline constexpr double kGramPathRatio = 4.0;

/// First `rank` left singular vectors of `global`. Each mode is rotated so that
/// its largest-magnitude entry is real and positive.
PodBasis fit_pod(const Matrix& global, Eigen::Index rank);

/// Smallest n whose retained energy sum(s_i^2, i<=n) / sum(s_i^2) reaches tau.
/// Advisory only; training always takes an explicit rank.
Eigen::Index rank_for_energy(const RealVector& singular_values, double tau);

Matrix project(const PodBasis& basis, const Matrix& columns);
Matrix lift(const PodBasis& basis, const Matrix& reduced);

}  // namespace pdmd
