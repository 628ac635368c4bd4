#include "pdmd/pod.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>

namespace pdmd {

namespace {

struct LeftSvd {
    Matrix u;  // leading left singular vectors (at least `rank` columns)
    RealVector s;
};

template <typename Mat>
LeftSvd direct_svd(const Mat& a) {
    Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU);
    return {svd.matrixU().template cast<Complex>(), svd.singularValues()};
}

template <typename Mat>
LeftSvd gram_svd(const Mat& a, Eigen::Index rank) {
    const Mat gram = a.adjoint() * a;
    Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
    if (eig.info() != Eigen::Success) throw Error(ErrorCode::numerical, "Gram eigendecomposition failed");
    const Eigen::Index k = gram.rows();
    RealVector s(k);
    for (Eigen::Index i = 0; i < k; ++i) s(i) = std::sqrt(std::max(0.0, eig.eigenvalues()(k - 1 - i)));

    Mat u(a.rows(), rank);
    for (Eigen::Index i = 0; i < rank; ++i) {
        if (s(i) <= 0.0) throw Error(ErrorCode::rank_out_of_bounds, "requested POD rank exceeds the numerical rank");
        u.col(i) = a * eig.eigenvectors().col(k - 1 - i) / s(i);
    }
    // Gram eigenvectors lose orthogonality for small singular values; restore it
    // without changing the span.
    Eigen::HouseholderQR<Mat> qr(u);
    Mat q = qr.householderQ() * Mat::Identity(a.rows(), rank);
    const Mat r = qr.matrixQR().topLeftCorner(rank, rank);
    // QR may flip phases; align each column with the vector it came from.
    for (Eigen::Index i = 0; i < rank; ++i) {
        const auto d = r(i, i);
        if (std::abs(d) > 0.0) q.col(i) *= d / std::abs(d);
    }
    return {q.template cast<Complex>(), s};
}

void fix_phases(Matrix& modes) {
    for (Eigen::Index j = 0; j < modes.cols(); ++j) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < modes.rows(); ++i) {
            const double mag = std::abs(modes(i, j));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (best <= 0.0) continue;
        const Complex phase = std::conj(modes(arg, j)) / best;
        modes.col(j) *= phase;
        modes(arg, j) = Complex(std::abs(modes(arg, j)), 0.0);
    }
}

}  // namespace

Matrix assemble_global_matrix(const ParametricSnapshotSet& set) {
    require_valid(set);
    const Eigen::Index m = set.m();
    const Eigen::Index n_t = set.time_axis.count;
    Matrix global(m, n_t * static_cast<Eigen::Index>(set.p()));
    for (std::size_t i = 0; i < set.p(); ++i) {
        global.middleCols(static_cast<Eigen::Index>(i) * n_t, n_t) = set.members[i].values;
    }
    return global;
}

PodBasis fit_pod(const Matrix& global, Eigen::Index rank) {
    const Eigen::Index m = global.rows();
    const Eigen::Index k = global.cols();
    const Eigen::Index max_rank = std::min(m, k);
    if (rank < 1 || rank > max_rank) {
        throw Error(ErrorCode::rank_out_of_bounds, "POD rank " + std::to_string(rank) + " outside [1, " +
                                                       std::to_string(max_rank) + "]");
    }

    const bool gram_path = static_cast<double>(m) > kGramPathRatio * static_cast<double>(k);
    const bool real_input = (global.imag().array() == 0.0).all();

    LeftSvd svd;
    if (real_input) {
        const RealMatrix re = global.real();
        svd = gram_path ? gram_svd(re, rank) : direct_svd(re);
    } else {
        svd = gram_path ? gram_svd(global, rank) : direct_svd(global);
    }

    PodBasis basis;
    basis.modes = svd.u.leftCols(rank);
    basis.singular_values = svd.s.head(max_rank);
    fix_phases(basis.modes);
    return basis;
}

Eigen::Index rank_for_energy(const RealVector& singular_values, double tau) {
    if (singular_values.size() == 0) throw Error(ErrorCode::invalid_argument, "empty singular-value list");
    if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::invalid_argument, "energy fraction must lie in (0, 1]");
    const double total = singular_values.squaredNorm();
    if (total == 0.0) return 1;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
        acc += singular_values(i) * singular_values(i);
        if (acc >= tau * total) return i + 1;
    }
    return singular_values.size();
}

Matrix project(const PodBasis& basis, const Matrix& columns) {
    if (columns.rows() != basis.m()) {
        throw Error(ErrorCode::dimension_mismatch, "cannot project " + std::to_string(columns.rows()) +
                                                       "-row data onto a basis of height " + std::to_string(basis.m()));
    }
    return basis.modes.adjoint() * columns;
}

Matrix lift(const PodBasis& basis, const Matrix& reduced) {
    if (reduced.rows() != basis.rank()) {
        throw Error(ErrorCode::dimension_mismatch, "cannot lift " + std::to_string(reduced.rows()) +
                                                       " coefficients through a rank-" + std::to_string(basis.rank()) +
                                                       " basis");
    }
    return basis.modes * reduced;
}

}  // namespace pdmd
