#include "pdmd/regression.hpp"

#include "pdmd/delaunay.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace pdmd {

const char* to_string(RegressorKind kind) {
    switch (kind) {
        case RegressorKind::linear: return "linear";
        case RegressorKind::nearest: return "nearest";
        case RegressorKind::cubic_1d: return "cubic";
        case RegressorKind::rbf: return "rbf";
        case RegressorKind::gpr: return "gpr";
    }
    return "linear";
}

RegressorKind regressor_kind_from_string(const std::string& name) {
    if (name == "linear") return RegressorKind::linear;
    if (name == "nearest") return RegressorKind::nearest;
    if (name == "cubic" || name == "cubic-1d") return RegressorKind::cubic_1d;
    if (name == "rbf") return RegressorKind::rbf;
    if (name == "gpr") return RegressorKind::gpr;
    throw Error(ErrorCode::invalid_argument, "unknown regressor '" + name + "' (expected linear|nearest|cubic|rbf|gpr)");
}

double thin_plate(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

namespace detail {

class RegressorImpl {
public:
    virtual ~RegressorImpl() = default;
    /// Prediction for every real target column.
    virtual RealVector evaluate(const ParameterPoint& q) const = 0;
    virtual RealVector variance(const ParameterPoint&) const {
        throw Error(ErrorCode::invalid_argument, "posterior variance is only defined for the gpr regressor");
    }
};

}  // namespace detail

namespace {

using detail::RegressorImpl;

class NearestImpl final : public RegressorImpl {
public:
    NearestImpl(const std::vector<ParameterPoint>& pts, RealMatrix targets) : pts_(pts), targets_(std::move(targets)) {}

    RealVector evaluate(const ParameterPoint& q) const override {
        std::size_t best = 0;
        double best_d = distance(pts_[0], q);
        for (std::size_t i = 1; i < pts_.size(); ++i) {
            const double d = distance(pts_[i], q);
            if (d < best_d) {  // ties keep the lowest index
                best_d = d;
                best = i;
            }
        }
        return targets_.row(static_cast<Eigen::Index>(best)).transpose();
    }

private:
    std::vector<ParameterPoint> pts_;
    RealMatrix targets_;
};

// Sorted abscissae shared by the 1-D kinds.
struct Sorted1D {
    std::vector<double> x;
    RealMatrix y;

    Sorted1D(const std::vector<ParameterPoint>& pts, const RealMatrix& targets) {
        std::vector<std::size_t> order(pts.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return pts[a][0] < pts[b][0]; });
        x.resize(pts.size());
        y.resize(targets.rows(), targets.cols());
        for (std::size_t i = 0; i < order.size(); ++i) {
            x[i] = pts[order[i]][0];
            y.row(static_cast<Eigen::Index>(i)) = targets.row(static_cast<Eigen::Index>(order[i]));
        }
    }

    std::size_t interval(double q) const {
        if (q < x.front() || q > x.back()) {
            std::ostringstream os;
            os.precision(17);
            os << "query " << q << " outside the training abscissa range [" << x.front() << ", " << x.back() << "]";
            throw Error(ErrorCode::extrapolation, os.str());
        }
        const auto it = std::upper_bound(x.begin(), x.end(), q);
        const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - x.begin()), x.size() - 1);
        return hi - 1;
    }
};

class Linear1DImpl final : public RegressorImpl {
public:
    Linear1DImpl(const std::vector<ParameterPoint>& pts, const RealMatrix& targets) : data_(pts, targets) {}

    RealVector evaluate(const ParameterPoint& q) const override {
        const std::size_t i = data_.interval(q[0]);
        const double x0 = data_.x[i], x1 = data_.x[i + 1];
        const double w = (q[0] - x0) / (x1 - x0);
        const auto r0 = static_cast<Eigen::Index>(i);
        if (w == 0.0) return data_.y.row(r0).transpose();
        if (w == 1.0) return data_.y.row(r0 + 1).transpose();
        return ((1.0 - w) * data_.y.row(r0) + w * data_.y.row(r0 + 1)).transpose();
    }

private:
    Sorted1D data_;
};

class Linear2DImpl final : public RegressorImpl {
public:
    Linear2DImpl(const std::vector<ParameterPoint>& pts, RealMatrix targets)
        : tri_(to_points(pts)), targets_(std::move(targets)) {}

    RealVector evaluate(const ParameterPoint& q) const override {
        const auto loc = tri_.locate({q[0], q[1]});
        if (!loc) {
            std::ostringstream os;
            os.precision(17);
            os << "query " << to_string(q) << " outside the convex hull of the training parameters; hull vertices:";
            for (std::size_t v : tri_.hull()) os << " (" << tri_.points()[v].x << ", " << tri_.points()[v].y << ")";
            throw Error(ErrorCode::extrapolation, os.str());
        }
        const auto& t = tri_.triangles()[loc->triangle];
        RealVector out = RealVector::Zero(targets_.cols());
        for (int k = 0; k < 3; ++k) {
            if (loc->barycentric[k] != 0.0) {
                out += loc->barycentric[k] * targets_.row(static_cast<Eigen::Index>(t[k])).transpose();
            }
        }
        return out;
    }

private:
    static std::vector<Point2> to_points(const std::vector<ParameterPoint>& pts) {
        std::vector<Point2> out;
        out.reserve(pts.size());
        for (const auto& p : pts) out.push_back({p[0], p[1]});
        return out;
    }

    Delaunay2D tri_;
    RealMatrix targets_;
};

// Natural cubic spline (zero second derivative at both ends).
class Cubic1DImpl final : public RegressorImpl {
public:
    Cubic1DImpl(const std::vector<ParameterPoint>& pts, const RealMatrix& targets) : data_(pts, targets) {
        const auto n = static_cast<Eigen::Index>(data_.x.size());
        second_ = RealMatrix::Zero(n, targets.cols());
        // Thomas algorithm on the interior equations.
        const Eigen::Index interior = n - 2;
        std::vector<double> diag(interior), upper(interior), lower(interior);
        RealMatrix rhs(interior, targets.cols());
        for (Eigen::Index i = 1; i <= interior; ++i) {
            const double h0 = data_.x[i] - data_.x[i - 1];
            const double h1 = data_.x[i + 1] - data_.x[i];
            lower[i - 1] = h0;
            diag[i - 1] = 2.0 * (h0 + h1);
            upper[i - 1] = h1;
            rhs.row(i - 1) = 6.0 * ((data_.y.row(i + 1) - data_.y.row(i)) / h1 - (data_.y.row(i) - data_.y.row(i - 1)) / h0);
        }
        for (Eigen::Index i = 1; i < interior; ++i) {
            const double f = lower[i] / diag[i - 1];
            diag[i] -= f * upper[i - 1];
            rhs.row(i) -= f * rhs.row(i - 1);
        }
        for (Eigen::Index i = interior - 1; i >= 0; --i) {
            RealVector row = rhs.row(i).transpose();
            if (i + 1 < interior) row -= upper[i] * second_.row(i + 2).transpose();
            second_.row(i + 1) = (row / diag[i]).transpose();
        }
    }

    RealVector evaluate(const ParameterPoint& q) const override {
        const std::size_t i = data_.interval(q[0]);
        const auto r = static_cast<Eigen::Index>(i);
        const double x0 = data_.x[i], x1 = data_.x[i + 1];
        const double h = x1 - x0;
        const double a = (x1 - q[0]) / h;
        const double b = (q[0] - x0) / h;
        if (b == 0.0) return data_.y.row(r).transpose();
        if (a == 0.0) return data_.y.row(r + 1).transpose();
        return (a * data_.y.row(r) + b * data_.y.row(r + 1) +
                ((a * a * a - a) * second_.row(r) + (b * b * b - b) * second_.row(r + 1)) * (h * h / 6.0))
            .transpose();
    }

private:
    Sorted1D data_;
    RealMatrix second_;
};

// Thin-plate spline with an appended affine (or constant) polynomial.
class RbfImpl final : public RegressorImpl {
public:
    RbfImpl(const std::vector<ParameterPoint>& pts, const RealMatrix& targets) : pts_(pts) {
        const auto p = static_cast<Eigen::Index>(pts.size());
        const auto q = static_cast<Eigen::Index>(pts.front().dim());

        RealMatrix affine(p, q + 1);
        for (Eigen::Index i = 0; i < p; ++i) {
            affine(i, 0) = 1.0;
            for (Eigen::Index k = 0; k < q; ++k) affine(i, k + 1) = pts[i][k];
        }
        Eigen::FullPivLU<RealMatrix> poly_rank(affine);
        poly_terms_ = (p >= q + 1 && poly_rank.rank() == q + 1) ? q + 1 : 1;

        const Eigen::Index size = p + poly_terms_;
        RealMatrix system = RealMatrix::Zero(size, size);
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) system(i, j) = thin_plate(distance(pts[i], pts[j]));
            for (Eigen::Index k = 0; k < poly_terms_; ++k) {
                system(i, p + k) = affine(i, k);
                system(p + k, i) = affine(i, k);
            }
        }
        RealMatrix rhs = RealMatrix::Zero(size, targets.cols());
        rhs.topRows(p) = targets;
        Eigen::FullPivLU<RealMatrix> lu(system);
        if (!lu.isInvertible()) throw Error(ErrorCode::degenerate_geometry, "thin-plate system is singular");
        coeffs_ = lu.solve(rhs);
    }

    RealVector evaluate(const ParameterPoint& q) const override {
        const auto p = static_cast<Eigen::Index>(pts_.size());
        RealVector basis(p + poly_terms_);
        for (Eigen::Index i = 0; i < p; ++i) basis(i) = thin_plate(distance(pts_[i], q));
        basis(p) = 1.0;
        for (Eigen::Index k = 1; k < poly_terms_; ++k) basis(p + k) = q[k - 1];
        return coeffs_.transpose() * basis;
    }

private:
    std::vector<ParameterPoint> pts_;
    Eigen::Index poly_terms_ = 1;
    RealMatrix coeffs_;
};

// Zero-mean GP, squared-exponential kernel. Columns sharing the same
// noise-to-signal ratio share one Cholesky factor.
class GprImpl final : public RegressorImpl {
public:
    GprImpl(const std::vector<ParameterPoint>& pts, const RealMatrix& targets, const RegressorOptions& opt)
        : pts_(pts) {
        const auto p = static_cast<Eigen::Index>(pts.size());
        lengthscale_ = opt.gpr_lengthscale ? *opt.gpr_lengthscale : median_distance(pts);
        if (!(lengthscale_ > 0.0) || !std::isfinite(lengthscale_)) {
            throw Error(ErrorCode::invalid_argument, "GPR lengthscale must be positive");
        }
        if (opt.gpr_noise && !(*opt.gpr_noise >= 0.0)) {
            throw Error(ErrorCode::invalid_argument, "GPR noise must be >= 0");
        }

        RealMatrix corr(p, p);
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) corr(i, j) = correlation(pts[i], pts[j]);
        }

        const Eigen::Index cols = targets.cols();
        signal_.resize(cols);
        noise_ratio_.resize(cols);
        for (Eigen::Index c = 0; c < cols; ++c) {
            signal_(c) = signal_scale(targets.col(c));
            noise_ratio_(c) = opt.gpr_noise ? *opt.gpr_noise / signal_(c) : 1e-8;
        }

        // alpha = (R + rho^2 I)^{-1} y per column; the posterior mean is r(x)^T alpha.
        alpha_.resize(p, cols);
        group_of_.resize(cols);
        std::map<double, std::vector<Eigen::Index>> groups;
        for (Eigen::Index c = 0; c < cols; ++c) groups[noise_ratio_(c)].push_back(c);
        for (const auto& [rho, members] : groups) {
            Factor f = factorize(corr, rho * rho);
            for (Eigen::Index c : members) {
                alpha_.col(c) = f.llt.solve(targets.col(c));
                group_of_[c] = factors_.size();
            }
            factors_.push_back(std::move(f));
        }
    }

    RealVector evaluate(const ParameterPoint& q) const override {
        return alpha_.transpose() * kernel_vector(q);
    }

    RealVector variance(const ParameterPoint& q) const override {
        const RealVector r = kernel_vector(q);
        RealVector out(alpha_.cols());
        for (Eigen::Index c = 0; c < alpha_.cols(); ++c) {
            const auto& f = factors_[group_of_[c]];
            const double explained = r.dot(f.llt.solve(r));
            const double rho2 = noise_ratio_(c) * noise_ratio_(c);
            out(c) = signal_(c) * signal_(c) * std::max(0.0, 1.0 + rho2 - explained);
        }
        return out;
    }

private:
    struct Factor {
        Eigen::LLT<RealMatrix> llt;
    };

    double correlation(const ParameterPoint& a, const ParameterPoint& b) const {
        const double d = distance(a, b);
        return std::exp(-d * d / (2.0 * lengthscale_ * lengthscale_));
    }

    RealVector kernel_vector(const ParameterPoint& q) const {
        RealVector r(static_cast<Eigen::Index>(pts_.size()));
        for (std::size_t i = 0; i < pts_.size(); ++i) r(static_cast<Eigen::Index>(i)) = correlation(pts_[i], q);
        return r;
    }

    static Factor factorize(const RealMatrix& corr, double nugget) {
        const auto p = corr.rows();
        // Escalate the jitter until the factorization is positive definite.
        double jitter = 0.0;
        for (int attempt = 0; attempt < 12; ++attempt) {
            RealMatrix k = corr;
            k.diagonal().array() += nugget + jitter;
            Factor f{Eigen::LLT<RealMatrix>(k)};
            if (f.llt.info() == Eigen::Success && (f.llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all()) {
                return f;
            }
            jitter = jitter == 0.0 ? 1e-14 : jitter * 10.0;
        }
        throw Error(ErrorCode::numerical, "GPR kernel matrix of size " + std::to_string(p) +
                                              " is not positive definite even with jitter");
    }

    static double median_distance(const std::vector<ParameterPoint>& pts) {
        std::vector<double> d;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = i + 1; j < pts.size(); ++j) d.push_back(distance(pts[i], pts[j]));
        }
        if (d.empty()) return 1.0;
        const std::size_t mid = d.size() / 2;
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
        if (d.size() % 2 == 1) return d[mid];
        const double upper = d[mid];
        const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
        return 0.5 * (lower + upper);
    }

    // Standard deviation of the targets; falls back to the RMS value (constant
    // targets) and then to 1 (all-zero targets).
    static double signal_scale(const RealVector& y) {
        const double mean = y.mean();
        const double sd = std::sqrt((y.array() - mean).square().mean());
        if (sd > 0.0) return sd;
        const double rms = std::sqrt(y.array().square().mean());
        return rms > 0.0 ? rms : 1.0;
    }

    std::vector<ParameterPoint> pts_;
    double lengthscale_ = 1.0;
    RealVector signal_;
    RealVector noise_ratio_;
    RealMatrix alpha_;
    std::vector<std::size_t> group_of_;
    std::vector<Factor> factors_;
};

}  // namespace

Vector Regressor::evaluate(const ParameterPoint& point) const {
    if (point.dim() != parameter_dim()) {
        throw Error(ErrorCode::dimension_mismatch, "query has dimension " + std::to_string(point.dim()) +
                                                       ", regressor expects " + std::to_string(parameter_dim()));
    }
    const RealVector r = impl_->evaluate(point);
    const Eigen::Index n = values_.cols();
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = Complex(r(i), r(n + i));
    return out;
}

RealVector Regressor::gpr_variance(const ParameterPoint& point) const {
    if (point.dim() != parameter_dim()) throw Error(ErrorCode::dimension_mismatch, "query dimension mismatch");
    return impl_->variance(point);
}

Regressor fit_regressor(RegressorKind kind, std::vector<ParameterPoint> points, Matrix values,
                        const RegressorOptions& options) {
    const std::size_t p = points.size();
    if (p == 0) throw Error(ErrorCode::invalid_argument, "regressor needs at least one training point");
    if (static_cast<std::size_t>(values.rows()) != p) {
        throw Error(ErrorCode::dimension_mismatch, "regressor got " + std::to_string(values.rows()) +
                                                       " value rows for " + std::to_string(p) + " points");
    }
    const std::size_t q = points.front().dim();
    if (q == 0) throw Error(ErrorCode::invalid_argument, "parameter points have no coordinates");
    for (std::size_t i = 0; i < p; ++i) {
        if (points[i].dim() != q) throw Error(ErrorCode::dimension_mismatch, "parameter dimensions differ");
        for (std::size_t j = 0; j < i; ++j) {
            if (points[i] == points[j]) {
                throw Error(ErrorCode::duplicate_points, "duplicate training point " + to_string(points[i]));
            }
        }
    }

    const Eigen::Index n = values.cols();
    RealMatrix targets(static_cast<Eigen::Index>(p), 2 * n);
    targets.leftCols(n) = values.real();
    targets.rightCols(n) = values.imag();

    Regressor out;
    out.kind_ = kind;
    switch (kind) {
        case RegressorKind::nearest:
            out.impl_ = std::make_shared<NearestImpl>(points, std::move(targets));
            break;
        case RegressorKind::linear:
            if (q == 1) {
                if (p < 2) throw Error(ErrorCode::degenerate_geometry, "1-D linear interpolation needs 2 points");
                out.impl_ = std::make_shared<Linear1DImpl>(points, targets);
            } else if (q == 2) {
                out.impl_ = std::make_shared<Linear2DImpl>(points, std::move(targets));
            } else {
                throw Error(ErrorCode::invalid_argument, "linear interpolation supports 1-D and 2-D parameters, got " +
                                                             std::to_string(q) + "-D");
            }
            break;
        case RegressorKind::cubic_1d:
            if (q != 1) {
                throw Error(ErrorCode::invalid_argument, "cubic interpolation needs a 1-D parameter space, got " +
                                                             std::to_string(q) + "-D (use rbf in 2-D)");
            }
            if (p < 3) throw Error(ErrorCode::degenerate_geometry, "cubic spline needs at least 3 points");
            out.impl_ = std::make_shared<Cubic1DImpl>(points, targets);
            break;
        case RegressorKind::rbf:
            out.impl_ = std::make_shared<RbfImpl>(points, targets);
            break;
        case RegressorKind::gpr:
            out.impl_ = std::make_shared<GprImpl>(points, targets, options);
            break;
    }
    out.points_ = std::move(points);
    out.values_ = std::move(values);
    return out;
}

}  // namespace pdmd
