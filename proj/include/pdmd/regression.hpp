#pragma once

#include "pdmd/snapshot.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pdmd {

enum class RegressorKind { linear, nearest, cubic_1d, rbf, gpr };

const char* to_string(RegressorKind kind);
/// Accepts the CLI spellings: linear, nearest, cubic (or cubic-1d), rbf, gpr.
RegressorKind regressor_kind_from_string(const std::string& name);

/// Hyperparameters. GPR defaults: lengthscale = median pairwise training
/// distance, signal scale = standard deviation of each target component,
/// noise = 1e-8 * signal scale. An explicit noise is an absolute sigma_n.
struct RegressorOptions {
    std::optional<double> gpr_lengthscale;
    std::optional<double> gpr_noise;

    bool operator==(const RegressorOptions&) const = default;
};

namespace detail {
class RegressorImpl;
}

/// Fitted map from parameter space to C^n. Complex targets are regressed
/// componentwise on their real and imaginary parts. Distances are Euclidean in
/// raw parameter coordinates; scale parameters beforehand if needed.
class Regressor {
public:
    RegressorKind kind() const { return kind_; }
    const std::vector<ParameterPoint>& points() const { return points_; }
    const Matrix& values() const { return values_; }  // p x n
    std::size_t parameter_dim() const { return points_.front().dim(); }

    /// Throws Error(extrapolation) for linear / cubic-1d queries outside the
    /// convex hull (abscissa range) of the training points.
    Vector evaluate(const ParameterPoint& point) const;

    /// Posterior variance per real component (re parts then im parts).
    /// GPR only; reported, never used by the pipeline.
    RealVector gpr_variance(const ParameterPoint& point) const;

private:
    friend Regressor fit_regressor(RegressorKind, std::vector<ParameterPoint>, Matrix, const RegressorOptions&);

    RegressorKind kind_ = RegressorKind::nearest;
    std::vector<ParameterPoint> points_;
    Matrix values_;
    std::shared_ptr<const detail::RegressorImpl> impl_;
};

Regressor fit_regressor(RegressorKind kind, std::vector<ParameterPoint> points, Matrix values,
                        const RegressorOptions& options = {});

inline Vector evaluate(const Regressor& regressor, const ParameterPoint& point) { return regressor.evaluate(point); }

/// Thin-plate kernel r^2 log r (0 at r = 0).
double thin_plate(double r);

}  // namespace pdmd
