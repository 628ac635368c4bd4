#pragma once

#include "pdmd/dmd.hpp"
#include "pdmd/pod.hpp"
#include "pdmd/regression.hpp"
#include "pdmd/snapshot.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pdmd {

enum class Variant { monolithic, partitioned };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct OnlineSettings {
    RegressorKind regressor = RegressorKind::linear;
    RegressorOptions options;

    bool operator==(const OnlineSettings&) const = default;
};

/// Offline-trained parametric DMD model.
///
/// Monolithic: one operator over the (n*p)-dimensional stacked coefficients,
/// block i belonging to parameters[i]. Partitioned: operators[i] advances the
/// n coefficients of parameters[i].
struct ParametricDmdModel {
    Variant variant = Variant::partitioned;
    PodBasis pod;
    std::vector<DmdModel> operators;
    std::vector<ParameterPoint> parameters;
    TimeAxis time_axis;
    DmdConfig dmd_config;
    OnlineSettings online;

    Eigen::Index n() const { return pod.rank(); }
    std::size_t p() const { return parameters.size(); }
};

struct ForecastRequest {
    ParameterPoint parameter;
    std::vector<std::int64_t> labels;
    std::optional<OnlineSettings> regressor;
};

struct Forecast {
    std::vector<std::int64_t> labels;
    Matrix reduced;  // n x K
    Matrix full;     // m x K
};

ParametricDmdModel fit_monolithic(const ParametricSnapshotSet& set, Eigen::Index pod_rank, const DmdConfig& config,
                                  const OnlineSettings& online = {});
ParametricDmdModel fit_partitioned(const ParametricSnapshotSet& set, Eigen::Index pod_rank, const DmdConfig& config,
                                   const OnlineSettings& online = {});
ParametricDmdModel fit_parametric(const ParametricSnapshotSet& set, Variant variant, Eigen::Index pod_rank,
                                  const DmdConfig& config, const OnlineSettings& online = {});

/// Reduced training snapshot blocks [X~^{mu_1}; ...; X~^{mu_p}] stacked vertically.
Matrix stack_reduced(const PodBasis& pod, const ParametricSnapshotSet& set);

/// n x p matrix of forecast coefficients; column i belongs to parameters[i].
Matrix predict_reduced(const ParametricDmdModel& model, std::int64_t label);

Forecast forecast_full(const ParametricDmdModel& model, const ForecastRequest& request);

/// Online phase for several parameters at once. The regressor is fitted once
/// per label and evaluated at every query point.
std::vector<Forecast> forecast_many(const ParametricDmdModel& model, const std::vector<ParameterPoint>& points,
                                    const std::vector<std::int64_t>& labels, const OnlineSettings& online);

struct ErrorReport {
    std::vector<std::int64_t> labels;
    std::vector<double> times;
    std::vector<double> mean_error;  // e_I per label, NaN when every term was excluded
    std::vector<ParameterPoint> parameters;
    RealMatrix relative_errors;       // |Q| x labels, NaN where the truth norm is zero
    std::vector<std::size_t> excluded;  // zero-norm terms per label
    std::size_t excluded_total = 0;
    std::size_t training_parameter_count = 0;
    std::int64_t training_time_count = 0;
    RegressorKind regressor = RegressorKind::linear;
};

/// Mean relative l2 error of `predictions` (one m x K matrix per truth member)
/// against the truth snapshots at `labels`.
ErrorReport error_report_from(const std::vector<Matrix>& predictions, const ParametricSnapshotSet& truth,
                              const std::vector<std::int64_t>& labels);

ErrorReport compute_error_report(const ParametricDmdModel& model, const ParametricSnapshotSet& truth,
                                 const std::vector<std::int64_t>& labels,
                                 const std::optional<OnlineSettings>& online = std::nullopt);

}  // namespace pdmd
