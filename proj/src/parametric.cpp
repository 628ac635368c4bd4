#include "pdmd/parametric.hpp"

#include "pdmd/parallel.hpp"

#include <cmath>
#include <limits>

namespace pdmd {

const char* to_string(Variant v) {
    return v == Variant::monolithic ? "monolithic" : "partitioned";
}

Variant variant_from_string(const std::string& name) {
    if (name == "monolithic") return Variant::monolithic;
    if (name == "partitioned") return Variant::partitioned;
    throw Error(ErrorCode::invalid_argument, "unknown variant '" + name + "' (expected monolithic or partitioned)");
}

namespace {

void check_training_inputs(const ParametricSnapshotSet& set, Eigen::Index pod_rank, const DmdConfig& config) {
    require_valid(set);
    const Eigen::Index bound = std::min<Eigen::Index>(set.m(), set.time_axis.count * static_cast<Eigen::Index>(set.p()));
    if (pod_rank < 1 || pod_rank > bound) {
        throw Error(ErrorCode::rank_out_of_bounds, "POD rank " + std::to_string(pod_rank) + " outside [1, " +
                                                       std::to_string(bound) + "]");
    }
    config.validate(0, set.time_axis.count);
}

ParametricDmdModel skeleton(const ParametricSnapshotSet& set, Variant variant, PodBasis pod, const DmdConfig& config,
                            const OnlineSettings& online) {
    ParametricDmdModel model;
    model.variant = variant;
    model.pod = std::move(pod);
    model.parameters = set.parameters();
    model.time_axis = set.time_axis;
    model.dmd_config = config;
    model.online = online;
    return model;
}

}  // namespace

Matrix stack_reduced(const PodBasis& pod, const ParametricSnapshotSet& set) {
    const Eigen::Index n = pod.rank();
    Matrix stacked(n * static_cast<Eigen::Index>(set.p()), set.time_axis.count);
    for (std::size_t i = 0; i < set.p(); ++i) {
        stacked.middleRows(static_cast<Eigen::Index>(i) * n, n) = project(pod, set.members[i].values);
    }
    return stacked;
}

ParametricDmdModel fit_monolithic(const ParametricSnapshotSet& set, Eigen::Index pod_rank, const DmdConfig& config,
                                  const OnlineSettings& online) {
    check_training_inputs(set, pod_rank, config);
    ParametricDmdModel model =
        skeleton(set, Variant::monolithic, fit_pod(assemble_global_matrix(set), pod_rank), config, online);
    model.operators.push_back(fit(stack_reduced(model.pod, set), config, set.time_axis.label_origin));
    return model;
}

ParametricDmdModel fit_partitioned(const ParametricSnapshotSet& set, Eigen::Index pod_rank, const DmdConfig& config,
                                   const OnlineSettings& online) {
    check_training_inputs(set, pod_rank, config);
    ParametricDmdModel model =
        skeleton(set, Variant::partitioned, fit_pod(assemble_global_matrix(set), pod_rank), config, online);
    model.operators.resize(set.p());
    parallel_for(set.p(), [&](std::size_t i) {
        try {
            model.operators[i] =
                fit(project(model.pod, set.members[i].values), config, set.time_axis.label_origin);
        } catch (const Error& e) {
            throw Error(e.code(), "operator for parameter " + to_string(set.members[i].parameter) + ": " + e.what());
        }
    });
    return model;
}

ParametricDmdModel fit_parametric(const ParametricSnapshotSet& set, Variant variant, Eigen::Index pod_rank,
                                  const DmdConfig& config, const OnlineSettings& online) {
    return variant == Variant::monolithic ? fit_monolithic(set, pod_rank, config, online)
                                          : fit_partitioned(set, pod_rank, config, online);
}

Matrix predict_reduced(const ParametricDmdModel& model, std::int64_t label) {
    const Eigen::Index n = model.n();
    const auto p = static_cast<Eigen::Index>(model.p());
    Matrix out(n, p);
    if (model.variant == Variant::monolithic) {
        const Vector stacked = forecast(model.operators.at(0), label);
        for (Eigen::Index i = 0; i < p; ++i) out.col(i) = stacked.segment(i * n, n);
    } else {
        for (Eigen::Index i = 0; i < p; ++i) out.col(i) = forecast(model.operators.at(static_cast<std::size_t>(i)), label);
    }
    return out;
}

std::vector<Forecast> forecast_many(const ParametricDmdModel& model, const std::vector<ParameterPoint>& points,
                                    const std::vector<std::int64_t>& labels, const OnlineSettings& online) {
    if (labels.empty()) throw Error(ErrorCode::invalid_argument, "forecast request has no labels");
    for (const auto& q : points) {
        if (q.dim() != model.parameters.front().dim()) {
            throw Error(ErrorCode::dimension_mismatch, "query parameter " + to_string(q) + " has dimension " +
                                                           std::to_string(q.dim()) + ", model expects " +
                                                           std::to_string(model.parameters.front().dim()));
        }
    }
    const Eigen::Index n = model.n();
    const auto k = static_cast<Eigen::Index>(labels.size());
    std::vector<Forecast> out(points.size());
    for (auto& f : out) {
        f.labels = labels;
        f.reduced.resize(n, k);
    }
    for (Eigen::Index j = 0; j < k; ++j) {
        const Matrix x3 = predict_reduced(model, labels[static_cast<std::size_t>(j)]);
        const Regressor reg = fit_regressor(online.regressor, model.parameters, x3.transpose(), online.options);
        for (std::size_t q = 0; q < points.size(); ++q) out[q].reduced.col(j) = reg.evaluate(points[q]);
    }
    for (auto& f : out) f.full = lift(model.pod, f.reduced);
    return out;
}

Forecast forecast_full(const ParametricDmdModel& model, const ForecastRequest& request) {
    return forecast_many(model, {request.parameter}, request.labels, request.regressor.value_or(model.online)).front();
}

ErrorReport error_report_from(const std::vector<Matrix>& predictions, const ParametricSnapshotSet& truth,
                              const std::vector<std::int64_t>& labels) {
    if (predictions.size() != truth.p()) {
        throw Error(ErrorCode::dimension_mismatch, std::to_string(predictions.size()) + " predictions for " +
                                                       std::to_string(truth.p()) + " truth members");
    }
    for (std::int64_t label : labels) {
        if (!truth.time_axis.contains(label)) {
            throw Error(ErrorCode::invalid_argument, "truth time axis does not cover label " + std::to_string(label));
        }
    }
    const auto q = static_cast<Eigen::Index>(truth.p());
    const auto k = static_cast<Eigen::Index>(labels.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();

    ErrorReport report;
    report.labels = labels;
    report.parameters = truth.parameters();
    report.relative_errors = RealMatrix::Constant(q, k, nan);
    report.mean_error.assign(labels.size(), nan);
    report.excluded.assign(labels.size(), 0);
    for (Eigen::Index j = 0; j < k; ++j) {
        const std::int64_t label = labels[static_cast<std::size_t>(j)];
        report.times.push_back(truth.time_axis.time_of(label));
        double sum = 0.0;
        std::size_t used = 0;
        for (Eigen::Index i = 0; i < q; ++i) {
            const Matrix& pred = predictions[static_cast<std::size_t>(i)];
            if (pred.rows() != truth.m() || pred.cols() != k) {
                throw Error(ErrorCode::dimension_mismatch, "prediction for truth member " + std::to_string(i) +
                                                               " is not " + std::to_string(truth.m()) + " x " +
                                                               std::to_string(k));
            }
            const auto x = truth.members[static_cast<std::size_t>(i)].values.col(truth.time_axis.column_of(label));
            const double norm = x.norm();
            if (norm == 0.0) {
                ++report.excluded[static_cast<std::size_t>(j)];
                continue;
            }
            const double e = (pred.col(j) - x).norm() / norm;
            report.relative_errors(i, j) = e;
            sum += e;
            ++used;
        }
        report.excluded_total += report.excluded[static_cast<std::size_t>(j)];
        if (used > 0) report.mean_error[static_cast<std::size_t>(j)] = sum / static_cast<double>(used);
    }
    return report;
}

ErrorReport compute_error_report(const ParametricDmdModel& model, const ParametricSnapshotSet& truth,
                                 const std::vector<std::int64_t>& labels,
                                 const std::optional<OnlineSettings>& online) {
    require_valid(truth);
    if (truth.m() != model.pod.m()) {
        throw Error(ErrorCode::dimension_mismatch, "truth snapshots have m=" + std::to_string(truth.m()) +
                                                       ", model has m=" + std::to_string(model.pod.m()));
    }
    for (std::int64_t label : labels) {
        if (!truth.time_axis.contains(label)) {
            throw Error(ErrorCode::invalid_argument, "truth time axis does not cover label " + std::to_string(label));
        }
    }
    const OnlineSettings settings = online.value_or(model.online);
    const auto forecasts = forecast_many(model, truth.parameters(), labels, settings);
    std::vector<Matrix> predictions;
    predictions.reserve(forecasts.size());
    for (const auto& f : forecasts) predictions.push_back(f.full);
    ErrorReport report = error_report_from(predictions, truth, labels);
    report.training_parameter_count = model.p();
    report.training_time_count = model.time_axis.count;
    report.regressor = settings.regressor;
    return report;
}

}  // namespace pdmd
