#include "pdmd/sensitivity.hpp"

#include "pdmd/delaunay.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace pdmd {

std::vector<std::vector<std::size_t>> nested_random_subsets(const std::vector<std::size_t>& pool,
                                                            std::size_t initial, std::size_t step,
                                                            std::size_t final_size, std::uint64_t seed,
                                                            const std::vector<std::size_t>& required) {
    const std::size_t first = std::max(initial, required.size());
    if (initial < 1 || first > final_size || final_size > pool.size()) {
        throw Error(ErrorCode::invalid_argument, "subset schedule needs 1 <= initial <= final <= pool size (" +
                                                     std::to_string(pool.size()) + "), first subset has " +
                                                     std::to_string(first) + " members");
    }
    if (step < 1 && first < final_size) throw Error(ErrorCode::invalid_argument, "subset step must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> rest = pool;
    std::vector<std::size_t> current;
    for (std::size_t r : required) {
        const auto it = std::find(rest.begin(), rest.end(), r);
        if (it == rest.end()) throw Error(ErrorCode::invalid_argument, "required member " + std::to_string(r) + " is not in the pool");
        current.push_back(r);
        rest.erase(it);
    }
    auto draw = [&](std::size_t count) {
        for (std::size_t c = 0; c < count; ++c) {
            std::uniform_int_distribution<std::size_t> pick(0, rest.size() - 1);
            const std::size_t at = pick(rng);
            current.push_back(rest[at]);
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(at));
        }
    };
    std::vector<std::vector<std::size_t>> out;
    draw(first - current.size());
    out.push_back(current);
    while (current.size() < final_size) {
        draw(std::min(step, final_size - current.size()));
        out.push_back(current);
    }
    return out;
}

std::vector<std::size_t> hull_members(const ParametricSnapshotSet& full, const std::vector<std::size_t>& pool) {
    if (pool.empty()) return {};
    const std::size_t dim = full.parameter_dim();
    if (dim == 1) {
        auto coord = [&](std::size_t i) { return full.members[i].parameter[0]; };
        const auto [lo, hi] = std::minmax_element(pool.begin(), pool.end(),
                                                  [&](std::size_t a, std::size_t b) { return coord(a) < coord(b); });
        if (*lo == *hi) return {*lo};
        return {*lo, *hi};
    }
    if (dim == 2) {
        if (pool.size() < 3) return pool;
        std::vector<Point2> pts;
        for (std::size_t i : pool) pts.push_back({full.members[i].parameter[0], full.members[i].parameter[1]});
        const Delaunay2D tri(std::move(pts));
        std::vector<std::size_t> out;
        for (std::size_t h : tri.hull()) out.push_back(pool[h]);
        return out;
    }
    throw Error(ErrorCode::invalid_argument, "hull seeding supports 1-D and 2-D parameters only");
}

namespace {

void check_setup(const ParametricSnapshotSet& full, const SensitivitySetup& setup) {
    if (setup.validation.empty()) throw Error(ErrorCode::invalid_argument, "validation set is empty");
    if (setup.regressors.empty()) throw Error(ErrorCode::invalid_argument, "no regressor kinds requested");
    for (std::size_t i : setup.validation) {
        if (i >= full.p()) throw Error(ErrorCode::invalid_argument, "validation index out of range");
    }
    if (!full.time_axis.contains(setup.probe_label)) {
        throw Error(ErrorCode::invalid_argument, "probe label " + std::to_string(setup.probe_label) +
                                                     " is outside the data window");
    }
}

void check_disjoint(const ParametricSnapshotSet& full, const std::vector<std::size_t>& subset,
                    const std::vector<std::size_t>& validation) {
    const std::set<std::size_t> q(validation.begin(), validation.end());
    for (std::size_t i : subset) {
        if (i >= full.p()) throw Error(ErrorCode::invalid_argument, "training index out of range");
        if (q.count(i)) {
            throw Error(ErrorCode::invalid_argument, "validation parameter " + to_string(full.members[i].parameter) +
                                                         " is also a training parameter");
        }
    }
}

void append_rows(SensitivityTable& table, std::size_t step, std::size_t size, const ParametricDmdModel& model,
                 const ParametricSnapshotSet& truth, const SensitivitySetup& setup) {
    for (RegressorKind kind : setup.regressors) {
        const ErrorReport report =
            compute_error_report(model, truth, {setup.probe_label}, OnlineSettings{kind, setup.regressor_options});
        table.rows.push_back({step, size, kind, report.mean_error.front()});
    }
}

}  // namespace

SensitivityTable run_parameter_sensitivity(const ParametricSnapshotSet& full,
                                           const std::vector<std::vector<std::size_t>>& subsets,
                                           std::int64_t time_count, const SensitivitySetup& setup) {
    check_setup(full, setup);
    for (std::size_t k = 0; k < subsets.size(); ++k) {
        check_disjoint(full, subsets[k], setup.validation);
        if (k > 0) {
            const std::set<std::size_t> prev(subsets[k - 1].begin(), subsets[k - 1].end());
            const std::set<std::size_t> cur(subsets[k].begin(), subsets[k].end());
            if (!std::includes(cur.begin(), cur.end(), prev.begin(), prev.end())) {
                throw Error(ErrorCode::invalid_argument, "training subsets are not nested at step " + std::to_string(k));
            }
        }
    }
    const ParametricSnapshotSet truth = full.select(setup.validation);
    SensitivityTable table;
    table.mode = "parameter";
    table.probe_label = setup.probe_label;
    for (std::size_t k = 0; k < subsets.size(); ++k) {
        const ParametricSnapshotSet train = full.select(subsets[k], time_count);
        const auto model = fit_parametric(train, setup.variant, setup.pod_rank, setup.dmd_config);
        append_rows(table, k, subsets[k].size(), model, truth, setup);
    }
    return table;
}

SensitivityTable run_time_sensitivity(const ParametricSnapshotSet& full, const std::vector<std::size_t>& subset,
                                      const std::vector<std::int64_t>& window_counts, const SensitivitySetup& setup) {
    check_setup(full, setup);
    check_disjoint(full, subset, setup.validation);
    for (std::size_t k = 0; k < window_counts.size(); ++k) {
        const std::int64_t c = window_counts[k];
        if (c < setup.dmd_config.hodmd_depth + 1) {
            throw Error(ErrorCode::invalid_argument, "time window of " + std::to_string(c) +
                                                         " instants is shorter than depth + 1 = " +
                                                         std::to_string(setup.dmd_config.hodmd_depth + 1));
        }
        if (c > full.time_axis.count) {
            throw Error(ErrorCode::invalid_argument, "time window of " + std::to_string(c) +
                                                         " instants exceeds the data window");
        }
        if (k > 0 && c < window_counts[k - 1]) {
            throw Error(ErrorCode::invalid_argument, "time windows must grow monotonically");
        }
    }
    const ParametricSnapshotSet truth = full.select(setup.validation);
    SensitivityTable table;
    table.mode = "time";
    table.probe_label = setup.probe_label;
    for (std::size_t k = 0; k < window_counts.size(); ++k) {
        const ParametricSnapshotSet train = full.select(subset, window_counts[k]);
        const auto model = fit_parametric(train, setup.variant, setup.pod_rank, setup.dmd_config);
        append_rows(table, k, static_cast<std::size_t>(window_counts[k]), model, truth, setup);
    }
    return table;
}

}  // namespace pdmd
