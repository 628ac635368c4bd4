#pragma once

#include "pdmd/parametric.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pdmd {

struct SensitivitySetup {
    Variant variant = Variant::partitioned;
    Eigen::Index pod_rank = 1;
    DmdConfig dmd_config;
    std::vector<RegressorKind> regressors{RegressorKind::linear};
    RegressorOptions regressor_options;
    std::int64_t probe_label = 0;
    std::vector<std::size_t> validation;  // member indices of the full set forming Q
};

struct SensitivityRow {
    std::size_t step = 0;
    std::size_t size = 0;  // |S_k| or |T_k|
    RegressorKind regressor = RegressorKind::linear;
    double error = 0.0;    // e_I at the probe label
};

struct SensitivityTable {
    std::string mode;  // "parameter" or "time"
    std::uint64_t seed = 0;
    std::int64_t probe_label = 0;
    std::vector<SensitivityRow> rows;
};

/// Nested random subsets of `pool`: the first holds `required` plus random
/// draws up to `initial` members, each next one adds `step` members drawn
/// uniformly from the rest, up to `final_size`.
std::vector<std::vector<std::size_t>> nested_random_subsets(const std::vector<std::size_t>& pool,
                                                            std::size_t initial, std::size_t step,
                                                            std::size_t final_size, std::uint64_t seed,
                                                            const std::vector<std::size_t>& required = {});

/// Members of `pool` spanning the convex hull of its parameters: the two
/// extremes in 1-D, the hull vertices in 2-D. Seeding the first subset with
/// them keeps hull-restricted regressors from extrapolating at interior
/// validation points.
std::vector<std::size_t> hull_members(const ParametricSnapshotSet& full, const std::vector<std::size_t>& pool);

/// e_I(S_k, T, probe) for every subset (member indices of `full`) and regressor
/// kind. `time_count` fixes T as a prefix of the full window (< 0: all of it).
SensitivityTable run_parameter_sensitivity(const ParametricSnapshotSet& full,
                                           const std::vector<std::vector<std::size_t>>& subsets,
                                           std::int64_t time_count, const SensitivitySetup& setup);

/// e_I(S, T_k, probe) for growing prefix windows of `window_counts` instants.
SensitivityTable run_time_sensitivity(const ParametricSnapshotSet& full, const std::vector<std::size_t>& subset,
                                      const std::vector<std::int64_t>& window_counts, const SensitivitySetup& setup);

}  // namespace pdmd
