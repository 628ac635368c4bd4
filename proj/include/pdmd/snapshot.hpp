#pragma once

#include "pdmd/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pdmd {

/// Uniform time sampling. Algorithms work on integer labels; physical time is
/// only used for reporting.
struct TimeAxis {
    double t0 = 0.0;
    double dt = 1.0;
    std::int64_t count = 2;
    std::int64_t label_origin = 1;

    double time_of(std::int64_t label) const {
        return t0 + static_cast<double>(label - label_origin) * dt;
    }
    std::int64_t last_label() const { return label_origin + count - 1; }
    bool contains(std::int64_t label) const {
        return label >= label_origin && label <= last_label();
    }
    /// Column index of `label` inside a snapshot matrix on this axis.
    std::int64_t column_of(std::int64_t label) const { return label - label_origin; }

    /// Axis restricted to the first `new_count` instants.
    TimeAxis prefix(std::int64_t new_count) const;

    bool operator==(const TimeAxis&) const = default;
};

struct ParameterPoint {
    std::vector<double> coords;

    ParameterPoint() = default;
    ParameterPoint(std::initializer_list<double> c) : coords(c) {}
    explicit ParameterPoint(std::vector<double> c) : coords(std::move(c)) {}

    std::size_t dim() const { return coords.size(); }
    double operator[](std::size_t i) const { return coords[i]; }

    bool operator==(const ParameterPoint&) const = default;
};

double distance(const ParameterPoint& a, const ParameterPoint& b);
std::string to_string(const ParameterPoint& p);

struct SnapshotMatrix {
    ParameterPoint parameter;
    Matrix values;  // m x N, column j is label label_origin + j

    Eigen::Index m() const { return values.rows(); }
    Eigen::Index count() const { return values.cols(); }
};

struct ParametricSnapshotSet {
    TimeAxis time_axis;
    std::vector<SnapshotMatrix> members;
    std::string field_name;

    std::size_t p() const { return members.size(); }
    Eigen::Index m() const { return members.empty() ? 0 : members.front().m(); }
    std::size_t parameter_dim() const {
        return members.empty() ? 0 : members.front().parameter.dim();
    }
    std::vector<ParameterPoint> parameters() const;

    /// True when every stored value has a zero imaginary part.
    bool is_real() const;

    /// Subset of members (in the given order) truncated to the first
    /// `time_count` instants; `time_count` < 0 keeps the full window.
    ParametricSnapshotSet select(const std::vector<std::size_t>& member_indices,
                                 std::int64_t time_count = -1) const;
};

struct Violation {
    std::optional<std::size_t> member;
    std::string invariant;
    std::string detail;
};

/// Empty iff all invariants hold. Violations are data, never thrown.
std::vector<Violation> validate_set(const ParametricSnapshotSet& set);

/// Throws Error(invalid_argument) listing every violation when the set is
/// not valid.
void require_valid(const ParametricSnapshotSet& set);

}  // namespace pdmd
