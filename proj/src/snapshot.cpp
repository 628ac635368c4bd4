#include "pdmd/snapshot.hpp"

#include <cmath>
#include <sstream>

namespace pdmd {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid argument";
        case ErrorCode::dimension_mismatch: return "dimension mismatch";
        case ErrorCode::io: return "I/O failure";
        case ErrorCode::format: return "malformed data";
        case ErrorCode::unsupported_version: return "unsupported version";
        case ErrorCode::non_finite: return "non-finite value";
        case ErrorCode::rank_out_of_bounds: return "rank out of bounds";
        case ErrorCode::empty_spectrum: return "empty spectrum";
        case ErrorCode::extrapolation: return "extrapolation";
        case ErrorCode::degenerate_geometry: return "degenerate geometry";
        case ErrorCode::duplicate_points: return "duplicate points";
        case ErrorCode::solver_divergence: return "solver divergence";
        case ErrorCode::numerical: return "numerical failure";
    }
    return "unknown";
}

TimeAxis TimeAxis::prefix(std::int64_t new_count) const {
    if (new_count < 1 || new_count > count) {
        throw Error(ErrorCode::invalid_argument,
                    "time window of " + std::to_string(new_count) + " instants does not fit an axis of " +
                        std::to_string(count));
    }
    TimeAxis out = *this;
    out.count = new_count;
    return out;
}

double distance(const ParameterPoint& a, const ParameterPoint& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::dimension_mismatch, "parameter dimensions differ: " + std::to_string(a.dim()) +
                                                       " vs " + std::to_string(b.dim()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

std::string to_string(const ParameterPoint& p) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < p.dim(); ++i) {
        if (i) os << ", ";
        os << p[i];
    }
    os << ')';
    return os.str();
}

std::vector<ParameterPoint> ParametricSnapshotSet::parameters() const {
    std::vector<ParameterPoint> out;
    out.reserve(members.size());
    for (const auto& m : members) out.push_back(m.parameter);
    return out;
}

bool ParametricSnapshotSet::is_real() const {
    for (const auto& m : members) {
        if ((m.values.imag().array() != 0.0).any()) return false;
    }
    return true;
}

ParametricSnapshotSet ParametricSnapshotSet::select(const std::vector<std::size_t>& member_indices,
                                                    std::int64_t time_count) const {
    ParametricSnapshotSet out;
    out.field_name = field_name;
    out.time_axis = time_count < 0 ? time_axis : time_axis.prefix(time_count);
    out.members.reserve(member_indices.size());
    for (std::size_t idx : member_indices) {
        if (idx >= members.size()) {
            throw Error(ErrorCode::invalid_argument, "member index " + std::to_string(idx) + " out of range");
        }
        const auto& src = members[idx];
        out.members.push_back({src.parameter, src.values.leftCols(out.time_axis.count)});
    }
    return out;
}

std::vector<Violation> validate_set(const ParametricSnapshotSet& set) {
    std::vector<Violation> out;
    const auto& ax = set.time_axis;
    if (!(ax.dt > 0.0) || !std::isfinite(ax.dt)) {
        out.push_back({std::nullopt, "time step", "dt must be positive and finite"});
    }
    if (ax.count < 2) {
        out.push_back({std::nullopt, "time count", "time axis needs at least 2 instants"});
    }
    if (set.members.empty()) {
        out.push_back({std::nullopt, "non-empty", "set has no members"});
        return out;
    }

    const Eigen::Index m = set.members.front().m();
    const std::size_t q = set.members.front().parameter.dim();
    if (q == 0) out.push_back({0, "parameter dimension", "parameter point has no coordinates"});

    for (std::size_t i = 0; i < set.members.size(); ++i) {
        const auto& mem = set.members[i];
        if (mem.m() != m || mem.m() < 1) {
            out.push_back({i, "shared m", "member has " + std::to_string(mem.m()) + " rows, expected " +
                                              std::to_string(m)});
        }
        if (mem.count() != ax.count) {
            out.push_back({i, "shared time axis", "member has " + std::to_string(mem.count()) +
                                                      " columns, time axis has " + std::to_string(ax.count)});
        }
        if (mem.parameter.dim() != q) {
            out.push_back({i, "uniform parameter dimension",
                           "dimension " + std::to_string(mem.parameter.dim()) + ", expected " + std::to_string(q)});
        }
        for (double c : mem.parameter.coords) {
            if (!std::isfinite(c)) {
                out.push_back({i, "non-finite parameter", to_string(mem.parameter)});
                break;
            }
        }
        for (Eigen::Index j = 0; j < mem.values.cols(); ++j) {
            const auto col = mem.values.col(j);
            if (!(col.real().array().isFinite().all() && col.imag().array().isFinite().all())) {
                out.push_back({i, "non-finite value", "first non-finite entry in column " + std::to_string(j)});
                break;
            }
        }
        for (std::size_t k = 0; k < i; ++k) {
            if (set.members[k].parameter == mem.parameter) {
                out.push_back({i, "duplicate parameter",
                               to_string(mem.parameter) + " already used by member " + std::to_string(k)});
                break;
            }
        }
    }
    return out;
}

void require_valid(const ParametricSnapshotSet& set) {
    const auto violations = validate_set(set);
    if (violations.empty()) return;
    std::string msg = "invalid snapshot set:";
    for (const auto& v : violations) {
        msg += "\n  ";
        if (v.member) msg += "member " + std::to_string(*v.member) + ": ";
        msg += v.invariant + " (" + v.detail + ")";
    }
    throw Error(ErrorCode::invalid_argument, msg);
}

}  // namespace pdmd
