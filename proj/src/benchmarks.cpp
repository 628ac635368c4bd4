#include "pdmd/benchmarks.hpp"

#include "pdmd/delaunay.hpp"
#include "pdmd/parallel.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace pdmd {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// --------------------------------------------------------------------- toy

void ToySpec::validate() const {
    if (m < 2) throw Error(ErrorCode::invalid_argument, "toy spec: m must be >= 2");
    if (N < 2) throw Error(ErrorCode::invalid_argument, "toy spec: N must be >= 2");
    if (!(x_max > x_min)) throw Error(ErrorCode::invalid_argument, "toy spec: x_max must exceed x_min");
    if (!(t_end > 0.0)) throw Error(ErrorCode::invalid_argument, "toy spec: t_end must be positive");
    if (parameters.empty()) throw Error(ErrorCode::invalid_argument, "toy spec: parameters is empty");
}

Vector evaluate_toy_truth(const ToySpec& spec, double mu, std::int64_t label) {
    const double t = static_cast<double>(label) * spec.dt();
    const Complex e1 = std::exp(Complex(0.0, 2.3 * t));
    const Complex e2 = std::exp(Complex(0.0, 2.8 * t));
    Vector out(spec.m);
    for (Eigen::Index j = 0; j < spec.m; ++j) {
        const double x = spec.x_min + (spec.x_max - spec.x_min) * static_cast<double>(j) / static_cast<double>(spec.m - 1);
        const double f1 = 1.0 / std::cosh(x + 3.0);
        const double f2 = 2.0 * std::tanh(x) / std::cosh(x);
        out(j) = mu * f1 * e1 + (1.0 - mu) * f2 * e2;
    }
    return out;
}

ParametricSnapshotSet toy_truth_set(const ToySpec& spec, const std::vector<double>& parameters, std::int64_t count) {
    spec.validate();
    ParametricSnapshotSet set;
    set.field_name = "f";
    set.time_axis = TimeAxis{0.0, spec.dt(), count, 0};
    for (double mu : parameters) {
        SnapshotMatrix member{ParameterPoint{mu}, Matrix(spec.m, count)};
        for (std::int64_t k = 0; k < count; ++k) member.values.col(k) = evaluate_toy_truth(spec, mu, k);
        set.members.push_back(std::move(member));
    }
    return set;
}

ParametricSnapshotSet generate_toy(const ToySpec& spec) {
    return toy_truth_set(spec, spec.parameters, spec.N);
}

// -------------------------------------------------------------------- heat

void HeatSpec::validate() const {
    if (grid < 4) throw Error(ErrorCode::invalid_argument, "heat spec: grid must be >= 4");
    if (label_count < 2) throw Error(ErrorCode::invalid_argument, "heat spec: label_count must be >= 2");
    if (!(t_end > 0.0)) throw Error(ErrorCode::invalid_argument, "heat spec: t_end must be positive");
    if (substeps < 1) throw Error(ErrorCode::invalid_argument, "heat spec: substeps must be >= 1");
    if (!std::isfinite(source_scale)) throw Error(ErrorCode::invalid_argument, "heat spec: source_scale not finite");
}

double sin_two_pi(double t) {
    // Reduce to the nearest quarter period so the zeros at multiples of 1/2 are exact.
    const double q = std::nearbyint(4.0 * t);
    const double f = 2.0 * kPi * (t - 0.25 * q);
    switch (static_cast<long long>(std::fmod(q, 4.0) + 4.0) % 4) {
        case 0: return std::sin(f);
        case 1: return std::cos(f);
        case 2: return -std::sin(f);
        default: return -std::cos(f);
    }
}

double heat_forcing(double x1, double x2, double t, double scale) {
    return scale * 100.0 * sin_two_pi(x1) * sin_two_pi(x2) * sin_two_pi(t);
}

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

SparseMatrix implicit_diffusion(int g, double tau) {
    const double h = 1.0 / (g + 1);
    const double c = tau / (h * h);
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(5 * g * g));
    for (int j = 0; j < g; ++j) {
        for (int i = 0; i < g; ++i) {
            const int k = i + g * j;
            entries.emplace_back(k, k, 1.0 + 4.0 * c);
            if (i > 0) entries.emplace_back(k, k - 1, -c);
            if (i + 1 < g) entries.emplace_back(k, k + 1, -c);
            if (j > 0) entries.emplace_back(k, k - g, -c);
            if (j + 1 < g) entries.emplace_back(k, k + g, -c);
        }
    }
    SparseMatrix a(g * g, g * g);
    a.setFromTriplets(entries.begin(), entries.end());
    return a;
}

// Solves v + tau * (mu1/mu2) * (exp(mu2 v) - 1) = r. The left side is
// increasing and convex in v, so Newton converges from v = r.
bool reaction_step(double r, double tau, double mu1, double mu2, double& v) {
    v = r;
    for (int it = 0; it < 100; ++it) {
        const double g = v + tau * mu1 * std::expm1(mu2 * v) / mu2 - r;
        const double dg = 1.0 + tau * mu1 * std::exp(mu2 * v);
        const double step = g / dg;
        v -= step;
        if (!std::isfinite(v)) return false;
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(v))) return true;
    }
    return false;
}

bool integrate_heat(const HeatSpec& spec, double mu1, double mu2, int substeps, Matrix& out) {
    const int g = spec.grid;
    const Eigen::Index m = static_cast<Eigen::Index>(g) * g;
    const std::int64_t total = (spec.label_count - 1) * substeps;
    const double tau = spec.t_end / static_cast<double>(total);

    Eigen::SimplicialLDLT<SparseMatrix> solver(implicit_diffusion(g, tau));
    if (solver.info() != Eigen::Success) return false;

    RealVector shape(m);
    for (int j = 0; j < g; ++j) {
        for (int i = 0; i < g; ++i) {
            const double x1 = static_cast<double>(i + 1) / (g + 1);
            const double x2 = static_cast<double>(j + 1) / (g + 1);
            shape(i + g * j) = spec.source_scale * 100.0 * sin_two_pi(x1) * sin_two_pi(x2);
        }
    }

    out = Matrix::Zero(m, spec.label_count);
    RealVector u = RealVector::Zero(m);
    RealVector v(m);
    for (std::int64_t step = 0; step < total; ++step) {
        // Exact time of the step start, so that sin(2 pi t) hits its zeros exactly.
        const double t = spec.t_end * static_cast<double>(step) / static_cast<double>(total);
        const double s = sin_two_pi(t);
        for (Eigen::Index k = 0; k < m; ++k) {
            if (!reaction_step(u(k) + tau * s * shape(k), tau, mu1, mu2, v(k))) return false;
        }
        u = solver.solve(v);
        if (!u.allFinite() || u.cwiseAbs().maxCoeff() > 1e8) return false;
        if ((step + 1) % substeps == 0) out.col((step + 1) / substeps) = u.cast<Complex>();
    }
    return true;
}

}  // namespace

SnapshotMatrix solve_heat(const HeatSpec& spec, const ParameterPoint& mu) {
    spec.validate();
    if (mu.dim() != 2) throw Error(ErrorCode::invalid_argument, "heat parameter must be (mu1, mu2)");
    if (!std::isfinite(mu[0]) || !std::isfinite(mu[1])) {
        throw Error(ErrorCode::invalid_argument, "heat parameter " + to_string(mu) + " is not finite");
    }
    if (!(mu[1] > 0.0)) throw Error(ErrorCode::invalid_argument, "heat parameter mu2 must be positive");
    SnapshotMatrix result{mu, Matrix()};
    int substeps = spec.substeps;
    for (int attempt = 0; attempt <= 3; ++attempt, substeps *= 2) {
        if (integrate_heat(spec, mu[0], mu[1], substeps, result.values)) return result;
    }
    throw Error(ErrorCode::solver_divergence, "heat solver diverged for parameter " + to_string(mu) +
                                                  " after 3 step halvings");
}

ParametricSnapshotSet generate_heat_set(const HeatSpec& spec, const std::vector<ParameterPoint>& parameters) {
    spec.validate();
    if (parameters.empty()) throw Error(ErrorCode::invalid_argument, "heat set needs at least one parameter");
    ParametricSnapshotSet set;
    set.field_name = "u";
    set.time_axis = TimeAxis{0.0, spec.dt(), spec.label_count, 0};
    set.members.resize(parameters.size());
    parallel_for(parameters.size(), [&](std::size_t i) { set.members[i] = solve_heat(spec, parameters[i]); });
    return set;
}

HeatParameterDraw draw_heat_parameters(std::size_t training, std::size_t held_out, std::uint64_t seed, double lo,
                                       double hi) {
    if (training < 1) throw Error(ErrorCode::invalid_argument, "need at least one training parameter");
    if (held_out > 0 && training < 3) {
        throw Error(ErrorCode::invalid_argument, "held-out parameters need at least 3 training parameters");
    }
    if (!(hi > lo)) throw Error(ErrorCode::invalid_argument, "parameter range is empty");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double span = hi - lo;

    HeatParameterDraw draw;
    std::vector<std::size_t> perm1(training), perm2(training);
    std::iota(perm1.begin(), perm1.end(), std::size_t{0});
    std::iota(perm2.begin(), perm2.end(), std::size_t{0});
    std::shuffle(perm1.begin(), perm1.end(), rng);
    std::shuffle(perm2.begin(), perm2.end(), rng);
    const auto cells = static_cast<double>(training);
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < training; ++i) {
        const double a = lo + span * (static_cast<double>(perm1[i]) + unit(rng)) / cells;
        const double b = lo + span * (static_cast<double>(perm2[i]) + unit(rng)) / cells;
        draw.training.push_back(ParameterPoint{a, b});
        pts.push_back({a, b});
    }

    if (held_out == 0) return draw;
    const Delaunay2D tri(pts);
    const double min_gap = 0.05 * span;
    for (int tries = 0; draw.held_out.size() < held_out; ++tries) {
        if (tries > 100000) throw Error(ErrorCode::numerical, "could not place held-out parameters inside the hull");
        const Point2 q{lo + span * unit(rng), lo + span * unit(rng)};
        if (!tri.locate(q)) continue;
        bool crowded = false;
        for (const auto& p : pts) crowded = crowded || std::hypot(p.x - q.x, p.y - q.y) < min_gap;
        for (const auto& h : draw.held_out) crowded = crowded || std::hypot(h[0] - q.x, h[1] - q.y) < min_gap;
        if (!crowded) draw.held_out.push_back(ParameterPoint{q.x, q.y});
    }
    return draw;
}

// --------------------------------------------------------------- synthetic

void SyntheticUnstableSpec::validate() const {
    const auto modes = static_cast<Eigen::Index>(stable_angles.size()) + 1;
    if (stable_angles.empty()) throw Error(ErrorCode::invalid_argument, "synthetic spec: no stable frequencies");
    if (state_dim < modes) {
        throw Error(ErrorCode::invalid_argument, "synthetic spec: state_dim must be >= number of modes (" +
                                                     std::to_string(modes) + ")");
    }
    if (!(rho >= 1.0) || !std::isfinite(rho)) throw Error(ErrorCode::invalid_argument, "synthetic spec: rho must be >= 1");
    if (!(fraction >= 0.0 && fraction < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "synthetic spec: fraction must be in [0, 1)");
    }
    if (count < 2) throw Error(ErrorCode::invalid_argument, "synthetic spec: count must be >= 2");
    if (parameters.empty()) throw Error(ErrorCode::invalid_argument, "synthetic spec: parameters is empty");
}

SyntheticSystem make_synthetic_system(const SyntheticUnstableSpec& spec) {
    spec.validate();
    const auto j = static_cast<Eigen::Index>(spec.stable_angles.size());
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(spec.state_dim, j + 1);
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            const double re = normal(rng);
            const double im = normal(rng);
            g(r, c) = Complex(re, im);
        }
    }
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(spec.state_dim, j + 1);
    return SyntheticSystem{spec, q.leftCols(j), q.col(j)};
}

Vector SyntheticSystem::state(double mu, std::int64_t label, bool include_unstable) const {
    const auto j = static_cast<Eigen::Index>(spec.stable_angles.size());
    const auto k = static_cast<double>(label);
    Vector x = Vector::Zero(stable_modes.rows());
    double energy = 0.0;
    for (Eigen::Index i = 0; i < j; ++i) {
        const double c = 1.0 + static_cast<double>(i + 1) * mu / static_cast<double>(j);
        energy += c * c;
        x += c * std::exp(Complex(0.0, spec.stable_angles[static_cast<std::size_t>(i)] * k)) * stable_modes.col(i);
    }
    if (include_unstable && spec.fraction > 0.0) {
        const double a = spec.fraction * std::sqrt(energy);
        x += a * std::pow(spec.rho, k) * std::exp(Complex(0.0, spec.unstable_angle * k)) * unstable_mode;
    }
    return x;
}

ParametricSnapshotSet generate_synthetic_unstable(const SyntheticUnstableSpec& spec) {
    const SyntheticSystem sys = make_synthetic_system(spec);
    ParametricSnapshotSet set;
    set.field_name = "x";
    set.time_axis = TimeAxis{0.0, 1.0, spec.count, 0};
    for (double mu : spec.parameters) {
        SnapshotMatrix member{ParameterPoint{mu}, Matrix(spec.state_dim, spec.count)};
        for (std::int64_t k = 0; k < spec.count; ++k) member.values.col(k) = sys.state(mu, k);
        set.members.push_back(std::move(member));
    }
    return set;
}

}  // namespace pdmd
