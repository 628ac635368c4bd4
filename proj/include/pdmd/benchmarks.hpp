#pragma once

#include "pdmd/snapshot.hpp"

#include <cstdint>
#include <vector>

namespace pdmd {

// ---------------------------------------------------------------------------
// Analytic toy: f(x, t, mu) = mu f1(x, t) + (1 - mu) f2(x, t) on x in [-5, 5],
//   f1 = sech(x + 3) exp(2.3 i t),  f2 = 2 sech(x) tanh(x) exp(2.8 i t).
// Label k is t = k * dt with dt = t_end / (N - 1); labels start at 0.

struct ToySpec {
    Eigen::Index m = 1000;
    Eigen::Index N = 129;
    double x_min = -5.0;
    double x_max = 5.0;
    double t_end = 4.0 * 3.14159265358979323846;
    std::vector<double> parameters{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

    double dt() const { return t_end / static_cast<double>(N - 1); }
    void validate() const;
};

ParametricSnapshotSet generate_toy(const ToySpec& spec);
Vector evaluate_toy_truth(const ToySpec& spec, double mu, std::int64_t label);
/// Members at `parameters` on labels 0 .. count-1 of the toy time grid.
ParametricSnapshotSet toy_truth_set(const ToySpec& spec, const std::vector<double>& parameters, std::int64_t count);

// ---------------------------------------------------------------------------
// Nonlinear heat problem on the unit square with u = 0 on the boundary and
// u(., 0) = 0:
//   du/dt - lap(u) = 100 sin(2 pi x1) sin(2 pi x2) sin(2 pi t) - (mu1/mu2)(exp(mu2 u) - 1).
// Node (i, j) of the grid x interior grid is state entry i + grid * j with
// x1 = (i + 1) h, x2 = (j + 1) h, h = 1 / (grid + 1).

struct HeatSpec {
    int grid = 31;
    std::int64_t label_count = 101;  // labels 0 .. label_count - 1
    double t_end = 2.0;
    int substeps = 10;
    double source_scale = 1.0;  // multiplies the forcing; 0 gives the trivial solution

    double dt() const { return t_end / static_cast<double>(label_count - 1); }
    void validate() const;
};

/// sin(2 pi t), exactly 0 at every multiple of 1/2.
double sin_two_pi(double t);

double heat_forcing(double x1, double x2, double t, double scale = 1.0);

SnapshotMatrix solve_heat(const HeatSpec& spec, const ParameterPoint& mu);
ParametricSnapshotSet generate_heat_set(const HeatSpec& spec, const std::vector<ParameterPoint>& parameters);

struct HeatParameterDraw {
    std::vector<ParameterPoint> training;
    std::vector<ParameterPoint> held_out;  // inside the convex hull of `training`
};

/// Stratified (Latin-hypercube) training parameters in [lo, hi]^2 and
/// held-out parameters drawn inside their convex hull.
HeatParameterDraw draw_heat_parameters(std::size_t training, std::size_t held_out, std::uint64_t seed,
                                       double lo = 0.01, double hi = 10.0);

// ---------------------------------------------------------------------------
// Synthetic system with one slowly divergent mode:
//   x_k(mu) = sum_j c_j(mu) phi_j exp(i theta_j k) + a(mu) psi rho^k exp(i theta_u k),
// c_j(mu) = 1 + (j + 1) mu / J, a(mu) = fraction * ||sum_j c_j phi_j||, with
// phi_j, psi orthonormal columns drawn from a seeded complex Gaussian matrix.

struct SyntheticUnstableSpec {
    Eigen::Index state_dim = 6;
    std::vector<double> stable_angles{0.3, 0.9, 1.7};
    double rho = 1.02;
    double unstable_angle = 0.5;
    double fraction = 0.01;
    std::int64_t count = 100;
    std::uint64_t seed = 7;
    std::vector<double> parameters{0.0};

    void validate() const;
};

struct SyntheticSystem {
    SyntheticUnstableSpec spec;
    Matrix stable_modes;  // s x J
    Vector unstable_mode;

    Vector state(double mu, std::int64_t label, bool include_unstable = true) const;
};

SyntheticSystem make_synthetic_system(const SyntheticUnstableSpec& spec);
ParametricSnapshotSet generate_synthetic_unstable(const SyntheticUnstableSpec& spec);

}  // namespace pdmd
