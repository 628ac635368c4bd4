#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace pdmd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

enum class ErrorCode {
    invalid_argument,
    dimension_mismatch,
    io,
    format,
    unsupported_version,
    non_finite,
    rank_out_of_bounds,
    empty_spectrum,
    extrapolation,
    degenerate_geometry,
    duplicate_points,
    solver_divergence,
    numerical,
};

const char* to_string(ErrorCode code);

/// Library-wide exception. The code lets callers (and the CLI's exit-code
/// mapping) distinguish usage problems from computational failures.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace pdmd
