#pragma once

#include "pdmd/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pdmd {

enum class AmplitudeStrategy {
    first_snapshot,     // fit against the first (stacked) snapshot
    least_squares_all,  // least squares over every training snapshot
};

const char* to_string(AmplitudeStrategy s);
AmplitudeStrategy amplitude_strategy_from_string(const std::string& name);

struct DmdConfig {
    Eigen::Index svd_rank = 0;  // 0: keep every singular value above the noise floor
    int hodmd_depth = 1;        // 1: standard DMD
    std::optional<double> stabilization;
    AmplitudeStrategy amplitude_strategy = AmplitudeStrategy::first_snapshot;

    /// Throws Error(invalid_argument) for a malformed configuration. State
    /// dimension and length are checked when known (pass 0 to skip).
    void validate(Eigen::Index state_dim = 0, Eigen::Index count = 0) const;

    bool operator==(const DmdConfig&) const = default;
};

enum class Disposition { untouched, kept_normalized, discarded_divergent, discarded_convergent };

const char* to_string(Disposition d);
Disposition disposition_from_string(const std::string& name);

struct StabilizationEntry {
    Complex fitted_eigenvalue;
    Disposition disposition = Disposition::untouched;

    bool retained() const {
        return disposition == Disposition::untouched || disposition == Disposition::kept_normalized;
    }
    bool operator==(const StabilizationEntry&) const = default;
};

/// A fitted (and possibly stabilized) DMD expansion
///   x(label) = modes * diag(eigenvalues^(label - label_origin)) * amplitudes.
///
/// `stabilization_record` runs parallel to the originally fitted spectrum; the
/// retained entries appear in the same order as `eigenvalues`.
struct DmdModel {
    Matrix modes;  // s x r, unit-norm columns
    Vector eigenvalues;
    Vector amplitudes;
    int depth = 1;
    std::int64_t label_origin = 1;
    std::vector<StabilizationEntry> stabilization_record;
    AmplitudeStrategy amplitude_strategy = AmplitudeStrategy::first_snapshot;
    Eigen::Index svd_rank = 0;  // rank actually used in the fit
    double residual = 0.0;      // one-step residual of the fitted operator, Frobenius
    double residual_reference = 0.0;  // ||Y||_F of the fitted (possibly stacked) pairs
    Matrix training;                  // s x N training sequence, kept for amplitude refits
    std::vector<std::string> warnings;

    Eigen::Index state_dim() const { return modes.rows(); }
    Eigen::Index rank() const { return eigenvalues.size(); }
};

DmdModel fit_dmd(const Matrix& sequence, const DmdConfig& config, std::int64_t label_origin = 1);
DmdModel fit_hodmd(const Matrix& sequence, const DmdConfig& config, std::int64_t label_origin = 1);

/// Dispatches on config.hodmd_depth and applies config.stabilization if set.
DmdModel fit(const Matrix& sequence, const DmdConfig& config, std::int64_t label_origin = 1);

DmdModel stabilize(const DmdModel& model, double epsilon);

Vector forecast(const DmdModel& model, std::int64_t label);
Matrix forecast(const DmdModel& model, const std::vector<std::int64_t>& labels);

/// Amplitudes b minimising the misfit of modes * diag(lambda^j) * b to the
/// training columns selected by the strategy (the first `depth` columns, or all).
Vector fit_amplitudes(const Matrix& modes, const Vector& eigenvalues, const Matrix& training, int depth,
                      AmplitudeStrategy strategy);

/// lambda / |lambda| chosen among neighbouring doubles so that std::abs of the
/// result is exactly 1.
Complex unit_modulus(Complex lambda);

/// lambda^k for any integer k, by repeated squaring.
Complex integer_power(Complex lambda, std::int64_t k);

}  // namespace pdmd
