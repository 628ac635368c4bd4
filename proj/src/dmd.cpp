#include "pdmd/dmd.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdmd {

const char* to_string(AmplitudeStrategy s) {
    return s == AmplitudeStrategy::first_snapshot ? "first-snapshot" : "least-squares-all";
}

AmplitudeStrategy amplitude_strategy_from_string(const std::string& name) {
    if (name == "first-snapshot") return AmplitudeStrategy::first_snapshot;
    if (name == "least-squares-all") return AmplitudeStrategy::least_squares_all;
    throw Error(ErrorCode::invalid_argument, "unknown amplitude strategy '" + name + "'");
}

const char* to_string(Disposition d) {
    switch (d) {
        case Disposition::untouched: return "untouched";
        case Disposition::kept_normalized: return "kept-normalized";
        case Disposition::discarded_divergent: return "discarded-divergent";
        case Disposition::discarded_convergent: return "discarded-convergent";
    }
    return "untouched";
}

Disposition disposition_from_string(const std::string& name) {
    if (name == "untouched") return Disposition::untouched;
    if (name == "kept-normalized") return Disposition::kept_normalized;
    if (name == "discarded-divergent") return Disposition::discarded_divergent;
    if (name == "discarded-convergent") return Disposition::discarded_convergent;
    throw Error(ErrorCode::format, "unknown stabilization disposition '" + name + "'");
}

void DmdConfig::validate(Eigen::Index state_dim, Eigen::Index count) const {
    if (hodmd_depth < 1) {
        throw Error(ErrorCode::invalid_argument, "HODMD depth must be >= 1, got " + std::to_string(hodmd_depth));
    }
    if (svd_rank < 0) throw Error(ErrorCode::invalid_argument, "SVD rank must be >= 0");
    if (stabilization && !(*stabilization >= 0.0 && std::isfinite(*stabilization))) {
        throw Error(ErrorCode::invalid_argument, "stabilization tolerance must be finite and >= 0");
    }
    if (count > 0 && count < hodmd_depth + 1) {
        throw Error(ErrorCode::invalid_argument, "sequence of " + std::to_string(count) +
                                                     " snapshots is too short for depth " +
                                                     std::to_string(hodmd_depth));
    }
    if (svd_rank > 0 && state_dim > 0 && count > 0) {
        const Eigen::Index bound = std::min<Eigen::Index>(state_dim * hodmd_depth, count - hodmd_depth);
        if (svd_rank > bound) {
            throw Error(ErrorCode::invalid_argument, "SVD rank " + std::to_string(svd_rank) + " exceeds " +
                                                         std::to_string(bound) +
                                                         " = min(state dim * depth, N - depth)");
        }
    }
}

Complex integer_power(Complex lambda, std::int64_t k) {
    if (k < 0) {
        lambda = Complex(1.0, 0.0) / lambda;
        k = -k;
    }
    Complex result(1.0, 0.0);
    while (k > 0) {
        if (k & 1) result *= lambda;
        lambda *= lambda;
        k >>= 1;
    }
    return result;
}

Complex unit_modulus(Complex lambda) {
    const double mag = std::abs(lambda);
    if (mag == 1.0) return lambda;
    const Complex u = lambda / mag;
    if (std::abs(u) == 1.0) return u;
    for (int step = 1; step <= 4; ++step) {
        for (int dr = -step; dr <= step; ++dr) {
            for (int di = -step; di <= step; ++di) {
                double re = u.real();
                double im = u.imag();
                for (int i = 0; i < std::abs(dr); ++i) re = std::nextafter(re, dr > 0 ? 2.0 : -2.0);
                for (int i = 0; i < std::abs(di); ++i) im = std::nextafter(im, di > 0 ? 2.0 : -2.0);
                const Complex c(re, im);
                if (std::abs(c) == 1.0) return c;
            }
        }
    }
    return u;
}

Vector fit_amplitudes(const Matrix& modes, const Vector& eigenvalues, const Matrix& training, int depth,
                      AmplitudeStrategy strategy) {
    const Eigen::Index s = modes.rows();
    const Eigen::Index r = modes.cols();
    if (training.rows() != s) {
        throw Error(ErrorCode::dimension_mismatch, "training data height differs from mode height");
    }
    const Eigen::Index blocks =
        strategy == AmplitudeStrategy::first_snapshot ? std::min<Eigen::Index>(depth, training.cols()) : training.cols();
    Matrix system(s * blocks, r);
    Vector rhs(s * blocks);
    Vector power = Vector::Ones(r);
    for (Eigen::Index j = 0; j < blocks; ++j) {
        system.middleRows(j * s, s) = modes * power.asDiagonal();
        rhs.segment(j * s, s) = training.col(j);
        power = power.cwiseProduct(eigenvalues);
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(system);
    return cod.solve(rhs);
}

namespace {

struct ExactDmd {
    Matrix modes;  // normalized, full height of the fitted sequence
    Vector eigenvalues;
    Eigen::Index rank = 0;
    double residual = 0.0;
    double reference = 0.0;
    std::vector<std::string> warnings;
};

ExactDmd exact_dmd(const Matrix& z, Eigen::Index requested_rank) {
    const Eigen::Index cols = z.cols() - 1;
    const Matrix x = z.leftCols(cols);
    const Matrix y = z.rightCols(cols);

    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sigma = svd.singularValues();
    const double tol = static_cast<double>(std::max(z.rows(), z.cols())) * (sigma.size() ? sigma(0) : 0.0) *
                       std::numeric_limits<double>::epsilon();
    Eigen::Index numerical_rank = 0;
    while (numerical_rank < sigma.size() && sigma(numerical_rank) > tol) ++numerical_rank;
    if (numerical_rank == 0) throw Error(ErrorCode::numerical, "snapshot sequence has no energy (all zero)");

    ExactDmd out;
    Eigen::Index r = requested_rank == 0 ? numerical_rank : requested_rank;
    if (r > numerical_rank) {
        out.warnings.push_back("requested SVD rank " + std::to_string(r) + " truncated to numerical rank " +
                               std::to_string(numerical_rank));
        r = numerical_rank;
    }
    out.rank = r;

    const Matrix u = svd.matrixU().leftCols(r);
    const Matrix v = svd.matrixV().leftCols(r);
    const RealVector inv_sigma = sigma.head(r).cwiseInverse();
    const Matrix y_v_sinv = y * v * inv_sigma.asDiagonal();
    const Matrix atilde = u.adjoint() * y_v_sinv;

    Eigen::ComplexEigenSolver<Matrix> eig(atilde, true);
    if (eig.info() != Eigen::Success) throw Error(ErrorCode::numerical, "eigendecomposition of the reduced operator failed");
    out.eigenvalues = eig.eigenvalues();
    out.modes = y_v_sinv * eig.eigenvectors();
    const double scale = y_v_sinv.norm();
    for (Eigen::Index i = 0; i < r; ++i) {
        double nrm = out.modes.col(i).norm();
        if (!(nrm > 1e-13 * scale)) {
            // lambda ~ 0: the exact mode vanishes, fall back to the projected mode.
            out.modes.col(i) = u * eig.eigenvectors().col(i);
            nrm = out.modes.col(i).norm();
        }
        out.modes.col(i) /= nrm;
    }

    out.reference = y.norm();
    out.residual = (y - y * v * v.adjoint()).norm();
    return out;
}

void check_sequence(const Matrix& sequence) {
    if (sequence.rows() < 1) throw Error(ErrorCode::invalid_argument, "state dimension must be >= 1");
    if (sequence.cols() < 2) throw Error(ErrorCode::invalid_argument, "DMD needs at least 2 snapshots");
    if (!(sequence.real().array().isFinite().all() && sequence.imag().array().isFinite().all())) {
        throw Error(ErrorCode::non_finite, "snapshot sequence contains non-finite values");
    }
}

DmdModel assemble(ExactDmd&& fit, Matrix modes, const Matrix& sequence, const DmdConfig& config,
                  std::int64_t label_origin) {
    DmdModel model;
    model.modes = std::move(modes);
    model.eigenvalues = std::move(fit.eigenvalues);
    model.depth = config.hodmd_depth;
    model.label_origin = label_origin;
    model.amplitude_strategy = config.amplitude_strategy;
    model.svd_rank = fit.rank;
    model.residual = fit.residual;
    model.residual_reference = fit.reference;
    model.training = sequence;
    model.warnings = std::move(fit.warnings);
    model.stabilization_record.reserve(model.eigenvalues.size());
    for (Eigen::Index i = 0; i < model.eigenvalues.size(); ++i) {
        model.stabilization_record.push_back({model.eigenvalues(i), Disposition::untouched});
    }
    model.amplitudes = fit_amplitudes(model.modes, model.eigenvalues, model.training, model.depth,
                                      model.amplitude_strategy);
    return model;
}

}  // namespace

DmdModel fit_dmd(const Matrix& sequence, const DmdConfig& config, std::int64_t label_origin) {
    check_sequence(sequence);
    if (config.hodmd_depth != 1) {
        throw Error(ErrorCode::invalid_argument, "fit_dmd expects depth 1; use fit_hodmd for depth " +
                                                     std::to_string(config.hodmd_depth));
    }
    config.validate(sequence.rows(), sequence.cols());
    ExactDmd fit = exact_dmd(sequence, config.svd_rank);
    Matrix modes = fit.modes;
    return assemble(std::move(fit), std::move(modes), sequence, config, label_origin);
}

DmdModel fit_hodmd(const Matrix& sequence, const DmdConfig& config, std::int64_t label_origin) {
    if (config.hodmd_depth == 1) return fit_dmd(sequence, config, label_origin);
    check_sequence(sequence);
    config.validate(sequence.rows(), sequence.cols());

    const Eigen::Index s = sequence.rows();
    const Eigen::Index d = config.hodmd_depth;
    const Eigen::Index stacked_count = sequence.cols() - d + 1;
    Matrix stacked(s * d, stacked_count);
    for (Eigen::Index k = 0; k < stacked_count; ++k) {
        for (Eigen::Index j = 0; j < d; ++j) stacked.block(j * s, k, s, 1) = sequence.col(k + j);
    }

    ExactDmd fit = exact_dmd(stacked, config.svd_rank);
    // Un-stack: the first block of each stacked mode is the state x_k itself.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < fit.eigenvalues.size(); ++i) {
        if (fit.modes.col(i).head(s).norm() > 1e-14) keep.push_back(i);
    }
    if (keep.size() != static_cast<std::size_t>(fit.eigenvalues.size())) {
        fit.warnings.push_back(std::to_string(fit.eigenvalues.size() - static_cast<Eigen::Index>(keep.size())) +
                               " stacked modes with a vanishing leading block dropped");
    }
    Matrix modes(s, static_cast<Eigen::Index>(keep.size()));
    Vector eigenvalues(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        const auto col = static_cast<Eigen::Index>(c);
        modes.col(col) = fit.modes.col(keep[c]).head(s).normalized();
        eigenvalues(col) = fit.eigenvalues(keep[c]);
    }
    fit.eigenvalues = std::move(eigenvalues);
    return assemble(std::move(fit), std::move(modes), sequence, config, label_origin);
}

DmdModel fit(const Matrix& sequence, const DmdConfig& config, std::int64_t label_origin) {
    DmdModel model = config.hodmd_depth == 1 ? fit_dmd(sequence, config, label_origin)
                                             : fit_hodmd(sequence, config, label_origin);
    if (config.stabilization) model = stabilize(model, *config.stabilization);
    return model;
}

DmdModel stabilize(const DmdModel& model, double epsilon) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw Error(ErrorCode::invalid_argument, "stabilization tolerance must be finite and >= 0");
    }
    DmdModel out = model;
    std::vector<Eigen::Index> survivors;
    Eigen::Index current = 0;
    for (auto& entry : out.stabilization_record) {
        if (!entry.retained()) continue;
        const Complex lambda = model.eigenvalues(current);
        const double mag = std::abs(lambda);
        if (mag == 0.0 || std::abs(mag - 1.0) > epsilon) {
            entry.disposition = mag > 1.0 ? Disposition::discarded_divergent : Disposition::discarded_convergent;
        } else {
            entry.disposition = Disposition::kept_normalized;
            survivors.push_back(current);
        }
        ++current;
    }
    if (survivors.empty()) {
        throw Error(ErrorCode::empty_spectrum, "stabilization with tolerance " + std::to_string(epsilon) +
                                                   " discarded every mode");
    }

    const auto r = static_cast<Eigen::Index>(survivors.size());
    out.modes.resize(model.modes.rows(), r);
    out.eigenvalues.resize(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        out.modes.col(i) = model.modes.col(survivors[i]);
        out.eigenvalues(i) = unit_modulus(model.eigenvalues(survivors[i]));
    }
    out.amplitudes = fit_amplitudes(out.modes, out.eigenvalues, out.training, out.depth, out.amplitude_strategy);
    return out;
}

Vector forecast(const DmdModel& model, std::int64_t label) {
    if (model.eigenvalues.size() == 0) throw Error(ErrorCode::empty_spectrum, "model has no modes to forecast with");
    const std::int64_t k = label - model.label_origin;
    Vector weights(model.eigenvalues.size());
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        weights(i) = integer_power(model.eigenvalues(i), k) * model.amplitudes(i);
    }
    return model.modes * weights;
}

Matrix forecast(const DmdModel& model, const std::vector<std::int64_t>& labels) {
    Matrix out(model.state_dim(), static_cast<Eigen::Index>(labels.size()));
    for (std::size_t j = 0; j < labels.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = forecast(model, labels[j]);
    return out;
}

}  // namespace pdmd
