#include <doctest.h>

#include "pdmd/benchmarks.hpp"
#include "pdmd/pod.hpp"
#include "test_util.hpp"

#include <Eigen/SVD>

using namespace pdmd;
using testutil::rel_error;

namespace {

double orthonormality_defect(const Matrix& modes) {
    return (modes.adjoint() * modes - Matrix::Identity(modes.cols(), modes.cols())).cwiseAbs().maxCoeff();
}

// Independent oracle: one-sided Jacobi SVD.
RealVector oracle_singular_values(const Matrix& a) { return Eigen::JacobiSVD<Matrix>(a).singularValues(); }

void check_energy_identity(const Matrix& a, const PodBasis& basis) {
    const Matrix residual = a - lift(basis, project(basis, a));
    const double tail = basis.singular_values.tail(basis.singular_values.size() - basis.rank()).squaredNorm();
    const double err2 = residual.squaredNorm();
    CHECK(std::abs(err2 - tail) <= 1e-8 * std::max(tail, 1e-300) + 1e-20 * a.squaredNorm());
}

}  // namespace

TEST_CASE("assemble_global_matrix concatenates members in order") {
    ParametricSnapshotSet set;
    set.time_axis = TimeAxis{0.0, 1.0, 2, 1};
    Matrix a(1, 2), b(1, 2);
    a << 1.0, 2.0;
    b << 3.0, 4.0;
    set.members.push_back({ParameterPoint{0.0}, a});
    CHECK(assemble_global_matrix(set) == a);
    set.members.push_back({ParameterPoint{1.0}, b});
    Matrix expected(1, 4);
    expected << 1.0, 2.0, 3.0, 4.0;
    CHECK(assemble_global_matrix(set) == expected);

    const auto toy = generate_toy(ToySpec{});
    const Matrix g = assemble_global_matrix(toy);
    CHECK(g.rows() == 1000);
    CHECK(g.cols() == 1290);
}

TEST_CASE("rank-one outer product") {
    std::mt19937_64 rng(3);
    Vector u = testutil::random_complex(6, 1, rng).col(0).normalized();
    Vector v = testutil::random_complex(4, 1, rng).col(0).normalized();
    const Matrix a = u * v.transpose();
    const PodBasis basis = fit_pod(a, 1);
    CHECK(basis.singular_values.size() == 4);
    CHECK(basis.singular_values(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(basis.singular_values.tail(3).maxCoeff() < 1e-14);
    // Spans u up to a unit phase.
    CHECK(std::abs(std::abs(basis.modes.col(0).dot(u)) - 1.0) < 1e-12);
}

TEST_CASE("diagonal matrix gives canonical modes") {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 0) = 3.0;
    a(1, 1) = 2.0;
    a(2, 2) = 1.0;
    const PodBasis basis = fit_pod(a, 2);
    CHECK(basis.singular_values(0) == doctest::Approx(3.0));
    CHECK(basis.singular_values(1) == doctest::Approx(2.0));
    CHECK(basis.singular_values(2) == doctest::Approx(1.0));
    CHECK(std::abs(basis.modes(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(basis.modes(1, 1)) == doctest::Approx(1.0));
    // Phase convention: largest entry real positive.
    CHECK(basis.modes(0, 0).real() > 0.0);
    CHECK(basis.modes(0, 0).imag() == 0.0);
}

TEST_CASE("toy global matrix has numerical rank two") {
    const auto toy = generate_toy(ToySpec{});
    const Matrix g = assemble_global_matrix(toy);
    const PodBasis basis = fit_pod(g, 2);
    CHECK(basis.singular_values(2) / basis.singular_values(0) < 1e-10);
    CHECK(rel_error(lift(basis, project(basis, g)), g) < 1e-8);
    CHECK(orthonormality_defect(basis.modes) < 1e-10);
}

TEST_CASE("rank bounds are enforced") {
    const Matrix a = Matrix::Ones(3, 5);
    CHECK_THROWS_AS(fit_pod(a, 0), Error);
    CHECK_THROWS_AS(fit_pod(a, 4), Error);
    CHECK_NOTHROW(fit_pod(a, 3));
}

TEST_CASE("project and lift basics") {
    std::mt19937_64 rng(5);
    const Matrix a = testutil::random_complex(8, 5, rng);
    const PodBasis basis = fit_pod(a, 3);
    CHECK((project(basis, basis.modes) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((lift(basis, Matrix::Identity(3, 3)) - basis.modes).cwiseAbs().maxCoeff() == 0.0);

    // Orthogonal complement projects to zero.
    const Matrix full = Eigen::JacobiSVD<Matrix>(a, Eigen::ComputeFullU).matrixU();
    const Matrix complement = full.rightCols(5);
    CHECK(project(basis, complement).cwiseAbs().maxCoeff() < 1e-12);

    // Pythagoras for a generic vector.
    const Matrix x = testutil::random_complex(8, 1, rng);
    const Matrix px = lift(basis, project(basis, x));
    CHECK(std::abs((x - px).squaredNorm() + px.squaredNorm() - x.squaredNorm()) < 1e-8 * x.squaredNorm());

    // Span members are reproduced.
    const Matrix in_span = basis.modes * testutil::random_complex(3, 2, rng);
    CHECK(rel_error(lift(basis, project(basis, in_span)), in_span) < 1e-10);

    CHECK_THROWS_AS(project(basis, Matrix::Zero(7, 1)), Error);
    CHECK_THROWS_AS(lift(basis, Matrix::Zero(2, 1)), Error);
}

TEST_CASE("POD properties on random inputs (property)") {
    // Shapes cover the direct path and the Gram path (rows > 4 * cols).
    const std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes{{10, 7}, {7, 10}, {60, 6}, {200, 9}, {5, 5}};
    std::mt19937_64 rng(17);
    for (const auto& [rows, cols] : shapes) {
        for (int real_case = 0; real_case < 2; ++real_case) {
            Matrix a = real_case ? testutil::random_real(rows, cols, rng).cast<Complex>()
                                 : testutil::random_complex(rows, cols, rng);
            // Graded spectrum so the Gram path is exercised on a non-trivial condition number.
            a = a * RealVector::LinSpaced(cols, 1.0, 1e-3).asDiagonal();
            const Eigen::Index k = std::min(rows, cols);
            for (Eigen::Index n : {Eigen::Index{1}, k / 2 + 1, k}) {
                CAPTURE(rows);
                CAPTURE(cols);
                CAPTURE(n);
                const PodBasis basis = fit_pod(a, n);
                CHECK(basis.rank() == n);
                CHECK(orthonormality_defect(basis.modes) < 1e-10);
                const RealVector& s = basis.singular_values;
                CHECK(s.size() == k);
                for (Eigen::Index i = 1; i < s.size(); ++i) CHECK(s(i) <= s(i - 1));
                CHECK(s.minCoeff() >= 0.0);
                CHECK(rel_error(s, oracle_singular_values(a)) < 1e-10);
                check_energy_identity(a, basis);

                // Idempotence of project after lift.
                const Matrix r = testutil::random_complex(n, 3, rng);
                CHECK(rel_error(project(basis, lift(basis, r)), r) < 1e-10);

                if (real_case) {
                    const Matrix rec = lift(basis, project(basis, a));
                    CHECK(rec.imag().cwiseAbs().maxCoeff() < 1e-10 * a.cwiseAbs().maxCoeff());
                }
            }
        }
    }
}

TEST_CASE("POD is deterministic and phase-normalized") {
    std::mt19937_64 rng(23);
    const Matrix a = testutil::random_complex(30, 4, rng);
    const PodBasis b1 = fit_pod(a, 3);
    const PodBasis b2 = fit_pod(a, 3);
    CHECK(b1.modes == b2.modes);
    for (Eigen::Index j = 0; j < 3; ++j) {
        Eigen::Index arg;
        b1.modes.col(j).cwiseAbs().maxCoeff(&arg);
        CHECK(b1.modes(arg, j).imag() == 0.0);
        CHECK(b1.modes(arg, j).real() > 0.0);
    }
}

TEST_CASE("energy rank helper") {
    RealVector s(4);
    s << 3.0, 2.0, 1.0, 0.0;
    CHECK(rank_for_energy(s, 0.5) == 1);        // 9/14
    CHECK(rank_for_energy(s, 0.9) == 2);        // 13/14
    CHECK(rank_for_energy(s, 1.0) == 3);
    CHECK_THROWS_AS(rank_for_energy(s, 0.0), Error);
}
