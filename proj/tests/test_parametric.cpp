#include <doctest.h>

#include "pdmd/benchmarks.hpp"
#include "pdmd/parallel.hpp"
#include "pdmd/parametric.hpp"
#include "pdmd/sensitivity.hpp"
#include "test_util.hpp"

#include <numeric>

using namespace pdmd;
using testutil::rel_error;

namespace {

// Smaller spatial grid than the default; the toy structure does not depend on m.
ToySpec small_toy() {
    ToySpec spec;
    spec.m = 300;
    return spec;
}

DmdConfig rank_config(Eigen::Index r) {
    DmdConfig c;
    c.svd_rank = r;
    return c;
}

const ParametricSnapshotSet& toy_set() {
    static const ParametricSnapshotSet set = generate_toy(small_toy());
    return set;
}

// Toy members on twice the training window, so probe labels past it have truth.
const ParametricSnapshotSet& long_toy_set() {
    static const ParametricSnapshotSet set = toy_truth_set(small_toy(), small_toy().parameters, 257);
    return set;
}

const ParametricDmdModel& toy_model(Variant v) {
    static const ParametricDmdModel mono = fit_monolithic(toy_set(), 2, rank_config(2));
    static const ParametricDmdModel part = fit_partitioned(toy_set(), 2, rank_config(2));
    return v == Variant::monolithic ? mono : part;
}

double nearest(const Vector& set, Complex z) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < set.size(); ++i) best = std::min(best, std::abs(set(i) - z));
    return best;
}

std::vector<std::int64_t> label_range(std::int64_t first, std::int64_t last) {
    std::vector<std::int64_t> out;
    for (std::int64_t k = first; k <= last; ++k) out.push_back(k);
    return out;
}

}  // namespace

TEST_CASE("variant names") {
    CHECK(variant_from_string("monolithic") == Variant::monolithic);
    CHECK(variant_from_string(to_string(Variant::partitioned)) == Variant::partitioned);
    CHECK_THROWS_AS(variant_from_string("mixed"), Error);
}

TEST_CASE("single parameter: both variants agree") {
    const auto one = toy_set().select({4});
    const auto mono = fit_monolithic(one, 2, rank_config(2));
    const auto part = fit_partitioned(one, 2, rank_config(2));
    CHECK(mono.pod.modes == part.pod.modes);
    REQUIRE(mono.operators.size() == 1);
    REQUIRE(part.operators.size() == 1);
    for (std::int64_t label : {0, 50, 128, 200, 256}) {
        CHECK(rel_error(predict_reduced(mono, label), predict_reduced(part, label)) < 1e-10);
    }
    // Same as a plain POD + DMD pipeline.
    const DmdModel direct = fit_dmd(project(part.pod, one.members[0].values), rank_config(2), 0);
    CHECK(rel_error(part.operators[0].eigenvalues, direct.eigenvalues) < 1e-12);
}

TEST_CASE("model shapes") {
    const auto& mono = toy_model(Variant::monolithic);
    const auto& part = toy_model(Variant::partitioned);
    CHECK(mono.n() == 2);
    CHECK(mono.p() == 10);
    REQUIRE(mono.operators.size() == 1);
    CHECK(mono.operators[0].state_dim() == 20);
    REQUIRE(part.operators.size() == 10);
    for (const auto& op : part.operators) CHECK(op.state_dim() == 2);
    CHECK(mono.pod.modes == part.pod.modes);
    CHECK(predict_reduced(mono, 5).rows() == 2);
    CHECK(predict_reduced(mono, 5).cols() == 10);
}

TEST_CASE("monolithic toy operator recovers the two frequencies") {
    const auto& model = toy_model(Variant::monolithic);
    const double dt = small_toy().dt();
    const Vector& ev = model.operators[0].eigenvalues;
    REQUIRE(ev.size() == 2);
    CHECK(nearest(ev, std::exp(Complex(0.0, 2.3 * dt))) < 1e-8);
    CHECK(nearest(ev, std::exp(Complex(0.0, 2.8 * dt))) < 1e-8);
}

TEST_CASE("identical members give identical spectra") {
    ParametricSnapshotSet set;
    set.time_axis = TimeAxis{0.0, 1.0, 12, 0};
    std::mt19937_64 rng(3);
    const Matrix a = 0.5 * testutil::random_complex(4, 4, rng);
    Matrix x(4, 12);
    x.col(0) = testutil::random_complex(4, 1, rng);
    for (Eigen::Index k = 1; k < 12; ++k) x.col(k) = a * x.col(k - 1);
    for (int i = 0; i < 4; ++i) set.members.push_back({ParameterPoint{static_cast<double>(i)}, x});
    const auto model = fit_partitioned(set, 4, rank_config(0));
    for (const auto& op : model.operators) {
        REQUIRE(op.rank() == model.operators[0].rank());
        CHECK((op.eigenvalues - model.operators[0].eigenvalues).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("reduced forecasts") {
    const ToySpec spec = small_toy();
    for (Variant v : {Variant::monolithic, Variant::partitioned}) {
        CAPTURE(to_string(v));
        const auto& model = toy_model(v);
        // Zero power reproduces the reduced training data.
        const Matrix at0 = predict_reduced(model, 0);
        for (std::size_t i = 0; i < model.p(); ++i) {
            const Matrix expected = project(model.pod, toy_set().members[i].values.col(0));
            CHECK(rel_error(Matrix(at0.col(static_cast<Eigen::Index>(i))), expected) < 1e-8);
        }
        // Beyond the training window, against the analytic coefficients.
        const Matrix at192 = predict_reduced(model, 192);
        for (std::size_t i = 0; i < model.p(); ++i) {
            const Matrix truth = project(model.pod, evaluate_toy_truth(spec, model.parameters[i][0], 192));
            CHECK(rel_error(Matrix(at192.col(static_cast<Eigen::Index>(i))), truth) < 1e-6);
        }
    }
    for (std::int64_t label : {0, 64, 128, 192, 256}) {
        CHECK(rel_error(predict_reduced(toy_model(Variant::monolithic), label),
                        predict_reduced(toy_model(Variant::partitioned), label)) < 1e-6);
    }
}

TEST_CASE("full forecasts on the toy system") {
    const ToySpec spec = small_toy();
    const auto& model = toy_model(Variant::partitioned);

    // Training parameter, training label.
    ForecastRequest at_node{ParameterPoint{0.3}, {37}, std::nullopt};
    CHECK(rel_error(forecast_full(model, at_node).full.col(0), toy_set().members[3].values.col(37)) < 1e-8);

    for (double mu : {0.375, 0.525, 0.875}) {
        ForecastRequest req{ParameterPoint{mu}, label_range(129, 256), std::nullopt};
        const Forecast f = forecast_full(model, req);
        REQUIRE(f.full.cols() == 128);
        CHECK(f.reduced.rows() == 2);
        double worst = 0.0;
        for (Eigen::Index k = 0; k < f.full.cols(); ++k) {
            worst = std::max(worst, rel_error(f.full.col(k), evaluate_toy_truth(spec, mu, req.labels[k])));
        }
        CHECK(worst < 1e-6);
    }

    // forecast_many gives the same answers as separate requests.
    const std::vector<ParameterPoint> pts{ParameterPoint{0.15}, ParameterPoint{0.66}};
    const auto many = forecast_many(model, pts, {10, 200}, OnlineSettings{});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Forecast one = forecast_full(model, ForecastRequest{pts[i], {10, 200}, std::nullopt});
        CHECK(rel_error(many[i].full, one.full) < 1e-14);
    }

    // Hull-restricted regressors refuse to extrapolate.
    try {
        forecast_full(model, ForecastRequest{ParameterPoint{0.95}, {10}, std::nullopt});
        FAIL("expected extrapolation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::extrapolation);
    }
    OnlineSettings nn;
    nn.regressor = RegressorKind::nearest;
    CHECK_NOTHROW(forecast_full(model, ForecastRequest{ParameterPoint{0.95}, {10}, nn}));
    CHECK_THROWS_AS(forecast_full(model, ForecastRequest{ParameterPoint{0.95}, {}, nn}), Error);
}

TEST_CASE("member order does not change forecasts") {
    std::vector<std::size_t> order(10);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(5);
    std::shuffle(order.begin(), order.end(), rng);
    const auto permuted = fit_partitioned(toy_set().select(order), 2, rank_config(2));
    const auto& model = toy_model(Variant::partitioned);
    // The bases may differ by a unit phase per mode, so compare lifted quantities.
    const Matrix full_a = lift(model.pod, predict_reduced(model, 150));
    const Matrix full_b = lift(permuted.pod, predict_reduced(permuted, 150));
    for (std::size_t i = 0; i < order.size(); ++i) {
        CHECK(rel_error(full_b.col(static_cast<Eigen::Index>(i)), full_a.col(static_cast<Eigen::Index>(order[i]))) < 1e-10);
    }
    const ForecastRequest req{ParameterPoint{0.42}, {3, 140}, std::nullopt};
    CHECK(rel_error(forecast_full(permuted, req).full, forecast_full(model, req).full) < 1e-10);
}

TEST_CASE("stabilized HODMD operators stay on the unit circle") {
    SyntheticUnstableSpec spec;
    spec.parameters = {0.0, 0.5, 1.0};
    const auto set = generate_synthetic_unstable(spec);
    DmdConfig c;
    c.hodmd_depth = 3;
    c.stabilization = 1e-3;
    const auto model = fit_partitioned(set, 6, c);
    for (const auto& op : model.operators) {
        CHECK(op.rank() > 0);
        for (Eigen::Index i = 0; i < op.rank(); ++i) CHECK(std::abs(std::abs(op.eigenvalues(i)) - 1.0) == 0.0);
    }
}

TEST_CASE("partitioned failures name the parameter") {
    ParametricSnapshotSet set;
    set.time_axis = TimeAxis{0.0, 1.0, 6, 0};
    std::mt19937_64 rng(1);
    set.members.push_back({ParameterPoint{0.0}, testutil::random_complex(5, 6, rng)});
    set.members.push_back({ParameterPoint{1.0}, Matrix::Zero(5, 6)});
    DmdConfig c = rank_config(0);
    c.stabilization = 1e-3;
    // Random data is far from the unit circle, so stabilization empties the spectrum.
    try {
        fit_partitioned(set, 3, c);
        FAIL("expected a failure");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("(0") != std::string::npos);
    }
    CHECK_THROWS_AS(fit_partitioned(set, 11, rank_config(0)), Error);
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
    std::vector<int> out(50, 0);
    parallel_for(50, [&](std::size_t i) { out[i] = static_cast<int>(i); });
    for (int i = 0; i < 50; ++i) CHECK(out[static_cast<std::size_t>(i)] == i);
    try {
        parallel_for(50, [](std::size_t i) {
            if (i % 7 == 3) throw std::runtime_error(std::to_string(i));
        });
        FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "3");
    }
}

TEST_CASE("error metric trivial cases") {
    const ToySpec spec = small_toy();
    const auto truth = toy_truth_set(spec, {0.25, 0.45}, 20);
    const std::vector<std::int64_t> labels{2, 5, 19};
    std::vector<Matrix> exact, doubled;
    for (const auto& m : truth.members) {
        Matrix e(m.values.rows(), 3), d(m.values.rows(), 3);
        for (int k = 0; k < 3; ++k) {
            e.col(k) = m.values.col(labels[k]);
            d.col(k) = 2.0 * m.values.col(labels[k]);
        }
        exact.push_back(e);
        doubled.push_back(d);
    }
    const ErrorReport zero = error_report_from(exact, truth, labels);
    for (double v : zero.mean_error) CHECK(v == 0.0);
    const ErrorReport one = error_report_from(doubled, truth, labels);
    for (double v : one.mean_error) CHECK(v == 1.0);
    CHECK(one.times[1] == doctest::Approx(5.0 * spec.dt()));
    CHECK_THROWS_AS(error_report_from(exact, truth, {2, 5, 25}), Error);
    CHECK_THROWS_AS(error_report_from({exact[0]}, truth, labels), Error);
}

TEST_CASE("error metric matches a brute-force loop (property)") {
    std::mt19937_64 rng(8);
    ParametricSnapshotSet truth;
    truth.time_axis = TimeAxis{1.0, 0.5, 9, 3};
    for (int i = 0; i < 4; ++i) truth.members.push_back({ParameterPoint{0.1 * i, 1.0}, testutil::random_complex(7, 9, rng)});
    truth.members[2].values.col(4).setZero();  // label 7: excluded term
    const std::vector<std::int64_t> labels{3, 7, 11};
    std::vector<Matrix> pred;
    for (int i = 0; i < 4; ++i) pred.push_back(testutil::random_complex(7, 3, rng));
    const ErrorReport r = error_report_from(pred, truth, labels);
    CHECK(r.excluded_total == 1);
    CHECK(r.excluded[1] == 1);
    CHECK(std::isnan(r.relative_errors(2, 1)));
    for (std::size_t k = 0; k < labels.size(); ++k) {
        double sum = 0.0;
        int used = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            const Eigen::Index col = labels[k] - 3;
            double num = 0.0, den = 0.0;
            for (Eigen::Index j = 0; j < 7; ++j) {
                num += std::norm(pred[i](j, static_cast<Eigen::Index>(k)) - truth.members[i].values(j, col));
                den += std::norm(truth.members[i].values(j, col));
            }
            if (den == 0.0) continue;
            sum += std::sqrt(num) / std::sqrt(den);
            ++used;
        }
        CHECK(std::abs(r.mean_error[k] - sum / used) < 1e-14);
    }

    ParametricSnapshotSet zeros = truth;
    for (auto& m : zeros.members) m.values.setZero();
    CHECK(std::isnan(error_report_from(pred, zeros, labels).mean_error[0]));
}

TEST_CASE("error report on untested toy parameters") {
    const ToySpec spec = small_toy();
    const auto truth = toy_truth_set(spec, {0.375, 0.525, 0.875}, 257);
    const auto r = compute_error_report(toy_model(Variant::monolithic), truth, {130, 192, 256});
    for (double e : r.mean_error) CHECK(e < 1e-6);
    CHECK(r.training_parameter_count == 10);
    CHECK(r.training_time_count == 129);
    CHECK(r.parameters.size() == 3);
    CHECK(r.relative_errors.rows() == 3);
}

TEST_CASE("nested subsets") {
    std::vector<std::size_t> pool{0, 2, 3, 5, 7, 8, 9};
    const auto subsets = nested_random_subsets(pool, 2, 2, 6, 11);
    REQUIRE(subsets.size() == 3);
    CHECK(subsets[0].size() == 2);
    CHECK(subsets[2].size() == 6);
    for (std::size_t k = 1; k < subsets.size(); ++k) {
        for (std::size_t x : subsets[k - 1]) {
            CHECK(std::find(subsets[k].begin(), subsets[k].end(), x) != subsets[k].end());
        }
    }
    for (const auto& s : subsets) {
        for (std::size_t x : s) CHECK(std::find(pool.begin(), pool.end(), x) != pool.end());
    }
    CHECK(nested_random_subsets(pool, 2, 2, 6, 11) == subsets);
    CHECK_THROWS_AS(nested_random_subsets(pool, 2, 1, 8, 11), Error);
}

TEST_CASE("parameter sensitivity on the toy system") {
    SensitivitySetup setup;
    setup.variant = Variant::partitioned;
    setup.pod_rank = 2;
    setup.dmd_config = rank_config(2);
    setup.probe_label = 200;
    setup.validation = {5};  // mu = 0.5 held out

    const std::vector<std::vector<std::size_t>> subsets{{0, 9}, {0, 9, 3}, {0, 9, 3, 7}};
    const auto table = run_parameter_sensitivity(long_toy_set(), subsets, 129, setup);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.mode == "parameter");
    for (const auto& row : table.rows) CHECK(row.error < 1e-6);
    CHECK(table.rows[2].size == 4);

    const std::vector<std::vector<std::size_t>> same{{0, 3, 9}, {0, 3, 9}};
    const auto flat = run_parameter_sensitivity(long_toy_set(), same, 129, setup);
    CHECK(flat.rows[0].error == flat.rows[1].error);

    CHECK_THROWS_AS(run_parameter_sensitivity(long_toy_set(), {{0, 5}}, 129, setup), Error);      // Q overlaps
    CHECK_THROWS_AS(run_parameter_sensitivity(long_toy_set(), {{0, 9}, {0, 3}}, 129, setup), Error);  // not nested
}

TEST_CASE("time sensitivity on the toy system") {
    SensitivitySetup setup;
    setup.variant = Variant::monolithic;
    setup.pod_rank = 2;
    setup.dmd_config = rank_config(2);
    setup.probe_label = 200;
    setup.validation = {5};
    const std::vector<std::size_t> subset{0, 2, 4, 6, 8};
    const auto table = run_time_sensitivity(long_toy_set(), subset, {3, 4, 10, 129}, setup);
    REQUIRE(table.rows.size() == 4);
    CHECK(table.mode == "time");
    for (const auto& row : table.rows) CHECK(row.error < 1e-6);
    CHECK(table.rows[0].size == 3);

    const auto flat = run_time_sensitivity(long_toy_set(), subset, {129, 129}, setup);
    CHECK(flat.rows[0].error == flat.rows[1].error);

    DmdConfig deep = rank_config(2);
    deep.hodmd_depth = 3;
    setup.dmd_config = deep;
    CHECK_THROWS_AS(run_time_sensitivity(long_toy_set(), subset, {3, 10}, setup), Error);
}

TEST_CASE("hull-seeded subsets") {
    const std::vector<std::size_t> pool{1, 2, 3, 4, 6, 7, 8};
    const auto hull = hull_members(toy_set(), pool);
    CHECK(hull == std::vector<std::size_t>{1, 8});
    const auto subsets = nested_random_subsets(pool, 2, 1, 5, 3, hull);
    REQUIRE(subsets[0].size() == 2);
    CHECK(subsets[0] == hull);
    CHECK(nested_random_subsets(pool, 4, 1, 5, 3, hull)[0].size() == 4);
    CHECK_THROWS_AS(nested_random_subsets(pool, 1, 1, 5, 3, {0}), Error);

    ParametricSnapshotSet square;
    square.time_axis = TimeAxis{0.0, 1.0, 2, 0};
    for (double x : {0.0, 1.0, 0.5}) {
        for (double y : {0.0, 1.0, 0.4}) square.members.push_back({ParameterPoint{x, y}, Matrix::Ones(1, 2)});
    }
    std::vector<std::size_t> all(square.p());
    std::iota(all.begin(), all.end(), 0);
    auto corners = hull_members(square, all);
    std::sort(corners.begin(), corners.end());
    CHECK(corners == std::vector<std::size_t>{0, 1, 3, 4});
}
