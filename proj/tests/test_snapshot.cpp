#include <doctest.h>

#include "pdmd/archive.hpp"
#include "pdmd/benchmarks.hpp"
#include "test_util.hpp"

#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

using namespace pdmd;
using testutil::TempDir;

namespace {

ParametricSnapshotSet small_set(std::uint64_t seed, std::size_t p = 3, Eigen::Index m = 4, std::int64_t n = 5) {
    std::mt19937_64 rng(seed);
    ParametricSnapshotSet set;
    set.field_name = "q";
    set.time_axis = TimeAxis{0.5, 0.25, n, 1};
    for (std::size_t i = 0; i < p; ++i) {
        set.members.push_back({ParameterPoint{static_cast<double>(i), 0.5 * static_cast<double>(i) + 1.0},
                               testutil::random_complex(m, n, rng)});
    }
    return set;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return std::memcmp(a.data(), b.data(), sizeof(Complex) * static_cast<std::size_t>(a.size())) == 0;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("time axis maps labels to physical time") {
    TimeAxis ax{2.0, 0.5, 4, 1};
    CHECK(ax.time_of(1) == 2.0);
    CHECK(ax.time_of(4) == 3.5);
    CHECK(ax.last_label() == 4);
    CHECK(ax.contains(1));
    CHECK_FALSE(ax.contains(0));
    CHECK(ax.column_of(3) == 2);
    CHECK(ax.prefix(2).count == 2);
    CHECK_THROWS_AS(ax.prefix(5), Error);
}

TEST_CASE("valid set has no violations") {
    CHECK(validate_set(small_set(1)).empty());
}

TEST_CASE("duplicate parameter is reported once") {
    auto set = small_set(2);
    set.members[2].parameter = set.members[0].parameter;
    const auto v = validate_set(set);
    REQUIRE(v.size() == 1);
    CHECK(v[0].invariant == "duplicate parameter");
    CHECK(v[0].member == std::size_t{2});
}

TEST_CASE("NaN entry is reported with member and column") {
    auto set = small_set(3);
    set.members[1].values(2, 3) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
    const auto v = validate_set(set);
    REQUIRE(v.size() == 1);
    CHECK(v[0].invariant == "non-finite value");
    CHECK(v[0].member == std::size_t{1});
    CHECK(v[0].detail.find("column 3") != std::string::npos);
}

TEST_CASE("shape and axis violations") {
    auto set = small_set(4);
    set.members[1].values.conservativeResize(3, Eigen::NoChange);
    set.members[2].values.conservativeResize(Eigen::NoChange, 4);
    set.time_axis.dt = 0.0;
    const auto v = validate_set(set);
    std::vector<std::string> names;
    for (const auto& x : v) names.push_back(x.invariant);
    CHECK(std::count(names.begin(), names.end(), "shared m") == 1);
    CHECK(std::count(names.begin(), names.end(), "shared time axis") == 1);
    CHECK(std::count(names.begin(), names.end(), "time step") == 1);
    CHECK_THROWS_AS(require_valid(set), Error);

    ParametricSnapshotSet empty;
    CHECK_FALSE(validate_set(empty).empty());
}

TEST_CASE("select keeps member order and truncates the window") {
    const auto set = small_set(5);
    const auto sub = set.select({2, 0}, 3);
    REQUIRE(sub.p() == 2);
    CHECK(sub.members[0].parameter == set.members[2].parameter);
    CHECK(sub.time_axis.count == 3);
    CHECK(sub.members[1].values == set.members[0].values.leftCols(3));
}

TEST_CASE("zero set archive payload is all zero bytes") {
    TempDir dir;
    ParametricSnapshotSet set;
    set.time_axis = TimeAxis{0.0, 1.0, 3, 1};
    set.members.push_back({ParameterPoint{0.0}, Matrix::Zero(2, 3)});
    write_archive(set, dir.path());
    const std::string bytes = slurp(dir / "member_0000.bin");
    REQUIRE(bytes.size() == kMatrixHeaderBytes + 2 * 3 * 16);
    CHECK(bytes.substr(0, 4) == "PDMD");
    CHECK(bytes[4] == 1);
    CHECK(bytes[8] == 1);
    for (std::size_t i = kMatrixHeaderBytes; i < bytes.size(); ++i) REQUIRE(bytes[i] == 0);
}

TEST_CASE("archive round trip is bit exact (property)") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        TempDir dir;
        auto set = small_set(seed, 1 + seed % 4, 1 + static_cast<Eigen::Index>(seed % 5), 2 + static_cast<std::int64_t>(seed % 6));
        // Awkward doubles: subnormals, negative zero, extremes.
        set.members[0].values(0, 0) = Complex(std::numeric_limits<double>::denorm_min(), -0.0);
        set.members[0].values(0, 1) = Complex(std::numeric_limits<double>::max(), -std::numeric_limits<double>::min());
        set.time_axis.t0 = 0.1 * static_cast<double>(seed) + 1e-17;
        write_archive(set, dir.path());
        const auto back = read_archive(dir.path());
        REQUIRE(back.p() == set.p());
        CHECK(back.field_name == set.field_name);
        CHECK(back.time_axis == set.time_axis);
        for (std::size_t i = 0; i < set.p(); ++i) {
            CHECK(back.members[i].parameter == set.members[i].parameter);
            CHECK(bit_equal(back.members[i].values, set.members[i].values));
        }
    }
}

TEST_CASE("real64 archive round trip") {
    TempDir dir;
    auto set = small_set(11);
    for (auto& m : set.members) m.values = m.values.real().cast<Complex>();
    write_archive(set, dir.path(), Dtype::real64);
    const auto back = read_archive(dir.path());
    for (std::size_t i = 0; i < set.p(); ++i) CHECK(bit_equal(back.members[i].values, set.members[i].values));
    CHECK(slurp(dir / "member_0000.bin").size() == kMatrixHeaderBytes + 4 * 5 * 8);

    auto complex_set = small_set(12);
    TempDir other;
    CHECK_THROWS_AS(write_archive(complex_set, other.path(), Dtype::real64), Error);
}

TEST_CASE("invalid set is rejected before anything is written") {
    TempDir dir;
    auto set = small_set(6);
    set.members[1].parameter = set.members[0].parameter;
    const auto target = dir / "out";
    CHECK_THROWS_AS(write_archive(set, target), Error);
    CHECK_FALSE(std::filesystem::exists(target));
}

TEST_CASE("corrupted archives give specific errors") {
    const auto set = small_set(7);
    auto expect_code = [](const std::filesystem::path& p, ErrorCode code) {
        try {
            read_archive(p);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == code);
        }
    };

    SUBCASE("truncated payload") {
        TempDir dir;
        write_archive(set, dir.path());
        const auto file = dir / "member_0001.bin";
        std::filesystem::resize_file(file, std::filesystem::file_size(file) - 5);
        expect_code(dir.path(), ErrorCode::dimension_mismatch);
    }
    SUBCASE("version 99") {
        TempDir dir;
        write_archive(set, dir.path());
        std::fstream f(dir / "member_0000.bin", std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(4);
        const char v[4] = {99, 0, 0, 0};
        f.write(v, 4);
        f.close();
        expect_code(dir.path(), ErrorCode::unsupported_version);
    }
    SUBCASE("bad magic") {
        TempDir dir;
        write_archive(set, dir.path());
        std::fstream f(dir / "member_0002.bin", std::ios::in | std::ios::out | std::ios::binary);
        f.write("XXXX", 4);
        f.close();
        expect_code(dir.path(), ErrorCode::format);
    }
    SUBCASE("trailing bytes") {
        TempDir dir;
        write_archive(set, dir.path());
        std::ofstream f(dir / "member_0000.bin", std::ios::app | std::ios::binary);
        f << "junk";
        f.close();
        expect_code(dir.path(), ErrorCode::dimension_mismatch);
    }
    SUBCASE("non-finite payload") {
        TempDir dir;
        write_archive(set, dir.path());
        auto bad = set.members[0].values;
        bad(1, 1) = Complex(std::numeric_limits<double>::infinity(), 0.0);
        write_matrix_file(dir / "member_0000.bin", bad);
        expect_code(dir.path(), ErrorCode::non_finite);
    }
    SUBCASE("manifest and payload disagree") {
        TempDir dir;
        write_archive(set, dir.path());
        write_matrix_file(dir / "member_0001.bin", set.members[1].values.leftCols(3));
        expect_code(dir.path(), ErrorCode::dimension_mismatch);
    }
    SUBCASE("missing manifest") {
        TempDir dir;
        expect_code(dir.path(), ErrorCode::io);
    }
    SUBCASE("garbage manifest") {
        TempDir dir;
        std::ofstream(dir / "manifest.json") << "{not json";
        expect_code(dir.path(), ErrorCode::format);
    }
}

TEST_CASE("unknown manifest keys are ignored") {
    TempDir dir;
    const auto set = small_set(8);
    write_archive(set, dir.path());
    std::string manifest = slurp(dir / "manifest.json");
    manifest.insert(1, "\"extra_key\": [1, 2, 3],");
    std::ofstream(dir / "manifest.json", std::ios::trunc) << manifest;
    CHECK(read_archive(dir.path()).p() == set.p());
}

TEST_CASE("toy archive lists the ten parameters") {
    TempDir dir;
    const auto set = generate_toy(ToySpec{});
    write_archive(set, dir.path());
    const auto back = read_archive(dir.path());
    REQUIRE(back.p() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(back.members[i].parameter[0] == doctest::Approx(0.1 * i));
    CHECK(std::filesystem::exists(dir / "member_0009.bin"));
}

TEST_CASE("column to time correspondence is shared across members") {
    const auto set = small_set(9);
    for (std::int64_t j = 0; j < set.time_axis.count; ++j) {
        const std::int64_t label = set.time_axis.label_origin + j;
        CHECK(set.time_axis.column_of(label) == j);
        CHECK(set.time_axis.time_of(label) == doctest::Approx(0.5 + 0.25 * j));
    }
}
