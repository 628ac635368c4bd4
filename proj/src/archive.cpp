#include "pdmd/archive.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace pdmd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 4> kMagic{'P', 'D', 'M', 'D'};

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    std::array<char, sizeof(T)> buf{};
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
    }
    out.write(buf.data(), buf.size());
}

template <typename T>
T get_le(std::istream& in, const char* what) {
    std::array<unsigned char, sizeof(T)> buf{};
    in.read(reinterpret_cast<char*>(buf.data()), buf.size());
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
        throw Error(ErrorCode::dimension_mismatch, std::string("truncated matrix data while reading ") + what);
    }
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
    return value;
}

void put_double(std::ostream& out, double v) { put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v)); }

double get_double(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in, "payload")); }

}  // namespace

const char* to_string(Dtype dtype) { return dtype == Dtype::real64 ? "real64" : "complex128"; }

Dtype dtype_from_string(const std::string& name) {
    if (name == "real64") return Dtype::real64;
    if (name == "complex128") return Dtype::complex128;
    throw Error(ErrorCode::format, "unknown dtype '" + name + "'");
}

void write_matrix(std::ostream& out, const Matrix& values, Dtype dtype) {
    if (dtype == Dtype::real64 && (values.imag().array() != 0.0).any()) {
        throw Error(ErrorCode::invalid_argument, "real64 encoding requested for data with imaginary parts");
    }
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kMatrixFormatVersion);
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(dtype));
    const char reserved[3] = {0, 0, 0};
    out.write(reserved, 3);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(values.rows()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(values.cols()));
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            put_double(out, values(i, j).real());
            if (dtype == Dtype::complex128) put_double(out, values(i, j).imag());
        }
    }
    if (!out) throw Error(ErrorCode::io, "failed writing matrix data");
}

Matrix read_matrix(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != 4 || magic != kMagic) throw Error(ErrorCode::format, "bad magic bytes (expected PDMD)");
    const auto version = get_le<std::uint32_t>(in, "version");
    if (version != kMatrixFormatVersion) {
        throw Error(ErrorCode::unsupported_version, "unsupported matrix format version " + std::to_string(version));
    }
    const auto dtype_byte = get_le<std::uint8_t>(in, "dtype");
    if (dtype_byte > 1) throw Error(ErrorCode::format, "unknown dtype code " + std::to_string(dtype_byte));
    std::array<char, 3> reserved{};
    in.read(reserved.data(), 3);
    if (in.gcount() != 3) throw Error(ErrorCode::dimension_mismatch, "truncated matrix header");
    const auto rows = get_le<std::uint64_t>(in, "row count");
    const auto cols = get_le<std::uint64_t>(in, "column count");
    constexpr std::uint64_t kLimit = std::uint64_t{1} << 40;
    if (rows > kLimit || cols > kLimit || (rows && cols > kLimit / rows)) {
        throw Error(ErrorCode::format, "implausible matrix dimensions");
    }
    const bool is_complex = dtype_byte == static_cast<std::uint8_t>(Dtype::complex128);
    Matrix values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            const double re = get_double(in);
            const double im = is_complex ? get_double(in) : 0.0;
            values(i, j) = {re, im};
        }
    }
    return values;
}

void write_matrix_file(const fs::path& file, const Matrix& values, Dtype dtype) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open " + file.string() + " for writing");
    write_matrix(out, values, dtype);
}

Matrix read_matrix_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + file.string());
    try {
        Matrix values = read_matrix(in);
        if (in.peek() != std::char_traits<char>::eof()) {
            throw Error(ErrorCode::dimension_mismatch, "trailing bytes after matrix payload");
        }
        return values;
    } catch (const Error& e) {
        throw Error(e.code(), file.filename().string() + ": " + e.what());
    }
}

void write_archive(const ParametricSnapshotSet& set, const fs::path& destination, Dtype dtype) {
    require_valid(set);
    if (dtype == Dtype::real64 && !set.is_real()) {
        throw Error(ErrorCode::invalid_argument, "real64 encoding requested for complex-valued snapshots");
    }

    std::error_code ec;
    fs::create_directories(destination, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create " + destination.string() + ": " + ec.message());

    json manifest;
    manifest["field_name"] = set.field_name;
    manifest["t0"] = set.time_axis.t0;
    manifest["dt"] = set.time_axis.dt;
    manifest["count"] = set.time_axis.count;
    manifest["label_origin"] = set.time_axis.label_origin;
    manifest["parameter_dim"] = set.parameter_dim();
    manifest["dtype"] = to_string(dtype);
    json members = json::array();
    for (std::size_t i = 0; i < set.members.size(); ++i) {
        std::ostringstream name;
        name << "member_" << std::setw(4) << std::setfill('0') << i << ".bin";
        write_matrix_file(destination / name.str(), set.members[i].values, dtype);
        members.push_back({{"file", name.str()}, {"parameter", set.members[i].parameter.coords}});
    }
    manifest["members"] = std::move(members);

    std::ofstream out(destination / "manifest.json", std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write manifest in " + destination.string());
    out << manifest.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::io, "failed writing manifest");
}

ParametricSnapshotSet read_archive(const fs::path& source) {
    const fs::path manifest_path = source / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) throw Error(ErrorCode::io, "no manifest.json in " + source.string());

    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, std::string("manifest.json is not valid JSON: ") + e.what());
    }

    ParametricSnapshotSet set;
    std::size_t parameter_dim = 0;
    try {
        set.field_name = manifest.value("field_name", std::string{});
        set.time_axis.t0 = manifest.at("t0").get<double>();
        set.time_axis.dt = manifest.at("dt").get<double>();
        set.time_axis.count = manifest.at("count").get<std::int64_t>();
        set.time_axis.label_origin = manifest.value("label_origin", std::int64_t{1});
        parameter_dim = manifest.at("parameter_dim").get<std::size_t>();
        for (const auto& entry : manifest.at("members")) {
            SnapshotMatrix member;
            member.parameter = ParameterPoint(entry.at("parameter").get<std::vector<double>>());
            if (member.parameter.dim() != parameter_dim) {
                throw Error(ErrorCode::dimension_mismatch,
                            "member parameter has dimension " + std::to_string(member.parameter.dim()) +
                                ", manifest declares " + std::to_string(parameter_dim));
            }
            member.values = read_matrix_file(source / entry.at("file").get<std::string>());
            if (member.values.cols() != set.time_axis.count) {
                throw Error(ErrorCode::dimension_mismatch,
                            entry.at("file").get<std::string>() + " holds " + std::to_string(member.values.cols()) +
                                " instants, manifest declares " + std::to_string(set.time_axis.count));
            }
            set.members.push_back(std::move(member));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::format, std::string("malformed manifest: ") + e.what());
    }

    for (const auto& v : validate_set(set)) {
        const ErrorCode code = v.invariant == "non-finite value"   ? ErrorCode::non_finite
                               : v.invariant == "shared m"         ? ErrorCode::dimension_mismatch
                               : v.invariant == "shared time axis" ? ErrorCode::dimension_mismatch
                                                                   : ErrorCode::format;
        std::string where = v.member ? "member " + std::to_string(*v.member) + ": " : "";
        throw Error(code, "archive " + source.string() + ": " + where + v.invariant + " (" + v.detail + ")");
    }
    return set;
}

}  // namespace pdmd
