#pragma once

#include "pdmd/snapshot.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>

namespace pdmd {

// Binary matrix layout (little-endian):
//   "PDMD" | u32 version | u8 dtype | 3 zero bytes | u64 rows | u64 cols | payload
// Payload is column-major; complex entries are interleaved (re, im).
inline constexpr std::uint32_t kMatrixFormatVersion = 1;
inline constexpr std::size_t kMatrixHeaderBytes = 4 + 4 + 1 + 3 + 8 + 8;

enum class Dtype : std::uint8_t { real64 = 0, complex128 = 1 };

const char* to_string(Dtype dtype);
Dtype dtype_from_string(const std::string& name);

void write_matrix(std::ostream& out, const Matrix& values, Dtype dtype = Dtype::complex128);
Matrix read_matrix(std::istream& in);

void write_matrix_file(const std::filesystem::path& file, const Matrix& values,
                       Dtype dtype = Dtype::complex128);
Matrix read_matrix_file(const std::filesystem::path& file);

/// Directory archive: manifest.json plus one matrix file per member.
/// The set is validated before anything touches the filesystem.
void write_archive(const ParametricSnapshotSet& set, const std::filesystem::path& destination,
                   Dtype dtype = Dtype::complex128);

ParametricSnapshotSet read_archive(const std::filesystem::path& source);

}  // namespace pdmd
