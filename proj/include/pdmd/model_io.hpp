#pragma once

#include "pdmd/parametric.hpp"

#include <filesystem>

namespace pdmd {

inline constexpr int kModelFormatVersion = 1;

/// Model directory: model.json plus pod_modes.bin and, per operator,
/// operator_NNNN_modes.bin / operator_NNNN_training.bin in the matrix layout.
void save_model(const ParametricDmdModel& model, const std::filesystem::path& destination);
ParametricDmdModel load_model(const std::filesystem::path& source);

bool looks_like_model(const std::filesystem::path& path);
bool looks_like_archive(const std::filesystem::path& path);

}  // namespace pdmd
