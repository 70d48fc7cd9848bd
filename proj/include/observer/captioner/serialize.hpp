#pragma once

#include <filesystem>
#include <string_view>

#include "observer/captioner/model.hpp"

namespace observer::captioner {

/// Embedded in every model file; load_model rejects anything else.
inline constexpr std::string_view kModelFormatVersion = "observer-captioner/1";

/// Single self-describing binary file: magic, format version, dims block,
/// vocabulary block, then every parameter array by name.
void save_model(const CaptionerModel& model, const std::filesystem::path& path);

/// Throws FormatError on truncation, corruption, a version mismatch, or
/// arrays that disagree with the embedded dims.
CaptionerModel load_model(const std::filesystem::path& path);

}  // namespace observer::captioner
