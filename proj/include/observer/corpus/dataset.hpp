#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace observer::corpus {

/// Observation taxonomy, ordered by sophistication.
enum class Category { Factual, Descriptive, Comparative, Analogy, Inference };

std::string_view to_string(Category c);
/// Case-insensitive; std::nullopt for unknown labels.
std::optional<Category> parse_category(std::string_view label);

struct CaptionedImage {
    std::filesystem::path image_ref;
    std::string caption;
    std::optional<Category> category;
};

struct RowError {
    std::size_t row;  // 1-based data row (header excluded)
    std::string message;
};

struct IngestResult {
    std::vector<CaptionedImage> records;
    std::vector<RowError> errors;
    std::size_t truncated = 0;
};

/// Default manifest name inside a dataset directory.
inline constexpr std::string_view kManifestName = "manifest.csv";

/// Reads a `image_file,caption,category` manifest. Valid rows become records
/// in manifest order; every invalid row is reported in `errors`. Captions
/// longer than the caption cap are truncated with a logged warning. Throws
/// ValidationError when the manifest has no data rows or lacks the required
/// columns.
IngestResult ingest_dataset(const std::filesystem::path& root,
                            const std::filesystem::path& manifest);

/// ingest_dataset(dir, dir / manifest.csv)
IngestResult ingest_directory(const std::filesystem::path& dir);

}  // namespace observer::corpus
