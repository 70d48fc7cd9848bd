#include "observer/corpus/dataset.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include <spdlog/spdlog.h>

#include "observer/corpus/image.hpp"
#include "observer/corpus/text.hpp"
#include "observer/corpus/vocabulary.hpp"
#include "observer/csv.hpp"
#include "observer/error.hpp"

namespace observer::corpus {

namespace {

constexpr std::array<std::string_view, 5> kCategoryNames{"Factual", "Descriptive", "Comparative",
                                                         "Analogy", "Inference"};

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::string_view to_string(Category c)
{
    return kCategoryNames[static_cast<std::size_t>(c)];
}

std::optional<Category> parse_category(std::string_view label)
{
    const auto wanted = lower(trim(label));
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (lower(kCategoryNames[i]) == wanted) return static_cast<Category>(i);
    }
    return std::nullopt;
}

IngestResult ingest_dataset(const std::filesystem::path& root,
                            const std::filesystem::path& manifest)
{
    std::ifstream in(manifest, std::ios::binary);
    if (!in) throw ValidationError("cannot open manifest: " + manifest.string());
    csv::Reader reader(in);

    const auto header = reader.next_row();
    if (!header) throw ValidationError("manifest is empty: " + manifest.string());
    std::optional<std::size_t> image_col;
    std::optional<std::size_t> caption_col;
    std::optional<std::size_t> category_col;
    for (std::size_t i = 0; i < header->size(); ++i) {
        const auto name = lower(trim((*header)[i]));
        if (name == "image_file") image_col = i;
        if (name == "caption") caption_col = i;
        if (name == "category") category_col = i;
    }
    if (!image_col || !caption_col) {
        throw ValidationError("manifest header must contain image_file and caption columns");
    }

    IngestResult result;
    std::size_t row = 0;
    while (auto fields = reader.next_row()) {
        if (fields->size() == 1 && trim((*fields)[0]).empty()) continue;  // blank line
        ++row;
        const auto field = [&](std::size_t col) {
            return col < fields->size() ? trim((*fields)[col]) : std::string{};
        };
        const std::string image_file = field(*image_col);
        std::string caption = field(*caption_col);
        if (image_file.empty()) {
            result.errors.push_back({row, "missing image_file"});
            continue;
        }
        auto tokens = normalize_tokens(caption);
        if (tokens.empty()) {
            result.errors.push_back({row, "empty caption"});
            continue;
        }
        std::optional<Category> category;
        if (category_col) {
            const auto label = field(*category_col);
            if (!label.empty()) {
                category = parse_category(label);
                if (!category) {
                    result.errors.push_back({row, "unknown category '" + label + "'"});
                    continue;
                }
            }
        }
        const auto path = root / image_file;
        if (!std::filesystem::is_regular_file(path)) {
            result.errors.push_back({row, "image file not found: " + path.string()});
            continue;
        }
        try {
            decode_image(path);
        } catch (const Error& e) {
            result.errors.push_back({row, e.what()});
            continue;
        }
        constexpr std::size_t max_words = kMaxCaptionTokens - 2;
        if (tokens.size() > max_words) {
            spdlog::warn("manifest row {}: caption has {} tokens, truncated to {}", row,
                         tokens.size(), max_words);
            tokens.resize(max_words);
            caption = join(tokens);
            ++result.truncated;
        }
        result.records.push_back({path, std::move(caption), category});
    }
    if (row == 0) throw ValidationError("manifest has no data rows: " + manifest.string());
    for (const auto& e : result.errors) {
        spdlog::warn("manifest row {}: {}", e.row, e.message);
    }
    return result;
}

IngestResult ingest_directory(const std::filesystem::path& dir)
{
    return ingest_dataset(dir, dir / kManifestName);
}

}  // namespace observer::corpus
