#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "observer/corpus/dataset.hpp"
#include "observer/corpus/image.hpp"

namespace observer::corpus {

enum class ShapeKind { Circle, Square, Triangle };
enum class ShapeColor { Red, Green, Blue, Yellow };
enum class ShapeSize { Small, Large };
enum class ShapePlace { Top, Bottom };

/// One synthetic scene: a single colored shape on a noisy light background.
/// Vertical placement and size survive horizontal flips, so the caption
/// stays valid under augmentation.
struct SceneSpec {
    ShapeKind kind = ShapeKind::Circle;
    ShapeColor color = ShapeColor::Red;
    ShapeSize size = ShapeSize::Small;
    ShapePlace place = ShapePlace::Top;

    /// "a <size> <color> <shape> at the <place>"
    std::string caption() const;
};

inline constexpr int kSynthWidth = 320;
inline constexpr int kSynthHeight = 256;

RgbImage render_scene(const SceneSpec& scene, std::mt19937_64& rng);

/// Writes `count` PNG scenes under out/images and out/manifest.csv (all rows
/// categorized Descriptive). Deterministic in `seed`.
std::vector<CaptionedImage> generate_synthetic_corpus(const std::filesystem::path& out,
                                                      std::size_t count, std::uint64_t seed);

}  // namespace observer::corpus
