#include "observer/corpus/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>
#include <fstream>

#include "observer/csv.hpp"
#include "observer/error.hpp"

namespace observer::corpus {

namespace {

constexpr std::array<std::string_view, 3> kKindNames{"circle", "square", "triangle"};
constexpr std::array<std::string_view, 4> kColorNames{"red", "green", "blue", "yellow"};
constexpr std::array<std::string_view, 2> kSizeNames{"small", "large"};
constexpr std::array<std::string_view, 2> kPlaceNames{"top", "bottom"};

constexpr std::array<std::array<int, 3>, 4> kPalette{{
    {220, 40, 40},
    {40, 170, 60},
    {40, 70, 220},
    {230, 210, 40},
}};

bool inside(ShapeKind kind, double dx, double dy, double r)
{
    switch (kind) {
    case ShapeKind::Circle:
        return dx * dx + dy * dy <= r * r;
    case ShapeKind::Square:
        return std::abs(dx) <= 0.85 * r && std::abs(dy) <= 0.85 * r;
    case ShapeKind::Triangle: {
        // Apex at (0, -r), base from (-r, 0.8r) to (r, 0.8r).
        if (dy < -r || dy > 0.8 * r) return false;
        const double half = r * (dy + r) / (1.8 * r);
        return std::abs(dx) <= half;
    }
    }
    return false;
}

std::uint8_t clamp_byte(int v)
{
    return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

}  // namespace

std::string SceneSpec::caption() const
{
    return fmt::format("a {} {} {} at the {}", kSizeNames[static_cast<std::size_t>(size)],
                       kColorNames[static_cast<std::size_t>(color)],
                       kKindNames[static_cast<std::size_t>(kind)],
                       kPlaceNames[static_cast<std::size_t>(place)]);
}

RgbImage render_scene(const SceneSpec& scene, std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> base_dist(195, 235);
    std::uniform_int_distribution<int> noise(-8, 8);
    std::uniform_int_distribution<int> jitter(-15, 15);
    std::uniform_int_distribution<int> cx_dist(32 + 70, 32 + 186);
    std::uniform_int_distribution<int> cy_jitter(-8, 8);
    std::uniform_int_distribution<int> r_jitter(-3, 3);

    RgbImage img;
    img.width = kSynthWidth;
    img.height = kSynthHeight;
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);

    const int base = base_dist(rng);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const int v = base + noise(rng);
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = clamp_byte(v);
        }
    }

    const auto& rgb = kPalette[static_cast<std::size_t>(scene.color)];
    const std::array<int, 3> color{rgb[0] + jitter(rng), rgb[1] + jitter(rng),
                                   rgb[2] + jitter(rng)};
    const double radius = (scene.size == ShapeSize::Small ? 22 : 46) + r_jitter(rng);
    const double cx = cx_dist(rng);
    const double cy = (scene.place == ShapePlace::Top ? 66 : 190) + cy_jitter(rng);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (!inside(scene.kind, x - cx, y - cy, radius)) continue;
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = clamp_byte(color[c] + noise(rng) / 2);
        }
    }
    return img;
}

std::vector<CaptionedImage> generate_synthetic_corpus(const std::filesystem::path& out,
                                                      std::size_t count, std::uint64_t seed)
{
    if (count == 0) throw ValidationError("synthetic corpus: count must be >= 1");
    std::filesystem::create_directories(out / "images");
    std::mt19937_64 rng(seed);

    std::vector<SceneSpec> combos;
    for (std::size_t k = 0; k < kKindNames.size(); ++k)
        for (std::size_t c = 0; c < kColorNames.size(); ++c)
            for (std::size_t s = 0; s < kSizeNames.size(); ++s)
                for (std::size_t p = 0; p < kPlaceNames.size(); ++p)
                    combos.push_back({static_cast<ShapeKind>(k), static_cast<ShapeColor>(c),
                                      static_cast<ShapeSize>(s), static_cast<ShapePlace>(p)});
    std::shuffle(combos.begin(), combos.end(), rng);

    std::ofstream manifest(out / kManifestName, std::ios::binary);
    if (!manifest) throw Error("cannot write manifest in " + out.string());
    csv::write_row(manifest, {"image_file", "caption", "category"});

    std::vector<CaptionedImage> records;
    for (std::size_t i = 0; i < count; ++i) {
        const SceneSpec& scene = combos[i % combos.size()];
        const std::string file = fmt::format("images/scene_{:04}.png", i);
        write_png(render_scene(scene, rng), out / file);
        csv::write_row(manifest, {file, scene.caption(), "Descriptive"});
        records.push_back({out / file, scene.caption(), Category::Descriptive});
    }
    return records;
}

}  // namespace observer::corpus
