#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace observer::corpus {

/// 8-bit interleaved RGB raster, row-major.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3

    std::uint8_t& at(int x, int y, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    std::uint8_t at(int x, int y, int c) const { return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

/// Preprocessed network input: HWC floats in [0,1].
struct ImageTensor {
    static constexpr int kSide = 256;
    static constexpr int kChannels = 3;

    int height = kSide;
    int width = kSide;
    std::vector<float> data;  // height * width * 3

    float& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c]; }
    float at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c]; }

    bool operator==(const ImageTensor&) const = default;
};

/// PNG or JPEG. Throws ImageDecodeError.
RgbImage decode_image(const std::filesystem::path& file);
RgbImage decode_image(std::span<const std::uint8_t> encoded);

std::vector<std::uint8_t> encode_png(const RgbImage& image);
void write_png(const RgbImage& image, const std::filesystem::path& file);

/// Side of the centered crop window taken before resizing.
inline constexpr int kCropSide = 1024;

struct CropWindow {
    int x0;
    int y0;
    int side;
};

/// 1024x1024 centered window, or the largest centered square when either
/// dimension is smaller.
CropWindow center_crop_window(int width, int height);

/// Center crop, bilinear resize to 256x256 (half-pixel centers), scale to [0,1].
ImageTensor preprocess_image(const RgbImage& raw);

/// Explicit augmentation parameters; the sampling step is separate so the
/// transform itself can be tested in isolation.
struct Augmentation {
    bool flip = false;
    double rotation_degrees = 0.0;
};

struct AugmentOptions {
    double flip_probability = 0.5;
    double max_rotation_degrees = 5.0;
};

Augmentation sample_augmentation(std::mt19937_64& rng, const AugmentOptions& options = {});

/// Horizontal flip, then rotation about the image center; pixels that fall
/// outside the source frame are black.
ImageTensor apply_augmentation(const ImageTensor& tensor, const Augmentation& aug);

inline ImageTensor augment(const ImageTensor& tensor, std::mt19937_64& rng,
                           const AugmentOptions& options = {})
{
    return apply_augmentation(tensor, sample_augmentation(rng, options));
}

}  // namespace observer::corpus
