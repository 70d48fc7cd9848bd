#include "observer/corpus/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <opencv2/imgcodecs.hpp>

#include "observer/error.hpp"

namespace observer::corpus {

namespace {

RgbImage from_bgr(const cv::Mat& bgr)
{
    RgbImage image;
    image.width = bgr.cols;
    image.height = bgr.rows;
    image.pixels.resize(static_cast<std::size_t>(bgr.cols) * bgr.rows * 3);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<std::uint8_t>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            image.at(x, y, 0) = row[x * 3 + 2];
            image.at(x, y, 1) = row[x * 3 + 1];
            image.at(x, y, 2) = row[x * 3 + 0];
        }
    }
    return image;
}

cv::Mat to_bgr(const RgbImage& image)
{
    cv::Mat bgr(image.height, image.width, CV_8UC3);
    for (int y = 0; y < image.height; ++y) {
        auto* row = bgr.ptr<std::uint8_t>(y);
        for (int x = 0; x < image.width; ++x) {
            row[x * 3 + 0] = image.at(x, y, 2);
            row[x * 3 + 1] = image.at(x, y, 1);
            row[x * 3 + 2] = image.at(x, y, 0);
        }
    }
    return bgr;
}

RgbImage checked(const cv::Mat& decoded, const std::string& what)
{
    if (decoded.empty() || decoded.cols < 1 || decoded.rows < 1) {
        throw ImageDecodeError("cannot decode image: " + what);
    }
    return from_bgr(decoded);
}

// Bilinear sample with half-pixel centers; coordinates are clamped to the
// source edge, matching the usual INTER_LINEAR convention.
float sample_clamped(const RgbImage& img, const CropWindow& win, double sx, double sy, int c)
{
    sx = std::clamp(sx, 0.0, static_cast<double>(win.side - 1));
    sy = std::clamp(sy, 0.0, static_cast<double>(win.side - 1));
    const int x0 = static_cast<int>(std::floor(sx));
    const int y0 = static_cast<int>(std::floor(sy));
    const int x1 = std::min(x0 + 1, win.side - 1);
    const int y1 = std::min(y0 + 1, win.side - 1);
    const double fx = sx - x0;
    const double fy = sy - y0;
    const auto px = [&](int x, int y) {
        return static_cast<double>(img.at(win.x0 + x, win.y0 + y, c));
    };
    const double top = px(x0, y0) * (1 - fx) + px(x1, y0) * fx;
    const double bottom = px(x0, y1) * (1 - fx) + px(x1, y1) * fx;
    return static_cast<float>((top * (1 - fy) + bottom * fy) / 255.0);
}

}  // namespace

RgbImage decode_image(const std::filesystem::path& file)
{
    if (!std::filesystem::is_regular_file(file)) {
        throw ImageDecodeError("image file not found: " + file.string());
    }
    return checked(cv::imread(file.string(), cv::IMREAD_COLOR), file.string());
}

RgbImage decode_image(std::span<const std::uint8_t> encoded)
{
    if (encoded.empty()) throw ImageDecodeError("cannot decode image: empty buffer");
    const cv::Mat buffer(1, static_cast<int>(encoded.size()), CV_8UC1,
                         const_cast<std::uint8_t*>(encoded.data()));
    return checked(cv::imdecode(buffer, cv::IMREAD_COLOR), "in-memory buffer");
}

std::vector<std::uint8_t> encode_png(const RgbImage& image)
{
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", to_bgr(image), out)) throw Error("png encoding failed");
    return out;
}

void write_png(const RgbImage& image, const std::filesystem::path& file)
{
    if (!cv::imwrite(file.string(), to_bgr(image))) {
        throw Error("cannot write png: " + file.string());
    }
}

CropWindow center_crop_window(int width, int height)
{
    if (width < 1 || height < 1) throw ValidationError("image dimensions must be >= 1");
    const int side = std::min({kCropSide, width, height});
    return {(width - side) / 2, (height - side) / 2, side};
}

ImageTensor preprocess_image(const RgbImage& raw)
{
    if (raw.width < 1 || raw.height < 1 ||
        raw.pixels.size() != static_cast<std::size_t>(raw.width) * raw.height * 3) {
        throw ImageDecodeError("preprocess: malformed raster");
    }
    const CropWindow win = center_crop_window(raw.width, raw.height);
    ImageTensor out;
    out.data.resize(static_cast<std::size_t>(ImageTensor::kSide) * ImageTensor::kSide * 3);
    const double scale = static_cast<double>(win.side) / ImageTensor::kSide;
    for (int y = 0; y < ImageTensor::kSide; ++y) {
        const double sy = (y + 0.5) * scale - 0.5;
        for (int x = 0; x < ImageTensor::kSide; ++x) {
            const double sx = (x + 0.5) * scale - 0.5;
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = sample_clamped(raw, win, sx, sy, c);
        }
    }
    return out;
}

Augmentation sample_augmentation(std::mt19937_64& rng, const AugmentOptions& options)
{
    std::bernoulli_distribution flip(options.flip_probability);
    std::uniform_real_distribution<double> angle(-options.max_rotation_degrees,
                                                 options.max_rotation_degrees);
    Augmentation aug;
    aug.flip = flip(rng);
    aug.rotation_degrees = angle(rng);
    return aug;
}

ImageTensor apply_augmentation(const ImageTensor& tensor, const Augmentation& aug)
{
    ImageTensor flipped = tensor;
    if (aug.flip) {
        for (int y = 0; y < tensor.height; ++y) {
            for (int x = 0; x < tensor.width; ++x) {
                for (int c = 0; c < 3; ++c) {
                    flipped.at(x, y, c) = tensor.at(tensor.width - 1 - x, y, c);
                }
            }
        }
    }
    if (aug.rotation_degrees == 0.0) return flipped;

    ImageTensor out = flipped;
    const double theta = aug.rotation_degrees * std::numbers::pi / 180.0;
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);
    const double cx = (tensor.width - 1) / 2.0;
    const double cy = (tensor.height - 1) / 2.0;
    const auto src = [&](int x, int y, int c) -> double {
        if (x < 0 || y < 0 || x >= tensor.width || y >= tensor.height) return 0.0;
        return flipped.at(x, y, c);
    };
    for (int y = 0; y < tensor.height; ++y) {
        for (int x = 0; x < tensor.width; ++x) {
            // Inverse-map the destination pixel into the source frame.
            const double dx = x - cx;
            const double dy = y - cy;
            const double sx = cos_t * dx + sin_t * dy + cx;
            const double sy = -sin_t * dx + cos_t * dy + cy;
            const int x0 = static_cast<int>(std::floor(sx));
            const int y0 = static_cast<int>(std::floor(sy));
            const double fx = sx - x0;
            const double fy = sy - y0;
            for (int c = 0; c < 3; ++c) {
                const double top = src(x0, y0, c) * (1 - fx) + src(x0 + 1, y0, c) * fx;
                const double bottom = src(x0, y0 + 1, c) * (1 - fx) + src(x0 + 1, y0 + 1, c) * fx;
                out.at(x, y, c) =
                    static_cast<float>(std::clamp(top * (1 - fy) + bottom * fy, 0.0, 1.0));
            }
        }
    }
    return out;
}

}  // namespace observer::corpus
