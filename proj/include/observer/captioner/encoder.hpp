#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "observer/captioner/feature_grid.hpp"
#include "observer/captioner/param.hpp"
#include "observer/corpus/image.hpp"
#include "observer/kernels/conv.hpp"

namespace observer::captioner {

/// CHW image planes fed to the encoder.
template <typename T>
struct Planes {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<T> values;
};

/// HWC [0,1] tensor -> CHW planes centered on zero.
template <typename T>
Planes<T> to_planes(const corpus::ImageTensor& image);

template <typename T>
struct ConvLayer {
    kernels::ConvGeometry geometry;
    Param<T> weight;
    Param<T> bias;
};

/// Activations kept from a forward pass for the matching backward pass.
template <typename T>
struct ConvCache {
    std::vector<T> columns;
    std::vector<T> output;  // post-activation when the layer is followed by ReLU
};

template <typename T>
struct BlockCache {
    ConvCache<T> conv1;
    ConvCache<T> conv2;
    ConvCache<T> projection;
    std::vector<T> output;
};

template <typename T>
struct EncoderCache {
    ConvCache<T> stem;
    std::vector<BlockCache<T>> blocks;
};

/// Residual convolutional encoder trained from scratch: a stride-2 stem and
/// four stages of two basic blocks, each stage halving the resolution and
/// doubling the width. A 256x256 input yields an 8x8 grid of
/// 8 * base_width features.
template <typename T>
class ResidualEncoder {
public:
    static constexpr std::size_t kStages = 4;
    static constexpr std::size_t kBlocksPerStage = 2;
    /// Total spatial reduction (stem plus one stride-2 block per stage).
    static constexpr std::size_t kDownsample = 32;

    ResidualEncoder() = default;
    ResidualEncoder(std::size_t base_width, std::size_t input_side);

    void initialize(std::mt19937_64& rng);

    std::size_t base_width() const { return base_width_; }
    std::size_t input_side() const { return input_side_; }
    std::size_t feature_dim() const { return base_width_ << (kStages - 1); }
    std::size_t grid_side() const { return input_side_ / kDownsample; }
    std::size_t locations() const { return grid_side() * grid_side(); }

    /// Inference when `cache` is null; otherwise fills it for backward().
    FeatureGridT<T> forward(const Planes<T>& input, EncoderCache<T>* cache = nullptr) const;

    /// Accumulates parameter gradients from dLoss/dFeatures.
    void backward(const EncoderCache<T>& cache, const FeatureGridT<T>& grad_features);

    void for_each_param(const std::function<void(Param<T>&)>& fn);
    void for_each_param(const std::function<void(const Param<T>&)>& fn) const;

private:
    struct Block {
        ConvLayer<T> conv1;
        ConvLayer<T> conv2;
        bool has_projection = false;
        ConvLayer<T> projection;
    };

    std::size_t base_width_ = 0;
    std::size_t input_side_ = 0;
    ConvLayer<T> stem_;
    std::vector<Block> blocks_;
};

}  // namespace observer::captioner
