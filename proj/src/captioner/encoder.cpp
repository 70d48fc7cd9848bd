#include "observer/captioner/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "observer/error.hpp"

namespace observer::captioner {

namespace {

template <typename T>
ConvLayer<T> make_conv(std::string name, std::size_t in_c, std::size_t side, std::size_t out_c,
                       std::size_t kernel, std::size_t stride)
{
    ConvLayer<T> layer;
    layer.geometry = {in_c, side, side, out_c, kernel, stride, kernel / 2};
    layer.weight = Param<T>(name + ".weight", layer.geometry.weight_count());
    layer.bias = Param<T>(name + ".bias", out_c);
    return layer;
}

template <typename T>
std::vector<T> run_conv(const ConvLayer<T>& layer, std::span<const T> input, ConvCache<T>* cache)
{
    const auto& g = layer.geometry;
    std::vector<T> output(g.output_size());
    std::vector<T> scratch;
    std::vector<T>& columns = cache ? cache->columns : scratch;
    columns.resize(g.patch_size() * g.out_height() * g.out_width());
    kernels::parallel::conv2d_forward<T>(g, input, layer.weight.value, layer.bias.value, output,
                                         columns);
    return output;
}

template <typename T>
void relu_inplace(std::vector<T>& v)
{
    for (auto& x : v) x = x > T(0) ? x : T(0);
}

// grad *= (activation > 0)
template <typename T>
void relu_mask(std::vector<T>& grad, const std::vector<T>& activation)
{
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!(activation[i] > T(0))) grad[i] = T(0);
    }
}

}  // namespace

template <typename T>
Planes<T> to_planes(const corpus::ImageTensor& image)
{
    Planes<T> planes;
    planes.channels = corpus::ImageTensor::kChannels;
    planes.height = static_cast<std::size_t>(image.height);
    planes.width = static_cast<std::size_t>(image.width);
    planes.values.resize(planes.channels * planes.height * planes.width);
    for (std::size_t c = 0; c < planes.channels; ++c) {
        for (std::size_t y = 0; y < planes.height; ++y) {
            for (std::size_t x = 0; x < planes.width; ++x) {
                planes.values[(c * planes.height + y) * planes.width + x] =
                    static_cast<T>(image.at(static_cast<int>(x), static_cast<int>(y),
                                            static_cast<int>(c))) -
                    T(0.5);
            }
        }
    }
    return planes;
}

template <typename T>
ResidualEncoder<T>::ResidualEncoder(std::size_t base_width, std::size_t input_side)
    : base_width_(base_width), input_side_(input_side)
{
    if (base_width == 0) throw ValidationError("encoder: base_width must be >= 1");
    if (input_side < kDownsample || input_side % kDownsample != 0) {
        throw ValidationError("encoder: input side must be a positive multiple of 32");
    }
    std::size_t side = input_side / 2;
    stem_ = make_conv<T>("encoder.stem", corpus::ImageTensor::kChannels, input_side, base_width,
                         3, 2);
    std::size_t in_c = base_width;
    for (std::size_t stage = 0; stage < kStages; ++stage) {
        const std::size_t out_c = base_width << stage;
        for (std::size_t b = 0; b < kBlocksPerStage; ++b) {
            const std::size_t stride = b == 0 ? 2 : 1;
            const std::string prefix =
                "encoder.stage" + std::to_string(stage) + ".block" + std::to_string(b);
            Block block;
            block.conv1 = make_conv<T>(prefix + ".conv1", in_c, side, out_c, 3, stride);
            const std::size_t out_side = block.conv1.geometry.out_height();
            block.conv2 = make_conv<T>(prefix + ".conv2", out_c, out_side, out_c, 3, 1);
            if (stride != 1 || in_c != out_c) {
                block.has_projection = true;
                block.projection =
                    make_conv<T>(prefix + ".projection", in_c, side, out_c, 1, stride);
            }
            blocks_.push_back(std::move(block));
            side = out_side;
            in_c = out_c;
        }
    }
}

template <typename T>
void ResidualEncoder<T>::initialize(std::mt19937_64& rng)
{
    const auto he = [&](ConvLayer<T>& layer, double gain) {
        layer.weight.init_normal(rng, gain * std::sqrt(2.0 / layer.geometry.patch_size()));
        std::fill(layer.bias.value.begin(), layer.bias.value.end(), T(0));
    };
    he(stem_, 1.0);
    for (auto& block : blocks_) {
        he(block.conv1, 1.0);
        he(block.conv2, 0.25);
        if (block.has_projection) he(block.projection, std::sqrt(0.5));
    }
}

template <typename T>
FeatureGridT<T> ResidualEncoder<T>::forward(const Planes<T>& input, EncoderCache<T>* cache) const
{
    if (input.channels != corpus::ImageTensor::kChannels || input.height != input_side_ ||
        input.width != input_side_) {
        throw ValidationError("encoder: expected a " + std::to_string(input_side_) + "x" +
                              std::to_string(input_side_) + "x3 input");
    }
    if (cache) cache->blocks.resize(blocks_.size());

    std::vector<T> x = run_conv(stem_, std::span<const T>(input.values), cache ? &cache->stem : nullptr);
    relu_inplace(x);
    if (cache) cache->stem.output = x;

    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        const Block& block = blocks_[i];
        BlockCache<T>* bc = cache ? &cache->blocks[i] : nullptr;
        std::vector<T> a1 = run_conv(block.conv1, std::span<const T>(x), bc ? &bc->conv1 : nullptr);
        relu_inplace(a1);
        std::vector<T> y = run_conv(block.conv2, std::span<const T>(a1), bc ? &bc->conv2 : nullptr);
        if (block.has_projection) {
            const auto shortcut =
                run_conv(block.projection, std::span<const T>(x), bc ? &bc->projection : nullptr);
            for (std::size_t j = 0; j < y.size(); ++j) y[j] += shortcut[j];
        } else {
            for (std::size_t j = 0; j < y.size(); ++j) y[j] += x[j];
        }
        relu_inplace(y);
        if (bc) {
            bc->conv1.output = std::move(a1);
            bc->output = y;
        }
        x = std::move(y);
    }

    const std::size_t dim = feature_dim();
    const std::size_t count = locations();
    FeatureGridT<T> grid(count, dim);
    for (std::size_t d = 0; d < dim; ++d) {
        for (std::size_t l = 0; l < count; ++l) grid.values[l * dim + d] = x[d * count + l];
    }
    return grid;
}

template <typename T>
void ResidualEncoder<T>::backward(const EncoderCache<T>& cache,
                                  const FeatureGridT<T>& grad_features)
{
    const std::size_t dim = feature_dim();
    const std::size_t count = locations();
    std::vector<T> grad(dim * count);
    for (std::size_t d = 0; d < dim; ++d) {
        for (std::size_t l = 0; l < count; ++l) grad[d * count + l] = grad_features.values[l * dim + d];
    }

    for (std::size_t i = blocks_.size(); i-- > 0;) {
        Block& block = blocks_[i];
        const BlockCache<T>& bc = cache.blocks[i];

        relu_mask(grad, bc.output);
        std::vector<T> grad_a1(block.conv2.geometry.input_size(), T(0));
        kernels::parallel::conv2d_backward<T>(block.conv2.geometry, bc.conv2.columns,
                                              block.conv2.weight.value, grad, grad_a1,
                                              block.conv2.weight.grad, block.conv2.bias.grad);
        relu_mask(grad_a1, bc.conv1.output);
        std::vector<T> grad_input(block.conv1.geometry.input_size(), T(0));
        kernels::parallel::conv2d_backward<T>(block.conv1.geometry, bc.conv1.columns,
                                              block.conv1.weight.value, grad_a1, grad_input,
                                              block.conv1.weight.grad, block.conv1.bias.grad);
        if (block.has_projection) {
            kernels::parallel::conv2d_backward<T>(
                block.projection.geometry, bc.projection.columns, block.projection.weight.value,
                grad, grad_input, block.projection.weight.grad, block.projection.bias.grad);
        } else {
            for (std::size_t j = 0; j < grad.size(); ++j) grad_input[j] += grad[j];
        }
        grad = std::move(grad_input);
    }

    relu_mask(grad, cache.stem.output);
    kernels::parallel::conv2d_backward<T>(stem_.geometry, cache.stem.columns, stem_.weight.value,
                                          grad, std::span<T>{}, stem_.weight.grad,
                                          stem_.bias.grad);
}

template <typename T>
void ResidualEncoder<T>::for_each_param(const std::function<void(Param<T>&)>& fn)
{
    fn(stem_.weight);
    fn(stem_.bias);
    for (auto& block : blocks_) {
        fn(block.conv1.weight);
        fn(block.conv1.bias);
        fn(block.conv2.weight);
        fn(block.conv2.bias);
        if (block.has_projection) {
            fn(block.projection.weight);
            fn(block.projection.bias);
        }
    }
}

template <typename T>
void ResidualEncoder<T>::for_each_param(const std::function<void(const Param<T>&)>& fn) const
{
    const_cast<ResidualEncoder*>(this)->for_each_param(
        [&](Param<T>& p) { fn(static_cast<const Param<T>&>(p)); });
}

template Planes<float> to_planes<float>(const corpus::ImageTensor&);
template Planes<double> to_planes<double>(const corpus::ImageTensor&);
template class ResidualEncoder<float>;
template class ResidualEncoder<double>;

}  // namespace observer::captioner
