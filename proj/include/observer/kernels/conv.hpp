#pragma once

#include <cstddef>
#include <span>

namespace observer::kernels {

/// Geometry of a square-kernel 2-D convolution over a CHW tensor.
struct ConvGeometry {
    std::size_t in_channels;
    std::size_t in_height;
    std::size_t in_width;
    std::size_t out_channels;
    std::size_t kernel;
    std::size_t stride;
    std::size_t padding;

    std::size_t out_height() const { return (in_height + 2 * padding - kernel) / stride + 1; }
    std::size_t out_width() const { return (in_width + 2 * padding - kernel) / stride + 1; }
    std::size_t patch_size() const { return in_channels * kernel * kernel; }
    std::size_t weight_count() const { return out_channels * patch_size(); }
    std::size_t input_size() const { return in_channels * in_height * in_width; }
    std::size_t output_size() const { return out_channels * out_height() * out_width(); }
};

// Weights are laid out [out_channels][in_channels][kernel][kernel]; the bias
// has out_channels entries. All gradient outputs accumulate (+=).

namespace reference {

template <typename T>
void conv2d_forward(const ConvGeometry& g, std::span<const T> input, std::span<const T> weight,
                    std::span<const T> bias, std::span<T> output);

template <typename T>
void conv2d_backward(const ConvGeometry& g, std::span<const T> input, std::span<const T> weight,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_weight, std::span<T> grad_bias);

}  // namespace reference

namespace parallel {

/// Unfolds input patches into a (patch_size x out_h*out_w) matrix.
template <typename T>
void im2col(const ConvGeometry& g, std::span<const T> input, std::span<T> columns);

/// Adjoint of im2col; accumulates into image.
template <typename T>
void col2im(const ConvGeometry& g, std::span<const T> columns, std::span<T> image);

/// `columns` receives the im2col buffer and must hold patch_size * out pixels;
/// it is reused by conv2d_backward.
template <typename T>
void conv2d_forward(const ConvGeometry& g, std::span<const T> input, std::span<const T> weight,
                    std::span<const T> bias, std::span<T> output, std::span<T> columns);

/// `columns` must be the buffer filled by the matching forward call.
/// grad_input may be empty when the input gradient is not needed.
template <typename T>
void conv2d_backward(const ConvGeometry& g, std::span<const T> columns, std::span<const T> weight,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_weight, std::span<T> grad_bias);

}  // namespace parallel

}  // namespace observer::kernels
