#include "observer/kernels/conv.hpp"

#include "observer/kernels/gemm.hpp"

#include <vector>

namespace observer::kernels {

namespace reference {

template <typename T>
void conv2d_forward(const ConvGeometry& g, std::span<const T> input, std::span<const T> weight,
                    std::span<const T> bias, std::span<T> output)
{
    const std::size_t oh = g.out_height();
    const std::size_t ow = g.out_width();
    const auto pad = static_cast<long>(g.padding);
    for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                T acc = bias.empty() ? T(0) : bias[oc];
                for (std::size_t ic = 0; ic < g.in_channels; ++ic) {
                    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
                        for (std::size_t kx = 0; kx < g.kernel; ++kx) {
                            const long iy = static_cast<long>(oy * g.stride + ky) - pad;
                            const long ix = static_cast<long>(ox * g.stride + kx) - pad;
                            if (iy < 0 || ix < 0 || iy >= static_cast<long>(g.in_height) ||
                                ix >= static_cast<long>(g.in_width)) {
                                continue;
                            }
                            const T w = weight[((oc * g.in_channels + ic) * g.kernel + ky) *
                                                   g.kernel +
                                               kx];
                            acc += w * input[(ic * g.in_height + static_cast<std::size_t>(iy)) *
                                                 g.in_width +
                                             static_cast<std::size_t>(ix)];
                        }
                    }
                }
                output[(oc * oh + oy) * ow + ox] = acc;
            }
        }
    }
}

template <typename T>
void conv2d_backward(const ConvGeometry& g, std::span<const T> input, std::span<const T> weight,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_weight, std::span<T> grad_bias)
{
    const std::size_t oh = g.out_height();
    const std::size_t ow = g.out_width();
    const auto pad = static_cast<long>(g.padding);
    for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const T go = grad_output[(oc * oh + oy) * ow + ox];
                if (!grad_bias.empty()) grad_bias[oc] += go;
                for (std::size_t ic = 0; ic < g.in_channels; ++ic) {
                    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
                        for (std::size_t kx = 0; kx < g.kernel; ++kx) {
                            const long iy = static_cast<long>(oy * g.stride + ky) - pad;
                            const long ix = static_cast<long>(ox * g.stride + kx) - pad;
                            if (iy < 0 || ix < 0 || iy >= static_cast<long>(g.in_height) ||
                                ix >= static_cast<long>(g.in_width)) {
                                continue;
                            }
                            const std::size_t wi =
                                ((oc * g.in_channels + ic) * g.kernel + ky) * g.kernel + kx;
                            const std::size_t ii =
                                (ic * g.in_height + static_cast<std::size_t>(iy)) * g.in_width +
                                static_cast<std::size_t>(ix);
                            grad_weight[wi] += go * input[ii];
                            if (!grad_input.empty()) grad_input[ii] += go * weight[wi];
                        }
                    }
                }
            }
        }
    }
}

template void conv2d_forward<float>(const ConvGeometry&, std::span<const float>,
                                    std::span<const float>, std::span<const float>,
                                    std::span<float>);
template void conv2d_forward<double>(const ConvGeometry&, std::span<const double>,
                                     std::span<const double>, std::span<const double>,
                                     std::span<double>);
template void conv2d_backward<float>(const ConvGeometry&, std::span<const float>,
                                     std::span<const float>, std::span<const float>,
                                     std::span<float>, std::span<float>, std::span<float>);
template void conv2d_backward<double>(const ConvGeometry&, std::span<const double>,
                                      std::span<const double>, std::span<const double>,
                                      std::span<double>, std::span<double>, std::span<double>);

}  // namespace reference

namespace parallel {

template <typename T>
void im2col(const ConvGeometry& g, std::span<const T> input, std::span<T> columns)
{
    const std::size_t oh = g.out_height();
    const std::size_t ow = g.out_width();
    const std::size_t pixels = oh * ow;
    const auto rows = static_cast<long>(g.patch_size());
    const auto pad = static_cast<long>(g.padding);
#pragma omp parallel for schedule(static) if (pixels * g.patch_size() > 65536)
    for (long row = 0; row < rows; ++row) {
        const auto r = static_cast<std::size_t>(row);
        const std::size_t kx = r % g.kernel;
        const std::size_t ky = (r / g.kernel) % g.kernel;
        const std::size_t ic = r / (g.kernel * g.kernel);
        const T* plane = input.data() + ic * g.in_height * g.in_width;
        T* out = columns.data() + r * pixels;
        for (std::size_t oy = 0; oy < oh; ++oy) {
            const long iy = static_cast<long>(oy * g.stride + ky) - pad;
            T* out_row = out + oy * ow;
            if (iy < 0 || iy >= static_cast<long>(g.in_height)) {
                for (std::size_t ox = 0; ox < ow; ++ox) out_row[ox] = T(0);
                continue;
            }
            const T* in_row = plane + static_cast<std::size_t>(iy) * g.in_width;
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const long ix = static_cast<long>(ox * g.stride + kx) - pad;
                out_row[ox] = (ix < 0 || ix >= static_cast<long>(g.in_width))
                                  ? T(0)
                                  : in_row[static_cast<std::size_t>(ix)];
            }
        }
    }
}

template <typename T>
void col2im(const ConvGeometry& g, std::span<const T> columns, std::span<T> image)
{
    const std::size_t oh = g.out_height();
    const std::size_t ow = g.out_width();
    const std::size_t pixels = oh * ow;
    const std::size_t taps = g.kernel * g.kernel;
    const auto channels = static_cast<long>(g.in_channels);
    const auto pad = static_cast<long>(g.padding);
#pragma omp parallel for schedule(static) if (pixels * g.patch_size() > 65536)
    for (long ch = 0; ch < channels; ++ch) {
        const auto ic = static_cast<std::size_t>(ch);
        T* plane = image.data() + ic * g.in_height * g.in_width;
        for (std::size_t tap = 0; tap < taps; ++tap) {
            const std::size_t ky = tap / g.kernel;
            const std::size_t kx = tap % g.kernel;
            const T* col = columns.data() + (ic * taps + tap) * pixels;
            for (std::size_t oy = 0; oy < oh; ++oy) {
                const long iy = static_cast<long>(oy * g.stride + ky) - pad;
                if (iy < 0 || iy >= static_cast<long>(g.in_height)) continue;
                T* in_row = plane + static_cast<std::size_t>(iy) * g.in_width;
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    const long ix = static_cast<long>(ox * g.stride + kx) - pad;
                    if (ix < 0 || ix >= static_cast<long>(g.in_width)) continue;
                    in_row[static_cast<std::size_t>(ix)] += col[oy * ow + ox];
                }
            }
        }
    }
}

template <typename T>
void conv2d_forward(const ConvGeometry& g, std::span<const T> input, std::span<const T> weight,
                    std::span<const T> bias, std::span<T> output, std::span<T> columns)
{
    const std::size_t pixels = g.out_height() * g.out_width();
    im2col<T>(g, input, columns);
    gemm<T>(Trans::No, Trans::No, {g.out_channels, pixels, g.patch_size()}, T(1), weight.data(),
            g.patch_size(), columns.data(), pixels, T(0), output.data(), pixels);
    if (!bias.empty()) {
        for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
            T* row = output.data() + oc * pixels;
            const T b = bias[oc];
            for (std::size_t p = 0; p < pixels; ++p) row[p] += b;
        }
    }
}

template <typename T>
void conv2d_backward(const ConvGeometry& g, std::span<const T> columns, std::span<const T> weight,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_weight, std::span<T> grad_bias)
{
    const std::size_t pixels = g.out_height() * g.out_width();
    gemm<T>(Trans::No, Trans::Yes, {g.out_channels, g.patch_size(), pixels}, T(1),
            grad_output.data(), pixels, columns.data(), pixels, T(1), grad_weight.data(),
            g.patch_size());
    if (!grad_bias.empty()) {
        for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
            const T* row = grad_output.data() + oc * pixels;
            T acc = 0;
            for (std::size_t p = 0; p < pixels; ++p) acc += row[p];
            grad_bias[oc] += acc;
        }
    }
    if (!grad_input.empty()) {
        std::vector<T> grad_columns(g.patch_size() * pixels);
        gemm<T>(Trans::Yes, Trans::No, {g.patch_size(), pixels, g.out_channels}, T(1),
                weight.data(), g.patch_size(), grad_output.data(), pixels, T(0),
                grad_columns.data(), pixels);
        col2im<T>(g, grad_columns, grad_input);
    }
}

#define OBSERVER_INSTANTIATE_CONV(T)                                                          \
    template void im2col<T>(const ConvGeometry&, std::span<const T>, std::span<T>);           \
    template void col2im<T>(const ConvGeometry&, std::span<const T>, std::span<T>);           \
    template void conv2d_forward<T>(const ConvGeometry&, std::span<const T>,                  \
                                    std::span<const T>, std::span<const T>, std::span<T>,     \
                                    std::span<T>);                                            \
    template void conv2d_backward<T>(const ConvGeometry&, std::span<const T>,                 \
                                     std::span<const T>, std::span<const T>, std::span<T>,    \
                                     std::span<T>, std::span<T>);

OBSERVER_INSTANTIATE_CONV(float)
OBSERVER_INSTANTIATE_CONV(double)

#undef OBSERVER_INSTANTIATE_CONV

}  // namespace parallel

}  // namespace observer::kernels
