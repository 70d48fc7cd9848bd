#include <random>
#include <vector>

#include <doctest.h>

#include "observer/kernels/conv.hpp"
#include "observer/kernels/gemm.hpp"

using namespace observer::kernels;

namespace {

template <typename T>
std::vector<T> random_vector(std::size_t n, std::mt19937& rng)
{
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(dist(rng));
    return v;
}

template <typename T>
double max_abs_diff(const std::vector<T>& a, const std::vector<T>& b)
{
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    }
    return worst;
}

}  // namespace

TEST_CASE("gemm: reference matches a hand-computed product")
{
    const std::vector<double> a = {1, 2, 3, 4, 5, 6};    // 2x3
    const std::vector<double> b = {7, 8, 9, 10, 11, 12};  // 3x2
    std::vector<double> c(4, 1.0);
    reference::gemm(Trans::No, Trans::No, {2, 2, 3}, 1.0, a.data(), 3, b.data(), 2, 0.0, c.data(), 2);
    CHECK(c == std::vector<double>{58, 64, 139, 154});
}

TEST_CASE("gemm: parallel matches reference for every transpose combination")
{
    std::mt19937 rng(3);
    for (auto ta : {Trans::No, Trans::Yes}) {
        for (auto tb : {Trans::No, Trans::Yes}) {
            for (const GemmShape s : {GemmShape{1, 1, 1}, GemmShape{7, 5, 3}, GemmShape{33, 17, 65},
                                      GemmShape{64, 100, 9}}) {
                const std::size_t lda = ta == Trans::No ? s.k : s.m;
                const std::size_t ldb = tb == Trans::No ? s.n : s.k;
                const auto a = random_vector<double>(s.m * s.k, rng);
                const auto b = random_vector<double>(s.k * s.n, rng);
                auto c_ref = random_vector<double>(s.m * s.n, rng);
                auto c_par = c_ref;
                reference::gemm(ta, tb, s, 0.7, a.data(), lda, b.data(), ldb, 0.3, c_ref.data(), s.n);
                parallel::gemm(ta, tb, s, 0.7, a.data(), lda, b.data(), ldb, 0.3, c_par.data(), s.n);
                CHECK(max_abs_diff(c_ref, c_par) < 1e-12);
            }
        }
    }
}

TEST_CASE("gemm: float parallel matches reference")
{
    std::mt19937 rng(5);
    const GemmShape s{40, 24, 72};
    const auto a = random_vector<float>(s.m * s.k, rng);
    const auto b = random_vector<float>(s.n * s.k, rng);
    std::vector<float> c_ref(s.m * s.n), c_par(s.m * s.n);
    reference::gemm(Trans::No, Trans::Yes, s, 1.0f, a.data(), s.k, b.data(), s.k, 0.0f, c_ref.data(), s.n);
    parallel::gemm(Trans::No, Trans::Yes, s, 1.0f, a.data(), s.k, b.data(), s.k, 0.0f, c_par.data(), s.n);
    CHECK(max_abs_diff(c_ref, c_par) < 1e-4);
}

TEST_CASE("conv: output geometry")
{
    const ConvGeometry g{3, 256, 256, 8, 3, 2, 1};
    CHECK(g.out_height() == 128);
    CHECK(g.out_width() == 128);
    CHECK(g.patch_size() == 27);
    const ConvGeometry proj{8, 16, 16, 16, 1, 2, 0};
    CHECK(proj.out_height() == 8);
}

TEST_CASE("conv: im2col + gemm equals the direct convolution, forward and backward")
{
    std::mt19937 rng(11);
    for (const ConvGeometry g : {ConvGeometry{3, 9, 7, 4, 3, 2, 1}, ConvGeometry{2, 6, 6, 5, 3, 1, 1},
                                 ConvGeometry{4, 8, 8, 6, 1, 2, 0}, ConvGeometry{1, 5, 5, 1, 3, 1, 0}}) {
        const auto input = random_vector<double>(g.input_size(), rng);
        const auto weight = random_vector<double>(g.weight_count(), rng);
        const auto bias = random_vector<double>(g.out_channels, rng);
        std::vector<double> out_ref(g.output_size()), out_par(g.output_size());
        std::vector<double> columns(g.patch_size() * g.out_height() * g.out_width());
        reference::conv2d_forward<double>(g, input, weight, bias, out_ref);
        parallel::conv2d_forward<double>(g, input, weight, bias, out_par, columns);
        CHECK(max_abs_diff(out_ref, out_par) < 1e-12);

        const auto grad_out = random_vector<double>(g.output_size(), rng);
        std::vector<double> gi_ref(g.input_size()), gw_ref(g.weight_count()), gb_ref(g.out_channels);
        std::vector<double> gi_par = gi_ref, gw_par = gw_ref, gb_par = gb_ref;
        reference::conv2d_backward<double>(g, input, weight, grad_out, gi_ref, gw_ref, gb_ref);
        parallel::conv2d_backward<double>(g, columns, weight, grad_out, gi_par, gw_par, gb_par);
        CHECK(max_abs_diff(gi_ref, gi_par) < 1e-12);
        CHECK(max_abs_diff(gw_ref, gw_par) < 1e-12);
        CHECK(max_abs_diff(gb_ref, gb_par) < 1e-12);
    }
}

TEST_CASE("conv: reference backward matches finite differences")
{
    std::mt19937 rng(17);
    const ConvGeometry g{2, 5, 4, 3, 3, 2, 1};
    auto input = random_vector<double>(g.input_size(), rng);
    auto weight = random_vector<double>(g.weight_count(), rng);
    const auto bias = random_vector<double>(g.out_channels, rng);
    const auto probe = random_vector<double>(g.output_size(), rng);

    auto objective = [&] {
        std::vector<double> out(g.output_size());
        reference::conv2d_forward<double>(g, input, weight, bias, out);
        double sum = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) sum += out[i] * probe[i];
        return sum;
    };
    std::vector<double> gi(g.input_size()), gw(g.weight_count()), gb(g.out_channels);
    reference::conv2d_backward<double>(g, input, weight, probe, gi, gw, gb);

    const double h = 1e-6;
    for (std::size_t i = 0; i < input.size(); ++i) {
        const double saved = input[i];
        input[i] = saved + h;
        const double up = objective();
        input[i] = saved - h;
        const double down = objective();
        input[i] = saved;
        CHECK(gi[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
    }
    for (std::size_t i = 0; i < weight.size(); ++i) {
        const double saved = weight[i];
        weight[i] = saved + h;
        const double up = objective();
        weight[i] = saved - h;
        const double down = objective();
        weight[i] = saved;
        CHECK(gw[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("conv: col2im is the adjoint of im2col")
{
    std::mt19937 rng(23);
    const ConvGeometry g{3, 7, 6, 1, 3, 2, 1};
    const std::size_t cols = g.patch_size() * g.out_height() * g.out_width();
    const auto x = random_vector<double>(g.input_size(), rng);
    const auto y = random_vector<double>(cols, rng);
    std::vector<double> ax(cols), aty(g.input_size());
    parallel::im2col<double>(g, x, ax);
    parallel::col2im<double>(g, y, aty);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < cols; ++i) lhs += ax[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * aty[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}
