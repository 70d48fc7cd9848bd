#include "observer/kernels/gemm.hpp"

#include <vector>

namespace observer::kernels {

namespace {

template <typename T>
T element(Trans t, const T* m, std::size_t ld, std::size_t row, std::size_t col)
{
    return t == Trans::No ? m[row * ld + col] : m[col * ld + row];
}

// Copies op(M) (rows x cols) into a dense row-major buffer.
template <typename T>
std::vector<T> pack(Trans t, const T* m, std::size_t ld, std::size_t rows, std::size_t cols)
{
    std::vector<T> out(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out[r * cols + c] = element(t, m, ld, r, c);
        }
    }
    return out;
}

}  // namespace

namespace reference {

template <typename T>
void gemm(Trans ta, Trans tb, GemmShape s, T alpha, const T* a, std::size_t lda,
          const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc)
{
    for (std::size_t i = 0; i < s.m; ++i) {
        for (std::size_t j = 0; j < s.n; ++j) {
            T acc = 0;
            for (std::size_t p = 0; p < s.k; ++p) {
                acc += element(ta, a, lda, i, p) * element(tb, b, ldb, p, j);
            }
            T& out = c[i * ldc + j];
            out = alpha * acc + (beta == T(0) ? T(0) : beta * out);
        }
    }
}

template void gemm<float>(Trans, Trans, GemmShape, float, const float*, std::size_t,
                          const float*, std::size_t, float, float*, std::size_t);
template void gemm<double>(Trans, Trans, GemmShape, double, const double*, std::size_t,
                           const double*, std::size_t, double, double*, std::size_t);

}  // namespace reference

namespace parallel {

template <typename T>
void gemm(Trans ta, Trans tb, GemmShape s, T alpha, const T* a, std::size_t lda,
          const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc)
{
    std::vector<T> a_packed;
    std::vector<T> b_packed;
    if (ta == Trans::Yes) {
        a_packed = pack(ta, a, lda, s.m, s.k);
        a = a_packed.data();
        lda = s.k;
    }
    if (tb == Trans::Yes) {
        b_packed = pack(tb, b, ldb, s.k, s.n);
        b = b_packed.data();
        ldb = s.n;
    }
    const auto rows = static_cast<long>(s.m);
    const std::size_t n = s.n;
    const std::size_t k = s.k;
    const bool worth_threads = s.m * s.n * s.k > 32768;
#pragma omp parallel for schedule(static) if (worth_threads)
    for (long i = 0; i < rows; ++i) {
        T* __restrict crow = c + static_cast<std::size_t>(i) * ldc;
        if (beta == T(0)) {
            for (std::size_t j = 0; j < n; ++j) crow[j] = T(0);
        } else if (beta != T(1)) {
            for (std::size_t j = 0; j < n; ++j) crow[j] *= beta;
        }
        const T* arow = a + static_cast<std::size_t>(i) * lda;
        for (std::size_t p = 0; p < k; ++p) {
            const T scale = alpha * arow[p];
            if (scale == T(0)) continue;
            const T* __restrict brow = b + p * ldb;
#pragma omp simd
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += scale * brow[j];
            }
        }
    }
}

template void gemm<float>(Trans, Trans, GemmShape, float, const float*, std::size_t,
                          const float*, std::size_t, float, float*, std::size_t);
template void gemm<double>(Trans, Trans, GemmShape, double, const double*, std::size_t,
                           const double*, std::size_t, double, double*, std::size_t);

}  // namespace parallel

}  // namespace observer::kernels
