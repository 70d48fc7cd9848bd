#pragma once

#include <cstddef>

namespace observer::kernels {

enum class Trans { No, Yes };

/// Row-major GEMM: C = alpha * op(A) * op(B) + beta * C.
/// op(A) is m x k, op(B) is k x n, C is m x n. Leading dimensions are the
/// stored row lengths of A, B and C.
struct GemmShape {
    std::size_t m;
    std::size_t n;
    std::size_t k;
};

namespace reference {

/// Serial triple loop. Kept as the oracle for the parallel kernel.
template <typename T>
void gemm(Trans ta, Trans tb, GemmShape s, T alpha, const T* a, std::size_t lda,
          const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc);

}  // namespace reference

namespace parallel {

/// OpenMP kernel over row blocks of C. Transposed operands are packed into
/// contiguous row-major panels first so the inner loop is unit stride.
template <typename T>
void gemm(Trans ta, Trans tb, GemmShape s, T alpha, const T* a, std::size_t lda,
          const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc);

}  // namespace parallel

}  // namespace observer::kernels
