#pragma once

#include <cstdint>

#include "sgst/parallel.hpp"

namespace sgst {

// Row-major matrix kernels behind the conv3d/linear lowering. Work is split
// over disjoint output tiles; the reduction loop of every output element runs
// serially in a fixed order, so results are identical for any thread count.

// C[M,N] = (or +=) A[M,K] * B[K,N]
template <typename T>
void gemm_nn(const T* A, const T* B, T* C, int64_t M, int64_t N, int64_t K, bool accumulate) {
    constexpr int64_t JB = 1024;
    const int64_t jblocks = (N + JB - 1) / JB;
    parallel_for(0, M * jblocks, [&](int64_t item) {
        const int64_t i = item / jblocks;
        const int64_t j0 = (item % jblocks) * JB;
        const int64_t j1 = j0 + JB < N ? j0 + JB : N;
        T* c = C + i * N;
        if (!accumulate)
            for (int64_t j = j0; j < j1; ++j) c[j] = T(0);
        const T* a = A + i * K;
        for (int64_t k = 0; k < K; ++k) {
            const T aik = a[k];
            const T* b = B + k * N;
            for (int64_t j = j0; j < j1; ++j) c[j] += aik * b[j];
        }
    });
}

// C[M,N] = (or +=) A^T * B where A is stored K x M
template <typename T>
void gemm_tn(const T* A, const T* B, T* C, int64_t M, int64_t N, int64_t K, bool accumulate) {
    constexpr int64_t JB = 1024;
    const int64_t jblocks = (N + JB - 1) / JB;
    parallel_for(0, M * jblocks, [&](int64_t item) {
        const int64_t i = item / jblocks;
        const int64_t j0 = (item % jblocks) * JB;
        const int64_t j1 = j0 + JB < N ? j0 + JB : N;
        T* c = C + i * N;
        if (!accumulate)
            for (int64_t j = j0; j < j1; ++j) c[j] = T(0);
        for (int64_t k = 0; k < K; ++k) {
            const T aik = A[k * M + i];
            const T* b = B + k * N;
            for (int64_t j = j0; j < j1; ++j) c[j] += aik * b[j];
        }
    });
}

// C[M,N] = (or +=) A * B^T where B is stored N x K
template <typename T>
void gemm_nt(const T* A, const T* B, T* C, int64_t M, int64_t N, int64_t K, bool accumulate) {
    parallel_for(0, M, [&](int64_t i) {
        const T* a = A + i * K;
        T* c = C + i * N;
        for (int64_t j = 0; j < N; ++j) {
            const T* b = B + j * K;
            T acc = 0;
            for (int64_t k = 0; k < K; ++k) acc += a[k] * b[k];
            if (accumulate)
                c[j] += acc;
            else
                c[j] = acc;
        }
    });
}

}  // namespace sgst
