#pragma once

// Direct 3D cross-correlation written as seven nested loops. This is the
// reference the fast im2col path is checked against; it must stay naive and
// must not share code with src/ops.cpp.

#include <vector>

#include "sgst/tensor.hpp"

namespace sgst_test {

template <typename T>
sgst::Tensor<T> direct_conv3d(const sgst::Tensor<T>& x, const sgst::Tensor<T>& k, int64_t st, int64_t sh,
                              int64_t sw, int64_t pt, int64_t ph, int64_t pw) {
    const int64_t N = x.shape[0], C = x.shape[1], Ti = x.shape[2], H = x.shape[3], W = x.shape[4];
    const int64_t F = k.shape[0], kt = k.shape[2], kh = k.shape[3], kw = k.shape[4];
    const int64_t To = (Ti + 2 * pt - kt) / st + 1;
    const int64_t Ho = (H + 2 * ph - kh) / sh + 1;
    const int64_t Wo = (W + 2 * pw - kw) / sw + 1;
    sgst::Tensor<T> out({N, F, To, Ho, Wo});
    for (int64_t n = 0; n < N; ++n)
        for (int64_t f = 0; f < F; ++f)
            for (int64_t to = 0; to < To; ++to)
                for (int64_t oh = 0; oh < Ho; ++oh)
                    for (int64_t ow = 0; ow < Wo; ++ow) {
                        T acc = 0;
                        for (int64_t c = 0; c < C; ++c)
                            for (int64_t dt = 0; dt < kt; ++dt)
                                for (int64_t dh = 0; dh < kh; ++dh)
                                    for (int64_t dw = 0; dw < kw; ++dw) {
                                        const int64_t it = to * st - pt + dt;
                                        const int64_t ih = oh * sh - ph + dh;
                                        const int64_t iw = ow * sw - pw + dw;
                                        if (it < 0 || it >= Ti || ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                                        const T xv = x[(((n * C + c) * Ti + it) * H + ih) * W + iw];
                                        const T kv = k[(((f * C + c) * kt + dt) * kh + dh) * kw + dw];
                                        acc += xv * kv;
                                    }
                        out[(((n * F + f) * To + to) * Ho + oh) * Wo + ow] = acc;
                    }
    return out;
}

}  // namespace sgst_test
