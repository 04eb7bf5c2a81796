#include "sgst/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "sgst/gemm.hpp"
#include "sgst/parallel.hpp"

namespace sgst {

namespace {

int64_t out_dim(int64_t in, int64_t k, int64_t s, int64_t p, const char* axis) {
    const int64_t span = in + 2 * p - k;
    if (span < 0)
        throw NumericError(std::string("conv/pool window does not fit along ") + axis + ": input " +
                           std::to_string(in) + ", kernel " + std::to_string(k) + ", pad " + std::to_string(p));
    return span / s + 1;
}

// Gathers one (sample, output-frame) chunk into a CK x (Ho*Wo) column matrix.
template <typename T>
void im2col_chunk(const T* x, int64_t C, int64_t Tin, int64_t H, int64_t W, int64_t kt, int64_t kh, int64_t kw,
                  Dims3 stride, Dims3 pad, int64_t to, int64_t Ho, int64_t Wo, T* col) {
    const int64_t plane = H * W;
    const int64_t chan = Tin * plane;
    const int64_t cols = Ho * Wo;
    int64_t r = 0;
    for (int64_t c = 0; c < C; ++c) {
        for (int64_t dt = 0; dt < kt; ++dt) {
            const int64_t it = to * stride.t - pad.t + dt;
            const bool t_ok = it >= 0 && it < Tin;
            const T* src_t = x + c * chan + it * plane;
            for (int64_t dh = 0; dh < kh; ++dh) {
                for (int64_t dw = 0; dw < kw; ++dw, ++r) {
                    T* dst = col + r * cols;
                    if (!t_ok) {
                        std::fill(dst, dst + cols, T(0));
                        continue;
                    }
                    for (int64_t oh = 0; oh < Ho; ++oh) {
                        const int64_t ih = oh * stride.h - pad.h + dh;
                        T* drow = dst + oh * Wo;
                        if (ih < 0 || ih >= H) {
                            std::fill(drow, drow + Wo, T(0));
                            continue;
                        }
                        const T* srow = src_t + ih * W;
                        for (int64_t ow = 0; ow < Wo; ++ow) {
                            const int64_t iw = ow * stride.w - pad.w + dw;
                            drow[ow] = (iw >= 0 && iw < W) ? srow[iw] : T(0);
                        }
                    }
                }
            }
        }
    }
}

// Scatter-adds a CK x (Ho*Wo) gradient chunk back onto the input gradient.
template <typename T>
void col2im_add_chunk(const T* col, int64_t C, int64_t Tin, int64_t H, int64_t W, int64_t kt, int64_t kh,
                      int64_t kw, Dims3 stride, Dims3 pad, int64_t to, int64_t Ho, int64_t Wo, T* dx) {
    const int64_t plane = H * W;
    const int64_t chan = Tin * plane;
    const int64_t cols = Ho * Wo;
    int64_t r = 0;
    for (int64_t c = 0; c < C; ++c) {
        for (int64_t dt = 0; dt < kt; ++dt) {
            const int64_t it = to * stride.t - pad.t + dt;
            const bool t_ok = it >= 0 && it < Tin;
            T* dst_t = dx + c * chan + it * plane;
            for (int64_t dh = 0; dh < kh; ++dh) {
                for (int64_t dw = 0; dw < kw; ++dw, ++r) {
                    if (!t_ok) continue;
                    const T* src = col + r * cols;
                    for (int64_t oh = 0; oh < Ho; ++oh) {
                        const int64_t ih = oh * stride.h - pad.h + dh;
                        if (ih < 0 || ih >= H) continue;
                        T* drow = dst_t + ih * W;
                        const T* srow = src + oh * Wo;
                        for (int64_t ow = 0; ow < Wo; ++ow) {
                            const int64_t iw = ow * stride.w - pad.w + dw;
                            if (iw >= 0 && iw < W) drow[iw] += srow[ow];
                        }
                    }
                }
            }
        }
    }
}

}  // namespace

Shape conv3d_output_shape(const Shape& x, const Shape& k, Dims3 stride, Dims3 pad) {
    if (x.size() != 5 || k.size() != 5)
        throw NumericError("conv3d expects x N x C x T x H x W and k F x C x kt x kh x kw, got " + shape_str(x) +
                           " and " + shape_str(k));
    if (x[1] != k[1])
        throw NumericError("conv3d channel mismatch: input has " + std::to_string(x[1]) + ", kernel expects " +
                           std::to_string(k[1]));
    return {x[0], k[0], out_dim(x[2], k[2], stride.t, pad.t, "t"), out_dim(x[3], k[3], stride.h, pad.h, "h"),
            out_dim(x[4], k[4], stride.w, pad.w, "w")};
}

template <typename T>
NodePtr<T> conv3d(NodePtr<T> x, NodePtr<T> k, Dims3 stride, Dims3 pad) {
    const Shape& xs = x->value.shape;
    const Shape& ks = k->value.shape;
    const Shape os = conv3d_output_shape(xs, ks, stride, pad);
    const int64_t N = xs[0], C = xs[1], Tin = xs[2], H = xs[3], W = xs[4];
    const int64_t F = ks[0], kt = ks[2], kh = ks[3], kw = ks[4];
    const int64_t To = os[2], Ho = os[3], Wo = os[4];
    const int64_t CK = C * kt * kh * kw;
    const int64_t cols = Ho * Wo;

    Tensor<T> out(os);
    {
        const T* xp = x->value.ptr();
        const T* kp = k->value.ptr();
        T* op = out.ptr();
        parallel_for(0, N * To, [&](int64_t item) {
            const int64_t n = item / To;
            const int64_t to = item % To;
            std::vector<T> col(static_cast<size_t>(CK * cols));
            std::vector<T> res(static_cast<size_t>(F * cols));
            im2col_chunk(xp + n * C * Tin * H * W, C, Tin, H, W, kt, kh, kw, stride, pad, to, Ho, Wo, col.data());
            gemm_nn(kp, col.data(), res.data(), F, cols, CK, false);
            for (int64_t f = 0; f < F; ++f)
                std::memcpy(op + ((n * F + f) * To + to) * cols, res.data() + f * cols,
                            sizeof(T) * static_cast<size_t>(cols));
        });
    }

    auto backward = [stride, pad](Node<T>& self) {
        NodePtr<T> xn = self.parents[0];
        NodePtr<T> kn = self.parents[1];
        const Shape& xs2 = xn->value.shape;
        const Shape& ks2 = kn->value.shape;
        const int64_t N2 = xs2[0], C2 = xs2[1], T2 = xs2[2], H2 = xs2[3], W2 = xs2[4];
        const int64_t F2 = ks2[0], kt2 = ks2[2], kh2 = ks2[3], kw2 = ks2[4];
        const int64_t To2 = self.value.shape[2], Ho2 = self.value.shape[3], Wo2 = self.value.shape[4];
        const int64_t CK2 = C2 * kt2 * kh2 * kw2;
        const int64_t cols2 = Ho2 * Wo2;
        const bool want_dx = xn->requires_grad;
        const bool want_dk = kn->requires_grad;
        if (want_dx) xn->ensure_grad();
        if (want_dk) kn->ensure_grad();

        std::vector<T> col(static_cast<size_t>(CK2 * cols2));
        std::vector<T> dy(static_cast<size_t>(F2 * cols2));
        std::vector<T> dcol(want_dx ? static_cast<size_t>(CK2 * cols2) : 0);
        // Chunks run serially: dW accumulation and overlapping col2im scatters
        // keep a fixed order regardless of thread count.
        for (int64_t n = 0; n < N2; ++n) {
            for (int64_t to = 0; to < To2; ++to) {
                for (int64_t f = 0; f < F2; ++f)
                    std::memcpy(dy.data() + f * cols2, self.grad.ptr() + ((n * F2 + f) * To2 + to) * cols2,
                                sizeof(T) * static_cast<size_t>(cols2));
                if (want_dk) {
                    im2col_chunk(xn->value.ptr() + n * C2 * T2 * H2 * W2, C2, T2, H2, W2, kt2, kh2, kw2, stride,
                                 pad, to, Ho2, Wo2, col.data());
                    gemm_nt(dy.data(), col.data(), kn->grad.ptr(), F2, CK2, cols2, true);
                }
                if (want_dx) {
                    gemm_tn(kn->value.ptr(), dy.data(), dcol.data(), CK2, cols2, F2, false);
                    col2im_add_chunk(dcol.data(), C2, T2, H2, W2, kt2, kh2, kw2, stride, pad, to, Ho2, Wo2,
                                     xn->grad.ptr() + n * C2 * T2 * H2 * W2);
                }
            }
        }
    };
    return make_op_node<T>(std::move(out), {std::move(x), std::move(k)}, backward);
}

template <typename T>
NodePtr<T> relu(NodePtr<T> x) {
    Tensor<T> out(x->value.shape);
    const int64_t n = out.numel();
    const T* xp = x->value.ptr();
    T* op = out.ptr();
    for (int64_t i = 0; i < n; ++i) op[i] = xp[i] > T(0) ? xp[i] : T(0);

    auto backward = [](Node<T>& self) {
        NodePtr<T> xn = self.parents[0];
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        const T* xp2 = xn->value.ptr();
        const T* gp = self.grad.ptr();
        T* dxp = xn->grad.ptr();
        const int64_t m = self.value.numel();
        for (int64_t i = 0; i < m; ++i)
            if (xp2[i] > T(0)) dxp[i] += gp[i];
    };
    return make_op_node<T>(std::move(out), {std::move(x)}, backward);
}

template <typename T>
NodePtr<T> maxpool3d(NodePtr<T> x, Dims3 window, Dims3 stride, Dims3 pad) {
    const Shape& xs = x->value.shape;
    if (xs.size() != 5) throw NumericError("maxpool3d expects N x C x T x H x W, got " + shape_str(xs));
    if (pad.t >= window.t || pad.h >= window.h || pad.w >= window.w)
        throw NumericError("maxpool3d: padding must be smaller than the window, or a window could be all padding");
    const int64_t N = xs[0], C = xs[1], Tin = xs[2], H = xs[3], W = xs[4];
    const int64_t To = out_dim(Tin, window.t, stride.t, pad.t, "t");
    const int64_t Ho = out_dim(H, window.h, stride.h, pad.h, "h");
    const int64_t Wo = out_dim(W, window.w, stride.w, pad.w, "w");

    Tensor<T> out({N, C, To, Ho, Wo});
    auto argmax = std::make_shared<std::vector<int64_t>>(static_cast<size_t>(out.numel()));
    {
        const T* xp = x->value.ptr();
        T* op = out.ptr();
        int64_t* am = argmax->data();
        parallel_for(0, N * C, [&](int64_t plane) {
            const T* src = xp + plane * Tin * H * W;
            T* dst = op + plane * To * Ho * Wo;
            int64_t* adst = am + plane * To * Ho * Wo;
            int64_t o = 0;
            for (int64_t to = 0; to < To; ++to)
                for (int64_t oh = 0; oh < Ho; ++oh)
                    for (int64_t ow = 0; ow < Wo; ++ow, ++o) {
                        T best = -std::numeric_limits<T>::infinity();
                        int64_t best_i = -1;
                        for (int64_t dt = 0; dt < window.t; ++dt) {
                            const int64_t it = to * stride.t - pad.t + dt;
                            if (it < 0 || it >= Tin) continue;
                            for (int64_t dh = 0; dh < window.h; ++dh) {
                                const int64_t ih = oh * stride.h - pad.h + dh;
                                if (ih < 0 || ih >= H) continue;
                                for (int64_t dw = 0; dw < window.w; ++dw) {
                                    const int64_t iw = ow * stride.w - pad.w + dw;
                                    if (iw < 0 || iw >= W) continue;
                                    const int64_t idx = (it * H + ih) * W + iw;
                                    if (src[idx] > best) {
                                        best = src[idx];
                                        best_i = idx;
                                    }
                                }
                            }
                        }
                        dst[o] = best;
                        adst[o] = best_i;
                    }
        });
    }

    auto backward = [argmax](Node<T>& self) {
        NodePtr<T> xn = self.parents[0];
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        const Shape& xs2 = xn->value.shape;
        const int64_t planes = xs2[0] * xs2[1];
        const int64_t in_plane = xs2[2] * xs2[3] * xs2[4];
        const int64_t out_plane = self.value.numel() / planes;
        const T* gp = self.grad.ptr();
        T* dxp = xn->grad.ptr();
        const int64_t* am = argmax->data();
        // Overlapping windows within a plane scatter serially; planes are
        // disjoint, so the plane loop may parallelize.
        parallel_for(0, planes, [&](int64_t plane) {
            const T* g = gp + plane * out_plane;
            const int64_t* a = am + plane * out_plane;
            T* dx = dxp + plane * in_plane;
            for (int64_t o = 0; o < out_plane; ++o)
                if (a[o] >= 0) dx[a[o]] += g[o];
        });
    };
    return make_op_node<T>(std::move(out), {std::move(x)}, backward);
}

template <typename T>
NodePtr<T> global_avg_pool(NodePtr<T> x) {
    const Shape& xs = x->value.shape;
    if (xs.size() != 5) throw NumericError("global_avg_pool expects N x C x T x H x W, got " + shape_str(xs));
    const int64_t N = xs[0], C = xs[1];
    const int64_t inner = xs[2] * xs[3] * xs[4];
    Tensor<T> out({N, C});
    const T* xp = x->value.ptr();
    for (int64_t nc = 0; nc < N * C; ++nc) {
        double acc = 0.0;
        const T* src = xp + nc * inner;
        for (int64_t i = 0; i < inner; ++i) acc += static_cast<double>(src[i]);
        out[nc] = static_cast<T>(acc / static_cast<double>(inner));
    }

    auto backward = [inner](Node<T>& self) {
        NodePtr<T> xn = self.parents[0];
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        const T* gp = self.grad.ptr();
        T* dxp = xn->grad.ptr();
        const int64_t planes = self.value.numel();
        for (int64_t nc = 0; nc < planes; ++nc) {
            const T g = gp[nc] / static_cast<T>(inner);
            T* dst = dxp + nc * inner;
            for (int64_t i = 0; i < inner; ++i) dst[i] += g;
        }
    };
    return make_op_node<T>(std::move(out), {std::move(x)}, backward);
}

template <typename T>
NodePtr<T> linear(NodePtr<T> x, NodePtr<T> w, NodePtr<T> b) {
    const Shape& xs = x->value.shape;
    const Shape& ws = w->value.shape;
    const Shape& bs = b->value.shape;
    if (xs.size() != 2 || ws.size() != 2 || bs.size() != 1 || xs[1] != ws[1] || ws[0] != bs[0])
        throw NumericError("linear: incompatible shapes x " + shape_str(xs) + ", w " + shape_str(ws) + ", b " +
                           shape_str(bs));
    const int64_t N = xs[0], D = xs[1], K = ws[0];
    Tensor<T> out({N, K});
    gemm_nt(x->value.ptr(), w->value.ptr(), out.ptr(), N, K, D, false);
    for (int64_t n = 0; n < N; ++n)
        for (int64_t k = 0; k < K; ++k) out[n * K + k] += b->value[k];

    auto backward = [](Node<T>& self) {
        NodePtr<T> xn = self.parents[0];
        NodePtr<T> wn = self.parents[1];
        NodePtr<T> bn = self.parents[2];
        const int64_t N2 = self.value.shape[0], K2 = self.value.shape[1];
        const int64_t D2 = wn->value.shape[1];
        const T* gp = self.grad.ptr();
        if (xn->requires_grad) {
            xn->ensure_grad();
            gemm_nn(gp, wn->value.ptr(), xn->grad.ptr(), N2, D2, K2, true);
        }
        if (wn->requires_grad) {
            wn->ensure_grad();
            gemm_tn(gp, xn->value.ptr(), wn->grad.ptr(), K2, D2, N2, true);
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            T* db = bn->grad.ptr();
            for (int64_t n = 0; n < N2; ++n)
                for (int64_t k = 0; k < K2; ++k) db[k] += gp[n * K2 + k];
        }
    };
    return make_op_node<T>(std::move(out), {std::move(x), std::move(w), std::move(b)}, backward);
}

template <typename T>
NodePtr<T> add(NodePtr<T> a, NodePtr<T> b) {
    check_same_shape(a->value, b->value, "add");
    Tensor<T> out(a->value.shape);
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = a->value[i] + b->value[i];

    auto backward = [](Node<T>& self) {
        for (auto& p : self.parents) {
            if (!p->requires_grad) continue;
            p->ensure_grad();
            const int64_t m = self.value.numel();
            const T* gp = self.grad.ptr();
            T* dp = p->grad.ptr();
            for (int64_t i = 0; i < m; ++i) dp[i] += gp[i];
        }
    };
    return make_op_node<T>(std::move(out), {std::move(a), std::move(b)}, backward);
}

template <typename T>
NodePtr<T> mul(NodePtr<T> a, NodePtr<T> b) {
    check_same_shape(a->value, b->value, "mul");
    Tensor<T> out(a->value.shape);
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = a->value[i] * b->value[i];

    auto backward = [](Node<T>& self) {
        NodePtr<T> an = self.parents[0];
        NodePtr<T> bn = self.parents[1];
        const int64_t m = self.value.numel();
        const T* gp = self.grad.ptr();
        if (an->requires_grad) {
            an->ensure_grad();
            for (int64_t i = 0; i < m; ++i) an->grad[i] += gp[i] * bn->value[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (int64_t i = 0; i < m; ++i) bn->grad[i] += gp[i] * an->value[i];
        }
    };
    return make_op_node<T>(std::move(out), {std::move(a), std::move(b)}, backward);
}

template <typename T>
NodePtr<T> batchnorm3d(NodePtr<T> x, NodePtr<T> gamma, NodePtr<T> beta, std::shared_ptr<BnStats<T>> stats,
                       BnMode mode, double eps, double momentum) {
    const Shape& xs = x->value.shape;
    if (xs.size() != 5) throw NumericError("batchnorm3d expects N x C x T x H x W, got " + shape_str(xs));
    const int64_t N = xs[0], C = xs[1];
    const int64_t inner = xs[2] * xs[3] * xs[4];
    const int64_t count = N * inner;
    if (gamma->value.numel() != C || beta->value.numel() != C)
        throw NumericError("batchnorm3d: gamma/beta must have one entry per channel");
    if (eps <= 0) throw NumericError("batchnorm3d: eps must be positive");
    if (mode == BnMode::Train && count <= 1)
        throw NumericError("batchnorm3d: variance undefined for a single element per channel in train mode");

    auto xhat = std::make_shared<Tensor<T>>(xs);
    auto inv_std = std::make_shared<Tensor<T>>(Shape{C});
    Tensor<T> out(xs);

    const T* xp = x->value.ptr();
    T* hp = xhat->ptr();
    T* op = out.ptr();

    if (mode == BnMode::Train) {
        parallel_for(0, C, [&](int64_t c) {
            double sum = 0.0;
            for (int64_t n = 0; n < N; ++n) {
                const T* src = xp + (n * C + c) * inner;
                for (int64_t i = 0; i < inner; ++i) sum += static_cast<double>(src[i]);
            }
            const double mean = sum / static_cast<double>(count);
            double ssq = 0.0;
            for (int64_t n = 0; n < N; ++n) {
                const T* src = xp + (n * C + c) * inner;
                for (int64_t i = 0; i < inner; ++i) {
                    const double d = static_cast<double>(src[i]) - mean;
                    ssq += d * d;
                }
            }
            const double var = ssq / static_cast<double>(count);
            const double istd = 1.0 / std::sqrt(var + eps);
            (*inv_std)[c] = static_cast<T>(istd);
            const T g = gamma->value[c], bta = beta->value[c];
            for (int64_t n = 0; n < N; ++n) {
                const T* src = xp + (n * C + c) * inner;
                T* h = hp + (n * C + c) * inner;
                T* o = op + (n * C + c) * inner;
                for (int64_t i = 0; i < inner; ++i) {
                    const T xh = static_cast<T>((static_cast<double>(src[i]) - mean) * istd);
                    h[i] = xh;
                    o[i] = g * xh + bta;
                }
            }
            // Unbiased variance feeds the running estimate.
            const double unbiased = var * static_cast<double>(count) / static_cast<double>(count - 1);
            stats->running_mean[c] =
                static_cast<T>((1.0 - momentum) * static_cast<double>(stats->running_mean[c]) + momentum * mean);
            stats->running_var[c] =
                static_cast<T>((1.0 - momentum) * static_cast<double>(stats->running_var[c]) + momentum * unbiased);
        });
    } else {
        parallel_for(0, C, [&](int64_t c) {
            const double mean = static_cast<double>(stats->running_mean[c]);
            const double istd = 1.0 / std::sqrt(static_cast<double>(stats->running_var[c]) + eps);
            (*inv_std)[c] = static_cast<T>(istd);
            const T g = gamma->value[c], bta = beta->value[c];
            for (int64_t n = 0; n < N; ++n) {
                const T* src = xp + (n * C + c) * inner;
                T* h = hp + (n * C + c) * inner;
                T* o = op + (n * C + c) * inner;
                for (int64_t i = 0; i < inner; ++i) {
                    const T xh = static_cast<T>((static_cast<double>(src[i]) - mean) * istd);
                    h[i] = xh;
                    o[i] = g * xh + bta;
                }
            }
        });
    }

    auto backward = [xhat, inv_std, mode, N, C, inner, count](Node<T>& self) {
        NodePtr<T> xn = self.parents[0];
        NodePtr<T> gn = self.parents[1];
        NodePtr<T> bn = self.parents[2];
        const T* gp = self.grad.ptr();
        const T* hp2 = xhat->ptr();
        const bool want_dx = xn->requires_grad;
        if (want_dx) xn->ensure_grad();
        if (gn->requires_grad) gn->ensure_grad();
        if (bn->requires_grad) bn->ensure_grad();

        parallel_for(0, C, [&](int64_t c) {
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (int64_t n = 0; n < N; ++n) {
                const T* g = gp + (n * C + c) * inner;
                const T* h = hp2 + (n * C + c) * inner;
                for (int64_t i = 0; i < inner; ++i) {
                    sum_dy += static_cast<double>(g[i]);
                    sum_dy_xhat += static_cast<double>(g[i]) * static_cast<double>(h[i]);
                }
            }
            if (gn->requires_grad) gn->grad[c] += static_cast<T>(sum_dy_xhat);
            if (bn->requires_grad) bn->grad[c] += static_cast<T>(sum_dy);
            if (!want_dx) return;
            const double gscale = static_cast<double>(gn->value[c]) * static_cast<double>((*inv_std)[c]);
            if (mode == BnMode::Train) {
                const double mean_dy = sum_dy / static_cast<double>(count);
                const double mean_dy_xhat = sum_dy_xhat / static_cast<double>(count);
                for (int64_t n = 0; n < N; ++n) {
                    const T* g = gp + (n * C + c) * inner;
                    const T* h = hp2 + (n * C + c) * inner;
                    T* dx = xn->grad.ptr() + (n * C + c) * inner;
                    for (int64_t i = 0; i < inner; ++i)
                        dx[i] += static_cast<T>(gscale * (static_cast<double>(g[i]) - mean_dy -
                                                          static_cast<double>(h[i]) * mean_dy_xhat));
                }
            } else {
                for (int64_t n = 0; n < N; ++n) {
                    const T* g = gp + (n * C + c) * inner;
                    T* dx = xn->grad.ptr() + (n * C + c) * inner;
                    for (int64_t i = 0; i < inner; ++i) dx[i] += static_cast<T>(gscale * static_cast<double>(g[i]));
                }
            }
        });
    };
    return make_op_node<T>(std::move(out), {std::move(x), std::move(gamma), std::move(beta)}, backward);
}

template <typename T>
CeResult<T> softmax_crossentropy(NodePtr<T> logits, const std::vector<int>& labels) {
    const Shape& ls = logits->value.shape;
    if (ls.size() != 2) throw NumericError("softmax_crossentropy expects N x K logits, got " + shape_str(ls));
    const int64_t N = ls[0], K = ls[1];
    if (static_cast<int64_t>(labels.size()) != N)
        throw NumericError("softmax_crossentropy: " + std::to_string(labels.size()) + " labels for batch of " +
                           std::to_string(N));
    for (int lab : labels)
        if (lab < 0 || lab >= K)
            throw NumericError("softmax_crossentropy: label " + std::to_string(lab) + " outside [0, " +
                               std::to_string(K) + ")");

    auto probs = std::make_shared<Tensor<T>>(ls);
    double loss_acc = 0.0;
    const T* lp = logits->value.ptr();
    T* pp = probs->ptr();
    for (int64_t n = 0; n < N; ++n) {
        const T* row = lp + n * K;
        T mx = row[0];
        for (int64_t k = 1; k < K; ++k) mx = std::max(mx, row[k]);
        double denom = 0.0;
        for (int64_t k = 0; k < K; ++k) denom += std::exp(static_cast<double>(row[k] - mx));
        const double log_denom = std::log(denom);
        for (int64_t k = 0; k < K; ++k)
            pp[n * K + k] = static_cast<T>(std::exp(static_cast<double>(row[k] - mx) - log_denom));
        loss_acc += -(static_cast<double>(row[labels[static_cast<size_t>(n)]] - mx) - log_denom);
    }
    Tensor<T> loss({1});
    loss[0] = static_cast<T>(loss_acc / static_cast<double>(N));

    auto labels_copy = std::make_shared<std::vector<int>>(labels);
    auto backward = [probs, labels_copy, N, K](Node<T>& self) {
        NodePtr<T> ln = self.parents[0];
        if (!ln->requires_grad) return;
        ln->ensure_grad();
        const T g = self.grad[0];
        const T* pp2 = probs->ptr();
        T* dl = ln->grad.ptr();
        const T scale = g / static_cast<T>(N);
        for (int64_t n = 0; n < N; ++n) {
            const int lab = (*labels_copy)[static_cast<size_t>(n)];
            for (int64_t k = 0; k < K; ++k) {
                const T onehot = (k == lab) ? T(1) : T(0);
                dl[n * K + k] += scale * (pp2[n * K + k] - onehot);
            }
        }
    };
    NodePtr<T> loss_node = make_op_node<T>(std::move(loss), {std::move(logits)}, backward);
    return {std::move(loss_node), *probs};
}

#define SGST_INSTANTIATE_OPS(T)                                                                               \
    template NodePtr<T> conv3d<T>(NodePtr<T>, NodePtr<T>, Dims3, Dims3);                                      \
    template NodePtr<T> relu<T>(NodePtr<T>);                                                                  \
    template NodePtr<T> maxpool3d<T>(NodePtr<T>, Dims3, Dims3, Dims3);                                        \
    template NodePtr<T> global_avg_pool<T>(NodePtr<T>);                                                       \
    template NodePtr<T> linear<T>(NodePtr<T>, NodePtr<T>, NodePtr<T>);                                        \
    template NodePtr<T> add<T>(NodePtr<T>, NodePtr<T>);                                                       \
    template NodePtr<T> mul<T>(NodePtr<T>, NodePtr<T>);                                                       \
    template NodePtr<T> batchnorm3d<T>(NodePtr<T>, NodePtr<T>, NodePtr<T>, std::shared_ptr<BnStats<T>>,       \
                                       BnMode, double, double);                                               \
    template CeResult<T> softmax_crossentropy<T>(NodePtr<T>, const std::vector<int>&);

SGST_INSTANTIATE_OPS(float)
SGST_INSTANTIATE_OPS(double)

#undef SGST_INSTANTIATE_OPS

}  // namespace sgst
