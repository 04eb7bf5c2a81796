#include "sgst/flow.hpp"

#include <algorithm>
#include <cmath>

namespace sgst {

namespace {

inline int64_t clampi(int64_t v, int64_t lo, int64_t hi) { return v < lo ? lo : (v > hi ? hi : v); }

inline float at_clamped(const ImageF& img, int64_t y, int64_t x) {
    return img.at(clampi(y, 0, img.h - 1), clampi(x, 0, img.w - 1));
}

// Weighted 8-neighbour average from the original formulation:
//   1/6 for the 4-neighbours, 1/12 for the diagonals.
float local_average(const ImageF& f, int64_t y, int64_t x) {
    const float cross = at_clamped(f, y - 1, x) + at_clamped(f, y + 1, x) + at_clamped(f, y, x - 1) +
                        at_clamped(f, y, x + 1);
    const float diag = at_clamped(f, y - 1, x - 1) + at_clamped(f, y - 1, x + 1) + at_clamped(f, y + 1, x - 1) +
                       at_clamped(f, y + 1, x + 1);
    return cross / 6.0f + diag / 12.0f;
}

}  // namespace

FlowField compute_flow_horn_schunck(const ImageF& a, const ImageF& b, const FlowParams& params) {
    if (a.h != b.h || a.w != b.w)
        throw DataError("flow frames differ in size: " + std::to_string(a.h) + "x" + std::to_string(a.w) + " vs " +
                        std::to_string(b.h) + "x" + std::to_string(b.w));
    if (a.c != 1 || b.c != 1) throw DataError("flow expects single-band frames");
    if (params.alpha <= 0.0) throw DataError("flow smoothness weight must be positive");
    if (params.iters < 1) throw DataError("flow needs at least one iteration");

    const int64_t H = a.h, W = a.w;

    // Derivatives averaged over the 2x2x2 cube spanning both frames.
    ImageF ex(H, W, 1), ey(H, W, 1), et(H, W, 1);
    for (int64_t y = 0; y < H; ++y) {
        for (int64_t x = 0; x < W; ++x) {
            const float a00 = at_clamped(a, y, x), a01 = at_clamped(a, y, x + 1);
            const float a10 = at_clamped(a, y + 1, x), a11 = at_clamped(a, y + 1, x + 1);
            const float b00 = at_clamped(b, y, x), b01 = at_clamped(b, y, x + 1);
            const float b10 = at_clamped(b, y + 1, x), b11 = at_clamped(b, y + 1, x + 1);
            ex.at(y, x) = 0.25f * ((a01 - a00) + (a11 - a10) + (b01 - b00) + (b11 - b10));
            ey.at(y, x) = 0.25f * ((a10 - a00) + (a11 - a01) + (b10 - b00) + (b11 - b01));
            et.at(y, x) = 0.25f * ((b00 - a00) + (b01 - a01) + (b10 - a10) + (b11 - a11));
        }
    }

    FlowField flow{ImageF(H, W, 1), ImageF(H, W, 1)};
    ImageF un(H, W, 1), vn(H, W, 1);
    const float alpha2 = static_cast<float>(params.alpha * params.alpha);
    for (int it = 0; it < params.iters; ++it) {
        for (int64_t y = 0; y < H; ++y) {
            for (int64_t x = 0; x < W; ++x) {
                const float ubar = local_average(flow.u, y, x);
                const float vbar = local_average(flow.v, y, x);
                const float fx = ex.at(y, x), fy = ey.at(y, x), ft = et.at(y, x);
                const float r = (fx * ubar + fy * vbar + ft) / (alpha2 + fx * fx + fy * fy);
                un.at(y, x) = ubar - fx * r;
                vn.at(y, x) = vbar - fy * r;
            }
        }
        std::swap(flow.u, un);
        std::swap(flow.v, vn);
    }
    for (float val : flow.u.data)
        if (!std::isfinite(val)) throw NumericError("flow produced non-finite values");
    for (float val : flow.v.data)
        if (!std::isfinite(val)) throw NumericError("flow produced non-finite values");
    return flow;
}

double horn_schunck_energy(const ImageF& a, const ImageF& b, const FlowField& flow, double alpha) {
    const int64_t H = a.h, W = a.w;
    double data_term = 0.0, smooth_term = 0.0;
    // Smoothness uses the same weighted 8-neighbour stencil as the iteration
    // (1/6 cross, 1/12 diagonal), written as 1/2 sum w_ij (f_i - f_j)^2; the
    // fixed-point update is block-Jacobi on exactly this quadratic, which is
    // what makes the energy non-increasing.
    const double wc = 1.0 / 6.0, wd = 1.0 / 12.0;
    const int64_t dy8[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
    const int64_t dx8[8] = {0, 0, -1, 1, -1, 1, -1, 1};
    for (int64_t y = 0; y < H; ++y) {
        for (int64_t x = 0; x < W; ++x) {
            const float a00 = at_clamped(a, y, x), a01 = at_clamped(a, y, x + 1);
            const float a10 = at_clamped(a, y + 1, x), a11 = at_clamped(a, y + 1, x + 1);
            const float b00 = at_clamped(b, y, x), b01 = at_clamped(b, y, x + 1);
            const float b10 = at_clamped(b, y + 1, x), b11 = at_clamped(b, y + 1, x + 1);
            const double fx = 0.25 * ((a01 - a00) + (a11 - a10) + (b01 - b00) + (b11 - b10));
            const double fy = 0.25 * ((a10 - a00) + (a11 - a01) + (b10 - b00) + (b11 - b01));
            const double ft = 0.25 * ((b00 - a00) + (b01 - a01) + (b10 - a10) + (b11 - a11));
            const double u = flow.u.at(y, x), v = flow.v.at(y, x);
            const double resid = fx * u + fy * v + ft;
            data_term += resid * resid;
            for (int k = 0; k < 8; ++k) {
                const double wgt = k < 4 ? wc : wd;
                const double du = u - at_clamped(flow.u, y + dy8[k], x + dx8[k]);
                const double dv = v - at_clamped(flow.v, y + dy8[k], x + dx8[k]);
                smooth_term += 0.5 * wgt * (du * du + dv * dv);
            }
        }
    }
    return data_term + alpha * alpha * smooth_term;
}

}  // namespace sgst
