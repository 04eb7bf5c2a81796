#include "sgst/encode.hpp"

#include <algorithm>
#include <cmath>

namespace sgst {

ImageU8 encode_depth_3band(const ImageU16& depth, DepthRange range) {
    if (range.min_mm >= range.max_mm)
        throw DataError("invalid depth range [" + std::to_string(range.min_mm) + ", " +
                        std::to_string(range.max_mm) + "]");
    if (depth.c != 1) throw DataError("depth encoder expects a single-band image");
    ImageU8 out(depth.h, depth.w, 3);
    const double lo = range.min_mm;
    const double span = static_cast<double>(range.max_mm) - lo;
    for (int64_t i = 0; i < depth.pixels(); ++i) {
        const double d = std::clamp(static_cast<double>(depth.data[static_cast<size_t>(i)]), lo,
                                    static_cast<double>(range.max_mm));
        const uint8_t level = static_cast<uint8_t>(round_half_up(255.0 * (d - lo) / span));
        out.data[static_cast<size_t>(i * 3 + 0)] = level;
        out.data[static_cast<size_t>(i * 3 + 1)] = level;
        out.data[static_cast<size_t>(i * 3 + 2)] = level;
    }
    return out;
}

ImageU8 encode_flow_3band(const FlowField& flow, double clamp_bound) {
    if (clamp_bound <= 0.0) throw DataError("flow clamp bound must be positive");
    if (!flow.u.same_dims(flow.v)) throw DataError("flow components differ in size");
    const double B = clamp_bound;
    ImageU8 out(flow.u.h, flow.u.w, 3);
    for (int64_t i = 0; i < flow.u.pixels(); ++i) {
        const double u = flow.u.data[static_cast<size_t>(i)];
        const double v = flow.v.data[static_cast<size_t>(i)];
        const double uc = std::clamp(u, -B, B);
        const double vc = std::clamp(v, -B, B);
        const double mag = std::clamp(std::sqrt(u * u + v * v), 0.0, B);
        out.data[static_cast<size_t>(i * 3 + 0)] = static_cast<uint8_t>(round_half_up(255.0 * (uc + B) / (2 * B)));
        out.data[static_cast<size_t>(i * 3 + 1)] = static_cast<uint8_t>(round_half_up(255.0 * (vc + B) / (2 * B)));
        out.data[static_cast<size_t>(i * 3 + 2)] = static_cast<uint8_t>(round_half_up(255.0 * mag / B));
    }
    return out;
}

}  // namespace sgst
