#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sgst/error.hpp"
#include "sgst/image.hpp"
#include "sgst/rng.hpp"

namespace sgst {

// Frame indices of one proxy video. The source clip of length N is divided
// into T intervals of width floor(N/T); one frame is drawn uniformly from
// each. Clips shorter than T keep all frames and pad with the last one.
struct ProxyIndexPlan {
    int64_t target_len = 0;              // T
    int64_t source_len = 0;              // N the plan was drawn for
    std::vector<int64_t> indices;        // target_len - pad_count entries, strictly increasing
    int64_t pad_count = 0;
};

ProxyIndexPlan sample_proxy_indices(int64_t n_frames, int64_t target_len, Rng& rng);

// Same contract with the random source abstracted: draw(bound) must return a
// uniform integer in [0, bound).
using IntervalDraw = std::function<uint32_t(uint32_t)>;
ProxyIndexPlan sample_proxy_indices(int64_t n_frames, int64_t target_len, const IntervalDraw& draw);

// Deterministic variant used at evaluation time: the middle frame of every
// interval instead of a random draw.
ProxyIndexPlan center_proxy_indices(int64_t n_frames, int64_t target_len);

template <typename Seq>
Seq apply_proxy(const Seq& frames, const ProxyIndexPlan& plan) {
    if (static_cast<int64_t>(frames.size()) != plan.source_len)
        throw DataError("proxy plan was drawn for " + std::to_string(plan.source_len) + " frames, sequence has " +
                        std::to_string(frames.size()));
    Seq out;
    out.reserve(static_cast<size_t>(plan.target_len));
    for (int64_t idx : plan.indices) out.push_back(frames[static_cast<size_t>(idx)]);
    for (int64_t i = 0; i < plan.pad_count; ++i) out.push_back(frames.back());
    return out;
}

// One spatial augmentation, held fixed across all frames of a clip sample.
struct AugmentSpec {
    int64_t crop_top = 0;
    int64_t crop_left = 0;
    int64_t patch = 112;
    double angle_deg = 0.0;  // in [-10, 10]
    uint64_t seed = 0;
};

// Draws offsets and angle for a frame of the given size (after the pre-crop
// resize). The whole clip reuses the returned spec.
AugmentSpec draw_augment(int64_t frame_h, int64_t frame_w, int64_t patch, double max_angle_deg, Rng& rng);

// Center-crop spec with zero rotation, for evaluation.
AugmentSpec center_augment(int64_t frame_h, int64_t frame_w, int64_t patch);

template <typename T>
Image<T> random_crop(const Image<T>& frame, const AugmentSpec& spec) {
    if (frame.h < spec.patch || frame.w < spec.patch)
        throw DataError("frame " + std::to_string(frame.h) + "x" + std::to_string(frame.w) +
                        " smaller than crop patch " + std::to_string(spec.patch));
    return crop(frame, spec.crop_top, spec.crop_left, spec.patch, spec.patch);
}

template <typename T>
Image<T> random_rotation(const Image<T>& frame, const AugmentSpec& spec) {
    if (spec.angle_deg < -10.0 || spec.angle_deg > 10.0)
        throw DataError("rotation angle " + std::to_string(spec.angle_deg) + " outside [-10, 10]");
    return rotate_about_center(frame, spec.angle_deg);
}

}  // namespace sgst
