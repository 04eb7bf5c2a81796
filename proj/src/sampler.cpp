#include "sgst/sampler.hpp"

namespace sgst {

ProxyIndexPlan sample_proxy_indices(int64_t n_frames, int64_t target_len, const IntervalDraw& draw) {
    if (n_frames <= 0) throw DataError("proxy sampling needs at least one frame");
    if (target_len <= 0) throw DataError("proxy target length must be positive");
    ProxyIndexPlan plan;
    plan.target_len = target_len;
    plan.source_len = n_frames;
    if (n_frames < target_len) {
        plan.indices.resize(static_cast<size_t>(n_frames));
        for (int64_t i = 0; i < n_frames; ++i) plan.indices[static_cast<size_t>(i)] = i;
        plan.pad_count = target_len - n_frames;
        return plan;
    }
    const int64_t gap = n_frames / target_len;
    plan.indices.resize(static_cast<size_t>(target_len));
    for (int64_t i = 0; i < target_len; ++i)
        plan.indices[static_cast<size_t>(i)] = static_cast<int64_t>(draw(static_cast<uint32_t>(gap))) + gap * i;
    return plan;
}

ProxyIndexPlan sample_proxy_indices(int64_t n_frames, int64_t target_len, Rng& rng) {
    return sample_proxy_indices(n_frames, target_len,
                                [&rng](uint32_t bound) { return rng.next_uint(bound); });
}

ProxyIndexPlan center_proxy_indices(int64_t n_frames, int64_t target_len) {
    if (n_frames <= 0) throw DataError("proxy sampling needs at least one frame");
    if (target_len <= 0) throw DataError("proxy target length must be positive");
    ProxyIndexPlan plan;
    plan.target_len = target_len;
    plan.source_len = n_frames;
    if (n_frames < target_len) {
        plan.indices.resize(static_cast<size_t>(n_frames));
        for (int64_t i = 0; i < n_frames; ++i) plan.indices[static_cast<size_t>(i)] = i;
        plan.pad_count = target_len - n_frames;
        return plan;
    }
    const int64_t gap = n_frames / target_len;
    plan.indices.resize(static_cast<size_t>(target_len));
    for (int64_t i = 0; i < target_len; ++i) plan.indices[static_cast<size_t>(i)] = gap / 2 + gap * i;
    return plan;
}

AugmentSpec draw_augment(int64_t frame_h, int64_t frame_w, int64_t patch, double max_angle_deg, Rng& rng) {
    if (frame_h < patch || frame_w < patch)
        throw DataError("frame " + std::to_string(frame_h) + "x" + std::to_string(frame_w) +
                        " smaller than crop patch " + std::to_string(patch));
    AugmentSpec spec;
    spec.patch = patch;
    spec.angle_deg = rng.next_range(-max_angle_deg, max_angle_deg);
    spec.crop_top = static_cast<int64_t>(rng.next_uint(static_cast<uint32_t>(frame_h - patch + 1)));
    spec.crop_left = static_cast<int64_t>(rng.next_uint(static_cast<uint32_t>(frame_w - patch + 1)));
    spec.seed = rng.state();
    return spec;
}

AugmentSpec center_augment(int64_t frame_h, int64_t frame_w, int64_t patch) {
    if (frame_h < patch || frame_w < patch)
        throw DataError("frame " + std::to_string(frame_h) + "x" + std::to_string(frame_w) +
                        " smaller than crop patch " + std::to_string(patch));
    AugmentSpec spec;
    spec.patch = patch;
    spec.angle_deg = 0.0;
    spec.crop_top = (frame_h - patch) / 2;
    spec.crop_left = (frame_w - patch) / 2;
    return spec;
}

}  // namespace sgst
