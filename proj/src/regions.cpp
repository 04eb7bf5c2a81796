#include "sgst/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgst {

int joint_index(JointName j) {
    switch (j) {
        case JointName::Head: return kJointHead;
        case JointName::LeftWrist: return kJointWristLeft;
        case JointName::RightWrist: return kJointWristRight;
    }
    throw DataError("unknown joint");
}

namespace {

void clamp_bounds(RegionBox& box, int64_t frame_h, int64_t frame_w) {
    const int64_t half = box.side / 2;
    int64_t top = static_cast<int64_t>(round_half_up(box.cy)) - half;
    int64_t left = static_cast<int64_t>(round_half_up(box.cx)) - half;
    int64_t bottom = top + box.side;
    int64_t right = left + box.side;
    box.top = std::clamp<int64_t>(top, 0, frame_h);
    box.left = std::clamp<int64_t>(left, 0, frame_w);
    box.height = std::clamp<int64_t>(bottom, 0, frame_h) - box.top;
    box.width = std::clamp<int64_t>(right, 0, frame_w) - box.left;
}

}  // namespace

RegionBox region_box(const SkeletonFrame& sk, JointName joint, double scale, int64_t frame_h, int64_t frame_w) {
    if (scale <= 0.0 || scale > 1.0) throw DataError("region scale must lie in (0, 1]");
    const SkeletonJoint& j = sk.joints[static_cast<size_t>(joint_index(joint))];
    if (j.confidence <= 0.0f) throw DataError("joint untracked in this frame");
    RegionBox box;
    box.cx = j.px;
    box.cy = j.py;
    box.side = std::max<int64_t>(1, static_cast<int64_t>(round_half_up(scale * static_cast<double>(frame_h))));
    clamp_bounds(box, frame_h, frame_w);
    return box;
}

std::vector<RegionBox> track_region(const std::vector<SkeletonFrame>& skeleton, JointName joint, double scale,
                                    int64_t frame_h, int64_t frame_w) {
    const int ji = joint_index(joint);
    int64_t first_tracked = -1;
    for (size_t f = 0; f < skeleton.size(); ++f)
        if (skeleton[f].joints[static_cast<size_t>(ji)].confidence > 0.0f) {
            first_tracked = static_cast<int64_t>(f);
            break;
        }
    if (first_tracked < 0) throw DataError("joint untracked in every frame of the clip");

    std::vector<RegionBox> boxes;
    boxes.reserve(skeleton.size());
    int64_t last_tracked = first_tracked;
    for (size_t f = 0; f < skeleton.size(); ++f) {
        const bool tracked = skeleton[f].joints[static_cast<size_t>(ji)].confidence > 0.0f;
        const size_t src = tracked ? f : static_cast<size_t>(last_tracked);
        if (tracked) last_tracked = static_cast<int64_t>(f);
        boxes.push_back(region_box(skeleton[src], joint, scale, frame_h, frame_w));
    }
    return boxes;
}

std::vector<RegionBox> smooth_boxes(const std::vector<RegionBox>& boxes, int window, int64_t frame_h,
                                    int64_t frame_w) {
    if (window < 1) throw DataError("smoothing window must be at least 1");
    const int64_t n = static_cast<int64_t>(boxes.size());
    const int64_t half = window / 2;
    std::vector<RegionBox> out(boxes.size());
    for (int64_t i = 0; i < n; ++i) {
        const int64_t lo = std::max<int64_t>(0, i - half);
        const int64_t hi = std::min<int64_t>(n - 1, i + half);
        double sx = 0.0, sy = 0.0;
        for (int64_t k = lo; k <= hi; ++k) {
            sx += boxes[static_cast<size_t>(k)].cx;
            sy += boxes[static_cast<size_t>(k)].cy;
        }
        RegionBox b = boxes[static_cast<size_t>(i)];
        b.cx = sx / static_cast<double>(hi - lo + 1);
        b.cy = sy / static_cast<double>(hi - lo + 1);
        clamp_bounds(b, frame_h, frame_w);
        out[static_cast<size_t>(i)] = b;
    }
    return out;
}

template <typename T>
std::vector<Image<T>> crop_region(const std::vector<Image<T>>& frames, const std::vector<RegionBox>& boxes,
                                  int64_t out) {
    if (frames.size() != boxes.size())
        throw DataError("crop_region: " + std::to_string(boxes.size()) + " boxes for " +
                        std::to_string(frames.size()) + " frames");
    if (out <= 0) throw DataError("crop_region: output size must be positive");
    std::vector<Image<T>> result;
    result.reserve(frames.size());
    for (size_t f = 0; f < frames.size(); ++f) {
        const Image<T>& img = frames[f];
        const RegionBox& box = boxes[f];
        // Sample the full (possibly out-of-frame) square; bilinear lookup
        // replicates edges, which realizes the edge padding of clamped boxes.
        const double start_y = round_half_up(box.cy) - static_cast<double>(box.side / 2);
        const double start_x = round_half_up(box.cx) - static_cast<double>(box.side / 2);
        const double step = static_cast<double>(box.side) / static_cast<double>(out);
        Image<T> dst(out, out, img.c);
        for (int64_t y = 0; y < out; ++y) {
            const double sy = start_y + (static_cast<double>(y) + 0.5) * step - 0.5;
            for (int64_t x = 0; x < out; ++x) {
                const double sx = start_x + (static_cast<double>(x) + 0.5) * step - 0.5;
                for (int64_t ch = 0; ch < img.c; ++ch) {
                    const double v = sample_bilinear(img, sy, sx, ch);
                    if constexpr (std::is_floating_point_v<T>)
                        dst.at(y, x, ch) = static_cast<T>(v);
                    else
                        dst.at(y, x, ch) = static_cast<T>(std::clamp(
                            round_half_up(v), 0.0, static_cast<double>(std::numeric_limits<T>::max())));
                }
            }
        }
        result.push_back(std::move(dst));
    }
    return result;
}

template std::vector<Image<uint8_t>> crop_region<uint8_t>(const std::vector<Image<uint8_t>>&,
                                                          const std::vector<RegionBox>&, int64_t);
template std::vector<Image<uint16_t>> crop_region<uint16_t>(const std::vector<Image<uint16_t>>&,
                                                            const std::vector<RegionBox>&, int64_t);
template std::vector<Image<float>> crop_region<float>(const std::vector<Image<float>>&,
                                                      const std::vector<RegionBox>&, int64_t);

}  // namespace sgst
