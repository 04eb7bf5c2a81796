#pragma once

#include <vector>

#include "sgst/clipstore.hpp"
#include "sgst/image.hpp"

namespace sgst {

enum class JointName { Head, LeftWrist, RightWrist };

int joint_index(JointName j);

// Square region centered on a skeleton joint. side = round(scale * frame
// height); the stored bounds are the clamped intersection with the frame and
// cropping pads back to side x side by edge replication.
struct RegionBox {
    double cx = 0, cy = 0;  // joint pixel position (smoothed center)
    int64_t side = 0;
    int64_t top = 0, left = 0;          // clamped bounds
    int64_t height = 0, width = 0;
};

// Throws if the joint is untracked (confidence 0) in this frame.
RegionBox region_box(const SkeletonFrame& sk, JointName joint, double scale, int64_t frame_h, int64_t frame_w);

// One box per frame. Frames where the joint is untracked reuse the nearest
// tracked frame (previous if any, else the first tracked one). Errors only
// when the joint is untracked in every frame.
std::vector<RegionBox> track_region(const std::vector<SkeletonFrame>& skeleton, JointName joint, double scale,
                                    int64_t frame_h, int64_t frame_w);

// Moving average of centers over `window` frames (default 5), truncated at
// clip boundaries. Sides are unchanged; bounds are re-clamped.
std::vector<RegionBox> smooth_boxes(const std::vector<RegionBox>& boxes, int window, int64_t frame_h,
                                    int64_t frame_w);

// Crops each frame to its box (edge replication where the box leaves the
// frame) and resamples bilinearly to out x out.
template <typename T>
std::vector<Image<T>> crop_region(const std::vector<Image<T>>& frames, const std::vector<RegionBox>& boxes,
                                  int64_t out);

}  // namespace sgst
