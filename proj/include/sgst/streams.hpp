#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgst/clipstore.hpp"
#include "sgst/encode.hpp"
#include "sgst/flow.hpp"
#include "sgst/regions.hpp"
#include "sgst/sampler.hpp"
#include "sgst/tensor.hpp"

namespace sgst {

enum class Modality { Body, LeftHand, RightHand, Face };
enum class Channel { RGB, Depth, RGBFlow, DepthFlow };

// One (modality, channel) pair with its own trained network.
struct StreamKind {
    Modality modality = Modality::Body;
    Channel channel = Channel::RGB;

    bool operator==(const StreamKind&) const = default;
};

std::string to_string(StreamKind kind);
// Names like "body-rgb", "left-hand-depth-flow", "face-rgb".
StreamKind parse_stream_kind(const std::string& name);

// The default stream set: body RGB/depth/RGB-flow, both hands RGB, face RGB.
std::vector<StreamKind> default_streams();

// The full 12-stream grid: {body, left-hand, right-hand} x 4 channels.
std::vector<StreamKind> grid_streams();

struct StreamParams {
    int64_t temporal_len = 16;    // T
    int64_t patch = 112;          // final square side
    int64_t resize_short = 128;   // pre-crop short side
    double rotate_max_deg = 10.0;
    FlowParams flow;
    double flow_clamp = 20.0;     // B
    DepthRange depth_range;
    double hand_scale = 0.25;
    double face_scale = 0.30;
    int smooth_window = 5;
};

// Optional per-clip precomputed flow, f32 [N, H, W, 2] with entry i holding
// the field from frame i to i+1 (last entry duplicated). When absent, flow
// channels run Horn-Schunck on consecutive proxy frames.
struct PrecomputedFlow {
    Tensor<float> fields;
};

// Builds the 3 x T x patch x patch f32 network input for one clip and
// stream. `aug` null means evaluation: center crop, no rotation. Pixel
// levels scale to [0, 1].
Tensor<float> make_stream_sample(const ClipRecord& clip, StreamKind kind, const StreamParams& params,
                                 const ProxyIndexPlan& plan, const AugmentSpec* aug,
                                 const PrecomputedFlow* flow = nullptr);

// Per-clip flow precomputation over original consecutive frames; the last
// field duplicates so the tensor has one entry per frame.
Tensor<float> precompute_clip_flow(const ClipRecord& clip, Channel source, const StreamParams& params);

// Frame size entering the rotate+crop stage for this clip and stream:
// regions give a resize_short square, body frames keep their aspect after
// the short-side resize. Augment offsets must be drawn for these dims.
std::pair<int64_t, int64_t> pre_crop_dims(const ClipRecord& clip, StreamKind kind, const StreamParams& params);

}  // namespace sgst
