#pragma once

#include "sgst/flow.hpp"
#include "sgst/image.hpp"

namespace sgst {

// Depth range used when a clamp window is not configured; Kinect V2 working
// range in millimeters.
struct DepthRange {
    uint16_t min_mm = 500;
    uint16_t max_mm = 4500;
};

// Maps millimeter depth onto three identical u8 bands:
//   round_half_up(255 * (clamp(d, dmin, dmax) - dmin) / (dmax - dmin)).
// Untracked zero-depth pixels clamp to dmin and therefore encode as 0.
ImageU8 encode_depth_3band(const ImageU16& depth, DepthRange range = {});

// Stacks x-component, y-component and magnitude of the flow as three bands:
//   band0 = round_half_up(255 * (clamp(u, -B, B) + B) / (2B))
//   band1 = same for v
//   band2 = round_half_up(255 * clamp(sqrt(u^2+v^2), 0, B) / B)
ImageU8 encode_flow_3band(const FlowField& flow, double clamp_bound = 20.0);

}  // namespace sgst
