#pragma once

#include <cstdint>
#include <string>

namespace sgst {

// Moving-shape dataset: one bright blob per sign clip travelling along a
// class-specific direction over a textured background. RGB, depth (blob
// nearer than background) and skeleton (wrists riding the blob, head fixed)
// all carry the class signal, so every stream kind is learnable.
struct SynthSpec {
    int classes = 3;
    int clips_per_class = 20;
    int signers = 4;
    int64_t frame_h = 32;
    int64_t frame_w = 32;
    int64_t min_frames = 20;
    int64_t max_frames = 40;
    uint64_t seed = 1;
};

// Writes "<root>/videos/<video_id>.manifest" plus packed rgb/depth/skeleton
// channels, one video per signer covering that signer's share of the clips.
void generate_synth_dataset(const std::string& root, const SynthSpec& spec);

}  // namespace sgst
