#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "sgst/clip_tensor_file.hpp"
#include "sgst/image.hpp"
#include "sgst/manifest.hpp"

namespace sgst {

// Kinect V2 joint order; the engine only addresses these three.
constexpr int kJointCount = 25;
constexpr int kJointHead = 3;
constexpr int kJointWristLeft = 6;
constexpr int kJointWristRight = 10;

struct SkeletonJoint {
    float x = 0, y = 0, z = 0;   // camera space, meters
    float px = 0, py = 0;        // pixel coordinates in the RGB frame
    float confidence = 0;        // 0 = untracked
};

struct SkeletonFrame {
    std::array<SkeletonJoint, kJointCount> joints;
};

// One annotated sign clip with its aligned channels. Depth and skeleton are
// frame-index aligned to RGB.
struct ClipRecord {
    std::string clip_id;
    std::string gloss;
    int label = -1;
    SignCategory category = SignCategory::Other;
    std::string signer_id;
    std::vector<ImageU8> rgb;
    std::vector<ImageU16> depth;
    std::vector<SkeletonFrame> skeleton;

    int64_t length() const { return static_cast<int64_t>(rgb.size()); }
};

// Per-video frame access used by clip extraction. Channels a video does not
// provide report frame_count 0 and extraction fails only for annotations
// that need them.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual int64_t frame_count(const std::string& channel) const = 0;
    virtual ImageU8 rgb_frame(int64_t index) const = 0;
    virtual ImageU16 depth_frame(int64_t index) const = 0;
    virtual SkeletonFrame skeleton_frame(int64_t index) const = 0;
};

// Reads "rgb"/"depth"/"skeleton" channels out of packed tensor files
// (u8 [N,H,W,3], u16 [N,H,W], f32 [N,25,6]).
class PackedFrameSource : public FrameSource {
public:
    // Paths resolve from the manifest's channel map, falling back to
    // "<dir>/<video_id>.<channel>.sgt". Missing files mean a missing channel.
    PackedFrameSource(const VideoManifest& manifest, const std::string& dir);

    int64_t frame_count(const std::string& channel) const override;
    ImageU8 rgb_frame(int64_t index) const override;
    ImageU16 depth_frame(int64_t index) const override;
    SkeletonFrame skeleton_frame(int64_t index) const override;

private:
    std::shared_ptr<Tensor<uint8_t>> rgb_;
    std::shared_ptr<Tensor<uint16_t>> depth_;
    std::shared_ptr<Tensor<float>> skeleton_;
};

// Reads per-frame image files "frame_%06d.ppm" (RGB) and "frame_%06d.pgm"
// (16-bit depth) from channel directories; skeleton still comes packed.
class DirFrameSource : public FrameSource {
public:
    DirFrameSource(const VideoManifest& manifest, const std::string& dir);

    int64_t frame_count(const std::string& channel) const override;
    ImageU8 rgb_frame(int64_t index) const override;
    ImageU16 depth_frame(int64_t index) const override;
    SkeletonFrame skeleton_frame(int64_t index) const override;

private:
    std::string rgb_dir_;
    std::string depth_dir_;
    int64_t rgb_count_ = 0;
    int64_t depth_count_ = 0;
    std::shared_ptr<Tensor<float>> skeleton_;
};

// One ClipRecord per annotation; clip length N = end - start. Fails if any
// needed channel lacks frames for an interval.
std::vector<ClipRecord> extract_clips(const VideoManifest& manifest, const FrameSource& frames);

// Clip persistence: "<clip_id>.rgb.sgt", "<clip_id>.depth.sgt",
// "<clip_id>.skel.sgt" plus a row in the store index.
void save_clip(const std::string& dir, const ClipRecord& clip);
ClipRecord load_clip(const std::string& dir, const std::string& clip_id, const std::string& gloss, int label,
                     SignCategory category, const std::string& signer_id);

// Index of extracted clips: header+rows CSV "clip_id,gloss,label,category,signer_id,frames".
struct ClipIndexRow {
    std::string clip_id;
    std::string gloss;
    int label = -1;
    SignCategory category = SignCategory::Other;
    std::string signer_id;
    int64_t frames = 0;
};

void save_clip_index(const std::string& path, const std::vector<ClipIndexRow>& rows,
                     const std::string& provenance_header);
std::vector<ClipIndexRow> load_clip_index(const std::string& path);

// Loads every clip listed in "<dir>/clips.csv".
std::vector<ClipRecord> load_clip_store(const std::string& dir);

// Walks "<videos_dir>/*.manifest" and extracts every annotated clip, picking
// packed or per-frame sources by what each manifest's channels point at.
std::vector<ClipRecord> extract_dataset_clips(const std::string& videos_dir);

// Skeleton (de)serialization helpers shared with the synthetic generator.
Tensor<float> skeleton_to_tensor(const std::vector<SkeletonFrame>& frames);
std::vector<SkeletonFrame> tensor_to_skeleton(const Tensor<float>& t);

}  // namespace sgst
