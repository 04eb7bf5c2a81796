#include "sgst/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "sgst/clipstore.hpp"
#include "sgst/manifest.hpp"
#include "sgst/rng.hpp"

namespace fs = std::filesystem;

namespace sgst {

namespace {

struct Segment {
    int class_id;
    int64_t start, end;
};

void paint_frame(ImageU8& rgb, ImageU16& depth, SkeletonFrame& skel, double progress, int class_id, int classes,
                 int signer, Rng& noise) {
    const int64_t h = rgb.h, w = rgb.w;
    const uint8_t bg = static_cast<uint8_t>(30 + 8 * (signer % 4));
    for (int64_t i = 0; i < h * w; ++i) {
        const uint8_t n = static_cast<uint8_t>(noise.next_uint(12));
        rgb.data[static_cast<size_t>(i * 3 + 0)] = static_cast<uint8_t>(bg + n);
        rgb.data[static_cast<size_t>(i * 3 + 1)] = static_cast<uint8_t>(bg + n);
        rgb.data[static_cast<size_t>(i * 3 + 2)] = static_cast<uint8_t>(bg + n);
        depth.data[static_cast<size_t>(i)] = static_cast<uint16_t>(2600 + noise.next_uint(40));
    }

    // blob sweeps through the frame along a class-specific direction,
    // carrying stripes of the same orientation so tracked crops stay
    // class-discriminative even after the motion is stabilized away
    const double angle = 2.0 * 3.14159265358979323846 * static_cast<double>(class_id) /
                         static_cast<double>(std::max(classes, 2));
    const double dx = std::cos(angle), dy = std::sin(angle);
    const double span = 0.55 * static_cast<double>(std::min(h, w));
    const double cx = static_cast<double>(w) / 2.0 + (progress - 0.5) * span * dx;
    const double cy = static_cast<double>(h) / 2.0 + (progress - 0.5) * span * dy;
    const int64_t radius = std::max<int64_t>(2, std::min(h, w) / 6);
    for (int64_t y = std::max<int64_t>(0, static_cast<int64_t>(cy) - radius);
         y <= std::min<int64_t>(h - 1, static_cast<int64_t>(cy) + radius); ++y)
        for (int64_t x = std::max<int64_t>(0, static_cast<int64_t>(cx) - radius);
             x <= std::min<int64_t>(w - 1, static_cast<int64_t>(cx) + radius); ++x) {
            const double rx = static_cast<double>(x) - cx;
            const double ry = static_cast<double>(y) - cy;
            if (rx * rx + ry * ry > static_cast<double>(radius * radius)) continue;
            const double stripe = std::sin(2.2 * (rx * dx + ry * dy));
            rgb.at(y, x, 0) = static_cast<uint8_t>(215 + 40 * stripe * 0.5);
            rgb.at(y, x, 1) = static_cast<uint8_t>(140 + 20 * (class_id % 3));
            rgb.at(y, x, 2) = static_cast<uint8_t>(90 + 60 * (stripe > 0 ? 1 : 0));
            depth.at(y, x) = static_cast<uint16_t>(1800 + 120 * (stripe > 0 ? 1 : 0));
        }

    for (auto& j : skel.joints) j = SkeletonJoint{};
    auto set_joint = [&](int idx, double px, double py) {
        SkeletonJoint& j = skel.joints[static_cast<size_t>(idx)];
        j.px = static_cast<float>(std::clamp(px, 0.0, static_cast<double>(w - 1)));
        j.py = static_cast<float>(std::clamp(py, 0.0, static_cast<double>(h - 1)));
        j.z = 2.0f;
        j.confidence = 1.0f;
    };
    set_joint(kJointHead, static_cast<double>(w) / 2.0, static_cast<double>(h) / 5.0);
    set_joint(kJointWristLeft, cx - radius, cy);
    set_joint(kJointWristRight, cx + radius, cy);
}

}  // namespace

void generate_synth_dataset(const std::string& root, const SynthSpec& spec) {
    if (spec.classes < 2) throw DataError("synthetic dataset needs at least two classes");
    if (spec.signers < 2) throw DataError("synthetic dataset needs at least two signers for splitting");
    if (spec.min_frames < 4 || spec.max_frames < spec.min_frames)
        throw DataError("bad frame count range for synthetic clips");
    const fs::path videos = fs::path(root) / "videos";
    fs::create_directories(videos);

    Rng rng(spec.seed);

    // deal clips round-robin over signers, cycling classes within each
    // signer's hand so signer and class stay uncorrelated
    const int total_clips = spec.classes * spec.clips_per_class;
    std::vector<std::vector<int>> per_signer(static_cast<size_t>(spec.signers));
    for (int i = 0; i < total_clips; ++i)
        per_signer[static_cast<size_t>(i % spec.signers)].push_back((i / spec.signers) % spec.classes);

    for (int s = 0; s < spec.signers; ++s) {
        const std::string video_id = "synth" + std::to_string(s);
        const std::string signer_id = "signer" + std::to_string(s);
        Rng vrng = rng.fork("video", static_cast<uint64_t>(s));

        std::vector<Segment> segments;
        int64_t cursor = 0;
        for (int class_id : per_signer[static_cast<size_t>(s)]) {
            const int64_t len = spec.min_frames +
                                static_cast<int64_t>(vrng.next_uint(static_cast<uint32_t>(
                                    spec.max_frames - spec.min_frames + 1)));
            const int64_t gap = 1 + vrng.next_uint(3);
            segments.push_back({class_id, cursor, cursor + len});
            cursor += len + gap;
        }
        const int64_t frames = cursor;

        Tensor<uint8_t> rgb({frames, spec.frame_h, spec.frame_w, 3});
        Tensor<uint16_t> depth({frames, spec.frame_h, spec.frame_w});
        std::vector<SkeletonFrame> skeleton(static_cast<size_t>(frames));

        Rng noise = vrng.fork("noise");
        ImageU8 frame_rgb(spec.frame_h, spec.frame_w, 3);
        ImageU16 frame_depth(spec.frame_h, spec.frame_w, 1);
        size_t seg_at = 0;
        for (int64_t f = 0; f < frames; ++f) {
            while (seg_at < segments.size() && f >= segments[seg_at].end) ++seg_at;
            int class_id = 0;
            double progress = 0.5;
            if (seg_at < segments.size() && f >= segments[seg_at].start) {
                const Segment& seg = segments[seg_at];
                class_id = seg.class_id;
                progress = static_cast<double>(f - seg.start) / static_cast<double>(seg.end - seg.start - 1);
            }
            SkeletonFrame skel;
            paint_frame(frame_rgb, frame_depth, skel, progress, class_id, spec.classes, s, noise);
            std::copy(frame_rgb.data.begin(), frame_rgb.data.end(),
                      rgb.data.begin() + f * spec.frame_h * spec.frame_w * 3);
            std::copy(frame_depth.data.begin(), frame_depth.data.end(),
                      depth.data.begin() + f * spec.frame_h * spec.frame_w);
            skeleton[static_cast<size_t>(f)] = skel;
        }

        save_clip_tensor((videos / (video_id + ".rgb.sgt")).string(), rgb);
        save_clip_tensor((videos / (video_id + ".depth.sgt")).string(), depth);
        save_clip_tensor((videos / (video_id + ".skeleton.sgt")).string(), skeleton_to_tensor(skeleton));

        VideoManifest manifest;
        manifest.video_id = video_id;
        manifest.signer_id = signer_id;
        manifest.fps = 30.0;
        manifest.rgb_h = spec.frame_h;
        manifest.rgb_w = spec.frame_w;
        manifest.depth_h = spec.frame_h;
        manifest.depth_w = spec.frame_w;
        manifest.frame_count = frames;
        for (const Segment& seg : segments) {
            Annotation a;
            a.gloss = "SHAPE" + std::to_string(seg.class_id);
            a.class_id = seg.class_id;
            a.category = static_cast<SignCategory>(seg.class_id % 7);
            a.start_frame = seg.start;
            a.end_frame = seg.end;
            a.signer_id = signer_id;
            manifest.annotations.push_back(std::move(a));
        }
        std::ofstream mf(videos / (video_id + ".manifest"));
        if (!mf) throw DataError("cannot write manifest for " + video_id);
        mf << format_manifest(manifest);
    }
}

}  // namespace sgst
