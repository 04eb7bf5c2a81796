#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sgst/encode.hpp"
#include "sgst/flow.hpp"
#include "sgst/regions.hpp"
#include "sgst/rng.hpp"
#include "sgst/streams.hpp"

using namespace sgst;

namespace {

ImageU16 depth_of(uint16_t v) {
    ImageU16 img(1, 1, 1);
    img.data[0] = v;
    return img;
}

ImageU8 encode_flow_value(float u, float v, double bound) {
    FlowField f{ImageF(1, 1, 1), ImageF(1, 1, 1)};
    f.u.data[0] = u;
    f.v.data[0] = v;
    return encode_flow_3band(f, bound);
}

// Clip with a bright square tracked by the skeleton wrists/head.
ClipRecord make_synthetic_clip(int64_t frames, int64_t h, int64_t w, bool track_all = true) {
    ClipRecord clip;
    clip.clip_id = "synthetic";
    clip.label = 0;
    clip.signer_id = "s0";
    for (int64_t f = 0; f < frames; ++f) {
        ImageU8 rgb(h, w, 3);
        const int64_t cx = w / 4 + f;
        const int64_t cy = h / 2;
        for (int64_t y = std::max<int64_t>(0, cy - 3); y < std::min(h, cy + 3); ++y)
            for (int64_t x = std::max<int64_t>(0, cx - 3); x < std::min(w, cx + 3); ++x) {
                rgb.at(y, x, 0) = 255;
                rgb.at(y, x, 1) = 200;
            }
        clip.rgb.push_back(std::move(rgb));
        ImageU16 depth(h, w, 1);
        for (auto& v : depth.data) v = 2000;
        clip.depth.push_back(std::move(depth));
        SkeletonFrame sk;
        for (auto& j : sk.joints) {
            j.px = static_cast<float>(cx);
            j.py = static_cast<float>(cy);
            j.confidence = track_all ? 1.0f : 0.0f;
        }
        clip.skeleton.push_back(sk);
    }
    return clip;
}

}  // namespace

TEST_CASE("depth encoder reproduces the documented mapping") {
    CHECK(encode_depth_3band(depth_of(500)).data == std::vector<uint8_t>{0, 0, 0});
    CHECK(encode_depth_3band(depth_of(4500)).data == std::vector<uint8_t>{255, 255, 255});
    // 255 * 2000/4000 = 127.5 rounds half-up to 128
    CHECK(encode_depth_3band(depth_of(2500)).data == std::vector<uint8_t>{128, 128, 128});
    // zero depth (untracked) clamps to dmin
    CHECK(encode_depth_3band(depth_of(0)).data == std::vector<uint8_t>{0, 0, 0});
    CHECK(encode_depth_3band(depth_of(9000)).data == std::vector<uint8_t>{255, 255, 255});
}

TEST_CASE("depth encoder rejects an invalid range") {
    CHECK_THROWS_AS(encode_depth_3band(depth_of(100), DepthRange{3000, 3000}), DataError);
}

TEST_CASE("flow encoder reproduces the documented mapping") {
    CHECK(encode_flow_value(0.f, 0.f, 20.0).data == std::vector<uint8_t>{128, 128, 0});
    CHECK(encode_flow_value(20.f, 0.f, 20.0).data == std::vector<uint8_t>{255, 128, 255});
    CHECK(encode_flow_value(-30.f, 0.f, 20.0).data[0] == 0);
    CHECK_THROWS_AS(encode_flow_value(0.f, 0.f, 0.0), DataError);
}

TEST_CASE("flow encoding is monotone in each component inside the clamp") {
    uint8_t prev_u = 0;
    for (int step = 0; step <= 40; ++step) {
        const float u = -20.f + static_cast<float>(step);
        const uint8_t enc = encode_flow_value(u, 0.f, 20.0).data[0];
        CHECK(enc >= prev_u);
        prev_u = enc;
    }
}

TEST_CASE("identical frames give exactly zero flow") {
    Rng rng(8);
    ImageF a(24, 24, 1);
    for (auto& v : a.data) v = static_cast<float>(rng.next_range(0, 255));
    FlowField f = compute_flow_horn_schunck(a, a, {15.0, 50});
    for (float u : f.u.data) CHECK(u == 0.0f);
    for (float v : f.v.data) CHECK(v == 0.0f);
}

TEST_CASE("constant frames give zero flow") {
    ImageF a(16, 16, 1), b(16, 16, 1);
    a.data.assign(a.data.size(), 80.f);
    b.data.assign(b.data.size(), 80.f);
    FlowField f = compute_flow_horn_schunck(a, b);
    for (float u : f.u.data) CHECK(u == 0.0f);
    for (float v : f.v.data) CHECK(v == 0.0f);
}

TEST_CASE("one-pixel translation of a smooth ramp is recovered") {
    const int64_t side = 64;
    ImageF a(side, side, 1), b(side, side, 1);
    for (int64_t y = 0; y < side; ++y)
        for (int64_t x = 0; x < side; ++x) {
            a.at(y, x) = static_cast<float>(4 * x);
            const int64_t xs = std::max<int64_t>(0, x - 1);
            b.at(y, x) = static_cast<float>(4 * xs);
        }
    FlowField f = compute_flow_horn_schunck(a, b, {15.0, 100});
    double su = 0.0, sav = 0.0;
    int64_t count = 0;
    const int64_t margin = 8;
    for (int64_t y = margin; y < side - margin; ++y)
        for (int64_t x = margin; x < side - margin; ++x) {
            su += f.u.at(y, x);
            sav += std::abs(f.v.at(y, x));
            ++count;
        }
    const double mean_u = su / static_cast<double>(count);
    CHECK(mean_u > 0.7);
    CHECK(mean_u < 1.3);
    CHECK(sav / static_cast<double>(count) < 0.2);
}

TEST_CASE("horn-schunck energy is non-increasing across iterations") {
    const int64_t side = 32;
    ImageF a(side, side, 1), b(side, side, 1);
    Rng rng(17);
    for (int64_t y = 0; y < side; ++y)
        for (int64_t x = 0; x < side; ++x) {
            const double v = 100.0 + 50.0 * std::sin(0.3 * static_cast<double>(x)) +
                             30.0 * std::cos(0.25 * static_cast<double>(y));
            a.at(y, x) = static_cast<float>(v);
            b.at(y, x) = static_cast<float>(v + 8.0 * std::sin(0.2 * static_cast<double>(x + y)));
        }
    double prev = horn_schunck_energy(a, b, {ImageF(side, side, 1), ImageF(side, side, 1)}, 15.0);
    for (int iters = 1; iters <= 60; iters += 1) {
        FlowField f = compute_flow_horn_schunck(a, b, {15.0, iters});
        const double e = horn_schunck_energy(a, b, f, 15.0);
        CHECK(e <= prev * (1.0 + 1e-9) + 1e-9);
        prev = e;
    }
}

TEST_CASE("flow dimension mismatch is rejected") {
    ImageF a(8, 8, 1), b(8, 9, 1);
    CHECK_THROWS_AS(compute_flow_horn_schunck(a, b), DataError);
}

TEST_CASE("region box follows the head example") {
    SkeletonFrame sk;
    sk.joints[kJointHead].px = 960;
    sk.joints[kJointHead].py = 200;
    sk.joints[kJointHead].confidence = 1.0f;
    RegionBox box = region_box(sk, JointName::Head, 0.30, 1080, 1920);
    CHECK(box.side == 324);
    CHECK(box.cx == 960);
    CHECK(box.cy == 200);
    CHECK(box.top == 38);
    CHECK(box.left == 798);
    CHECK(box.height == 324);
    CHECK(box.width == 324);
}

TEST_CASE("region box clamps at the frame corner") {
    SkeletonFrame sk;
    sk.joints[kJointWristLeft].confidence = 1.0f;  // px = py = 0
    RegionBox box = region_box(sk, JointName::LeftWrist, 0.25, 1080, 1920);
    CHECK(box.top == 0);
    CHECK(box.left == 0);
    CHECK(box.side == 270);
    CHECK(box.height == 135);  // half the square is off-frame
    CHECK(box.width == 135);
}

TEST_CASE("region tracking holds the last tracked frame") {
    std::vector<SkeletonFrame> track(3);
    track[0].joints[kJointHead] = {0, 0, 0, 100, 50, 1.0f};
    track[1].joints[kJointHead] = {0, 0, 0, 999, 999, 0.0f};  // untracked
    track[2].joints[kJointHead] = {0, 0, 0, 120, 60, 1.0f};
    std::vector<RegionBox> boxes = track_region(track, JointName::Head, 0.3, 200, 300);
    CHECK(boxes[1].cx == 100);
    CHECK(boxes[1].cy == 50);
    CHECK(boxes[2].cx == 120);
}

TEST_CASE("region tracking fails when the joint is never tracked") {
    std::vector<SkeletonFrame> track(4);
    CHECK_THROWS_WITH_AS(track_region(track, JointName::Head, 0.3, 100, 100),
                         doctest::Contains("untracked in every frame"), DataError);
}

TEST_CASE("crop_region is the identity for a full-frame box") {
    ImageU8 img(40, 40, 3);
    Rng rng(23);
    for (auto& v : img.data) v = static_cast<uint8_t>(rng.next_uint(256));
    RegionBox box;
    box.cx = 19.5;
    box.cy = 19.5;
    box.side = 40;
    box.top = 0;
    box.left = 0;
    box.height = 40;
    box.width = 40;
    std::vector<ImageU8> out = crop_region(std::vector<ImageU8>{img}, {box}, 40);
    CHECK(out[0].data == img.data);
}

TEST_CASE("crop_region of a constant frame is constant") {
    ImageU8 img(30, 30, 3);
    img.data.assign(img.data.size(), 77);
    RegionBox box;
    box.cx = 2;
    box.cy = 2;  // heavily clamped: exercises edge padding
    box.side = 20;
    std::vector<ImageU8> out = crop_region(std::vector<ImageU8>{img}, {box}, 16);
    for (uint8_t v : out[0].data) CHECK(v == 77);
}

TEST_CASE("tracked crops stabilize a translating pattern") {
    ClipRecord clip = make_synthetic_clip(10, 48, 64);
    std::vector<RegionBox> boxes = track_region(clip.skeleton, JointName::Head, 0.5, 48, 64);
    std::vector<ImageU8> stabilized = crop_region(clip.rgb, boxes, 24);

    auto mean_diff = [](const std::vector<ImageU8>& frames) {
        double acc = 0.0;
        int64_t n = 0;
        for (size_t f = 1; f < frames.size(); ++f) {
            for (size_t i = 0; i < frames[f].data.size(); ++i)
                acc += std::abs(static_cast<double>(frames[f].data[i]) -
                                static_cast<double>(frames[f - 1].data[i]));
            n += static_cast<int64_t>(frames[f].data.size());
        }
        return acc / static_cast<double>(n);
    };
    CHECK(mean_diff(stabilized) < mean_diff(clip.rgb) + 1e-12);
    CHECK(mean_diff(stabilized) < 0.5 * mean_diff(clip.rgb) + 1e-9);
}

TEST_CASE("stream kind names round-trip") {
    for (StreamKind kind : grid_streams()) CHECK(parse_stream_kind(to_string(kind)) == kind);
    CHECK(parse_stream_kind("face-rgb").modality == Modality::Face);
    CHECK_THROWS_AS(parse_stream_kind("torso-rgb"), UsageError);
    CHECK_THROWS_AS(parse_stream_kind("body-thermal"), UsageError);
}

TEST_CASE("default stream set matches the recognition configuration") {
    std::vector<StreamKind> def = default_streams();
    REQUIRE(def.size() == 6);
    CHECK(def[0] == StreamKind{Modality::Body, Channel::RGB});
    CHECK(def[2] == StreamKind{Modality::Body, Channel::RGBFlow});
    CHECK(def[5] == StreamKind{Modality::Face, Channel::RGB});
}

TEST_CASE("every grid stream builds a 3 x T x patch x patch sample") {
    ClipRecord clip = make_synthetic_clip(9, 40, 56);
    StreamParams params;
    params.temporal_len = 4;
    params.patch = 48;
    params.resize_short = 56;
    params.flow.iters = 8;  // keep the unit test quick
    Rng rng(12);
    ProxyIndexPlan plan = sample_proxy_indices(clip.length(), params.temporal_len, rng);
    for (StreamKind kind : grid_streams()) {
        Tensor<float> sample = make_stream_sample(clip, kind, params, plan, nullptr);
        CHECK(sample.shape == Shape{3, 4, 48, 48});
        CHECK(sample.all_finite());
        for (float v : sample.data) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
    }
}

TEST_CASE("face stream builds too") {
    ClipRecord clip = make_synthetic_clip(6, 40, 56);
    StreamParams params;
    params.temporal_len = 4;
    params.patch = 32;
    params.resize_short = 40;
    Rng rng(13);
    ProxyIndexPlan plan = sample_proxy_indices(clip.length(), params.temporal_len, rng);
    Tensor<float> sample = make_stream_sample(clip, {Modality::Face, Channel::RGB}, params, plan, nullptr);
    CHECK(sample.shape == Shape{3, 4, 32, 32});
}

TEST_CASE("stream samples are deterministic given plan and augment") {
    ClipRecord clip = make_synthetic_clip(8, 40, 56);
    StreamParams params;
    params.temporal_len = 4;
    params.patch = 32;
    params.resize_short = 40;
    Rng rng(14);
    ProxyIndexPlan plan = sample_proxy_indices(clip.length(), params.temporal_len, rng);
    Rng arng(15);
    AugmentSpec aug = draw_augment(40, 56, 32, 10.0, arng);
    Tensor<float> s1 = make_stream_sample(clip, {Modality::Body, Channel::RGB}, params, plan, &aug);
    Tensor<float> s2 = make_stream_sample(clip, {Modality::Body, Channel::RGB}, params, plan, &aug);
    CHECK(s1.data == s2.data);
}

TEST_CASE("precomputed flow feeds flow streams") {
    ClipRecord clip = make_synthetic_clip(6, 32, 32);
    StreamParams params;
    params.temporal_len = 4;
    params.patch = 24;
    params.resize_short = 28;
    params.flow.iters = 10;
    Tensor<float> fields = precompute_clip_flow(clip, Channel::RGB, params);
    CHECK(fields.shape == Shape{6, 32, 32, 2});
    PrecomputedFlow pre{fields};
    Rng rng(16);
    ProxyIndexPlan plan = sample_proxy_indices(clip.length(), params.temporal_len, rng);
    Tensor<float> sample = make_stream_sample(clip, {Modality::Body, Channel::RGBFlow}, params, plan, nullptr, &pre);
    CHECK(sample.shape == Shape{3, 4, 24, 24});
    CHECK(sample.all_finite());
}
