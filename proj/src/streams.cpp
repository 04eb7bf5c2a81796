#include "sgst/streams.hpp"

#include <algorithm>
#include <cmath>

namespace sgst {

std::string to_string(StreamKind kind) {
    std::string m;
    switch (kind.modality) {
        case Modality::Body: m = "body"; break;
        case Modality::LeftHand: m = "left-hand"; break;
        case Modality::RightHand: m = "right-hand"; break;
        case Modality::Face: m = "face"; break;
    }
    switch (kind.channel) {
        case Channel::RGB: return m + "-rgb";
        case Channel::Depth: return m + "-depth";
        case Channel::RGBFlow: return m + "-rgb-flow";
        case Channel::DepthFlow: return m + "-depth-flow";
    }
    return m;
}

StreamKind parse_stream_kind(const std::string& name) {
    StreamKind kind;
    std::string rest;
    if (name.rfind("body-", 0) == 0) {
        kind.modality = Modality::Body;
        rest = name.substr(5);
    } else if (name.rfind("left-hand-", 0) == 0) {
        kind.modality = Modality::LeftHand;
        rest = name.substr(10);
    } else if (name.rfind("right-hand-", 0) == 0) {
        kind.modality = Modality::RightHand;
        rest = name.substr(11);
    } else if (name.rfind("face-", 0) == 0) {
        kind.modality = Modality::Face;
        rest = name.substr(5);
    } else {
        throw UsageError("unknown stream modality in '" + name + "'");
    }
    if (rest == "rgb")
        kind.channel = Channel::RGB;
    else if (rest == "depth")
        kind.channel = Channel::Depth;
    else if (rest == "rgb-flow")
        kind.channel = Channel::RGBFlow;
    else if (rest == "depth-flow")
        kind.channel = Channel::DepthFlow;
    else
        throw UsageError("unknown stream channel in '" + name + "'");
    return kind;
}

std::vector<StreamKind> default_streams() {
    return {
        {Modality::Body, Channel::RGB},      {Modality::Body, Channel::Depth},
        {Modality::Body, Channel::RGBFlow},  {Modality::LeftHand, Channel::RGB},
        {Modality::RightHand, Channel::RGB}, {Modality::Face, Channel::RGB},
    };
}

std::vector<StreamKind> grid_streams() {
    std::vector<StreamKind> out;
    for (Modality m : {Modality::Body, Modality::LeftHand, Modality::RightHand})
        for (Channel c : {Channel::RGB, Channel::Depth, Channel::RGBFlow, Channel::DepthFlow})
            out.push_back({m, c});
    return out;
}

namespace {

std::vector<int64_t> expanded_indices(const ProxyIndexPlan& plan) {
    std::vector<int64_t> idx(plan.indices);
    for (int64_t i = 0; i < plan.pad_count; ++i) idx.push_back(plan.source_len - 1);
    return idx;
}

std::optional<JointName> modality_joint(Modality m) {
    switch (m) {
        case Modality::Body: return std::nullopt;
        case Modality::LeftHand: return JointName::LeftWrist;
        case Modality::RightHand: return JointName::RightWrist;
        case Modality::Face: return JointName::Head;
    }
    return std::nullopt;
}

std::vector<RegionBox> rescale_boxes(const std::vector<RegionBox>& boxes, int64_t from_h, int64_t from_w,
                                     int64_t to_h, int64_t to_w) {
    if (from_h == to_h && from_w == to_w) return boxes;
    const double sy = static_cast<double>(to_h) / static_cast<double>(from_h);
    const double sx = static_cast<double>(to_w) / static_cast<double>(from_w);
    std::vector<RegionBox> out = boxes;
    for (RegionBox& b : out) {
        b.cx *= sx;
        b.cy *= sy;
        b.side = std::max<int64_t>(1, static_cast<int64_t>(round_half_up(static_cast<double>(b.side) * sy)));
    }
    return out;
}

// Region boxes for the proxy-selected skeleton frames, smoothed, in the
// coordinate frame of the given channel dims.
std::vector<RegionBox> proxy_boxes(const ClipRecord& clip, const std::vector<int64_t>& idx, JointName joint,
                                   double scale, const StreamParams& params, int64_t rgb_h, int64_t rgb_w,
                                   int64_t to_h, int64_t to_w) {
    std::vector<SkeletonFrame> sel;
    sel.reserve(idx.size());
    for (int64_t i : idx) sel.push_back(clip.skeleton[static_cast<size_t>(i)]);
    std::vector<RegionBox> boxes = track_region(sel, joint, scale, rgb_h, rgb_w);
    boxes = smooth_boxes(boxes, params.smooth_window, rgb_h, rgb_w);
    return rescale_boxes(boxes, rgb_h, rgb_w, to_h, to_w);
}

// Spatial pipeline for 3-band u8 frames: to short-side size, rotate, crop.
std::vector<ImageU8> to_patches(std::vector<ImageU8> frames, const StreamParams& params, const AugmentSpec* aug) {
    std::vector<ImageU8> out;
    out.reserve(frames.size());
    AugmentSpec eval_spec;
    bool eval_spec_ready = false;
    for (ImageU8& f : frames) {
        ImageU8 sized = resize_short_side(f, params.resize_short);
        if (aug) {
            sized = rotate_about_center(sized, aug->angle_deg);
            out.push_back(random_crop(sized, *aug));
        } else {
            if (!eval_spec_ready) {
                eval_spec = center_augment(sized.h, sized.w, params.patch);
                eval_spec_ready = true;
            }
            out.push_back(random_crop(sized, eval_spec));
        }
    }
    return out;
}

// Flow fields as c=2 float images; geometric transforms also act on the
// vector values: resampling scales them, rotation turns them.
ImageF field_from_tensor(const Tensor<float>& fields, int64_t index) {
    const int64_t h = fields.dim(1), w = fields.dim(2);
    ImageF img(h, w, 2);
    std::copy(fields.ptr() + index * h * w * 2, fields.ptr() + (index + 1) * h * w * 2, img.data.begin());
    return img;
}

ImageF scale_field_vectors(ImageF field, double sx, double sy) {
    for (int64_t i = 0; i < field.pixels(); ++i) {
        field.data[static_cast<size_t>(i * 2 + 0)] *= static_cast<float>(sx);
        field.data[static_cast<size_t>(i * 2 + 1)] *= static_cast<float>(sy);
    }
    return field;
}

ImageF rotate_field(const ImageF& field, double angle_deg) {
    if (angle_deg == 0.0) return field;
    ImageF out = rotate_about_center(field, angle_deg);
    const double theta = angle_deg * 3.14159265358979323846 / 180.0;
    const float ct = static_cast<float>(std::cos(theta));
    const float st = static_cast<float>(std::sin(theta));
    for (int64_t i = 0; i < out.pixels(); ++i) {
        const float u = out.data[static_cast<size_t>(i * 2 + 0)];
        const float v = out.data[static_cast<size_t>(i * 2 + 1)];
        out.data[static_cast<size_t>(i * 2 + 0)] = ct * u + st * v;
        out.data[static_cast<size_t>(i * 2 + 1)] = -st * u + ct * v;
    }
    return out;
}

ImageF resize_field(const ImageF& field, int64_t short_side) {
    const int64_t h0 = field.h, w0 = field.w;
    ImageF sized = resize_short_side(field, short_side);
    const double sx = static_cast<double>(sized.w) / static_cast<double>(w0);
    const double sy = static_cast<double>(sized.h) / static_cast<double>(h0);
    return scale_field_vectors(std::move(sized), sx, sy);
}

Tensor<float> stack_frames(const std::vector<ImageU8>& patches, int64_t patch) {
    const int64_t T = static_cast<int64_t>(patches.size());
    Tensor<float> out({3, T, patch, patch});
    for (int64_t t = 0; t < T; ++t) {
        const ImageU8& img = patches[static_cast<size_t>(t)];
        if (img.h != patch || img.w != patch || img.c != 3)
            throw NumericError("stream frame has unexpected size");
        for (int64_t c = 0; c < 3; ++c) {
            float* dst = out.ptr() + (c * T + t) * patch * patch;
            for (int64_t i = 0; i < patch * patch; ++i)
                dst[i] = static_cast<float>(img.data[static_cast<size_t>(i * 3 + c)]) / 255.0f;
        }
    }
    return out;
}

}  // namespace

std::pair<int64_t, int64_t> pre_crop_dims(const ClipRecord& clip, StreamKind kind, const StreamParams& params) {
    if (kind.modality != Modality::Body) return {params.resize_short, params.resize_short};
    const bool depth_source = kind.channel == Channel::Depth || kind.channel == Channel::DepthFlow;
    const int64_t h = depth_source ? clip.depth[0].h : clip.rgb[0].h;
    const int64_t w = depth_source ? clip.depth[0].w : clip.rgb[0].w;
    if (h <= w)
        return {params.resize_short,
                std::max<int64_t>(1, static_cast<int64_t>(round_half_up(
                                         static_cast<double>(w) * static_cast<double>(params.resize_short) /
                                         static_cast<double>(h))))};
    return {std::max<int64_t>(1, static_cast<int64_t>(round_half_up(static_cast<double>(h) *
                                                                    static_cast<double>(params.resize_short) /
                                                                    static_cast<double>(w)))),
            params.resize_short};
}

Tensor<float> precompute_clip_flow(const ClipRecord& clip, Channel source, const StreamParams& params) {
    if (source != Channel::RGB && source != Channel::Depth)
        throw UsageError("flow precomputation sources are rgb or depth");
    const int64_t n = clip.length();
    if (n < 1) throw DataError("empty clip");
    std::vector<ImageF> gray;
    gray.reserve(static_cast<size_t>(n));
    for (int64_t f = 0; f < n; ++f) {
        if (source == Channel::RGB) {
            gray.push_back(to_gray_rec601(clip.rgb[static_cast<size_t>(f)]));
        } else {
            ImageU8 bands = encode_depth_3band(clip.depth[static_cast<size_t>(f)], params.depth_range);
            gray.push_back(to_gray_rec601(bands));
        }
    }
    const int64_t h = gray[0].h, w = gray[0].w;
    Tensor<float> fields({n, h, w, 2});
    for (int64_t f = 0; f < n; ++f) {
        const int64_t a = f < n - 1 ? f : std::max<int64_t>(0, n - 2);
        const int64_t b = f < n - 1 ? f + 1 : n - 1;
        FlowField flow = a == b ? FlowField{ImageF(h, w, 1), ImageF(h, w, 1)}
                                : compute_flow_horn_schunck(gray[static_cast<size_t>(a)],
                                                            gray[static_cast<size_t>(b)], params.flow);
        float* dst = fields.ptr() + f * h * w * 2;
        for (int64_t i = 0; i < h * w; ++i) {
            dst[i * 2 + 0] = flow.u.data[static_cast<size_t>(i)];
            dst[i * 2 + 1] = flow.v.data[static_cast<size_t>(i)];
        }
    }
    return fields;
}

Tensor<float> make_stream_sample(const ClipRecord& clip, StreamKind kind, const StreamParams& params,
                                 const ProxyIndexPlan& plan, const AugmentSpec* aug,
                                 const PrecomputedFlow* flow) {
    if (clip.length() != plan.source_len)
        throw DataError(clip.clip_id + ": proxy plan drawn for " + std::to_string(plan.source_len) +
                        " frames, clip has " + std::to_string(clip.length()));
    const std::vector<int64_t> idx = expanded_indices(plan);
    const int64_t rgb_h = clip.rgb[0].h, rgb_w = clip.rgb[0].w;
    const std::optional<JointName> joint = modality_joint(kind.modality);
    const double region_scale = kind.modality == Modality::Face ? params.face_scale : params.hand_scale;

    const bool is_flow = kind.channel == Channel::RGBFlow || kind.channel == Channel::DepthFlow;

    if (is_flow && flow) {
        const Tensor<float>& fields = flow->fields;
        if (fields.ndim() != 4 || fields.dim(0) != clip.length() || fields.dim(3) != 2)
            throw DataError(clip.clip_id + ": precomputed flow must be N x H x W x 2 with N matching the clip, got " +
                            shape_str(fields.shape));
        std::vector<ImageF> sel;
        sel.reserve(idx.size());
        for (int64_t i : idx) sel.push_back(field_from_tensor(fields, i));
        std::vector<ImageF> sized;
        sized.reserve(sel.size());
        if (joint) {
            std::vector<RegionBox> boxes =
                proxy_boxes(clip, idx, *joint, region_scale, params, rgb_h, rgb_w, sel[0].h, sel[0].w);
            std::vector<ImageF> cropped = crop_region(sel, boxes, params.resize_short);
            for (size_t f = 0; f < cropped.size(); ++f) {
                const double s = static_cast<double>(params.resize_short) / static_cast<double>(boxes[f].side);
                sized.push_back(scale_field_vectors(std::move(cropped[f]), s, s));
            }
        } else {
            for (ImageF& f : sel) sized.push_back(resize_field(f, params.resize_short));
        }
        std::vector<ImageU8> patches;
        patches.reserve(sized.size());
        AugmentSpec eval_spec;
        bool eval_ready = false;
        for (ImageF& f : sized) {
            ImageF geo = aug ? rotate_field(f, aug->angle_deg) : f;
            ImageF patch_field;
            if (aug) {
                patch_field = random_crop(geo, *aug);
            } else {
                if (!eval_ready) {
                    eval_spec = center_augment(geo.h, geo.w, params.patch);
                    eval_ready = true;
                }
                patch_field = random_crop(geo, eval_spec);
            }
            FlowField ff{ImageF(patch_field.h, patch_field.w, 1), ImageF(patch_field.h, patch_field.w, 1)};
            for (int64_t i = 0; i < patch_field.pixels(); ++i) {
                ff.u.data[static_cast<size_t>(i)] = patch_field.data[static_cast<size_t>(i * 2 + 0)];
                ff.v.data[static_cast<size_t>(i)] = patch_field.data[static_cast<size_t>(i * 2 + 1)];
            }
            patches.push_back(encode_flow_3band(ff, params.flow_clamp));
        }
        return stack_frames(patches, params.patch);
    }

    // u8 source frames for the requested channel (flow without precomputed
    // fields starts from these too).
    const bool depth_source = kind.channel == Channel::Depth || kind.channel == Channel::DepthFlow;
    std::vector<ImageU8> base;
    base.reserve(idx.size());
    for (int64_t i : idx) {
        if (depth_source)
            base.push_back(encode_depth_3band(clip.depth[static_cast<size_t>(i)], params.depth_range));
        else
            base.push_back(clip.rgb[static_cast<size_t>(i)]);
    }

    std::vector<ImageU8> sized;
    if (joint) {
        std::vector<RegionBox> boxes =
            proxy_boxes(clip, idx, *joint, region_scale, params, rgb_h, rgb_w, base[0].h, base[0].w);
        sized = crop_region(base, boxes, params.resize_short);
        AugmentSpec eval_spec;
        bool eval_ready = false;
        std::vector<ImageU8> patches;
        patches.reserve(sized.size());
        for (ImageU8& f : sized) {
            if (aug) {
                ImageU8 rot = rotate_about_center(f, aug->angle_deg);
                patches.push_back(random_crop(rot, *aug));
            } else {
                if (!eval_ready) {
                    eval_spec = center_augment(f.h, f.w, params.patch);
                    eval_ready = true;
                }
                patches.push_back(random_crop(f, eval_spec));
            }
        }
        sized = std::move(patches);
    } else {
        sized = to_patches(std::move(base), params, aug);
    }

    if (!is_flow) return stack_frames(sized, params.patch);

    // Horn-Schunck over consecutive proxy patches; T-1 fields, first one
    // duplicated to keep all streams the same length.
    const int64_t T = static_cast<int64_t>(sized.size());
    std::vector<ImageF> gray;
    gray.reserve(sized.size());
    for (const ImageU8& f : sized) gray.push_back(to_gray_rec601(f));
    std::vector<ImageU8> patches;
    patches.reserve(sized.size());
    std::vector<FlowField> fields;
    fields.reserve(static_cast<size_t>(std::max<int64_t>(T - 1, 1)));
    if (T == 1) {
        fields.push_back(FlowField{ImageF(gray[0].h, gray[0].w, 1), ImageF(gray[0].h, gray[0].w, 1)});
    } else {
        for (int64_t t = 0; t + 1 < T; ++t)
            fields.push_back(compute_flow_horn_schunck(gray[static_cast<size_t>(t)],
                                                       gray[static_cast<size_t>(t + 1)], params.flow));
    }
    patches.push_back(encode_flow_3band(fields[0], params.flow_clamp));
    for (const FlowField& f : fields) patches.push_back(encode_flow_3band(f, params.flow_clamp));
    patches.resize(static_cast<size_t>(T), patches.back());
    return stack_frames(patches, params.patch);
}

}  // namespace sgst
