#include "sgst/clipstore.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace sgst {

namespace {

std::string channel_path(const VideoManifest& m, const std::string& dir, const std::string& channel) {
    auto it = m.channel_paths.find(channel);
    std::string p = it != m.channel_paths.end() ? it->second : m.video_id + "." + channel + ".sgt";
    fs::path fp(p);
    if (fp.is_relative()) fp = fs::path(dir) / fp;
    return fp.string();
}

std::string frame_file(const std::string& dir, int64_t index, const char* ext) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06lld.%s", static_cast<long long>(index), ext);
    return (fs::path(dir) / name).string();
}

int64_t count_frames(const std::string& dir, const char* ext) {
    int64_t n = 0;
    while (fs::exists(frame_file(dir, n, ext))) ++n;
    return n;
}

}  // namespace

Tensor<float> skeleton_to_tensor(const std::vector<SkeletonFrame>& frames) {
    if (frames.empty()) throw DataError("cannot serialize an empty skeleton track");
    Tensor<float> t({static_cast<int64_t>(frames.size()), kJointCount, 6});
    float* p = t.ptr();
    for (const SkeletonFrame& f : frames)
        for (const SkeletonJoint& j : f.joints) {
            *p++ = j.x;
            *p++ = j.y;
            *p++ = j.z;
            *p++ = j.px;
            *p++ = j.py;
            *p++ = j.confidence;
        }
    return t;
}

std::vector<SkeletonFrame> tensor_to_skeleton(const Tensor<float>& t) {
    if (t.ndim() != 3 || t.dim(1) != kJointCount || t.dim(2) != 6)
        throw DataError("skeleton tensor must be N x 25 x 6, got " + shape_str(t.shape));
    std::vector<SkeletonFrame> frames(static_cast<size_t>(t.dim(0)));
    const float* p = t.ptr();
    for (SkeletonFrame& f : frames)
        for (SkeletonJoint& j : f.joints) {
            j.x = *p++;
            j.y = *p++;
            j.z = *p++;
            j.px = *p++;
            j.py = *p++;
            j.confidence = *p++;
        }
    return frames;
}

PackedFrameSource::PackedFrameSource(const VideoManifest& manifest, const std::string& dir) {
    const std::string rgb_path = channel_path(manifest, dir, "rgb");
    const std::string depth_path = channel_path(manifest, dir, "depth");
    const std::string skel_path = channel_path(manifest, dir, "skeleton");
    if (fs::exists(rgb_path)) {
        rgb_ = std::make_shared<Tensor<uint8_t>>(load_clip_tensor<uint8_t>(rgb_path));
        if (rgb_->ndim() != 4 || rgb_->dim(3) != 3)
            throw DataError(rgb_path + ": rgb channel must be N x H x W x 3, got " + shape_str(rgb_->shape));
    }
    if (fs::exists(depth_path)) {
        depth_ = std::make_shared<Tensor<uint16_t>>(load_clip_tensor<uint16_t>(depth_path));
        if (depth_->ndim() != 3)
            throw DataError(depth_path + ": depth channel must be N x H x W, got " + shape_str(depth_->shape));
    }
    if (fs::exists(skel_path)) {
        skeleton_ = std::make_shared<Tensor<float>>(load_clip_tensor<float>(skel_path));
        if (skeleton_->ndim() != 3 || skeleton_->dim(1) != kJointCount || skeleton_->dim(2) != 6)
            throw DataError(skel_path + ": skeleton channel must be N x 25 x 6, got " +
                            shape_str(skeleton_->shape));
    }
}

int64_t PackedFrameSource::frame_count(const std::string& channel) const {
    if (channel == "rgb") return rgb_ ? rgb_->dim(0) : 0;
    if (channel == "depth") return depth_ ? depth_->dim(0) : 0;
    if (channel == "skeleton") return skeleton_ ? skeleton_->dim(0) : 0;
    return 0;
}

ImageU8 PackedFrameSource::rgb_frame(int64_t index) const {
    if (!rgb_ || index >= rgb_->dim(0)) throw DataError("rgb frame " + std::to_string(index) + " unavailable");
    const int64_t h = rgb_->dim(1), w = rgb_->dim(2);
    ImageU8 img(h, w, 3);
    std::memcpy(img.data.data(), rgb_->ptr() + index * h * w * 3, static_cast<size_t>(h * w * 3));
    return img;
}

ImageU16 PackedFrameSource::depth_frame(int64_t index) const {
    if (!depth_ || index >= depth_->dim(0)) throw DataError("depth frame " + std::to_string(index) + " unavailable");
    const int64_t h = depth_->dim(1), w = depth_->dim(2);
    ImageU16 img(h, w, 1);
    std::memcpy(img.data.data(), depth_->ptr() + index * h * w, static_cast<size_t>(h * w) * 2);
    return img;
}

SkeletonFrame PackedFrameSource::skeleton_frame(int64_t index) const {
    if (!skeleton_ || index >= skeleton_->dim(0))
        throw DataError("skeleton frame " + std::to_string(index) + " unavailable");
    SkeletonFrame f;
    const float* p = skeleton_->ptr() + index * kJointCount * 6;
    for (SkeletonJoint& j : f.joints) {
        j.x = *p++;
        j.y = *p++;
        j.z = *p++;
        j.px = *p++;
        j.py = *p++;
        j.confidence = *p++;
    }
    return f;
}

DirFrameSource::DirFrameSource(const VideoManifest& manifest, const std::string& dir) {
    rgb_dir_ = channel_path(manifest, dir, "rgb");
    depth_dir_ = channel_path(manifest, dir, "depth");
    if (fs::is_directory(rgb_dir_)) rgb_count_ = count_frames(rgb_dir_, "ppm");
    if (fs::is_directory(depth_dir_)) depth_count_ = count_frames(depth_dir_, "pgm");
    const std::string skel_path = channel_path(manifest, dir, "skeleton");
    if (fs::exists(skel_path) && !fs::is_directory(skel_path))
        skeleton_ = std::make_shared<Tensor<float>>(load_clip_tensor<float>(skel_path));
}

int64_t DirFrameSource::frame_count(const std::string& channel) const {
    if (channel == "rgb") return rgb_count_;
    if (channel == "depth") return depth_count_;
    if (channel == "skeleton") return skeleton_ ? skeleton_->dim(0) : 0;
    return 0;
}

ImageU8 DirFrameSource::rgb_frame(int64_t index) const {
    if (index >= rgb_count_) throw DataError("rgb frame " + std::to_string(index) + " unavailable");
    return read_ppm(frame_file(rgb_dir_, index, "ppm"));
}

ImageU16 DirFrameSource::depth_frame(int64_t index) const {
    if (index >= depth_count_) throw DataError("depth frame " + std::to_string(index) + " unavailable");
    return read_pgm16(frame_file(depth_dir_, index, "pgm"));
}

SkeletonFrame DirFrameSource::skeleton_frame(int64_t index) const {
    if (!skeleton_ || index >= skeleton_->dim(0))
        throw DataError("skeleton frame " + std::to_string(index) + " unavailable");
    SkeletonFrame f;
    const float* p = skeleton_->ptr() + index * kJointCount * 6;
    for (SkeletonJoint& j : f.joints) {
        j.x = *p++;
        j.y = *p++;
        j.z = *p++;
        j.px = *p++;
        j.py = *p++;
        j.confidence = *p++;
    }
    return f;
}

std::vector<ClipRecord> extract_clips(const VideoManifest& manifest, const FrameSource& frames) {
    std::vector<ClipRecord> clips;
    clips.reserve(manifest.annotations.size());
    for (size_t i = 0; i < manifest.annotations.size(); ++i) {
        const Annotation& a = manifest.annotations[i];
        for (const char* channel : {"rgb", "depth", "skeleton"}) {
            const int64_t have = frames.frame_count(channel);
            if (a.end_frame > have)
                throw DataError(manifest.video_id + ": annotation '" + a.gloss + "' [" +
                                std::to_string(a.start_frame) + ", " + std::to_string(a.end_frame) +
                                ") needs frames the '" + channel + "' channel does not have (" +
                                std::to_string(have) + " frames)");
        }
        ClipRecord clip;
        clip.clip_id = manifest.video_id + "_a" + std::to_string(i) + "_" + a.gloss;
        clip.gloss = a.gloss;
        clip.label = a.class_id;
        clip.category = a.category;
        clip.signer_id = a.signer_id;
        const int64_t n = a.end_frame - a.start_frame;
        clip.rgb.reserve(static_cast<size_t>(n));
        clip.depth.reserve(static_cast<size_t>(n));
        clip.skeleton.reserve(static_cast<size_t>(n));
        for (int64_t f = a.start_frame; f < a.end_frame; ++f) {
            clip.rgb.push_back(frames.rgb_frame(f));
            clip.depth.push_back(frames.depth_frame(f));
            clip.skeleton.push_back(frames.skeleton_frame(f));
        }
        clips.push_back(std::move(clip));
    }
    return clips;
}

void save_clip(const std::string& dir, const ClipRecord& clip) {
    if (clip.length() == 0) throw DataError("refusing to save empty clip " + clip.clip_id);
    const int64_t n = clip.length();
    const int64_t h = clip.rgb[0].h, w = clip.rgb[0].w;
    Tensor<uint8_t> rgb({n, h, w, 3});
    for (int64_t f = 0; f < n; ++f) {
        if (clip.rgb[static_cast<size_t>(f)].h != h || clip.rgb[static_cast<size_t>(f)].w != w)
            throw DataError(clip.clip_id + ": rgb frame sizes differ within the clip");
        std::memcpy(rgb.ptr() + f * h * w * 3, clip.rgb[static_cast<size_t>(f)].data.data(),
                    static_cast<size_t>(h * w * 3));
    }
    save_clip_tensor((fs::path(dir) / (clip.clip_id + ".rgb.sgt")).string(), rgb);

    const int64_t dh = clip.depth[0].h, dw = clip.depth[0].w;
    Tensor<uint16_t> depth({n, dh, dw});
    for (int64_t f = 0; f < n; ++f)
        std::memcpy(depth.ptr() + f * dh * dw, clip.depth[static_cast<size_t>(f)].data.data(),
                    static_cast<size_t>(dh * dw) * 2);
    save_clip_tensor((fs::path(dir) / (clip.clip_id + ".depth.sgt")).string(), depth);

    save_clip_tensor((fs::path(dir) / (clip.clip_id + ".skel.sgt")).string(), skeleton_to_tensor(clip.skeleton));
}

ClipRecord load_clip(const std::string& dir, const std::string& clip_id, const std::string& gloss, int label,
                     SignCategory category, const std::string& signer_id) {
    ClipRecord clip;
    clip.clip_id = clip_id;
    clip.gloss = gloss;
    clip.label = label;
    clip.category = category;
    clip.signer_id = signer_id;

    Tensor<uint8_t> rgb = load_clip_tensor<uint8_t>((fs::path(dir) / (clip_id + ".rgb.sgt")).string());
    if (rgb.ndim() != 4 || rgb.dim(3) != 3)
        throw DataError(clip_id + ": rgb tensor must be N x H x W x 3, got " + shape_str(rgb.shape));
    const int64_t n = rgb.dim(0), h = rgb.dim(1), w = rgb.dim(2);
    clip.rgb.reserve(static_cast<size_t>(n));
    for (int64_t f = 0; f < n; ++f) {
        ImageU8 img(h, w, 3);
        std::memcpy(img.data.data(), rgb.ptr() + f * h * w * 3, static_cast<size_t>(h * w * 3));
        clip.rgb.push_back(std::move(img));
    }

    Tensor<uint16_t> depth = load_clip_tensor<uint16_t>((fs::path(dir) / (clip_id + ".depth.sgt")).string());
    if (depth.ndim() != 3 || depth.dim(0) != n)
        throw DataError(clip_id + ": depth tensor must be N x H x W with N matching rgb");
    const int64_t dh = depth.dim(1), dw = depth.dim(2);
    clip.depth.reserve(static_cast<size_t>(n));
    for (int64_t f = 0; f < n; ++f) {
        ImageU16 img(dh, dw, 1);
        std::memcpy(img.data.data(), depth.ptr() + f * dh * dw, static_cast<size_t>(dh * dw) * 2);
        clip.depth.push_back(std::move(img));
    }

    Tensor<float> skel = load_clip_tensor<float>((fs::path(dir) / (clip_id + ".skel.sgt")).string());
    if (skel.dim(0) != n) throw DataError(clip_id + ": skeleton frame count differs from rgb");
    clip.skeleton = tensor_to_skeleton(skel);
    return clip;
}

void save_clip_index(const std::string& path, const std::vector<ClipIndexRow>& rows,
                     const std::string& provenance_header) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open for write: " + path);
    if (!provenance_header.empty()) f << "# " << provenance_header << "\n";
    f << "clip_id,gloss,label,category,signer_id,frames\n";
    for (const ClipIndexRow& r : rows)
        f << r.clip_id << "," << r.gloss << "," << r.label << "," << to_string(r.category) << "," << r.signer_id
          << "," << r.frames << "\n";
    if (!f) throw DataError("write failed: " + path);
}

std::vector<ClipIndexRow> load_clip_index(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open clip index: " + path);
    std::vector<ClipIndexRow> rows;
    std::string line;
    bool have_header = false;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (!have_header) {
            have_header = true;  // column header
            continue;
        }
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 6)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 6 columns, got " +
                            std::to_string(fields.size()));
        ClipIndexRow r;
        r.clip_id = fields[0];
        r.gloss = fields[1];
        r.label = std::stoi(fields[2]);
        r.category = parse_category(fields[3]);
        r.signer_id = fields[4];
        r.frames = std::stoll(fields[5]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ClipRecord> load_clip_store(const std::string& dir) {
    const std::vector<ClipIndexRow> rows = load_clip_index((fs::path(dir) / "clips.csv").string());
    std::vector<ClipRecord> clips;
    clips.reserve(rows.size());
    for (const ClipIndexRow& r : rows)
        clips.push_back(load_clip(dir, r.clip_id, r.gloss, r.label, r.category, r.signer_id));
    return clips;
}

std::vector<ClipRecord> extract_dataset_clips(const std::string& videos_dir) {
    if (!fs::is_directory(videos_dir)) throw DataError("not a directory: " + videos_dir);
    std::vector<std::string> manifests;
    for (const auto& entry : fs::directory_iterator(videos_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".manifest")
            manifests.push_back(entry.path().string());
    std::sort(manifests.begin(), manifests.end());
    if (manifests.empty()) throw DataError("no .manifest files under " + videos_dir);

    std::vector<ClipRecord> clips;
    for (const std::string& path : manifests) {
        VideoManifest manifest = load_manifest(path);
        const std::string rgb = channel_path(manifest, videos_dir, "rgb");
        std::vector<ClipRecord> extracted;
        if (fs::is_directory(rgb)) {
            DirFrameSource source(manifest, videos_dir);
            extracted = extract_clips(manifest, source);
        } else {
            PackedFrameSource source(manifest, videos_dir);
            extracted = extract_clips(manifest, source);
        }
        for (ClipRecord& c : extracted) clips.push_back(std::move(c));
    }
    return clips;
}

}  // namespace sgst
