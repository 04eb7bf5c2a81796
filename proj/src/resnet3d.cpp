#include "sgst/resnet3d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgst/chunk_file.hpp"
#include "sgst/clip_tensor_file.hpp"

namespace sgst {

std::array<int, 4> NetConfig::stage_blocks() const {
    switch (depth) {
        case 18: return {2, 2, 2, 2};
        case 34: return {3, 4, 6, 3};
        case 50: return {3, 4, 6, 3};
        case 101: return {3, 4, 23, 3};
    }
    throw NumericError("unsupported depth " + std::to_string(depth) + " (valid: 18, 34, 50, 101)");
}

std::string NetConfig::to_text() const {
    std::ostringstream os;
    os << "depth=" << depth << "\n";
    os << "classes=" << num_classes << "\n";
    os << "temporal=" << temporal_len << "\n";
    os << "base_width=" << base_width << "\n";
    os << "in_channels=" << in_channels << "\n";
    return os.str();
}

NetConfig NetConfig::from_text(const std::string& text) {
    NetConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "depth") cfg.depth = std::stoi(value);
        else if (key == "classes") cfg.num_classes = std::stoll(value);
        else if (key == "temporal") cfg.temporal_len = std::stoll(value);
        else if (key == "base_width") cfg.base_width = std::stoll(value);
        else if (key == "in_channels") cfg.in_channels = std::stoll(value);
    }
    return cfg;
}

Resnet3d::ConvSpec Resnet3d::make_conv(const std::string& name, int64_t out_ch, int64_t in_ch, Dims3 kernel,
                                       Dims3 stride, Dims3 pad, Rng& rng) {
    const int64_t fan_in = in_ch * kernel.t * kernel.h * kernel.w;
    const float stddev = std::sqrt(2.0f / static_cast<float>(fan_in));
    Rng wrng = rng.fork("init", std::hash<std::string>{}(name), 0);
    Tensor<float> w = Tensor<float>::randn({out_ch, in_ch, kernel.t, kernel.h, kernel.w}, wrng, stddev);
    ConvSpec spec{make_leaf(std::move(w), true), stride, pad};
    params_.add(name + ".weight", spec.weight);
    return spec;
}

Resnet3d::BnSpec Resnet3d::make_bn(const std::string& name, int64_t channels) {
    BnSpec spec{make_leaf(Tensor<float>::full({channels}, 1.f), true),
                make_leaf(Tensor<float>::zeros({channels}), true), std::make_shared<BnStats<float>>(channels)};
    params_.add(name + ".weight", spec.gamma);
    params_.add(name + ".bias", spec.beta);
    return spec;
}

Resnet3d::Resnet3d(NetConfig cfg, Rng& rng) : cfg_(cfg) {
    if (cfg.num_classes < 2) throw NumericError("a classifier needs at least two classes");
    const std::array<int, 4> blocks = cfg.stage_blocks();
    const int64_t w0 = cfg.base_width;

    stem_conv_ = make_conv("stem.conv", w0, cfg.in_channels, {7, 7, 7}, {1, 2, 2}, {3, 3, 3}, rng);
    stem_bn_ = make_bn("stem.bn", w0);

    int64_t in_ch = w0;
    stages_.resize(4);
    for (int s = 0; s < 4; ++s) {
        stages_[static_cast<size_t>(s)].reserve(static_cast<size_t>(blocks[static_cast<size_t>(s)]));
        const int64_t width = w0 << s;
        const int64_t out_ch = width * cfg.expansion();
        for (int b = 0; b < blocks[static_cast<size_t>(s)]; ++b) {
            const Dims3 stride = (s > 0 && b == 0) ? Dims3{2, 2, 2} : Dims3{1, 1, 1};
            const std::string base = "layer" + std::to_string(s + 1) + "." + std::to_string(b);
            Block block;
            if (cfg.bottleneck()) {
                block.conv1 = make_conv(base + ".conv1", width, in_ch, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}, rng);
                block.bn1 = make_bn(base + ".bn1", width);
                block.conv2 = make_conv(base + ".conv2", width, width, {3, 3, 3}, stride, {1, 1, 1}, rng);
                block.bn2 = make_bn(base + ".bn2", width);
                block.conv3 = make_conv(base + ".conv3", out_ch, width, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}, rng);
                block.bn3 = make_bn(base + ".bn3", out_ch);
            } else {
                block.conv1 = make_conv(base + ".conv1", width, in_ch, {3, 3, 3}, stride, {1, 1, 1}, rng);
                block.bn1 = make_bn(base + ".bn1", width);
                block.conv2 = make_conv(base + ".conv2", width, width, {3, 3, 3}, {1, 1, 1}, {1, 1, 1}, rng);
                block.bn2 = make_bn(base + ".bn2", width);
            }
            if (stride.t != 1 || in_ch != out_ch) {
                block.down_conv = make_conv(base + ".down.conv", out_ch, in_ch, {1, 1, 1}, stride, {0, 0, 0}, rng);
                block.down_bn = make_bn(base + ".down.bn", out_ch);
            }
            stages_[static_cast<size_t>(s)].push_back(std::move(block));
            in_ch = out_ch;
        }
    }

    // Register batchnorm state: copies of the shared handles, one per layer.
    bn_registry_.emplace_back("stem.bn", stem_bn_);
    for (int s = 0; s < 4; ++s) {
        for (size_t b = 0; b < stages_[static_cast<size_t>(s)].size(); ++b) {
            const std::string base = "layer" + std::to_string(s + 1) + "." + std::to_string(b);
            Block& block = stages_[static_cast<size_t>(s)][b];
            bn_registry_.emplace_back(base + ".bn1", block.bn1);
            bn_registry_.emplace_back(base + ".bn2", block.bn2);
            if (block.bn3) bn_registry_.emplace_back(base + ".bn3", *block.bn3);
            if (block.down_bn) bn_registry_.emplace_back(base + ".down.bn", *block.down_bn);
        }
    }

    const int64_t feat = w0 * 8 * cfg.expansion();
    Rng frng = rng.fork("init", std::hash<std::string>{}("fc"), 0);
    // The classifier starts near zero (std 1/fan_in, not He) so an untrained
    // network predicts close to uniform while still passing gradients.
    fc_w_ = make_leaf(Tensor<float>::randn({cfg.num_classes, feat}, frng, 1.0f / static_cast<float>(feat)), true);
    fc_b_ = make_leaf(Tensor<float>::zeros({cfg.num_classes}), true);
    params_.add("fc.weight", fc_w_);
    params_.add("fc.bias", fc_b_);
}

NodePtr<float> Resnet3d::run_block(const Block& block, NodePtr<float> x, BnMode mode) {
    NodePtr<float> out = conv3d(x, block.conv1.weight, block.conv1.stride, block.conv1.pad);
    out = relu(batchnorm3d(out, block.bn1.gamma, block.bn1.beta, block.bn1.stats, mode));
    out = conv3d(out, block.conv2.weight, block.conv2.stride, block.conv2.pad);
    out = batchnorm3d(out, block.bn2.gamma, block.bn2.beta, block.bn2.stats, mode);
    if (block.conv3) {
        out = relu(out);
        out = conv3d(out, block.conv3->weight, block.conv3->stride, block.conv3->pad);
        out = batchnorm3d(out, block.bn3->gamma, block.bn3->beta, block.bn3->stats, mode);
    }
    NodePtr<float> shortcut = x;
    if (block.down_conv) {
        shortcut = conv3d(x, block.down_conv->weight, block.down_conv->stride, block.down_conv->pad);
        shortcut = batchnorm3d(shortcut, block.down_bn->gamma, block.down_bn->beta, block.down_bn->stats, mode);
    }
    return relu(add(out, shortcut));
}

NodePtr<float> Resnet3d::forward_impl(NodePtr<float> x, BnMode mode, int capture_stage, Tensor<float>* captured) {
    const Shape& xs = x->value.shape;
    if (xs.size() != 5 || xs[1] != cfg_.in_channels)
        throw NumericError("forward expects N x " + std::to_string(cfg_.in_channels) + " x T x H x W, got " +
                           shape_str(xs));
    NodePtr<float> h = conv3d(x, stem_conv_.weight, stem_conv_.stride, stem_conv_.pad);
    h = relu(batchnorm3d(h, stem_bn_.gamma, stem_bn_.beta, stem_bn_.stats, mode));
    if (capture_stage == 1 && captured) *captured = h->value;
    h = maxpool3d(h, {3, 3, 3}, {2, 2, 2}, {1, 1, 1});
    for (int s = 0; s < 4; ++s) {
        for (const Block& block : stages_[static_cast<size_t>(s)]) h = run_block(block, h, mode);
        if (capture_stage == s + 2 && captured) *captured = h->value;
    }
    NodePtr<float> pooled = global_avg_pool(h);
    return linear(pooled, fc_w_, fc_b_);
}

NodePtr<float> Resnet3d::forward(NodePtr<float> x, BnMode mode) { return forward_impl(std::move(x), mode, 0, nullptr); }

Tensor<float> Resnet3d::forward_eval(const Tensor<float>& batch) {
    NoGradGuard guard;
    NodePtr<float> logits = forward_impl(make_leaf(batch), BnMode::Eval, 0, nullptr);
    if (!logits->value.all_finite()) throw NumericError("eval forward produced non-finite logits");
    return logits->value;
}

Tensor<float> Resnet3d::stage_activation(const Tensor<float>& batch, int stage) {
    if (stage < 1 || stage > 5) throw NumericError("stage must lie in 1..5");
    NoGradGuard guard;
    Tensor<float> captured;
    forward_impl(make_leaf(batch), BnMode::Eval, stage, &captured);
    if (captured.numel() == 0) throw NumericError("stage capture failed");
    return captured;
}

Tensor<float> Resnet3d::attention_map(const Tensor<float>& clip, int stage) {
    if (stage < 1 || stage > 5) throw NumericError("attention stage must lie in 1..5");
    if (clip.ndim() != 4) throw NumericError("attention_map expects one 3 x T x H x W clip");
    Tensor<float> batch({1, clip.dim(0), clip.dim(1), clip.dim(2), clip.dim(3)});
    std::copy(clip.data.begin(), clip.data.end(), batch.data.begin());

    NoGradGuard guard;
    Tensor<float> captured;
    forward_impl(make_leaf(std::move(batch)), BnMode::Eval, stage, &captured);
    if (captured.numel() == 0) throw NumericError("stage capture failed");

    const int64_t C = captured.dim(1), To = captured.dim(2), Ho = captured.dim(3), Wo = captured.dim(4);
    Tensor<float> map({To, Ho, Wo});
    const int64_t inner = To * Ho * Wo;
    for (int64_t i = 0; i < inner; ++i) {
        double acc = 0.0;
        for (int64_t c = 0; c < C; ++c) acc += std::abs(static_cast<double>(captured[c * inner + i]));
        map[i] = static_cast<float>(acc / static_cast<double>(C));
    }
    float lo = map[0], hi = map[0];
    for (int64_t i = 1; i < inner; ++i) {
        lo = std::min(lo, map[i]);
        hi = std::max(hi, map[i]);
    }
    if (hi > lo) {
        for (int64_t i = 0; i < inner; ++i) map[i] = (map[i] - lo) / (hi - lo);
    } else {
        map.fill(0.f);
    }
    return map;
}

std::vector<std::pair<std::string, const Tensor<float>*>> Resnet3d::state_tensors() const {
    std::vector<std::pair<std::string, const Tensor<float>*>> out;
    for (const auto& [name, entry] : params_.params) out.emplace_back(name, &entry.node->value);
    for (const auto& [name, bn] : bn_registry_) {
        out.emplace_back(name + ".running_mean", &bn.stats->running_mean);
        out.emplace_back(name + ".running_var", &bn.stats->running_var);
    }
    return out;
}

void Resnet3d::save_checkpoint(const std::string& path, const CheckpointMeta& meta) const {
    std::vector<Chunk> chunks;
    std::ostringstream manifest;
    manifest << cfg_.to_text();
    manifest << "epoch=" << meta.epoch << "\n";
    manifest << "rng_state=" << meta.rng_state << "\n";
    manifest << "seed=" << meta.seed << "\n";
    manifest << "config_hash=" << meta.config_hash << "\n";
    Chunk head;
    head.name = "config";
    head.kind = Chunk::kText;
    const std::string text = manifest.str();
    head.payload.assign(text.begin(), text.end());
    chunks.push_back(std::move(head));

    for (const auto& [name, tensor] : state_tensors()) {
        Chunk c;
        c.name = name;
        c.kind = Chunk::kTensor;
        c.payload = write_clip_tensor(*tensor);
        chunks.push_back(std::move(c));
    }
    save_chunk_file(path, chunks);
}

std::vector<std::pair<std::string, Tensor<float>*>> Resnet3d::state_tensors_mutable() {
    std::vector<std::pair<std::string, Tensor<float>*>> out;
    for (auto& [name, entry] : params_.params) out.emplace_back(name, &entry.node->value);
    for (auto& [name, bn] : bn_registry_) {
        out.emplace_back(name + ".running_mean", &bn.stats->running_mean);
        out.emplace_back(name + ".running_var", &bn.stats->running_var);
    }
    return out;
}

Resnet3d Resnet3d::load_checkpoint(const std::string& path, CheckpointMeta* meta_out,
                                   std::optional<int64_t> task_classes, bool reset_head, uint64_t head_seed) {
    const std::vector<Chunk> chunks = load_chunk_file(path);
    if (chunks.empty() || chunks[0].name != "config" || chunks[0].kind != Chunk::kText)
        throw DataError(path + ": first chunk must be the config manifest");
    const std::string text(chunks[0].payload.begin(), chunks[0].payload.end());
    NetConfig cfg = NetConfig::from_text(text);
    CheckpointMeta meta;
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            const size_t eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(0, eq);
            const std::string value = line.substr(eq + 1);
            if (key == "epoch") meta.epoch = std::stoll(value);
            else if (key == "rng_state") meta.rng_state = std::stoull(value);
            else if (key == "seed") meta.seed = std::stoull(value);
            else if (key == "config_hash") meta.config_hash = value;
        }
    }

    bool resetting = false;
    NetConfig build_cfg = cfg;
    if (task_classes.has_value() && *task_classes != cfg.num_classes) {
        if (!reset_head)
            throw DataError(path + ": checkpoint classifies " + std::to_string(cfg.num_classes) +
                            " classes, task needs " + std::to_string(*task_classes) +
                            "; pass --reset-head to reinitialize the classifier");
        resetting = true;
        build_cfg.num_classes = *task_classes;
    }

    Rng rng(head_seed ^ 0x87c0ffeeULL);
    Resnet3d model(build_cfg, rng);

    std::vector<std::pair<std::string, Tensor<float>*>> slots = model.state_tensors_mutable();
    size_t loaded = 0;
    for (size_t i = 1; i < chunks.size(); ++i) {
        const Chunk& c = chunks[i];
        if (c.kind != Chunk::kTensor) continue;
        Tensor<float> value = read_clip_tensor_as<float>(c.payload.data(), c.payload.size());
        if (resetting && (c.name == "fc.weight" || c.name == "fc.bias")) continue;
        bool found = false;
        for (auto& [name, slot] : slots) {
            if (name != c.name) continue;
            found = true;
            if (slot->shape != value.shape)
                throw DataError(path + ": tensor '" + c.name + "' has shape " + shape_str(value.shape) +
                                ", model expects " + shape_str(slot->shape));
            *slot = std::move(value);
            ++loaded;
            break;
        }
        if (!found) throw DataError(path + ": checkpoint tensor '" + c.name + "' does not exist in the model");
    }
    const size_t expected = slots.size() - (resetting ? 2 : 0);
    if (loaded != expected)
        throw DataError(path + ": checkpoint holds " + std::to_string(loaded) + " of " + std::to_string(expected) +
                        " model tensors");
    if (meta_out) *meta_out = meta;
    return model;
}

}  // namespace sgst
