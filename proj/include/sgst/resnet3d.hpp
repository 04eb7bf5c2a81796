#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "sgst/ops.hpp"
#include "sgst/rng.hpp"
#include "sgst/sgd.hpp"

namespace sgst {

// Residual 3D network description. Depth picks block kind and stage counts;
// base_width 64 is the published family, 16 gives the tiny desk-scale
// variant.
struct NetConfig {
    int depth = 18;
    int64_t num_classes = 2;
    int64_t temporal_len = 16;
    int64_t base_width = 64;
    int64_t in_channels = 3;

    bool bottleneck() const { return depth >= 50; }
    int64_t expansion() const { return bottleneck() ? 4 : 1; }
    std::array<int, 4> stage_blocks() const;

    std::string to_text() const;
    static NetConfig from_text(const std::string& text);
};

// Extra bookkeeping carried by a checkpoint next to the weights.
struct CheckpointMeta {
    int64_t epoch = 0;
    uint64_t rng_state = 0;
    uint64_t seed = 0;
    std::string config_hash;
};

class Resnet3d {
public:
    Resnet3d(NetConfig cfg, Rng& rng);

    // Tape-recording forward; mode picks batch vs running statistics.
    NodePtr<float> forward(NodePtr<float> x, BnMode mode);

    // No-grad eval logits for a N x 3 x T x H x W batch.
    Tensor<float> forward_eval(const Tensor<float>& batch);

    // Channel-averaged |activation| of the requested stage (1 = stem output,
    // 2..5 = residual stages) on a single 3 x T x H x W clip, min-max
    // normalized to [0,1] (all zeros when the stage is constant).
    Tensor<float> attention_map(const Tensor<float>& clip, int stage);

    // Raw eval-mode activation of a stage for a N x 3 x T x H x W batch.
    Tensor<float> stage_activation(const Tensor<float>& batch, int stage);

    ParamSet<float>& params() { return params_; }
    const NetConfig& config() const { return cfg_; }

    // Full serializable state: trainable parameters plus BN running stats.
    std::vector<std::pair<std::string, const Tensor<float>*>> state_tensors() const;
    std::vector<std::pair<std::string, Tensor<float>*>> state_tensors_mutable();

    void save_checkpoint(const std::string& path, const CheckpointMeta& meta) const;

    // task_classes: the class count the caller is about to train/evaluate.
    // A mismatch with the stored head reinitializes it when reset_head is
    // set and is an error otherwise.
    static Resnet3d load_checkpoint(const std::string& path, CheckpointMeta* meta_out,
                                    std::optional<int64_t> task_classes = std::nullopt, bool reset_head = false,
                                    uint64_t head_seed = 0);

private:
    struct ConvSpec {
        NodePtr<float> weight;
        Dims3 stride;
        Dims3 pad;
    };
    struct BnSpec {
        NodePtr<float> gamma;
        NodePtr<float> beta;
        std::shared_ptr<BnStats<float>> stats;
    };
    struct Block {
        ConvSpec conv1;
        BnSpec bn1;
        ConvSpec conv2;
        BnSpec bn2;
        std::optional<ConvSpec> conv3;  // bottleneck only
        std::optional<BnSpec> bn3;
        std::optional<ConvSpec> down_conv;
        std::optional<BnSpec> down_bn;
    };

    ConvSpec make_conv(const std::string& name, int64_t out_ch, int64_t in_ch, Dims3 kernel, Dims3 stride,
                       Dims3 pad, Rng& rng);
    BnSpec make_bn(const std::string& name, int64_t channels);
    NodePtr<float> run_block(const Block& block, NodePtr<float> x, BnMode mode);
    NodePtr<float> forward_impl(NodePtr<float> x, BnMode mode, int capture_stage, Tensor<float>* captured);

    NetConfig cfg_;
    ParamSet<float> params_;
    ConvSpec stem_conv_;
    BnSpec stem_bn_;
    std::vector<std::vector<Block>> stages_;
    NodePtr<float> fc_w_;
    NodePtr<float> fc_b_;
    // Shared handles (not pointers into this object), so moving a model
    // keeps the registry valid.
    std::vector<std::pair<std::string, BnSpec>> bn_registry_;
};

}  // namespace sgst
