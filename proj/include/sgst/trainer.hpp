#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgst/clipstore.hpp"
#include "sgst/fusion.hpp"
#include "sgst/resnet3d.hpp"
#include "sgst/streams.hpp"

namespace sgst {

struct TrainConfig {
    double lr0 = 3e-3;
    double decay_factor = 0.1;
    int decay_period = 25;     // epochs per learning-rate step
    int epochs = 50;
    int batch_size = 8;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    uint64_t seed = 1;
    // Stops once online train accuracy reaches this value (0 = run all epochs).
    double stop_at_train_acc = 0.0;
};

// Signer-disjoint train/test partition.
struct SplitSpec {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::map<std::string, bool> signer_in_test;
};

// Greedy signer-level assignment: largest signer first into the side with
// the larger remaining deficit against the target fraction. Deterministic
// given the seed (ties between equal-sized signers break by a seeded
// shuffle). Needs at least two signers.
SplitSpec make_split(const std::vector<ClipRecord>& clips, double fraction, uint64_t seed);

// lr0 * decay^floor(epoch / period), computed so decade steps land exactly
// on their decimal values.
double lr_at(int epoch, const TrainConfig& cfg);

struct EpochLog {
    int epoch = 0;
    double lr = 0;
    double loss = 0;
    double train_acc = 0;
    double test_acc = 0;
};

struct TrainResult {
    std::vector<EpochLog> logs;
    bool not_converging = false;  // train accuracy < 2/K after 20 epochs
    int epochs_run = 0;
};

// Per-clip precomputed flow fields, keyed by clip id.
using FlowLookup = std::function<const PrecomputedFlow*(const std::string& clip_id)>;

// The per-stream loop: each epoch draws a fresh proxy plan per clip, fresh
// augmentation per sample, shuffles deterministically and runs minibatch
// SGD at lr_at. Per-epoch test accuracy uses mid-interval proxy frames and
// center crops. Aborts on non-finite loss naming the offending batch.
TrainResult train_stream(Resnet3d& model, const std::vector<ClipRecord>& clips, const SplitSpec& split,
                         StreamKind stream, const TrainConfig& tcfg, const StreamParams& sparams,
                         const FlowLookup& flow = nullptr,
                         const std::function<void(const EpochLog&)>& on_epoch = nullptr);

// Eval-mode scores for the given clip ids (deterministic sampling).
ScoreMatrix evaluate_stream(Resnet3d& model, const std::vector<ClipRecord>& clips,
                            const std::vector<std::string>& ids, StreamKind stream, const StreamParams& sparams,
                            int batch_size, const FlowLookup& flow = nullptr);

const ClipRecord& clip_by_id(const std::vector<ClipRecord>& clips, const std::string& id);

}  // namespace sgst
