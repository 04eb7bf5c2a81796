#pragma once

#include <string>
#include <vector>

#include "sgst/resnet3d.hpp"
#include "sgst/streams.hpp"
#include "sgst/synth.hpp"
#include "sgst/trainer.hpp"

namespace sgst {

constexpr const char* kToolVersion = "0.1.0";

// Everything a run needs, mirrored from the key = value config file.
// CLI flags apply on top through set_config_key, so the effective
// configuration always has one canonical serialization (and hash).
struct RunConfig {
    RunConfig() { model.num_classes = 0; }

    std::string data_root = ".";
    std::string out_dir = "out";
    uint64_t seed = 1;
    int threads = 0;
    double split_fraction = 0.75;

    StreamParams stream;
    NetConfig model;                 // model.classes = 0 infers K from the clips
    TrainConfig train;
    SynthSpec synth;

    std::vector<std::string> fusion_streams;
    std::vector<double> fusion_weights;
    std::string pretrained;
    bool reset_head = false;
};

RunConfig parse_run_config(const std::string& text, const std::string& source_name = "config");
RunConfig load_run_config(const std::string& path);

// Applies one "key=value" assignment; unknown keys are UsageErrors.
void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

// Canonical serialization of the effective configuration.
std::string serialize_run_config(const RunConfig& cfg);

// FNV-1a hash of the canonical serialization, as hex.
std::string config_hash(const RunConfig& cfg);

// "sgst <version> seed=<seed> config=<hash>" plus optional extras; embedded
// at the top of every text artifact.
std::string provenance_line(const RunConfig& cfg, const std::string& extras = "");

}  // namespace sgst
