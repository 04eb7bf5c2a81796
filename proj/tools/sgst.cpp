// Command-line front end: dataset generation, clip extraction, flow
// precomputation, per-stream training, evaluation, fusion and reports.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "sgst/config.hpp"
#include "sgst/gradcheck.hpp"
#include "sgst/parallel.hpp"
#include "sgst/synth.hpp"
#include "sgst/trainer.hpp"

namespace fs = std::filesystem;
using namespace sgst;

namespace {

struct CliState {
    std::string config_path;
    std::vector<std::string> sets;
    RunConfig cfg;

    void finalize() {
        if (!config_path.empty()) cfg = load_run_config(config_path);
        for (const std::string& kv : sets) {
            const size_t eq = kv.find('=');
            if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
            set_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        set_thread_cap(cfg.threads);
    }
};

std::string clips_dir(const RunConfig& cfg) { return (fs::path(cfg.data_root) / "clips").string(); }
std::string videos_dir(const RunConfig& cfg) { return (fs::path(cfg.data_root) / "videos").string(); }

void write_manifest_txt(const RunConfig& cfg, const std::string& dir, const std::vector<std::string>& files) {
    std::ofstream f(fs::path(dir) / "MANIFEST.txt", std::ios::trunc);
    f << "# " << provenance_line(cfg) << "\n";
    for (const std::string& name : files) f << name << "\n";
}

std::vector<ClipRecord> load_clips_checked(const RunConfig& cfg) {
    const std::string dir = clips_dir(cfg);
    if (!fs::exists(fs::path(dir) / "clips.csv"))
        throw DataError("no clip store at " + dir + "; run extract-clips first");
    return load_clip_store(dir);
}

int64_t infer_classes(const RunConfig& cfg, const std::vector<ClipRecord>& clips) {
    if (cfg.model.num_classes >= 2) return cfg.model.num_classes;
    int max_label = 0;
    for (const ClipRecord& c : clips) max_label = std::max(max_label, c.label);
    return max_label + 1;
}

FlowLookup make_flow_lookup(const RunConfig& cfg, StreamKind stream,
                            std::map<std::string, PrecomputedFlow>& cache) {
    if (stream.channel != Channel::RGBFlow && stream.channel != Channel::DepthFlow) return nullptr;
    const std::string suffix = stream.channel == Channel::RGBFlow ? ".flow" : ".dflow";
    const std::string dir = clips_dir(cfg);
    return [&cache, dir, suffix](const std::string& clip_id) -> const PrecomputedFlow* {
        auto it = cache.find(clip_id);
        if (it != cache.end()) return it->second.fields.numel() ? &it->second : nullptr;
        const std::string path = (fs::path(dir) / (clip_id + suffix)).string();
        PrecomputedFlow& slot = cache[clip_id];
        if (fs::exists(path)) slot.fields = load_clip_tensor<float>(path);
        return slot.fields.numel() ? &slot : nullptr;
    };
}

// Append-only epoch log: header up front, one line flushed per epoch so a
// long run can be watched (and a crashed one keeps its history).
class EpochCsv {
public:
    EpochCsv(const RunConfig& cfg, const std::string& path, const std::string& stream_name)
        : file_(path, std::ios::trunc) {
        if (!file_) throw DataError("cannot open for write: " + path);
        file_ << "# " << provenance_line(cfg, "stream=" + stream_name) << "\n";
        file_ << "epoch,lr,loss,train_acc,test_acc\n";
        file_.flush();
    }

    void append(const EpochLog& log) {
        char line[160];
        std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g,%.9g\n", log.epoch, log.lr, log.loss, log.train_acc,
                      log.test_acc);
        file_ << line;
        file_.flush();
    }

    void flag_not_converging() {
        file_ << "# not-converging: train accuracy below 2/K after 20 epochs\n";
        file_.flush();
    }

private:
    std::ofstream file_;
};

int cmd_synth_data(const CliState& state) {
    const RunConfig& cfg = state.cfg;
    SynthSpec spec = cfg.synth;
    if (spec.seed == 1) spec.seed = cfg.seed;
    generate_synth_dataset(cfg.data_root, spec);
    std::cout << "wrote " << spec.signers << " synthetic videos (" << spec.classes * spec.clips_per_class
              << " sign clips) under " << videos_dir(cfg) << "\n";
    return 0;
}

int cmd_extract_clips(const CliState& state) {
    const RunConfig& cfg = state.cfg;
    std::vector<ClipRecord> clips = extract_dataset_clips(videos_dir(cfg));
    const std::string dir = clips_dir(cfg);
    fs::create_directories(dir);
    std::vector<ClipIndexRow> rows;
    std::vector<std::string> files;
    for (const ClipRecord& clip : clips) {
        save_clip(dir, clip);
        rows.push_back({clip.clip_id, clip.gloss, clip.label, clip.category, clip.signer_id, clip.length()});
        files.push_back(clip.clip_id + ".rgb.sgt");
        files.push_back(clip.clip_id + ".depth.sgt");
        files.push_back(clip.clip_id + ".skel.sgt");
    }
    save_clip_index((fs::path(dir) / "clips.csv").string(), rows, provenance_line(cfg));
    write_manifest_txt(cfg, dir, files);
    std::cout << "extracted " << clips.size() << " clips into " << dir << "\n";
    return 0;
}

int cmd_compute_flow(const CliState& state, const std::string& channel) {
    const RunConfig& cfg = state.cfg;
    const Channel source = channel == "depth" ? Channel::Depth : Channel::RGB;
    if (channel != "rgb" && channel != "depth") throw UsageError("--channel must be rgb or depth");
    std::vector<ClipRecord> clips = load_clips_checked(cfg);
    const std::string dir = clips_dir(cfg);
    const std::string suffix = source == Channel::RGB ? ".flow" : ".dflow";
    std::vector<std::string> files;
    for (const ClipRecord& clip : clips) {
        Tensor<float> fields = precompute_clip_flow(clip, source, cfg.stream);
        save_clip_tensor((fs::path(dir) / (clip.clip_id + suffix)).string(), fields);
        files.push_back(clip.clip_id + suffix);
    }
    write_manifest_txt(cfg, dir, files);
    std::cout << "wrote " << files.size() << " " << channel << " flow tensors into " << dir << "\n";
    return 0;
}

int cmd_make_streams(const CliState& state, const std::string& stream_csv) {
    const RunConfig& cfg = state.cfg;
    std::vector<StreamKind> kinds;
    if (stream_csv.empty()) {
        kinds = default_streams();
    } else {
        std::istringstream in(stream_csv);
        std::string name;
        while (std::getline(in, name, ',')) kinds.push_back(parse_stream_kind(name));
    }
    std::vector<ClipRecord> clips = load_clips_checked(cfg);
    std::map<std::string, PrecomputedFlow> cache;
    for (StreamKind kind : kinds) {
        const std::string dir = (fs::path(cfg.out_dir) / "streams" / to_string(kind)).string();
        fs::create_directories(dir);
        FlowLookup flow = make_flow_lookup(cfg, kind, cache);
        std::vector<std::string> files;
        for (const ClipRecord& clip : clips) {
            ProxyIndexPlan plan = center_proxy_indices(clip.length(), cfg.stream.temporal_len);
            const PrecomputedFlow* pf = flow ? flow(clip.clip_id) : nullptr;
            Tensor<float> sample = make_stream_sample(clip, kind, cfg.stream, plan, nullptr, pf);
            save_clip_tensor((fs::path(dir) / (clip.clip_id + ".sgt")).string(), sample);
            files.push_back(clip.clip_id + ".sgt");
        }
        write_manifest_txt(cfg, dir, files);
        std::cout << to_string(kind) << ": " << files.size() << " samples under " << dir << "\n";
    }
    return 0;
}

int cmd_train(const CliState& state, const std::string& stream_name) {
    const RunConfig& cfg = state.cfg;
    const StreamKind stream = parse_stream_kind(stream_name);
    std::vector<ClipRecord> clips = load_clips_checked(cfg);
    const int64_t classes = infer_classes(cfg, clips);
    SplitSpec split = make_split(clips, cfg.split_fraction, cfg.seed);

    Rng model_rng(cfg.seed);
    std::unique_ptr<Resnet3d> model;
    if (!cfg.pretrained.empty()) {
        model = std::make_unique<Resnet3d>(
            Resnet3d::load_checkpoint(cfg.pretrained, nullptr, classes, cfg.reset_head, cfg.seed));
    } else {
        NetConfig ncfg = cfg.model;
        ncfg.num_classes = classes;
        ncfg.temporal_len = cfg.stream.temporal_len;
        model = std::make_unique<Resnet3d>(ncfg, model_rng);
    }

    TrainConfig tcfg = cfg.train;
    tcfg.seed = cfg.seed;
    std::map<std::string, PrecomputedFlow> cache;
    FlowLookup flow = make_flow_lookup(cfg, stream, cache);

    fs::create_directories(cfg.out_dir);
    const std::string log_path = (fs::path(cfg.out_dir) / (stream_name + ".log.csv")).string();
    EpochCsv log_csv(cfg, log_path, stream_name);
    TrainResult result = train_stream(*model, clips, split, stream, tcfg, cfg.stream, flow,
                                      [&](const EpochLog& log) {
                                          log_csv.append(log);
                                          std::cerr << "epoch " << log.epoch << " lr " << log.lr << " loss "
                                                    << log.loss << " train_acc " << log.train_acc << " test_acc "
                                                    << log.test_acc << "\n";
                                      });
    if (result.not_converging) log_csv.flag_not_converging();

    CheckpointMeta meta;
    meta.epoch = result.epochs_run;
    meta.seed = cfg.seed;
    meta.rng_state = Rng(cfg.seed).fork("trainer-final", static_cast<uint64_t>(result.epochs_run)).state();
    meta.config_hash = config_hash(cfg);
    const std::string ckpt_path = (fs::path(cfg.out_dir) / (stream_name + ".sgck")).string();
    model->save_checkpoint(ckpt_path, meta);
    std::cout << "trained " << stream_name << " for " << result.epochs_run << " epochs; final train_acc "
              << result.logs.back().train_acc << " test_acc " << result.logs.back().test_acc << "\n"
              << "checkpoint: " << ckpt_path << "\nlog: " << log_path << "\n";
    if (result.not_converging) std::cout << "warning: not converging (train accuracy < 2/K after 20 epochs)\n";
    return 0;
}

int cmd_evaluate(const CliState& state, const std::string& stream_name, const std::string& checkpoint,
                 const std::string& which_split) {
    const RunConfig& cfg = state.cfg;
    const StreamKind stream = parse_stream_kind(stream_name);
    std::vector<ClipRecord> clips = load_clips_checked(cfg);
    const int64_t classes = infer_classes(cfg, clips);
    Resnet3d model = Resnet3d::load_checkpoint(checkpoint, nullptr, classes, false, cfg.seed);

    std::vector<std::string> ids;
    if (which_split == "all") {
        for (const ClipRecord& c : clips) ids.push_back(c.clip_id);
    } else {
        SplitSpec split = make_split(clips, cfg.split_fraction, cfg.seed);
        ids = which_split == "train" ? split.train_ids : split.test_ids;
    }

    std::map<std::string, PrecomputedFlow> cache;
    FlowLookup flow = make_flow_lookup(cfg, stream, cache);
    ScoreMatrix scores = evaluate_stream(model, clips, ids, stream, cfg.stream, cfg.train.batch_size, flow);

    const std::string dir = (fs::path(cfg.out_dir) / "scores").string();
    fs::create_directories(dir);
    const std::string path = (fs::path(dir) / (stream_name + ".csv")).string();
    save_scores_csv(path, scores, provenance_line(cfg, "stream=" + stream_name));
    std::cout << "scores: " << path << "\naccuracy " << accuracy(scores) << " over " << scores.rows()
              << " clips (" << which_split << " split)\n";
    return 0;
}

int cmd_fuse(const CliState& state, const std::string& scores_csv, const std::string& streams_csv,
             const std::string& weights_csv, const std::string& out_name, bool grid_search) {
    const RunConfig& cfg = state.cfg;
    if (!scores_csv.empty() && !streams_csv.empty())
        throw UsageError("pass either --scores or --streams, not both");
    std::vector<ScoreMatrix> mats;
    if (!streams_csv.empty()) {
        // stream names resolve to the evaluate command's output files
        std::istringstream in(streams_csv);
        std::string name;
        while (std::getline(in, name, ',')) {
            parse_stream_kind(name);  // validate the name early
            mats.push_back(load_scores_csv((fs::path(cfg.out_dir) / "scores" / (name + ".csv")).string()));
        }
    } else {
        std::istringstream in(scores_csv);
        std::string path;
        while (std::getline(in, path, ',')) mats.push_back(load_scores_csv(path));
    }
    if (mats.empty()) throw UsageError("fuse needs --scores csv1,csv2,... or --streams kind1,kind2,...");
    FusionSpec spec;
    if (grid_search) {
        if (!weights_csv.empty()) throw UsageError("--grid-search and --weights are mutually exclusive");
        spec = grid_search_weights(mats);
        std::cout << "grid-search weights:";
        for (const auto& [name, w] : spec.entries) std::cout << " " << name << "=" << w;
        std::cout << "\n";
    } else if (weights_csv.empty()) {
        for (const ScoreMatrix& m : mats) spec.entries.emplace_back(m.stream, 1.0);
    } else {
        std::vector<double> weights;
        std::istringstream in(weights_csv);
        std::string w;
        while (std::getline(in, w, ',')) weights.push_back(std::stod(w));
        if (weights.size() != mats.size())
            throw UsageError("got " + std::to_string(weights.size()) + " weights for " +
                             std::to_string(mats.size()) + " score files");
        for (size_t i = 0; i < mats.size(); ++i) spec.entries.emplace_back(mats[i].stream, weights[i]);
    }
    ScoreMatrix fused = fuse(mats, spec);
    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / out_name).string();
    save_scores_csv(path, fused, provenance_line(cfg, "stream=fused"));
    std::cout << "fused: " << path << "\naccuracy " << accuracy(fused) << "\n";
    return 0;
}

int cmd_report(const CliState& state, const std::string& scores_csv, const std::string& specs_arg,
               const std::string& clips_index) {
    const RunConfig& cfg = state.cfg;
    std::vector<ScoreMatrix> mats;
    std::vector<std::string> stream_order;
    {
        std::istringstream in(scores_csv);
        std::string path;
        while (std::getline(in, path, ',')) {
            mats.push_back(load_scores_csv(path));
            stream_order.push_back(mats.back().stream);
        }
    }
    if (mats.empty()) throw UsageError("report needs --scores csv1,csv2,...");

    std::vector<FusionSpec> specs;
    if (specs_arg.empty()) {
        for (const ScoreMatrix& m : mats) specs.push_back({{{m.stream, 1.0}}});
        if (mats.size() > 1) {
            FusionSpec all;
            for (const ScoreMatrix& m : mats) all.entries.emplace_back(m.stream, 1.0);
            specs.push_back(all);
        }
    } else {
        std::istringstream in(specs_arg);
        std::string group;
        while (std::getline(in, group, ';')) {
            FusionSpec spec;
            std::istringstream gin(group);
            std::string name;
            while (std::getline(gin, name, ',')) spec.entries.emplace_back(name, 1.0);
            if (!spec.entries.empty()) specs.push_back(spec);
        }
    }

    std::vector<AblationRow> rows = ablation_report(mats, specs);
    fs::create_directories(cfg.out_dir);
    {
        std::ofstream f(fs::path(cfg.out_dir) / "ablation.csv", std::ios::trunc);
        f << "# " << provenance_line(cfg) << "\n" << ablation_csv(rows, stream_order);
    }
    {
        std::ofstream f(fs::path(cfg.out_dir) / "ablation.txt", std::ios::trunc);
        f << ablation_text(rows, stream_order);
    }
    std::cout << ablation_text(rows, stream_order);

    // per-category table when the clip index provides categories
    const std::string index_path =
        clips_index.empty() ? (fs::path(clips_dir(cfg)) / "clips.csv").string() : clips_index;
    if (fs::exists(index_path)) {
        std::map<std::string, SignCategory> categories;
        for (const ClipIndexRow& row : load_clip_index(index_path)) categories[row.clip_id] = row.category;
        std::ofstream f(fs::path(cfg.out_dir) / "categories.csv", std::ios::trunc);
        f << "# " << provenance_line(cfg) << "\n";
        f << "spec";
        for (int c = 0; c < 7; ++c) f << "," << to_string(static_cast<SignCategory>(c));
        f << ",overall\n";
        for (size_t si = 0; si < specs.size(); ++si) {
            std::vector<ScoreMatrix> selected;
            for (const auto& [name, w] : specs[si].entries)
                for (const ScoreMatrix& m : mats)
                    if (m.stream == name) selected.push_back(m);
            ScoreMatrix fused = selected.size() == 1 ? selected[0] : fuse(selected, specs[si]);
            std::vector<SignCategory> cats;
            bool all_known = true;
            for (const std::string& id : fused.clip_ids) {
                auto it = categories.find(id);
                if (it == categories.end()) {
                    all_known = false;
                    break;
                }
                cats.push_back(it->second);
            }
            if (!all_known) continue;
            auto per_cat = per_category_accuracy(fused, fused.labels, cats);
            std::string spec_name;
            for (const auto& [name, w] : specs[si].entries) spec_name += (spec_name.empty() ? "" : "+") + name;
            f << spec_name;
            for (int c = 0; c < 7; ++c) {
                auto it = per_cat.find(static_cast<SignCategory>(c));
                if (it == per_cat.end()) f << ",";
                else f << "," << it->second;
            }
            f << "," << accuracy(fused) << "\n";
        }
    }
    return 0;
}

int cmd_selftest();

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-stream RGB-D sign recognition engine"};
    app.require_subcommand(1);

    CliState state;
    app.add_option("--config", state.config_path, "run configuration file (key = value lines)");
    app.add_option("--set", state.sets, "override a config key, e.g. --set train.epochs=10")->take_all();

    std::string arg_stream, arg_checkpoint, arg_split = "test", arg_channel = "rgb";
    std::string arg_scores, arg_streams, arg_weights, arg_specs, arg_clips_index, arg_out_name = "fused.csv";
    std::string arg_data, arg_out;
    uint64_t arg_seed = 0;
    int arg_threads = -1;
    bool arg_finetune = false;
    bool arg_grid_search = false;

    app.add_option("--data", arg_data, "dataset root (overrides data.root)");
    app.add_option("--out", arg_out, "output directory (overrides out.dir)");
    app.add_option("--seed", arg_seed, "global seed (overrides seed)");
    app.add_option("--threads", arg_threads, "worker cap, 0 = all cores");

    CLI::App* synth = app.add_subcommand("synth-data", "generate the synthetic moving-shape dataset");
    CLI::App* extract = app.add_subcommand("extract-clips", "cut annotated clips out of videos/");
    CLI::App* flow_cmd = app.add_subcommand("compute-flow", "precompute per-clip optical flow");
    flow_cmd->add_option("--channel", arg_channel, "rgb or depth");
    CLI::App* streams_cmd = app.add_subcommand("make-streams", "materialize eval-mode stream samples");
    streams_cmd->add_option("--streams", arg_scores, "comma-separated stream kinds (default set if omitted)");
    CLI::App* train_cmd = app.add_subcommand("train", "train one stream");
    train_cmd->add_option("--stream", arg_stream, "stream kind, e.g. body-rgb")->required();
    train_cmd->add_option("--pretrained", arg_checkpoint, "checkpoint to warm-start from");
    train_cmd->add_flag("--reset-head", arg_finetune, "reinitialize the classifier on class-count mismatch");
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "score clips with a trained checkpoint");
    eval_cmd->add_option("--stream", arg_stream, "stream kind")->required();
    eval_cmd->add_option("--checkpoint", arg_checkpoint, "checkpoint path")->required();
    eval_cmd->add_option("--split", arg_split, "test, train or all");
    CLI::App* fuse_cmd = app.add_subcommand("fuse", "weighted late fusion of score files");
    fuse_cmd->add_option("--scores", arg_scores, "comma-separated score CSVs");
    fuse_cmd->add_option("--streams", arg_streams, "stream kinds resolved to <out>/scores/<kind>.csv");
    fuse_cmd->add_option("--weights", arg_weights, "comma-separated weights (uniform if omitted)");
    fuse_cmd->add_option("--out-name", arg_out_name, "fused CSV filename");
    fuse_cmd->add_flag("--grid-search", arg_grid_search, "search fusion weights on these scores instead of uniform");
    CLI::App* report_cmd = app.add_subcommand("report", "ablation and per-category tables");
    report_cmd->add_option("--scores", arg_scores, "comma-separated score CSVs")->required();
    report_cmd->add_option("--specs", arg_specs, "semicolon-separated fusion specs, e.g. 'a;b;a,b'");
    report_cmd->add_option("--clips-index", arg_clips_index, "clips.csv for category lookup");
    CLI::App* selftest_cmd = app.add_subcommand("selftest", "run the built-in oracle and gradient checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    }

    try {
        state.finalize();
        if (!arg_data.empty()) state.cfg.data_root = arg_data;
        if (!arg_out.empty()) state.cfg.out_dir = arg_out;
        if (arg_seed != 0) state.cfg.seed = arg_seed;
        if (arg_threads >= 0) {
            state.cfg.threads = arg_threads;
            set_thread_cap(arg_threads);
        }
        if (!arg_checkpoint.empty() && train_cmd->parsed()) state.cfg.pretrained = arg_checkpoint;
        if (arg_finetune) state.cfg.reset_head = true;

        if (synth->parsed()) return cmd_synth_data(state);
        if (extract->parsed()) return cmd_extract_clips(state);
        if (flow_cmd->parsed()) return cmd_compute_flow(state, arg_channel);
        if (streams_cmd->parsed()) return cmd_make_streams(state, arg_scores);
        if (train_cmd->parsed()) return cmd_train(state, arg_stream);
        if (eval_cmd->parsed()) return cmd_evaluate(state, arg_stream, arg_checkpoint, arg_split);
        if (fuse_cmd->parsed()) return cmd_fuse(state, arg_scores, arg_streams, arg_weights, arg_out_name, arg_grid_search);
        if (report_cmd->parsed()) return cmd_report(state, arg_scores, arg_specs, arg_clips_index);
        if (selftest_cmd->parsed()) return cmd_selftest();
        throw UsageError("no command given");
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

namespace {

int cmd_selftest() {
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
        if (!ok) ++failures;
    };

    // conv3d against a freshly written direct loop
    {
        Rng rng(2024);
        bool ok = true;
        for (int trial = 0; trial < 20 && ok; ++trial) {
            const int64_t C = 1 + rng.next_uint(2), F = 1 + rng.next_uint(2);
            const int64_t k = 1 + rng.next_uint(3);
            const int64_t Ti = k + rng.next_uint(3), H = k + rng.next_uint(5), W = k + rng.next_uint(5);
            Tensor<float> x = Tensor<float>::uniform({1, C, Ti, H, W}, rng, -1.f, 1.f);
            Tensor<float> kr = Tensor<float>::uniform({F, C, k, k, k}, rng, -1.f, 1.f);
            auto fast = conv3d(make_leaf(x), make_leaf(kr), {1, 1, 1}, {0, 0, 0});
            const int64_t To = Ti - k + 1, Ho = H - k + 1, Wo = W - k + 1;
            for (int64_t f = 0; f < F && ok; ++f)
                for (int64_t to = 0; to < To && ok; ++to)
                    for (int64_t oh = 0; oh < Ho && ok; ++oh)
                        for (int64_t ow = 0; ow < Wo && ok; ++ow) {
                            float acc = 0;
                            for (int64_t c = 0; c < C; ++c)
                                for (int64_t dt = 0; dt < k; ++dt)
                                    for (int64_t dh = 0; dh < k; ++dh)
                                        for (int64_t dw = 0; dw < k; ++dw)
                                            acc += x[(((c)*Ti + to + dt) * H + oh + dh) * W + ow + dw] *
                                                   kr[(((f * C + c) * k + dt) * k + dh) * k + dw];
                            const float got = fast->value[(((f)*To + to) * Ho + oh) * Wo + ow];
                            if (std::abs(got - acc) >= 1e-6f) ok = false;
                        }
        }
        check("conv3d matches the direct-loop oracle", ok);
    }

    // finite differences through a small composite
    {
        Rng rng(7);
        auto kink_free = [&rng](Shape shape) {
            Tensor<double> t(std::move(shape));
            for (auto& v : t.data) {
                double x = rng.next_range(-1.0, 1.0);
                v = x >= 0 ? x + 0.1 : x - 0.1;
            }
            return t;
        };
        auto f = [](const std::vector<NodePtr<double>>& in) {
            auto y = conv3d(in[0], in[1], {1, 1, 1}, {1, 1, 1});
            auto p = global_avg_pool(relu(y));
            return softmax_crossentropy(p, {0}).loss;
        };
        const double err = grad_check(f, {kink_free({1, 2, 2, 4, 4}), kink_free({2, 2, 2, 3, 3})});
        check("composite gradients pass finite differences", err < 1e-4);
    }

    // proxy sampling invariants
    {
        Rng rng(99);
        bool ok = true;
        for (int trial = 0; trial < 1000 && ok; ++trial) {
            const int64_t t = 1 + rng.next_uint(16);
            const int64_t n = t + rng.next_uint(100);
            ProxyIndexPlan plan = sample_proxy_indices(n, t, rng);
            const int64_t gap = n / t;
            for (int64_t i = 0; i < t; ++i) {
                const int64_t idx = plan.indices[static_cast<size_t>(i)];
                if (idx < gap * i || idx >= gap * (i + 1)) ok = false;
                if (i > 0 && idx <= plan.indices[static_cast<size_t>(i - 1)]) ok = false;
            }
        }
        check("proxy sampling stays inside its intervals", ok);
    }

    // encoder fixed points
    {
        ImageU16 d(1, 1, 1);
        d.data[0] = 2500;
        FlowField zero{ImageF(1, 1, 1), ImageF(1, 1, 1)};
        const ImageU8 db = encode_depth_3band(d);
        const ImageU8 fb = encode_flow_3band(zero, 20.0);
        check("3-band encoders reproduce their documented mappings",
              db.data[0] == 128 && fb.data[0] == 128 && fb.data[1] == 128 && fb.data[2] == 0);
    }

    // flow of identical frames
    {
        Rng rng(4);
        ImageF a(16, 16, 1);
        for (auto& v : a.data) v = static_cast<float>(rng.next_range(0, 255));
        FlowField f = compute_flow_horn_schunck(a, a, {15.0, 20});
        bool ok = true;
        for (float u : f.u.data) ok = ok && u == 0.0f;
        for (float v : f.v.data) ok = ok && v == 0.0f;
        check("identical frames give zero flow", ok);
    }

    std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
    return failures == 0 ? 0 : 3;
}

}  // namespace
