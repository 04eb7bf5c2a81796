// Acceptance suite: runs every engine-level criterion end to end and prints
// one PASS/FAIL line each. Optional argv[1] is the path to the sgst CLI
// binary, used for the byte-identical reinvocation check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "../oracle_conv3d.hpp"
#include "sgst/chunk_file.hpp"
#include "sgst/config.hpp"
#include "sgst/encode.hpp"
#include "sgst/flow.hpp"
#include "sgst/fusion.hpp"
#include "sgst/gradcheck.hpp"
#include "sgst/synth.hpp"
#include "sgst/trainer.hpp"

namespace fs = std::filesystem;
using namespace sgst;

namespace {

int g_failures = 0;

class Criterion {
public:
    Criterion(int number, std::string what, double budget_seconds)
        : number_(number), what_(std::move(what)), budget_(budget_seconds),
          start_(std::chrono::steady_clock::now()) {}

    void expect(bool ok, const std::string& detail) {
        if (!ok) {
            ok_ = false;
            details_.push_back(detail);
        }
    }

    ~Criterion() {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        if (budget_ > 0 && elapsed > budget_) {
            ok_ = false;
            details_.push_back("took " + std::to_string(elapsed) + "s, budget " + std::to_string(budget_) + "s");
        }
        std::printf("criterion %2d %s: %s (%.1fs)\n", number_, ok_ ? "PASS" : "FAIL", what_.c_str(), elapsed);
        for (const std::string& d : details_) std::printf("             - %s\n", d.c_str());
        std::fflush(stdout);
        if (!ok_) ++g_failures;
    }

private:
    int number_;
    std::string what_;
    double budget_;
    std::chrono::steady_clock::time_point start_;
    bool ok_ = true;
    std::vector<std::string> details_;
};

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "sgst_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

void criterion_1_conv_oracle() {
    Criterion c(1, "conv3d matches the direct-convolution oracle on 200 random configurations", 60.0);
    Rng rng(910);
    for (int trial = 0; trial < 200; ++trial) {
        const int64_t N = 1 + rng.next_uint(2);
        const int64_t C = 1 + rng.next_uint(3);
        const int64_t F = 1 + rng.next_uint(3);
        const int64_t kt = 1 + rng.next_uint(3), kh = 1 + rng.next_uint(3), kw = 1 + rng.next_uint(3);
        const int64_t st = 1 + rng.next_uint(2), sh = 1 + rng.next_uint(2), sw = 1 + rng.next_uint(2);
        const int64_t pt = rng.next_uint(3), ph = rng.next_uint(3), pw = rng.next_uint(3);
        const int64_t Ti = kt + rng.next_uint(6);
        const int64_t H = kh + rng.next_uint(8);
        const int64_t W = kw + rng.next_uint(8);
        Tensor<float> x = Tensor<float>::uniform({N, C, Ti, H, W}, rng, -1.f, 1.f);
        Tensor<float> k = Tensor<float>::uniform({F, C, kt, kh, kw}, rng, -1.f, 1.f);
        auto fast = conv3d(make_leaf(x), make_leaf(k), {st, sh, sw}, {pt, ph, pw});
        auto ref = sgst_test::direct_conv3d(x, k, st, sh, sw, pt, ph, pw);
        const float diff = max_abs_diff(fast->value, ref);
        c.expect(diff < 1e-6f, "f32 config " + std::to_string(trial) + " diff " + std::to_string(diff));

        Tensor<double> xd(x.shape), kd(k.shape);
        for (int64_t i = 0; i < x.numel(); ++i) xd[i] = x[i];
        for (int64_t i = 0; i < k.numel(); ++i) kd[i] = k[i];
        auto fastd = conv3d(make_leaf(xd), make_leaf(kd), {st, sh, sw}, {pt, ph, pw});
        auto refd = sgst_test::direct_conv3d(xd, kd, st, sh, sw, pt, ph, pw);
        const double diffd = max_abs_diff(fastd->value, refd);
        c.expect(diffd < 1e-12, "f64 config " + std::to_string(trial) + " diff " + std::to_string(diffd));
    }
}

Tensor<double> kink_free(Shape shape, Rng& rng) {
    Tensor<double> t(std::move(shape));
    for (auto& v : t.data) {
        double x = rng.next_range(-1.0, 1.0);
        v = x >= 0 ? x + 0.1 : x - 0.1;
    }
    return t;
}

void criterion_2_gradients() {
    Criterion c(2, "every differentiable op and a tiny-network composite pass finite differences", 120.0);
    Rng rng(920);
    auto run = [&](const char* what,
                   const std::function<NodePtr<double>(const std::vector<NodePtr<double>>&)>& f,
                   std::vector<Tensor<double>> inputs, double bound) {
        const double err = grad_check(f, std::move(inputs), 1e-4, 60, 17);
        c.expect(err < bound, std::string(what) + " max rel err " + std::to_string(err));
    };

    run("conv3d", [](const std::vector<NodePtr<double>>& in) {
        return softmax_crossentropy(global_avg_pool(conv3d(in[0], in[1], {1, 2, 1}, {1, 0, 1})), {0}).loss;
    }, {kink_free({1, 2, 3, 5, 4}, rng), kink_free({3, 2, 2, 3, 2}, rng)}, 1e-4);

    run("relu", [](const std::vector<NodePtr<double>>& in) {
        return softmax_crossentropy(global_avg_pool(relu(in[0])), {1}).loss;
    }, {kink_free({1, 3, 2, 3, 3}, rng)}, 1e-4);

    run("maxpool3d", [](const std::vector<NodePtr<double>>& in) {
        return softmax_crossentropy(global_avg_pool(maxpool3d(in[0], {2, 2, 2}, {1, 2, 2}, {0, 1, 1})), {1}).loss;
    }, {kink_free({1, 2, 3, 4, 4}, rng)}, 1e-4);

    run("global_avg_pool + linear", [](const std::vector<NodePtr<double>>& in) {
        return softmax_crossentropy(linear(global_avg_pool(in[0]), in[1], in[2]), {2}).loss;
    }, {kink_free({1, 3, 2, 2, 2}, rng), kink_free({4, 3}, rng), kink_free({4}, rng)}, 1e-4);

    run("batchnorm3d train", [](const std::vector<NodePtr<double>>& in) {
        auto stats = std::make_shared<BnStats<double>>(2);
        return softmax_crossentropy(global_avg_pool(batchnorm3d(in[0], in[1], in[2], stats, BnMode::Train)),
                                    {0, 1}).loss;
    }, {kink_free({2, 2, 2, 3, 3}, rng), kink_free({2}, rng), kink_free({2}, rng)}, 1e-4);

    auto eval_stats = std::make_shared<BnStats<double>>(2);
    eval_stats->running_mean[0] = 0.4;
    eval_stats->running_var[1] = 1.9;
    run("batchnorm3d eval", [eval_stats](const std::vector<NodePtr<double>>& in) {
        return softmax_crossentropy(global_avg_pool(batchnorm3d(in[0], in[1], in[2], eval_stats, BnMode::Eval)),
                                    {1, 0}).loss;
    }, {kink_free({2, 2, 2, 2, 2}, rng), kink_free({2}, rng), kink_free({2}, rng)}, 1e-4);

    run("add and mul", [](const std::vector<NodePtr<double>>& in) {
        return softmax_crossentropy(add(mul(in[0], in[1]), in[0]), {2}).loss;
    }, {kink_free({1, 4}, rng), kink_free({1, 4}, rng)}, 1e-6);

    run("softmax cross entropy", [](const std::vector<NodePtr<double>>& in) {
        return softmax_crossentropy(in[0], {1, 3}).loss;
    }, {kink_free({2, 4}, rng)}, 1e-6);

    auto comp_stats = std::make_shared<BnStats<double>>(2);
    run("composite network", [comp_stats](const std::vector<NodePtr<double>>& in) {
        auto h = conv3d(in[0], in[1], {1, 1, 1}, {1, 1, 1});
        h = relu(batchnorm3d(h, in[2], in[3], comp_stats, BnMode::Train));
        h = maxpool3d(h, {1, 2, 2}, {1, 2, 2});
        return softmax_crossentropy(linear(global_avg_pool(h), in[4], in[5]), {0, 2}).loss;
    }, {kink_free({2, 1, 2, 4, 4}, rng), kink_free({2, 1, 3, 3, 3}, rng), kink_free({2}, rng),
        kink_free({2}, rng), kink_free({3, 2}, rng), kink_free({3}, rng)}, 1e-4);
}

void criterion_3_sampling() {
    Criterion c(3, "proxy sampling: containment, monotonicity, tail, uniformity over 10k draws", 10.0);
    Rng rng(930);
    bool contained = true, monotone = true, tail = true;
    for (int trial = 0; trial < 10000; ++trial) {
        const int64_t t = 1 + rng.next_uint(32);
        const int64_t n = t + rng.next_uint(300);
        ProxyIndexPlan plan = sample_proxy_indices(n, t, rng);
        const int64_t gap = n / t;
        for (int64_t i = 0; i < t; ++i) {
            const int64_t idx = plan.indices[static_cast<size_t>(i)];
            if (idx < gap * i || idx >= gap * (i + 1)) contained = false;
            if (i > 0 && idx <= plan.indices[static_cast<size_t>(i - 1)]) monotone = false;
        }
        if (plan.indices.back() > gap * t - 1) tail = false;
    }
    c.expect(contained, "an index left its interval");
    c.expect(monotone, "indices not strictly increasing");
    c.expect(tail, "an index exceeded floor(N/T)*T - 1");

    const int64_t n = 64, t = 16, gap = 4;
    std::vector<int64_t> hist(static_cast<size_t>(gap), 0);
    for (int round = 0; round < 10000; ++round) {
        ProxyIndexPlan plan = sample_proxy_indices(n, t, rng);
        for (int64_t i = 0; i < t; ++i) ++hist[static_cast<size_t>(plan.indices[static_cast<size_t>(i)] - gap * i)];
    }
    for (int64_t o = 0; o < gap; ++o) {
        const double freq = static_cast<double>(hist[static_cast<size_t>(o)]) / (10000.0 * t);
        c.expect(std::abs(freq - 0.25) <= 0.02,
                 "offset " + std::to_string(o) + " frequency " + std::to_string(freq));
    }
}

void criterion_4_schedule() {
    Criterion c(4, "learning-rate schedule reproduces 3e-3 and 3e-4 exactly", 0);
    TrainConfig cfg;
    for (int epoch = 0; epoch <= 24; ++epoch)
        c.expect(lr_at(epoch, cfg) == 3e-3, "epoch " + std::to_string(epoch) + " != 3e-3");
    for (int epoch = 25; epoch <= 49; ++epoch)
        c.expect(lr_at(epoch, cfg) == 3e-4, "epoch " + std::to_string(epoch) + " != 3e-4");
}

void criterion_5_flow() {
    Criterion c(5, "flow: zero on identical frames, 1px translation recovered, energy non-increasing", 30.0);
    Rng rng(950);
    ImageF still(32, 32, 1);
    for (auto& v : still.data) v = static_cast<float>(rng.next_range(0, 255));
    FlowField f0 = compute_flow_horn_schunck(still, still, {15.0, 100});
    bool zero = true;
    for (float u : f0.u.data) zero = zero && u == 0.0f;
    for (float v : f0.v.data) zero = zero && v == 0.0f;
    c.expect(zero, "identical frames produced nonzero flow");

    const int64_t side = 64;
    ImageF a(side, side, 1), b(side, side, 1);
    for (int64_t y = 0; y < side; ++y)
        for (int64_t x = 0; x < side; ++x) {
            a.at(y, x) = static_cast<float>(4 * x);
            b.at(y, x) = static_cast<float>(4 * std::max<int64_t>(0, x - 1));
        }
    FlowField f = compute_flow_horn_schunck(a, b, {15.0, 100});
    double su = 0.0, sav = 0.0;
    int64_t count = 0;
    for (int64_t y = 8; y < side - 8; ++y)
        for (int64_t x = 8; x < side - 8; ++x) {
            su += f.u.at(y, x);
            sav += std::abs(f.v.at(y, x));
            ++count;
        }
    const double mean_u = su / static_cast<double>(count);
    c.expect(mean_u >= 0.7 && mean_u <= 1.3, "mean u " + std::to_string(mean_u));
    c.expect(sav / static_cast<double>(count) < 0.2, "mean |v| " + std::to_string(sav / count));

    ImageF wa(32, 32, 1), wb(32, 32, 1);
    for (int64_t y = 0; y < 32; ++y)
        for (int64_t x = 0; x < 32; ++x) {
            const double v = 100.0 + 50.0 * std::sin(0.3 * x) + 30.0 * std::cos(0.25 * y);
            wa.at(y, x) = static_cast<float>(v);
            wb.at(y, x) = static_cast<float>(v + 8.0 * std::sin(0.2 * (x + y)));
        }
    double prev = horn_schunck_energy(wa, wb, {ImageF(32, 32, 1), ImageF(32, 32, 1)}, 15.0);
    bool monotone = true;
    for (int iters = 1; iters <= 100; ++iters) {
        FlowField fi = compute_flow_horn_schunck(wa, wb, {15.0, iters});
        const double e = horn_schunck_energy(wa, wb, fi, 15.0);
        if (e > prev * (1.0 + 1e-9) + 1e-9) monotone = false;
        prev = e;
    }
    c.expect(monotone, "energy increased between iterations");
}

void criterion_6_encoders() {
    Criterion c(6, "depth and flow 3-band encoders reproduce the documented mappings bit-exactly", 0);
    auto depth_px = [](uint16_t mm) {
        ImageU16 img(1, 1, 1);
        img.data[0] = mm;
        return encode_depth_3band(img).data;
    };
    c.expect(depth_px(500) == std::vector<uint8_t>{0, 0, 0}, "d=500");
    c.expect(depth_px(4500) == std::vector<uint8_t>{255, 255, 255}, "d=4500");
    c.expect(depth_px(2500) == std::vector<uint8_t>{128, 128, 128}, "d=2500 must round half up to 128");
    c.expect(depth_px(0) == std::vector<uint8_t>{0, 0, 0}, "zero depth maps like dmin");

    auto flow_px = [](float u, float v) {
        FlowField f{ImageF(1, 1, 1), ImageF(1, 1, 1)};
        f.u.data[0] = u;
        f.v.data[0] = v;
        return encode_flow_3band(f, 20.0).data;
    };
    c.expect(flow_px(0, 0) == std::vector<uint8_t>{128, 128, 0}, "(0,0) -> (128,128,0)");
    c.expect(flow_px(20, 0) == std::vector<uint8_t>{255, 128, 255}, "(20,0) -> (255,128,255)");
    c.expect(flow_px(-30, 0)[0] == 0, "u=-30 clamps to band 0");

    // determinism across repeated calls
    Rng rng(960);
    ImageU16 d(8, 8, 1);
    for (auto& v : d.data) v = static_cast<uint16_t>(rng.next_uint(6000));
    c.expect(encode_depth_3band(d).data == encode_depth_3band(d).data, "depth encoder nondeterministic");
}

struct OverfitData {
    std::vector<ClipRecord> clips;
    SplitSpec split;
    fs::path root;
};

OverfitData make_overfit_dataset() {
    OverfitData data;
    data.root = work_dir() / "overfit";
    SynthSpec spec;
    spec.classes = 3;
    spec.clips_per_class = 20;
    spec.signers = 4;
    spec.frame_h = 32;
    spec.frame_w = 32;
    spec.min_frames = 20;
    spec.max_frames = 40;
    spec.seed = 11;
    generate_synth_dataset(data.root.string(), spec);
    data.clips = extract_dataset_clips((data.root / "videos").string());
    data.split = make_split(data.clips, 0.75, 11);
    return data;
}

StreamParams overfit_stream_params() {
    StreamParams sp;
    sp.temporal_len = 16;
    sp.patch = 28;
    sp.resize_short = 32;
    return sp;
}

NetConfig overfit_net() {
    NetConfig cfg;
    cfg.depth = 18;
    cfg.base_width = 16;
    cfg.num_classes = 3;
    cfg.temporal_len = 16;
    return cfg;
}

void criterion_7_overfit() {
    Criterion c(7, "tiny depth-18 overfits the 60-clip moving-shape dataset to >= 95% train accuracy", 900.0);
    OverfitData data = make_overfit_dataset();
    c.expect(data.clips.size() == 60, "expected 60 clips, got " + std::to_string(data.clips.size()));

    Rng rng(9001);
    Resnet3d model(overfit_net(), rng);
    StreamParams sp = overfit_stream_params();

    // untrained network predicts near uniform
    {
        double loss_sum = 0.0;
        ScoreMatrix scores = evaluate_stream(model, data.clips, data.split.train_ids,
                                             {Modality::Body, Channel::RGB}, sp, 8);
        for (int64_t r = 0; r < scores.rows(); ++r) {
            const float p = scores.scores[r * 3 + scores.labels[static_cast<size_t>(r)]];
            loss_sum += -std::log(std::max(1e-12, static_cast<double>(p)));
        }
        const double loss0 = loss_sum / static_cast<double>(scores.rows());
        c.expect(std::abs(loss0 - std::log(3.0)) <= 0.2,
                 "untrained loss " + std::to_string(loss0) + " vs ln 3 " + std::to_string(std::log(3.0)));
    }

    TrainConfig tcfg;
    tcfg.lr0 = 5e-3;
    tcfg.decay_period = 100;
    tcfg.epochs = 200;
    tcfg.batch_size = 8;
    tcfg.seed = 4242;
    tcfg.stop_at_train_acc = 0.95;
    TrainResult result = train_stream(model, data.clips, data.split, {Modality::Body, Channel::RGB}, tcfg, sp);
    const double final_acc = result.logs.back().train_acc;
    c.expect(final_acc >= 0.95, "train accuracy " + std::to_string(final_acc) + " after " +
                                    std::to_string(result.epochs_run) + " epochs");
    std::printf("             (reached %.3f train accuracy in %d epochs)\n", final_acc, result.epochs_run);
}

void criterion_8_fusion() {
    Criterion c(8, "fusion dominance on complementary streams; argmax invariant under weight scale", 0);
    std::vector<int> labels = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
    auto build = [&](const std::string& name, int lo, int hi) {
        ScoreMatrix m;
        m.stream = name;
        m.num_classes = 3;
        m.labels = labels;
        std::vector<float> flat;
        for (size_t r = 0; r < labels.size(); ++r) {
            m.clip_ids.push_back("clip" + std::to_string(r));
            std::vector<float> row(3, 0.05f);
            if (static_cast<int>(r) >= lo && static_cast<int>(r) <= hi) {
                row[static_cast<size_t>(labels[r])] = 0.9f;
            } else {
                row.assign(3, 0.1f);
                row[static_cast<size_t>(labels[r])] = 0.3f;
                row[static_cast<size_t>((labels[r] + 1) % 3)] = 0.6f;
            }
            for (float v : row) flat.push_back(v);
        }
        m.scores = Tensor<float>({10, 3}, std::move(flat));
        return m;
    };
    ScoreMatrix a = build("a", 0, 5);
    ScoreMatrix b = build("b", 4, 9);
    const double acc_a = accuracy(a), acc_b = accuracy(b);
    ScoreMatrix fused = fuse({a, b}, {{{"a", 1.0}, {"b", 1.0}}});
    const double acc_f = accuracy(fused);
    c.expect(std::abs(acc_a - 0.6) < 1e-12, "stream a accuracy " + std::to_string(acc_a));
    c.expect(std::abs(acc_b - 0.6) < 1e-12, "stream b accuracy " + std::to_string(acc_b));
    c.expect(acc_f == 1.0, "fused accuracy " + std::to_string(acc_f));
    c.expect(acc_f > acc_a && acc_f > acc_b, "fusion must strictly dominate");

    Rng rng(980);
    for (int trial = 0; trial < 1000; ++trial) {
        auto random_scores = [&](const std::string& name) {
            ScoreMatrix m;
            m.stream = name;
            m.num_classes = 4;
            std::vector<float> flat;
            for (int r = 0; r < 5; ++r) {
                m.clip_ids.push_back("c" + std::to_string(r));
                m.labels.push_back(0);
                std::vector<float> row(4);
                double total = 0;
                for (auto& v : row) {
                    v = static_cast<float>(rng.next_range(0.01, 1.0));
                    total += v;
                }
                float acc = 0.f;
                for (size_t k = 0; k + 1 < row.size(); ++k) {
                    row[k] = static_cast<float>(row[k] / total);
                    acc += row[k];
                }
                row.back() = 1.f - acc;
                for (float v : row) flat.push_back(v);
            }
            m.scores = Tensor<float>({5, 4}, std::move(flat));
            return m;
        };
        ScoreMatrix x = random_scores("x");
        ScoreMatrix y = random_scores("y");
        y.clip_ids = x.clip_ids;
        const double wx = rng.next_range(0.05, 2.0), wy = rng.next_range(0.05, 2.0);
        const double scale = rng.next_range(0.1, 20.0);
        ScoreMatrix f1 = fuse({x, y}, {{{"x", wx}, {"y", wy}}});
        ScoreMatrix f2 = fuse({x, y}, {{{"x", wx * scale}, {"y", wy * scale}}});
        for (int64_t r = 0; r < 5; ++r)
            if (argmax_row(f1.scores, r) != argmax_row(f2.scores, r)) {
                c.expect(false, "argmax changed under weight scaling at trial " + std::to_string(trial));
                return;
            }
    }
}

void criterion_9_reproducibility(const std::string& cli_path) {
    Criterion c(9, "two identical train invocations give byte-identical checkpoints and logs", 0);
    if (cli_path.empty()) {
        c.expect(false, "no CLI binary path given");
        return;
    }
    const fs::path dir = work_dir() / "repro";
    fs::create_directories(dir);
    SynthSpec spec;
    spec.classes = 3;
    spec.clips_per_class = 4;
    spec.signers = 3;
    spec.frame_h = spec.frame_w = 24;
    spec.min_frames = 8;
    spec.max_frames = 12;
    spec.seed = 3;
    generate_synth_dataset((dir / "data").string(), spec);

    std::ofstream cfg(dir / "run.cfg");
    cfg << "data.root = " << (dir / "data").string() << "\n";
    cfg << "out.dir = " << (dir / "out").string() << "\n";
    cfg << "seed = 77\n";
    cfg << "sampler.temporal = 4\nsampler.patch = 16\nsampler.resize_short = 18\n";
    cfg << "model.depth = 18\nmodel.base_width = 8\n";
    cfg << "train.epochs = 3\ntrain.batch = 4\n";
    cfg.close();

    auto run = [&](const char* what) {
        const std::string cmd = cli_path + " --config " + (dir / "run.cfg").string() + " " + what + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    c.expect(run("extract-clips") == 0, "extract-clips failed");
    c.expect(run("train --stream body-rgb") == 0, "first train failed");
    fs::rename(dir / "out" / "body-rgb.sgck", dir / "first.sgck");
    fs::rename(dir / "out" / "body-rgb.log.csv", dir / "first.log.csv");
    c.expect(run("train --stream body-rgb") == 0, "second train failed");

    auto same_bytes = [](const fs::path& x, const fs::path& y) {
        std::ifstream fx(x, std::ios::binary), fy(y, std::ios::binary);
        std::ostringstream bx, by;
        bx << fx.rdbuf();
        by << fy.rdbuf();
        return bx.str() == by.str() && !bx.str().empty();
    };
    c.expect(same_bytes(dir / "first.sgck", dir / "out" / "body-rgb.sgck"), "checkpoints differ");
    c.expect(same_bytes(dir / "first.log.csv", dir / "out" / "body-rgb.log.csv"), "logs differ");
}

void criterion_10_roundtrips() {
    Criterion c(10, "tensor files and checkpoints round-trip bit-exactly and reject corruption", 0);
    Rng rng(1000);
    Tensor<float> t = Tensor<float>::uniform({3, 4, 5}, rng, -100.f, 100.f);
    std::vector<uint8_t> bytes = write_clip_tensor(t);
    Tensor<float> back = read_clip_tensor_as<float>(bytes);
    c.expect(std::memcmp(back.ptr(), t.ptr(), t.data.size() * 4) == 0, "tensor payload changed");
    bytes[bytes.size() / 3] ^= 0x10;
    bool rejected = false;
    try {
        read_clip_tensor_as<float>(bytes);
    } catch (const DataError&) {
        rejected = true;
    }
    c.expect(rejected, "corrupted tensor file accepted");

    NetConfig ncfg;
    ncfg.depth = 18;
    ncfg.base_width = 8;
    ncfg.num_classes = 3;
    Rng mrng(1001);
    Resnet3d model(ncfg, mrng);
    Tensor<float> pair = Tensor<float>::uniform({2, 3, 4, 16, 16}, rng, 0.f, 1.f);
    model.forward(make_leaf(pair), BnMode::Train);
    Tensor<float> probe = Tensor<float>::uniform({1, 3, 4, 16, 16}, rng, 0.f, 1.f);
    Tensor<float> before = model.forward_eval(probe);
    const fs::path path = work_dir() / "roundtrip.sgck";
    model.save_checkpoint(path.string(), {});
    Resnet3d loaded = Resnet3d::load_checkpoint(path.string(), nullptr);
    Tensor<float> after = loaded.forward_eval(probe);
    c.expect(before.data == after.data, "checkpoint round-trip changed eval outputs");

    std::vector<uint8_t> ckpt = load_bytes(path.string());
    ckpt[ckpt.size() / 2] ^= 0x01;
    save_bytes(path.string(), ckpt);
    rejected = false;
    try {
        Resnet3d::load_checkpoint(path.string(), nullptr);
    } catch (const DataError&) {
        rejected = true;
    }
    c.expect(rejected, "corrupted checkpoint accepted");
}

ClipRecord grid_clip(int64_t frames, int64_t h, int64_t w) {
    ClipRecord clip;
    clip.clip_id = "grid";
    clip.label = 0;
    clip.signer_id = "s";
    Rng rng(1100);
    for (int64_t f = 0; f < frames; ++f) {
        ImageU8 rgb(h, w, 3);
        for (auto& v : rgb.data) v = static_cast<uint8_t>(rng.next_uint(256));
        clip.rgb.push_back(std::move(rgb));
        ImageU16 depth(h, w, 1);
        for (auto& v : depth.data) v = static_cast<uint16_t>(800 + rng.next_uint(3000));
        clip.depth.push_back(std::move(depth));
        SkeletonFrame sk;
        for (auto& j : sk.joints) {
            j.px = static_cast<float>(w / 2 + (f % 5));
            j.py = static_cast<float>(h / 2);
            j.confidence = 1.0f;
        }
        clip.skeleton.push_back(sk);
    }
    return clip;
}

void criterion_11_shape_contract(bool quick) {
    Criterion c(11, "all 12 stream kinds and every depth x T combination build and run at 112 x 112", 0);
    StreamParams sp;
    sp.temporal_len = 16;
    sp.flow.iters = 40;  // shape contract, not flow quality
    ClipRecord clip = grid_clip(24, 180, 240);
    Rng rng(1110);
    ProxyIndexPlan plan = sample_proxy_indices(clip.length(), sp.temporal_len, rng);
    for (StreamKind kind : grid_streams()) {
        Tensor<float> sample = make_stream_sample(clip, kind, sp, plan, nullptr);
        c.expect(sample.shape == Shape{3, 16, 112, 112},
                 to_string(kind) + " produced " + shape_str(sample.shape));
        c.expect(sample.all_finite(), to_string(kind) + " produced non-finite values");
    }

    for (int depth : {18, 34, 50, 101}) {
        for (int64_t t : {16, 32, 64}) {
            if (quick && depth >= 50 && t == 64) continue;
            NetConfig cfg;
            cfg.depth = depth;
            // depth 34 at T=64 doubles as the 100-sign production shape
            cfg.num_classes = (depth == 34 && t == 64) ? 100 : 5;
            cfg.temporal_len = t;
            Rng mrng(1200 + depth + t);
            Resnet3d model(cfg, mrng);
            Tensor<float> input = Tensor<float>::uniform({1, 3, t, 112, 112}, mrng, 0.f, 1.f);
            Tensor<float> logits = model.forward_eval(input);
            c.expect(logits.shape == Shape{1, cfg.num_classes},
                     "depth " + std::to_string(depth) + " T " + std::to_string(t) + " gave " +
                         shape_str(logits.shape));
            c.expect(logits.all_finite(),
                     "depth " + std::to_string(depth) + " T " + std::to_string(t) + " non-finite logits");
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli_path = argc > 1 ? argv[1] : "";
    const bool quick = argc > 2 && std::string(argv[2]) == "--quick";

    criterion_3_sampling();
    criterion_4_schedule();
    criterion_6_encoders();
    criterion_8_fusion();
    criterion_10_roundtrips();
    criterion_1_conv_oracle();
    criterion_5_flow();
    criterion_2_gradients();
    criterion_9_reproducibility(cli_path);
    criterion_11_shape_contract(quick);
    criterion_7_overfit();

    if (g_failures == 0) {
        std::printf("acceptance: all criteria PASS\n");
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return 1;
}
