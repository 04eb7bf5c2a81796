#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "sgst/clip_tensor_file.hpp"
#include "sgst/resnet3d.hpp"

using namespace sgst;

namespace {

NetConfig tiny_cfg(int depth = 18, int64_t classes = 3, int64_t base_width = 16) {
    NetConfig cfg;
    cfg.depth = depth;
    cfg.num_classes = classes;
    cfg.temporal_len = 8;
    cfg.base_width = base_width;
    return cfg;
}

Tensor<float> random_batch(int64_t n, int64_t t, int64_t side, uint64_t seed) {
    Rng rng(seed);
    return Tensor<float>::uniform({n, 3, t, side, side}, rng, 0.f, 1.f);
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

// Independent count of depth-18 parameters from the architecture rules.
int64_t expected_basic_params(int64_t w0, int64_t classes, const std::array<int, 4>& blocks) {
    int64_t total = 0;
    auto conv = [&](int64_t out, int64_t in, int64_t k) { total += out * in * k * k * k; };
    auto bn = [&](int64_t ch) { total += 2 * ch; };
    conv(w0, 3, 7);
    bn(w0);
    int64_t in_ch = w0;
    for (int s = 0; s < 4; ++s) {
        const int64_t width = w0 << s;
        for (int b = 0; b < blocks[static_cast<size_t>(s)]; ++b) {
            conv(width, in_ch, 3);
            bn(width);
            conv(width, width, 3);
            bn(width);
            // projection on the first block of stages 2..4
            if (b == 0 && s > 0) {
                conv(width, in_ch, 1);
                bn(width);
            }
            in_ch = width;
        }
    }
    total += classes * (w0 * 8) + classes;
    return total;
}

}  // namespace

TEST_CASE("forward produces N x K logits at several depths") {
    for (int depth : {18, 34}) {
        Rng rng(100 + depth);
        Resnet3d model(tiny_cfg(depth, 5), rng);
        Tensor<float> logits = model.forward_eval(random_batch(2, 16, 32, 7));
        CHECK(logits.shape == Shape{2, 5});
        CHECK(logits.all_finite());
    }
}

TEST_CASE("bottleneck depths build and run") {
    Rng rng(3);
    NetConfig cfg = tiny_cfg(50, 4, 8);
    Resnet3d model(cfg, rng);
    Tensor<float> logits = model.forward_eval(random_batch(1, 16, 32, 9));
    CHECK(logits.shape == Shape{1, 4});
}

TEST_CASE("invalid depth is rejected") {
    Rng rng(4);
    NetConfig cfg = tiny_cfg(42);
    CHECK_THROWS_AS(Resnet3d(cfg, rng), NumericError);
}

TEST_CASE("parameter count matches the closed-form sum for depth 18") {
    Rng rng(5);
    NetConfig cfg = tiny_cfg(18, 100, 64);
    Resnet3d model(cfg, rng);
    const int64_t expected = expected_basic_params(64, 100, {2, 2, 2, 2});
    CHECK(model.params().total_elements() == expected);
}

TEST_CASE("two builds from the same seed are identical, different seeds differ") {
    Rng a(77), b(77), c(78);
    Resnet3d ma(tiny_cfg(), a), mb(tiny_cfg(), b), mc(tiny_cfg(), c);
    bool same_ab = true, same_ac = true;
    auto ta = ma.state_tensors();
    auto tb = mb.state_tensors();
    auto tc = mc.state_tensors();
    for (size_t i = 0; i < ta.size(); ++i) {
        if (ta[i].second->data != tb[i].second->data) same_ab = false;
        if (ta[i].second->data != tc[i].second->data) same_ac = false;
    }
    CHECK(same_ab);
    CHECK_FALSE(same_ac);
}

TEST_CASE("zero input in eval mode with fresh stats yields the head bias") {
    Rng rng(6);
    Resnet3d model(tiny_cfg(18, 4), rng);
    // put a recognizable bias in place
    auto& fcb = model.params().params.at("fc.bias").node->value;
    fcb.data = {0.5f, -1.0f, 2.0f, 0.25f};
    Tensor<float> zeros({1, 3, 8, 32, 32});
    Tensor<float> logits = model.forward_eval(zeros);
    for (int k = 0; k < 4; ++k) CHECK(logits[k] == doctest::Approx(fcb[k]).epsilon(1e-6));
}

TEST_CASE("duplicated samples produce identical logit rows") {
    Rng rng(8);
    Resnet3d model(tiny_cfg(), rng);
    Tensor<float> one = random_batch(1, 8, 32, 11);
    Tensor<float> two({2, 3, 8, 32, 32});
    std::copy(one.data.begin(), one.data.end(), two.data.begin());
    std::copy(one.data.begin(), one.data.end(), two.data.begin() + one.numel());
    Tensor<float> logits = model.forward_eval(two);
    for (int64_t k = 0; k < 3; ++k) CHECK(logits[k] == logits[3 + k]);
}

TEST_CASE("perturbing one weight changes the logits") {
    Rng rng(9);
    Resnet3d model(tiny_cfg(), rng);
    Tensor<float> batch = random_batch(1, 8, 32, 13);
    Tensor<float> before = model.forward_eval(batch);
    model.params().params.at("stem.conv.weight").node->value[0] += 0.5f;
    Tensor<float> after = model.forward_eval(batch);
    CHECK(max_abs_diff(before, after) > 0.f);
}

TEST_CASE("eval forward is bit-deterministic across calls") {
    Rng rng(10);
    Resnet3d model(tiny_cfg(), rng);
    Tensor<float> batch = random_batch(2, 8, 32, 17);
    Tensor<float> a = model.forward_eval(batch);
    Tensor<float> b = model.forward_eval(batch);
    CHECK(a.data == b.data);
}

TEST_CASE("a zeroed residual branch acts as relu of its shortcut") {
    Rng rng(11);
    Resnet3d model(tiny_cfg(), rng);
    // zero every stage-1 branch; shortcuts there are exact identities
    for (const char* name : {"layer1.0.conv1.weight", "layer1.0.conv2.weight", "layer1.1.conv1.weight",
                             "layer1.1.conv2.weight"}) {
        model.params().params.at(name).node->value.fill(0.f);
    }
    Tensor<float> batch = random_batch(1, 8, 32, 19);

    // stage 2 capture = layer1 output; with zeroed branches it must equal
    // relu(maxpool(stem)) = maxpool(stem), since the stem output is post-relu.
    Tensor<float> stem = model.stage_activation(batch, 1);
    Tensor<float> stage2 = model.stage_activation(batch, 2);
    auto pooled = maxpool3d(make_leaf(stem), {3, 3, 3}, {2, 2, 2}, {1, 1, 1});
    CHECK(stage2.shape == pooled->value.shape);
    CHECK(max_abs_diff(stage2, pooled->value) == 0.f);
}

TEST_CASE("gradients flow to every parameter after one training step") {
    Rng rng(12);
    Resnet3d model(tiny_cfg(18, 3, 8), rng);
    Tensor<float> batch = random_batch(2, 8, 16, 23);
    auto logits = model.forward(make_leaf(batch), BnMode::Train);
    auto ce = softmax_crossentropy(logits, {0, 2});
    backward(ce.loss);
    for (const auto& [name, entry] : model.params().params) {
        REQUIRE(entry.node->grad.numel() == entry.node->value.numel());
        double norm = 0.0;
        for (float g : entry.node->grad.data) norm += static_cast<double>(g) * static_cast<double>(g);
        INFO("parameter ", name);
        CHECK(norm > 0.0);
    }
}

TEST_CASE("checkpoint round-trip is bit-exact in eval mode") {
    Rng rng(13);
    Resnet3d model(tiny_cfg(18, 3), rng);
    Tensor<float> pair = random_batch(2, 8, 32, 29);
    // make running stats non-trivial first
    auto logits_train = model.forward(make_leaf(pair), BnMode::Train);
    Tensor<float> batch = random_batch(1, 8, 32, 31);
    Tensor<float> before = model.forward_eval(batch);

    const std::string path = temp_path("sgst_test_ckpt.sgck");
    CheckpointMeta meta;
    meta.epoch = 7;
    meta.rng_state = 12345;
    meta.seed = 99;
    meta.config_hash = "abc123";
    model.save_checkpoint(path, meta);

    CheckpointMeta got;
    Resnet3d loaded = Resnet3d::load_checkpoint(path, &got);
    CHECK(got.epoch == 7);
    CHECK(got.rng_state == 12345);
    CHECK(got.seed == 99);
    CHECK(got.config_hash == "abc123");
    Tensor<float> after = loaded.forward_eval(batch);
    CHECK(after.data == before.data);
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint rejects corruption and class mismatches") {
    Rng rng(14);
    Resnet3d model(tiny_cfg(18, 3), rng);
    const std::string path = temp_path("sgst_test_ckpt2.sgck");
    model.save_checkpoint(path, {});

    SUBCASE("corrupted payload fails the checksum") {
        std::vector<uint8_t> bytes = load_bytes(path);
        bytes[bytes.size() / 2] ^= 0x40;
        save_bytes(path, bytes);
        CHECK_THROWS_WITH_AS(Resnet3d::load_checkpoint(path, nullptr), doctest::Contains("checksum"), DataError);
    }
    SUBCASE("class mismatch without reset-head is an error") {
        CHECK_THROWS_WITH_AS(Resnet3d::load_checkpoint(path, nullptr, 5, false),
                             doctest::Contains("reset-head"), DataError);
    }
    SUBCASE("reset-head reinitializes the classifier and keeps the trunk") {
        Resnet3d fresh = Resnet3d::load_checkpoint(path, nullptr, 5, true, 321);
        CHECK(fresh.config().num_classes == 5);
        CHECK(fresh.params().params.at("fc.weight").node->value.shape == Shape{5, 16 * 8});
        // trunk weights survive
        CHECK(fresh.params().params.at("stem.conv.weight").node->value.data ==
              model.params().params.at("stem.conv.weight").node->value.data);
    }
    std::filesystem::remove(path);
}

TEST_CASE("a moved model keeps working (checkpoints, eval, stats registry)") {
    Rng rng(17);
    Resnet3d source(tiny_cfg(18, 3), rng);
    Tensor<float> batch = random_batch(1, 8, 32, 37);
    Tensor<float> before = source.forward_eval(batch);

    auto moved = std::make_unique<Resnet3d>(std::move(source));
    Tensor<float> after = moved->forward_eval(batch);
    CHECK(after.data == before.data);

    const std::string path = temp_path("sgst_moved.sgck");
    moved->save_checkpoint(path, {});
    Resnet3d loaded = Resnet3d::load_checkpoint(path, nullptr);
    CHECK(loaded.forward_eval(batch).data == before.data);
    std::filesystem::remove(path);
}

TEST_CASE("attention maps: constant activations flatten to zero, identical clips agree") {
    Rng rng(15);
    Resnet3d model(tiny_cfg(), rng);
    // zero input propagates to exactly zero activations everywhere, the
    // all-equal case whose defined normalization is an all-zero map
    Tensor<float> clip({3, 8, 32, 32});
    Tensor<float> map = model.attention_map(clip, 3);
    for (float v : map.data) CHECK(v == 0.f);

    Rng crng(16);
    Tensor<float> noisy = Tensor<float>::uniform({3, 8, 32, 32}, crng, 0.f, 1.f);
    Tensor<float> a = model.attention_map(noisy, 4);
    Tensor<float> b = model.attention_map(noisy, 4);
    CHECK(a.data == b.data);
    CHECK_THROWS_AS(model.attention_map(noisy, 6), NumericError);
}
