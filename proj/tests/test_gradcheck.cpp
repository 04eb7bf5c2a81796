#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sgst/gradcheck.hpp"
#include "sgst/ops.hpp"
#include "sgst/rng.hpp"

using namespace sgst;

namespace {

// Nudges values away from zero so relu kinks are not sampled.
Tensor<double> kink_free(Shape shape, Rng& rng) {
    Tensor<double> t(std::move(shape));
    for (auto& v : t.data) {
        double x = rng.next_range(-1.0, 1.0);
        v = x >= 0 ? x + 0.1 : x - 0.1;
    }
    return t;
}

}  // namespace

TEST_CASE("linear layer gradients are exact") {
    Rng rng(1);
    auto f = [](const std::vector<NodePtr<double>>& in) {
        auto y = linear(in[0], in[1], in[2]);
        return softmax_crossentropy(y, {1, 0}).loss;
    };
    double err = grad_check(f, {kink_free({2, 5}, rng), kink_free({3, 5}, rng), kink_free({3}, rng)});
    CHECK(err < 1e-6);
}

TEST_CASE("conv3d gradients") {
    Rng rng(2);
    auto f = [](const std::vector<NodePtr<double>>& in) {
        auto y = conv3d(in[0], in[1], {1, 2, 1}, {1, 0, 1});
        auto p = global_avg_pool(relu(y));
        return softmax_crossentropy(p, {0}).loss;
    };
    double err = grad_check(f, {kink_free({1, 2, 3, 5, 4}, rng), kink_free({3, 2, 2, 3, 2}, rng)});
    CHECK(err < 1e-4);
}

TEST_CASE("maxpool gradients") {
    Rng rng(3);
    auto f = [](const std::vector<NodePtr<double>>& in) {
        auto y = maxpool3d(in[0], {2, 2, 2}, {1, 2, 2}, {0, 1, 1});
        return softmax_crossentropy(global_avg_pool(y), {1}).loss;
    };
    double err = grad_check(f, {kink_free({1, 2, 3, 4, 4}, rng)});
    CHECK(err < 1e-4);
}

TEST_CASE("batchnorm gradients in train mode") {
    Rng rng(4);
    auto f = [](const std::vector<NodePtr<double>>& in) {
        auto stats = std::make_shared<BnStats<double>>(2);
        auto y = batchnorm3d(in[0], in[1], in[2], stats, BnMode::Train);
        return softmax_crossentropy(global_avg_pool(y), {0, 1}).loss;
    };
    double err = grad_check(f, {kink_free({2, 2, 2, 3, 3}, rng), kink_free({2}, rng), kink_free({2}, rng)});
    CHECK(err < 1e-4);
}

TEST_CASE("batchnorm gradients in eval mode") {
    Rng rng(5);
    auto stats = std::make_shared<BnStats<double>>(2);
    stats->running_mean[0] = 0.3;
    stats->running_mean[1] = -0.2;
    stats->running_var[0] = 1.7;
    stats->running_var[1] = 0.6;
    auto f = [stats](const std::vector<NodePtr<double>>& in) {
        auto y = batchnorm3d(in[0], in[1], in[2], stats, BnMode::Eval);
        return softmax_crossentropy(global_avg_pool(y), {1, 0}).loss;
    };
    double err = grad_check(f, {kink_free({2, 2, 2, 2, 2}, rng), kink_free({2}, rng), kink_free({2}, rng)});
    CHECK(err < 1e-4);
}

TEST_CASE("elementwise add and mul gradients") {
    Rng rng(6);
    auto f = [](const std::vector<NodePtr<double>>& in) {
        auto y = add(mul(in[0], in[1]), in[0]);
        return softmax_crossentropy(y, {2}).loss;
    };
    double err = grad_check(f, {kink_free({1, 4}, rng), kink_free({1, 4}, rng)});
    CHECK(err < 1e-6);
}

TEST_CASE("full tiny-network composite passes the finite-difference check") {
    Rng rng(7);
    auto stats = std::make_shared<BnStats<double>>(2);
    auto f = [stats](const std::vector<NodePtr<double>>& in) {
        auto c = conv3d(in[0], in[1], {1, 1, 1}, {1, 1, 1});
        auto b = batchnorm3d(c, in[2], in[3], stats, BnMode::Train);
        auto r = relu(b);
        auto p = maxpool3d(r, {1, 2, 2}, {1, 2, 2});
        auto g = global_avg_pool(p);
        auto y = linear(g, in[4], in[5]);
        return softmax_crossentropy(y, {0, 2}).loss;
    };
    double err = grad_check(f,
                            {kink_free({2, 1, 2, 4, 4}, rng), kink_free({2, 1, 3, 3, 3}, rng), kink_free({2}, rng),
                             kink_free({2}, rng), kink_free({3, 2}, rng), kink_free({3}, rng)},
                            1e-4, 40, 99);
    CHECK(err < 1e-4);
}
