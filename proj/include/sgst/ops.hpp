#pragma once

#include <memory>
#include <vector>

#include "sgst/autodiff.hpp"

namespace sgst {

struct Dims3 {
    int64_t t = 1;
    int64_t h = 1;
    int64_t w = 1;
};

// Per-layer batchnorm state. Lives outside the tape; train-mode forward
// updates it in place.
template <typename T>
struct BnStats {
    Tensor<T> running_mean;
    Tensor<T> running_var;
    explicit BnStats(int64_t channels)
        : running_mean(Tensor<T>::zeros({channels})), running_var(Tensor<T>::full({channels}, T(1))) {}
};

enum class BnMode { Train, Eval };

// 3D cross-correlation, x: N x C x T x H x W, k: F x C x kt x kh x kw.
// Output dims follow floor((D + 2p - k)/s) + 1 per axis; a window that does
// not fit the padded input is an error. Lowered to matrix multiply through
// per-(sample, output-frame) im2col chunks.
template <typename T>
NodePtr<T> conv3d(NodePtr<T> x, NodePtr<T> k, Dims3 stride, Dims3 pad);

template <typename T>
NodePtr<T> relu(NodePtr<T> x);

template <typename T>
NodePtr<T> maxpool3d(NodePtr<T> x, Dims3 window, Dims3 stride, Dims3 pad = {0, 0, 0});

// N x C x T x H x W -> N x C, mean over T,H,W.
template <typename T>
NodePtr<T> global_avg_pool(NodePtr<T> x);

// x: N x D, w: K x D, b: K -> N x K
template <typename T>
NodePtr<T> linear(NodePtr<T> x, NodePtr<T> w, NodePtr<T> b);

template <typename T>
NodePtr<T> add(NodePtr<T> a, NodePtr<T> b);

template <typename T>
NodePtr<T> mul(NodePtr<T> a, NodePtr<T> b);

// Normalizes over (N,T,H,W) per channel in train mode (updating the running
// stats), over the running stats in eval mode. Train mode requires more than
// one element per channel.
template <typename T>
NodePtr<T> batchnorm3d(NodePtr<T> x, NodePtr<T> gamma, NodePtr<T> beta, std::shared_ptr<BnStats<T>> stats,
                       BnMode mode, double eps = 1e-5, double momentum = 0.1);

template <typename T>
struct CeResult {
    NodePtr<T> loss;    // scalar, mean over the batch of -ln p[label]
    Tensor<T> probs;    // N x K, rows sum to 1
};

template <typename T>
CeResult<T> softmax_crossentropy(NodePtr<T> logits, const std::vector<int>& labels);

// Shape of conv3d output for the given input/kernel/stride/pad; throws on
// channel mismatch or windows that do not fit.
Shape conv3d_output_shape(const Shape& x, const Shape& k, Dims3 stride, Dims3 pad);

}  // namespace sgst
