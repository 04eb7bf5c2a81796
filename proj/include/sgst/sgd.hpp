#pragma once

#include <map>
#include <string>

#include "sgst/autodiff.hpp"

namespace sgst {

// Named trainable parameters with paired momentum buffers. The map keeps
// names sorted, so update and serialization order is stable. Momentum
// allocates on the first update; eval-only models never pay for it.
template <typename T>
struct ParamSet {
    struct Entry {
        NodePtr<T> node;
        Tensor<T> momentum;
    };
    std::map<std::string, Entry> params;

    void add(const std::string& name, NodePtr<T> node) {
        if (params.count(name)) throw NumericError("duplicate parameter name: " + name);
        params.emplace(name, Entry{std::move(node), Tensor<T>{}});
    }

    void zero_grads() {
        for (auto& [name, e] : params) e.node->zero_grad();
    }

    int64_t total_elements() const {
        int64_t n = 0;
        for (const auto& [name, e] : params) n += e.node->value.numel();
        return n;
    }
};

// v <- momentum * v + grad + weight_decay * param;  param <- param - lr * v
template <typename T>
void sgd_update(ParamSet<T>& set, double lr, double momentum = 0.9, double weight_decay = 1e-4) {
    for (auto& [name, e] : set.params) {
        Node<T>& node = *e.node;
        if (node.grad.numel() == 0) node.ensure_grad();
        if (e.momentum.numel() == 0) e.momentum = Tensor<T>::zeros(node.value.shape);
        check_same_shape(node.value, node.grad, "sgd_update");
        const int64_t n = node.value.numel();
        T* v = e.momentum.ptr();
        T* p = node.value.ptr();
        const T* g = node.grad.ptr();
        for (int64_t i = 0; i < n; ++i) {
            v[i] = static_cast<T>(momentum * v[i] + g[i] + weight_decay * p[i]);
            p[i] -= static_cast<T>(lr * v[i]);
        }
    }
}

}  // namespace sgst
