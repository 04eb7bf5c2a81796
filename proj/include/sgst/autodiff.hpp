#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "sgst/tensor.hpp"

namespace sgst {

// Reverse-mode tape node. Ops build a DAG of shared_ptr<Node<T>>; backward()
// walks it once in reverse topological order, accumulating gradients
// additively, so shared subexpressions (diamonds) are handled exactly.
//
// A node whose inputs all have requires_grad == false records neither parents
// nor a backward function, which lets eval-mode forward passes release
// intermediate activations as soon as the chain moves past them.
template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;  // allocated lazily, same shape as value
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    explicit Node(Tensor<T> v, bool req = false) : value(std::move(v)), requires_grad(req) {}

    void ensure_grad() {
        if (grad.numel() == 0) grad = Tensor<T>::zeros(value.shape);
    }

    void zero_grad() {
        if (grad.numel() != 0) grad.fill(T(0));
    }
};

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

template <typename T>
NodePtr<T> make_leaf(Tensor<T> value, bool requires_grad = false) {
    return std::make_shared<Node<T>>(std::move(value), requires_grad);
}

// Disables tape recording in scope. Inference under this guard keeps no
// parent links, so intermediate activations free as the chain advances.
class NoGradGuard {
public:
    NoGradGuard() : prev_(enabled_ref()) { enabled_ref() = false; }
    ~NoGradGuard() { enabled_ref() = prev_; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

    static bool grad_enabled() { return enabled_ref(); }

private:
    static bool& enabled_ref() {
        thread_local bool enabled = true;
        return enabled;
    }
    bool prev_;
};

template <typename T>
NodePtr<T> make_op_node(Tensor<T> value, std::vector<NodePtr<T>> inputs,
                        std::function<void(Node<T>&)> backward_fn) {
    bool req = false;
    if (NoGradGuard::grad_enabled())
        for (const auto& p : inputs)
            if (p && p->requires_grad) req = true;
    auto node = std::make_shared<Node<T>>(std::move(value), req);
    if (req) {
        node->parents = std::move(inputs);
        node->backward_fn = std::move(backward_fn);
    }
    return node;
}

// Runs reverse-mode accumulation from a scalar root. Seeds d(root)/d(root)=1.
template <typename T>
void backward(const NodePtr<T>& root) {
    if (!root->requires_grad) throw NumericError("backward: root does not require grad");
    if (root->value.numel() != 1) throw NumericError("backward: root must be a scalar");

    // Iterative post-order DFS; each node visited exactly once.
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    std::vector<std::pair<Node<T>*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            Node<T>* parent = node->parents[idx].get();
            ++idx;
            if (parent && parent->requires_grad && !seen.count(parent)) {
                seen.insert(parent);
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* node = *it;
        if (node->backward_fn) node->backward_fn(*node);
    }
}

}  // namespace sgst
