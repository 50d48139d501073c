// SPDX-License-Identifier: Apache-2.0
// ----------------------------------------------------------------------------
// Copyright 2026 The polcast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at:
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.
// ----------------------------------------------------------------------------

#pragma once

// Reverse-mode automatic differentiation over dense NCHW tensors.
//
// A Tensor is a shared handle to a Node. Operations create result nodes that
// keep their parents alive and carry a closure that pushes the node's
// gradient into the parents. backward() orders the reachable nodes
// topologically (parents before children, deterministic DFS over the
// recorded parent order) and runs the closures in exact reverse order, so
// accumulation order and therefore every gradient bit is reproducible.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "polcast/errors.hpp"

namespace polcast::nn {

/// (batch, channels, height, width). Lower-rank data uses leading/trailing 1s.
using Shape = std::array<int, 4>;

inline std::size_t numel(const Shape& s) {
    return static_cast<std::size_t>(s[0]) * s[1] * s[2] * s[3];
}

inline std::string shape_str(const Shape& s) {
    return "(" + std::to_string(s[0]) + "," + std::to_string(s[1]) + "," + std::to_string(s[2]) + "," +
           std::to_string(s[3]) + ")";
}

template <class T>
struct Node {
    Shape shape{1, 1, 1, 1};
    std::vector<T> value;
    std::vector<T> grad;  // empty until first touched
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;

    std::vector<T>& ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), T(0));
        return grad;
    }
};

namespace detail {
inline thread_local bool grad_enabled = true;
}

/// Disables graph recording on this thread for its lifetime (inference).
class NoGradGuard {
public:
    NoGradGuard() : previous_(detail::grad_enabled) { detail::grad_enabled = false; }
    ~NoGradGuard() { detail::grad_enabled = previous_; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

inline bool grad_enabled() { return detail::grad_enabled; }

template <class T>
class Tensor {
public:
    using value_type = T;
    using NodePtr = std::shared_ptr<Node<T>>;

    Tensor() = default;
    explicit Tensor(NodePtr node) : node_(std::move(node)) {}

    static Tensor zeros(const Shape& shape, bool requires_grad = false) {
        for (int d : shape) {
            if (d <= 0) throw DomainError("Tensor: non-positive dimension in " + shape_str(shape));
        }
        auto n = std::make_shared<Node<T>>();
        n->shape = shape;
        n->value.assign(numel(shape), T(0));
        n->requires_grad = requires_grad;
        return Tensor(std::move(n));
    }

    static Tensor full(const Shape& shape, T fill, bool requires_grad = false) {
        Tensor t = zeros(shape, requires_grad);
        std::fill(t.node_->value.begin(), t.node_->value.end(), fill);
        return t;
    }

    static Tensor from(const Shape& shape, std::vector<T> values, bool requires_grad = false) {
        if (values.size() != numel(shape)) throw DomainError("Tensor::from: value count does not match shape");
        Tensor t = zeros(shape, requires_grad);
        t.node_->value = std::move(values);
        return t;
    }

    bool defined() const noexcept { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    int n() const { return node_->shape[0]; }
    int c() const { return node_->shape[1]; }
    int h() const { return node_->shape[2]; }
    int w() const { return node_->shape[3]; }
    std::size_t size() const { return node_->value.size(); }

    std::span<T> values() { return node_->value; }
    std::span<const T> values() const { return node_->value; }
    std::span<T> grad() { return node_->ensure_grad(); }
    std::span<const T> grad() const { return node_->ensure_grad(); }
    bool has_grad() const { return !node_->grad.empty(); }

    T& at(int n, int c, int h, int w) { return node_->value[offset(n, c, h, w)]; }
    T at(int n, int c, int h, int w) const { return node_->value[offset(n, c, h, w)]; }
    T item() const {
        if (size() != 1) throw DomainError("Tensor::item: tensor is not a scalar");
        return node_->value[0];
    }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool v) { node_->requires_grad = v; }
    void zero_grad() {
        if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
    }

    /// Same values, detached from any graph.
    Tensor detach() const { return from(shape(), node_->value, false); }

    Node<T>* node() const { return node_.get(); }
    const NodePtr& node_ptr() const { return node_; }

    std::size_t offset(int n, int c, int h, int w) const {
        const Shape& s = node_->shape;
        return ((static_cast<std::size_t>(n) * s[1] + c) * s[2] + h) * s[3] + w;
    }

private:
    NodePtr node_;
};

/// Creates an op result. The backward closure is only attached when the
/// result participates in gradient computation.
template <class T>
Tensor<T> make_result(const Shape& shape, const char* op, std::vector<std::shared_ptr<Node<T>>> parents,
                      std::function<void(Node<T>&)> backward_fn) {
    Tensor<T> out = Tensor<T>::zeros(shape);
    Node<T>* node = out.node();
    node->op = op;
    bool track = grad_enabled() &&
                 std::any_of(parents.begin(), parents.end(), [](const auto& p) { return p && p->requires_grad; });
    if (track) {
        node->requires_grad = true;
        node->parents = std::move(parents);
        node->backward = std::move(backward_fn);
    }
    return out;
}

/// Topologically ordered record of the operations reachable from a root.
template <class T>
class Graph {
public:
    explicit Graph(const Tensor<T>& root) {
        if (!root.defined()) return;
        std::vector<std::pair<Node<T>*, std::size_t>> stack;
        std::unordered_set<Node<T>*> visited;
        auto seen = [&](Node<T>* n) { return visited.count(n) != 0; };
        // Iterative post-order DFS over the recorded parent order.
        stack.emplace_back(root.node(), 0);
        visited.insert(root.node());
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < node->parents.size()) {
                Node<T>* p = node->parents[next++].get();
                if (p && p->requires_grad && !seen(p)) {
                    visited.insert(p);
                    stack.emplace_back(p, 0);
                }
            } else {
                order_.push_back(node);
                stack.pop_back();
            }
        }
    }

    /// Parents precede children.
    const std::vector<Node<T>*>& order() const noexcept { return order_; }

    void backward() {
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            Node<T>* n = *it;
            if (n->backward && !n->grad.empty()) n->backward(*n);
        }
    }

private:
    std::vector<Node<T>*> order_;
};

/// Seeds d(root)/d(root) = 1 and propagates gradients to every leaf that requires them.
template <class T>
void backward(const Tensor<T>& root) {
    if (!root.requires_grad()) throw DomainError("backward: root does not require grad");
    auto& g = root.node()->ensure_grad();
    std::fill(g.begin(), g.end(), T(1));
    Graph<T>(root).backward();
}

/// Backpropagates an explicit upstream gradient (same shape as `root`).
template <class T>
void backward(const Tensor<T>& root, std::span<const T> upstream) {
    if (!root.requires_grad()) throw DomainError("backward: root does not require grad");
    if (upstream.size() != root.size()) throw DomainError("backward: upstream gradient size mismatch");
    auto& g = root.node()->ensure_grad();
    std::copy(upstream.begin(), upstream.end(), g.begin());
    Graph<T>(root).backward();
}

template <class T>
bool all_finite(std::span<const T> v) {
    return std::all_of(v.begin(), v.end(), [](T x) { return std::isfinite(x); });
}

/// Forward values must stay finite; checked in debug builds only.
template <class T>
void debug_check_finite([[maybe_unused]] const Tensor<T>& t) {
    assert(all_finite<T>(t.values()) && "non-finite value produced by a forward op");
}

}  // namespace polcast::nn
