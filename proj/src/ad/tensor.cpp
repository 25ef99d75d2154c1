// src/ad/tensor.cpp

// Copyright 2026 The consep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "consep/ad/tensor.hpp"

#include <unordered_set>
#include <utility>

#include "consep/error.hpp"

namespace consep::ad {

namespace {
thread_local bool t_grad_enabled = true;
}  // namespace

Tensor Tensor::constant(Array value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Tensor(std::move(node));
}

Tensor Tensor::parameter(Array value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Tensor(std::move(node));
}

double Tensor::item() const {
  if (node_->value.size() != 1)
    throw ValidationError("item: tensor of shape " + to_string(shape()) + " is not a scalar");
  return node_->value[0];
}

void Tensor::zero_grad() {
  if (!node_->grad.empty()) node_->grad.fill(0.0);
}

Tensor Tensor::detach_clone() const {
  auto node = std::make_shared<Node>();
  node->value = node_->value;
  node->requires_grad = node_->requires_grad;
  return Tensor(std::move(node));
}

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

bool grad_enabled() { return t_grad_enabled; }

Tensor make_result(Array value, std::vector<Tensor> parents, BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  if (t_grad_enabled) {
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->is_leaf = false;
      node->parents.reserve(parents.size());
      for (auto& p : parents) node->parents.push_back(p.node());
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

Array& grad_buffer(Node& node) {
  if (node.grad.empty()) node.grad = Array(node.value.shape(), 0.0);
  return node.grad;
}

void accumulate(Node& node, const Array& g) {
  if (!node.requires_grad) return;
  Array& buf = grad_buffer(node);
  auto dst = buf.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1)
    throw ValidationError("backward: loss must be a scalar, got shape " +
                          (loss.defined() ? to_string(loss.shape()) : std::string("<undefined>")));
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (parents first).
  // Owning pointers: releasing a node's parents must not free queued ancestors.
  std::vector<NodePtr> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<NodePtr, std::size_t>> stack;
  stack.emplace_back(loss.node(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    NodePtr node = stack.back().first;
    std::size_t& next = stack.back().second;
    if (next < node->parents.size()) {
      NodePtr parent = node->parents[next++];
      if (parent->requires_grad && visited.insert(parent.get()).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  grad_buffer(*loss.node()).fill(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = it->get();
    if (node->is_leaf) continue;
    if (node->backward && !node->grad.empty()) node->backward(node->grad);
    node->backward = nullptr;
    node->parents.clear();
    node->grad = Array();
  }
}

}  // namespace consep::ad
