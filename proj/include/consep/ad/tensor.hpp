// include/consep/ad/tensor.hpp

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

#ifndef CONSEP_AD_TENSOR_HPP_
#define CONSEP_AD_TENSOR_HPP_

#include <functional>
#include <memory>
#include <vector>

#include "consep/array.hpp"

namespace consep::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(const Array& grad_out)>;

/// Graph node. Leaves are parameters or constants; interior nodes carry the
/// closure that pushes their gradient into their parents.
struct Node {
  Array value;
  Array grad;  // empty until a gradient arrives
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<NodePtr> parents;
  BackwardFn backward;
};

/// Reverse-mode tensor handle. Copies share the node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Array value);
  static Tensor parameter(Array value);

  bool defined() const { return node_ != nullptr; }
  const Array& value() const { return node_->value; }
  Array& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  int dim(int i) const { return node_->value.dim(i); }
  std::size_t size() const { return node_->value.size(); }
  double item() const;

  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return node_ && !node_->grad.empty(); }
  const Array& grad() const { return node_->grad; }
  void zero_grad();
  void clear_grad() { node_->grad = Array(); }

  /// Deep copy of the value as a new leaf with the same requires_grad flag.
  Tensor detach_clone() const;

  const NodePtr& node() const { return node_; }
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}

 private:
  NodePtr node_;
};

/// Thread-local switch; while disabled no op records a backward closure.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Builds an op result. The closure is kept only when some parent needs a gradient.
Tensor make_result(Array value, std::vector<Tensor> parents, BackwardFn backward);

/// Adds `g` into the gradient buffer of `node`, allocating it on first use.
void accumulate(Node& node, const Array& g);
/// Gradient buffer of `node`, zero-initialised on first use.
Array& grad_buffer(Node& node);

/// Runs the tape from a scalar loss. Leaf gradients accumulate; interior nodes
/// release their closures so the tape cannot be replayed.
void backward(const Tensor& loss);

}  // namespace consep::ad

#endif  // CONSEP_AD_TENSOR_HPP_
