#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "nbmoe/tensor.hpp"

namespace nbmoe::num {

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  std::size_t id() const noexcept { return id_; }
  Tape& tape() const noexcept { return *tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Reverse-mode tape over Tensor-valued nodes.
///
/// Nodes are appended in evaluation order, so parents always precede their
/// children and backward() is a single reverse sweep. Constants are recorded
/// as nodes that do not require gradients; their backward closures are never
/// invoked. A tape is not thread-safe; use one tape per thread.
class Tape {
 public:
  // Receives the gradient flowing into the node and pushes contributions to
  // the node's parents via Tape::accumulate.
  using BackwardFn = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor value);
  Var record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward);

  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<std::size_t>& parents(std::size_t id) const { return nodes_.at(id).parents; }

  // Adds `grad` into the gradient buffer of node `id` (no-op for constants).
  void accumulate(std::size_t id, const Tensor& grad);

  // Seeds d(loss)/d(loss) = 1 and propagates to every tracked node.
  void backward(Var loss);

  // Gradient of the last backward() loss w.r.t. node `id`; zeros when the
  // node was not reached.
  Tensor grad(std::size_t id) const;
  Tensor grad(Var v) const { return grad(v.id()); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    std::vector<std::size_t> parents;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// Differentiable ops. Broadcasting rules follow the untracked kernels.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var relu(Var a);
Var abs(Var a);
Var softmax_rows(Var a);
// Softmax over the entries where mask != 0; masked entries are exactly 0.
// The mask is a constant: selection carries no gradient.
Var masked_softmax_rows(Var a, const Tensor& mask);
Var layer_norm_rows(Var a, double eps = 1e-5);
Var column(Var a, std::size_t c);
Var sum(Var a);
Var mean(Var a);

}  // namespace nbmoe::num
