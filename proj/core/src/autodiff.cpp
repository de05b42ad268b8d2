#include "nbmoe/autodiff.hpp"

#include <cmath>
#include <string>

#include "nbmoe/errors.hpp"

namespace nbmoe::num {

namespace {

// Sums `grad` down to the shape `b` had before broadcasting against `grad`.
Tensor reduce_to(const Tensor& grad, const Tensor& b, Broadcast kind) {
  switch (kind) {
    case Broadcast::Exact:
      return grad;
    case Broadcast::Row: {
      Tensor out(1, grad.cols());
      for (std::size_t r = 0; r < grad.rows(); ++r)
        for (std::size_t c = 0; c < grad.cols(); ++c) out(0, c) += grad(r, c);
      return out;
    }
    case Broadcast::Column: {
      Tensor out(b.rows(), 1);
      for (std::size_t r = 0; r < grad.rows(); ++r)
        for (std::size_t c = 0; c < grad.cols(); ++c) out(r, 0) += grad(r, c);
      return out;
    }
  }
  return grad;
}

// Expands `b` to the shape of `grad` following `kind`.
Tensor expand_like(const Tensor& b, const Tensor& like, Broadcast kind) {
  if (kind == Broadcast::Exact) return b;
  Tensor out(like.rows(), like.cols());
  for (std::size_t r = 0; r < like.rows(); ++r)
    for (std::size_t c = 0; c < like.cols(); ++c)
      out(r, c) = kind == Broadcast::Row ? b(0, c) : b(r, 0);
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.data()[i];
  return out;
}

void check_same_tape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) throw ContractError(std::string(op) + ": operands on different tapes");
}

// Backward for softmax-like outputs: dx_i = y_i (g_i - sum_j g_j y_j).
Tensor softmax_backward(const Tensor& y, const Tensor& g) {
  Tensor dx(y.rows(), y.cols());
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
    for (std::size_t c = 0; c < y.cols(); ++c) dx(r, c) = y(r, c) * (g(r, c) - dot);
  }
  return dx;
}

}  // namespace

const Tensor& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, false, {}, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Tensor value) {
  ensure_finite(value, "parameter");
  nodes_.push_back(Node{std::move(value), {}, true, false, {}, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward) {
  bool tracked = false;
  for (std::size_t p : parents) {
    if (p >= nodes_.size()) throw ContractError("tape parent index out of range");
    tracked = tracked || nodes_[p].requires_grad;
  }
  if (!tracked) backward = nullptr;
  nodes_.push_back(Node{std::move(value), {}, tracked, false, std::move(parents), std::move(backward)});
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(std::size_t id, const Tensor& grad) {
  Node& node = nodes_.at(id);
  if (!node.requires_grad) return;
  if (!node.has_grad) {
    if (!grad.same_shape(node.value)) throw DimensionError("gradient shape mismatch on tape");
    node.grad = grad;
    node.has_grad = true;
    return;
  }
  for (std::size_t i = 0; i < grad.size(); ++i) node.grad.data()[i] += grad.data()[i];
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw ContractError("backward: loss recorded on another tape");
  const Tensor& lv = value(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward: loss must be a 1x1 tensor, got " + std::to_string(lv.rows()) +
                        "x" + std::to_string(lv.cols()));
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  if (!nodes_[loss.id()].requires_grad) return;
  nodes_[loss.id()].grad = Tensor(1, 1, 1.0);
  nodes_[loss.id()].has_grad = true;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    // Copy: the closure may accumulate into nodes_ but never reallocates it.
    const Tensor g = n.grad;
    n.backward(*this, g);
  }
}

Tensor Tape::grad(std::size_t id) const {
  const Node& n = nodes_.at(id);
  if (n.has_grad) return n.grad;
  return Tensor(n.value.rows(), n.value.cols());
}

Var matmul(Var a, Var b) {
  check_same_tape(a, b, "matmul");
  Tape& t = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(num::matmul(a.value(), b.value()), {ia, ib},
                  [ia, ib](Tape& tp, const Tensor& g) {
                    if (tp.requires_grad(ia)) tp.accumulate(ia, num::matmul(g, transpose(tp.value(ib))));
                    if (tp.requires_grad(ib)) tp.accumulate(ib, num::matmul(transpose(tp.value(ia)), g));
                  });
}

Var add(Var a, Var b) {
  check_same_tape(a, b, "add");
  const Broadcast kind = broadcast_kind(a.value(), b.value(), "add");
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(num::add(a.value(), b.value()), {ia, ib},
                         [ia, ib, kind](Tape& tp, const Tensor& g) {
                           tp.accumulate(ia, g);
                           if (tp.requires_grad(ib)) tp.accumulate(ib, reduce_to(g, tp.value(ib), kind));
                         });
}

Var sub(Var a, Var b) {
  check_same_tape(a, b, "sub");
  const Broadcast kind = broadcast_kind(a.value(), b.value(), "sub");
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(num::sub(a.value(), b.value()), {ia, ib},
                         [ia, ib, kind](Tape& tp, const Tensor& g) {
                           tp.accumulate(ia, g);
                           if (tp.requires_grad(ib))
                             tp.accumulate(ib, num::scale(reduce_to(g, tp.value(ib), kind), -1.0));
                         });
}

Var mul(Var a, Var b) {
  check_same_tape(a, b, "mul");
  const Broadcast kind = broadcast_kind(a.value(), b.value(), "mul");
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(
      num::mul(a.value(), b.value()), {ia, ib}, [ia, ib, kind](Tape& tp, const Tensor& g) {
        const Tensor& av = tp.value(ia);
        const Tensor& bv = tp.value(ib);
        if (tp.requires_grad(ia)) tp.accumulate(ia, hadamard(g, expand_like(bv, av, kind)));
        if (tp.requires_grad(ib)) tp.accumulate(ib, reduce_to(hadamard(g, av), bv, kind));
      });
}

Var scale(Var a, double factor) {
  const std::size_t ia = a.id();
  return a.tape().record(num::scale(a.value(), factor), {ia},
                         [ia, factor](Tape& tp, const Tensor& g) {
                           tp.accumulate(ia, num::scale(g, factor));
                         });
}

Var relu(Var a) {
  const std::size_t ia = a.id();
  return a.tape().record(num::relu(a.value()), {ia}, [ia](Tape& tp, const Tensor& g) {
    const Tensor& x = tp.value(ia);
    Tensor dx = g;
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (!(x.data()[i] > 0.0)) dx.data()[i] = 0.0;
    tp.accumulate(ia, dx);
  });
}

Var abs(Var a) {
  const std::size_t ia = a.id();
  Tensor out = a.value();
  for (double& v : out.data()) v = std::abs(v);
  return a.tape().record(std::move(out), {ia}, [ia](Tape& tp, const Tensor& g) {
    const Tensor& x = tp.value(ia);
    Tensor dx = g;
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const double v = x.data()[i];
      dx.data()[i] *= v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    }
    tp.accumulate(ia, dx);
  });
}

Var softmax_rows(Var a) {
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  const std::size_t self = t.size();
  return t.record(num::softmax_rows(a.value()), {ia}, [ia, self](Tape& tp, const Tensor& g) {
    tp.accumulate(ia, softmax_backward(tp.value(self), g));
  });
}

Var masked_softmax_rows(Var a, const Tensor& mask) {
  const Tensor& x = a.value();
  if (!mask.same_shape(x)) throw DimensionError("masked_softmax_rows: mask shape differs from input");
  ensure_finite(x, "masked_softmax_rows");
  Tensor out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double mx = -INFINITY;
    for (std::size_t c = 0; c < x.cols(); ++c)
      if (mask(r, c) != 0.0) mx = std::max(mx, x(r, c));
    if (!std::isfinite(mx)) throw ContractError("masked_softmax_rows: row with empty mask");
    double total = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (mask(r, c) == 0.0) continue;
      out(r, c) = std::exp(x(r, c) - mx);
      total += out(r, c);
    }
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) /= total;
  }
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  const std::size_t self = t.size();
  // Unselected entries have y = 0, so the dense softmax backward already
  // yields zero gradient for them.
  return t.record(std::move(out), {ia}, [ia, self](Tape& tp, const Tensor& g) {
    tp.accumulate(ia, softmax_backward(tp.value(self), g));
  });
}

Var layer_norm_rows(Var a, double eps) {
  const Tensor& x = a.value();
  Tensor y = num::layer_norm_rows(x, eps);
  // Per-row inverse standard deviation, needed by the backward pass.
  std::vector<double> inv_std(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    const double n = static_cast<double>(row.size());
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    inv_std[r] = 1.0 / std::sqrt(var / n + eps);
  }
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  const std::size_t self = t.size();
  return t.record(std::move(y), {ia},
                  [ia, self, inv_std = std::move(inv_std)](Tape& tp, const Tensor& g) {
                    const Tensor& yv = tp.value(self);
                    Tensor dx(yv.rows(), yv.cols());
                    const double n = static_cast<double>(yv.cols());
                    for (std::size_t r = 0; r < yv.rows(); ++r) {
                      double g_mean = 0.0, gy_mean = 0.0;
                      for (std::size_t c = 0; c < yv.cols(); ++c) {
                        g_mean += g(r, c);
                        gy_mean += g(r, c) * yv(r, c);
                      }
                      g_mean /= n;
                      gy_mean /= n;
                      for (std::size_t c = 0; c < yv.cols(); ++c)
                        dx(r, c) = inv_std[r] * (g(r, c) - g_mean - yv(r, c) * gy_mean);
                    }
                    tp.accumulate(ia, dx);
                  });
}

Var column(Var a, std::size_t c) {
  const std::size_t ia = a.id();
  return a.tape().record(num::column(a.value(), c), {ia}, [ia, c](Tape& tp, const Tensor& g) {
    const Tensor& x = tp.value(ia);
    Tensor dx(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) dx(r, c) = g(r, 0);
    tp.accumulate(ia, dx);
  });
}

Var sum(Var a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  const std::size_t ia = a.id();
  return a.tape().record(Tensor(1, 1, total), {ia}, [ia](Tape& tp, const Tensor& g) {
    const Tensor& x = tp.value(ia);
    tp.accumulate(ia, Tensor(x.rows(), x.cols(), g(0, 0)));
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw DimensionError("mean of empty tensor");
  return scale(sum(a), 1.0 / n);
}

}  // namespace nbmoe::num
