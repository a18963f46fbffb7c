// Reverse-mode automatic differentiation over dense 2-D tensors.
// Define-by-run: each training step builds a fresh graph of shared_ptr
// nodes; backward() runs reverse accumulation from a scalar root.
// The op set covers what the ranking models need, plus grad_reverse for
// adversarial training (identity forward, -lambda * upstream backward).
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "ltrlab/tensor.hpp"

namespace ltrlab::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  Tensor grad;  // allocated lazily by backward; same shape as value
  const char* op = "leaf";
  std::uint64_t id = 0;
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backprop;  // accumulates this->grad into parents
};

namespace detail {

inline std::uint64_t next_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

inline NodePtr make_node(Tensor value, const char* op,
                         std::vector<NodePtr> parents) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = op;
  n->id = next_id();
  n->parents = std::move(parents);
  for (const auto& p : n->parents)
    if (p->requires_grad) n->requires_grad = true;
  return n;
}

inline void ensure_grad(Node& n) {
  if (n.grad.numel() != n.value.numel())
    n.grad = Tensor(n.value.rows(), n.value.cols());
}

}  // namespace detail

inline NodePtr constant(Tensor t) {
  return detail::make_node(std::move(t), "const", {});
}

inline NodePtr constant(double v) { return constant(Tensor::scalar(v)); }

// Leaf whose gradient is wanted (model parameters, gradcheck inputs).
inline NodePtr param(Tensor t) {
  auto n = detail::make_node(std::move(t), "param", {});
  n->requires_grad = true;
  return n;
}

// a + b. b may have the same shape, be a 1 x cols row (broadcast over the
// list/row axis), or be a 1x1 scalar.
inline NodePtr add(const NodePtr& a, const NodePtr& b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  Tensor out = A;
  if (A.same_shape(B)) {
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += B[i];
  } else if (B.rows() == 1 && B.cols() == A.cols()) {
    for (std::size_t r = 0; r < A.rows(); ++r)
      for (std::size_t c = 0; c < A.cols(); ++c) out.at(r, c) += B.at(0, c);
  } else if (B.is_scalar()) {
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += B[0];
  } else {
    throw ShapeError("add", A, B);
  }
  auto n = detail::make_node(std::move(out), "add", {a, b});
  n->backprop = [a, b](Node& self) {
    detail::ensure_grad(*a);
    detail::ensure_grad(*b);
    for (std::size_t i = 0; i < self.grad.numel(); ++i) a->grad[i] += self.grad[i];
    if (a->value.same_shape(b->value)) {
      for (std::size_t i = 0; i < self.grad.numel(); ++i)
        b->grad[i] += self.grad[i];
    } else if (b->value.rows() == 1 && !b->value.is_scalar()) {
      for (std::size_t r = 0; r < self.grad.rows(); ++r)
        for (std::size_t c = 0; c < self.grad.cols(); ++c)
          b->grad.at(0, c) += self.grad.at(r, c);
    } else {
      for (std::size_t i = 0; i < self.grad.numel(); ++i)
        b->grad[0] += self.grad[i];
    }
  };
  return n;
}

// Element-wise a - b, equal shapes.
inline NodePtr sub(const NodePtr& a, const NodePtr& b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  if (!A.same_shape(B)) throw ShapeError("sub", A, B);
  Tensor out = A;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= B[i];
  auto n = detail::make_node(std::move(out), "sub", {a, b});
  n->backprop = [a, b](Node& self) {
    detail::ensure_grad(*a);
    detail::ensure_grad(*b);
    for (std::size_t i = 0; i < self.grad.numel(); ++i) {
      a->grad[i] += self.grad[i];
      b->grad[i] -= self.grad[i];
    }
  };
  return n;
}

// Element-wise product; b broadcasts like add().
inline NodePtr mul(const NodePtr& a, const NodePtr& b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  Tensor out = A;
  if (A.same_shape(B)) {
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= B[i];
  } else if (B.rows() == 1 && B.cols() == A.cols()) {
    for (std::size_t r = 0; r < A.rows(); ++r)
      for (std::size_t c = 0; c < A.cols(); ++c) out.at(r, c) *= B.at(0, c);
  } else if (B.is_scalar()) {
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= B[0];
  } else {
    throw ShapeError("mul", A, B);
  }
  auto n = detail::make_node(std::move(out), "mul", {a, b});
  n->backprop = [a, b](Node& self) {
    detail::ensure_grad(*a);
    detail::ensure_grad(*b);
    const Tensor& A = a->value;
    const Tensor& B = b->value;
    if (A.same_shape(B)) {
      for (std::size_t i = 0; i < self.grad.numel(); ++i) {
        a->grad[i] += self.grad[i] * B[i];
        b->grad[i] += self.grad[i] * A[i];
      }
    } else if (B.rows() == 1 && !B.is_scalar()) {
      for (std::size_t r = 0; r < A.rows(); ++r)
        for (std::size_t c = 0; c < A.cols(); ++c) {
          a->grad.at(r, c) += self.grad.at(r, c) * B.at(0, c);
          b->grad.at(0, c) += self.grad.at(r, c) * A.at(r, c);
        }
    } else {
      for (std::size_t i = 0; i < self.grad.numel(); ++i) {
        a->grad[i] += self.grad[i] * B[0];
        b->grad[0] += self.grad[i] * A[i];
      }
    }
  };
  return n;
}

inline NodePtr scalar_mul(const NodePtr& a, double c) {
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= c;
  auto n = detail::make_node(std::move(out), "scalar_mul", {a});
  n->backprop = [a, c](Node& self) {
    detail::ensure_grad(*a);
    for (std::size_t i = 0; i < self.grad.numel(); ++i)
      a->grad[i] += c * self.grad[i];
  };
  return n;
}

inline NodePtr matmul(const NodePtr& a, const NodePtr& b) {
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  if (A.cols() != B.rows()) throw ShapeError("matmul", A, B);
  Tensor out(A.rows(), B.cols());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t k = 0; k < A.cols(); ++k) {
      const double aik = A.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < B.cols(); ++j)
        out.at(i, j) += aik * B.at(k, j);
    }
  auto n = detail::make_node(std::move(out), "matmul", {a, b});
  n->backprop = [a, b](Node& self) {
    detail::ensure_grad(*a);
    detail::ensure_grad(*b);
    const Tensor& A = a->value;
    const Tensor& B = b->value;
    const Tensor& G = self.grad;
    // dA = G * B^T
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < G.cols(); ++j) {
        const double gij = G.at(i, j);
        if (gij == 0.0) continue;
        for (std::size_t k = 0; k < A.cols(); ++k)
          a->grad.at(i, k) += gij * B.at(k, j);
      }
    // dB = A^T * G
    for (std::size_t k = 0; k < B.rows(); ++k)
      for (std::size_t i = 0; i < A.rows(); ++i) {
        const double aik = A.at(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < G.cols(); ++j)
          b->grad.at(k, j) += aik * G.at(i, j);
      }
  };
  return n;
}

inline NodePtr transpose(const NodePtr& a) {
  const Tensor& A = a->value;
  Tensor out(A.cols(), A.rows());
  for (std::size_t r = 0; r < A.rows(); ++r)
    for (std::size_t c = 0; c < A.cols(); ++c) out.at(c, r) = A.at(r, c);
  auto n = detail::make_node(std::move(out), "transpose", {a});
  n->backprop = [a](Node& self) {
    detail::ensure_grad(*a);
    for (std::size_t r = 0; r < self.grad.rows(); ++r)
      for (std::size_t c = 0; c < self.grad.cols(); ++c)
        a->grad.at(c, r) += self.grad.at(r, c);
  };
  return n;
}

inline NodePtr relu(const NodePtr& a) {
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::max(0.0, out[i]);
  auto n = detail::make_node(std::move(out), "relu", {a});
  n->backprop = [a](Node& self) {
    detail::ensure_grad(*a);
    for (std::size_t i = 0; i < self.grad.numel(); ++i)
      if (a->value[i] > 0.0) a->grad[i] += self.grad[i];
  };
  return n;
}

inline NodePtr exp(const NodePtr& a) {
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::exp(out[i]);
  auto n = detail::make_node(std::move(out), "exp", {a});
  n->backprop = [a, raw = n.get()](Node& self) {
    detail::ensure_grad(*a);
    for (std::size_t i = 0; i < self.grad.numel(); ++i)
      a->grad[i] += self.grad[i] * raw->value[i];
  };
  return n;
}

inline NodePtr log(const NodePtr& a) {
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::log(out[i]);
  auto n = detail::make_node(std::move(out), "log", {a});
  n->backprop = [a](Node& self) {
    detail::ensure_grad(*a);
    for (std::size_t i = 0; i < self.grad.numel(); ++i)
      a->grad[i] += self.grad[i] / a->value[i];
  };
  return n;
}

// log(1 + e^x), stable at large |x|. d/dx = sigmoid(x).
inline NodePtr softplus(const NodePtr& a) {
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.numel(); ++i) {
    const double x = out[i];
    out[i] = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  }
  auto n = detail::make_node(std::move(out), "softplus", {a});
  n->backprop = [a](Node& self) {
    detail::ensure_grad(*a);
    for (std::size_t i = 0; i < self.grad.numel(); ++i) {
      const double x = a->value[i];
      const double sig = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                  : std::exp(x) / (1.0 + std::exp(x));
      a->grad[i] += self.grad[i] * sig;
    }
  };
  return n;
}

// axis = 0 reduces rows (output 1 x cols), axis = 1 reduces cols (rows x 1).
namespace detail {
inline void check_axis(int axis, const char* op) {
  if (axis != 0 && axis != 1)
    throw ShapeError(op, "axis must be 0 or 1, got " + std::to_string(axis));
}
}  // namespace detail

// Stabilized log-sum-exp along an axis: m + log sum e^(x-m).
inline NodePtr logsumexp(const NodePtr& a, int axis) {
  detail::check_axis(axis, "logsumexp");
  const Tensor& A = a->value;
  const std::size_t nr = axis == 1 ? A.rows() : 1;
  const std::size_t nc = axis == 1 ? 1 : A.cols();
  Tensor out(nr, nc);
  auto reduce = [&](std::size_t slice) {
    const std::size_t n = axis == 1 ? A.cols() : A.rows();
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double v = axis == 1 ? A.at(slice, i) : A.at(i, slice);
      m = std::max(m, v);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = axis == 1 ? A.at(slice, i) : A.at(i, slice);
      s += std::exp(v - m);
    }
    return m + std::log(s);
  };
  for (std::size_t s = 0; s < (axis == 1 ? A.rows() : A.cols()); ++s) {
    if (axis == 1)
      out.at(s, 0) = reduce(s);
    else
      out.at(0, s) = reduce(s);
  }
  auto n = detail::make_node(std::move(out), "logsumexp", {a});
  n->backprop = [a, axis, raw = n.get()](Node& self) {
    detail::ensure_grad(*a);
    const Tensor& A = a->value;
    for (std::size_t r = 0; r < A.rows(); ++r)
      for (std::size_t c = 0; c < A.cols(); ++c) {
        const double lse = axis == 1 ? raw->value.at(r, 0) : raw->value.at(0, c);
        const double g = axis == 1 ? self.grad.at(r, 0) : self.grad.at(0, c);
        a->grad.at(r, c) += g * std::exp(A.at(r, c) - lse);
      }
  };
  return n;
}

// Softmax along an axis (entries along that axis sum to 1), max-subtracted.
inline NodePtr softmax(const NodePtr& a, int axis) {
  detail::check_axis(axis, "softmax");
  const Tensor& A = a->value;
  Tensor out = A;
  const std::size_t nslice = axis == 1 ? A.rows() : A.cols();
  const std::size_t n = axis == 1 ? A.cols() : A.rows();
  auto get = [&](Tensor& t, std::size_t slice, std::size_t i) -> double& {
    return axis == 1 ? t.at(slice, i) : t.at(i, slice);
  };
  for (std::size_t s = 0; s < nslice; ++s) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, get(out, s, i));
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      get(out, s, i) = std::exp(get(out, s, i) - m);
      z += get(out, s, i);
    }
    for (std::size_t i = 0; i < n; ++i) get(out, s, i) /= z;
  }
  auto node = detail::make_node(std::move(out), "softmax", {a});
  node->backprop = [a, axis, raw = node.get()](Node& self) {
    detail::ensure_grad(*a);
    const Tensor& Y = raw->value;
    const std::size_t nslice = axis == 1 ? Y.rows() : Y.cols();
    const std::size_t n = axis == 1 ? Y.cols() : Y.rows();
    auto cget = [&](const Tensor& t, std::size_t slice, std::size_t i) {
      return axis == 1 ? t.at(slice, i) : t.at(i, slice);
    };
    for (std::size_t s = 0; s < nslice; ++s) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        dot += cget(self.grad, s, i) * cget(Y, s, i);
      for (std::size_t i = 0; i < n; ++i) {
        const double dy = cget(Y, s, i) * (cget(self.grad, s, i) - dot);
        if (axis == 1)
          a->grad.at(s, i) += dy;
        else
          a->grad.at(i, s) += dy;
      }
    }
  };
  return node;
}

inline NodePtr sum(const NodePtr& a, int axis) {
  detail::check_axis(axis, "sum");
  const Tensor& A = a->value;
  Tensor out(axis == 1 ? A.rows() : 1, axis == 1 ? 1 : A.cols());
  for (std::size_t r = 0; r < A.rows(); ++r)
    for (std::size_t c = 0; c < A.cols(); ++c) {
      if (axis == 1)
        out.at(r, 0) += A.at(r, c);
      else
        out.at(0, c) += A.at(r, c);
    }
  auto n = detail::make_node(std::move(out), "sum", {a});
  n->backprop = [a, axis](Node& self) {
    detail::ensure_grad(*a);
    for (std::size_t r = 0; r < a->value.rows(); ++r)
      for (std::size_t c = 0; c < a->value.cols(); ++c)
        a->grad.at(r, c) +=
            axis == 1 ? self.grad.at(r, 0) : self.grad.at(0, c);
  };
  return n;
}

inline NodePtr mean(const NodePtr& a, int axis) {
  detail::check_axis(axis, "mean");
  const double denom =
      axis == 1 ? double(a->value.cols()) : double(a->value.rows());
  return scalar_mul(sum(a, axis), 1.0 / denom);
}

// Reduce both axes to a scalar.
inline NodePtr sum_all(const NodePtr& a) { return sum(sum(a, 1), 0); }
inline NodePtr mean_all(const NodePtr& a) {
  return scalar_mul(sum_all(a), 1.0 / double(a->value.numel()));
}

// Concatenate along axis 0 (stack rows) or axis 1 (the feature axis).
inline NodePtr concat(const NodePtr& a, const NodePtr& b, int axis) {
  detail::check_axis(axis, "concat");
  const Tensor& A = a->value;
  const Tensor& B = b->value;
  if (axis == 1 && A.rows() != B.rows()) throw ShapeError("concat", A, B);
  if (axis == 0 && A.cols() != B.cols()) throw ShapeError("concat", A, B);
  Tensor out(axis == 0 ? A.rows() + B.rows() : A.rows(),
             axis == 1 ? A.cols() + B.cols() : A.cols());
  for (std::size_t r = 0; r < A.rows(); ++r)
    for (std::size_t c = 0; c < A.cols(); ++c) out.at(r, c) = A.at(r, c);
  for (std::size_t r = 0; r < B.rows(); ++r)
    for (std::size_t c = 0; c < B.cols(); ++c) {
      if (axis == 0)
        out.at(A.rows() + r, c) = B.at(r, c);
      else
        out.at(r, A.cols() + c) = B.at(r, c);
    }
  auto n = detail::make_node(std::move(out), "concat", {a, b});
  n->backprop = [a, b, axis](Node& self) {
    detail::ensure_grad(*a);
    detail::ensure_grad(*b);
    const Tensor& A = a->value;
    for (std::size_t r = 0; r < A.rows(); ++r)
      for (std::size_t c = 0; c < A.cols(); ++c)
        a->grad.at(r, c) += self.grad.at(r, c);
    for (std::size_t r = 0; r < b->value.rows(); ++r)
      for (std::size_t c = 0; c < b->value.cols(); ++c)
        b->grad.at(r, c) += axis == 0 ? self.grad.at(A.rows() + r, c)
                                      : self.grad.at(r, A.cols() + c);
  };
  return n;
}

// Columns [start, start+len) of a.
inline NodePtr slice_cols(const NodePtr& a, std::size_t start,
                          std::size_t len) {
  const Tensor& A = a->value;
  if (start + len > A.cols())
    throw ShapeError("slice_cols", "slice [" + std::to_string(start) + ", " +
                                       std::to_string(start + len) +
                                       ") out of range for " + A.shape_str());
  Tensor out(A.rows(), len);
  for (std::size_t r = 0; r < A.rows(); ++r)
    for (std::size_t c = 0; c < len; ++c) out.at(r, c) = A.at(r, start + c);
  auto n = detail::make_node(std::move(out), "slice_cols", {a});
  n->backprop = [a, start, len](Node& self) {
    detail::ensure_grad(*a);
    for (std::size_t r = 0; r < self.grad.rows(); ++r)
      for (std::size_t c = 0; c < len; ++c)
        a->grad.at(r, start + c) += self.grad.at(r, c);
  };
  return n;
}

// Identity forward; backward multiplies the upstream gradient by -lambda.
inline NodePtr grad_reverse(const NodePtr& a, double lambda) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("grad_reverse: lambda must be > 0, got " +
                                std::to_string(lambda));
  auto n = detail::make_node(a->value, "grad_reverse", {a});
  n->backprop = [a, lambda](Node& self) {
    detail::ensure_grad(*a);
    for (std::size_t i = 0; i < self.grad.numel(); ++i)
      a->grad[i] += -lambda * self.grad[i];
  };
  return n;
}

// Reverse accumulation from a scalar root. Every reachable node that
// requires a gradient ends up with grad = d root / d node.
inline void backward(const NodePtr& root) {
  if (!root->value.is_scalar())
    throw std::invalid_argument("backward: root must be scalar, got shape " +
                                root->value.shape_str());
  // Collect reachable nodes; ids increase from parents to children, so
  // descending id order is a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents)
      if (seen.insert(p.get()).second) stack.push_back(p.get());
  }
  std::sort(order.begin(), order.end(),
            [](const Node* a, const Node* b) { return a->id > b->id; });
  detail::ensure_grad(*root);
  root->grad[0] = 1.0;
  for (Node* n : order) {
    if (!n->requires_grad || !n->backprop) continue;
    detail::ensure_grad(*n);
    n->backprop(*n);
  }
}

}  // namespace ltrlab::ad
