#pragma once

#include <rldp/diffcore/tensor.hpp>

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

namespace rldp {

namespace detail {

struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Pushes this node's grad into its inputs. Empty for leaves.
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.shape() != value.shape()) grad = Tensor(value.shape(), 0.0);
  }
};

}  // namespace detail

/// Handle to a node of the recorded computation graph. Copies share the node.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  static Var constant(Tensor value) {
    auto n = std::make_shared<detail::Node>();
    n->value = std::move(value);
    return Var(std::move(n));
  }

  static Var leaf(Tensor value, bool requires_grad = true) {
    auto n = std::make_shared<detail::Node>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    if (requires_grad) n->ensure_grad();
    return Var(std::move(n));
  }

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  Tensor& mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) {
    node_->requires_grad = on;
    if (on) node_->ensure_grad();
  }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  const Shape& shape() const { return node_->value.shape(); }

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

namespace detail {

inline Var make_op(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const auto& in : inputs) n->requires_grad = n->requires_grad || in.requires_grad();
  if (n->requires_grad) {
    n->inputs.reserve(inputs.size());
    for (const auto& in : inputs) n->inputs.push_back(in.node_ptr());
    n->backward = std::move(backward);
  }
  return Var(std::move(n));
}

inline Node& in(Node& n, std::size_t i) { return *n.inputs[i]; }

inline void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(op, "shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

}  // namespace detail

/// Reverse pass from a scalar. Leaf gradients accumulate; call
/// ParamStore::zero_grad between optimizer steps.
inline void backward(const Var& loss) {
  if (!loss.defined() || loss.value().size() != 1) {
    throw DimensionError("backward", "loss must be a scalar, got shape " +
                                         (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad()) return;

  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{loss.node(), 0}};
  seen.insert(loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (detail::Node* n : order) {
    if (n->backward) n->grad = Tensor(n->value.shape(), 0.0);
    else n->ensure_grad();
  }
  loss.node()->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

inline Var constant(Tensor t) { return Var::constant(std::move(t)); }

/// Same value, no gradient path.
inline Var detach(const Var& a) { return Var::constant(a.value()); }

inline Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul", "inner dims differ " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  Tensor out = Tensor::matrix(a.rows(), b.cols());
  out.mat().noalias() = a.value().mat() * b.value().mat();
  return detail::make_op(std::move(out), {a, b}, [](detail::Node& n) {
    auto& x = detail::in(n, 0);
    auto& y = detail::in(n, 1);
    if (x.requires_grad) x.grad.mat().noalias() += n.grad.mat() * y.value.mat().transpose();
    if (y.requires_grad) y.grad.mat().noalias() += x.value.mat().transpose() * n.grad.mat();
  });
}

/// a * b^T; used for Gram matrices and pairwise measure tables.
inline Var matmul_nt(const Var& a, const Var& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt", "feature dims differ " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  Tensor out = Tensor::matrix(a.rows(), b.rows());
  out.mat().noalias() = a.value().mat() * b.value().mat().transpose();
  return detail::make_op(std::move(out), {a, b}, [](detail::Node& n) {
    auto& x = detail::in(n, 0);
    auto& y = detail::in(n, 1);
    if (x.requires_grad) x.grad.mat().noalias() += n.grad.mat() * y.value.mat();
    if (y.requires_grad) y.grad.mat().noalias() += n.grad.mat().transpose() * x.value.mat();
  });
}

inline Var add(const Var& a, const Var& b) {
  detail::require_same_shape("add", a, b);
  Tensor out = a.value();
  out.mat() += b.value().mat();
  return detail::make_op(std::move(out), {a, b}, [](detail::Node& n) {
    for (std::size_t i = 0; i < 2; ++i) {
      auto& x = detail::in(n, i);
      if (x.requires_grad) x.grad.mat() += n.grad.mat();
    }
  });
}

inline Var sub(const Var& a, const Var& b) {
  detail::require_same_shape("sub", a, b);
  Tensor out = a.value();
  out.mat() -= b.value().mat();
  return detail::make_op(std::move(out), {a, b}, [](detail::Node& n) {
    auto& x = detail::in(n, 0);
    auto& y = detail::in(n, 1);
    if (x.requires_grad) x.grad.mat() += n.grad.mat();
    if (y.requires_grad) y.grad.mat() -= n.grad.mat();
  });
}

/// Elementwise product.
inline Var mul(const Var& a, const Var& b) {
  detail::require_same_shape("mul", a, b);
  Tensor out = a.value();
  out.mat().array() *= b.value().mat().array();
  return detail::make_op(std::move(out), {a, b}, [](detail::Node& n) {
    auto& x = detail::in(n, 0);
    auto& y = detail::in(n, 1);
    if (x.requires_grad) x.grad.mat().array() += n.grad.mat().array() * y.value.mat().array();
    if (y.requires_grad) y.grad.mat().array() += n.grad.mat().array() * x.value.mat().array();
  });
}

/// a + bias, bias a 1 x n row broadcast over the rows of a.
inline Var add_row(const Var& a, const Var& bias) {
  if (bias.value().size() != a.cols()) {
    throw DimensionError("add_row", "bias " + shape_str(bias.shape()) + " does not fit " + shape_str(a.shape()));
  }
  Tensor out = a.value();
  Eigen::Map<const Eigen::RowVectorXd> b(bias.value().storage().data(), static_cast<Eigen::Index>(a.cols()));
  out.mat().rowwise() += b;
  return detail::make_op(std::move(out), {a, bias}, [](detail::Node& n) {
    auto& x = detail::in(n, 0);
    auto& b = detail::in(n, 1);
    if (x.requires_grad) x.grad.mat() += n.grad.mat();
    if (b.requires_grad) {
      Eigen::RowVectorXd colsum = n.grad.mat().colwise().sum();
      for (std::size_t j = 0; j < b.grad.size(); ++j) b.grad[j] += colsum[static_cast<Eigen::Index>(j)];
    }
  });
}

/// Multiplies row i of a by col[i]; col is n x 1.
inline Var mul_col(const Var& a, const Var& col) {
  if (col.value().size() != a.rows()) {
    throw DimensionError("mul_col", "column " + shape_str(col.shape()) + " does not fit " + shape_str(a.shape()));
  }
  Tensor out = a.value();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (double& v : out.row(r)) v *= col.value()[r];
  return detail::make_op(std::move(out), {a, col}, [](detail::Node& n) {
    auto& x = detail::in(n, 0);
    auto& c = detail::in(n, 1);
    for (std::size_t r = 0; r < n.value.rows(); ++r) {
      auto g = n.grad.row(r);
      if (x.requires_grad) {
        auto gx = x.grad.row(r);
        for (std::size_t j = 0; j < g.size(); ++j) gx[j] += g[j] * c.value[r];
      }
      if (c.requires_grad) {
        auto xv = x.value.row(r);
        double acc = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) acc += g[j] * xv[j];
        c.grad[r] += acc;
      }
    }
  });
}

inline Var scale(const Var& a, double c) {
  Tensor out = a.value();
  out.mat() *= c;
  return detail::make_op(std::move(out), {a}, [c](detail::Node& n) {
    auto& x = detail::in(n, 0);
    x.grad.mat() += c * n.grad.mat();
  });
}

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(double c, const Var& a) { return scale(a, c); }
inline Var operator*(const Var& a, double c) { return scale(a, c); }

inline Var relu(const Var& a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return detail::make_op(std::move(out), {a}, [](detail::Node& n) {
    auto& x = detail::in(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      if (x.value[i] > 0.0) x.grad[i] += n.grad[i];
  });
}

inline Var tanh(const Var& a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = std::tanh(v);
  return detail::make_op(std::move(out), {a}, [](detail::Node& n) {
    auto& x = detail::in(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) x.grad[i] += n.grad[i] * (1.0 - n.value[i] * n.value[i]);
  });
}

inline Var square(const Var& a) { return mul(a, a); }

inline Var sum(const Var& a) {
  double s = a.value().mat().sum();
  return detail::make_op(Tensor::scalar(s), {a}, [](detail::Node& n) {
    auto& x = detail::in(n, 0);
    x.grad.mat().array() += n.grad[0];
  });
}

inline Var mean(const Var& a) {
  const double count = static_cast<double>(a.value().size());
  if (count == 0) throw DimensionError("mean", "empty tensor");
  return scale(sum(a), 1.0 / count);
}

/// Per-row sum, result n x 1.
inline Var row_sum(const Var& a) {
  Tensor out = Tensor::matrix(a.rows(), 1);
  Eigen::VectorXd s = a.value().mat().rowwise().sum();
  for (std::size_t r = 0; r < a.rows(); ++r) out[r] = s[static_cast<Eigen::Index>(r)];
  return detail::make_op(std::move(out), {a}, [](detail::Node& n) {
    auto& x = detail::in(n, 0);
    for (std::size_t r = 0; r < x.value.rows(); ++r)
      for (double& g : x.grad.row(r)) g += n.grad[r];
  });
}

/// Row-wise inner products, result n x 1.
inline Var rowwise_dot(const Var& a, const Var& b) { return row_sum(mul(a, b)); }

inline Var concat_cols(const Var& a, const Var& b) {
  Tensor out = concat_cols(a.value(), b.value());
  const std::size_t left = a.cols();
  return detail::make_op(std::move(out), {a, b}, [left](detail::Node& n) {
    auto& x = detail::in(n, 0);
    auto& y = detail::in(n, 1);
    for (std::size_t r = 0; r < n.value.rows(); ++r) {
      auto g = n.grad.row(r);
      if (x.requires_grad) {
        auto gx = x.grad.row(r);
        for (std::size_t j = 0; j < left; ++j) gx[j] += g[j];
      }
      if (y.requires_grad) {
        auto gy = y.grad.row(r);
        for (std::size_t j = 0; j < gy.size(); ++j) gy[j] += g[left + j];
      }
    }
  });
}

/// Mean of the off-diagonal entries of a square matrix.
inline Var offdiag_mean(const Var& gram) {
  const std::size_t n = gram.rows();
  if (n < 2 || gram.cols() != n) {
    throw DimensionError("offdiag_mean", "need a square matrix with at least 2 rows, got " + shape_str(gram.shape()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) total += gram.value()(i, j);
  const double denom = static_cast<double>(n * (n - 1));
  return detail::make_op(Tensor::scalar(total / denom), {gram}, [n, denom](detail::Node& node) {
    auto& x = detail::in(node, 0);
    const double g = node.grad[0] / denom;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) x.grad(i, j) += g;
  });
}

/// Rows whose norm falls below this are nudged before normalizing.
inline constexpr double kSphereDegenerateNorm = 1e-12;
inline constexpr double kSphereNudge = 1e-8;

/// Projects each row onto the sphere of radius sqrt(d): y = sqrt(d) v / |v|.
inline Var sphere_project(const Var& v, std::size_t d) {
  if (v.cols() != d) {
    throw DimensionError("sphere_project", "row width " + std::to_string(v.cols()) + " != d=" + std::to_string(d));
  }
  const double radius = std::sqrt(static_cast<double>(d));
  Tensor input = v.value();
  Tensor out = Tensor::matrix(v.rows(), d);
  Tensor norms = Tensor::matrix(v.rows(), 1);
  for (std::size_t r = 0; r < v.rows(); ++r) {
    auto x = input.row(r);
    double nrm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    if (nrm < kSphereDegenerateNorm) {
      x[0] += kSphereNudge;
      nrm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    }
    norms[r] = nrm;
    auto y = out.row(r);
    for (std::size_t j = 0; j < d; ++j) y[j] = radius * x[j] / nrm;
  }
  return detail::make_op(std::move(out), {v}, [radius, norms = std::move(norms)](detail::Node& n) {
    auto& x = detail::in(n, 0);
    for (std::size_t r = 0; r < n.value.rows(); ++r) {
      auto g = n.grad.row(r);
      auto y = n.value.row(r);
      // u = y / radius; dx = radius/|v| (g - u (u.g))
      double ug = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) ug += y[j] * g[j];
      ug /= radius * radius;
      const double s = radius / norms[r];
      auto gx = x.grad.row(r);
      for (std::size_t j = 0; j < g.size(); ++j) gx[j] += s * (g[j] - y[j] * ug);
    }
  });
}

}  // namespace rldp
