#include "nestner/nn/graph.hpp"

#include <cassert>
#include <cmath>

namespace nestner::nn {

double logsumexp(const Eigen::Ref<const Vector>& x) {
  double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

Vector softmax(const Eigen::Ref<const Vector>& logits) {
  Vector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Matrix& Graph::value(Var v) const {
  const Node& n = nodes_.at(static_cast<std::size_t>(v.id));
  return n.ref ? *n.ref : n.value;
}

Matrix& Graph::adjoint(Var v) {
  if (adjoints_.size() < nodes_.size()) adjoints_.resize(nodes_.size());
  Matrix& a = adjoints_[static_cast<std::size_t>(v.id)];
  if (a.size() == 0) {
    const Matrix& val = value(v);
    a = Matrix::Zero(val.rows(), val.cols());
  }
  return a;
}

const Matrix* Graph::gradient(Var v) const {
  if (static_cast<std::size_t>(v.id) >= adjoints_.size()) return nullptr;
  const Matrix& a = adjoints_[static_cast<std::size_t>(v.id)];
  return a.size() == 0 ? nullptr : &a;
}

Var Graph::input(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::param(ParamId id) {
  if (auto it = param_nodes_.find(id.value); it != param_nodes_.end()) return it->second;
  Node n;
  n.ref = &params_->value(id);
  n.param = id;
  Var v = push(std::move(n));
  param_nodes_.emplace(id.value, v);
  return v;
}

Var Graph::lookup(ParamId id, Index row) {
  const Matrix& table = params_->value(id);
  assert(row >= 0 && row < table.rows());
  Node n;
  n.value = table.row(row).transpose();
  n.param = id;
  n.row = row;
  return push(std::move(n));
}

Var Graph::custom(Matrix value, std::vector<Var> inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.inputs = std::move(inputs);
  n.backward = std::move(backward);
  return push(std::move(n));
}

Var Graph::matmul(Var a, Var b) {
  assert(value(a).cols() == value(b).rows());
  return custom(value(a) * value(b), {a, b}, [](Graph& g, Var self) {
    const auto& in = g.inputs(self);
    const Matrix& up = g.adjoint(self);
    Matrix da = up * g.value(in[1]).transpose();
    Matrix db = g.value(in[0]).transpose() * up;
    g.adjoint(in[0]) += da;
    g.adjoint(in[1]) += db;
  });
}

Var Graph::affine(Var weight, Var x, Var bias) {
  assert(value(weight).cols() == value(x).rows());
  Matrix out = value(bias);
  out.noalias() += value(weight) * value(x);
  return custom(std::move(out), {weight, x, bias}, [](Graph& g, Var self) {
    const auto& in = g.inputs(self);
    const Matrix& up = g.adjoint(self);
    g.adjoint(in[0]).noalias() += up * g.value(in[1]).transpose();
    g.adjoint(in[1]).noalias() += g.value(in[0]).transpose() * up;
    g.adjoint(in[2]) += up;
  });
}

Var Graph::add(Var a, Var b) {
  assert(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols());
  return custom(value(a) + value(b), {a, b}, [](Graph& g, Var self) {
    const auto& in = g.inputs(self);
    g.adjoint(in[0]) += g.adjoint(self);
    g.adjoint(in[1]) += g.adjoint(self);
  });
}

Var Graph::sub(Var a, Var b) {
  assert(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols());
  return custom(value(a) - value(b), {a, b}, [](Graph& g, Var self) {
    const auto& in = g.inputs(self);
    g.adjoint(in[0]) += g.adjoint(self);
    g.adjoint(in[1]) -= g.adjoint(self);
  });
}

Var Graph::cmul(Var a, Var b) {
  assert(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols());
  return custom(value(a).cwiseProduct(value(b)), {a, b}, [](Graph& g, Var self) {
    const auto& in = g.inputs(self);
    const Matrix& up = g.adjoint(self);
    Matrix da = up.cwiseProduct(g.value(in[1]));
    Matrix db = up.cwiseProduct(g.value(in[0]));
    g.adjoint(in[0]) += da;
    g.adjoint(in[1]) += db;
  });
}

Var Graph::scale(Var x, double factor) {
  return custom(value(x) * factor, {x}, [factor](Graph& g, Var self) {
    g.adjoint(g.inputs(self)[0]) += g.adjoint(self) * factor;
  });
}

Var Graph::one_minus(Var x) {
  return custom((1.0 - value(x).array()).matrix(), {x}, [](Graph& g, Var self) {
    g.adjoint(g.inputs(self)[0]) -= g.adjoint(self);
  });
}

Var Graph::mask(Var x, const Matrix& mask) {
  assert(value(x).rows() == mask.rows() && value(x).cols() == mask.cols());
  return custom(value(x).cwiseProduct(mask), {x}, [mask](Graph& g, Var self) {
    g.adjoint(g.inputs(self)[0]) += g.adjoint(self).cwiseProduct(mask);
  });
}

Var Graph::tanh(Var x) {
  return custom(value(x).array().tanh().matrix(), {x}, [](Graph& g, Var self) {
    const Matrix& y = g.value(self);
    Matrix d = g.adjoint(self).array() * (1.0 - y.array().square());
    g.adjoint(g.inputs(self)[0]) += d;
  });
}

Var Graph::sigmoid(Var x) {
  Matrix y = (1.0 / (1.0 + (-value(x).array()).exp())).matrix();
  return custom(std::move(y), {x}, [](Graph& g, Var self) {
    const Matrix& y = g.value(self);
    Matrix d = g.adjoint(self).array() * y.array() * (1.0 - y.array());
    g.adjoint(g.inputs(self)[0]) += d;
  });
}

Var Graph::concat(std::span<const Var> parts) {
  Index rows = 0;
  for (Var p : parts) {
    assert(value(p).cols() == 1);
    rows += value(p).rows();
  }
  Matrix out(rows, 1);
  Index offset = 0;
  for (Var p : parts) {
    const Matrix& v = value(p);
    out.block(offset, 0, v.rows(), 1) = v;
    offset += v.rows();
  }
  return custom(std::move(out), std::vector<Var>(parts.begin(), parts.end()), [](Graph& g, Var self) {
    Index offset = 0;
    for (Var p : g.inputs(self)) {
      Index r = g.value(p).rows();
      Matrix piece = g.adjoint(self).block(offset, 0, r, 1);
      g.adjoint(p) += piece;
      offset += r;
    }
  });
}

Var Graph::slice(Var x, Index start, Index length) {
  assert(start >= 0 && start + length <= value(x).rows() && value(x).cols() == 1);
  return custom(value(x).block(start, 0, length, 1), {x}, [start, length](Graph& g, Var self) {
    Matrix piece = g.adjoint(self);
    g.adjoint(g.inputs(self)[0]).block(start, 0, length, 1) += piece;
  });
}

Var Graph::stack_rows(std::span<const Var> rows) {
  assert(!rows.empty());
  Index k = value(rows.front()).rows();
  Matrix out(static_cast<Index>(rows.size()), k);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    assert(value(rows[t]).rows() == k && value(rows[t]).cols() == 1);
    out.row(static_cast<Index>(t)) = value(rows[t]).transpose();
  }
  return custom(std::move(out), std::vector<Var>(rows.begin(), rows.end()), [](Graph& g, Var self) {
    const auto& in = g.inputs(self);
    for (std::size_t t = 0; t < in.size(); ++t) {
      Matrix row = g.adjoint(self).row(static_cast<Index>(t)).transpose();
      g.adjoint(in[t]) += row;
    }
  });
}

Var Graph::sum(Var x) {
  Matrix out(1, 1);
  out(0, 0) = value(x).sum();
  return custom(std::move(out), {x}, [](Graph& g, Var self) {
    g.adjoint(g.inputs(self)[0]).array() += g.adjoint(self)(0, 0);
  });
}

Var Graph::add_n(std::span<const Var> terms) {
  assert(!terms.empty());
  Matrix out = value(terms.front());
  for (std::size_t i = 1; i < terms.size(); ++i) out += value(terms[i]);
  return custom(std::move(out), std::vector<Var>(terms.begin(), terms.end()), [](Graph& g, Var self) {
    Matrix up = g.adjoint(self);
    for (Var t : g.inputs(self)) g.adjoint(t) += up;
  });
}

Var Graph::logsumexp(Var x) {
  assert(value(x).cols() == 1);
  Matrix out(1, 1);
  out(0, 0) = nn::logsumexp(value(x).col(0));
  return custom(std::move(out), {x}, [](Graph& g, Var self) {
    Var in = g.inputs(self)[0];
    Vector p = (g.value(in).col(0).array() - g.value(self)(0, 0)).exp();
    g.adjoint(in).col(0) += g.adjoint(self)(0, 0) * p;
  });
}

Var Graph::pick(Var x, Index i) {
  assert(value(x).cols() == 1 && i >= 0 && i < value(x).rows());
  Matrix out(1, 1);
  out(0, 0) = value(x)(i, 0);
  return custom(std::move(out), {x}, [i](Graph& g, Var self) {
    g.adjoint(g.inputs(self)[0])(i, 0) += g.adjoint(self)(0, 0);
  });
}

Var Graph::softmax_cross_entropy(Var logits, Index target) {
  assert(value(logits).cols() == 1 && target >= 0 && target < value(logits).rows());
  const Matrix& z = value(logits);
  Matrix out(1, 1);
  out(0, 0) = nn::logsumexp(z.col(0)) - z(target, 0);
  return custom(std::move(out), {logits}, [target](Graph& g, Var self) {
    Var in = g.inputs(self)[0];
    Vector d = softmax(g.value(in).col(0));
    d(target) -= 1.0;
    g.adjoint(in).col(0) += g.adjoint(self)(0, 0) * d;
  });
}

void Graph::backward(Var loss, Gradients& grads, double scale) {
  assert(value(loss).size() == 1);
  adjoints_.assign(nodes_.size(), Matrix());
  adjoint(loss)(0, 0) = scale;
  for (int i = loss.id; i >= 0; --i) {
    if (adjoints_[static_cast<std::size_t>(i)].size() == 0) continue;
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.backward) n.backward(*this, Var{i});
    if (n.param.valid()) {
      const Matrix& a = adjoints_[static_cast<std::size_t>(i)];
      if (n.row >= 0)
        grads.accumulate_row(n.param, n.row, a.col(0));
      else
        grads.accumulate(n.param, a);
    }
  }
}

}  // namespace nestner::nn
