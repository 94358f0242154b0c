// Tape-based reverse-mode differentiation over fixed-rank real matrices.
//
// A Graph records every forward operation as a node holding its value. Column
// vectors are n x 1 matrices. backward() walks the tape in reverse, gives
// every node its adjoint and flushes parameter adjoints into Gradients.

#ifndef NESTNER_NN_GRAPH_HPP
#define NESTNER_NN_GRAPH_HPP

#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "nestner/nn/parameters.hpp"

namespace nestner::nn {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Graph;
using BackwardFn = std::function<void(Graph&, Var self)>;

class Graph {
 public:
  explicit Graph(const Parameters& params) : params_(&params) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  const Parameters& parameters() const { return *params_; }
  std::size_t size() const { return nodes_.size(); }

  // Leaves.
  Var input(Matrix value);
  Var param(ParamId id);
  Var param(std::string_view name) { return param(params_->id(name)); }
  /// Row `row` of a parameter table as a column vector; gradients are sparse.
  Var lookup(ParamId id, Index row);

  // Linear algebra.
  Var matmul(Var a, Var b);
  Var affine(Var weight, Var x, Var bias);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cmul(Var a, Var b);
  Var scale(Var x, double factor);
  Var one_minus(Var x);
  /// Elementwise product with a constant (e.g. a dropout mask).
  Var mask(Var x, const Matrix& mask);

  // Nonlinearities.
  Var tanh(Var x);
  Var sigmoid(Var x);

  // Shape.
  Var concat(std::span<const Var> parts);
  Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }
  Var slice(Var x, Index start, Index length);
  /// Stacks k x 1 vectors into a T x k matrix.
  Var stack_rows(std::span<const Var> rows);

  // Reductions; all return 1 x 1.
  Var sum(Var x);
  Var add_n(std::span<const Var> terms);
  Var logsumexp(Var x);
  Var pick(Var x, Index i);
  /// logsumexp(logits) - logits[target].
  Var softmax_cross_entropy(Var logits, Index target);

  /// Extension point for fused operators. `backward` reads adjoint(self) and
  /// adds into adjoint(input) for each input.
  Var custom(Matrix value, std::vector<Var> inputs, BackwardFn backward);

  const Matrix& value(Var v) const;
  double scalar(Var v) const { return value(v)(0, 0); }
  const std::vector<Var>& inputs(Var v) const { return nodes_.at(v.id).inputs; }

  /// Adjoint storage (allocated zero on first access); valid during and
  /// after backward().
  Matrix& adjoint(Var v);
  /// Adjoint after backward(), or nullptr when nothing flowed into `v`.
  const Matrix* gradient(Var v) const;

  /// Reverse pass seeded with d(loss) = scale; accumulates into `grads`.
  void backward(Var loss, Gradients& grads, double scale = 1.0);

 private:
  struct Node {
    Matrix value;
    const Matrix* ref = nullptr;
    std::vector<Var> inputs;
    BackwardFn backward;
    ParamId param;
    Index row = -1;
  };
  Var push(Node node);

  const Parameters* params_;
  std::vector<Node> nodes_;
  std::vector<Matrix> adjoints_;
  std::unordered_map<std::size_t, Var> param_nodes_;
};

/// Numerically stable log(sum(exp(x))).
double logsumexp(const Eigen::Ref<const Vector>& x);
Vector softmax(const Eigen::Ref<const Vector>& logits);

}  // namespace nestner::nn

#endif  // NESTNER_NN_GRAPH_HPP
