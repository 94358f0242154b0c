#include "nestner/models/crf.hpp"

#include <cassert>
#include <cmath>

namespace nestner::models::crf {

using nn::Index;
using nn::Matrix;
using nn::Vector;

double path_score(const Matrix& emissions, const Matrix& transitions,
                  std::span<const std::size_t> path) {
  const Index K = emissions.cols();
  assert(static_cast<Index>(path.size()) == emissions.rows() && !path.empty());
  double score = transitions(start_state(K), static_cast<Index>(path[0]));
  for (std::size_t t = 0; t < path.size(); ++t) {
    score += emissions(static_cast<Index>(t), static_cast<Index>(path[t]));
    if (t > 0) score += transitions(static_cast<Index>(path[t - 1]), static_cast<Index>(path[t]));
  }
  return score + transitions(static_cast<Index>(path.back()), stop_state(K));
}

namespace {

/// alpha(t, k): log-sum of scores of all prefixes ending in k at t,
/// including emission t.
Matrix forward_scores(const Matrix& emissions, const Matrix& transitions) {
  const Index T = emissions.rows();
  const Index K = emissions.cols();
  Matrix alpha(T, K);
  alpha.row(0) = transitions.block(start_state(K), 0, 1, K) + emissions.row(0);
  Vector scratch(K);
  for (Index t = 1; t < T; ++t)
    for (Index k = 0; k < K; ++k) {
      scratch = alpha.row(t - 1).transpose() + transitions.block(0, k, K, 1);
      alpha(t, k) = nn::logsumexp(scratch) + emissions(t, k);
    }
  return alpha;
}

/// beta(t, k): log-sum of scores of all suffixes after t given y_t = k,
/// including the stop transition.
Matrix backward_scores(const Matrix& emissions, const Matrix& transitions) {
  const Index T = emissions.rows();
  const Index K = emissions.cols();
  Matrix beta(T, K);
  beta.row(T - 1) = transitions.block(0, stop_state(K), K, 1).transpose();
  Vector scratch(K);
  for (Index t = T - 1; t-- > 0;)
    for (Index j = 0; j < K; ++j) {
      scratch = transitions.block(j, 0, 1, K).transpose() + emissions.row(t + 1).transpose() +
                beta.row(t + 1).transpose();
      beta(t, j) = nn::logsumexp(scratch);
    }
  return beta;
}

double partition_from_alpha(const Matrix& alpha, const Matrix& transitions) {
  const Index K = alpha.cols();
  Vector last = alpha.row(alpha.rows() - 1).transpose() + transitions.block(0, stop_state(K), K, 1);
  return nn::logsumexp(last);
}

}  // namespace

double log_partition(const Matrix& emissions, const Matrix& transitions) {
  assert(emissions.rows() >= 1);
  assert(transitions.rows() == emissions.cols() + 2 && transitions.cols() == emissions.cols() + 2);
  return partition_from_alpha(forward_scores(emissions, transitions), transitions);
}

double nll(const Matrix& emissions, const Matrix& transitions, std::span<const std::size_t> gold) {
  return log_partition(emissions, transitions) - path_score(emissions, transitions, gold);
}

std::vector<std::size_t> viterbi(const Matrix& emissions, const Matrix& transitions) {
  const Index T = emissions.rows();
  const Index K = emissions.cols();
  assert(T >= 1);
  Matrix best(T, K);
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> back(T, K);
  best.row(0) = transitions.block(start_state(K), 0, 1, K) + emissions.row(0);
  for (Index t = 1; t < T; ++t)
    for (Index k = 0; k < K; ++k) {
      Index arg = 0;
      double top = best(t - 1, 0) + transitions(0, k);
      for (Index j = 1; j < K; ++j) {
        double s = best(t - 1, j) + transitions(j, k);
        if (s > top) {
          top = s;
          arg = j;
        }
      }
      best(t, k) = top + emissions(t, k);
      back(t, k) = arg;
    }
  Index arg = 0;
  double top = best(T - 1, 0) + transitions(0, stop_state(K));
  for (Index k = 1; k < K; ++k) {
    double s = best(T - 1, k) + transitions(k, stop_state(K));
    if (s > top) {
      top = s;
      arg = k;
    }
  }
  std::vector<std::size_t> path(static_cast<std::size_t>(T));
  for (Index t = T; t-- > 0;) {
    path[static_cast<std::size_t>(t)] = static_cast<std::size_t>(arg);
    if (t > 0) arg = back(t, arg);
  }
  return path;
}

nn::Var nll(nn::Graph& g, nn::Var emissions, nn::Var transitions, std::span<const std::size_t> gold) {
  std::vector<std::size_t> path(gold.begin(), gold.end());
  Matrix value(1, 1);
  value(0, 0) = nll(g.value(emissions), g.value(transitions), path);
  return g.custom(std::move(value), {emissions, transitions}, [path](nn::Graph& g, nn::Var self) {
    const auto& in = g.inputs(self);
    const Matrix& E = g.value(in[0]);
    const Matrix& Tr = g.value(in[1]);
    const Index T = E.rows();
    const Index K = E.cols();
    const double up = g.adjoint(self)(0, 0);

    Matrix alpha = forward_scores(E, Tr);
    Matrix beta = backward_scores(E, Tr);
    const double log_z = partition_from_alpha(alpha, Tr);

    Matrix d_emit = ((alpha + beta).array() - log_z).exp().matrix();
    Matrix d_trans = Matrix::Zero(K + 2, K + 2);
    d_trans.block(start_state(K), 0, 1, K) = d_emit.row(0);
    d_trans.block(0, stop_state(K), K, 1) = d_emit.row(T - 1).transpose();
    for (Index t = 1; t < T; ++t)
      for (Index j = 0; j < K; ++j)
        for (Index k = 0; k < K; ++k)
          d_trans(j, k) += std::exp(alpha(t - 1, j) + Tr(j, k) + E(t, k) + beta(t, k) - log_z);

    d_trans(start_state(K), static_cast<Index>(path[0])) -= 1.0;
    for (std::size_t t = 0; t < path.size(); ++t) {
      d_emit(static_cast<Index>(t), static_cast<Index>(path[t])) -= 1.0;
      if (t > 0) d_trans(static_cast<Index>(path[t - 1]), static_cast<Index>(path[t])) -= 1.0;
    }
    d_trans(static_cast<Index>(path.back()), stop_state(K)) -= 1.0;

    g.adjoint(in[0]) += up * d_emit;
    g.adjoint(in[1]) += up * d_trans;
  });
}

}  // namespace nestner::models::crf
