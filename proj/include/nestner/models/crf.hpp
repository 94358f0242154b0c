// Linear-chain CRF over K labels.
//
// Emissions are T x K. Transitions are (K + 2) x (K + 2), indexed
// [from, to], where row/column K is the virtual start state and K + 1 the
// virtual stop state:
//   score(y) = trans[start, y0] + sum_t emit[t, y_t]
//            + sum_{t>0} trans[y_{t-1}, y_t] + trans[y_{T-1}, stop]

#ifndef NESTNER_MODELS_CRF_HPP
#define NESTNER_MODELS_CRF_HPP

#include <span>
#include <vector>

#include "nestner/nn/graph.hpp"

namespace nestner::models::crf {

inline nn::Index start_state(nn::Index labels) { return labels; }
inline nn::Index stop_state(nn::Index labels) { return labels + 1; }

double path_score(const nn::Matrix& emissions, const nn::Matrix& transitions,
                  std::span<const std::size_t> path);

double log_partition(const nn::Matrix& emissions, const nn::Matrix& transitions);

/// log_partition - path_score(gold).
double nll(const nn::Matrix& emissions, const nn::Matrix& transitions,
           std::span<const std::size_t> gold);

/// Highest-scoring path; ties go to the lower label id.
std::vector<std::size_t> viterbi(const nn::Matrix& emissions, const nn::Matrix& transitions);

/// Negative log-likelihood as a graph node. The backward pass uses
/// forward-backward marginals: d/d emit = p(y_t = k) - [gold_t = k], and
/// likewise for transitions with pairwise marginals.
nn::Var nll(nn::Graph& g, nn::Var emissions, nn::Var transitions,
            std::span<const std::size_t> gold);

}  // namespace nestner::models::crf

#endif  // NESTNER_MODELS_CRF_HPP
