#ifndef NESTNER_TRAIN_REGULARIZATION_HPP
#define NESTNER_TRAIN_REGULARIZATION_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "nestner/nn/graph.hpp"

namespace nestner::train {

struct RegularizationConfig {
  double dropout_rate = 0.5;
  double word_dropout_rate = 0.2;

  void validate() const;
};

/// True with probability `rate`; consumes exactly one draw from `rng`.
bool bernoulli(double rate, nn::Rng& rng);

/// Replaces each id independently with `unk` with probability `rate`.
std::vector<std::size_t> word_dropout(std::span<const std::size_t> ids, double rate,
                                      std::size_t unk, nn::Rng& rng);

/// Inverted dropout: zeroes entries with probability `rate` and scales the
/// rest by 1 / (1 - rate).
nn::Var dropout(nn::Graph& g, nn::Var x, double rate, nn::Rng& rng);

}  // namespace nestner::train

#endif  // NESTNER_TRAIN_REGULARIZATION_HPP
