#include "nestner/train/regularization.hpp"

#include "nestner/core.hpp"

namespace nestner::train {

void RegularizationConfig::validate() const {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw Error("dropout rate must lie in [0, 1)");
  if (!(word_dropout_rate >= 0.0 && word_dropout_rate <= 1.0))
    throw Error("word dropout rate must lie in [0, 1]");
}

bool bernoulli(double rate, nn::Rng& rng) {
  // 53 random bits mapped to [0, 1)
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return u < rate;
}

std::vector<std::size_t> word_dropout(std::span<const std::size_t> ids, double rate,
                                      std::size_t unk, nn::Rng& rng) {
  std::vector<std::size_t> out(ids.begin(), ids.end());
  for (auto& id : out)
    if (bernoulli(rate, rng)) id = unk;
  return out;
}

nn::Var dropout(nn::Graph& g, nn::Var x, double rate, nn::Rng& rng) {
  if (rate <= 0.0) return x;
  const nn::Matrix& v = g.value(x);
  nn::Matrix mask(v.rows(), v.cols());
  const double keep = 1.0 / (1.0 - rate);
  for (nn::Index j = 0; j < v.cols(); ++j)
    for (nn::Index i = 0; i < v.rows(); ++i) mask(i, j) = bernoulli(rate, rng) ? 0.0 : keep;
  return g.mask(x, mask);
}

}  // namespace nestner::train
