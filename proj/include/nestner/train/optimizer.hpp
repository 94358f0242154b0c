#ifndef NESTNER_TRAIN_OPTIMIZER_HPP
#define NESTNER_TRAIN_OPTIMIZER_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "nestner/core.hpp"
#include "nestner/nn/parameters.hpp"

namespace nestner::train {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-8;
  bool lazy = true;

  void validate() const;
};

class NonFiniteGradient : public Error {
 public:
  explicit NonFiniteGradient(std::string parameter);
  const std::string& parameter() const { return parameter_; }

 private:
  std::string parameter_;
};

/// Adam with bias correction from the global step count. In lazy mode only
/// rows flagged as touched in the gradients are updated, moments included;
/// every other row stays bit-identical.
class Adam {
 public:
  Adam(const nn::Parameters& params, OptimizerConfig config);

  /// Throws NonFiniteGradient (before modifying anything) if a touched row
  /// holds a NaN or infinity.
  void step(nn::Parameters& params, const nn::Gradients& grads);

  std::size_t steps() const { return steps_; }
  const OptimizerConfig& config() const { return config_; }
  const nn::Matrix& first_moment(nn::ParamId id) const { return first_.at(id.value); }
  const nn::Matrix& second_moment(nn::ParamId id) const { return second_.at(id.value); }

 private:
  void update_row(nn::Matrix& value, nn::Matrix& m, nn::Matrix& v, const nn::Matrix& grad,
                  nn::Index row, double step_size, double correction2);

  OptimizerConfig config_;
  std::size_t steps_ = 0;
  std::vector<nn::Matrix> first_;
  std::vector<nn::Matrix> second_;
};

}  // namespace nestner::train

#endif  // NESTNER_TRAIN_OPTIMIZER_HPP
