#include "nestner/train/optimizer.hpp"

#include <cmath>

namespace nestner::train {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw Error("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw Error("Adam epsilon must be positive");
}

NonFiniteGradient::NonFiniteGradient(std::string parameter)
    : Error("non-finite gradient for parameter '" + parameter + "'; step rejected"),
      parameter_(std::move(parameter)) {}

Adam::Adam(const nn::Parameters& params, OptimizerConfig config) : config_(config) {
  config_.validate();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const nn::Matrix& p = params.value(nn::ParamId{i});
    first_.push_back(nn::Matrix::Zero(p.rows(), p.cols()));
    second_.push_back(nn::Matrix::Zero(p.rows(), p.cols()));
  }
}

void Adam::update_row(nn::Matrix& value, nn::Matrix& m, nn::Matrix& v, const nn::Matrix& grad,
                      nn::Index row, double step_size, double correction2) {
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  for (nn::Index c = 0; c < value.cols(); ++c) {
    const double g = grad.size() ? grad(row, c) : 0.0;
    m(row, c) = b1 * m(row, c) + (1.0 - b1) * g;
    v(row, c) = b2 * v(row, c) + (1.0 - b2) * g * g;
    value(row, c) -= step_size * m(row, c) / (std::sqrt(v(row, c) / correction2) + config_.epsilon);
  }
}

void Adam::step(nn::Parameters& params, const nn::Gradients& grads) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    nn::ParamId id{i};
    if (!grads.touched(id)) continue;
    const nn::Matrix& g = grads.grad(id);
    for (nn::Index r : grads.touched_rows(id))
      if (!g.row(r).allFinite()) throw NonFiniteGradient(params.name(id));
  }

  ++steps_;
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  const double step_size = config_.learning_rate / correction1;

  for (std::size_t i = 0; i < params.size(); ++i) {
    nn::ParamId id{i};
    nn::Matrix& value = params.value(id);
    if (config_.lazy) {
      if (!grads.touched(id)) continue;
      for (nn::Index r : grads.touched_rows(id))
        update_row(value, first_[i], second_[i], grads.grad(id), r, step_size, correction2);
    } else {
      for (nn::Index r = 0; r < value.rows(); ++r)
        update_row(value, first_[i], second_[i], grads.grad(id), r, step_size, correction2);
    }
  }
}

}  // namespace nestner::train
