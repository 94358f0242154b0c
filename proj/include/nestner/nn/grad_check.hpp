#ifndef NESTNER_NN_GRAD_CHECK_HPP
#define NESTNER_NN_GRAD_CHECK_HPP

#include <functional>
#include <string>
#include <vector>

#include "nestner/nn/graph.hpp"

namespace nestner::nn {

/// Builds the loss on a fresh graph. Must be deterministic (no dropout).
using LossBuilder = std::function<Var(Graph&)>;

struct ParamCheck {
  std::string name;
  double max_relative_error = 0.0;
  Index worst_row = 0;
  Index worst_col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  double max_relative_error = 0.0;
  bool passed = true;
};

/// `central`: (f(x+e) - f(x-e)) / 2e. `extrapolated`: Ridders' polynomial
/// extrapolation of central differences, starting at step e and shrinking it
/// by 1.4 per stage. The latter stays accurate for entries whose gradient is
/// near the rounding noise of the loss.
enum class Difference { central, extrapolated };

/// Relative error |a - n| / max(|a|, |n|, 1e-8) of reverse-mode gradients
/// against finite differences, per parameter.
GradCheckReport grad_check(const LossBuilder& loss, Parameters& params, double epsilon = 1e-5,
                           double tolerance = 1e-4, Difference method = Difference::central);

/// Same comparison for externally supplied analytic gradients.
GradCheckReport compare_gradients(const LossBuilder& loss, Parameters& params,
                                  const Gradients& analytic, double epsilon, double tolerance,
                                  Difference method = Difference::central);

double evaluate_loss(const LossBuilder& loss, const Parameters& params);

}  // namespace nestner::nn

#endif  // NESTNER_NN_GRAD_CHECK_HPP
