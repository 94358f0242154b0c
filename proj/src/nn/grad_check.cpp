#include "nestner/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nestner::nn {

double evaluate_loss(const LossBuilder& loss, const Parameters& params) {
  Graph g(params);
  return g.scalar(loss(g));
}

namespace {

double central(const LossBuilder& loss, Parameters& params, double& value, double step) {
  const double saved = value;
  value = saved + step;
  const double plus = evaluate_loss(loss, params);
  value = saved - step;
  const double minus = evaluate_loss(loss, params);
  value = saved;
  return (plus - minus) / (2.0 * step);
}

double ridders(const LossBuilder& loss, Parameters& params, double& value, double step) {
  constexpr int kStages = 10;
  constexpr double kShrink = 1.4;
  constexpr double kShrink2 = kShrink * kShrink;
  double table[kStages][kStages];
  table[0][0] = central(loss, params, value, step);
  double best = table[0][0];
  double error = std::numeric_limits<double>::max();
  for (int i = 1; i < kStages; ++i) {
    step /= kShrink;
    table[0][i] = central(loss, params, value, step);
    double factor = kShrink2;
    for (int j = 1; j <= i; ++j) {
      table[j][i] = (table[j - 1][i] * factor - table[j - 1][i - 1]) / (factor - 1.0);
      factor *= kShrink2;
      const double estimate = std::max(std::abs(table[j][i] - table[j - 1][i]),
                                       std::abs(table[j][i] - table[j - 1][i - 1]));
      if (estimate <= error) {
        error = estimate;
        best = table[j][i];
      }
    }
    if (std::abs(table[i][i] - table[i - 1][i - 1]) >= 2.0 * error) break;
  }
  return best;
}

}  // namespace

GradCheckReport compare_gradients(const LossBuilder& loss, Parameters& params,
                                  const Gradients& analytic, double epsilon, double tolerance,
                                  Difference method) {
  GradCheckReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamId id{i};
    Matrix& value = params.value(id);
    const Matrix& grad = analytic.grad(id);
    ParamCheck check;
    check.name = params.name(id);
    for (Index c = 0; c < value.cols(); ++c)
      for (Index r = 0; r < value.rows(); ++r) {
        const double numeric = method == Difference::central
                                   ? central(loss, params, value(r, c), epsilon)
                                   : ridders(loss, params, value(r, c), epsilon);
        const double exact = grad.size() ? grad(r, c) : 0.0;
        const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
        const double rel = std::abs(exact - numeric) / denom;
        if (rel > check.max_relative_error || (r == 0 && c == 0)) {
          check.max_relative_error = rel;
          check.worst_row = r;
          check.worst_col = c;
          check.analytic = exact;
          check.numeric = numeric;
        }
      }
    check.passed = check.max_relative_error < tolerance;
    report.passed = report.passed && check.passed;
    report.max_relative_error = std::max(report.max_relative_error, check.max_relative_error);
    report.params.push_back(std::move(check));
  }
  return report;
}

GradCheckReport grad_check(const LossBuilder& loss, Parameters& params, double epsilon,
                           double tolerance, Difference method) {
  Gradients grads(params);
  {
    Graph g(params);
    g.backward(loss(g), grads);
  }
  return compare_gradients(loss, params, grads, epsilon, tolerance, method);
}

}  // namespace nestner::nn
