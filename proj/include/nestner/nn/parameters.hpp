#ifndef NESTNER_NN_PARAMETERS_HPP
#define NESTNER_NN_PARAMETERS_HPP

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nestner::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

struct ParamId {
  std::size_t value = static_cast<std::size_t>(-1);
  bool valid() const { return value != static_cast<std::size_t>(-1); }
  bool operator==(const ParamId&) const = default;
};

/// Named real matrices. Names are unique and shapes fixed once created.
class Parameters {
 public:
  ParamId add(std::string name, Index rows, Index cols);
  ParamId add(std::string name, Matrix value);

  ParamId id(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::size_t size() const { return values_.size(); }

  const std::string& name(ParamId id) const { return names_.at(id.value); }
  Matrix& value(ParamId id) { return values_.at(id.value); }
  const Matrix& value(ParamId id) const { return values_.at(id.value); }
  Matrix& operator[](std::string_view name) { return value(id(name)); }
  const Matrix& operator[](std::string_view name) const { return value(id(name)); }

  std::size_t scalar_count() const;
  bool all_finite() const;

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)).
void init_uniform_fan_in(Matrix& m, Index fan_in, Rng& rng);
void init_uniform(Matrix& m, double limit, Rng& rng);

/// Gradient accumulator keyed like Parameters. Rows that received gradient
/// are flagged; every other row is exactly zero.
class Gradients {
 public:
  explicit Gradients(const Parameters& params);

  /// Dense row-range accumulation; flags rows [0, rows).
  void accumulate(ParamId id, const Matrix& grad);
  void accumulate_row(ParamId id, Index row, const Eigen::Ref<const Vector>& grad);

  const Matrix& grad(ParamId id) const { return entries_.at(id.value).grad; }
  bool touched(ParamId id, Index row) const;
  bool touched(ParamId id) const { return !entries_.at(id.value).touched.empty(); }
  /// Touched rows in ascending order.
  std::vector<Index> touched_rows(ParamId id) const;
  std::size_t size() const { return entries_.size(); }

  void scale(double factor);
  /// Zeroes touched rows and clears the flags.
  void clear();

 private:
  struct Entry {
    Index row_count = 0;
    Index col_count = 0;
    Matrix grad;  // allocated on first touch
    std::vector<std::uint8_t> flags;
    std::vector<Index> touched;  // insertion order
  };
  Entry& ensure(ParamId id);
  void mark(Entry& e, Index row);

  std::vector<Entry> entries_;
};

}  // namespace nestner::nn

#endif  // NESTNER_NN_PARAMETERS_HPP
