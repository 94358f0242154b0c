#include "nestner/nn/parameters.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "nestner/core.hpp"

namespace nestner::nn {

ParamId Parameters::add(std::string name, Index rows, Index cols) {
  return add(std::move(name), Matrix::Zero(rows, cols));
}

ParamId Parameters::add(std::string name, Matrix value) {
  if (index_.contains(name)) throw Error("duplicate parameter '" + name + "'");
  ParamId id{values_.size()};
  index_.emplace(name, id.value);
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return id;
}

ParamId Parameters::id(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw Error("unknown parameter '" + std::string(name) + "'");
  return ParamId{it->second};
}

bool Parameters::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

std::size_t Parameters::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

bool Parameters::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](const Matrix& m) { return m.allFinite(); });
}

void init_uniform(Matrix& m, double limit, Rng& rng) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) {
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      m(i, j) = (2.0 * u - 1.0) * limit;
    }
}

void init_uniform_fan_in(Matrix& m, Index fan_in, Rng& rng) {
  init_uniform(m, std::sqrt(1.0 / static_cast<double>(std::max<Index>(fan_in, 1))), rng);
}

Gradients::Gradients(const Parameters& params) : entries_(params.size()) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& v = params.value(ParamId{i});
    entries_[i].row_count = v.rows();
    entries_[i].col_count = v.cols();
  }
}

Gradients::Entry& Gradients::ensure(ParamId id) {
  Entry& e = entries_.at(id.value);
  if (e.grad.size() == 0 && e.row_count * e.col_count > 0) {
    e.grad = Matrix::Zero(e.row_count, e.col_count);
    e.flags.assign(static_cast<std::size_t>(e.row_count), 0);
  }
  return e;
}

void Gradients::mark(Entry& e, Index row) {
  auto& flag = e.flags[static_cast<std::size_t>(row)];
  if (!flag) {
    flag = 1;
    e.touched.push_back(row);
  }
}

void Gradients::accumulate(ParamId id, const Matrix& grad) {
  Entry& e = ensure(id);
  assert(grad.rows() == e.row_count && grad.cols() == e.col_count);
  e.grad += grad;
  for (Index r = 0; r < e.row_count; ++r) mark(e, r);
}

void Gradients::accumulate_row(ParamId id, Index row, const Eigen::Ref<const Vector>& grad) {
  Entry& e = ensure(id);
  assert(row >= 0 && row < e.row_count && grad.size() == e.col_count);
  e.grad.row(row) += grad.transpose();
  mark(e, row);
}

bool Gradients::touched(ParamId id, Index row) const {
  const Entry& e = entries_.at(id.value);
  return !e.flags.empty() && e.flags[static_cast<std::size_t>(row)];
}

std::vector<Index> Gradients::touched_rows(ParamId id) const {
  std::vector<Index> rows = entries_.at(id.value).touched;
  std::sort(rows.begin(), rows.end());
  return rows;
}

void Gradients::scale(double factor) {
  for (auto& e : entries_)
    for (Index r : e.touched) e.grad.row(r) *= factor;
}

void Gradients::clear() {
  for (auto& e : entries_) {
    for (Index r : e.touched) {
      e.grad.row(r).setZero();
      e.flags[static_cast<std::size_t>(r)] = 0;
    }
    e.touched.clear();
  }
}

}  // namespace nestner::nn
