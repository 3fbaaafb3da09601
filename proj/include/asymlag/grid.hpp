#pragma once

#include "asymlag/errors.hpp"

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <type_traits>
#include <utility>

namespace asymlag {

using Eigen::Index;

/// Uniform sampling of [a, b]: node(k) = a + k * step for k = 0..n_steps.
class TimeGrid {
 public:
  TimeGrid(double a, double b, int n_steps);

  double a() const { return a_; }
  double b() const { return b_; }
  int n_steps() const { return n_steps_; }
  double step() const { return step_; }
  /// Number of nodes, n_steps + 1.
  Index size() const { return n_steps_ + 1; }
  double node(Index k) const { return a_ + static_cast<double>(k) * step_; }
  Eigen::VectorXd nodes() const;

  bool operator==(const TimeGrid& other) const = default;

 private:
  double a_;
  double b_;
  int n_steps_;
  double step_;
};

TimeGrid make_grid(double a, double b, int n_steps);

/// A vector-valued trajectory sampled on a TimeGrid: one row per node, one
/// column per component. All samples are finite.
class GridFunction {
 public:
  GridFunction(TimeGrid grid, Eigen::MatrixXd values);

  static GridFunction zero(const TimeGrid& grid, Index dim = 1);

  const TimeGrid& grid() const { return grid_; }
  Index dim() const { return values_.cols(); }
  Index size() const { return values_.rows(); }
  const Eigen::MatrixXd& values() const { return values_; }

  double operator()(Index node, Index component = 0) const { return values_(node, component); }
  Eigen::RowVectorXd at(Index node) const { return values_.row(node); }
  Eigen::VectorXd component(Index c) const { return values_.col(c); }

  /// True when every sample is exactly zero.
  bool is_zero() const { return (values_.array() == 0.0).all(); }

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double s);

 private:
  TimeGrid grid_;
  Eigen::MatrixXd values_;
};

GridFunction operator+(GridFunction lhs, const GridFunction& rhs);
GridFunction operator-(GridFunction lhs, const GridFunction& rhs);
GridFunction operator*(double s, GridFunction f);
GridFunction operator*(GridFunction f, double s);

/// Throws std::invalid_argument unless f and g live on the same grid with the same dim.
void require_same_shape(const GridFunction& f, const GridFunction& g, const char* context);

/// Pointwise evaluation of f at every node. f may return double (dim 1) or an
/// Eigen vector. Throws NonFiniteError naming the first bad node.
template <class F>
GridFunction sample(F&& f, const TimeGrid& grid) {
  using R = std::decay_t<std::invoke_result_t<F&, double>>;
  Eigen::MatrixXd values;
  for (Index k = 0; k < grid.size(); ++k) {
    const double t = grid.node(k);
    if constexpr (std::is_arithmetic_v<R>) {
      if (k == 0) values.resize(grid.size(), 1);
      values(k, 0) = static_cast<double>(f(t));
    } else {
      const Eigen::VectorXd v = f(t);
      if (k == 0) values.resize(grid.size(), v.size());
      if (v.size() != values.cols()) throw std::invalid_argument("sample: inconsistent output dimension");
      values.row(k) = v.transpose();
    }
    if (!values.row(k).allFinite()) throw NonFiniteError("sample: non-finite value", k);
  }
  return GridFunction(grid, std::move(values));
}

/// Piecewise-linear interpolant through the samples of g, returned as a
/// callable t -> R^dim. Exact on nodes; clamps outside [a, b].
std::function<Eigen::VectorXd(double)> interpolant(const GridFunction& g);

/// g evaluated on the reflected grid: (g o rho)(t_k) = g(t_{n-k}), rho(t) = a + b - t.
GridFunction reflect(const GridFunction& g);

enum class StateTag { PlusOnly, MinusOnly, General };

/// X = (x+, x-) in V = U x U. The tag records which constructor built the
/// state; membership in V+ / V- is decided from values by sigma().
class AsymmetricState {
 public:
  static AsymmetricState general(GridFunction plus, GridFunction minus);

  const GridFunction& plus() const { return plus_; }
  const GridFunction& minus() const { return minus_; }
  StateTag tag() const { return tag_; }
  const TimeGrid& grid() const { return plus_.grid(); }
  Index dim() const { return plus_.dim(); }

  friend AsymmetricState lift_plus(const GridFunction& x);
  friend AsymmetricState lift_minus(const GridFunction& x);

 private:
  AsymmetricState(GridFunction plus, GridFunction minus, StateTag tag);

  GridFunction plus_;
  GridFunction minus_;
  StateTag tag_;
};

/// (x, 0), tagged PlusOnly.
AsymmetricState lift_plus(const GridFunction& x);
/// (0, x), tagged MinusOnly.
AsymmetricState lift_minus(const GridFunction& x);

AsymmetricState operator+(const AsymmetricState& lhs, const AsymmetricState& rhs);
AsymmetricState operator*(double s, const AsymmetricState& x);

const char* to_string(StateTag tag);

}  // namespace asymlag
