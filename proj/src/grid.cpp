#include "asymlag/grid.hpp"

#include <algorithm>
#include <string>

namespace asymlag {

TimeGrid::TimeGrid(double a, double b, int n_steps) : a_(a), b_(b), n_steps_(n_steps), step_(0.0) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("grid: endpoints must be finite");
  if (!(a < b)) throw std::invalid_argument("grid: requires a < b");
  if (n_steps < 2) throw std::invalid_argument("grid: requires n_steps >= 2");
  step_ = (b - a) / n_steps;
}

Eigen::VectorXd TimeGrid::nodes() const {
  Eigen::VectorXd t(size());
  for (Index k = 0; k < size(); ++k) t(k) = node(k);
  return t;
}

TimeGrid make_grid(double a, double b, int n_steps) { return TimeGrid(a, b, n_steps); }

GridFunction::GridFunction(TimeGrid grid, Eigen::MatrixXd values) : grid_(grid), values_(std::move(values)) {
  if (values_.rows() != grid_.size())
    throw std::invalid_argument("grid function: expected " + std::to_string(grid_.size()) + " rows, got " +
                                std::to_string(values_.rows()));
  if (values_.cols() < 1) throw std::invalid_argument("grid function: dim must be positive");
  for (Index k = 0; k < values_.rows(); ++k)
    if (!values_.row(k).allFinite()) throw NonFiniteError("grid function: non-finite sample", k);
}

GridFunction GridFunction::zero(const TimeGrid& grid, Index dim) {
  return GridFunction(grid, Eigen::MatrixXd::Zero(grid.size(), dim));
}

void require_same_shape(const GridFunction& f, const GridFunction& g, const char* context) {
  if (!(f.grid() == g.grid())) throw std::invalid_argument(std::string(context) + ": grids differ");
  if (f.dim() != g.dim()) throw std::invalid_argument(std::string(context) + ": dimensions differ");
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  require_same_shape(*this, other, "operator+");
  values_ += other.values_;
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  require_same_shape(*this, other, "operator-");
  values_ -= other.values_;
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  values_ *= s;
  return *this;
}

GridFunction operator+(GridFunction lhs, const GridFunction& rhs) { return lhs += rhs; }
GridFunction operator-(GridFunction lhs, const GridFunction& rhs) { return lhs -= rhs; }
GridFunction operator*(double s, GridFunction f) { return f *= s; }
GridFunction operator*(GridFunction f, double s) { return f *= s; }

std::function<Eigen::VectorXd(double)> interpolant(const GridFunction& g) {
  return [g](double t) -> Eigen::VectorXd {
    const TimeGrid& grid = g.grid();
    const Index last = grid.n_steps();
    const double s = (t - grid.a()) / grid.step();
    if (s <= 0.0) return g.at(0).transpose();
    if (s >= static_cast<double>(last)) return g.at(last).transpose();
    const Index k = std::min<Index>(static_cast<Index>(s), last - 1);
    // Hit nodes exactly so that sampling back on the grid is lossless.
    if (t == grid.node(k)) return g.at(k).transpose();
    if (t == grid.node(k + 1)) return g.at(k + 1).transpose();
    const double theta = s - static_cast<double>(k);
    return ((1.0 - theta) * g.at(k) + theta * g.at(k + 1)).transpose();
  };
}

GridFunction reflect(const GridFunction& g) {
  return GridFunction(g.grid(), g.values().colwise().reverse());
}

AsymmetricState::AsymmetricState(GridFunction plus, GridFunction minus, StateTag tag)
    : plus_(std::move(plus)), minus_(std::move(minus)), tag_(tag) {
  require_same_shape(plus_, minus_, "asymmetric state");
}

AsymmetricState AsymmetricState::general(GridFunction plus, GridFunction minus) {
  return AsymmetricState(std::move(plus), std::move(minus), StateTag::General);
}

AsymmetricState lift_plus(const GridFunction& x) {
  return AsymmetricState(x, GridFunction::zero(x.grid(), x.dim()), StateTag::PlusOnly);
}

AsymmetricState lift_minus(const GridFunction& x) {
  return AsymmetricState(GridFunction::zero(x.grid(), x.dim()), x, StateTag::MinusOnly);
}

AsymmetricState operator+(const AsymmetricState& lhs, const AsymmetricState& rhs) {
  GridFunction plus = lhs.plus() + rhs.plus();
  GridFunction minus = lhs.minus() + rhs.minus();
  if (lhs.tag() == rhs.tag() && lhs.tag() == StateTag::PlusOnly) return lift_plus(plus);
  if (lhs.tag() == rhs.tag() && lhs.tag() == StateTag::MinusOnly) return lift_minus(minus);
  return AsymmetricState::general(std::move(plus), std::move(minus));
}

AsymmetricState operator*(double s, const AsymmetricState& x) {
  switch (x.tag()) {
    case StateTag::PlusOnly: return lift_plus(s * x.plus());
    case StateTag::MinusOnly: return lift_minus(s * x.minus());
    case StateTag::General: break;
  }
  return AsymmetricState::general(s * x.plus(), s * x.minus());
}

const char* to_string(StateTag tag) {
  switch (tag) {
    case StateTag::PlusOnly: return "plus_only";
    case StateTag::MinusOnly: return "minus_only";
    case StateTag::General: return "general";
  }
  return "?";
}

}  // namespace asymlag
