#include "asymlag/operators.hpp"

#include "asymlag/parallel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace asymlag {

Eigen::VectorXd gl_weights(double order, Index count) {
  Eigen::VectorXd w(count);
  if (count == 0) return w;
  w(0) = 1.0;
  for (Index j = 1; j < count; ++j) w(j) = w(j - 1) * (static_cast<double>(j) - 1.0 - order) / static_cast<double>(j);
  return w;
}

GridFunction convolve_past(const Eigen::VectorXd& weights, double scale, const GridFunction& f) {
  const Index n = f.size();
  const Index dim = f.dim();
  const Index reach = weights.size();
  const Eigen::MatrixXd& x = f.values();
  Eigen::MatrixXd out(n, dim);
  parallel_for(n, [&](Index k) {
    const Index last = std::min(k, reach - 1);
    for (Index c = 0; c < dim; ++c) {
      double acc = 0.0;
      for (Index j = 0; j <= last; ++j) acc += weights(j) * x(k - j, c);
      out(k, c) = scale * acc;
    }
  });
  return GridFunction(f.grid(), std::move(out));
}

GridFunction convolve_future(const Eigen::VectorXd& weights, double scale, const GridFunction& f) {
  const Index n = f.size();
  const Index dim = f.dim();
  const Index reach = weights.size();
  const Eigen::MatrixXd& x = f.values();
  Eigen::MatrixXd out(n, dim);
  parallel_for(n, [&](Index k) {
    const Index last = std::min(n - 1 - k, reach - 1);
    for (Index c = 0; c < dim; ++c) {
      double acc = 0.0;
      for (Index j = 0; j <= last; ++j) acc += weights(j) * x(k + j, c);
      out(k, c) = scale * acc;
    }
  });
  return GridFunction(f.grid(), std::move(out));
}

OperatorPair::OperatorPair(OperatorKind kind, TimeGrid grid) : kind_(kind), grid_(grid) {
  const double h = grid_.step();
  quadrature_ = Eigen::VectorXd::Constant(grid_.size(), h);
  if (std::holds_alternative<Classical>(kind_)) {
    quadrature_(0) = 0.5 * h;
    quadrature_(grid_.size() - 1) = 0.5 * h;
  } else if (const auto* fd = std::get_if<FiniteDiff>(&kind_)) {
    if (!(fd->eps > 0.0) || !std::isfinite(fd->eps)) throw std::invalid_argument("finite difference: eps must be positive");
    const double ratio = fd->eps / h;
    shift_ = static_cast<Index>(std::llround(ratio));
    if (shift_ < 1 || std::abs(ratio - static_cast<double>(shift_)) > 1e-9 * ratio)
      throw std::invalid_argument("finite difference: eps must be an integer multiple of the grid step");
    if (shift_ > grid_.n_steps()) throw std::invalid_argument("finite difference: eps exceeds the grid length");
  } else {
    const auto& rl = std::get<FractionalRL>(kind_);
    if (!(rl.alpha > 0.0 && rl.alpha < 1.0)) throw std::invalid_argument("fractional: alpha must lie in (0, 1)");
    if (!(rl.tau > 0.0) || !std::isfinite(rl.tau)) throw std::invalid_argument("fractional: tau must be positive");
    weights_ = gl_weights(rl.alpha, grid_.size());
    gl_scale_ = std::pow(rl.tau, rl.alpha - 1.0) * std::pow(h, -rl.alpha);
  }
}

std::string OperatorPair::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (is_classical()) {
    os << "classical";
  } else if (const auto* fd = std::get_if<FiniteDiff>(&kind_)) {
    os << "finite_difference(eps=" << fd->eps << ")";
  } else {
    const auto& rl = std::get<FractionalRL>(kind_);
    os << "fractional(alpha=" << rl.alpha << ", tau=" << rl.tau << ")";
  }
  return os.str();
}

namespace {

void require_on_grid(const OperatorPair& op, const GridFunction& f, const char* context) {
  if (!(f.grid() == op.grid())) throw std::invalid_argument(std::string(context) + ": function is not on the operator grid");
}

// Central differences inside, first-order one-sided at the ends. Together
// with trapezoid weights this satisfies summation by parts exactly.
GridFunction classical_derivative(const GridFunction& f) {
  const Index n = f.size();
  const double h = f.grid().step();
  const Eigen::MatrixXd& x = f.values();
  Eigen::MatrixXd out(n, f.dim());
  out.row(0) = (x.row(1) - x.row(0)) / h;
  for (Index k = 1; k + 1 < n; ++k) out.row(k) = (x.row(k + 1) - x.row(k - 1)) / (2.0 * h);
  out.row(n - 1) = (x.row(n - 1) - x.row(n - 2)) / h;
  return GridFunction(f.grid(), std::move(out));
}

}  // namespace

GridFunction apply_plus(const OperatorPair& op, const GridFunction& f) {
  require_on_grid(op, f, "apply_plus");
  if (op.is_classical()) return classical_derivative(f);
  if (const auto* fd = std::get_if<FiniteDiff>(&op.kind())) {
    const Index m = op.shift();
    const Eigen::MatrixXd& x = f.values();
    Eigen::MatrixXd out = x / fd->eps;
    for (Index k = m; k < f.size(); ++k) out.row(k) = (x.row(k) - x.row(k - m)) / fd->eps;
    return GridFunction(f.grid(), std::move(out));
  }
  return convolve_past(op.weights(), op.gl_scale(), f);
}

GridFunction apply_minus(const OperatorPair& op, const GridFunction& f) {
  require_on_grid(op, f, "apply_minus");
  if (op.is_classical()) return classical_derivative(f);
  if (const auto* fd = std::get_if<FiniteDiff>(&op.kind())) {
    const Index m = op.shift();
    const Index n = f.size();
    const Eigen::MatrixXd& x = f.values();
    Eigen::MatrixXd out = -x / fd->eps;
    for (Index k = 0; k + m < n; ++k) out.row(k) = (x.row(k + m) - x.row(k)) / fd->eps;
    return GridFunction(f.grid(), std::move(out));
  }
  return convolve_future(op.weights(), -op.gl_scale(), f);
}

GridFunction apply_plus_power(const OperatorPair& op, const GridFunction& f, int k) {
  if (k < 0) throw std::invalid_argument("apply_plus_power: k must be non-negative");
  require_on_grid(op, f, "apply_plus_power");
  GridFunction out = f;
  for (int i = 0; i < k; ++i) out = apply_plus(op, out);
  return out;
}

GridFunction apply_minus_power(const OperatorPair& op, const GridFunction& f, int k) {
  if (k < 0) throw std::invalid_argument("apply_minus_power: k must be non-negative");
  require_on_grid(op, f, "apply_minus_power");
  GridFunction out = f;
  for (int i = 0; i < k; ++i) out = apply_minus(op, out);
  return out;
}

double inner(const OperatorPair& op, const GridFunction& f, const GridFunction& g) {
  require_same_shape(f, g, "inner");
  require_on_grid(op, f, "inner");
  const Eigen::VectorXd pointwise = (f.values().array() * g.values().array()).rowwise().sum();
  return op.quadrature().dot(pointwise);
}

double integrate(const OperatorPair& op, const GridFunction& f) {
  require_on_grid(op, f, "integrate");
  return op.quadrature().dot(f.values().rowwise().sum());
}

double boundary_functional(const OperatorPair& op, const GridFunction& f, const GridFunction& g) {
  require_same_shape(f, g, "boundary_functional");
  if (!op.is_classical()) return 0.0;
  const Index last = f.size() - 1;
  return f.at(last).dot(g.at(last)) - f.at(0).dot(g.at(0));
}

double ibp_residual(const OperatorPair& op, const GridFunction& f, const GridFunction& g) {
  require_same_shape(f, g, "ibp_residual");
  require_on_grid(op, f, "ibp_residual");
  const double lhs = inner(op, apply_plus(op, f), g);
  const double rhs = inner(op, f, apply_minus(op, g));
  return std::abs(lhs + rhs - boundary_functional(op, f, g));
}

double ibp_scale(const OperatorPair& op, const GridFunction& f, const GridFunction& g) {
  require_same_shape(f, g, "ibp_scale");
  const auto abs_inner = [&](const GridFunction& u, const GridFunction& v) {
    const Eigen::VectorXd pointwise = (u.values().array() * v.values().array()).abs().rowwise().sum();
    return op.quadrature().dot(pointwise);
  };
  return abs_inner(apply_plus(op, f), g) + abs_inner(f, apply_minus(op, g));
}

}  // namespace asymlag
