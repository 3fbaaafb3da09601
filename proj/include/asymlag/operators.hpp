#pragma once

#include "asymlag/grid.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>
#include <variant>

namespace asymlag {

/// D+ = D- = d/dt.
struct Classical {};

/// D+ f(t) = (f(t) - f(t - eps)) / eps, D- f(t) = (f(t + eps) - f(t)) / eps.
struct FiniteDiff {
  double eps;
};

/// D+ = tau^(alpha-1) aD_t^alpha, D- = -tau^(alpha-1) tD_b^alpha (Riemann-Liouville).
struct FractionalRL {
  double alpha;
  double tau;
};

using OperatorKind = std::variant<Classical, FiniteDiff, FractionalRL>;

/// Grünwald-Letnikov weights of the given order: w_0 = 1,
/// w_j = w_{j-1} (j - 1 - order) / j, for j = 0..count-1.
Eigen::VectorXd gl_weights(double order, Index count);

/// Signature of a GL weight generator; lets checks swap the recurrence.
using WeightGenerator = std::function<Eigen::VectorXd(double order, Index count)>;

/// Left-sided (causal) convolution: out_k = scale * sum_{j=0..k} w_j f_{k-j}.
/// Samples before node 0 are zero. Summation runs j = 0, 1, ... in that order.
GridFunction convolve_past(const Eigen::VectorXd& weights, double scale, const GridFunction& f);
/// Right-sided convolution: out_k = scale * sum_{j=0..n-k} w_j f_{k+j}.
GridFunction convolve_future(const Eigen::VectorXd& weights, double scale, const GridFunction& f);

/// A (D+, D-) evolution-operator pair on a fixed grid, with the quadrature
/// under which the pair satisfies integration by parts exactly.
class OperatorPair {
 public:
  OperatorPair(OperatorKind kind, TimeGrid grid);

  const OperatorKind& kind() const { return kind_; }
  const TimeGrid& grid() const { return grid_; }

  bool is_classical() const { return std::holds_alternative<Classical>(kind_); }
  bool is_finite_diff() const { return std::holds_alternative<FiniteDiff>(kind_); }
  bool is_fractional() const { return std::holds_alternative<FractionalRL>(kind_); }

  /// Node shift eps / step for FiniteDiff; 0 otherwise.
  Index shift() const { return shift_; }
  /// GL weights of order alpha on every grid node (FractionalRL only; empty otherwise).
  const Eigen::VectorXd& weights() const { return weights_; }
  /// tau^(alpha-1) * step^(-alpha) (FractionalRL only).
  double gl_scale() const { return gl_scale_; }

  /// Per-node quadrature weights: trapezoid for Classical, step at every
  /// node for FiniteDiff / FractionalRL.
  const Eigen::VectorXd& quadrature() const { return quadrature_; }

  std::string describe() const;

 private:
  OperatorKind kind_;
  TimeGrid grid_;
  Index shift_ = 0;
  Eigen::VectorXd weights_;
  double gl_scale_ = 0.0;
  Eigen::VectorXd quadrature_;
};

GridFunction apply_plus(const OperatorPair& op, const GridFunction& f);
GridFunction apply_minus(const OperatorPair& op, const GridFunction& f);

/// (D+)^k f; k = 0 is the identity. Throws for k < 0.
GridFunction apply_plus_power(const OperatorPair& op, const GridFunction& f, int k);
GridFunction apply_minus_power(const OperatorPair& op, const GridFunction& f, int k);

/// Grid inner product sum_k q_k <f_k, g_k> under op's quadrature.
double inner(const OperatorPair& op, const GridFunction& f, const GridFunction& g);
/// Quadrature of a dim-1 grid function (or of the sum of its components).
double integrate(const OperatorPair& op, const GridFunction& f);

/// R_ab(f, g): f(b)g(b) - f(a)g(a) for Classical, 0 otherwise.
double boundary_functional(const OperatorPair& op, const GridFunction& f, const GridFunction& g);

/// |int D+f g + int f D-g - R_ab(f, g)| on the grid.
double ibp_residual(const OperatorPair& op, const GridFunction& f, const GridFunction& g);

/// Magnitude of the two pairings in ibp_residual (int |D+f g| + int |f D-g|),
/// the natural scale against which the residual is judged.
double ibp_scale(const OperatorPair& op, const GridFunction& f, const GridFunction& g);

}  // namespace asymlag
