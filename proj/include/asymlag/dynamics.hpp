#pragma once

#include "asymlag/grid.hpp"
#include "asymlag/lagrangian.hpp"
#include "asymlag/operators.hpp"

#include <optional>

namespace asymlag {

enum class Direction { Forward, Backward };

/// Initial (Forward) or terminal (Backward) value problem for the causal
/// Euler-Lagrange equation of a built-in quadratic Lagrangian:
///   Forward:  d1L(x, D+x) - D+ d2L(x, D+x) = 0, data at t = a
///   Backward: d1L(x, D-x) - D- d2L(x, D-x) = 0, data at t = b
/// `velocity` only matters when the scheme needs two seeds (Classical).
struct ForwardProblem {
  Lagrangian lagrangian;
  OperatorPair ops;
  double position = 1.0;
  double velocity = 0.0;
  Direction direction = Direction::Forward;
};

/// Marches the problem one node at a time. Samples outside [a, b] are zero.
/// Throws std::invalid_argument unless the Lagrangian is a built-in
/// oscillator or free particle of dimension 1.
GridFunction solve(const ForwardProblem& problem);

/// tau^(2 alpha - 2) D^(2 alpha) x + omega^2 x = 0 from x(a) = x0, marched with
/// GL weights of order 2 alpha and zero history. alpha = 1 is the classical
/// oscillator (backward second difference, x1 = x0 + h v0).
GridFunction solve_forward_oscillator(double alpha, double tau, double omega, double x0, const TimeGrid& grid,
                                      double v0 = 0.0);

/// Mirror of solve_forward_oscillator with right-sided weights, from x(b) = xb
/// marching toward a. For alpha = 1, x_{n-1} = xb - h vb.
GridFunction solve_backward_oscillator(double alpha, double tau, double omega, double xb, const TimeGrid& grid,
                                       double vb = 0.0);

enum class Reversibility { Reversible, Irreversible };

const char* to_string(Reversibility r);

struct ReversibilityVerdict {
  Reversibility verdict = Reversibility::Irreversible;
  double evidence = 0.0;  // max of the two cross residuals below
  double tol = 0.0;
  double forward_in_backward = 0.0;  // backward equation evaluated on the forward solution
  double backward_in_forward = 0.0;  // forward equation evaluated on the backward solution
  Index first_node = 0;  // residual window
  Index last_node = 0;
};

/// min(100 * step, 1/2) * (omega^2 + 1/(b-a)^2) * max|x|. The cap keeps coarse
/// grids from accepting an O(1) cross-residual.
double default_reversibility_tolerance(const Lagrangian& lagrangian, const OperatorPair& ops, double amplitude);

/// Reversible iff the forward and backward equations share their solutions:
/// solves both problems and evaluates each solution in the other equation.
ReversibilityVerdict classify_reversibility(const Lagrangian& lagrangian, const OperatorPair& ops,
                                            std::optional<double> tol = std::nullopt);

/// max_k |GL^alpha(GL^alpha f) - GL^(2 alpha) f| with zero history, all on f's grid.
double composition_identity_check(double alpha, const TimeGrid& grid, const GridFunction& f,
                                  const WeightGenerator& weights = gl_weights);

}  // namespace asymlag
