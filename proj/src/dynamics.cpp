#include "asymlag/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asymlag {

namespace {

// Causal stencil of the composed operator D+ o D+ (or its mirror):
// (D+D+ x)_k = scale * sum_j weights_j x_{k-j}.
struct MarchStencil {
  Eigen::VectorXd weights;
  double scale = 0.0;
  Index seeds = 1;
};

MarchStencil stencil_for(const OperatorPair& ops) {
  const TimeGrid& grid = ops.grid();
  const double h = grid.step();
  MarchStencil s;
  if (ops.is_classical()) {
    s.weights = gl_weights(2.0, 3);
    s.scale = 1.0 / (h * h);
    s.seeds = 2;
  } else if (const auto* fd = std::get_if<FiniteDiff>(&ops.kind())) {
    const Index m = ops.shift();
    s.weights = Eigen::VectorXd::Zero(2 * m + 1);
    s.weights(0) = 1.0;
    s.weights(m) = -2.0;
    s.weights(2 * m) = 1.0;
    s.scale = 1.0 / (fd->eps * fd->eps);
  } else {
    const auto& rl = std::get<FractionalRL>(ops.kind());
    s.weights = gl_weights(2.0 * rl.alpha, grid.size());
    s.scale = std::pow(rl.tau, 2.0 * rl.alpha - 2.0) * std::pow(h, -2.0 * rl.alpha);
  }
  return s;
}

// Fills x_k for k >= seeds in increasing k; every x_k depends on x_0..x_{k-1} only.
Eigen::VectorXd march(const MarchStencil& s, double omega2, Index nodes, double x0, double second_seed) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nodes);
  x(0) = x0;
  if (s.seeds > 1) x(1) = second_seed;
  const Index reach = s.weights.size();
  const double diagonal = s.scale * s.weights(0) + omega2;
  for (Index k = s.seeds; k < nodes; ++k) {
    double acc = 0.0;
    const Index last = std::min(k, reach - 1);
    for (Index j = 1; j <= last; ++j) acc += s.weights(j) * x(k - j);
    x(k) = -s.scale * acc / diagonal;
    if (!std::isfinite(x(k))) throw NonFiniteError("march: non-finite state", k);
  }
  return x;
}

double oscillator_omega_of(const Lagrangian& L) {
  if (!L.oscillator_omega() || L.dim() != 1)
    throw std::invalid_argument("unsupported Lagrangian family '" + L.name() +
                                "': solvers cover the one-dimensional oscillator and free particle");
  return *L.oscillator_omega();
}

GridFunction solve_with(const MarchStencil& s, double omega, const TimeGrid& grid, double position, double velocity,
                        Direction direction) {
  const double h = grid.step();
  const double omega2 = omega * omega;
  if (direction == Direction::Forward) {
    Eigen::VectorXd x = march(s, omega2, grid.size(), position, position + h * velocity);
    return GridFunction(grid, std::move(x));
  }
  // Backward marching is forward marching in reversed node order.
  Eigen::VectorXd y = march(s, omega2, grid.size(), position, position - h * velocity);
  return GridFunction(grid, Eigen::MatrixXd(y.reverse()));
}

void check_oscillator_params(double alpha, double tau, double omega) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("oscillator: alpha must lie in (0, 1]");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("oscillator: tau must be positive");
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw std::invalid_argument("oscillator: omega must be non-negative");
}

OperatorPair oscillator_ops(double alpha, double tau, const TimeGrid& grid) {
  if (alpha == 1.0) return OperatorPair(Classical{}, grid);
  return OperatorPair(FractionalRL{alpha, tau}, grid);
}

}  // namespace

GridFunction solve(const ForwardProblem& problem) {
  const double omega = oscillator_omega_of(problem.lagrangian);
  return solve_with(stencil_for(problem.ops), omega, problem.ops.grid(), problem.position, problem.velocity,
                    problem.direction);
}

GridFunction solve_forward_oscillator(double alpha, double tau, double omega, double x0, const TimeGrid& grid,
                                      double v0) {
  check_oscillator_params(alpha, tau, omega);
  return solve_with(stencil_for(oscillator_ops(alpha, tau, grid)), omega, grid, x0, v0, Direction::Forward);
}

GridFunction solve_backward_oscillator(double alpha, double tau, double omega, double xb, const TimeGrid& grid,
                                       double vb) {
  check_oscillator_params(alpha, tau, omega);
  return solve_with(stencil_for(oscillator_ops(alpha, tau, grid)), omega, grid, xb, vb, Direction::Backward);
}

const char* to_string(Reversibility r) { return r == Reversibility::Reversible ? "Reversible" : "Irreversible"; }

double default_reversibility_tolerance(const Lagrangian& lagrangian, const OperatorPair& ops, double amplitude) {
  const double omega = oscillator_omega_of(lagrangian);
  const TimeGrid& grid = ops.grid();
  const double span = grid.b() - grid.a();
  return std::min(100.0 * grid.step(), 0.5) * (omega * omega + 1.0 / (span * span)) * amplitude;
}

ReversibilityVerdict classify_reversibility(const Lagrangian& lagrangian, const OperatorPair& ops,
                                            std::optional<double> tol) {
  const double omega = oscillator_omega_of(lagrangian);
  const double velocity = omega == 0.0 ? 1.0 : 0.0;
  const GridFunction forward = solve({lagrangian, ops, 1.0, velocity, Direction::Forward});
  const GridFunction backward = solve({lagrangian, ops, 1.0, velocity, Direction::Backward});

  // Skip nodes whose stencils reach past the ends or hit seeds.
  const Index margin = std::max<Index>(2, 2 * ops.shift());
  const Index first = margin;
  const Index last = ops.grid().n_steps() - margin;
  if (first > last) throw std::invalid_argument("classify_reversibility: grid too short for the residual window");

  const EmbeddedLagrangian Lhat(lagrangian, ops);
  ReversibilityVerdict v;
  v.first_node = first;
  v.last_node = last;
  v.forward_in_backward = el_residual(Lhat, lift_minus(forward), ResidualKind::CausalMinus).max_abs(first, last);
  v.backward_in_forward = el_residual(Lhat, lift_plus(backward), ResidualKind::CausalPlus).max_abs(first, last);
  v.evidence = std::max(v.forward_in_backward, v.backward_in_forward);
  const double amplitude =
      std::max(forward.values().cwiseAbs().maxCoeff(), backward.values().cwiseAbs().maxCoeff());
  v.tol = tol.value_or(default_reversibility_tolerance(lagrangian, ops, amplitude));
  v.verdict = v.evidence <= v.tol ? Reversibility::Reversible : Reversibility::Irreversible;
  return v;
}

double composition_identity_check(double alpha, const TimeGrid& grid, const GridFunction& f,
                                  const WeightGenerator& weights) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("composition check: alpha must lie in (0, 1)");
  if (!(f.grid() == grid)) throw std::invalid_argument("composition check: function is not on the grid");
  const double h = grid.step();
  const Eigen::VectorXd w = weights(alpha, grid.size());
  const Eigen::VectorXd w2 = weights(2.0 * alpha, grid.size());
  const double s = std::pow(h, -alpha);
  const GridFunction composed = convolve_past(w, s, convolve_past(w, s, f));
  const GridFunction direct = convolve_past(w2, std::pow(h, -2.0 * alpha), f);
  return (composed.values() - direct.values()).cwiseAbs().maxCoeff();
}

}  // namespace asymlag
