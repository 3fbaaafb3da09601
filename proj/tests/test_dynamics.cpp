#include "asymlag/dynamics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace asymlag;

namespace {

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("alpha = 1 recovers the classical oscillator") {
  std::vector<double> errors;
  for (int n : {500, 1000, 2000}) {
    const TimeGrid g = make_grid(0.0, 4.0 * std::numbers::pi, n);
    const GridFunction x = solve_forward_oscillator(1.0, 1.0, 1.0, 1.0, g);
    CHECK(x(0) == 1.0);
    CHECK(x(1) == 1.0);  // zero initial velocity
    errors.push_back(max_abs_diff(x, sample([](double t) { return std::cos(t); }, g)));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) CHECK(oracle::order(errors[i - 1], errors[i]) >= 0.9);
  CHECK(errors.back() <= 5e-2);
}

TEST_CASE("alpha = 1/2 gives exponential decay") {
  std::vector<double> errors;
  for (int n : {500, 1000, 2000}) {
    const TimeGrid g = make_grid(0.0, 5.0, n);
    const GridFunction x = solve_forward_oscillator(0.5, 1.0, 1.0, 1.0, g);
    errors.push_back(max_abs_diff(x, sample([](double t) { return std::exp(-t); }, g)));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) CHECK(oracle::order(errors[i - 1], errors[i]) >= 0.9);
  CHECK(errors.back() <= 1e-2);

  // tau and omega enter through tau omega^2 only.
  const TimeGrid g = make_grid(0.0, 2.0, 4000);
  const GridFunction y = solve_forward_oscillator(0.5, 2.0, 0.5, 3.0, g);
  CHECK(max_abs_diff(y, sample([](double t) { return 3.0 * std::exp(-0.5 * t); }, g)) < 1e-3);
}

TEST_CASE("free particle at rest stays put") {
  const TimeGrid g = make_grid(0.0, 1.0, 100);
  const GridFunction x = solve_forward_oscillator(1.0, 1.0, 0.0, 2.5, g);
  CHECK((x.values().array() == 2.5).all());
  const GridFunction moving = solve_forward_oscillator(1.0, 1.0, 0.0, 0.0, g, 2.0);
  for (Index k = 0; k < g.size(); ++k) CHECK(moving(k) == doctest::Approx(2.0 * g.node(k)).epsilon(1e-12));
}

TEST_CASE("backward solves anchor data at b") {
  SUBCASE("alpha = 1 mirrors the forward solve") {
    const TimeGrid g = make_grid(0.0, 4.0 * std::numbers::pi, 2000);
    const GridFunction fwd = solve_forward_oscillator(1.0, 1.0, 1.0, 1.0, g);
    const GridFunction bwd = solve_backward_oscillator(1.0, 1.0, 1.0, 1.0, g);
    CHECK(bwd(g.n_steps()) == 1.0);
    CHECK(bwd.values() == reflect(fwd).values());
    // Same solution set: both approximate cos(t) on [0, 4 pi].
    CHECK(max_abs_diff(fwd, bwd) < 0.1);
  }
  SUBCASE("alpha = 1/2 decays toward the past") {
    std::vector<double> errors;
    for (int n : {500, 1000, 2000}) {
      const TimeGrid g = make_grid(0.0, 5.0, n);
      const GridFunction x = solve_backward_oscillator(0.5, 1.0, 1.0, 1.0, g);
      errors.push_back(max_abs_diff(x, sample([](double t) { return std::exp(t - 5.0); }, g)));
    }
    for (std::size_t i = 1; i < errors.size(); ++i) CHECK(oracle::order(errors[i - 1], errors[i]) >= 0.9);
    const TimeGrid g = make_grid(0.0, 5.0, 1000);
    const GridFunction fwd = solve_forward_oscillator(0.5, 1.0, 1.0, 1.0, g);
    const GridFunction bwd = solve_backward_oscillator(0.5, 1.0, 1.0, 1.0, g);
    CHECK(bwd.values() == reflect(fwd).values());
    CHECK(max_abs_diff(fwd, bwd) > 0.9);  // different solution sets
  }
}

TEST_CASE("parameter validation") {
  const TimeGrid g = make_grid(0.0, 1.0, 10);
  CHECK_THROWS_AS(solve_forward_oscillator(0.0, 1.0, 1.0, 1.0, g), std::invalid_argument);
  CHECK_THROWS_AS(solve_forward_oscillator(1.5, 1.0, 1.0, 1.0, g), std::invalid_argument);
  CHECK_THROWS_AS(solve_forward_oscillator(0.5, 0.0, 1.0, 1.0, g), std::invalid_argument);
  CHECK_THROWS_AS(solve_backward_oscillator(0.5, 1.0, -1.0, 1.0, g), std::invalid_argument);
  Eigen::Matrix2d M = Eigen::Matrix2d::Identity(), K;
  K << 1.0, 0.0, 0.0, 2.0;
  CHECK_THROWS_AS(solve({quadratic_form(M, K), OperatorPair(Classical{}, g)}), std::invalid_argument);
  CHECK_THROWS_AS(classify_reversibility(quadratic_form(M, K), OperatorPair(Classical{}, g)), std::invalid_argument);
  CHECK_THROWS_AS(solve({harmonic_oscillator(1.0, 2), OperatorPair(Classical{}, g)}), std::invalid_argument);
}

TEST_CASE("causal marching: extending the grid leaves earlier samples unchanged") {
  for (double alpha : {0.5, 0.8, 1.0}) {
    const GridFunction short_run = solve_forward_oscillator(alpha, 1.0, 1.3, 1.0, make_grid(0.0, 1.0, 100));
    const GridFunction long_run = solve_forward_oscillator(alpha, 1.0, 1.3, 1.0, make_grid(0.0, 3.0, 300));
    CHECK(long_run.values().topRows(101) == short_run.values());
  }
  const TimeGrid a = make_grid(0.0, 1.0, 50), b = make_grid(0.0, 2.0, 100);
  const Lagrangian L = harmonic_oscillator(2.0);
  const GridFunction fa = solve({L, OperatorPair(FiniteDiff{2 * a.step()}, a), 1.0});
  const GridFunction fb = solve({L, OperatorPair(FiniteDiff{2 * b.step()}, b), 1.0});
  CHECK(fb.values().topRows(51) == fa.values());
}

TEST_CASE("residual closure: solver output satisfies the causal equation") {
  const Lagrangian L = harmonic_oscillator(1.0);
  for (const double alpha : {0.3, 0.5, 0.9}) {
    std::vector<double> residuals;
    double scale = 0.0;
    for (int n : {200, 400, 800}) {
      const TimeGrid g = make_grid(0.0, 5.0, n);
      const OperatorPair ops(FractionalRL{alpha, 1.0}, g);
      const GridFunction x = solve({L, ops, 1.0});
      residuals.push_back(el_residual(EmbeddedLagrangian(L, ops), lift_plus(x), ResidualKind::CausalPlus).max_abs(1, n));
      // Size of the terms the GL sums cancel.
      scale = std::pow(g.step(), -2.0 * alpha) * x.values().cwiseAbs().maxCoeff();
    }
    const bool at_floor = residuals.back() <= 1e-12 * scale;
    const bool ordered = oracle::order(residuals[0], residuals[1]) >= 0.9 && oracle::order(residuals[1], residuals[2]) >= 0.9;
    CHECK((at_floor || ordered));
  }
  const TimeGrid g = make_grid(0.0, 2.0, 100);
  for (const OperatorKind& kind : {OperatorKind{FiniteDiff{g.step()}}, OperatorKind{FiniteDiff{3 * g.step()}}}) {
    const OperatorPair ops(kind, g);
    const GridFunction x = solve({L, ops, 0.7});
    CHECK(el_residual(EmbeddedLagrangian(L, ops), lift_plus(x), ResidualKind::CausalPlus).max_abs(1, 100) < 1e-10);
    const GridFunction y = solve({L, ops, 0.7, 0.0, Direction::Backward});
    CHECK(el_residual(EmbeddedLagrangian(L, ops), lift_minus(y), ResidualKind::CausalMinus).max_abs(0, 99) < 1e-10);
  }
}

TEST_CASE("reversibility verdicts") {
  SUBCASE("oscillator alpha = 1") {
    const TimeGrid g = make_grid(0.0, 4.0 * std::numbers::pi, 4000);
    const ReversibilityVerdict v = classify_reversibility(harmonic_oscillator(1.0), OperatorPair(Classical{}, g));
    CHECK(v.verdict == Reversibility::Reversible);
    CHECK(v.evidence * 10.0 <= v.tol);
    CHECK(std::string(to_string(v.verdict)) == "Reversible");
  }
  SUBCASE("free particle") {
    const TimeGrid g = make_grid(0.0, 1.0, 1000);
    const ReversibilityVerdict v = classify_reversibility(free_particle(), OperatorPair(Classical{}, g));
    CHECK(v.verdict == Reversibility::Reversible);
    CHECK(v.evidence < 1e-8);
  }
  SUBCASE("oscillator alpha = 1/2") {
    const TimeGrid g = make_grid(0.0, 5.0, 5000);
    const ReversibilityVerdict v = classify_reversibility(harmonic_oscillator(1.0), OperatorPair(FractionalRL{0.5, 1.0}, g));
    CHECK(v.verdict == Reversibility::Irreversible);
    CHECK(v.evidence >= 10.0 * v.tol);
    CHECK(v.first_node == 2);
    CHECK(v.last_node == 4998);
  }
  SUBCASE("coarse grids keep the verdicts apart") {
    for (const Index n : {20, 50, 100, 200}) {
      CAPTURE(n);
      const TimeGrid g = make_grid(0.0, 1.0, n);
      CHECK(classify_reversibility(harmonic_oscillator(1.0), OperatorPair(FractionalRL{0.5, 1.0}, g)).verdict ==
            Reversibility::Irreversible);
      const TimeGrid c = make_grid(0.0, 4.0 * std::numbers::pi, 5 * n);
      CHECK(classify_reversibility(harmonic_oscillator(1.0), OperatorPair(Classical{}, c)).verdict ==
            Reversibility::Reversible);
    }
  }
  SUBCASE("explicit tolerance") {
    const TimeGrid g = make_grid(0.0, 5.0, 500);
    const ReversibilityVerdict v =
        classify_reversibility(harmonic_oscillator(1.0), OperatorPair(FractionalRL{0.5, 1.0}, g), 1e6);
    CHECK(v.verdict == Reversibility::Reversible);
    CHECK(v.tol == 1e6);
  }
}

TEST_CASE("composition identity") {
  const TimeGrid g = make_grid(0.0, 1.0, 400);
  CHECK(composition_identity_check(0.5, g, GridFunction::zero(g)) == 0.0);
  const GridFunction t2 = sample([](double t) { return t * t; }, g);
  const GridFunction bump = sample([](double t) { return oracle::bump(t, 0.5, 0.3); }, g);
  const double scale = std::pow(g.step(), -1.0);
  CHECK(composition_identity_check(0.5, g, t2) <= 1e-12 * scale);
  CHECK(composition_identity_check(0.5, g, bump) <= 1e-12 * scale);
  CHECK_THROWS_AS(composition_identity_check(1.0, g, t2), std::invalid_argument);
  CHECK_THROWS_AS(composition_identity_check(0.5, make_grid(0.0, 1.0, 10), t2), std::invalid_argument);

  // A corrupted weight recurrence breaks the identity.
  const WeightGenerator off_by_one = [](double order, Index count) {
    Eigen::VectorXd w(count);
    w(0) = 1.0;
    for (Index j = 1; j < count; ++j) w(j) = w(j - 1) * (static_cast<double>(j) - 1.0 - order) / (static_cast<double>(j) + 1.0);
    return w;
  };
  CHECK(composition_identity_check(0.5, g, t2, off_by_one) > 1e-3);
}
