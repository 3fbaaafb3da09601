#include "asymlag/dynamics.hpp"
#include "asymlag/variational.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace asymlag;

namespace {

GridFunction random_smooth(const TimeGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng), p = 3.0 * u(rng);
  const double len = g.b() - g.a();
  return sample([=](double t) { return a + b * std::sin(2.0 * t / len + p) + c * std::cos(5.0 * t / len); }, g);
}

GridFunction spike(const TimeGrid& g, Index node, double value = 1.0) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(g.size());
  v(node) = value;
  return GridFunction(g, v);
}

}  // namespace

TEST_CASE("variation spaces and bases") {
  const TimeGrid g = make_grid(0.0, 1.0, 10);
  const OperatorPair classical(Classical{}, g);
  const OperatorPair fd(FiniteDiff{g.step()}, g);
  const GridFunction end = spike(g, 0);
  const GridFunction mid = spike(g, 4);
  CHECK_FALSE(VariationSpace{SpaceKind::H}.contains(classical, lift_plus(end)));
  CHECK(VariationSpace{SpaceKind::H}.contains(fd, lift_plus(end)));
  CHECK(VariationSpace{SpaceKind::H}.contains(classical, lift_plus(mid)));
  CHECK_FALSE(VariationSpace{SpaceKind::HPlus}.contains(fd, lift_minus(mid)));
  CHECK(VariationSpace{SpaceKind::HMinus}.contains(fd, lift_minus(mid)));

  const VariationBasis full = make_basis({SpaceKind::H}, fd, 2);
  CHECK(full.count_plus == 9 * 2);
  CHECK(full.count_minus == 9 * 2);
  const VariationBasis minus = make_basis({SpaceKind::HMinus}, classical, 1);
  CHECK(minus.count_plus == 0);
  CHECK(minus.count_minus == 9);
  for (const auto& e : minus.elements) CHECK(VariationSpace{SpaceKind::HMinus}.contains(classical, e.state));
}

TEST_CASE("gateaux examples") {
  const TimeGrid g = make_grid(0.0, 1.0, 60);
  SUBCASE("zero variation") {
    const EmbeddedLagrangian Lhat(harmonic_oscillator(1.0), OperatorPair(FractionalRL{0.5, 1.0}, g));
    const AsymmetricState X = lift_plus(sample([](double t) { return std::sin(t); }, g));
    CHECK(gateaux(Lhat, X, lift_plus(GridFunction::zero(g))) == 0.0);
  }
  SUBCASE("free particle with finite differences: int D+x D-h") {
    const Index m = 2;
    const double eps = m * g.step();
    const EmbeddedLagrangian Lhat(free_particle(), OperatorPair(FiniteDiff{eps}, g));
    const GridFunction x = sample([](double t) { return t; }, g);
    const GridFunction h = sample([](double t) { return oracle::bump(t, 0.5, 0.3); }, g);
    // Direct node-sum quadrature of the integrand, with zero extension outside [a, b].
    const auto at = [&](const GridFunction& f, Index k) { return k < 0 || k > g.n_steps() ? 0.0 : f(k); };
    double expected = 0.0;
    for (Index k = 0; k <= g.n_steps(); ++k) {
      const double dx = (at(x, k) - at(x, k - m)) / eps;
      const double dh = (at(h, k + m) - at(h, k)) / eps;
      expected += g.step() * dx * dh;
    }
    CHECK(gateaux(Lhat, lift_plus(x), lift_minus(h)) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("classical solution is stationary") {
    const TimeGrid p = make_grid(0.0, 2.0 * std::numbers::pi, 1000);
    const EmbeddedLagrangian Lhat(harmonic_oscillator(1.0), OperatorPair(Classical{}, p));
    const AsymmetricState X = lift_plus(sample([](double t) { return std::cos(t); }, p));
    const GridFunction h = sample([](double t) { return oracle::bump(t, 3.0, 1.5); }, p);
    CHECK(std::abs(gateaux(Lhat, X, lift_plus(h))) < 1e-5);
    CHECK(std::abs(gateaux(Lhat, X, lift_minus(h))) < 1e-5);
  }
}

TEST_CASE("property: gateaux is linear in the variation") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  const TimeGrid g = make_grid(0.0, 1.0, 80);
  for (const OperatorKind& kind : {OperatorKind{Classical{}}, OperatorKind{FiniteDiff{2 * g.step()}},
                                   OperatorKind{FractionalRL{0.35, 1.0}}}) {
    const EmbeddedLagrangian Lhat(harmonic_oscillator(1.4), OperatorPair(kind, g));
    for (int trial = 0; trial < 10; ++trial) {
      const AsymmetricState X = AsymmetricState::general(random_smooth(g, rng), random_smooth(g, rng));
      const AsymmetricState H1 = AsymmetricState::general(random_smooth(g, rng), random_smooth(g, rng));
      const AsymmetricState H2 = AsymmetricState::general(random_smooth(g, rng), random_smooth(g, rng));
      const double a = normal(rng), b = normal(rng);
      const double lhs = gateaux(Lhat, X, a * H1 + b * H2);
      const double rhs = a * gateaux(Lhat, X, H1) + b * gateaux(Lhat, X, H2);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("closed-form gateaux agrees with the central difference of the action") {
  std::mt19937_64 rng(4);
  const TimeGrid g = make_grid(0.0, 1.0, 50);
  for (const OperatorKind& kind : {OperatorKind{Classical{}}, OperatorKind{FiniteDiff{g.step()}},
                                   OperatorKind{FractionalRL{0.6, 0.8}}}) {
    const EmbeddedLagrangian Lhat(harmonic_oscillator(2.0), OperatorPair(kind, g));
    for (int trial = 0; trial < 10; ++trial) {
      const AsymmetricState X = AsymmetricState::general(random_smooth(g, rng), random_smooth(g, rng));
      const AsymmetricState H = AsymmetricState::general(random_smooth(g, rng), random_smooth(g, rng));
      const double s = gateaux_fd_step(X);
      CHECK(std::abs(gateaux(Lhat, X, H) - gateaux_numeric(Lhat, X, H)) <= std::max(1e-8, 100.0 * s * s));
    }
  }
}

TEST_CASE("is_extremal examples") {
  SUBCASE("classical oscillator solution over H") {
    // The one-sided closure next to the ends leaves an O(step) pairing on the
    // first and last hats; the default tolerance 1e-6 n_steps covers it once n >= 1600.
    const TimeGrid g = make_grid(0.0, 2.0 * std::numbers::pi, 2000);
    const EmbeddedLagrangian Lhat(harmonic_oscillator(1.0), OperatorPair(Classical{}, g));
    const ExtremalReport r = is_extremal(Lhat, lift_plus(sample([](double t) { return std::cos(t); }, g)), {SpaceKind::H});
    CHECK(r.extremal);
    CHECK(r.basis_size == 2 * 1999);
  }
  SUBCASE("fractional forward solution: H- yes, H+ no") {
    const TimeGrid g = make_grid(0.0, 5.0, 400);
    const OperatorPair ops(FractionalRL{0.5, 1.0}, g);
    const Lagrangian L = harmonic_oscillator(1.0);
    const GridFunction x = solve({L, ops, 1.0, 0.0, Direction::Forward});
    const EmbeddedLagrangian Lhat(L, ops);
    const double tol = default_extremal_tolerance(g);
    CHECK(tol == doctest::Approx(4e-4));
    CHECK(is_extremal(Lhat, lift_plus(x), {SpaceKind::HMinus}).extremal);
    const ExtremalReport r = is_extremal(Lhat, lift_plus(x), {SpaceKind::HPlus});
    CHECK_FALSE(r.extremal);
    CHECK(r.max_abs_gateaux > 10.0 * r.threshold);
    CHECK(r.worst_branch == Branch::Plus);
  }
}

TEST_CASE("discrete stationarity: gateaux on a hat is the weighted residual") {
  std::mt19937_64 rng(17);
  const TimeGrid g = make_grid(0.0, 1.0, 12);
  const OperatorPair ops(FiniteDiff{2 * g.step()}, g);
  const EmbeddedLagrangian Lhat(harmonic_oscillator(1.5), ops);
  const AsymmetricState X = lift_plus(random_smooth(g, rng));
  const StationarityResiduals s = stationarity_residuals(Lhat, X);
  const ExtremalReport r = is_extremal(Lhat, X, {SpaceKind::H});
  const VariationBasis basis = make_basis({SpaceKind::H}, ops, 1);
  for (std::size_t i = 0; i < basis.elements.size(); ++i) {
    const auto& e = basis.elements[i];
    const GridFunction& res = e.branch == Branch::Plus ? s.plus_variation : s.minus_variation;
    CHECK(r.gateaux_values[i] == doctest::Approx(ops.quadrature()(e.node) * res(e.node)).epsilon(1e-12));
  }
}

TEST_CASE("extremality equivalences on small finite-difference grids") {
  std::mt19937_64 rng(33);
  int extremal_count = 0, other_count = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 8 + trial % 5;
    const TimeGrid g = make_grid(0.0, 1.0, n);
    const OperatorPair ops(FiniteDiff{static_cast<double>(1 + trial % 2) * g.step()}, g);
    const Lagrangian L = harmonic_oscillator(0.7 + 0.1 * (trial % 7));
    const EmbeddedLagrangian Lhat(L, ops);
    const double tol = default_extremal_tolerance(g);
    const auto interior_small = [&](const GridFunction& r) {
      return r.values().middleRows(1, n - 1).cwiseAbs().maxCoeff() <= tol;
    };
    GridFunction x = GridFunction::zero(g);
    if (trial % 3 == 1) x = solve({L, ops, 1.0, 0.0, Direction::Forward});
    if (trial % 3 == 2) x = random_smooth(g, rng);

    // Full space H: extremal iff both stationarity residuals vanish.
    const StationarityResiduals s = stationarity_residuals(Lhat, lift_plus(x));
    const bool both = interior_small(s.plus_variation) && interior_small(s.minus_variation);
    CHECK(is_extremal(Lhat, lift_plus(x), {SpaceKind::H}).extremal == both);

    // H- on the plus branch: extremal iff the causal plus residual vanishes.
    const bool causal = interior_small(el_residual(Lhat, lift_plus(x), ResidualKind::CausalPlus).values);
    const bool ext = is_extremal(Lhat, lift_plus(x), {SpaceKind::HMinus}).extremal;
    CHECK(ext == causal);
    (ext ? extremal_count : other_count)++;

    // Mirror: H+ on the minus branch with the backward solution.
    GridFunction y = trial % 2 ? solve({L, ops, 1.0, 0.0, Direction::Backward}) : random_smooth(g, rng);
    const bool causal_minus = interior_small(el_residual(Lhat, lift_minus(y), ResidualKind::CausalMinus).values);
    CHECK(is_extremal(Lhat, lift_minus(y), {SpaceKind::HPlus}).extremal == causal_minus);
  }
  CHECK(extremal_count >= 5);
  CHECK(other_count >= 5);
}

TEST_CASE("coherence check") {
  std::mt19937_64 rng(9);
  const TimeGrid g = make_grid(0.0, 1.0, 150);
  SUBCASE("finite differences and fractional operators agree on both paths") {
    for (const OperatorKind& kind : {OperatorKind{FiniteDiff{g.step()}}, OperatorKind{FractionalRL{0.7, 1.0}}}) {
      for (const Lagrangian& L : {free_particle(), harmonic_oscillator(1.2)}) {
        const OperatorPair ops(kind, g);
        const CoherenceReport rp = coherence_check(L, ops, lift_plus(random_smooth(g, rng)), 1e-12);
        CHECK(rp.pass);
        CHECK(rp.max_diff <= 1e-12);
        CHECK(rp.path_b_kind == ResidualKind::CausalPlus);
        const CoherenceReport rm = coherence_check(L, ops, lift_minus(random_smooth(g, rng)), 1e-12);
        CHECK(rm.pass);
        CHECK(rm.path_b_space == SpaceKind::HPlus);
      }
    }
  }
  SUBCASE("adversarial space choice fails and names both equations") {
    const OperatorPair ops(FractionalRL{0.7, 1.0}, g);
    const CoherenceReport r = coherence_check(harmonic_oscillator(1.0), ops, lift_plus(random_smooth(g, rng)), 1e-12,
                                              SpaceKind::HPlus);
    CHECK_FALSE(r.pass);
    CHECK(r.path_b_kind == ResidualKind::AntiCausalPlus);
    CHECK(r.note.find("anticausal_plus") != std::string::npos);
    CHECK(r.note.find("causal_plus") != std::string::npos);
  }
  SUBCASE("general states and the full space are rejected") {
    const OperatorPair ops(Classical{}, g);
    const GridFunction x = random_smooth(g, rng);
    CHECK_THROWS_AS(coherence_check(free_particle(), ops, AsymmetricState::general(x, x), 1e-12), std::invalid_argument);
    CHECK_THROWS_AS(coherence_check(free_particle(), ops, lift_plus(x), 1e-12, SpaceKind::H), std::invalid_argument);
  }
}

TEST_CASE("fundamental lemma probe") {
  const TimeGrid g = make_grid(0.0, 1.0, 40);
  for (const OperatorKind& kind : {OperatorKind{Classical{}}, OperatorKind{FiniteDiff{g.step()}}}) {
    const OperatorPair ops(kind, g);
    const VariationBasis basis = make_basis({SpaceKind::H}, ops, 1);
    CHECK(fundamental_lemma_probe(ops, GridFunction::zero(g), basis, 1e-12).vanishes);

    const ProbeReport s = fundamental_lemma_probe(ops, spike(g, 17, 0.3), basis, 1e-12);
    CHECK_FALSE(s.vanishes);
    CHECK(s.witness_node == 17);
    CHECK(s.max_reconstructed == doctest::Approx(0.3));

    const GridFunction smooth = sample([](double t) { return oracle::bump(t, 0.3, 0.2); }, g);
    const ProbeReport b = fundamental_lemma_probe(ops, smooth, basis, 1e-12);
    CHECK_FALSE(b.vanishes);
    CHECK(b.witness_node == 12);  // t = 0.3
    CHECK(b.max_pairing > 0.0);
  }
}
