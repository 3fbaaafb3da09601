#include "asymlag/checks.hpp"

#include "asymlag/dynamics.hpp"
#include "asymlag/lagrangian.hpp"
#include "asymlag/variational.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace asymlag {

namespace {

constexpr double kMinOrder = 0.9;
constexpr double kRoundoffFloor = 1e-12;

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Index uniform_index(Rng& rng, Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); }

// exp(-1 / (1 - u^2)) on |u| < 1, u = (t - center) / width; zero elsewhere.
GridFunction bump(const TimeGrid& grid, double center, double width) {
  return sample(
      [=](double t) {
        const double u = (t - center) / width;
        return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
      },
      grid);
}

// Random band-limited trajectory c + sum_m a_m sin(m pi s + phi_m), s in [0, 1].
GridFunction random_smooth(const TimeGrid& grid, Rng& rng, double amplitude = 1.0) {
  const double c = uniform(rng, -amplitude, amplitude);
  double a[4];
  double phi[4];
  for (int m = 0; m < 4; ++m) {
    a[m] = uniform(rng, -amplitude, amplitude) / (m + 1);
    phi[m] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  }
  const double a0 = grid.a();
  const double len = grid.b() - grid.a();
  return sample(
      [&](double t) {
        const double s = (t - a0) / len;
        double v = c;
        for (int m = 0; m < 4; ++m) v += a[m] * std::sin((m + 1) * std::numbers::pi * s + phi[m]);
        return v;
      },
      grid);
}

GridFunction random_values(const TimeGrid& grid, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(grid.size());
  for (Index k = 0; k < v.size(); ++k) v(k) = normal(rng);
  return GridFunction(grid, v);
}

bool bitwise_equal_rows(const GridFunction& f, const GridFunction& g, Index first, Index last) {
  for (Index k = first; k <= last; ++k)
    for (Index c = 0; c < f.dim(); ++c) {
      const double x = f(k, c);
      const double y = g(k, c);
      if (std::memcmp(&x, &y, sizeof(double)) != 0) return false;
    }
  return true;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << x;
  return os.str();
}

// Drops the trailing "; " left by per-case detail lines.
std::string joined(const std::ostringstream& os) {
  std::string s = os.str();
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "; ") == 0) s.resize(s.size() - 2);
  return s;
}

std::string fmt_orders(const std::vector<double>& orders) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < orders.size(); ++i) os << (i ? ", " : "") << std::fixed << std::setprecision(2) << orders[i];
  os << ']';
  return os.str();
}

std::string describe_convergence(const ConvergenceSummary& s) {
  std::string out = "errors " + fmt(s.errors.front()) + ".." + fmt(s.errors.back());
  if (s.at_floor) return out + " at round-off floor";
  return out + " orders " + fmt_orders(s.orders);
}

int count(const CheckOptions& o, int full, int quick) { return o.profile == Profile::Full ? full : quick; }

template <class Body>
CriterionResult timed(int id, const char* name, double limit, Body&& body) {
  CriterionResult r;
  r.id = id;
  r.name = name;
  r.time_limit = limit;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.passed && r.seconds > limit) {
    r.passed = false;
    r.detail += "; exceeded time limit " + fmt(limit) + " s";
  }
  return r;
}

double relative_max_error(const GridFunction& x, const GridFunction& exact) {
  return (x.values() - exact.values()).cwiseAbs().maxCoeff() / exact.values().cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<double> observed_orders(const std::vector<double>& errors) {
  std::vector<double> out;
  for (std::size_t i = 1; i < errors.size(); ++i) out.push_back(std::log2(errors[i - 1] / errors[i]));
  return out;
}

ConvergenceSummary summarize_convergence(const std::vector<double>& errors, double min_order, double floor) {
  if (errors.size() < 2) throw std::invalid_argument("summarize_convergence: need at least two errors");
  ConvergenceSummary s;
  s.errors = errors;
  s.orders = observed_orders(errors);
  s.at_floor = std::all_of(errors.begin(), errors.end(), [&](double e) { return e <= floor; });
  const bool ordered = std::all_of(s.orders.begin(), s.orders.end(), [&](double p) { return p >= min_order; });
  s.passed = s.at_floor || ordered;
  return s;
}

CriterionResult check_ibp_duality(const CheckOptions&) {
  return timed(1, "integration-by-parts duality", 10.0, [](CriterionResult& r) {
    const std::vector<int> levels{200, 400, 800};
    struct Case {
      std::string label;
      std::function<OperatorKind(const TimeGrid&)> make;
    };
    const std::vector<Case> cases{
        {"classical", [](const TimeGrid&) { return OperatorKind{Classical{}}; }},
        {"finite_difference", [](const TimeGrid&) { return OperatorKind{FiniteDiff{0.015}}; }},
        {"fractional a=0.3", [](const TimeGrid&) { return OperatorKind{FractionalRL{0.3, 1.0}}; }},
        {"fractional a=0.5", [](const TimeGrid&) { return OperatorKind{FractionalRL{0.5, 1.0}}; }},
        {"fractional a=0.7", [](const TimeGrid&) { return OperatorKind{FractionalRL{0.7, 1.0}}; }},
    };
    r.passed = true;
    std::ostringstream detail;
    for (const Case& c : cases) {
      std::vector<double> errors;
      for (int n : levels) {
        const TimeGrid grid(-1.0, 2.0, n);
        const OperatorPair ops(c.make(grid), grid);
        const GridFunction f = bump(grid, 0.4, 0.5);
        const GridFunction g = bump(grid, 0.6, 0.6);
        errors.push_back(ibp_residual(ops, f, g) / std::max(1.0, ibp_scale(ops, f, g)));
      }
      const ConvergenceSummary s = summarize_convergence(errors, kMinOrder, kRoundoffFloor);
      if (!s.passed) r.passed = false;
      detail << c.label << ": " << describe_convergence(s) << "; ";
    }
    r.detail = joined(detail);
  });
}

CriterionResult check_causality(const CheckOptions& options) {
  return timed(2, "causality", 5.0, [&](CriterionResult& r) {
    Rng rng(options.seed ^ 0x2);
    const int trials = count(options, 1000, 200);
    const TimeGrid grid(0.0, 1.0, 64);
    int failures = 0;
    for (int trial = 0; trial < trials; ++trial) {
      OperatorKind kind;
      if (trial % 2 == 0)
        kind = FiniteDiff{static_cast<double>(uniform_index(rng, 1, 3)) * grid.step()};
      else
        kind = FractionalRL{uniform(rng, 0.05, 0.95), uniform(rng, 0.5, 2.0)};
      const OperatorPair ops(kind, grid);
      const GridFunction f = random_values(grid, rng);
      GridFunction g = f;
      Eigen::MatrixXd perturbed = f.values();
      const bool test_plus = (trial / 2) % 2 == 0;
      const Index n = grid.n_steps();
      const Index k = test_plus ? uniform_index(rng, 0, n - 1) : uniform_index(rng, 1, n);
      const Index j = test_plus ? uniform_index(rng, k + 1, n) : uniform_index(rng, 0, k - 1);
      perturbed(j, 0) += uniform(rng, 0.5, 2.0);
      g = GridFunction(grid, perturbed);
      const bool same = test_plus ? bitwise_equal_rows(apply_plus(ops, f), apply_plus(ops, g), 0, k)
                                  : bitwise_equal_rows(apply_minus(ops, f), apply_minus(ops, g), k, n);
      if (!same) ++failures;
    }
    r.passed = failures == 0;
    r.detail = std::to_string(trials) + " perturbation trials, " + std::to_string(failures) + " leaks";
  });
}

CriterionResult check_coherence(const CheckOptions& options) {
  return timed(3, "coherence", 5.0, [&](CriterionResult& r) {
    Rng rng(options.seed ^ 0x3);
    const int per_kind = count(options, 20, 5);
    const TimeGrid grid(0.0, 1.0, 200);
    const double tol = 1e-12;
    double worst = 0.0;
    int runs = 0;
    for (int kind_index = 0; kind_index < 3; ++kind_index) {
      for (int i = 0; i < per_kind; ++i) {
        OperatorKind kind;
        if (kind_index == 0) kind = Classical{};
        else if (kind_index == 1) kind = FiniteDiff{static_cast<double>(uniform_index(rng, 1, 4)) * grid.step()};
        else kind = FractionalRL{uniform(rng, 0.1, 0.9), uniform(rng, 0.5, 2.0)};
        const OperatorPair ops(kind, grid);
        const Lagrangian L = harmonic_oscillator(uniform(rng, 0.0, 3.0));
        const GridFunction x = random_smooth(grid, rng);
        for (const AsymmetricState& X : {lift_plus(x), lift_minus(x)}) {
          const CoherenceReport rep = coherence_check(L, ops, X, tol);
          worst = std::max(worst, rep.max_diff);
          ++runs;
        }
      }
    }
    r.passed = worst <= tol;
    r.detail = std::to_string(runs) + " branch states, max |path A - path B| = " + fmt(worst) + " (tol " + fmt(tol) + ")";
  });
}

CriterionResult check_restricted_extremality(const CheckOptions& options) {
  return timed(4, "restricted extremality", 30.0, [&](CriterionResult& r) {
    Rng rng(options.seed ^ 0x4);
    const int total = count(options, 50, 20);
    int agree = 0;
    int extremal = 0;
    int non_extremal = 0;
    const VariationSpace space{SpaceKind::HMinus};
    for (int i = 0; i < total; ++i) {
      const int n = static_cast<int>(uniform_index(rng, 8, 12));
      const TimeGrid grid(0.0, 1.2, n);
      const OperatorPair ops(FiniteDiff{static_cast<double>(uniform_index(rng, 1, 2)) * grid.step()}, grid);
      const Lagrangian L = harmonic_oscillator(uniform(rng, 0.5, 2.0));
      GridFunction x = (i % 2 == 0)
                           ? solve(ForwardProblem{L, ops, uniform(rng, -2.0, 2.0), 0.0, Direction::Forward})
                           : random_smooth(grid, rng);
      const EmbeddedLagrangian Lhat(L, ops);
      const AsymmetricState X = lift_plus(x);
      const double tol = default_extremal_tolerance(grid);
      const ExtremalReport rep = is_extremal(Lhat, X, space, tol);
      const ELResidual res = el_residual(Lhat, X, ResidualKind::CausalPlus);
      const bool residual_small = res.max_abs(1, grid.n_steps() - 1) <= tol;
      if (rep.extremal == residual_small) ++agree;
      (rep.extremal ? extremal : non_extremal)++;
    }
    const int need = total >= 50 ? 10 : total / 4;
    r.passed = agree == total && extremal >= need && non_extremal >= need;
    r.detail = std::to_string(agree) + "/" + std::to_string(total) + " agree (" + std::to_string(extremal) +
               " extremal, " + std::to_string(non_extremal) + " not)";
  });
}

CriterionResult check_anticausal_distinction(const CheckOptions&) {
  return timed(5, "anticausal distinction", 5.0, [](CriterionResult& r) {
    const TimeGrid grid(0.0, 5.0, 1000);
    const OperatorPair ops(FractionalRL{0.5, 1.0}, grid);
    const Lagrangian L = harmonic_oscillator(1.0);
    const GridFunction x = solve(ForwardProblem{L, ops, 1.0, 0.0, Direction::Forward});
    const EmbeddedLagrangian Lhat(L, ops);
    const AsymmetricState X = lift_plus(x);
    const Index last = grid.n_steps();
    // Node 0 carries the initial datum and is not an equation node.
    const double causal = el_residual(Lhat, X, ResidualKind::CausalPlus).max_abs(1, last);
    const double anti = el_residual(Lhat, X, ResidualKind::AntiCausalPlus).max_abs(1, last);
    r.passed = anti > 10.0 * causal && anti > 0.0;
    r.detail = "causal_plus " + fmt(causal) + ", anticausal_plus " + fmt(anti);
  });
}

CriterionResult check_oscillator_limits(const CheckOptions&) {
  return timed(6, "oscillator limits", 30.0, [](CriterionResult& r) {
    const std::vector<int> levels{500, 1000, 2000};
    const double omega = 1.0;
    std::vector<double> classical;
    std::vector<double> diffusive;
    for (int n : levels) {
      const TimeGrid g1(0.0, 4.0 * std::numbers::pi / omega, n);
      const GridFunction x1 = solve_forward_oscillator(1.0, 1.0, omega, 1.0, g1);
      classical.push_back(relative_max_error(x1, sample([&](double t) { return std::cos(omega * t); }, g1)));
      const double tau = 1.0;
      const TimeGrid g2(0.0, 5.0, n);
      const GridFunction x2 = solve_forward_oscillator(0.5, tau, omega, 1.0, g2);
      diffusive.push_back(
          relative_max_error(x2, sample([&](double t) { return std::exp(-tau * omega * omega * t); }, g2)));
    }
    const ConvergenceSummary s1 = summarize_convergence(classical, kMinOrder, kRoundoffFloor);
    const ConvergenceSummary s2 = summarize_convergence(diffusive, kMinOrder, kRoundoffFloor);
    const bool ok1 = s1.passed && classical.back() <= 5e-2;
    const bool ok2 = s2.passed && diffusive.back() <= 1e-2;
    r.passed = ok1 && ok2;
    r.detail = "alpha=1 vs cos: " + describe_convergence(s1) + "; alpha=1/2 vs exp: " + describe_convergence(s2);
  });
}

CriterionResult check_composition_identity(const CheckOptions& options) {
  return timed(7, "composition identity", 10.0, [&](CriterionResult& r) {
    const std::vector<int> levels{200, 400, 800};
    r.passed = true;
    std::ostringstream detail;
    for (double alpha : {0.3, 0.5, 0.7}) {
      for (int shape = 0; shape < 2; ++shape) {
        std::vector<double> errors;
        for (int n : levels) {
          const TimeGrid grid(0.0, 1.0, n);
          const GridFunction f = shape == 0 ? sample([](double t) { return t * t; }, grid) : bump(grid, 0.5, 0.4);
          // Magnitude of the terms the GL sums cancel: h^(-2 alpha) max|f|.
          const double scale =
              std::max(1.0, f.values().cwiseAbs().maxCoeff() * std::pow(grid.step(), -2.0 * alpha));
          errors.push_back(composition_identity_check(alpha, grid, f, options.weights) / scale);
        }
        const ConvergenceSummary s = summarize_convergence(errors, kMinOrder, kRoundoffFloor);
        if (!s.passed) r.passed = false;
        detail << "a=" << alpha << (shape == 0 ? " t^2: " : " bump: ") << describe_convergence(s) << "; ";
      }
    }
    r.detail = joined(detail);
  });
}

CriterionResult check_reversibility(const CheckOptions&) {
  return timed(8, "reversibility", 10.0, [](CriterionResult& r) {
    struct Case {
      std::string label;
      Lagrangian L;
      OperatorPair ops;
      Reversibility expected;
    };
    const TimeGrid osc_grid(0.0, 4.0 * std::numbers::pi, 4000);
    const TimeGrid free_grid(0.0, 1.0, 1000);
    const TimeGrid frac_grid(0.0, 5.0, 5000);
    const std::vector<Case> cases{
        {"oscillator alpha=1", harmonic_oscillator(1.0), OperatorPair(Classical{}, osc_grid), Reversibility::Reversible},
        {"free particle", free_particle(), OperatorPair(Classical{}, free_grid), Reversibility::Reversible},
        {"oscillator alpha=1/2", harmonic_oscillator(1.0), OperatorPair(FractionalRL{0.5, 1.0}, frac_grid),
         Reversibility::Irreversible},
    };
    r.passed = true;
    std::ostringstream detail;
    for (const Case& c : cases) {
      const ReversibilityVerdict v = classify_reversibility(c.L, c.ops);
      const double margin = c.expected == Reversibility::Reversible ? v.tol / std::max(v.evidence, 1e-300)
                                                                    : v.evidence / v.tol;
      const bool ok = v.verdict == c.expected && margin >= 10.0;
      if (!ok) r.passed = false;
      detail << c.label << ": " << to_string(v.verdict) << " (evidence " << fmt(v.evidence) << ", tol " << fmt(v.tol)
             << "); ";
    }
    r.detail = joined(detail);
  });
}

CriterionResult check_gateaux_oracle(const CheckOptions& options) {
  return timed(9, "gateaux oracle", 10.0, [&](CriterionResult& r) {
    Rng rng(options.seed ^ 0x9);
    const int per_kind = count(options, 50, 10);
    const TimeGrid grid(0.0, 1.0, 100);
    const double beta = 0.5;
    const Lagrangian quartic(
        1, [beta](const Eigen::VectorXd& x, const Eigen::VectorXd& v, double) {
          return 0.5 * v.squaredNorm() - 0.5 * x.squaredNorm() - 0.25 * beta * std::pow(x.squaredNorm(), 2);
        },
        [beta](const Eigen::VectorXd& x, const Eigen::VectorXd&, double) {
          return Eigen::VectorXd(-x - beta * x.squaredNorm() * x);
        },
        [](const Eigen::VectorXd&, const Eigen::VectorXd& v, double) { return Eigen::VectorXd(v); }, "quartic");
    double worst_ratio = 0.0;
    double worst_diff = 0.0;
    int pairs = 0;
    for (int kind_index = 0; kind_index < 3; ++kind_index) {
      for (int i = 0; i < per_kind; ++i) {
        OperatorKind kind;
        if (kind_index == 0) kind = Classical{};
        else if (kind_index == 1) kind = FiniteDiff{static_cast<double>(uniform_index(rng, 1, 4)) * grid.step()};
        else kind = FractionalRL{uniform(rng, 0.1, 0.9), uniform(rng, 0.5, 2.0)};
        const OperatorPair ops(kind, grid);
        const Lagrangian L = i % 2 == 0 ? harmonic_oscillator(uniform(rng, 0.0, 3.0)) : quartic;
        const EmbeddedLagrangian Lhat(L, ops);
        const AsymmetricState X = AsymmetricState::general(random_smooth(grid, rng), random_smooth(grid, rng));
        const AsymmetricState H = AsymmetricState::general(random_smooth(grid, rng), random_smooth(grid, rng));
        const double s = gateaux_fd_step(X);
        const double tol = std::max(1e-8, 100.0 * s * s);
        const double diff = std::abs(gateaux(Lhat, X, H) - gateaux_numeric(Lhat, X, H, s));
        worst_diff = std::max(worst_diff, diff);
        worst_ratio = std::max(worst_ratio, diff / tol);
        ++pairs;
      }
    }
    r.passed = worst_ratio <= 1.0;
    r.detail = std::to_string(pairs) + " pairs, max |closed - numeric| = " + fmt(worst_diff) +
               " (worst diff/tol " + fmt(worst_ratio) + ")";
  });
}

std::vector<CriterionResult> run_acceptance(const CheckOptions& options, const std::optional<std::vector<int>>& selection) {
  using Check = CriterionResult (*)(const CheckOptions&);
  static const Check checks[] = {check_ibp_duality,          check_causality,         check_coherence,
                                 check_restricted_extremality, check_anticausal_distinction, check_oscillator_limits,
                                 check_composition_identity, check_reversibility,     check_gateaux_oracle};
  std::vector<int> ids;
  if (selection) {
    if (selection->empty()) throw std::invalid_argument("run_acceptance: empty criterion selection");
    ids = *selection;
    for (int id : ids)
      if (id < 1 || id > 9) throw std::invalid_argument("run_acceptance: unknown criterion " + std::to_string(id));
  } else {
    for (int id = 1; id <= 9; ++id) ids.push_back(id);
  }
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(checks[id - 1](options));
  return out;
}

std::string format_table(const std::vector<CriterionResult>& results) {
  std::ostringstream os;
  for (const CriterionResult& r : results) {
    os << (r.passed ? "PASS" : "FAIL") << "  criterion " << r.id << " " << r.name << " (" << std::fixed
       << std::setprecision(2) << r.seconds << " s / " << std::setprecision(0) << r.time_limit << " s): " << r.detail
       << '\n';
  }
  return os.str();
}

}  // namespace asymlag
