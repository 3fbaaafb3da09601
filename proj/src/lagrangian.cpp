#include "asymlag/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace asymlag {

Lagrangian::Lagrangian(Index dim, ValueFn eval, GradientFn d1, GradientFn d2, std::string name)
    : Lagrangian(dim, std::move(eval), std::move(d1), std::move(d2), std::move(name), Options{}) {}

Lagrangian::Lagrangian(Index dim, ValueFn eval, GradientFn d1, GradientFn d2, std::string name, Options options)
    : dim_(dim), eval_(std::move(eval)), d1_(std::move(d1)), d2_(std::move(d2)), name_(std::move(name)) {
  if (dim_ < 1) throw std::invalid_argument("lagrangian: dim must be positive");
  if (!eval_ || !d1_ || !d2_) throw std::invalid_argument("lagrangian: eval, d1 and d2 are required");
  const double mismatch = derivative_mismatch(*this, options.probes, options.probe_seed);
  if (!(mismatch <= options.fd_tolerance)) {
    std::ostringstream os;
    os << "lagrangian '" << name_ << "': partial derivatives disagree with finite differences (relative mismatch "
       << mismatch << ")";
    throw std::invalid_argument(os.str());
  }
}

Lagrangian Lagrangian::with_oscillator_omega(double omega) const {
  Lagrangian copy = *this;
  copy.omega_ = omega;
  return copy;
}

double derivative_mismatch(const Lagrangian& L, int probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> time(0.0, 1.0);
  const Index n = L.dim();
  double worst = 0.0;
  for (int probe = 0; probe < probes; ++probe) {
    Eigen::VectorXd x(n), v(n);
    for (Index i = 0; i < n; ++i) x(i) = coord(rng);
    for (Index i = 0; i < n; ++i) v(i) = coord(rng);
    const double t = time(rng);
    const Eigen::VectorXd g1 = L.d1(x, v, t);
    const Eigen::VectorXd g2 = L.d2(x, v, t);
    if (g1.size() != n || g2.size() != n) return std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      const double dx = 1e-5 * (1.0 + std::abs(x(i)));
      Eigen::VectorXd xp = x, xm = x;
      xp(i) += dx;
      xm(i) -= dx;
      const double fd1 = (L(xp, v, t) - L(xm, v, t)) / (xp(i) - xm(i));
      const double dv = 1e-5 * (1.0 + std::abs(v(i)));
      Eigen::VectorXd vp = v, vm = v;
      vp(i) += dv;
      vm(i) -= dv;
      const double fd2 = (L(x, vp, t) - L(x, vm, t)) / (vp(i) - vm(i));
      const double e1 = std::abs(g1(i) - fd1) / (1.0 + std::abs(g1(i)));
      const double e2 = std::abs(g2(i) - fd2) / (1.0 + std::abs(g2(i)));
      if (!std::isfinite(e1) || !std::isfinite(e2)) return std::numeric_limits<double>::infinity();
      worst = std::max({worst, e1, e2});
    }
  }
  return worst;
}

Lagrangian free_particle(Index dim) {
  Lagrangian L(
      dim, [](const Eigen::VectorXd&, const Eigen::VectorXd& v, double) { return 0.5 * v.squaredNorm(); },
      [](const Eigen::VectorXd& x, const Eigen::VectorXd&, double) -> Eigen::VectorXd {
        return Eigen::VectorXd::Zero(x.size());
      },
      [](const Eigen::VectorXd&, const Eigen::VectorXd& v, double) -> Eigen::VectorXd { return v; }, "free");
  return L.with_oscillator_omega(0.0);
}

Lagrangian harmonic_oscillator(double omega, Index dim) {
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw std::invalid_argument("harmonic oscillator: omega must be >= 0");
  const double w2 = omega * omega;
  Lagrangian L(
      dim,
      [w2](const Eigen::VectorXd& x, const Eigen::VectorXd& v, double) {
        return 0.5 * (v.squaredNorm() - w2 * x.squaredNorm());
      },
      [w2](const Eigen::VectorXd& x, const Eigen::VectorXd&, double) -> Eigen::VectorXd { return -w2 * x; },
      [](const Eigen::VectorXd&, const Eigen::VectorXd& v, double) -> Eigen::VectorXd { return v; }, "oscillator");
  return L.with_oscillator_omega(omega);
}

Lagrangian quadratic_form(const Eigen::MatrixXd& mass, const Eigen::MatrixXd& stiffness) {
  const Index n = mass.rows();
  if (mass.cols() != n || stiffness.rows() != n || stiffness.cols() != n)
    throw std::invalid_argument("quadratic form: M and K must be square with equal size");
  if (!mass.isApprox(mass.transpose()) || !stiffness.isApprox(stiffness.transpose()))
    throw std::invalid_argument("quadratic form: M and K must be symmetric");
  Lagrangian L(
      n,
      [mass, stiffness](const Eigen::VectorXd& x, const Eigen::VectorXd& v, double) {
        return 0.5 * v.dot(mass * v) - 0.5 * x.dot(stiffness * x);
      },
      [stiffness](const Eigen::VectorXd& x, const Eigen::VectorXd&, double) -> Eigen::VectorXd {
        return -(stiffness * x);
      },
      [mass](const Eigen::VectorXd&, const Eigen::VectorXd& v, double) -> Eigen::VectorXd { return mass * v; },
      "quadratic");
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  const double k = stiffness(0, 0);
  if (mass == identity && stiffness == k * identity && k >= 0.0) return L.with_oscillator_omega(std::sqrt(k));
  return L;
}

EmbeddedLagrangian::EmbeddedLagrangian(Lagrangian base, OperatorPair ops) : base_(std::move(base)), ops_(std::move(ops)) {}

const char* to_string(ResidualKind kind) {
  switch (kind) {
    case ResidualKind::CausalPlus: return "causal_plus";
    case ResidualKind::CausalMinus: return "causal_minus";
    case ResidualKind::AntiCausalPlus: return "anticausal_plus";
    case ResidualKind::AntiCausalMinus: return "anticausal_minus";
    case ResidualKind::EmbeddedGeneral: return "embedded_general";
  }
  return "?";
}

double ELResidual::max_abs() const { return values.values().cwiseAbs().maxCoeff(); }

double ELResidual::l2() const {
  return std::sqrt(values.grid().step() * values.values().squaredNorm());
}

double ELResidual::max_abs(Index first, Index last) const {
  first = std::max<Index>(first, 0);
  last = std::min<Index>(last, values.size() - 1);
  if (first > last) return 0.0;
  return values.values().middleRows(first, last - first + 1).cwiseAbs().maxCoeff();
}

namespace {

void require_compatible(const EmbeddedLagrangian& Lhat, const AsymmetricState& X) {
  if (!(X.grid() == Lhat.ops().grid())) throw std::invalid_argument("lagrangian: state is not on the operator grid");
  if (X.dim() != Lhat.base().dim()) throw std::invalid_argument("lagrangian: state dimension does not match L");
}

}  // namespace

LagrangianPartials embedded_partials(const EmbeddedLagrangian& Lhat, const AsymmetricState& X) {
  require_compatible(Lhat, X);
  const Lagrangian& L = Lhat.base();
  const Index n = L.dim();
  const TimeGrid& grid = X.grid();
  const Eigen::MatrixXd args = embedded_arguments(Lhat.ops(), X, 1);
  Eigen::MatrixXd d1(grid.size(), n), d2(grid.size(), n);
  for (Index k = 0; k < grid.size(); ++k) {
    const Eigen::VectorXd x = args.row(k).head(n).transpose();
    const Eigen::VectorXd v = args.row(k).tail(n).transpose();
    const double t = grid.node(k);
    d1.row(k) = L.d1(x, v, t).transpose();
    d2.row(k) = L.d2(x, v, t).transpose();
    if (!d1.row(k).allFinite() || !d2.row(k).allFinite()) throw NonFiniteError("lagrangian: non-finite partial", k);
  }
  return {GridFunction(grid, std::move(d1)), GridFunction(grid, std::move(d2))};
}

double action(const EmbeddedLagrangian& Lhat, const AsymmetricState& X) {
  require_compatible(Lhat, X);
  const Lagrangian& L = Lhat.base();
  const Index n = L.dim();
  const TimeGrid& grid = X.grid();
  const Eigen::MatrixXd args = embedded_arguments(Lhat.ops(), X, 1);
  Eigen::VectorXd integrand(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    integrand(k) = L(args.row(k).head(n).transpose(), args.row(k).tail(n).transpose(), grid.node(k));
    if (!std::isfinite(integrand(k))) throw NonFiniteError("action: non-finite integrand", k);
  }
  return Lhat.ops().quadrature().dot(integrand);
}

ELResidual el_residual(const EmbeddedLagrangian& Lhat, const AsymmetricState& X, ResidualKind kind) {
  if (kind == ResidualKind::EmbeddedGeneral) return embedded_el_residual(Lhat, X);
  const bool plus_branch = kind == ResidualKind::CausalPlus || kind == ResidualKind::AntiCausalPlus;
  const StateTag required = plus_branch ? StateTag::PlusOnly : StateTag::MinusOnly;
  if (X.tag() != required)
    throw std::invalid_argument(std::string("el_residual: ") + to_string(kind) + " requires a " + to_string(required) +
                                " state, got " + to_string(X.tag()));
  const LagrangianPartials P = embedded_partials(Lhat, X);
  const bool outer_plus = kind == ResidualKind::CausalPlus || kind == ResidualKind::AntiCausalMinus;
  const GridFunction outer = outer_plus ? apply_plus(Lhat.ops(), P.d2) : apply_minus(Lhat.ops(), P.d2);
  return {kind, P.d1 - outer};
}

CoeffFamily el_family(const Lagrangian& L) {
  const Index n = L.dim();
  CoeffFamily fam;
  fam.k = 1;
  fam.p = 1;
  fam.n = n;
  fam.m = n;
  fam.f_terms.push_back([L, n](const Eigen::VectorXd& y, double t) -> Eigen::VectorXd {
    return L.d1(y.head(n), y.tail(n), t);
  });
  fam.f_terms.push_back([n](const Eigen::VectorXd&, double) -> Eigen::VectorXd { return -Eigen::VectorXd::Ones(n); });
  fam.g_terms.push_back([L, n](const Eigen::VectorXd& y, double t) -> Eigen::VectorXd {
    return L.d2(y.head(n), y.tail(n), t);
  });
  return fam;
}

ELResidual embedded_el_residual(const EmbeddedLagrangian& Lhat, const AsymmetricState& X) {
  require_compatible(Lhat, X);
  const EmbeddedOperator E(el_family(Lhat.base()), Lhat.ops());
  return {ResidualKind::EmbeddedGeneral, embed_apply(E, X)};
}

StationarityResiduals stationarity_residuals(const EmbeddedLagrangian& Lhat, const AsymmetricState& X) {
  const LagrangianPartials P = embedded_partials(Lhat, X);
  return {P.d1 - apply_minus(Lhat.ops(), P.d2), P.d1 - apply_plus(Lhat.ops(), P.d2)};
}

}  // namespace asymlag
