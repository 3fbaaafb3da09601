#pragma once

#include "asymlag/embedding.hpp"
#include "asymlag/grid.hpp"
#include "asymlag/operators.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace asymlag {

/// L(x, v, t) together with its partial gradients d1 = dL/dx and d2 = dL/dv.
class Lagrangian {
 public:
  using ValueFn = std::function<double(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double t)>;
  using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double t)>;

  struct Options {
    double fd_tolerance = 1e-6;  // relative
    int probes = 100;
    std::uint64_t probe_seed = 0x5eed;
  };

  /// Validates d1/d2 against central differences of eval at seeded probe
  /// points; throws std::invalid_argument naming the first inconsistent probe.
  Lagrangian(Index dim, ValueFn eval, GradientFn d1, GradientFn d2, std::string name = "custom");
  Lagrangian(Index dim, ValueFn eval, GradientFn d1, GradientFn d2, std::string name, Options options);

  Index dim() const { return dim_; }
  const std::string& name() const { return name_; }

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double t) const { return eval_(x, v, t); }
  Eigen::VectorXd d1(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double t) const { return d1_(x, v, t); }
  Eigen::VectorXd d2(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double t) const { return d2_(x, v, t); }

  /// For isotropic L = (|v|^2 - omega^2 |x|^2) / 2 the value of omega
  /// (0 for the free particle). Empty for every other Lagrangian.
  const std::optional<double>& oscillator_omega() const { return omega_; }
  Lagrangian with_oscillator_omega(double omega) const;

 private:
  Index dim_;
  ValueFn eval_;
  GradientFn d1_;
  GradientFn d2_;
  std::string name_;
  std::optional<double> omega_;
};

/// Largest relative mismatch between (d1, d2) and central differences of
/// eval over `probes` seeded random points in [-2, 2]^n x [-2, 2]^n x [0, 1].
double derivative_mismatch(const Lagrangian& L, int probes, std::uint64_t seed);

/// L = |v|^2 / 2.
Lagrangian free_particle(Index dim = 1);
/// L = (|v|^2 - omega^2 |x|^2) / 2.
Lagrangian harmonic_oscillator(double omega, Index dim = 1);
/// L = v^T M v / 2 - x^T K x / 2 with symmetric M, K.
Lagrangian quadratic_form(const Eigen::MatrixXd& mass, const Eigen::MatrixXd& stiffness);

/// L^ = L~(X, DX, t) over an operator pair.
class EmbeddedLagrangian {
 public:
  EmbeddedLagrangian(Lagrangian base, OperatorPair ops);

  const Lagrangian& base() const { return base_; }
  const OperatorPair& ops() const { return ops_; }

 private:
  Lagrangian base_;
  OperatorPair ops_;
};

enum class ResidualKind { CausalPlus, CausalMinus, AntiCausalPlus, AntiCausalMinus, EmbeddedGeneral };

const char* to_string(ResidualKind kind);

struct ELResidual {
  ResidualKind kind;
  GridFunction values;

  double max_abs() const;
  double l2() const;
  /// max |r_k| over nodes [first, last].
  double max_abs(Index first, Index last) const;
};

/// Grid functions t -> d1 L~(X, DX, t) and t -> d2 L~(X, DX, t).
struct LagrangianPartials {
  GridFunction d1;
  GridFunction d2;
};

LagrangianPartials embedded_partials(const EmbeddedLagrangian& Lhat, const AsymmetricState& X);

/// Action A(L^)(X): quadrature of L(x+ + x-, D+x+ + D-x-, t) over [a, b].
double action(const EmbeddedLagrangian& Lhat, const AsymmetricState& X);

/// Euler-Lagrange residual d1L - D(outer) d2L with the inner operator fixed by the branch.
ELResidual el_residual(const EmbeddedLagrangian& Lhat, const AsymmetricState& X, ResidualKind kind);

/// Embedding of the classical EL operator, realized through
/// embed_apply with f = {d1L, -1}, g = {d2L}, k = p = 1.
ELResidual embedded_el_residual(const EmbeddedLagrangian& Lhat, const AsymmetricState& X);

/// The EL operator written as a coefficient family (sign-normalized).
CoeffFamily el_family(const Lagrangian& L);

/// The pair of stationarity residuals of the full space H:
/// paired with h+: d1L~ - D- d2L~, paired with h-: d1L~ - D+ d2L~.
struct StationarityResiduals {
  GridFunction plus_variation;
  GridFunction minus_variation;
};

StationarityResiduals stationarity_residuals(const EmbeddedLagrangian& Lhat, const AsymmetricState& X);

}  // namespace asymlag
