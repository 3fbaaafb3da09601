#pragma once

#include "asymlag/grid.hpp"
#include "asymlag/lagrangian.hpp"
#include "asymlag/operators.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace asymlag {

enum class SpaceKind { H, HPlus, HMinus };

const char* to_string(SpaceKind kind);

enum class Branch { Plus, Minus };

/// A space of variations: pairs (h+, h-) annihilating the boundary term,
/// R_ab(h+, f) = R_ab(f, h-) = 0 for every f, optionally restricted to V+ or V-.
struct VariationSpace {
  SpaceKind kind = SpaceKind::H;

  /// Boundary predicate plus the branch restriction. For Classical operators
  /// this means h(a) = h(b) = 0; FiniteDiff/FractionalRL have R_ab = 0, so
  /// only the branch restriction applies.
  bool contains(const OperatorPair& ops, const AsymmetricState& h) const;
};

/// Discrete hats (Kronecker deltas) at every interior node, one per
/// component per admitted branch.
struct VariationBasis {
  struct Element {
    AsymmetricState state;
    Index node;
    Index component;
    Branch branch;
  };
  std::vector<Element> elements;
  Index count_plus = 0;
  Index count_minus = 0;

  bool empty() const { return elements.empty(); }
};

VariationBasis make_basis(const VariationSpace& space, const OperatorPair& ops, Index dim);

/// Closed-form Gâteaux derivative dA(L^)(X)(H)
///   = int [d1L~ (h+ + h-) + d2L~ (D+h+ + D-h-)] dt.
double gateaux(const EmbeddedLagrangian& Lhat, const AsymmetricState& X, const AsymmetricState& H);

/// Default finite-difference step for the numeric Gâteaux oracle: 1e-5 (1 + |X|_inf).
double gateaux_fd_step(const AsymmetricState& X);

/// Central difference (A(X + sH) - A(X - sH)) / 2s of the action.
double gateaux_numeric(const EmbeddedLagrangian& Lhat, const AsymmetricState& X, const AsymmetricState& H,
                       std::optional<double> fd_step = std::nullopt);

struct ExtremalReport {
  bool extremal = false;
  double action = 0.0;
  double threshold = 0.0;
  double max_abs_gateaux = 0.0;
  Index worst_node = -1;
  Index worst_component = -1;
  Branch worst_branch = Branch::Plus;
  Index basis_size = 0;
  std::vector<double> gateaux_values;  // one per basis element, basis order
};

/// Default extremality tolerance 1e-6 * n_steps.
double default_extremal_tolerance(const TimeGrid& grid);

/// First-order stationarity over the space's basis:
/// extremal iff |gateaux(X, H_i)| <= tol (1 + |A(X)|) for every element.
/// Throws std::invalid_argument for an empty basis.
ExtremalReport is_extremal(const EmbeddedLagrangian& Lhat, const AsymmetricState& X, const VariationSpace& space,
                           std::optional<double> tol = std::nullopt);

struct CoherenceReport {
  double path_a_norm = 0.0;  // embed the EL equation, then evaluate
  double path_b_norm = 0.0;  // embed L, then take the restricted variational EL form
  double max_diff = 0.0;
  Index worst_node = -1;
  double tol = 0.0;
  bool pass = false;
  ResidualKind path_b_kind = ResidualKind::CausalPlus;
  SpaceKind path_b_space = SpaceKind::HMinus;
  std::string note;
};

/// Compares embed-then-vary against vary-then-embed on a branch state.
/// Path B's variation space defaults to the opposite branch (H- for (x+, 0),
/// H+ for (0, x-)). Throws for General states.
CoherenceReport coherence_check(const Lagrangian& L, const OperatorPair& ops, const AsymmetricState& X, double tol,
                                std::optional<SpaceKind> path_b_space = std::nullopt);

struct ProbeReport {
  bool vanishes = false;
  double max_pairing = 0.0;
  double max_reconstructed = 0.0;
  Index witness_node = -1;
  Index witness_component = -1;
};

/// Pairs r with every basis profile (h+ + h-), reconstructs r on the span
/// from the pairings (least squares on the Gram system) and reports whether
/// the reconstruction vanishes to tol. A nonzero result names the node of
/// largest reconstructed magnitude.
ProbeReport fundamental_lemma_probe(const OperatorPair& ops, const GridFunction& r, const VariationBasis& basis,
                                    double tol);

}  // namespace asymlag
