#include "asymlag/variational.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace asymlag {

const char* to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::H: return "H";
    case SpaceKind::HPlus: return "H+";
    case SpaceKind::HMinus: return "H-";
  }
  return "?";
}

bool VariationSpace::contains(const OperatorPair& ops, const AsymmetricState& h) const {
  if (!(h.grid() == ops.grid())) return false;
  if (kind == SpaceKind::HPlus && !h.minus().is_zero()) return false;
  if (kind == SpaceKind::HMinus && !h.plus().is_zero()) return false;
  if (!ops.is_classical()) return true;
  const Index last = h.grid().size() - 1;
  const auto vanishes_at_ends = [last](const GridFunction& g) {
    return (g.at(0).array() == 0.0).all() && (g.at(last).array() == 0.0).all();
  };
  return vanishes_at_ends(h.plus()) && vanishes_at_ends(h.minus());
}

VariationBasis make_basis(const VariationSpace& space, const OperatorPair& ops, Index dim) {
  const TimeGrid& grid = ops.grid();
  VariationBasis basis;
  const auto add_branch = [&](Branch branch) {
    for (Index node = 1; node < grid.size() - 1; ++node) {
      for (Index c = 0; c < dim; ++c) {
        Eigen::MatrixXd hat = Eigen::MatrixXd::Zero(grid.size(), dim);
        hat(node, c) = 1.0;
        GridFunction g(grid, std::move(hat));
        AsymmetricState state = branch == Branch::Plus ? lift_plus(g) : lift_minus(g);
        basis.elements.push_back({std::move(state), node, c, branch});
        (branch == Branch::Plus ? basis.count_plus : basis.count_minus) += 1;
      }
    }
  };
  if (space.kind != SpaceKind::HMinus) add_branch(Branch::Plus);
  if (space.kind != SpaceKind::HPlus) add_branch(Branch::Minus);
  return basis;
}

namespace {

double gateaux_from_partials(const LagrangianPartials& P, const OperatorPair& ops, const AsymmetricState& H) {
  const GridFunction profile = H.plus() + H.minus();
  const GridFunction rate = apply_plus(ops, H.plus()) + apply_minus(ops, H.minus());
  const double value = inner(ops, P.d1, profile) + inner(ops, P.d2, rate);
  if (!std::isfinite(value)) throw NonFiniteError("gateaux: non-finite value", 0);
  return value;
}

void require_variation_shape(const AsymmetricState& X, const AsymmetricState& H) {
  if (!(X.grid() == H.grid()) || X.dim() != H.dim())
    throw std::invalid_argument("gateaux: variation must share the state's grid and dimension");
}

}  // namespace

double gateaux(const EmbeddedLagrangian& Lhat, const AsymmetricState& X, const AsymmetricState& H) {
  require_variation_shape(X, H);
  return gateaux_from_partials(embedded_partials(Lhat, X), Lhat.ops(), H);
}

double gateaux_fd_step(const AsymmetricState& X) {
  const double sup = std::max(X.plus().values().cwiseAbs().maxCoeff(), X.minus().values().cwiseAbs().maxCoeff());
  return 1e-5 * (1.0 + sup);
}

double gateaux_numeric(const EmbeddedLagrangian& Lhat, const AsymmetricState& X, const AsymmetricState& H,
                       std::optional<double> fd_step) {
  require_variation_shape(X, H);
  const double s = fd_step.value_or(gateaux_fd_step(X));
  const double forward = action(Lhat, X + s * H);
  const double backward = action(Lhat, X + (-s) * H);
  const double value = (forward - backward) / (2.0 * s);
  if (!std::isfinite(value)) throw NonFiniteError("gateaux_numeric: non-finite value", 0);
  return value;
}

double default_extremal_tolerance(const TimeGrid& grid) { return 1e-6 * grid.n_steps(); }

ExtremalReport is_extremal(const EmbeddedLagrangian& Lhat, const AsymmetricState& X, const VariationSpace& space,
                           std::optional<double> tol) {
  const VariationBasis basis = make_basis(space, Lhat.ops(), X.dim());
  if (basis.empty()) throw std::invalid_argument("is_extremal: empty variation basis");
  const LagrangianPartials P = embedded_partials(Lhat, X);

  ExtremalReport report;
  report.action = action(Lhat, X);
  report.threshold = tol.value_or(default_extremal_tolerance(X.grid())) * (1.0 + std::abs(report.action));
  report.basis_size = static_cast<Index>(basis.elements.size());
  report.gateaux_values.reserve(basis.elements.size());
  for (const auto& element : basis.elements) {
    const double value = gateaux_from_partials(P, Lhat.ops(), element.state);
    report.gateaux_values.push_back(value);
    if (std::abs(value) > report.max_abs_gateaux || report.worst_node < 0) {
      report.max_abs_gateaux = std::abs(value);
      report.worst_node = element.node;
      report.worst_component = element.component;
      report.worst_branch = element.branch;
    }
  }
  report.extremal = report.max_abs_gateaux <= report.threshold;
  return report;
}

CoherenceReport coherence_check(const Lagrangian& L, const OperatorPair& ops, const AsymmetricState& X, double tol,
                                std::optional<SpaceKind> path_b_space) {
  if (X.tag() == StateTag::General)
    throw std::invalid_argument("coherence_check: the diagram is defined on branch states (plus_only or minus_only)");
  const bool plus = X.tag() == StateTag::PlusOnly;
  const SpaceKind space = path_b_space.value_or(plus ? SpaceKind::HMinus : SpaceKind::HPlus);
  if (space == SpaceKind::H) throw std::invalid_argument("coherence_check: path B needs a restricted space (H+ or H-)");

  // Variations in the opposite branch yield the causal equation; variations
  // in the same branch yield the anti-causal one.
  ResidualKind kind;
  if (plus) kind = space == SpaceKind::HMinus ? ResidualKind::CausalPlus : ResidualKind::AntiCausalPlus;
  else kind = space == SpaceKind::HPlus ? ResidualKind::CausalMinus : ResidualKind::AntiCausalMinus;

  const EmbeddedLagrangian Lhat(L, ops);
  const ELResidual path_a = embedded_el_residual(Lhat, X);
  const ELResidual path_b = el_residual(Lhat, X, kind);
  const Eigen::MatrixXd diff = (path_a.values.values() - path_b.values.values()).cwiseAbs();

  CoherenceReport report;
  report.path_a_norm = path_a.max_abs();
  report.path_b_norm = path_b.max_abs();
  Index row = 0, col = 0;
  report.max_diff = diff.maxCoeff(&row, &col);
  report.worst_node = row;
  report.tol = tol;
  report.pass = report.max_diff <= tol;
  report.path_b_kind = kind;
  report.path_b_space = space;
  if (!report.pass) {
    report.note = std::string("path B (variations in ") + to_string(space) + ") gives the " + to_string(kind) +
                  " equation, path A gives the " + (plus ? "causal_plus" : "causal_minus") + " equation";
  }
  return report;
}

ProbeReport fundamental_lemma_probe(const OperatorPair& ops, const GridFunction& r, const VariationBasis& basis,
                                    double tol) {
  if (!(r.grid() == ops.grid())) throw std::invalid_argument("fundamental_lemma_probe: residual is not on the operator grid");
  ProbeReport report;
  if (basis.empty()) {
    report.vanishes = true;
    return report;
  }
  const Index rows = r.size() * r.dim();
  const auto flat = [&](const GridFunction& g) {
    Eigen::VectorXd v(rows);
    for (Index c = 0; c < g.dim(); ++c) v.segment(c * g.size(), g.size()) = g.values().col(c);
    return v;
  };

  // Distinct profiles only: H contains the same hat once per branch.
  std::vector<Eigen::VectorXd> profiles;
  std::map<std::pair<Index, Index>, bool> seen;
  for (const auto& e : basis.elements) {
    if (seen.emplace(std::make_pair(e.node, e.component), true).second)
      profiles.push_back(flat(e.state.plus() + e.state.minus()));
  }
  Eigen::MatrixXd B(rows, static_cast<Index>(profiles.size()));
  for (Index j = 0; j < B.cols(); ++j) B.col(j) = profiles[static_cast<std::size_t>(j)];

  Eigen::VectorXd weights(rows);
  for (Index c = 0; c < r.dim(); ++c) weights.segment(c * r.size(), r.size()) = ops.quadrature();

  const Eigen::VectorXd pairings = B.transpose() * weights.asDiagonal() * flat(r);
  const Eigen::MatrixXd gram = B.transpose() * weights.asDiagonal() * B;
  report.max_pairing = pairings.cwiseAbs().maxCoeff();

  Eigen::VectorXd coeffs;
  const Eigen::MatrixXd off_diagonal = gram - Eigen::MatrixXd(gram.diagonal().asDiagonal());
  if (off_diagonal.cwiseAbs().maxCoeff() == 0.0 && (gram.diagonal().array() > 0.0).all()) {
    coeffs = pairings.cwiseQuotient(gram.diagonal());
  } else {
    coeffs = gram.completeOrthogonalDecomposition().solve(pairings);
  }
  const Eigen::VectorXd reconstructed = B * coeffs;
  Index at = 0;
  report.max_reconstructed = reconstructed.cwiseAbs().maxCoeff(&at);
  report.witness_node = at % r.size();
  report.witness_component = at / r.size();
  report.vanishes = report.max_reconstructed <= tol;
  if (report.vanishes) {
    report.witness_node = -1;
    report.witness_component = -1;
  }
  return report;
}

}  // namespace asymlag
