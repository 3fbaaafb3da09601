#include "asymlag/embedding.hpp"

#include <stdexcept>
#include <string>

namespace asymlag {

void CoeffFamily::validate() const {
  if (k < 0) throw std::invalid_argument("coefficient family: k must be non-negative");
  if (p < 0) throw std::invalid_argument("coefficient family: p must be non-negative");
  if (n < 1 || m < 1) throw std::invalid_argument("coefficient family: n and m must be positive");
  if (f_terms.size() != static_cast<std::size_t>(p) + 1)
    throw std::invalid_argument("coefficient family: expected p + 1 f terms");
  if (g_terms.size() != static_cast<std::size_t>(p)) throw std::invalid_argument("coefficient family: expected p g terms");
  for (const auto& f : f_terms)
    if (!f) throw std::invalid_argument("coefficient family: empty f term");
  for (const auto& g : g_terms)
    if (!g) throw std::invalid_argument("coefficient family: empty g term");
}

const char* to_string(SelectorMatrix s) {
  switch (s) {
    case SelectorMatrix::PlusBlock: return "plus_block";
    case SelectorMatrix::MinusBlock: return "minus_block";
    case SelectorMatrix::Both: return "both";
  }
  return "?";
}

SelectorMatrix sigma(const AsymmetricState& X) {
  const bool minus_zero = X.tag() == StateTag::PlusOnly || X.minus().is_zero();
  const bool plus_zero = X.tag() == StateTag::MinusOnly || X.plus().is_zero();
  if (minus_zero && !plus_zero) return SelectorMatrix::PlusBlock;
  if (plus_zero && !minus_zero) return SelectorMatrix::MinusBlock;
  return SelectorMatrix::Both;
}

CoeffFn asym_rep(CoeffFn f, Index arg_size) {
  return [f = std::move(f), arg_size](const Eigen::VectorXd& y, double t) -> Eigen::VectorXd {
    if (y.size() != 2 * arg_size) throw std::invalid_argument("asym_rep: expected paired arguments of size " + std::to_string(2 * arg_size));
    return f(y.head(arg_size) + y.tail(arg_size), t);
  };
}

EmbeddedOperator::EmbeddedOperator(CoeffFamily family, OperatorPair ops) : family_(std::move(family)), ops_(std::move(ops)) {
  family_.validate();
}

Eigen::MatrixXd embedded_arguments(const OperatorPair& ops, const AsymmetricState& X, int k) {
  const Index n = X.dim();
  Eigen::MatrixXd args(X.grid().size(), n * (k + 1));
  GridFunction plus = X.plus();
  GridFunction minus = X.minus();
  for (int order = 0; order <= k; ++order) {
    if (order > 0) {
      plus = apply_plus(ops, plus);
      minus = apply_minus(ops, minus);
    }
    args.middleCols(order * n, n) = plus.values() + minus.values();
  }
  return args;
}

namespace {

Eigen::MatrixXd evaluate_pointwise(const CoeffFn& fn, const Eigen::MatrixXd& args, const TimeGrid& grid, Index m,
                                   const char* label) {
  Eigen::MatrixXd out(args.rows(), m);
  for (Index node = 0; node < args.rows(); ++node) {
    const Eigen::VectorXd v = fn(args.row(node).transpose(), grid.node(node));
    if (v.size() != m) throw std::invalid_argument(std::string(label) + ": coefficient returned wrong dimension");
    if (!v.allFinite()) throw NonFiniteError(std::string(label) + ": non-finite coefficient value", node);
    out.row(node) = v.transpose();
  }
  return out;
}

}  // namespace

GridFunction embed_apply(const EmbeddedOperator& E, const AsymmetricState& X) {
  const CoeffFamily& fam = E.family();
  const OperatorPair& ops = E.ops();
  if (!(X.grid() == ops.grid())) throw std::invalid_argument("embed_apply: state is not on the operator grid");
  if (X.dim() != fam.n) throw std::invalid_argument("embed_apply: state dimension does not match the family");

  const TimeGrid& grid = ops.grid();
  const Eigen::MatrixXd args = embedded_arguments(ops, X, fam.k);
  Eigen::MatrixXd result = evaluate_pointwise(fam.f_terms[0], args, grid, fam.m, "embed_apply f_0");
  if (fam.p == 0) return GridFunction(grid, std::move(result));

  const SelectorMatrix selector = sigma(X);
  const bool use_plus = selector != SelectorMatrix::MinusBlock;
  const bool use_minus = selector != SelectorMatrix::PlusBlock;
  for (int i = 1; i <= fam.p; ++i) {
    const Eigen::MatrixXd fi = evaluate_pointwise(fam.f_terms[i], args, grid, fam.m, "embed_apply f_i");
    const GridFunction gi(grid, evaluate_pointwise(fam.g_terms[i - 1], args, grid, fam.m, "embed_apply g_i"));
    if (use_plus) result.array() += fi.array() * apply_plus_power(ops, gi, i).values().array();
    if (use_minus) result.array() += fi.array() * apply_minus_power(ops, gi, i).values().array();
  }
  for (Index node = 0; node < result.rows(); ++node)
    if (!result.row(node).allFinite()) throw NonFiniteError("embed_apply: non-finite result", node);
  return GridFunction(grid, std::move(result));
}

GridFunction embed_equation_residual(const EmbeddedOperator& E, const AsymmetricState& X) { return embed_apply(E, X); }

}  // namespace asymlag
