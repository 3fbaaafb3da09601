#pragma once

#include "asymlag/grid.hpp"
#include "asymlag/operators.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace asymlag {

/// A coefficient function R^{n(k+1)} x R -> R^m. The argument stacks
/// (x, Dx, ..., D^k x) at one instant, component-major within each block.
using CoeffFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& y, double t)>;

/// The families f = {f_0..f_p}, g = {g_1..g_p} of an operator
///   O(x) = [F_0 + sum_i F_i . d^i/dt^i o G_i](x, ..., d^k x, t).
struct CoeffFamily {
  int k = 0;
  int p = 0;
  Index n = 1;  // state dimension
  Index m = 1;  // output dimension
  std::vector<CoeffFn> f_terms;  // size p + 1
  std::vector<CoeffFn> g_terms;  // size p, g_terms[i-1] is g_i

  /// Throws std::invalid_argument on inconsistent sizes.
  void validate() const;
};

enum class SelectorMatrix { PlusBlock, MinusBlock, Both };

const char* to_string(SelectorMatrix s);

/// sigma(X): PlusBlock on V+ \ {0}, MinusBlock on V- \ {0}, Both otherwise.
/// Membership is an exact-zero test on the complementary component.
SelectorMatrix sigma(const AsymmetricState& X);

/// F~(y1, y2, t) = f(y1 + y2, t).
CoeffFn asym_rep(CoeffFn f, Index arg_size);

/// Asymmetric embedding E(O_f^g) of a coefficient family over an operator pair.
class EmbeddedOperator {
 public:
  EmbeddedOperator(CoeffFamily family, OperatorPair ops);

  const CoeffFamily& family() const { return family_; }
  const OperatorPair& ops() const { return ops_; }

 private:
  CoeffFamily family_;
  OperatorPair ops_;
};

/// Evaluates [F~_0 + sigma(X) (F~_i . (D+)^i o G~_i ; F~_i . (D-)^i o G~_i)](X, ..., D^k X, t)
/// at every node. Returns an m-dimensional grid function.
GridFunction embed_apply(const EmbeddedOperator& E, const AsymmetricState& X);

/// Residual of E(O_f^g)(X) = 0; same values as embed_apply.
GridFunction embed_equation_residual(const EmbeddedOperator& E, const AsymmetricState& X);

/// Stacked arguments (x+ + x-, D+x+ + D-x-, ..., (D+)^k x+ + (D-)^k x-) as a
/// (nodes x n(k+1)) matrix.
Eigen::MatrixXd embedded_arguments(const OperatorPair& ops, const AsymmetricState& X, int k);

}  // namespace asymlag
