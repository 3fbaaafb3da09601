#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace asymlag {

/// Raised when a sample, operator output or integrand is NaN/Inf.
/// Carries the first offending grid node.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, Eigen::Index node)
      : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node_(node) {}

  Eigen::Index node() const { return node_; }

 private:
  Eigen::Index node_;
};

}  // namespace asymlag
