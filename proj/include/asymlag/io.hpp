#pragma once

#include "asymlag/dynamics.hpp"
#include "asymlag/grid.hpp"
#include "asymlag/lagrangian.hpp"
#include "asymlag/variational.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace asymlag {

/// Shortest decimal string that parses back to exactly x.
std::string format_double(double x);

/// CSV with header `t,<prefix>0,...,<prefix>{dim-1}` and one row per node.
void write_csv(std::ostream& os, const GridFunction& g, const std::string& prefix = "x");
/// Inverse of write_csv. The t column must match `grid` node for node.
GridFunction read_csv(std::istream& is, const TimeGrid& grid);

/// Two-column `t value` series of one component, for plotting.
void write_plot_data(std::ostream& os, const GridFunction& g, Index component = 0);

nlohmann::ordered_json grid_json(const TimeGrid& grid);
nlohmann::ordered_json residual_summary(const ELResidual& r);
nlohmann::ordered_json coherence_json(const CoherenceReport& r);
nlohmann::ordered_json verdict_json(const ReversibilityVerdict& v);
nlohmann::ordered_json extremal_json(const ExtremalReport& r);

}  // namespace asymlag
