#include "asymlag/io.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace asymlag {

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

void write_csv(std::ostream& os, const GridFunction& g, const std::string& prefix) {
  os << 't';
  for (Index c = 0; c < g.dim(); ++c) os << ',' << prefix << c;
  os << '\n';
  for (Index k = 0; k < g.size(); ++k) {
    os << format_double(g.grid().node(k));
    for (Index c = 0; c < g.dim(); ++c) os << ',' << format_double(g(k, c));
    os << '\n';
  }
}

namespace {

double parse_double(const std::string& cell, std::size_t line) {
  double value = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw std::invalid_argument("csv: bad number '" + cell + "' on line " + std::to_string(line));
  return value;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

GridFunction read_csv(std::istream& is, const TimeGrid& grid) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("csv: missing header");
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "t") throw std::invalid_argument("csv: header must start with t");
  const Index dim = static_cast<Index>(header.size()) - 1;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (static_cast<Index>(cells.size()) != dim + 1)
      throw std::invalid_argument("csv: wrong column count on line " + std::to_string(line_no));
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, line_no));
    rows.push_back(std::move(row));
  }
  if (static_cast<Index>(rows.size()) != grid.size())
    throw std::invalid_argument("csv: expected " + std::to_string(grid.size()) + " rows, got " + std::to_string(rows.size()));
  Eigen::MatrixXd values(grid.size(), dim);
  for (Index k = 0; k < grid.size(); ++k) {
    const auto& row = rows[static_cast<std::size_t>(k)];
    if (row[0] != grid.node(k)) throw std::invalid_argument("csv: t column does not match the grid at row " + std::to_string(k));
    for (Index c = 0; c < dim; ++c) values(k, c) = row[static_cast<std::size_t>(c) + 1];
  }
  return GridFunction(grid, std::move(values));
}

void write_plot_data(std::ostream& os, const GridFunction& g, Index component) {
  for (Index k = 0; k < g.size(); ++k)
    os << format_double(g.grid().node(k)) << ' ' << format_double(g(k, component)) << '\n';
}

nlohmann::ordered_json grid_json(const TimeGrid& grid) {
  return {{"a", grid.a()}, {"b", grid.b()}, {"n_steps", grid.n_steps()}};
}

nlohmann::ordered_json residual_summary(const ELResidual& r) {
  return {{"kind", to_string(r.kind)}, {"max_abs", r.max_abs()}, {"l2", r.l2()}, {"grid", grid_json(r.values.grid())}};
}

nlohmann::ordered_json coherence_json(const CoherenceReport& r) {
  nlohmann::ordered_json j = {{"path_a_norm", r.path_a_norm},
                              {"path_b_norm", r.path_b_norm},
                              {"max_diff", r.max_diff},
                              {"verdict", r.pass ? "PASS" : "FAIL"}};
  j["tol"] = r.tol;
  j["path_b_space"] = to_string(r.path_b_space);
  j["path_b_kind"] = to_string(r.path_b_kind);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

nlohmann::ordered_json verdict_json(const ReversibilityVerdict& v) {
  nlohmann::ordered_json j = {{"verdict", to_string(v.verdict)}, {"evidence", v.evidence}, {"tol", v.tol}};
  j["forward_in_backward"] = v.forward_in_backward;
  j["backward_in_forward"] = v.backward_in_forward;
  j["residual_nodes"] = {v.first_node, v.last_node};
  return j;
}

nlohmann::ordered_json extremal_json(const ExtremalReport& r) {
  return {{"extremal", r.extremal},
          {"action", r.action},
          {"threshold", r.threshold},
          {"max_abs_gateaux", r.max_abs_gateaux},
          {"worst_node", r.worst_node},
          {"worst_component", r.worst_component},
          {"worst_branch", r.worst_branch == Branch::Plus ? "plus" : "minus"},
          {"basis_size", r.basis_size}};
}

}  // namespace asymlag
