#include "asymlag/scenario.hpp"

#include "asymlag/checks.hpp"
#include "asymlag/dynamics.hpp"
#include "asymlag/embedding.hpp"
#include "asymlag/io.hpp"
#include "asymlag/lagrangian.hpp"
#include "asymlag/variational.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace asymlag {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error("config error at '" + field + "': " + message), field_(std::move(field)) {}

namespace {

constexpr const char* kTaskNames[] = {"ibp_check", "embed_demo", "residual",      "extremal",
                                      "coherence", "solve",      "reversibility", "composition"};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Strict reader for one JSON object: every key must be consumed before finish().
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* get(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  const json& required(const std::string& key) {
    const json* v = get(key);
    if (!v) throw ConfigError(join(path_, key), "missing required field");
    return *v;
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = get(key);
    if (!v) {
      if (fallback) return *fallback;
      throw ConfigError(join(path_, key), "missing required field");
    }
    if (!v->is_number()) throw ConfigError(join(path_, key), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(join(path_, key), "expected a finite number");
    return x;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!get(key)) return std::nullopt;
    return number(key);
  }

  long long integer(const std::string& key, std::optional<long long> fallback = std::nullopt) {
    const json* v = get(key);
    if (!v) {
      if (fallback) return *fallback;
      throw ConfigError(join(path_, key), "missing required field");
    }
    if (!v->is_number_integer()) throw ConfigError(join(path_, key), "expected an integer");
    return v->get<long long>();
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const json* v = get(key);
    if (!v) {
      if (fallback) return *fallback;
      throw ConfigError(join(path_, key), "missing required field");
    }
    if (!v->is_string()) throw ConfigError(join(path_, key), "expected a string");
    return v->get<std::string>();
  }

  std::string choice(const std::string& key, std::initializer_list<const char*> options,
                     std::optional<std::string> fallback = std::nullopt) {
    const std::string s = string(key, std::move(fallback));
    for (const char* o : options)
      if (s == o) return s;
    std::string list;
    for (const char* o : options) list += (list.empty() ? "" : ", ") + std::string(o);
    throw ConfigError(join(path_, key), "'" + s + "' is not one of: " + list);
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

// ---- grid / operator / lagrangian sections ----

double parse_endpoint(Fields& f, const std::string& key, bool& infinite, const char* inf_text) {
  const json* v = f.get(key);
  if (v && v->is_string()) {
    if (v->get<std::string>() != inf_text)
      throw ConfigError(f.path(key), std::string("expected a number or \"") + inf_text + "\"");
    infinite = true;
    return 0.0;
  }
  return f.number(key);
}

GridSpec parse_grid(const json& j, const std::string& path) {
  Fields f(j, path);
  GridSpec g;
  g.a = parse_endpoint(f, "a", g.a_infinite, "-inf");
  g.b = parse_endpoint(f, "b", g.b_infinite, "inf");
  const long long n = f.integer("n_steps");
  require(n >= 2 && n <= 10'000'000, f.path("n_steps"), "must lie in [2, 1e7]");
  g.n_steps = static_cast<int>(n);
  g.truncation_radius = f.optional_number("truncation_radius");
  f.finish();
  if (g.a_infinite || g.b_infinite) {
    require(g.truncation_radius.has_value(), f.path("truncation_radius"), "required for an infinite endpoint");
    require(*g.truncation_radius > 0.0, f.path("truncation_radius"), "must be positive");
  }
  try {
    (void)g.grid();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return g;
}

ojson grid_spec_json(const GridSpec& g) {
  ojson j;
  j["a"] = g.a_infinite ? ojson("-inf") : ojson(g.a);
  j["b"] = g.b_infinite ? ojson("inf") : ojson(g.b);
  j["n_steps"] = g.n_steps;
  if (g.truncation_radius) j["truncation_radius"] = *g.truncation_radius;
  return j;
}

OperatorSpec parse_operator(const json& j) {
  Fields f(j, "operator");
  OperatorSpec op;
  op.kind = f.choice("kind", {"classical", "finite_difference", "fractional"});
  if (op.kind == "finite_difference") {
    op.eps = f.number("eps");
    require(*op.eps > 0.0, "operator.eps", "must be positive");
  } else if (op.kind == "fractional") {
    op.alpha = f.number("alpha");
    op.tau = f.number("tau", 1.0);
    require(*op.alpha > 0.0 && *op.alpha <= 1.0, "operator.alpha", "must lie in (0, 1]");
    require(*op.tau > 0.0, "operator.tau", "must be positive");
  }
  f.finish();
  return op;
}

ojson operator_spec_json(const OperatorSpec& op) {
  ojson j{{"kind", op.kind}};
  if (op.eps) j["eps"] = *op.eps;
  if (op.alpha) j["alpha"] = *op.alpha;
  if (op.tau) j["tau"] = *op.tau;
  return j;
}

LagrangianSpec parse_lagrangian(const json& j) {
  Fields f(j, "lagrangian");
  LagrangianSpec l;
  l.family = f.choice("family", {"free", "oscillator"});
  if (l.family == "oscillator") {
    l.omega = f.number("omega", 1.0);
    require(l.omega >= 0.0, "lagrangian.omega", "must be non-negative");
  } else {
    l.omega = 0.0;
  }
  f.finish();
  return l;
}

ojson lagrangian_spec_json(const LagrangianSpec& l) {
  ojson j{{"family", l.family}};
  if (l.family == "oscillator") j["omega"] = l.omega;
  return j;
}

// ---- function specs ----

ojson parse_function(const json& j, const std::string& path) {
  Fields f(j, path);
  const std::string shape = f.choice(
      "shape", {"zero", "const", "linear", "power", "sine", "cos", "exp", "bump", "random_smooth"});
  ojson out{{"shape", shape}};
  if (shape == "const") {
    out["value"] = f.number("value", 1.0);
  } else if (shape == "linear") {
    out["slope"] = f.number("slope", 1.0);
    out["intercept"] = f.number("intercept", 0.0);
  } else if (shape == "power") {
    out["coefficient"] = f.number("coefficient", 1.0);
    out["exponent"] = f.number("exponent", 2.0);
    out["origin"] = f.number("origin", 0.0);
    require(out["exponent"].get<double>() >= 0.0, f.path("exponent"), "must be non-negative");
  } else if (shape == "sine" || shape == "cos") {
    out["amplitude"] = f.number("amplitude", 1.0);
    out["frequency"] = f.number("frequency", 1.0);
    out["phase"] = f.number("phase", 0.0);
  } else if (shape == "exp") {
    out["amplitude"] = f.number("amplitude", 1.0);
    out["rate"] = f.number("rate", -1.0);
  } else if (shape == "bump") {
    out["center"] = f.number("center", 0.5);
    out["width"] = f.number("width", 0.25);
    out["amplitude"] = f.number("amplitude", 1.0);
    require(out["width"].get<double>() > 0.0, f.path("width"), "must be positive");
  } else if (shape == "random_smooth") {
    out["amplitude"] = f.number("amplitude", 1.0);
    const long long salt = f.integer("salt", 0);
    require(salt >= 0, f.path("salt"), "must be non-negative");
    out["salt"] = salt;
  }
  f.finish();
  return out;
}

GridFunction make_function(const ojson& spec, const TimeGrid& grid, std::uint64_t seed) {
  const std::string shape = spec["shape"].get<std::string>();
  auto num = [&](const char* key) { return spec[key].get<double>(); };
  if (shape == "zero") return GridFunction::zero(grid);
  if (shape == "const") {
    const double v = num("value");
    return sample([=](double) { return v; }, grid);
  }
  if (shape == "linear") {
    const double s = num("slope"), c = num("intercept");
    return sample([=](double t) { return s * t + c; }, grid);
  }
  if (shape == "power") {
    const double c = num("coefficient"), p = num("exponent"), o = num("origin");
    return sample([=](double t) { return t >= o ? c * std::pow(t - o, p) : 0.0; }, grid);
  }
  if (shape == "sine" || shape == "cos") {
    const double A = num("amplitude"), w = num("frequency"), phi = num("phase");
    const bool is_sin = shape == "sine";
    return sample([=](double t) { return A * (is_sin ? std::sin(w * t + phi) : std::cos(w * t + phi)); }, grid);
  }
  if (shape == "exp") {
    const double A = num("amplitude"), r = num("rate");
    return sample([=](double t) { return A * std::exp(r * t); }, grid);
  }
  if (shape == "bump") {
    const double c = num("center"), w = num("width"), A = num("amplitude");
    return sample(
        [=](double t) {
          const double u = (t - c) / w;
          return std::abs(u) < 1.0 ? A * std::exp(-1.0 / (1.0 - u * u)) : 0.0;
        },
        grid);
  }
  // random_smooth: c + sum_m a_m sin(m pi s + phi_m) over s in [0, 1].
  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (spec["salt"].get<std::uint64_t>() + 1)));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double A = num("amplitude");
  const double c = A * unit(rng);
  double a[4], phi[4];
  for (int m = 0; m < 4; ++m) {
    a[m] = A * unit(rng) / (m + 1);
    phi[m] = std::numbers::pi * (unit(rng) + 1.0);
  }
  const double t0 = grid.a(), len = grid.b() - grid.a();
  return sample(
      [&](double t) {
        double v = c;
        for (int m = 0; m < 4; ++m) v += a[m] * std::sin((m + 1) * std::numbers::pi * (t - t0) / len + phi[m]);
        return v;
      },
      grid);
}

ojson default_function(const char* shape) { return parse_function(json{{"shape", shape}}, ""); }

ojson function_param(Fields& f, const std::string& key, const ojson& fallback) {
  const json* v = f.get(key);
  return v ? parse_function(*v, f.path(key)) : fallback;
}

// ---- task parameters ----

void parse_source(Fields& f, ojson& p) {
  p["source"] = f.choice("source", {"function", "forward_solution", "backward_solution"}, "forward_solution");
  if (p["source"] == "function") {
    p["x"] = function_param(f, "x", default_function("random_smooth"));
  } else {
    p["x0"] = f.number("x0", 1.0);
    p["v0"] = f.number("v0", 0.0);
  }
}

ojson parse_params(Task task, const json* j, const GridSpec& grid, const OperatorSpec& op) {
  const json empty = json::object();
  Fields f(j ? *j : empty, "params");
  ojson p = ojson::object();
  switch (task) {
    case Task::IbpCheck: {
      p["f"] = function_param(f, "f", parse_function(json{{"shape", "bump"}, {"center", 0.4}, {"width", 0.2}}, ""));
      p["g"] = function_param(f, "g", parse_function(json{{"shape", "bump"}, {"center", 0.6}, {"width", 0.25}}, ""));
      for (const char* key : {"f_grid", "g_grid"}) {
        if (const json* v = f.get(key)) {
          const GridSpec other = parse_grid(*v, f.path(key));
          if (!(other.grid() == grid.grid()))
            throw ConfigError(f.path(key), "grid differs from the scenario grid; both functions must share one grid");
          p[key] = grid_spec_json(other);
        }
      }
      p["tol"] = f.number("tol", 1e-10);
      require(p["tol"].get<double>() > 0.0, f.path("tol"), "must be positive");
      break;
    }
    case Task::EmbedDemo: {
      p["branch"] = f.choice("branch", {"plus", "minus", "general"}, "plus");
      p["x"] = function_param(f, "x", default_function("sine"));
      if (p["branch"] == "general") p["x_minus"] = function_param(f, "x_minus", default_function("cos"));
      break;
    }
    case Task::Residual: {
      parse_source(f, p);
      p["branch"] = f.choice("branch", {"plus", "minus"}, p["source"] == "backward_solution" ? "minus" : "plus");
      p["kind"] = f.choice(
          "kind", {"causal_plus", "causal_minus", "anticausal_plus", "anticausal_minus", "embedded_general"},
          p["branch"] == "minus" ? "causal_minus" : "causal_plus");
      p["first_node"] = f.integer("first_node", 0);
      p["last_node"] = f.integer("last_node", grid.n_steps);
      const long long first = p["first_node"], last = p["last_node"];
      require(first >= 0 && first <= last && last <= grid.n_steps, f.path("last_node"),
              "need 0 <= first_node <= last_node <= n_steps");
      break;
    }
    case Task::Extremal: {
      parse_source(f, p);
      p["branch"] = f.choice("branch", {"plus", "minus"}, p["source"] == "backward_solution" ? "minus" : "plus");
      p["space"] = f.choice("space", {"H", "HPlus", "HMinus"}, p["branch"] == "plus" ? "HMinus" : "HPlus");
      p["tol"] = f.number("tol", default_extremal_tolerance(grid.grid()));
      p["expect"] = f.get("expect") ? ojson(f.choice("expect", {"extremal", "not_extremal"})) : ojson();
      break;
    }
    case Task::Coherence: {
      p["branch"] = f.choice("branch", {"plus", "minus"}, "plus");
      p["x"] = function_param(f, "x", default_function("random_smooth"));
      p["tol"] = f.number("tol", 1e-12);
      p["space"] = f.get("space") ? ojson(f.choice("space", {"H", "HPlus", "HMinus"})) : ojson();
      break;
    }
    case Task::Solve: {
      p["direction"] = f.choice("direction", {"forward", "backward"}, "forward");
      p["x0"] = f.number("x0", 1.0);
      p["v0"] = f.number("v0", 0.0);
      p["tol"] = f.number("tol", 5e-2);
      break;
    }
    case Task::Reversibility: {
      p["tol"] = f.get("tol") ? ojson(f.number("tol")) : ojson();
      p["expect"] = f.get("expect") ? ojson(f.choice("expect", {"Reversible", "Irreversible"})) : ojson();
      break;
    }
    case Task::Composition: {
      p["alpha"] = f.number("alpha", op.alpha && *op.alpha < 1.0 ? *op.alpha : 0.5);
      const double alpha = p["alpha"];
      require(alpha > 0.0 && alpha < 1.0, f.path("alpha"), "must lie in (0, 1)");
      p["f"] = function_param(f, "f", parse_function(json{{"shape", "power"}, {"exponent", 2.0}}, ""));
      p["refinements"] = f.integer("refinements", 3);
      const long long r = p["refinements"];
      require(r >= 2 && r <= 8, f.path("refinements"), "must lie in [2, 8]");
      break;
    }
  }
  f.finish();
  return p;
}

// ---- helpers for running ----

ResidualKind residual_kind(const std::string& s) {
  if (s == "causal_plus") return ResidualKind::CausalPlus;
  if (s == "causal_minus") return ResidualKind::CausalMinus;
  if (s == "anticausal_plus") return ResidualKind::AntiCausalPlus;
  if (s == "anticausal_minus") return ResidualKind::AntiCausalMinus;
  return ResidualKind::EmbeddedGeneral;
}

SpaceKind space_kind(const std::string& s) {
  if (s == "H") return SpaceKind::H;
  if (s == "HPlus") return SpaceKind::HPlus;
  return SpaceKind::HMinus;
}

OperatorPair make_ops(const Scenario& s, const TimeGrid& grid) {
  try {
    return OperatorPair(s.op.resolve(), grid);
  } catch (const std::invalid_argument& e) {
    const char* field = s.op.kind == "finite_difference" ? "operator.eps"
                        : s.op.kind == "fractional"      ? "operator.alpha"
                                                         : "operator";
    throw ConfigError(field, e.what());
  }
}

GridFunction source_trajectory(const Scenario& s, const ojson& p, const Lagrangian& L, const OperatorPair& ops) {
  const std::string source = p["source"];
  if (source == "function") return make_function(p["x"], ops.grid(), s.seed);
  const Direction d = source == "forward_solution" ? Direction::Forward : Direction::Backward;
  return solve(ForwardProblem{L, ops, p["x0"].get<double>(), p["v0"].get<double>(), d});
}

AsymmetricState lift(const std::string& branch, const GridFunction& x) {
  return branch == "minus" ? lift_minus(x) : lift_plus(x);
}

GridFunction stack(const std::vector<GridFunction>& columns) {
  Eigen::MatrixXd m(columns.front().size(), static_cast<Index>(columns.size()));
  for (std::size_t i = 0; i < columns.size(); ++i) m.col(static_cast<Index>(i)) = columns[i].values().col(0);
  return GridFunction(columns.front().grid(), std::move(m));
}

// Closed-form solution of the initial/terminal value problem, when one exists.
std::optional<GridFunction> closed_form(const Scenario& s, const OperatorPair& ops, const ojson& p) {
  const double omega = s.lagrangian.omega;
  const double x0 = p["x0"], v0 = p["v0"];
  const bool forward = p["direction"] == "forward";
  const double anchor = forward ? ops.grid().a() : ops.grid().b();
  if (ops.is_classical()) {
    return sample(
        [=](double t) {
          const double u = t - anchor;
          if (omega == 0.0) return x0 + v0 * u;
          return x0 * std::cos(omega * u) + v0 / omega * std::sin(omega * u);
        },
        ops.grid());
  }
  if (const auto* rl = std::get_if<FractionalRL>(&ops.kind()); rl && rl->alpha == 0.5) {
    const double rate = rl->tau * omega * omega;
    return sample([=](double t) { return x0 * std::exp(-rate * std::abs(t - anchor)); }, ops.grid());
  }
  return std::nullopt;
}

struct Artifacts {
  std::optional<GridFunction> csv;
  std::string csv_prefix = "x";
  std::optional<GridFunction> plot;
};

ojson run_task(const Scenario& s, Artifacts& art, int& exit_code) {
  const TimeGrid grid = s.grid.grid();
  const ojson& p = s.params;
  ojson metrics = ojson::object();
  std::string verdict = "success";
  auto pass_fail = [&](bool ok) {
    verdict = ok ? "PASS" : "FAIL";
    if (!ok) exit_code = 2;
  };
  switch (s.task) {
    case Task::IbpCheck: {
      const OperatorPair ops = make_ops(s, grid);
      const GridFunction f = make_function(p["f"], grid, s.seed);
      const GridFunction g = make_function(p["g"], grid, s.seed);
      const double residual = ibp_residual(ops, f, g);
      const double scale = ibp_scale(ops, f, g);
      const double relative = residual / std::max(1.0, scale);
      metrics["residual"] = residual;
      metrics["scale"] = scale;
      metrics["relative_residual"] = relative;
      metrics["boundary_term"] = boundary_functional(ops, f, g);
      pass_fail(relative <= p["tol"].get<double>());
      art.csv = stack({f, g, apply_plus(ops, f), apply_minus(ops, g)});
      art.plot = apply_plus(ops, f);
      break;
    }
    case Task::EmbedDemo: {
      const OperatorPair ops = make_ops(s, grid);
      const Lagrangian L = s.lagrangian.resolve();
      const GridFunction x = make_function(p["x"], grid, s.seed);
      const std::string branch = p["branch"];
      const AsymmetricState X = branch == "general"
                                    ? AsymmetricState::general(x, make_function(p["x_minus"], grid, s.seed))
                                    : lift(branch, x);
      const EmbeddedLagrangian Lhat(L, ops);
      const ELResidual r = embedded_el_residual(Lhat, X);
      metrics["sigma"] = to_string(sigma(X));
      metrics["residual"] = residual_summary(r);
      if (branch != "general") {
        const ResidualKind k = branch == "plus" ? ResidualKind::CausalPlus : ResidualKind::CausalMinus;
        const ELResidual direct = el_residual(Lhat, X, k);
        metrics["max_diff_vs_" + std::string(to_string(k))] =
            (r.values.values() - direct.values.values()).cwiseAbs().maxCoeff();
      }
      art.csv = r.values;
      art.csv_prefix = "r";
      art.plot = r.values;
      break;
    }
    case Task::Residual: {
      const OperatorPair ops = make_ops(s, grid);
      const Lagrangian L = s.lagrangian.resolve();
      const GridFunction x = source_trajectory(s, p, L, ops);
      const EmbeddedLagrangian Lhat(L, ops);
      const AsymmetricState X = lift(p["branch"], x);
      const ResidualKind kind = residual_kind(p["kind"]);
      const ELResidual r = kind == ResidualKind::EmbeddedGeneral ? embedded_el_residual(Lhat, X)
                                                                  : el_residual(Lhat, X, kind);
      metrics["residual"] = residual_summary(r);
      metrics["max_abs_window"] = r.max_abs(p["first_node"].get<Index>(), p["last_node"].get<Index>());
      art.csv = r.values;
      art.csv_prefix = "r";
      art.plot = r.values;
      break;
    }
    case Task::Extremal: {
      const OperatorPair ops = make_ops(s, grid);
      const Lagrangian L = s.lagrangian.resolve();
      const GridFunction x = source_trajectory(s, p, L, ops);
      const EmbeddedLagrangian Lhat(L, ops);
      const ExtremalReport rep =
          is_extremal(Lhat, lift(p["branch"], x), VariationSpace{space_kind(p["space"])}, p["tol"].get<double>());
      metrics = extremal_json(rep);
      verdict = rep.extremal ? "extremal" : "not_extremal";
      if (!p["expect"].is_null() && p["expect"].get<std::string>() != verdict) exit_code = 2;
      art.csv = x;
      art.plot = x;
      break;
    }
    case Task::Coherence: {
      const OperatorPair ops = make_ops(s, grid);
      const Lagrangian L = s.lagrangian.resolve();
      const GridFunction x = make_function(p["x"], grid, s.seed);
      const AsymmetricState X = lift(p["branch"], x);
      std::optional<SpaceKind> space;
      if (!p["space"].is_null()) space = space_kind(p["space"]);
      const CoherenceReport rep = coherence_check(L, ops, X, p["tol"].get<double>(), space);
      metrics = coherence_json(rep);
      metrics.erase("verdict");
      pass_fail(rep.pass);
      const ELResidual a = embedded_el_residual(EmbeddedLagrangian(L, ops), X);
      art.csv = a.values;
      art.csv_prefix = "r";
      art.plot = a.values;
      break;
    }
    case Task::Solve: {
      const OperatorPair ops = make_ops(s, grid);
      const Lagrangian L = s.lagrangian.resolve();
      const Direction d = p["direction"] == "forward" ? Direction::Forward : Direction::Backward;
      const GridFunction x = solve(ForwardProblem{L, ops, p["x0"].get<double>(), p["v0"].get<double>(), d});
      metrics["max_abs"] = x.values().cwiseAbs().maxCoeff();
      if (const auto exact = closed_form(s, ops, p)) {
        const double denom = exact->values().cwiseAbs().maxCoeff();
        const double err = (x.values() - exact->values()).cwiseAbs().maxCoeff() / (denom > 0.0 ? denom : 1.0);
        metrics["oracle"] = ops.is_classical() ? "classical closed form" : "exponential closed form";
        metrics["max_rel_error"] = err;
        pass_fail(err <= p["tol"].get<double>());
      } else {
        metrics["oracle"] = nullptr;
        metrics["max_rel_error"] = nullptr;
      }
      art.csv = x;
      art.plot = x;
      break;
    }
    case Task::Reversibility: {
      const OperatorPair ops = make_ops(s, grid);
      const Lagrangian L = s.lagrangian.resolve();
      std::optional<double> tol;
      if (!p["tol"].is_null()) tol = p["tol"].get<double>();
      const ReversibilityVerdict v = classify_reversibility(L, ops, tol);
      metrics = verdict_json(v);
      metrics.erase("verdict");
      verdict = to_string(v.verdict);
      if (!p["expect"].is_null() && p["expect"].get<std::string>() != verdict) exit_code = 2;
      const double velocity = s.lagrangian.omega == 0.0 ? 1.0 : 0.0;
      const GridFunction fwd = solve({L, ops, 1.0, velocity, Direction::Forward});
      const GridFunction bwd = solve({L, ops, 1.0, velocity, Direction::Backward});
      art.csv = stack({fwd, bwd});
      art.plot = fwd;
      break;
    }
    case Task::Composition: {
      const double alpha = p["alpha"];
      const long long levels = p["refinements"];
      std::vector<double> errors;
      ojson per_level = ojson::array();
      for (long long i = 0; i < levels; ++i) {
        const TimeGrid gi(grid.a(), grid.b(), grid.n_steps() << i);
        const GridFunction f = make_function(p["f"], gi, s.seed);
        const double scale = std::max(1.0, f.values().cwiseAbs().maxCoeff() * std::pow(gi.step(), -2.0 * alpha));
        const double e = composition_identity_check(alpha, gi, f);
        errors.push_back(e / scale);
        per_level.push_back({{"n_steps", gi.n_steps()}, {"max_abs_diff", e}, {"relative", e / scale}});
      }
      const ConvergenceSummary c = summarize_convergence(errors, 0.9, 1e-12);
      metrics["levels"] = per_level;
      metrics["orders"] = c.orders;
      metrics["at_roundoff_floor"] = c.at_floor;
      pass_fail(c.passed);
      const GridFunction f = make_function(p["f"], grid, s.seed);
      const Eigen::VectorXd w = gl_weights(alpha, grid.size());
      const double h = grid.step();
      const GridFunction composed = convolve_past(w, std::pow(h, -alpha), convolve_past(w, std::pow(h, -alpha), f));
      const GridFunction direct = convolve_past(gl_weights(2.0 * alpha, grid.size()), std::pow(h, -2.0 * alpha), f);
      art.csv = stack({composed, direct});
      art.plot = composed - direct;
      break;
    }
  }
  if (s.task != Task::Composition) metrics["operator"] = make_ops(s, grid).describe();
  ojson out;
  out["metrics"] = metrics;
  out["verdict"] = verdict;
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << content;
  if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

const char* to_string(Task task) { return kTaskNames[static_cast<int>(task)]; }

TimeGrid GridSpec::grid() const {
  const double lo = a_infinite ? -truncation_radius.value_or(0.0) : a;
  const double hi = b_infinite ? truncation_radius.value_or(0.0) : b;
  return TimeGrid(lo, hi, n_steps);
}

OperatorKind OperatorSpec::resolve() const {
  if (kind == "finite_difference") return FiniteDiff{eps.value()};
  if (kind == "fractional") {
    if (alpha.value() == 1.0) return Classical{};
    return FractionalRL{alpha.value(), tau.value_or(1.0)};
  }
  return Classical{};
}

Lagrangian LagrangianSpec::resolve() const {
  return family == "free" ? free_particle() : harmonic_oscillator(omega);
}

Scenario parse_scenario(const json& config) {
  Fields f(config, "");
  Scenario s;
  const std::string task = f.choice("task", {"ibp_check", "embed_demo", "residual", "extremal", "coherence", "solve",
                                             "reversibility", "composition"});
  for (int i = 0; i < 8; ++i)
    if (task == kTaskNames[i]) s.task = static_cast<Task>(i);
  const long long seed = f.integer("seed");
  require(seed >= 0, "seed", "must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);
  s.grid = parse_grid(f.required("grid"), "grid");
  s.op = f.get("operator") ? parse_operator(*f.get("operator")) : OperatorSpec{};
  s.lagrangian = f.get("lagrangian") ? parse_lagrangian(*f.get("lagrangian")) : LagrangianSpec{};
  s.params = parse_params(s.task, f.get("params"), s.grid, s.op);
  if (const json* out = f.get("output")) {
    Fields o(*out, "output");
    s.output.dir = o.string("dir", ".");
    s.output.prefix = o.string("prefix", "");
    o.finish();
  }
  if (s.output.prefix.empty()) s.output.prefix = task;
  require(s.output.prefix.find('/') == std::string::npos, "output.prefix", "must not contain '/'");
  f.finish();
  return s;
}

Scenario parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

ojson resolved_config(const Scenario& s) {
  ojson j;
  j["task"] = to_string(s.task);
  j["seed"] = s.seed;
  j["grid"] = grid_spec_json(s.grid);
  j["operator"] = operator_spec_json(s.op);
  j["lagrangian"] = lagrangian_spec_json(s.lagrangian);
  j["params"] = s.params;
  j["output"] = {{"dir", s.output.dir}, {"prefix", s.output.prefix}};
  return j;
}

RunResult run_scenario(const Scenario& s) {
  RunResult result;
  Artifacts art;
  const ojson outcome = run_task(s, art, result.exit_code);
  result.summary["task"] = to_string(s.task);
  result.summary["params"] = resolved_config(s);
  result.summary["metrics"] = outcome["metrics"];
  result.summary["verdict"] = outcome["verdict"];

  const std::filesystem::path dir(s.output.dir);
  std::filesystem::create_directories(dir);
  if (art.csv) {
    std::ostringstream os;
    write_csv(os, *art.csv, art.csv_prefix);
    result.files.push_back(dir / (s.output.prefix + ".csv"));
    write_file(result.files.back(), os.str());
  }
  if (art.plot) {
    std::ostringstream os;
    write_plot_data(os, *art.plot);
    result.files.push_back(dir / (s.output.prefix + ".dat"));
    write_file(result.files.back(), os.str());
  }
  result.files.push_back(dir / (s.output.prefix + "_summary.json"));
  write_file(result.files.back(), result.summary.dump(2) + "\n");
  return result;
}

int run_config_file(const std::filesystem::path& path, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
      err << "error: cannot read config '" << path.string() << "'\n";
      return 1;
    }
    std::ostringstream text;
    text << is.rdbuf();
    const Scenario s = parse_scenario_text(text.str());
    const RunResult r = run_scenario(s);
    out << to_string(s.task) << ": " << r.summary["verdict"].get<std::string>() << '\n';
    for (const auto& f : r.files) out << "wrote " << f.string() << '\n';
    return r.exit_code;
  } catch (const NonFiniteError& e) {
    err << "numeric error at node " << e.node() << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

std::string config_schema() {
  return R"(asymlag scenario config (JSON; unknown fields are rejected)

{
  "task": "ibp_check" | "embed_demo" | "residual" | "extremal" | "coherence"
          | "solve" | "reversibility" | "composition",            required
  "seed": integer >= 0,                                            required
  "grid": {"a": number | "-inf", "b": number | "inf",
           "n_steps": integer >= 2,
           "truncation_radius": number > 0},       radius required for infinite ends
  "operator": {"kind": "classical"}
            | {"kind": "finite_difference", "eps": multiple of the grid step}
            | {"kind": "fractional", "alpha": (0, 1], "tau": > 0 (default 1)},
                                          default classical; alpha = 1 is classical
  "lagrangian": {"family": "free"} | {"family": "oscillator", "omega": >= 0 (default 1)},
                                          default oscillator, omega = 1
  "params": task parameters (below); defaults are filled in the summary,
  "output": {"dir": string (default "."), "prefix": string (default task name)}
}

Function specs ("shape" plus optional fields, defaults shown):
  zero | const {value 1} | linear {slope 1, intercept 0}
  power {coefficient 1, exponent 2, origin 0}    c (t - origin)^p for t >= origin, else 0
  sine | cos {amplitude 1, frequency 1, phase 0}
  exp {amplitude 1, rate -1}
  bump {center 0.5, width 0.25, amplitude 1}     smooth, compactly supported
  random_smooth {amplitude 1, salt 0}            four-mode sine series drawn from seed and salt

Task parameters:
  ibp_check     f, g (function specs), f_grid, g_grid (must equal grid), tol 1e-10
  embed_demo    branch plus|minus|general, x, x_minus (general only)
  residual      source forward_solution|backward_solution|function, x (function), x0 1, v0 0,
                branch plus|minus, kind causal_plus|causal_minus|anticausal_plus|
                anticausal_minus|embedded_general, first_node 0, last_node n_steps
  extremal      source, x, x0, v0, branch as above; space H|HPlus|HMinus;
                tol 1e-6 n_steps; expect extremal|not_extremal (optional)
  coherence     branch plus|minus, x, tol 1e-12, space H|HPlus|HMinus (optional)
  solve         direction forward|backward, x0 1, v0 0, tol 5e-2
  reversibility tol (optional), expect Reversible|Irreversible (optional)
  composition   alpha (default operator alpha or 0.5), f, refinements 3

Outputs in output.dir: <prefix>.csv, <prefix>.dat (two-column plot data) and
<prefix>_summary.json {task, params (resolved config), metrics, verdict}.
Exit codes: 0 success or PASS, 2 check FAIL or unmet expectation, 1 error.
)";
}

}  // namespace asymlag
