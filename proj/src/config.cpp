#include "pfto/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pfto {

ConfigError::ConfigError(const std::string& what, std::string section, std::string key, int line)
    : InvalidInput([&] {
        std::string loc;
        if (line > 0) loc += "line " + std::to_string(line) + ": ";
        if (!section.empty()) loc += "[" + section + "]";
        if (!key.empty()) loc += " " + key;
        return loc.empty() ? what : loc + ": " + what;
      }()),
      section_(std::move(section)),
      key_(std::move(key)),
      line_(line) {}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool parse_double(const std::string& text, double& out) {
  std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using Sections = std::map<std::string, std::map<std::string, Entry>>;

// Known keys per section; anything else is rejected.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"domain", {"xmin", "xmax", "ymin", "ymax", "h", "dirichlet", "neumann"}},
      {"materials", {"lambda1", "mu1", "lambda2", "mu2", "delta_lambda", "delta_mu", "eigenstrain", "eigen_delta", "interpolation"}},
      {"loads", {"traction", "body_force"}},
      {"objective", {"kind", "gamma", "eps", "beta", "tracking_weight", "tracking_target"}},
      {"optimizer",
       {"armijo_beta", "armijo_sigma", "tol", "k_max", "zeta0", "zeta_growth", "metric", "bfgs_memory", "bfgs_theta",
        "rho", "max_halvings", "pdas_c", "max_pdas", "max_primal", "linear_solver", "pcg_tol", "remesh",
        "remesh_every", "points_across", "output_every", "seed"}},
      {"sweep", {"eps"}},
  };
  return s;
}

class Reader {
 public:
  explicit Reader(Sections& s) : s_(s) {}

  bool has(const std::string& sec, const std::string& key) const {
    auto it = s_.find(sec);
    return it != s_.end() && it->second.count(key) > 0;
  }

  Entry* find(const std::string& sec, const std::string& key) {
    auto it = s_.find(sec);
    if (it == s_.end()) return nullptr;
    auto jt = it->second.find(key);
    if (jt == it->second.end()) return nullptr;
    jt->second.used = true;
    return &jt->second;
  }

  double number(const std::string& sec, const std::string& key, double fallback) {
    Entry* e = find(sec, key);
    if (!e) return fallback;
    double v = 0.0;
    if (!parse_double(e->value, v)) throw ConfigError("expected a number, got '" + e->value + "'", sec, key, e->line);
    return v;
  }

  long integer(const std::string& sec, const std::string& key, long fallback) {
    Entry* e = find(sec, key);
    if (!e) return fallback;
    std::string t = trim(e->value);
    long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
      throw ConfigError("expected an integer, got '" + e->value + "'", sec, key, e->line);
    return v;
  }

  bool boolean(const std::string& sec, const std::string& key, bool fallback) {
    Entry* e = find(sec, key);
    if (!e) return fallback;
    std::string t = lower(trim(e->value));
    if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
    if (t == "false" || t == "no" || t == "off" || t == "0") return false;
    throw ConfigError("expected a boolean, got '" + e->value + "'", sec, key, e->line);
  }

  std::string word(const std::string& sec, const std::string& key, const std::string& fallback,
                   const std::set<std::string>& allowed) {
    Entry* e = find(sec, key);
    if (!e) return fallback;
    std::string t = lower(trim(e->value));
    if (!allowed.count(t)) {
      std::string opts;
      for (const auto& a : allowed) opts += (opts.empty() ? "" : "|") + a;
      throw ConfigError("expected one of " + opts + ", got '" + e->value + "'", sec, key, e->line);
    }
    return t;
  }

  std::vector<double> list(const std::string& sec, const std::string& key) {
    Entry* e = find(sec, key);
    if (!e) return {};
    std::vector<double> out;
    for (const auto& part : split(e->value, ',')) {
      double v = 0.0;
      if (!parse_double(part, v)) throw ConfigError("bad list entry '" + part + "'", sec, key, e->line);
      out.push_back(v);
    }
    return out;
  }

  Vec2 vec2(const std::string& sec, const std::string& key, Vec2 fallback) {
    Entry* e = find(sec, key);
    if (!e) return fallback;
    auto v = list(sec, key);
    if (v.size() != 2) throw ConfigError("expected two comma-separated numbers", sec, key, e->line);
    return {v[0], v[1]};
  }

  BoxPredicate predicate(const std::string& sec, const std::string& key, const std::string& fallback) {
    Entry* e = find(sec, key);
    try {
      return BoxPredicate::parse(e ? e->value : fallback);
    } catch (const InvalidInput& err) {
      throw ConfigError(err.what(), sec, key, e ? e->line : 0);
    }
  }

  int line(const std::string& sec, const std::string& key) {
    Entry* e = find(sec, key);
    return e ? e->line : 0;
  }

 private:
  Sections& s_;
};

}  // namespace

BoxPredicate BoxPredicate::parse(const std::string& text) {
  BoxPredicate p;
  p.text_ = trim(text);
  std::string t = lower(p.text_);
  if (t == "none" || t.empty()) {
    p.never_ = true;
    p.text_ = "none";
    return p;
  }
  if (t == "all") {
    p.text_ = "all";
    return p;
  }
  std::string norm;
  for (auto& raw : split(t, '&')) {
    std::string c = raw;
    if (c.empty()) throw InvalidInput("empty condition in '" + text + "'");
    Condition cond;
    cond.axis = c[0];
    if (cond.axis != 'x' && cond.axis != 'y') throw InvalidInput("condition must start with x or y: '" + raw + "'");
    std::string rest = trim(c.substr(1));
    for (const char* op : {"<=", ">=", "==", "<", ">", "="}) {
      if (rest.rfind(op, 0) == 0) {
        cond.op = op;
        break;
      }
    }
    if (cond.op.empty()) throw InvalidInput("missing comparison in '" + raw + "'");
    std::string num = rest.substr(cond.op.size());
    if (cond.op == "=") cond.op = "==";
    if (!parse_double(num, cond.bound)) throw InvalidInput("bad bound in '" + raw + "'");
    p.conditions_.push_back(cond);
    norm += (norm.empty() ? "" : " & ") + std::string(1, cond.axis) + " " + cond.op + " " + fmt(cond.bound);
  }
  p.text_ = norm;
  return p;
}

bool BoxPredicate::operator()(Vec2 p) const {
  if (never_) return false;
  constexpr double tol = 1e-9;
  for (const auto& c : conditions_) {
    double v = c.axis == 'x' ? p.x : p.y;
    bool ok = c.op == "<=" ? v <= c.bound + tol
              : c.op == ">=" ? v >= c.bound - tol
              : c.op == "<"  ? v < c.bound - tol
              : c.op == ">"  ? v > c.bound + tol
                             : std::abs(v - c.bound) <= tol;
    if (!ok) return false;
  }
  return true;
}

RunConfig parse_config(const std::string& text) {
  Sections sections;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", {}, {}, lineno);
      current = lower(trim(line.substr(1, line.size() - 2)));
      if (!schema().count(current)) throw ConfigError("unknown section", current, {}, lineno);
      sections[current];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", current, {}, lineno);
    std::string key = lower(trim(line.substr(0, eq)));
    std::string value = trim(line.substr(eq + 1));
    if (current.empty()) throw ConfigError("key outside of any section", {}, key, lineno);
    if (!schema().at(current).count(key)) throw ConfigError("unknown key", current, key, lineno);
    if (sections[current].count(key)) throw ConfigError("duplicate key", current, key, lineno);
    if (value.empty()) throw ConfigError("missing value", current, key, lineno);
    sections[current][key] = Entry{value, lineno, false};
  }

  Reader r(sections);
  std::vector<std::string> missing;
  auto require = [&](const std::string& sec, const std::string& key) {
    if (!r.has(sec, key)) missing.push_back("[" + sec + "] " + key);
  };
  for (const char* k : {"xmin", "xmax", "ymin", "ymax", "h", "dirichlet"}) require("domain", k);
  require("materials", "lambda2");
  require("materials", "mu2");
  if (!r.has("materials", "delta_lambda")) require("materials", "lambda1");
  if (!r.has("materials", "delta_mu")) require("materials", "mu1");
  require("objective", "gamma");
  if (!r.has("sweep", "eps")) require("objective", "eps");
  if (!missing.empty()) {
    std::string msg = "missing required keys:";
    for (const auto& m : missing) msg += " " + m + ";";
    msg.pop_back();
    throw ConfigError(msg);
  }

  RunConfig c;
  c.xmin = r.number("domain", "xmin", 0);
  c.xmax = r.number("domain", "xmax", 0);
  c.ymin = r.number("domain", "ymin", 0);
  c.ymax = r.number("domain", "ymax", 0);
  c.h = r.number("domain", "h", 0);
  if (!(c.xmax > c.xmin)) throw ConfigError("xmax must exceed xmin", "domain", "xmax", r.line("domain", "xmax"));
  if (!(c.ymax > c.ymin)) throw ConfigError("ymax must exceed ymin", "domain", "ymax", r.line("domain", "ymax"));
  if (!(c.h > 0.0 && c.h <= std::min(c.xmax - c.xmin, c.ymax - c.ymin)))
    throw ConfigError("h must lie in (0, min extent]", "domain", "h", r.line("domain", "h"));
  c.dirichlet = r.predicate("domain", "dirichlet", "none");
  c.neumann = r.predicate("domain", "neumann", "none");
  if (c.dirichlet.empty())
    throw ConfigError("Dirichlet support must be nonempty", "domain", "dirichlet", r.line("domain", "dirichlet"));

  c.lambda2 = r.number("materials", "lambda2", 0);
  c.mu2 = r.number("materials", "mu2", 0);
  if (r.has("materials", "lambda1") && r.has("materials", "delta_lambda"))
    throw ConfigError("give lambda1 or delta_lambda, not both", "materials", "delta_lambda",
                      r.line("materials", "delta_lambda"));
  if (r.has("materials", "mu1") && r.has("materials", "delta_mu"))
    throw ConfigError("give mu1 or delta_mu, not both", "materials", "delta_mu", r.line("materials", "delta_mu"));
  c.lambda1 = r.has("materials", "lambda1") ? r.number("materials", "lambda1", 0)
                                            : r.number("materials", "delta_lambda", 0) * c.lambda2;
  c.mu1 = r.has("materials", "mu1") ? r.number("materials", "mu1", 0) : r.number("materials", "delta_mu", 0) * c.mu2;
  for (const char* k : {"lambda1", "mu1", "lambda2", "mu2"}) {
    double v = std::string(k) == "lambda1" ? c.lambda1 : std::string(k) == "mu1" ? c.mu1
             : std::string(k) == "lambda2" ? c.lambda2 : c.mu2;
    if (!(v > 0.0)) throw ConfigError("Lame constants must be positive", "materials", k, r.line("materials", k));
  }
  std::string es = r.word("materials", "eigenstrain", "zero", {"zero", "isotropic", "diagonal"});
  c.eigenstrain = es == "zero" ? EigenstrainKind::Zero : es == "isotropic" ? EigenstrainKind::Isotropic
                                                                            : EigenstrainKind::Diagonal;
  c.eigen_delta = r.number("materials", "eigen_delta", 0.0);
  c.interpolation = r.word("materials", "interpolation", "printed", {"printed", "mirrored"}) == "printed"
                        ? Interpolation::Printed
                        : Interpolation::Mirrored;
  if (c.eigenstrain == EigenstrainKind::Zero && c.eigen_delta != 0.0)
    throw ConfigError("eigen_delta needs a nonzero eigenstrain kind", "materials", "eigen_delta",
                      r.line("materials", "eigen_delta"));

  c.traction = r.vec2("loads", "traction", {});
  c.body_force = r.vec2("loads", "body_force", {});

  c.tracking = r.word("objective", "kind", "compliance", {"compliance", "tracking"}) == "tracking";
  c.tracking_weight = r.number("objective", "tracking_weight", 1.0);
  c.tracking_target = r.vec2("objective", "tracking_target", {});
  if (!c.tracking && (r.has("objective", "tracking_weight") || r.has("objective", "tracking_target")))
    throw ConfigError("tracking keys need kind = tracking", "objective", "kind", r.line("objective", "kind"));
  if (!(c.tracking_weight >= 0.0))
    throw ConfigError("tracking_weight must be non-negative", "objective", "tracking_weight",
                      r.line("objective", "tracking_weight"));
  c.gamma = r.number("objective", "gamma", 0.5);
  if (!(c.gamma > 0.0)) throw ConfigError("gamma must be positive", "objective", "gamma", r.line("objective", "gamma"));
  if (r.has("objective", "eps")) {
    c.eps = r.number("objective", "eps", 0);
    if (!(*c.eps > 0.0)) throw ConfigError("eps must be positive", "objective", "eps", r.line("objective", "eps"));
  }
  c.beta = r.number("objective", "beta", 0.0);
  if (!(c.beta > -1.0 && c.beta < 1.0))
    throw ConfigError("beta must lie in (-1, 1)", "objective", "beta", r.line("objective", "beta"));

  auto& v = c.vmpg;
  const std::string o = "optimizer";
  v.armijo_beta = r.number(o, "armijo_beta", v.armijo_beta);
  v.armijo_sigma = r.number(o, "armijo_sigma", v.armijo_sigma);
  v.tol = r.number(o, "tol", v.tol);
  v.k_max = r.integer(o, "k_max", v.k_max);
  v.zeta0 = r.number(o, "zeta0", v.zeta0);
  v.zeta_growth = r.number(o, "zeta_growth", v.zeta_growth);
  std::string metric = r.word(o, "metric", "bfgs", {"base", "bfgs", "second_order"});
  v.metric = metric == "base" ? MetricMode::Base : metric == "bfgs" ? MetricMode::Bfgs : MetricMode::SecondOrder;
  v.bfgs_memory = static_cast<int>(r.integer(o, "bfgs_memory", v.bfgs_memory));
  v.bfgs_theta = r.number(o, "bfgs_theta", v.bfgs_theta);
  v.rho = r.number(o, "rho", v.rho);
  v.max_halvings = static_cast<int>(r.integer(o, "max_halvings", v.max_halvings));
  v.projection.pdas_c = r.number(o, "pdas_c", v.projection.pdas_c);
  v.projection.max_pdas = static_cast<int>(r.integer(o, "max_pdas", v.projection.max_pdas));
  v.projection.max_primal = static_cast<int>(r.integer(o, "max_primal", v.projection.max_primal));
  c.solver.kind = r.word(o, "linear_solver", "cholesky", {"cholesky", "pcg"}) == "pcg" ? LinearSolverKind::Pcg
                                                                                        : LinearSolverKind::Cholesky;
  c.solver.rel_tol = r.number(o, "pcg_tol", c.solver.rel_tol);
  c.remesh = r.boolean(o, "remesh", false);
  c.remesh_every = static_cast<int>(r.integer(o, "remesh_every", c.remesh_every));
  c.points_across = r.number(o, "points_across", c.points_across);
  c.output_every = static_cast<int>(r.integer(o, "output_every", c.output_every));
  c.seed = r.integer(o, "seed", c.seed);
  try {
    VmpgConfig probe = v;
    probe.remesh.reset();
    probe.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what(), o);
  }
  if (!(c.solver.rel_tol > 0.0)) throw ConfigError("pcg_tol must be positive", o, "pcg_tol", r.line(o, "pcg_tol"));
  if (c.remesh_every < 0) throw ConfigError("remesh_every must be non-negative", o, "remesh_every", r.line(o, "remesh_every"));
  if (!(c.points_across >= 2.0))
    throw ConfigError("points_across must be at least 2", o, "points_across", r.line(o, "points_across"));
  if (c.output_every < 0) throw ConfigError("output_every must be non-negative", o, "output_every", r.line(o, "output_every"));

  c.eps_list = r.list("sweep", "eps");
  for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
    if (!(c.eps_list[i] > 0.0)) throw ConfigError("eps values must be positive", "sweep", "eps", r.line("sweep", "eps"));
    if (i > 0 && !(c.eps_list[i] < c.eps_list[i - 1]))
      throw ConfigError("eps list must be strictly decreasing", "sweep", "eps", r.line("sweep", "eps"));
  }
  return c;
}

std::string echo_config(const RunConfig& c) {
  std::ostringstream out;
  auto kv = [&](const char* k, const std::string& v) { out << k << " = " << v << "\n"; };
  auto pair = [](Vec2 p) { return fmt(p.x) + ", " + fmt(p.y); };
  out << "[domain]\n";
  kv("xmin", fmt(c.xmin));
  kv("xmax", fmt(c.xmax));
  kv("ymin", fmt(c.ymin));
  kv("ymax", fmt(c.ymax));
  kv("h", fmt(c.h));
  kv("dirichlet", c.dirichlet.text());
  kv("neumann", c.neumann.text());
  out << "\n[materials]\n";
  kv("lambda1", fmt(c.lambda1));
  kv("mu1", fmt(c.mu1));
  kv("lambda2", fmt(c.lambda2));
  kv("mu2", fmt(c.mu2));
  kv("eigenstrain", c.eigenstrain == EigenstrainKind::Zero        ? "zero"
                    : c.eigenstrain == EigenstrainKind::Isotropic ? "isotropic"
                                                                  : "diagonal");
  kv("eigen_delta", fmt(c.eigen_delta));
  kv("interpolation", to_string(c.interpolation));
  out << "\n[loads]\n";
  kv("traction", pair(c.traction));
  kv("body_force", pair(c.body_force));
  out << "\n[objective]\n";
  kv("kind", c.tracking ? "tracking" : "compliance");
  if (c.tracking) {
    kv("tracking_weight", fmt(c.tracking_weight));
    kv("tracking_target", pair(c.tracking_target));
  }
  kv("gamma", fmt(c.gamma));
  if (c.eps) kv("eps", fmt(*c.eps));
  kv("beta", fmt(c.beta));
  const auto& v = c.vmpg;
  out << "\n[optimizer]\n";
  kv("armijo_beta", fmt(v.armijo_beta));
  kv("armijo_sigma", fmt(v.armijo_sigma));
  kv("tol", fmt(v.tol));
  kv("k_max", std::to_string(v.k_max));
  kv("zeta0", fmt(v.zeta0));
  kv("zeta_growth", fmt(v.zeta_growth));
  kv("metric", to_string(v.metric));
  kv("bfgs_memory", std::to_string(v.bfgs_memory));
  kv("bfgs_theta", fmt(v.bfgs_theta));
  kv("rho", fmt(v.rho));
  kv("max_halvings", std::to_string(v.max_halvings));
  kv("pdas_c", fmt(v.projection.pdas_c));
  kv("max_pdas", std::to_string(v.projection.max_pdas));
  kv("max_primal", std::to_string(v.projection.max_primal));
  kv("linear_solver", c.solver.kind == LinearSolverKind::Pcg ? "pcg" : "cholesky");
  kv("pcg_tol", fmt(c.solver.rel_tol));
  kv("remesh", c.remesh ? "true" : "false");
  kv("remesh_every", std::to_string(c.remesh_every));
  kv("points_across", fmt(c.points_across));
  kv("output_every", std::to_string(c.output_every));
  kv("seed", std::to_string(c.seed));
  if (!c.eps_list.empty()) {
    out << "\n[sweep]\n";
    std::string list;
    for (double e : c.eps_list) list += (list.empty() ? "" : ", ") + fmt(e);
    kv("eps", list);
  }
  return out.str();
}

Problem RunConfig::problem(double eps_value) const {
  EigenstrainSpec eig = eigenstrain::Zero{};
  if (eigenstrain == EigenstrainKind::Isotropic) eig = eigenstrain::IsotropicLinear{eigen_delta};
  if (eigenstrain == EigenstrainKind::Diagonal) eig = eigenstrain::DiagonalLinear{eigen_delta};
  Problem p{MaterialModel::from_lame(lambda1, mu1, lambda2, mu2, eig, interpolation), LoadSpec::uniform(body_force, traction), {},
            solver};
  if (tracking) {
    Vec2 target = tracking_target;
    p.objective.kind = objective_kind::Tracking{tracking_weight, [target](Vec2) { return target; }};
  }
  p.objective.gamma = gamma;
  p.objective.eps = eps_value;
  p.objective.beta = beta;
  p.objective.validate();
  return p;
}

Mesh RunConfig::mesh() const {
  Mesh m = build_rect_mesh(xmin, xmax, ymin, ymax, h);
  return tag_boundary(m, dirichlet, neumann);
}

VmpgConfig RunConfig::optimizer(std::shared_ptr<const Mesh> base) const {
  VmpgConfig v = vmpg;
  if (remesh) v.remesh = RemeshOptions{std::move(base), remesh_every, points_across};
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace pfto
