#pragma once

#include "pfto/analysis.hpp"
#include "pfto/optimizer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pfto {

/// Config text rejected; carries the location of the offending entry.
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& what, std::string section = {}, std::string key = {}, int line = 0);
  const char* kind() const noexcept override { return "config_error"; }
  const std::string& section() const { return section_; }
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string section_, key_;
  int line_;
};

/// Conjunction of axis-aligned conditions such as "x >= 0.75 & y == 0".
/// Equality holds within 1e-9 of the bound.
class BoxPredicate {
 public:
  struct Condition {
    char axis = 'x';
    std::string op;
    double bound = 0.0;
  };

  /// Throws InvalidInput on malformed text; "none" yields an always-false predicate.
  static BoxPredicate parse(const std::string& text);

  bool operator()(Vec2 p) const;
  const std::string& text() const { return text_; }
  bool empty() const { return never_; }

 private:
  std::vector<Condition> conditions_;
  std::string text_;
  bool never_ = false;
};

enum class EigenstrainKind { Zero, Isotropic, Diagonal };

struct RunConfig {
  // [domain]
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
  double h = 0.0;
  BoxPredicate dirichlet;
  BoxPredicate neumann;

  // [materials]
  double lambda1 = 0.0, mu1 = 0.0, lambda2 = 0.0, mu2 = 0.0;
  EigenstrainKind eigenstrain = EigenstrainKind::Zero;
  double eigen_delta = 0.0;
  Interpolation interpolation = Interpolation::Printed;

  // [loads]
  Vec2 traction{};
  Vec2 body_force{};

  // [objective]
  bool tracking = false;
  double tracking_weight = 1.0;
  Vec2 tracking_target{};
  double gamma = 0.5;
  std::optional<double> eps;
  double beta = 0.0;

  // [optimizer]
  VmpgConfig vmpg;
  LinearSolverOptions solver;
  bool remesh = false;
  int remesh_every = 25;
  double points_across = 8.0;
  int output_every = 50;
  long seed = 0;

  // [sweep]
  std::vector<double> eps_list;

  Problem problem(double eps_value) const;
  /// Tagged rectangle mesh of the domain section.
  Mesh mesh() const;
  /// Optimizer settings, with remeshing bound to `base` when enabled.
  VmpgConfig optimizer(std::shared_ptr<const Mesh> base) const;
};

/// Parses the sectioned key = value format ('#' and ';' start comments).
RunConfig parse_config(const std::string& text);

/// Canonical text of a config with every default written out; parses back to
/// an equivalent RunConfig.
std::string echo_config(const RunConfig& config);

/// Reads a whole file; throws InvalidInput when it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace pfto
