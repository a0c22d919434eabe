#include "pfto/optimizer.hpp"

#include "pfto/objective.hpp"

#include <algorithm>
#include <cmath>

namespace pfto {

const char* to_string(MetricMode mode) {
  switch (mode) {
    case MetricMode::Base: return "base";
    case MetricMode::Bfgs: return "bfgs";
    case MetricMode::SecondOrder: return "second_order";
  }
  return "?";
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Criterion: return "criterion";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::LineSearchFailure: return "line_search_failure";
  }
  return "?";
}

void VmpgConfig::validate() const {
  if (!(armijo_beta > 0.0 && armijo_beta < 1.0)) throw InvalidInput("armijo_beta must lie in (0, 1)");
  if (!(armijo_sigma > 0.0 && armijo_sigma < 1.0)) throw InvalidInput("armijo_sigma must lie in (0, 1)");
  if (!(tol > 0.0)) throw InvalidInput("tol must be positive");
  if (k_max < 0) throw InvalidInput("k_max must be non-negative");
  if (!(zeta0 > 0.0)) throw InvalidInput("zeta0 must be positive");
  if (!(zeta_growth >= 1.0)) throw InvalidInput("zeta_growth must be at least 1");
  if (bfgs_memory < 0) throw InvalidInput("bfgs_memory must be non-negative");
  if (!(bfgs_theta > 0.0)) throw InvalidInput("bfgs_theta must be positive");
  if (rho < 0.0) throw InvalidInput("rho must be non-negative");
  if (max_halvings < 1) throw InvalidInput("max_halvings must be positive");
  if (!(projection.pdas_c > 0.0)) throw InvalidInput("pdas_c must be positive");
  if (projection.max_pdas < 1) throw InvalidInput("max_pdas must be positive");
  if (remesh) {
    if (!remesh->base) throw InvalidInput("remeshing needs a base mesh");
    if (remesh->every < 0) throw InvalidInput("remesh interval must be non-negative");
    if (!(remesh->points_across >= 2.0)) throw InvalidInput("points_across must be at least 2");
  }
}

double zeta_schedule(long k, const VmpgConfig& config) {
  if (k < 0) throw InvalidInput("iteration index must be non-negative");
  double z = config.zeta0 * std::pow(config.zeta_growth, static_cast<double>(k));
  return std::min(1.0, z);
}

Vector initial_phase(const Mesh& mesh, double beta) { return Vector::Constant(mesh.num_vertices(), beta); }

Vector restore_volume(const Vector& phi, const Vector& volume, double target) {
  const double total = volume.sum();
  if (std::abs(target) > total) throw InvalidInput("volume target cannot be met inside the box");
  Vector mask = (phi.array().abs() < 1.0).cast<double>();
  if (mask.sum() == 0.0) mask.setOnes();
  auto shifted = [&](double c) { return Vector((phi + c * mask).cwiseMax(-1.0).cwiseMin(1.0)); };
  double lo = -2.0, hi = 2.0;
  if (volume.dot(shifted(lo)) > target || volume.dot(shifted(hi)) < target) {
    mask.setOnes();
  }
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (volume.dot(shifted(mid)) < target)
      lo = mid;
    else
      hi = mid;
  }
  Vector a = shifted(lo), b = shifted(hi);
  return std::abs(volume.dot(a) - target) <= std::abs(volume.dot(b) - target) ? a : b;
}

namespace {

constexpr double kStaleBand = 0.05;

// Phase field, its state and gradient on one mesh.
struct Iterate {
  std::shared_ptr<const Mesh> mesh;
  std::unique_ptr<ScalarForms> forms;
  Vector phi;
  std::unique_ptr<ElasticityOperator> op;
  Vector u;
  double j = 0.0;
  Vector g;
};

class Vmpg {
 public:
  Vmpg(const Problem& problem, const VmpgConfig& config) : p_(problem), c_(config) {}

  MinimizeResult run(std::shared_ptr<const Mesh> mesh, const Vector& phi0, const IterationObserver& observer);

 private:
  // Evaluates j (and keeps the factored operator) at phi on the current mesh.
  void evaluate(Iterate& it) const {
    it.op = std::make_unique<ElasticityOperator>(*it.mesh, it.phi, p_.model, p_.solver);
    it.u = it.op->state(p_.loads, it.u.size() == 2 * it.mesh->num_vertices() ? &it.u : nullptr);
    double e = ginzburg_landau(*it.forms, it.phi, p_.objective.eps);
    it.j = objective_H(p_.objective, *it.mesh, it.u, p_.loads) + p_.objective.gamma * e;
  }

  void gradient(Iterate& it) const {
    Vector q = it.op->adjoint(p_.objective, p_.loads, it.u);
    it.g = assemble_gradient(p_.objective, *it.mesh, *it.forms, it.phi, it.u, q, p_.model);
  }

  void start_on(std::shared_ptr<const Mesh> mesh, Vector phi) {
    cur_.mesh = std::move(mesh);
    cur_.forms = std::make_unique<ScalarForms>(*cur_.mesh);
    cur_.phi = std::move(phi);
    cur_.u.resize(0);
    target_ = p_.objective.beta * cur_.forms->domain_area;
    evaluate(cur_);
    gradient(cur_);
    bfgs_ = std::make_unique<Metric>(
        Metric::h1_seminorm(*cur_.forms, p_.objective.eps, p_.objective.gamma, c_.rho));
    bfgs_->set_memory(c_.bfgs_memory);
    base_ = std::make_unique<Metric>(*bfgs_);
    warm_.clear();
  }

  // Regenerates the band mesh from the base mesh unless the current mesh
  // still resolves the interface (looser purity test, so a converged design
  // sitting on the band edge does not trigger remeshing back and forth).
  bool remesh(const Vector& phi, bool force = false) {
    const auto& opts = *c_.remesh;
    if (!force && band_resolved(*cur_.mesh, phi, p_.objective.eps, opts.points_across, kStaleBand)) return false;
    PointLocator loc(*cur_.mesh);
    RefinedMesh r = refine_interface_band(
        *opts.base, [&](Vec2 x) { return loc.evaluate(phi, x); }, p_.objective.eps, opts.points_across);
    if (r.mesh.vertices() == cur_.mesh->vertices() && r.mesh.triangles() == cur_.mesh->triangles()) return false;
    auto mesh = std::make_shared<const Mesh>(std::move(r.mesh));
    Vector volume = volume_weights(*mesh);
    Vector restored = restore_volume(r.phi.cwiseMax(-1.0).cwiseMin(1.0), volume, p_.objective.beta * mesh->total_area());
    start_on(std::move(mesh), std::move(restored));
    ++generation_;
    return true;
  }

  Design snapshot() const {
    return Design{cur_.mesh, cur_.phi, cur_.u, cur_.j, lambda_, generation_};
  }

  const Problem& p_;
  const VmpgConfig& c_;
  Iterate cur_;
  std::unique_ptr<Metric> base_, bfgs_;
  ActiveSet warm_;
  double target_ = 0.0;
  double lambda_ = 0.0;
  int generation_ = 0;
};

MinimizeResult Vmpg::run(std::shared_ptr<const Mesh> mesh, const Vector& phi0, const IterationObserver& observer) {
  if (!mesh) throw InvalidInput("minimize needs a mesh");
  if (phi0.size() != mesh->num_vertices()) throw InvalidInput("phi0 does not match the mesh");
  if (!box_feasible(phi0)) throw InfeasiblePhase("phi0 violates the box constraint");
  Vector phi = phi0.cwiseMax(-1.0).cwiseMin(1.0);
  {
    double vol = volume_weights(*mesh).dot(phi);
    double target = p_.objective.beta * mesh->total_area();
    if (std::abs(vol - target) > 1e-8 * mesh->total_area())
      throw InfeasiblePhase("phi0 violates the volume constraint");
  }
  start_on(std::move(mesh), std::move(phi));
  if (c_.remesh) remesh(cur_.phi, true);

  MinimizeResult result;
  result.reason = StopReason::MaxIterations;
  const double eg = p_.objective.eps * p_.objective.gamma;
  long accepted_on_mesh = 0;
  bool force_base = false;

  for (long k = 0; k < c_.k_max; ++k) {
    const double zeta = zeta_schedule(k, c_);
    MetricMode mode = force_base ? MetricMode::Base : c_.metric;
    ProjectionResult proj;
    std::optional<Metric> second;
    const ActiveSet* warm = warm_.size() == static_cast<std::size_t>(cur_.phi.size()) ? &warm_ : nullptr;
    try {
      const Metric* metric = base_.get();
      if (mode == MetricMode::Bfgs) {
        metric = bfgs_.get();
      } else if (mode == MetricMode::SecondOrder) {
        second.emplace(second_order_metric(*cur_.op, *cur_.forms, cur_.u, p_.objective.gamma, p_.objective.eps));
        metric = &*second;
      }
      proj = solve_projection(*metric, cur_.phi, cur_.g, zeta, target_, cur_.forms->volume, c_.projection, warm);
    } catch (const SolverFailure&) {
      if (mode == MetricMode::Base) throw;
      mode = MetricMode::Base;
      bfgs_->clear_corrections();
      proj = solve_projection(*base_, cur_.phi, cur_.g, zeta, target_, cur_.forms->volume, c_.projection, warm);
    }
    force_base = false;
    warm_ = proj.active;

    Vector v = proj.y - cur_.phi;
    const double criterion = std::sqrt(std::max(0.0, eg * v.dot(cur_.forms->laplacian * v)));
    result.criterion = criterion;
    if (criterion < c_.tol) {
      lambda_ = proj.lambda / zeta;
      // Converged on a stale band: refit the mesh and keep going.
      if (c_.remesh && accepted_on_mesh > 0 && remesh(cur_.phi)) {
        accepted_on_mesh = 0;
        continue;
      }
      result.reason = StopReason::Criterion;
      break;
    }

    const double slope = cur_.g.dot(v);
    Iterate trial;
    trial.mesh = cur_.mesh;
    trial.u = cur_.u;
    double alpha = 1.0;
    bool ok = false;
    if (slope < 0.0) {
      for (int m = 0; m <= c_.max_halvings; ++m) {
        trial.phi = (cur_.phi + alpha * v).cwiseMax(-1.0).cwiseMin(1.0);
        trial.op = std::make_unique<ElasticityOperator>(*trial.mesh, trial.phi, p_.model, p_.solver);
        trial.u = trial.op->state(p_.loads, &trial.u);
        double e = ginzburg_landau(*cur_.forms, trial.phi, p_.objective.eps);
        trial.j = objective_H(p_.objective, *trial.mesh, trial.u, p_.loads) + p_.objective.gamma * e;
        if (trial.j <= cur_.j + alpha * c_.armijo_sigma * slope) {
          ok = true;
          break;
        }
        alpha *= c_.armijo_beta;
      }
    }
    if (!ok) {
      if (mode != MetricMode::Base) {
        // Retry this iteration with the plain H1 metric before giving up.
        bfgs_->clear_corrections();
        force_base = true;
        --k;
        continue;
      }
      lambda_ = proj.lambda / zeta;
      result.reason = StopReason::LineSearchFailure;
      break;
    }

    Vector s = trial.phi - cur_.phi;
    Vector g_old = std::move(cur_.g);
    cur_.phi = std::move(trial.phi);
    cur_.op = std::move(trial.op);
    cur_.u = std::move(trial.u);
    cur_.j = trial.j;
    gradient(cur_);
    if (c_.metric == MetricMode::Bfgs) bfgs_->bfgs_update(s, cur_.g - g_old, c_.bfgs_theta);
    lambda_ = proj.lambda / zeta;

    IterationRecord rec;
    rec.k = k;
    rec.j = cur_.j;
    rec.criterion = criterion;
    rec.alpha = alpha;
    rec.lambda = lambda_;
    rec.pdas_iters = proj.iterations;
    rec.zeta = zeta;
    rec.metric = mode;
    rec.mesh_generation = generation_;
    rec.volume_error = cur_.forms->volume.dot(cur_.phi) - target_;
    result.history.push_back(rec);
    if (observer) observer(rec, snapshot());

    ++accepted_on_mesh;
    if (c_.remesh && c_.remesh->every > 0 && accepted_on_mesh % c_.remesh->every == 0) {
      if (remesh(cur_.phi)) accepted_on_mesh = 0;
    }
  }
  result.design = snapshot();
  return result;
}

}  // namespace

MinimizeResult minimize(const Problem& problem, std::shared_ptr<const Mesh> mesh, const Vector& phi0,
                        const VmpgConfig& config, const IterationObserver& observer) {
  problem.objective.validate();
  config.validate();
  Vmpg solver(problem, config);
  return solver.run(std::move(mesh), phi0, observer);
}

}  // namespace pfto
