#pragma once

#include "pfto/elasticity.hpp"
#include "pfto/projection.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace pfto {

/// Everything that defines j_eps apart from the mesh and the phase field.
struct Problem {
  MaterialModel model;
  LoadSpec loads;
  ObjectiveSpec objective;
  LinearSolverOptions solver;
};

enum class MetricMode { Base, Bfgs, SecondOrder };

const char* to_string(MetricMode mode);

/// Optional interface-band remeshing from a coarse base mesh.
struct RemeshOptions {
  std::shared_ptr<const Mesh> base;
  /// Remesh after this many accepted iterations (0: only at start).
  int every = 25;
  double points_across = 8.0;
};

struct VmpgConfig {
  double armijo_beta = 0.5;
  double armijo_sigma = 1e-4;
  double tol = 1e-5;
  long k_max = 100000;
  double zeta0 = 0.05;
  double zeta_growth = 1.2;
  MetricMode metric = MetricMode::Bfgs;
  int bfgs_memory = 20;
  double bfgs_theta = 1e-8;
  /// Mass-matrix regularization of the base metric.
  double rho = 0.0;
  int max_halvings = 60;
  ProjectionOptions projection;
  std::optional<RemeshOptions> remesh;

  void validate() const;
};

/// zeta_k = min(1, zeta0 * growth^k).
double zeta_schedule(long k, const VmpgConfig& config);

struct IterationRecord {
  long k = 0;
  double j = 0.0;
  /// sqrt(eps gamma) |grad v_k|_{L2}
  double criterion = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
  int pdas_iters = 0;
  double zeta = 0.0;
  MetricMode metric = MetricMode::Base;
  int mesh_generation = 0;
  /// m . phi_{k+1} - beta |Omega| after the step.
  double volume_error = 0.0;
};

enum class StopReason { Criterion, MaxIterations, LineSearchFailure };

const char* to_string(StopReason reason);

/// Design snapshot handed to observers and returned at the end.
struct Design {
  std::shared_ptr<const Mesh> mesh;
  Vector phi;
  Vector u;
  double j = 0.0;
  double lambda = 0.0;
  int mesh_generation = 0;
};

struct MinimizeResult {
  Design design;
  std::vector<IterationRecord> history;
  StopReason reason = StopReason::MaxIterations;
  double criterion = 0.0;
};

/// Called after every accepted step with the record and the new iterate.
using IterationObserver = std::function<void(const IterationRecord&, const Design&)>;

/// Variable metric projected gradient method with Armijo backtracking.
/// phi0 must be box feasible with m . phi0 = beta |Omega| (to 1e-8 |Omega|);
/// with remeshing enabled the start field is resampled first and the volume
/// is restored.
MinimizeResult minimize(const Problem& problem, std::shared_ptr<const Mesh> mesh, const Vector& phi0,
                        const VmpgConfig& config, const IterationObserver& observer = {});

/// Shifts the non-pure nodal values by a common constant (clamped to the box)
/// so that m . phi = target. Used after transferring phi between meshes.
Vector restore_volume(const Vector& phi, const Vector& volume, double target);

/// Constant start field phi0 = beta.
Vector initial_phase(const Mesh& mesh, double beta);

}  // namespace pfto
