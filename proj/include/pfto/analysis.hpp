#pragma once

#include "pfto/optimizer.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace pfto {

/// Nodal sign map 2 chi_{phi > 0} - 1; zero maps to -1.
Vector threshold_sharp(const Vector& phi);

/// int |a - b| for two P1 fields on the same mesh, integrated exactly by
/// splitting each triangle at the zero line of the difference.
double l1_distance(const Mesh& mesh, const Vector& a, const Vector& b);

/// Nodal clamp(sin(d(x)/eps), -1, 1) for a signed distance d.
Vector recovery_profile(const Mesh& mesh, const std::function<double(Vec2)>& signed_distance, double eps);

/// m * eps with m = 2(pi - 2)/pi * e0.
double profile_error_model(double eps, double e0);

/// int |sin(x/eps) - sgn(x)| over the transition layer |x| <= pi eps / 2,
/// by composite Gauss-Legendre quadrature on `panels` panels per side.
double profile_l1_error_1d(double eps, int panels = 8);

/// Affine least-squares fit E = e0 + b eps over the smallest-eps half of the
/// records (at least two); returns e0. A single record returns its E.
double extrapolate_e0(std::vector<std::pair<double, double>> records);

/// Perimeter of {phi = 1} implied by E = (pi/2) P.
double perimeter_estimate(double energy);

struct SweepRecord {
  double eps = 0.0;
  double j = 0.0;
  double energy = 0.0;
  double lambda = 0.0;
  double l1_error = 0.0;
  /// Smallest element diameter of the final mesh.
  double h_min = 0.0;
  long iterations = 0;
  StopReason reason = StopReason::MaxIterations;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  /// Final designs, one per completed run.
  std::vector<Design> designs;
  double e0 = 0.0;
  /// Non-empty when a run failed; records then hold the completed runs.
  std::string error;
};

/// Per-run observer: eps index, then the usual iteration callback arguments.
using SweepObserver = std::function<void(std::size_t, const IterationRecord&, const Design&)>;

/// Runs minimize for every eps (strictly decreasing), warm starting each run
/// from the previous minimizer. L1 errors are measured against the threshold
/// of the smallest-eps minimizer, on that run's mesh.
SweepResult epsilon_sweep(const Problem& problem, std::shared_ptr<const Mesh> mesh, const Vector& phi0,
                          const std::vector<double>& eps_list, const VmpgConfig& config,
                          const SweepObserver& observer = {});

}  // namespace pfto
