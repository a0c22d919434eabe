#include "pfto/projection.hpp"

#include "pfto/objective.hpp"
#include "pfto/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

namespace pfto {

// ---------------------------------------------------------------------------
// Metric

Metric::Metric(SparseMatrix base) : base_(std::move(base)) {
  if (base_.rows() != base_.cols()) throw InvalidInput("metric matrix must be square");
  base_.makeCompressed();
  diagonal_ = base_.diagonal();
}

Metric::Metric(LinearOperator base, Vector diagonal) : op_(std::move(base)), diagonal_(std::move(diagonal)) {}

Metric Metric::h1_seminorm(const ScalarForms& forms, double eps, double gamma, double rho) {
  SparseMatrix a = (eps * gamma) * forms.laplacian;
  if (rho != 0.0) a += rho * forms.mass;
  return Metric(std::move(a));
}

void Metric::apply_base(const Vector& v, Vector& out) const {
  if (op_)
    op_(v, out);
  else
    out.noalias() = base_ * v;
}

void Metric::apply(const Vector& v, Vector& out) const {
  if (v.size() != size()) throw InvalidInput("metric applied to vector of wrong size");
  apply_base(v, out);
  for (const auto& p : pairs_) {
    out -= (p.as.dot(v) / p.sas) * p.as;
    out += (p.y.dot(v) / p.ys) * p.y;
  }
}

Vector Metric::apply(const Vector& v) const {
  Vector out(v.size());
  apply(v, out);
  return out;
}

void Metric::rebuild() {
  std::deque<Pair> kept;
  std::swap(kept, pairs_);
  for (auto& p : kept) {
    p.as = apply(p.s);
    p.sas = p.s.dot(p.as);
    if (p.sas > 0.0 && p.ys >= theta_ * p.sas) pairs_.push_back(std::move(p));
  }
}

bool Metric::bfgs_update(const Vector& s, const Vector& y, double theta) {
  if (s.size() != size() || y.size() != size()) throw InvalidInput("BFGS pair has wrong size");
  theta_ = theta;
  Pair p;
  p.s = s;
  p.y = y;
  p.as = apply(s);
  p.sas = s.dot(p.as);
  p.ys = y.dot(s);
  if (!(p.sas > 0.0) || !(p.ys > 0.0) || p.ys < theta * p.sas) return false;
  pairs_.push_back(std::move(p));
  if (static_cast<int>(pairs_.size()) > memory_) {
    pairs_.pop_front();
    rebuild();
  }
  return true;
}

void Metric::set_memory(int memory) {
  if (memory < 0) throw InvalidInput("BFGS memory must be non-negative");
  memory_ = memory;
  bool trimmed = false;
  while (static_cast<int>(pairs_.size()) > memory_) {
    pairs_.pop_front();
    trimmed = true;
  }
  if (trimmed) rebuild();
}

Metric::LowRank Metric::low_rank() const {
  LowRank lr;
  for (const auto& p : pairs_) {
    lr.columns.push_back(p.as);
    lr.coef.push_back(-1.0 / p.sas);
    lr.columns.push_back(p.y);
    lr.coef.push_back(1.0 / p.ys);
  }
  return lr;
}

Metric bfgs_update(const Metric& metric, const Vector& s, const Vector& y, double theta) {
  Metric out = metric;
  out.bfgs_update(s, y, theta);
  return out;
}

// ---------------------------------------------------------------------------
// Second-order metric

Vector second_order_metric_action(const ElasticityOperator& op, const ScalarForms& forms, const Vector& u,
                                  double gamma, double eps, const Vector& v) {
  const Mesh& mesh = op.mesh();
  const MaterialModel& model = op.model();
  const Vector& phi = op.phi();
  Vector z = op.linearized(u, v, nullptr);
  Vector out = (gamma * eps) * (forms.laplacian * v);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    auto el = p1_element(mesh, t);
    Sym2 ez = element_strain(el, tri, z);
    Sym2 eu = element_strain(el, tri, u);
    for (const auto& q : quad::kDegree4) {
      double p = q.bary[0] * phi[tri[0]] + q.bary[1] * phi[tri[1]] + q.bary[2] * phi[tri[2]];
      double val = -2.0 * q.weight * el.area * ddot(model.apply_dC(p, ez), eu);
      for (int a = 0; a < 3; ++a) out[tri[static_cast<std::size_t>(a)]] += val * q.bary[static_cast<std::size_t>(a)];
    }
  }
  return out;
}

Vector second_order_metric_action(const Mesh& mesh, const Vector& phi, const Vector& u, const MaterialModel& model,
                                  double gamma, double eps, const Vector& v) {
  ElasticityOperator op(mesh, phi, model);
  return second_order_metric_action(op, ScalarForms(mesh), u, gamma, eps, v);
}

Metric second_order_metric(const ElasticityOperator& op, const ScalarForms& forms, const Vector& u, double gamma,
                           double eps) {
  Vector diag = (gamma * eps) * forms.laplacian.diagonal();
  return Metric([&op, &forms, &u, gamma, eps](const Vector& v,
                                              Vector& out) { out = second_order_metric_action(op, forms, u, gamma, eps, v); },
                std::move(diag));
}

// ---------------------------------------------------------------------------
// Equality-constrained subproblem on the free nodes

namespace {

struct EqpSolution {
  Vector y;  // full vector: fixed values on active nodes
  double lambda = 0.0;
};

/// Solves  (A y)_i + lambda m_i = r_i  (i free),  m . y = target,
/// with y fixed to +-1 on active nodes.
class ReducedKkt {
 public:
  ReducedKkt(const Metric& metric, const Vector& volume, double target, double cg_tol)
      : metric_(metric), m_(volume), target_(target), cg_tol_(cg_tol), has_volume_(volume.size() > 0) {}

  EqpSolution solve(const ActiveSet& active, const Vector& r) const {
    const int n = metric_.size();
    std::vector<int> free;
    Vector y = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (active[static_cast<std::size_t>(i)] == 0)
        free.push_back(i);
      else
        y[i] = active[static_cast<std::size_t>(i)] > 0 ? 1.0 : -1.0;
    }
    if (free.empty()) {
      if (has_volume_) throw SolverFailure("reduced system is empty: every node is active");
      return EqpSolution{std::move(y), 0.0};
    }
    const int nf = static_cast<int>(free.size());

    Vector ay = metric_.apply(y);
    Vector b(nf);
    for (int k = 0; k < nf; ++k) b[k] = r[free[static_cast<std::size_t>(k)]] - ay[free[static_cast<std::size_t>(k)]];
    double c = 0.0;
    Vector mf;
    if (has_volume_) {
      c = target_ - m_.dot(y);
      mf.resize(nf);
      for (int k = 0; k < nf; ++k) mf[k] = m_[free[static_cast<std::size_t>(k)]];
    }

    EqpSolution sol;
    Vector yf = metric_.has_matrix() ? solve_direct(free, b, mf, c, sol.lambda) : solve_cg(free, b, mf, c, sol.lambda);
    for (int k = 0; k < nf; ++k) y[free[static_cast<std::size_t>(k)]] = yf[k];
    sol.y = std::move(y);
    return sol;
  }

 private:
  Vector solve_direct(const std::vector<int>& free, const Vector& b, const Vector& mf, double c,
                      double& lambda) const {
    const int n = metric_.size();
    const int nf = static_cast<int>(free.size());
    const int dim = nf + (has_volume_ ? 1 : 0);
    std::vector<int> local(static_cast<std::size_t>(n), -1);
    for (int k = 0; k < nf; ++k) local[static_cast<std::size_t>(free[static_cast<std::size_t>(k)])] = k;

    const SparseMatrix& a = metric_.base_matrix();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(a.nonZeros()) + 2 * static_cast<std::size_t>(nf));
    for (int col = 0; col < a.outerSize(); ++col) {
      int lc = local[static_cast<std::size_t>(col)];
      if (lc < 0) continue;
      for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
        int lr = local[static_cast<std::size_t>(it.row())];
        if (lr >= 0) trip.emplace_back(lr, lc, it.value());
      }
    }

    // The free block is SPD as soon as one node is active (or rho > 0); the
    // volume row is then eliminated by a Schur complement. Otherwise fall back
    // to LU on the bordered matrix.
    SparseMatrix aii(nf, nf);
    aii.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt(aii);
    Vector w;
    double mw = 0.0;
    bool spd = llt.info() == Eigen::Success;
    if (spd) {
      Vector d = SparseMatrix(llt.matrixL()).diagonal();
      spd = d.minCoeff() * d.minCoeff() > 1e-12 * aii.diagonal().maxCoeff();
    }
    if (spd && has_volume_) {
      w = llt.solve(mf);
      mw = mf.dot(w);
      spd = mw > 0.0;
    }
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    if (!spd) {
      if (has_volume_)
        for (int k = 0; k < nf; ++k) {
          trip.emplace_back(k, nf, mf[k]);
          trip.emplace_back(nf, k, mf[k]);
        }
      SparseMatrix kkt(dim, dim);
      kkt.setFromTriplets(trip.begin(), trip.end());
      kkt.makeCompressed();
      lu.analyzePattern(kkt);
      lu.factorize(kkt);
      if (lu.info() != Eigen::Success) throw SolverFailure("reduced KKT matrix is singular");
    }
    auto solve_base = [&](const Vector& rhs) -> Vector {
      if (!spd) return lu.solve(rhs);
      if (!has_volume_) return llt.solve(rhs);
      Vector x1 = llt.solve(rhs.head(nf));
      double lam = (mf.dot(x1) - rhs[nf]) / mw;
      Vector out(dim);
      out.head(nf) = x1 - lam * w;
      out[nf] = lam;
      return out;
    };

    Vector rhs(dim);
    rhs.head(nf) = b;
    if (has_volume_) rhs[nf] = c;
    Vector x = solve_base(rhs);

    // Woodbury correction for the BFGS part of the metric.
    auto lr = metric_.low_rank();
    if (!lr.columns.empty()) {
      const int r = static_cast<int>(lr.columns.size());
      Eigen::MatrixXd u = Eigen::MatrixXd::Zero(dim, r);
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < nf; ++k) u(k, j) = lr.columns[static_cast<std::size_t>(j)][free[static_cast<std::size_t>(k)]];
      Eigen::MatrixXd z(dim, r);
      for (int j = 0; j < r; ++j) z.col(j) = solve_base(Vector(u.col(j)));
      Eigen::MatrixXd cap = u.transpose() * z;
      for (int j = 0; j < r; ++j) cap(j, j) += 1.0 / lr.coef[static_cast<std::size_t>(j)];
      Vector w = cap.fullPivLu().solve(u.transpose() * x);
      x -= z * w;
    }
    if (!x.allFinite()) throw SolverFailure("reduced KKT solve produced non-finite values");
    lambda = has_volume_ ? x[nf] : 0.0;
    return x.head(nf);
  }

  // Projected PCG (constraint preconditioning) for matrix-free metrics.
  Vector solve_cg(const std::vector<int>& free, const Vector& b, const Vector& mf, double c, double& lambda) const {
    const int n = metric_.size();
    const int nf = static_cast<int>(free.size());
    Vector dinv(nf);
    for (int k = 0; k < nf; ++k) {
      double d = metric_.base_diagonal()[free[static_cast<std::size_t>(k)]];
      dinv[k] = d > 0.0 ? 1.0 / d : 1.0;
    }
    Vector full(n);
    auto apply_ff = [&](const Vector& x, Vector& out) {
      full.setZero();
      for (int k = 0; k < nf; ++k) full[free[static_cast<std::size_t>(k)]] = x[k];
      Vector ax = metric_.apply(full);
      out.resize(nf);
      for (int k = 0; k < nf; ++k) out[k] = ax[free[static_cast<std::size_t>(k)]];
    };
    Vector dm;
    double mdm = 0.0;
    if (has_volume_) {
      dm = dinv.cwiseProduct(mf);
      mdm = mf.dot(dm);
      if (!(mdm > 0.0)) throw SolverFailure("volume weights vanish on the free nodes");
    }
    auto project = [&](const Vector& r) {
      Vector g = dinv.cwiseProduct(r);
      if (has_volume_) g -= (mf.dot(g) / mdm) * dm;
      return g;
    };

    Vector x = has_volume_ ? Vector((c / mdm) * dm) : Vector(Vector::Zero(nf));
    Vector ax;
    apply_ff(x, ax);
    Vector r = ax - b;
    Vector g = project(r);
    Vector d = -g;
    double rg = r.dot(g);
    const double scale = std::max(b.norm(), 1e-300);
    const int max_iter = std::max(10 * nf, 200);
    Vector ad;
    int it = 0;
    for (; it < max_iter && std::sqrt(std::abs(rg)) > cg_tol_ * std::sqrt(scale * scale * dinv.maxCoeff()); ++it) {
      apply_ff(d, ad);
      double dad = d.dot(ad);
      if (!(dad > 0.0)) throw NonPositiveCurvature("metric has non-positive curvature on the feasible subspace");
      double alpha = rg / dad;
      x += alpha * d;
      r += alpha * ad;
      g = project(r);
      double rg_new = r.dot(g);
      d = -g + (rg_new / rg) * d;
      rg = rg_new;
    }
    apply_ff(x, ax);
    Vector res = b - ax;
    lambda = has_volume_ ? mf.dot(dinv.cwiseProduct(res)) / mdm : 0.0;
    return x;
  }

  const Metric& metric_;
  const Vector& m_;
  double target_;
  double cg_tol_;
  bool has_volume_;
};

Vector kkt_stationarity(const Metric& metric, const Vector& anchor, const Vector& gradient, double zeta,
                        const Vector& volume, const Vector& y, double lambda) {
  Vector s = metric.apply(Vector(y - anchor)) + zeta * gradient;
  if (volume.size() > 0) s += lambda * volume;
  return s;
}

ProjectionResult finish(const Metric& metric, const Vector& anchor, const Vector& gradient, double zeta,
                        const Vector& volume, EqpSolution sol, ActiveSet active, int iterations, bool fallback) {
  ProjectionResult res;
  Vector s = kkt_stationarity(metric, anchor, gradient, zeta, volume, sol.y, sol.lambda);
  res.mu = Vector::Zero(anchor.size());
  for (Eigen::Index i = 0; i < anchor.size(); ++i)
    if (active[static_cast<std::size_t>(i)] != 0) res.mu[i] = -s[i];
  res.y = std::move(sol.y);
  res.lambda = sol.lambda;
  res.active = std::move(active);
  res.iterations = iterations;
  res.fallback_used = fallback;
  return res;
}

ActiveSet pdas_update(const ActiveSet& active, const Vector& y, const Vector& stationarity, double c) {
  ActiveSet next(active.size(), 0);
  for (std::size_t i = 0; i < active.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    double mu = active[i] != 0 ? -stationarity[k] : 0.0;
    if (mu + c * (y[k] - 1.0) > 0.0)
      next[i] = 1;
    else if (mu + c * (y[k] + 1.0) < 0.0)
      next[i] = -1;
  }
  return next;
}

struct BoxSolve {
  EqpSolution sol;
  ActiveSet active;
  int iterations = 0;
};

// PDAS for the box constraints alone, with the volume multiplier frozen.
BoxSolve box_pdas(const Metric& metric, const ReducedKkt& box, const Vector& anchor, const Vector& gradient,
                  double zeta, const Vector& volume, const Vector& r, double lambda, ActiveSet active,
                  const ProjectionOptions& options) {
  const Vector rl = r - lambda * volume;
  std::set<ActiveSet> seen;
  seen.insert(active);
  for (int it = 1; it <= options.max_pdas; ++it) {
    EqpSolution sol = box.solve(active, rl);
    sol.lambda = lambda;
    Vector s = kkt_stationarity(metric, anchor, gradient, zeta, volume, sol.y, lambda);
    ActiveSet next = pdas_update(active, sol.y, s, options.pdas_c);
    if (next == active) return {std::move(sol), std::move(active), it};
    if (!seen.insert(next).second) throw ProjectionFailure("box PDAS cycled", next);
    active = std::move(next);
  }
  throw ProjectionFailure("box PDAS hit its iteration cap", active);
}

// Safeguarded Newton iteration on the volume multiplier: m . y(lambda) is
// continuous and nonincreasing, and y(lambda) comes from box_pdas.
ProjectionResult multiplier_search(const Metric& metric, const Vector& anchor, const Vector& gradient, double zeta,
                                   double target, const Vector& volume, const Vector& r,
                                   const ProjectionOptions& options, ActiveSet active, double lambda,
                                   int iterations) {
  const ReducedKkt box(metric, Vector(), 0.0, options.cg_tol);
  const double ftol = 1e-13 * volume.cwiseAbs().sum();
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  double expand = std::max(1.0, std::abs(lambda));
  if (!std::isfinite(lambda)) lambda = 0.0;
  for (int k = 0; k < 200; ++k) {
    BoxSolve cur = box_pdas(metric, box, anchor, gradient, zeta, volume, r, lambda, active, options);
    iterations += cur.iterations;
    active = cur.active;
    const double f = volume.dot(cur.sol.y) - target;
    if (std::abs(f) <= ftol)
      return finish(metric, anchor, gradient, zeta, volume, std::move(cur.sol), std::move(cur.active), iterations,
                    true);
    if (f > 0.0)
      lo = std::max(lo, lambda);
    else
      hi = std::min(hi, lambda);
    // F is linear in lambda while the active set stays fixed.
    EqpSolution shifted = box.solve(cur.active, r - (lambda + 1.0) * volume);
    double slope = volume.dot(shifted.y) - volume.dot(cur.sol.y);
    double next = slope < 0.0 ? lambda - f / slope : std::numeric_limits<double>::quiet_NaN();
    if (!(std::isfinite(next) && next > lo && next < hi)) {
      if (std::isfinite(lo) && std::isfinite(hi)) {
        next = 0.5 * (lo + hi);
      } else {
        next = f > 0.0 ? lambda + expand : lambda - expand;
        expand *= 2.0;
      }
    }
    if (next == lambda) break;
    lambda = next;
  }
  throw ProjectionFailure("volume multiplier search did not converge", active);
}

// Classical primal active-set method from the feasible anchor. Finite for
// strictly convex problems; used only when PDAS fails.
ProjectionResult primal_active_set(const Metric& metric, const ReducedKkt& kkt, const Vector& anchor,
                                   const Vector& gradient, double zeta, const Vector& volume, const Vector& r,
                                   const ProjectionOptions& options, int pdas_iterations) {
  const int n = metric.size();
  const bool has_volume = volume.size() > 0;
  Vector y = anchor.cwiseMax(-1.0).cwiseMin(1.0);
  ActiveSet w(static_cast<std::size_t>(n), 0);
  int n_free = n;
  for (int i = 0; i < n; ++i)
    if (std::abs(y[i]) >= 1.0) {
      w[static_cast<std::size_t>(i)] = y[i] > 0 ? 1 : -1;
      --n_free;
    }
  if (n_free == 0) {
    w[0] = 0;
    n_free = 1;
  }
  const double gscale = std::max(1.0, (zeta * gradient).lpNorm<Eigen::Infinity>());

  for (int it = 1; it <= options.max_primal; ++it) {
    EqpSolution sol = kkt.solve(w, r);
    Vector p = sol.y - y;
    if (p.lpNorm<Eigen::Infinity>() <= 1e-14 * std::max(1.0, y.lpNorm<Eigen::Infinity>())) {
      Vector s = kkt_stationarity(metric, anchor, gradient, zeta, volume, sol.y, sol.lambda);
      // mu_i = -s_i must be >= 0 on upper and <= 0 on lower bounds.
      int worst = -1;
      double worst_val = 1e-13 * gscale;
      for (int i = 0; i < n; ++i) {
        signed char a = w[static_cast<std::size_t>(i)];
        double viol = a > 0 ? s[i] : (a < 0 ? -s[i] : 0.0);
        if (viol > worst_val) {
          worst_val = viol;
          worst = i;
        }
      }
      if (worst < 0) return finish(metric, anchor, gradient, zeta, volume, sol, w, pdas_iterations + it, true);
      w[static_cast<std::size_t>(worst)] = 0;
      ++n_free;
      y = sol.y;
      continue;
    }
    double t = 1.0;
    int block = -1;
    for (int i = 0; i < n; ++i) {
      if (w[static_cast<std::size_t>(i)] != 0) continue;
      double ti = p[i] > 0 ? (1.0 - y[i]) / p[i] : (p[i] < 0 ? (-1.0 - y[i]) / p[i] : 2.0);
      if (ti < t) {
        t = ti;
        block = i;
      }
    }
    y += t * p;
    if (block >= 0 && !(has_volume && n_free == 1)) {
      w[static_cast<std::size_t>(block)] = p[block] > 0 ? 1 : -1;
      y[block] = p[block] > 0 ? 1.0 : -1.0;
      --n_free;
    }
    y = y.cwiseMax(-1.0).cwiseMin(1.0);
  }
  throw ProjectionFailure("primal active-set fallback exceeded its iteration cap", w);
}

}  // namespace

ProjectionResult solve_projection(const Metric& metric, const Vector& anchor, const Vector& gradient, double zeta,
                                  double volume_target, const Vector& volume, const ProjectionOptions& options,
                                  const ActiveSet* initial) {
  const int n = metric.size();
  if (anchor.size() != n || gradient.size() != n) throw InvalidInput("projection inputs have inconsistent sizes");
  if (!(zeta > 0.0)) throw InvalidInput("zeta must be positive");
  const bool has_volume = volume.size() > 0;
  if (has_volume) {
    if (volume.size() != n) throw InvalidInput("volume weights have wrong size");
    double total = volume.cwiseAbs().sum();
    if (std::abs(volume_target) > total * (1.0 + 1e-14))
      throw InvalidInput("volume target cannot be met inside the box");
    if (std::abs(volume.dot(anchor) - volume_target) > 1e-8 * total)
      throw InvalidInput("anchor violates the volume constraint");
  }
  if (!box_feasible(anchor)) throw InvalidInput("anchor violates the box constraint");

  ReducedKkt kkt(metric, volume, volume_target, options.cg_tol);
  const Vector r = metric.apply(anchor) - zeta * gradient;

  ActiveSet active = initial && static_cast<int>(initial->size()) == n ? *initial : ActiveSet(static_cast<std::size_t>(n), 0);
  std::set<ActiveSet> seen;
  seen.insert(active);
  int it = 0;
  double lambda = 0.0;
  try {
    for (it = 1; it <= options.max_pdas; ++it) {
      EqpSolution sol = kkt.solve(active, r);
      lambda = sol.lambda;
      Vector s = kkt_stationarity(metric, anchor, gradient, zeta, volume, sol.y, sol.lambda);
      ActiveSet next = pdas_update(active, sol.y, s, options.pdas_c);
      if (next == active) return finish(metric, anchor, gradient, zeta, volume, std::move(sol), std::move(active), it, false);
      if (!seen.insert(next).second) break;  // cycling
      active = std::move(next);
    }
  } catch (const NonPositiveCurvature&) {
    throw;
  } catch (const SolverFailure&) {
    // singular reduced system; let the fallbacks try
  }
  it = std::min(it, options.max_pdas);
  if (has_volume) {
    try {
      return multiplier_search(metric, anchor, gradient, zeta, volume_target, volume, r, options, active, lambda, it);
    } catch (const NonPositiveCurvature&) {
      throw;
    } catch (const SolverFailure&) {
    }
  }
  return primal_active_set(metric, kkt, anchor, gradient, zeta, volume, r, options, it);
}

double projection_kkt_residual(const Metric& metric, const Vector& anchor, const Vector& gradient, double zeta,
                               double volume_target, const Vector& volume, const ProjectionResult& res) {
  Vector s = kkt_stationarity(metric, anchor, gradient, zeta, volume, res.y, res.lambda) + res.mu;
  double worst = s.lpNorm<Eigen::Infinity>();
  for (Eigen::Index i = 0; i < res.y.size(); ++i) {
    worst = std::max(worst, std::abs(res.y[i]) - 1.0);
    signed char a = res.active[static_cast<std::size_t>(i)];
    if (a > 0) worst = std::max({worst, -res.mu[i], std::abs(res.y[i] - 1.0)});
    if (a < 0) worst = std::max({worst, res.mu[i], std::abs(res.y[i] + 1.0)});
    if (a == 0) worst = std::max(worst, std::abs(res.mu[i]));
  }
  if (volume.size() > 0) worst = std::max(worst, std::abs(volume.dot(res.y) - volume_target));
  return worst;
}

}  // namespace pfto
