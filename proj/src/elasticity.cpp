#include "pfto/elasticity.hpp"

#include "pfto/quadrature.hpp"

#include <algorithm>
#include <sstream>

namespace pfto {

namespace {

Sym2 basis_strain(Vec2 grad, int comp) {
  return comp == 0 ? Sym2{grad.x, 0.5 * grad.y, 0.0} : Sym2{0.0, 0.5 * grad.x, grad.y};
}

double interp(const Vector& nodal, const Triangle& tri, const std::array<double, 3>& bary) {
  return bary[0] * nodal[tri[0]] + bary[1] * nodal[tri[1]] + bary[2] * nodal[tri[2]];
}

// Adds an elementwise functional  int S : E(psi_a e_i) * w  to the reduced vector.
void scatter_stress(const P1Element& el, const Triangle& tri, Sym2 stress, double weight, const DofMap& dofs,
                    Vector& out) {
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 2; ++c) {
      int r = dofs.reduced(tri[static_cast<std::size_t>(a)], c);
      if (r >= 0) out[r] += weight * ddot(stress, basis_strain(el.grad[static_cast<std::size_t>(a)], c));
    }
}

}  // namespace

void ObjectiveSpec::validate() const {
  if (!(gamma > 0.0)) throw InvalidInput("gamma must be positive");
  if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
  if (!(beta > -1.0 && beta < 1.0)) throw InvalidInput("beta must lie in (-1, 1)");
  if (auto* tr = std::get_if<objective_kind::Tracking>(&kind))
    if (!(tr->weight >= 0.0)) throw InvalidInput("tracking weight must be non-negative");
}

LoadSpec LoadSpec::uniform(Vec2 body_force, Vec2 traction) {
  return {body_force, [traction](Vec2) { return traction; }};
}

DofMap::DofMap(const Mesh& mesh, bool eliminate_dirichlet) {
  auto fixed = mesh.dirichlet_vertices();
  reduced_of_full_.assign(static_cast<std::size_t>(2 * mesh.num_vertices()), -1);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (eliminate_dirichlet && fixed[static_cast<std::size_t>(v)]) continue;
    for (int c = 0; c < 2; ++c) {
      reduced_of_full_[static_cast<std::size_t>(2 * v + c)] = static_cast<int>(full_of_reduced_.size());
      full_of_reduced_.push_back(2 * v + c);
    }
  }
}

Vector DofMap::expand(const Vector& reduced) const {
  if (reduced.size() != num_free()) throw InvalidInput("reduced vector has wrong size");
  Vector full = Vector::Zero(num_full());
  for (int r = 0; r < num_free(); ++r) full[full_of_reduced_[static_cast<std::size_t>(r)]] = reduced[r];
  return full;
}

Vector DofMap::restrict(const Vector& full) const {
  if (full.size() != num_full()) throw InvalidInput("full vector has wrong size");
  Vector red(num_free());
  for (int r = 0; r < num_free(); ++r) red[r] = full[full_of_reduced_[static_cast<std::size_t>(r)]];
  return red;
}

Vector checked_phase(const Vector& phi, int expected_size) {
  if (phi.size() != expected_size) throw InvalidInput("phase field size does not match mesh");
  Vector out(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    double p = phi[i];
    if (!std::isfinite(p)) throw InfeasiblePhase("phase field contains non-finite values");
    if (std::abs(p) > 1.0 + kTolBox) {
      std::ostringstream os;
      os << "phase value " << p << " at vertex " << i << " outside [-1, 1]";
      throw InfeasiblePhase(os.str());
    }
    out[i] = std::clamp(p, -1.0, 1.0);
  }
  return out;
}

Sym2 element_strain(const P1Element& el, const Triangle& tri, const Vector& u) {
  Sym2 e;
  for (int a = 0; a < 3; ++a) {
    Vec2 g = el.grad[static_cast<std::size_t>(a)];
    double ux = u[2 * tri[static_cast<std::size_t>(a)]];
    double uy = u[2 * tri[static_cast<std::size_t>(a)] + 1];
    e.xx += ux * g.x;
    e.yy += uy * g.y;
    e.xy += 0.5 * (ux * g.y + uy * g.x);
  }
  return e;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const Vector& phi_in, const MaterialModel& model,
                                const DofMap& dofs) {
  Vector phi = checked_phase(phi_in, mesh.num_vertices());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(36 * mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    auto el = p1_element(mesh, t);
    // Strains are constant per element, so only the Lame coefficients need quadrature.
    double lam = 0.0, mu = 0.0;
    for (const auto& q : quad::kMidpoint3) {
      auto [l, m] = model.lame(interp(phi, tri, q.bary));
      lam += q.weight * l;
      mu += q.weight * m;
    }
    std::array<Sym2, 6> e;
    std::array<int, 6> idx;
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 2; ++c) {
        e[static_cast<std::size_t>(2 * a + c)] = basis_strain(el.grad[static_cast<std::size_t>(a)], c);
        idx[static_cast<std::size_t>(2 * a + c)] = dofs.reduced(tri[static_cast<std::size_t>(a)], c);
      }
    for (std::size_t i = 0; i < 6; ++i) {
      if (idx[i] < 0) continue;
      for (std::size_t j = 0; j < 6; ++j) {
        if (idx[j] < 0) continue;
        double k = el.area * (2.0 * mu * ddot(e[i], e[j]) + lam * e[i].trace() * e[j].trace());
        trip.emplace_back(idx[i], idx[j], k);
      }
    }
  }
  SparseMatrix k(dofs.num_free(), dofs.num_free());
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

Vector assemble_external_load(const Mesh& mesh, const LoadSpec& loads, const DofMap& dofs) {
  Vector rhs = Vector::Zero(dofs.num_free());
  const Vec2 f = loads.body_force;
  if (f.x != 0.0 || f.y != 0.0) {
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      double a3 = mesh.area(t) / 3.0;
      for (int v : mesh.triangle(t)) {
        if (int r = dofs.reduced(v, 0); r >= 0) rhs[r] += a3 * f.x;
        if (int r = dofs.reduced(v, 1); r >= 0) rhs[r] += a3 * f.y;
      }
    }
  }
  if (!loads.traction) return rhs;
  for (const auto& be : mesh.boundary()) {
    if (be.tag != BoundaryTag::Neumann) continue;
    Vec2 p0 = mesh.vertex(be.v[0]), p1 = mesh.vertex(be.v[1]);
    double len = norm(p1 - p0);
    for (const auto& q : quad::kGauss2) {
      Vec2 g = loads.g(p0 + q.t * (p1 - p0));
      const std::array<double, 2> shape{1.0 - q.t, q.t};
      for (int a = 0; a < 2; ++a) {
        double w = q.weight * len * shape[static_cast<std::size_t>(a)];
        if (int r = dofs.reduced(be.v[static_cast<std::size_t>(a)], 0); r >= 0) rhs[r] += w * g.x;
        if (int r = dofs.reduced(be.v[static_cast<std::size_t>(a)], 1); r >= 0) rhs[r] += w * g.y;
      }
    }
  }
  return rhs;
}

Vector assemble_eigenstrain_load(const Mesh& mesh, const Vector& phi_in, const MaterialModel& model,
                                 const DofMap& dofs) {
  Vector rhs = Vector::Zero(dofs.num_free());
  if (!model.has_eigenstrain()) return rhs;
  Vector phi = checked_phase(phi_in, mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    auto el = p1_element(mesh, t);
    Sym2 s;
    for (const auto& q : quad::kDegree4) {
      double p = interp(phi, tri, q.bary);
      s = s + q.weight * model.apply_C(p, model.eigenstrain(p));
    }
    scatter_stress(el, tri, s, el.area, dofs, rhs);
  }
  return rhs;
}

Vector assemble_dC_load(const Mesh& mesh, const Vector& phi_in, const MaterialModel& model, const Vector& u,
                        const Vector& direction, const DofMap& dofs) {
  Vector phi = checked_phase(phi_in, mesh.num_vertices());
  if (direction.size() != mesh.num_vertices()) throw InvalidInput("direction size does not match mesh");
  if (u.size() != 2 * mesh.num_vertices()) throw InvalidInput("displacement size does not match mesh");
  Vector rhs = Vector::Zero(dofs.num_free());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    auto el = p1_element(mesh, t);
    Sym2 eu = element_strain(el, tri, u);
    Sym2 s;
    for (const auto& q : quad::kDegree4)
      s = s + (q.weight * interp(direction, tri, q.bary)) * model.apply_dC(interp(phi, tri, q.bary), eu);
    scatter_stress(el, tri, s, -el.area, dofs, rhs);
  }
  return rhs;
}

LinearSystem assemble_state_system(const Mesh& mesh, const Vector& phi, const MaterialModel& model,
                                   const LoadSpec& loads) {
  if (mesh.count_edges(BoundaryTag::Dirichlet) == 0) throw InvalidInput("no Dirichlet boundary edges");
  DofMap dofs(mesh);
  SparseMatrix k = assemble_stiffness(mesh, phi, model, dofs);
  Vector rhs = assemble_external_load(mesh, loads, dofs) + assemble_eigenstrain_load(mesh, phi, model, dofs);
  return {std::move(k), std::move(rhs), std::move(dofs)};
}

ElasticityOperator::ElasticityOperator(const Mesh& mesh, const Vector& phi, const MaterialModel& model,
                                       LinearSolverOptions options)
    : mesh_(&mesh),
      phi_(checked_phase(phi, mesh.num_vertices())),
      model_(&model),
      dofs_(mesh),
      solver_((mesh.count_edges(BoundaryTag::Dirichlet) > 0
                   ? assemble_stiffness(mesh, phi_, model, dofs_)
                   : throw InvalidInput("no Dirichlet boundary edges")),
              options) {}

Vector ElasticityOperator::solve(const Vector& rhs, const Vector* guess_full) const {
  if (guess_full) {
    Vector g = dofs_.restrict(*guess_full);
    return dofs_.expand(solver_.solve(rhs, &g));
  }
  return dofs_.expand(solver_.solve(rhs));
}

Vector ElasticityOperator::state(const LoadSpec& loads, const Vector* guess) const {
  Vector rhs = assemble_external_load(*mesh_, loads, dofs_) + assemble_eigenstrain_load(*mesh_, phi_, *model_, dofs_);
  return solve(rhs, guess);
}

Vector ElasticityOperator::adjoint(const ObjectiveSpec& objective, const LoadSpec& loads, const Vector& u) const {
  return solve(adjoint_load(*mesh_, objective, loads, u, dofs_));
}

Vector ElasticityOperator::linearized(const Vector& u, const Vector& direction, const LoadSpec* loads) const {
  Vector rhs = assemble_dC_load(*mesh_, phi_, *model_, u, direction, dofs_);
  if (loads) rhs += assemble_external_load(*mesh_, *loads, dofs_);
  return solve(rhs);
}

double ElasticityOperator::energy_norm(const Vector& w_full) const {
  Vector w = dofs_.restrict(w_full);
  return std::sqrt(std::max(0.0, w.dot(solver_.matrix() * w)));
}

Vector adjoint_load(const Mesh& mesh, const ObjectiveSpec& objective, const LoadSpec& loads, const Vector& u,
                    const DofMap& dofs) {
  if (objective.is_compliance()) return assemble_external_load(mesh, loads, dofs);
  const auto& tr = std::get<objective_kind::Tracking>(objective.kind);
  if (u.size() != 2 * mesh.num_vertices()) throw InvalidInput("displacement size does not match mesh");
  // Consistent mass action on c (u - u_target), u_target interpolated nodally.
  Vector diff = u;
  if (tr.target)
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      Vec2 ut = tr.target(mesh.vertex(v));
      diff[2 * v] -= ut.x;
      diff[2 * v + 1] -= ut.y;
    }
  Vector rhs = Vector::Zero(dofs.num_free());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    double a = mesh.area(t);
    for (int i = 0; i < 3; ++i)
      for (int c = 0; c < 2; ++c) {
        int r = dofs.reduced(tri[static_cast<std::size_t>(i)], c);
        if (r < 0) continue;
        for (int j = 0; j < 3; ++j)
          rhs[r] += tr.weight * a * (i == j ? 1.0 / 6.0 : 1.0 / 12.0) * diff[2 * tri[static_cast<std::size_t>(j)] + c];
      }
  }
  return rhs;
}

Vector solve_state(const Mesh& mesh, const Vector& phi, const MaterialModel& model, const LoadSpec& loads,
                   LinearSolverOptions options) {
  return ElasticityOperator(mesh, phi, model, options).state(loads);
}

Vector solve_adjoint(const Mesh& mesh, const Vector& phi, const MaterialModel& model, const Vector& u,
                     const ObjectiveSpec& objective, const LoadSpec& loads, LinearSolverOptions options) {
  return ElasticityOperator(mesh, phi, model, options).adjoint(objective, loads, u);
}

Vector solve_linearized_state(const Mesh& mesh, const Vector& phi, const MaterialModel& model, const Vector& u,
                              const Vector& direction, const LoadSpec* loads, LinearSolverOptions options) {
  return ElasticityOperator(mesh, phi, model, options).linearized(u, direction, loads);
}

}  // namespace pfto
