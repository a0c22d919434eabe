#include "pfto/fe.hpp"

#include <vector>

namespace pfto {

P1Element p1_element(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangle(t);
  Vec2 a = mesh.vertex(tri[0]), b = mesh.vertex(tri[1]), c = mesh.vertex(tri[2]);
  double area2 = cross(b - a, c - a);
  // grad psi_k is the inward normal of the opposite edge scaled by 1/(2 area).
  auto g = [area2](Vec2 p, Vec2 q) { return Vec2{-(q.y - p.y) / area2, (q.x - p.x) / area2}; };
  return {{g(b, c), g(c, a), g(a, b)}, 0.5 * area2};
}

SparseMatrix scalar_laplacian(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(9 * mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    auto el = p1_element(mesh, t);
    const auto& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], el.area * dot(el.grad[i], el.grad[j]));
  }
  SparseMatrix k(mesh.num_vertices(), mesh.num_vertices());
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

SparseMatrix scalar_mass(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(9 * mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    double a = mesh.area(t);
    const auto& tri = mesh.triangle(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], a * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
  }
  SparseMatrix m(mesh.num_vertices(), mesh.num_vertices());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Vector volume_weights(const Mesh& mesh) {
  Vector w = Vector::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    double a3 = mesh.area(t) / 3.0;
    for (int v : mesh.triangle(t)) w[v] += a3;
  }
  return w;
}

ScalarForms::ScalarForms(const Mesh& mesh)
    : laplacian(scalar_laplacian(mesh)), mass(scalar_mass(mesh)), volume(volume_weights(mesh)),
      domain_area(mesh.total_area()) {}

}  // namespace pfto
