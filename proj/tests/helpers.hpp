#pragma once

#include "pfto/config.hpp"
#include "pfto/mesh.hpp"

#include <cmath>
#include <random>

namespace testing {

/// (-1,1)x(0,1) with the cantilever supports: clamped at x = -1, load
/// support {x >= 0.75, y = 0}.
inline pfto::Mesh cantilever_mesh(double h) {
  auto d = pfto::BoxPredicate::parse("x == -1");
  auto n = pfto::BoxPredicate::parse("x >= 0.75 & y == 0");
  return pfto::tag_boundary(pfto::build_rect_mesh(-1, 1, 0, 1, h), d, n);
}

inline pfto::Vector random_field(int n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  pfto::Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

/// Smooth random nodal field: a few random Fourier modes on the mesh vertices.
inline pfto::Vector smooth_field(const pfto::Mesh& mesh, std::mt19937_64& rng, int modes = 4) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<double, 4>> c;
  for (int k = 0; k < modes; ++k) c.push_back({u(rng), 1.0 + 3.0 * std::abs(u(rng)), 1.0 + 3.0 * std::abs(u(rng)), 3.0 * u(rng)});
  pfto::Vector v(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    auto p = mesh.vertex(i);
    double s = 0.0;
    for (auto& m : c) s += m[0] * std::sin(m[1] * p.x + m[2] * p.y + m[3]);
    v[i] = s;
  }
  return v;
}

}  // namespace testing
