#include "pfto/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace pfto {

namespace {

std::uint64_t edge_key(int a, int b) {
  auto lo = static_cast<std::uint64_t>(std::min(a, b));
  auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

double signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

}  // namespace

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Free: return "free";
    case BoundaryTag::Dirichlet: return "dirichlet";
    case BoundaryTag::Neumann: return "neumann";
  }
  return "?";
}

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
           std::vector<BoundaryEdge> boundary)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), boundary_(std::move(boundary)) {
  const int nv = num_vertices();
  if (triangles_.empty()) throw InvalidInput("mesh has no triangles");

  std::unordered_map<std::uint64_t, int> edge_count;
  edge_count.reserve(triangles_.size() * 3);
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri)
      if (v < 0 || v >= nv) throw InvalidInput("triangle references unknown vertex");
    if (!(signed_area(vertex(tri[0]), vertex(tri[1]), vertex(tri[2])) > 0.0)) {
      std::ostringstream os;
      os << "triangle " << t << " has non-positive signed area";
      throw InvalidInput(os.str());
    }
    for (int e = 0; e < 3; ++e) ++edge_count[edge_key(tri[e], tri[(e + 1) % 3])];
  }

  std::size_t outer = 0;
  for (const auto& [key, count] : edge_count) {
    if (count > 2) throw InvalidInput("edge shared by more than two triangles");
    if (count == 1) ++outer;
  }
  if (outer != boundary_.size())
    throw InvalidInput("boundary edge list does not tile the mesh boundary");
  for (const auto& be : boundary_) {
    auto it = edge_count.find(edge_key(be.v[0], be.v[1]));
    if (it == edge_count.end() || it->second != 1)
      throw InvalidInput("tagged boundary edge is not on the mesh boundary");
  }
}

double Mesh::area(int t) const {
  const auto& tri = triangle(t);
  return signed_area(vertex(tri[0]), vertex(tri[1]), vertex(tri[2]));
}

double Mesh::diameter(int t) const {
  const auto& tri = triangle(t);
  double d = 0.0;
  for (int e = 0; e < 3; ++e) d = std::max(d, norm(vertex(tri[(e + 1) % 3]) - vertex(tri[e])));
  return d;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += area(t);
  return a;
}

std::array<double, 2> Mesh::size_range() const {
  std::array<double, 2> r{std::numeric_limits<double>::infinity(), 0.0};
  for (int t = 0; t < num_triangles(); ++t) {
    double d = diameter(t);
    r[0] = std::min(r[0], d);
    r[1] = std::max(r[1], d);
  }
  return r;
}

std::vector<bool> Mesh::dirichlet_vertices() const {
  std::vector<bool> mask(vertices_.size(), false);
  for (const auto& be : boundary_)
    if (be.tag == BoundaryTag::Dirichlet) {
      mask[static_cast<std::size_t>(be.v[0])] = true;
      mask[static_cast<std::size_t>(be.v[1])] = true;
    }
  return mask;
}

int Mesh::count_edges(BoundaryTag tag) const {
  return static_cast<int>(
      std::count_if(boundary_.begin(), boundary_.end(), [tag](const BoundaryEdge& e) { return e.tag == tag; }));
}

Mesh build_rect_mesh(double xmin, double xmax, double ymin, double ymax, double h) {
  if (!(xmax > xmin) || !(ymax > ymin)) throw InvalidInput("rectangle extent must be positive");
  const double lx = xmax - xmin;
  const double ly = ymax - ymin;
  if (!(h > 0.0) || h > std::min(lx, ly)) throw InvalidInput("mesh size h must lie in (0, min(width, height)]");

  // Tolerate h that divides the extent up to rounding.
  const int nx = static_cast<int>(std::ceil(lx / h - 1e-9));
  const int ny = static_cast<int>(std::ceil(ly / h - 1e-9));
  const double dx = lx / nx;
  const double dy = ly / ny;

  std::vector<Vec2> verts;
  verts.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      verts.push_back({i == nx ? xmax : xmin + i * dx, j == ny ? ymax : ymin + j * dy});

  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Triangle> tris;
  tris.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      // Right-angle corner first: the diagonal is the refinement edge of both halves.
      tris.push_back({b, c, a});
      tris.push_back({d, a, c});
    }

  std::vector<BoundaryEdge> bnd;
  for (int i = 0; i < nx; ++i) bnd.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::Free});
  for (int j = 0; j < ny; ++j) bnd.push_back({{id(nx, j), id(nx, j + 1)}, BoundaryTag::Free});
  for (int i = nx; i > 0; --i) bnd.push_back({{id(i, ny), id(i - 1, ny)}, BoundaryTag::Free});
  for (int j = ny; j > 0; --j) bnd.push_back({{id(0, j), id(0, j - 1)}, BoundaryTag::Free});

  return Mesh(std::move(verts), std::move(tris), std::move(bnd));
}

Mesh tag_boundary(const Mesh& mesh, const PointPredicate& dirichlet, const PointPredicate& neumann) {
  std::vector<BoundaryEdge> bnd = mesh.boundary();
  int n_dirichlet = 0;
  for (auto& be : bnd) {
    Vec2 mid = 0.5 * (mesh.vertex(be.v[0]) + mesh.vertex(be.v[1]));
    if (dirichlet && dirichlet(mid)) {
      be.tag = BoundaryTag::Dirichlet;
      ++n_dirichlet;
    } else if (neumann && neumann(mid)) {
      be.tag = BoundaryTag::Neumann;
    } else {
      be.tag = BoundaryTag::Free;
    }
  }
  if (n_dirichlet == 0) throw InvalidInput("Dirichlet boundary is empty; the state equation would be singular");
  return Mesh(mesh.vertices(), mesh.triangles(), std::move(bnd));
}

double band_edge_length(double eps, double points_across) {
  return std::numbers::pi * eps / points_across;
}

Mesh bisect_marked(const Mesh& mesh, std::span<const char> marked,
                   std::vector<std::array<int, 2>>* parents) {
  const auto& tris = mesh.triangles();
  std::unordered_set<std::uint64_t> split_edges;
  for (std::size_t t = 0; t < tris.size(); ++t)
    if (marked[t]) split_edges.insert(edge_key(tris[t][1], tris[t][2]));

  // Closure: a triangle with any split edge must also split its refinement edge.
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& tri : tris) {
      auto ref = edge_key(tri[1], tri[2]);
      if (split_edges.count(ref)) continue;
      if (split_edges.count(edge_key(tri[0], tri[1])) || split_edges.count(edge_key(tri[2], tri[0]))) {
        split_edges.insert(ref);
        changed = true;
      }
    }
  }

  std::vector<Vec2> verts = mesh.vertices();
  std::unordered_map<std::uint64_t, int> midpoint;
  if (parents) parents->clear();
  auto mid_of = [&](int a, int b) {
    auto key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    int id = static_cast<int>(verts.size());
    verts.push_back(0.5 * (verts[static_cast<std::size_t>(a)] + verts[static_cast<std::size_t>(b)]));
    midpoint.emplace(key, id);
    if (parents) parents->push_back({a, b});
    return id;
  };

  std::vector<Triangle> out;
  out.reserve(tris.size() + 4 * split_edges.size());
  auto bisect = [&](auto&& self, const Triangle& t) -> void {
    if (!split_edges.count(edge_key(t[1], t[2]))) {
      out.push_back(t);
      return;
    }
    int m = mid_of(t[1], t[2]);
    self(self, Triangle{m, t[0], t[1]});
    self(self, Triangle{m, t[2], t[0]});
  };
  for (const auto& tri : tris) bisect(bisect, tri);

  std::vector<BoundaryEdge> bnd;
  bnd.reserve(mesh.boundary().size() + split_edges.size());
  for (const auto& be : mesh.boundary()) {
    if (split_edges.count(edge_key(be.v[0], be.v[1]))) {
      int m = mid_of(be.v[0], be.v[1]);
      bnd.push_back({{be.v[0], m}, be.tag});
      bnd.push_back({{m, be.v[1]}, be.tag});
    } else {
      bnd.push_back(be);
    }
  }
  return Mesh(std::move(verts), std::move(out), std::move(bnd));
}

namespace {

bool carries_interface(const Triangle& tri, const Vector& phi, double tol_pure = kTolPure) {
  bool has_plus = false, has_minus = false;
  for (int v : tri) {
    double p = phi[v];
    if (std::abs(p) < 1.0 - tol_pure) return true;
    (p > 0 ? has_plus : has_minus) = true;
  }
  return has_plus && has_minus;
}

template <class NewValue>
RefinedMesh refine_loop(Mesh mesh, Vector phi, double target, NewValue&& new_value) {
  // Each pass shrinks marked diameters by at least sqrt(2); 200 passes is far
  // beyond anything reachable in double precision.
  for (int pass = 0; pass < 200; ++pass) {
    std::vector<char> marked(static_cast<std::size_t>(mesh.num_triangles()), 0);
    bool any = false;
    for (int t = 0; t < mesh.num_triangles(); ++t)
      if (mesh.diameter(t) > target * (1.0 + 1e-12) && carries_interface(mesh.triangle(t), phi)) {
        marked[static_cast<std::size_t>(t)] = 1;
        any = true;
      }
    if (!any) break;
    std::vector<std::array<int, 2>> parents;
    Mesh refined = bisect_marked(mesh, marked, &parents);
    Vector next(refined.num_vertices());
    next.head(mesh.num_vertices()) = phi;
    for (std::size_t k = 0; k < parents.size(); ++k) {
      int id = mesh.num_vertices() + static_cast<int>(k);
      next[id] = new_value(phi, parents[k], refined.vertex(id));
    }
    mesh = std::move(refined);
    phi = std::move(next);
  }
  return {std::move(mesh), std::move(phi)};
}

void check_band_args(double eps, double points_across) {
  if (!(eps > 0.0)) throw InvalidInput("interface parameter eps must be positive");
  if (!(points_across >= 2.0)) throw InvalidInput("points across the interface must be at least 2");
}

}  // namespace

bool band_resolved(const Mesh& mesh, const Vector& phi, double eps, double points_across, double tol_pure) {
  check_band_args(eps, points_across);
  if (phi.size() != mesh.num_vertices()) throw InvalidInput("phase field size does not match mesh");
  const double target = band_edge_length(eps, points_across);
  for (int t = 0; t < mesh.num_triangles(); ++t)
    if (mesh.diameter(t) > target * (1.0 + 1e-12) && carries_interface(mesh.triangle(t), phi, tol_pure)) return false;
  return true;
}

RefinedMesh refine_interface_band(const Mesh& mesh, const Vector& phi, double eps, double points_across) {
  check_band_args(eps, points_across);
  if (phi.size() != mesh.num_vertices()) throw InvalidInput("phase field size does not match mesh");
  return refine_loop(mesh, phi, band_edge_length(eps, points_across),
                     [](const Vector& p, std::array<int, 2> e, Vec2) { return 0.5 * (p[e[0]] + p[e[1]]); });
}

RefinedMesh refine_interface_band(const Mesh& base, const std::function<double(Vec2)>& sample, double eps,
                                  double points_across) {
  check_band_args(eps, points_across);
  Vector phi(base.num_vertices());
  for (int i = 0; i < base.num_vertices(); ++i) phi[i] = sample(base.vertex(i));
  return refine_loop(base, std::move(phi), band_edge_length(eps, points_across),
                     [&sample](const Vector&, std::array<int, 2>, Vec2 x) { return sample(x); });
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  lo_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  hi_ = {-lo_.x, -lo_.y};
  for (const auto& v : mesh.vertices()) {
    lo_ = {std::min(lo_.x, v.x), std::min(lo_.y, v.y)};
    hi_ = {std::max(hi_.x, v.x), std::max(hi_.y, v.y)};
  }
  const double w = hi_.x - lo_.x, h = hi_.y - lo_.y;
  const double cells = std::max(1.0, std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0));
  const double aspect = w / h;
  nx_ = std::max(1, static_cast<int>(cells * std::sqrt(aspect)));
  ny_ = std::max(1, static_cast<int>(cells / std::sqrt(aspect)));
  buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
  auto cell = [&](double v, double l, double span, int n) {
    return std::clamp(static_cast<int>((v - l) / span * n), 0, n - 1);
  };
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    double x0 = hi_.x, x1 = lo_.x, y0 = hi_.y, y1 = lo_.y;
    for (int v : tri) {
      Vec2 p = mesh.vertex(v);
      x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    for (int j = cell(y0, lo_.y, h, ny_); j <= cell(y1, lo_.y, h, ny_); ++j)
      for (int i = cell(x0, lo_.x, w, nx_); i <= cell(x1, lo_.x, w, nx_); ++i)
        buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(t);
  }
}

std::array<double, 3> PointLocator::barycentric(int t, Vec2 p) const {
  const auto& tri = mesh_->triangle(t);
  Vec2 a = mesh_->vertex(tri[0]), b = mesh_->vertex(tri[1]), c = mesh_->vertex(tri[2]);
  double area2 = cross(b - a, c - a);
  double l1 = cross(c - b, p - b) / area2;
  double l2 = cross(a - c, p - c) / area2;
  return {l1, l2, 1.0 - l1 - l2};
}

std::pair<int, std::array<double, 3>> PointLocator::locate(Vec2 p) const {
  const double w = hi_.x - lo_.x, h = hi_.y - lo_.y;
  int i = std::clamp(static_cast<int>((p.x - lo_.x) / w * nx_), 0, nx_ - 1);
  int j = std::clamp(static_cast<int>((p.y - lo_.y) / h * ny_), 0, ny_ - 1);
  int best = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  std::array<double, 3> best_bc{};
  auto scan = [&](const std::vector<int>& cands) {
    for (int t : cands) {
      auto bc = barycentric(t, p);
      double m = std::min({bc[0], bc[1], bc[2]});
      if (m > best_min) {
        best_min = m;
        best = t;
        best_bc = bc;
      }
    }
  };
  scan(buckets_[static_cast<std::size_t>(j * nx_ + i)]);
  if (best_min < -1e-10) {
    std::vector<int> all(static_cast<std::size_t>(mesh_->num_triangles()));
    for (int t = 0; t < mesh_->num_triangles(); ++t) all[static_cast<std::size_t>(t)] = t;
    scan(all);
  }
  if (best_min < 0.0) {
    // Snap onto the triangle: clip negative weights and renormalize.
    double s = 0.0;
    for (double& l : best_bc) s += (l = std::max(l, 0.0));
    for (double& l : best_bc) l /= s;
  }
  return {best, best_bc};
}

double PointLocator::evaluate(const Vector& nodal, Vec2 p) const {
  auto [t, bc] = locate(p);
  const auto& tri = mesh_->triangle(t);
  return bc[0] * nodal[tri[0]] + bc[1] * nodal[tri[1]] + bc[2] * nodal[tri[2]];
}

Vector transfer_field(const Mesh& from, const Vector& values, const Mesh& to) {
  if (values.size() != from.num_vertices()) throw InvalidInput("field size does not match source mesh");
  PointLocator loc(from);
  Vector out(to.num_vertices());
  for (int i = 0; i < to.num_vertices(); ++i) out[i] = loc.evaluate(values, to.vertex(i));
  return out;
}

}  // namespace pfto
