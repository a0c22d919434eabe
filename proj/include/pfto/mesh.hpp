#pragma once

#include "pfto/core.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pfto {

enum class BoundaryTag : std::uint8_t { Free, Dirichlet, Neumann };

const char* to_string(BoundaryTag tag);

/// Oriented boundary segment; the domain lies to the left of v[0] -> v[1].
struct BoundaryEdge {
  std::array<int, 2> v{};
  BoundaryTag tag = BoundaryTag::Free;
};

/// Vertex triple in counterclockwise order. Slot 0 is the newest vertex, so
/// the edge (v[1], v[2]) opposite to it is the refinement edge.
using Triangle = std::array<int, 3>;

/// Conforming triangulation of a polygonal design domain.
///
/// The constructor checks that every triangle has positive signed area and
/// that the boundary edges coincide with the set of edges owned by exactly
/// one triangle. Instances are immutable.
class Mesh {
 public:
  Mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles,
       std::vector<BoundaryEdge> boundary);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary() const { return boundary_; }

  Vec2 vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const Triangle& triangle(int t) const { return triangles_[static_cast<std::size_t>(t)]; }

  double area(int t) const;
  /// Longest edge of triangle t.
  double diameter(int t) const;
  double total_area() const;
  /// Smallest and largest triangle diameter.
  std::array<double, 2> size_range() const;

  /// True for every vertex touched by a Dirichlet-tagged boundary edge.
  std::vector<bool> dirichlet_vertices() const;
  int count_edges(BoundaryTag tag) const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_;
};

using PointPredicate = std::function<bool(Vec2)>;

/// Structured triangulation of [xmin,xmax]x[ymin,ymax]: squares of side at
/// most h, each split along its diagonal. All boundary edges are Free.
Mesh build_rect_mesh(double xmin, double xmax, double ymin, double ymax, double h);

/// Tags boundary edges by evaluating the predicates at edge midpoints.
/// Dirichlet wins where both predicates hold. Throws InvalidInput if no edge
/// ends up Dirichlet.
Mesh tag_boundary(const Mesh& mesh, const PointPredicate& dirichlet,
                  const PointPredicate& neumann);

/// Result of a refinement pass: new mesh and the phase field carried over.
struct RefinedMesh {
  Mesh mesh;
  Vector phi;
};

inline constexpr double kTolPure = 1e-3;

/// Band resolution target: the double-obstacle profile spans pi*eps.
double band_edge_length(double eps, double points_across);

/// Newest-vertex bisection of the triangles flagged in `marked`, with closure
/// so the result stays conforming. `parents` receives, for every created
/// vertex, the endpoints of the bisected edge.
Mesh bisect_marked(const Mesh& mesh, std::span<const char> marked,
                   std::vector<std::array<int, 2>>* parents = nullptr);

/// Refines every triangle that carries diffuse interface (some node with
/// |phi| < 1 - kTolPure, or nodes of both pure phases) until its diameter is at
/// most band_edge_length(eps, points_across). phi is carried by linear
/// interpolation. Already-resolved meshes come back unchanged.
RefinedMesh refine_interface_band(const Mesh& mesh, const Vector& phi, double eps,
                                  double points_across);

/// True when no element carrying interface (purity tolerance `tol_pure`) is
/// coarser than the band target.
bool band_resolved(const Mesh& mesh, const Vector& phi, double eps, double points_across,
                   double tol_pure = kTolPure);

/// Same marking rule, but starting from `base` and sampling the phase field
/// from `sample` at every vertex (used for remeshing onto a fresh mesh).
RefinedMesh refine_interface_band(const Mesh& base, const std::function<double(Vec2)>& sample,
                                  double eps, double points_across);

/// Bucketed point location on a mesh for evaluating P1 fields.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);

  /// Triangle containing p and its barycentric coordinates. Points slightly
  /// outside the mesh snap to the closest triangle.
  std::pair<int, std::array<double, 3>> locate(Vec2 p) const;
  double evaluate(const Vector& nodal, Vec2 p) const;

 private:
  std::array<double, 3> barycentric(int t, Vec2 p) const;

  const Mesh* mesh_;
  Vec2 lo_{}, hi_{};
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// Nodal interpolation of a P1 field from one mesh onto the vertices of another.
Vector transfer_field(const Mesh& from, const Vector& values, const Mesh& to);

}  // namespace pfto
