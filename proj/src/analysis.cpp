#include "pfto/analysis.hpp"

#include "pfto/objective.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pfto {

Vector threshold_sharp(const Vector& phi) {
  return phi.unaryExpr([](double p) { return p > 0.0 ? 1.0 : -1.0; });
}

namespace {

// int max(d, 0) over a triangle for the linear function with vertex values d.
double positive_part(std::array<double, 3> d, double area) {
  std::sort(d.begin(), d.end(), std::greater<>());
  const double mean = area * (d[0] + d[1] + d[2]) / 3.0;
  if (d[2] >= 0.0) return mean;
  if (d[0] <= 0.0) return 0.0;
  if (d[1] <= 0.0) return area * d[0] * d[0] * d[0] / (3.0 * (d[0] - d[1]) * (d[0] - d[2]));
  // exactly one negative vertex: subtract its negative part
  return mean - area * d[2] * d[2] * d[2] / (3.0 * (d[2] - d[0]) * (d[2] - d[1]));
}

}  // namespace

double l1_distance(const Mesh& mesh, const Vector& a, const Vector& b) {
  if (a.size() != mesh.num_vertices() || b.size() != mesh.num_vertices())
    throw InvalidInput("fields do not match the mesh");
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    std::array<double, 3> d{a[tri[0]] - b[tri[0]], a[tri[1]] - b[tri[1]], a[tri[2]] - b[tri[2]]};
    double area = mesh.area(t);
    sum += positive_part(d, area) + positive_part({-d[0], -d[1], -d[2]}, area);
  }
  return sum;
}

Vector recovery_profile(const Mesh& mesh, const std::function<double(Vec2)>& signed_distance, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
  Vector phi(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    double s = signed_distance(mesh.vertex(i)) / eps;
    phi[i] = std::abs(s) >= 0.5 * std::numbers::pi ? (s > 0 ? 1.0 : -1.0) : std::sin(s);
  }
  return phi;
}

double profile_error_model(double eps, double e0) {
  return 2.0 * (std::numbers::pi - 2.0) / std::numbers::pi * e0 * eps;
}

double profile_l1_error_1d(double eps, int panels) {
  if (!(eps > 0.0) || panels < 1) throw InvalidInput("eps and panel count must be positive");
  using boost::math::quadrature::gauss;
  const double half = 0.5 * std::numbers::pi * eps;
  const double w = half / panels;
  auto f = [eps](double x) { return std::abs(std::sin(x / eps) - (x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0))); };
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    sum += gauss<double, 10>::integrate(f, p * w, (p + 1) * w);
    sum += gauss<double, 10>::integrate(f, -(p + 1) * w, -p * w);
  }
  return sum;
}

double extrapolate_e0(std::vector<std::pair<double, double>> records) {
  if (records.empty()) throw InvalidInput("extrapolation needs at least one record");
  if (records.size() == 1) return records.front().second;
  std::sort(records.begin(), records.end());
  std::size_t n = std::max<std::size_t>(2, (records.size() + 1) / 2);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), 2);
  Vector rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    a(static_cast<Eigen::Index>(i), 0) = 1.0;
    a(static_cast<Eigen::Index>(i), 1) = records[i].first;
    rhs[static_cast<Eigen::Index>(i)] = records[i].second;
  }
  Vector coef = a.colPivHouseholderQr().solve(rhs);
  return coef[0];
}

double perimeter_estimate(double energy) { return 2.0 / std::numbers::pi * energy; }

SweepResult epsilon_sweep(const Problem& problem, std::shared_ptr<const Mesh> mesh, const Vector& phi0,
                          const std::vector<double>& eps_list, const VmpgConfig& config,
                          const SweepObserver& observer) {
  if (eps_list.empty()) throw InvalidInput("eps list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw InvalidInput("eps values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw InvalidInput("eps list must be strictly decreasing");
  }
  SweepResult out;
  std::shared_ptr<const Mesh> start_mesh = std::move(mesh);
  Vector start_phi = phi0;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    Problem p = problem;
    p.objective.eps = eps_list[i];
    try {
      MinimizeResult r = minimize(p, start_mesh, start_phi, config, [&](const IterationRecord& rec, const Design& d) {
        if (observer) observer(i, rec, d);
      });
      SweepRecord rec;
      rec.eps = eps_list[i];
      rec.j = r.design.j;
      rec.energy = ginzburg_landau(*r.design.mesh, r.design.phi, eps_list[i]);
      rec.lambda = r.design.lambda;
      rec.h_min = r.design.mesh->size_range()[0];
      rec.iterations = static_cast<long>(r.history.size());
      rec.reason = r.reason;
      out.records.push_back(rec);
      start_mesh = r.design.mesh;
      start_phi = r.design.phi;
      out.designs.push_back(std::move(r.design));
    } catch (const Error& e) {
      out.error = std::string(e.kind()) + ": " + e.what();
      break;
    }
  }
  if (out.records.empty()) return out;

  const Design& finest = out.designs.back();
  Vector sharp = threshold_sharp(finest.phi);
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    const Design& d = out.designs[i];
    Vector on_finest = d.mesh == finest.mesh ? d.phi : transfer_field(*d.mesh, d.phi, *finest.mesh);
    out.records[i].l1_error = l1_distance(*finest.mesh, on_finest, sharp);
    pts.emplace_back(out.records[i].eps, out.records[i].energy);
  }
  out.e0 = extrapolate_e0(pts);
  return out;
}

}  // namespace pfto
