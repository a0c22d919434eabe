#include "helpers.hpp"
#include "oracles.hpp"
#include "pfto/objective.hpp"
#include "pfto/projection.hpp"

#include <doctest.h>

#include <random>

using namespace pfto;

namespace {

SparseMatrix sparse(const Eigen::MatrixXd& a) { return a.sparseView(); }

Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = u(rng);
  return b * b.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

struct Instance {
  Eigen::MatrixXd A;
  Vector anchor, g, m;
  double zeta = 1.0, V = 0.0;
};

Instance random_instance(int n, std::mt19937_64& rng, bool volume) {
  std::uniform_real_distribution<double> u(-1, 1), pos(0.2, 1.0), scale(0.5, 20.0);
  Instance in;
  in.A = random_spd(n, rng);
  in.anchor.resize(n);
  for (int i = 0; i < n; ++i) in.anchor[i] = 0.8 * u(rng);
  in.g.resize(n);
  double s = scale(rng);
  for (int i = 0; i < n; ++i) in.g[i] = s * u(rng);
  in.zeta = pos(rng);
  if (volume) {
    in.m.resize(n);
    for (int i = 0; i < n; ++i) in.m[i] = pos(rng);
    in.V = in.m.dot(in.anchor);
  }
  return in;
}

}  // namespace

TEST_CASE("zero gradient returns the anchor") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 4) * 2.0;
  Vector anchor(4);
  anchor << 0.1, -0.5, 1.0, 0.3;
  Vector m = Vector::Ones(4);
  ProjectionResult r = solve_projection(Metric(sparse(A)), anchor, Vector::Zero(4), 1.0, m.dot(anchor), m);
  CHECK((r.y - anchor).norm() < 1e-14);
  CHECK(std::abs(r.lambda) < 1e-14);
  CHECK(r.mu.norm() < 1e-14);
}

TEST_CASE("three-node example") {
  Vector g(3);
  g << 10, 0, -10;
  ProjectionResult r =
      solve_projection(Metric(sparse(Eigen::MatrixXd::Identity(3, 3))), Vector::Zero(3), g, 1.0, 0.0, Vector::Ones(3));
  CHECK(r.y[0] == -1.0);
  CHECK(r.y[1] == doctest::Approx(0.0).scale(1e-14));
  CHECK(r.y[2] == 1.0);
  CHECK(r.active == ActiveSet{-1, 0, 1});
  auto ref = oracle::enumerate_qp(Eigen::MatrixXd::Identity(3, 3), Vector::Zero(3), g, Vector::Ones(3), 0.0);
  REQUIRE(ref);
  CHECK((ref->y - r.y).norm() < 1e-12);
  CHECK(r.lambda == doctest::Approx(ref->lambda).scale(1e-12));
}

TEST_CASE("scalar problem without a volume row") {
  Eigen::MatrixXd A(1, 1);
  A << 2.0;
  Vector g(1);
  g << -50.0;
  ProjectionResult r = solve_projection(Metric(sparse(A)), Vector::Zero(1), g, 1.0, 0.0, Vector());
  CHECK(r.y[0] == 1.0);
  CHECK(r.iterations <= 2);
  CHECK(r.mu[0] > 0.0);
}

TEST_CASE("random instances against the enumeration oracle") {
  std::mt19937_64 rng(42);
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + k % 8;
    const bool volume = k % 5 != 0 && n > 1;
    Instance in = random_instance(n, rng, volume);
    Metric metric(sparse(in.A));
    ProjectionResult r = solve_projection(metric, in.anchor, in.g, in.zeta, in.V, in.m);
    auto ref = oracle::enumerate_qp(in.A, in.anchor, in.zeta * in.g, in.m, in.V);
    REQUIRE(ref);
    CHECK((r.y - ref->y).cwiseAbs().maxCoeff() <= 1e-8);
    if (volume) CHECK(r.lambda == doctest::Approx(ref->lambda).epsilon(1e-7).scale(1.0));
    CHECK((r.mu - ref->mu).cwiseAbs().maxCoeff() <= 1e-7 * (1.0 + ref->mu.cwiseAbs().maxCoeff()));
    CHECK(projection_kkt_residual(metric, in.anchor, in.g, in.zeta, in.V, in.m, r) <=
          1e-10 * (1.0 + (in.zeta * in.g).norm()));
    // feasibility and complementarity
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(r.y[i]) <= 1.0);
      if (r.active[i] == 1) CHECK((r.y[i] == 1.0 && r.mu[i] >= 0.0));
      if (r.active[i] == -1) CHECK((r.y[i] == -1.0 && r.mu[i] <= 0.0));
      if (r.active[i] == 0) CHECK(r.mu[i] == 0.0);
    }
    if (volume) CHECK(std::abs(in.m.dot(r.y) - in.V) <= 1e-10 * in.m.sum());

    // warm start from the optimal sets: one iteration
    ProjectionResult again = solve_projection(metric, in.anchor, in.g, in.zeta, in.V, in.m, {}, &r.active);
    CHECK(again.iterations == 1);
    // idempotence: projecting the result with zero gradient returns it
    const Vector& y = r.y;
    ProjectionResult idem = solve_projection(metric, y, Vector::Zero(n), 1.0, in.m.size() ? in.m.dot(y) : 0.0, in.m);
    CHECK((idem.y - y).norm() < 1e-12);
  }
}

TEST_CASE("PDAS on M-matrix instances settles within n iterations") {
  // tridiagonal M-matrix metric, no volume row: PDAS is monotone here
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 20; ++k) {
    const int n = 12;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      A(i, i) = 2.0 + 0.1 * std::abs(u(rng));
      if (i + 1 < n) A(i, i + 1) = A(i + 1, i) = -1.0;
    }
    Vector anchor(n), g(n);
    for (int i = 0; i < n; ++i) {
      anchor[i] = 0.5 * u(rng);
      g[i] = 5.0 * u(rng);
    }
    ProjectionResult r = solve_projection(Metric(sparse(A)), anchor, g, 1.0, 0.0, Vector());
    CHECK_FALSE(r.fallback_used);
    CHECK(r.iterations <= n + 1);
    auto ref = oracle::enumerate_qp(A, anchor, g, Vector(), 0.0);
    REQUIRE(ref);
    CHECK((r.y - ref->y).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("projection input validation") {
  Metric id(sparse(Eigen::MatrixXd::Identity(3, 3)));
  Vector m = Vector::Ones(3);
  CHECK_THROWS_AS(solve_projection(id, Vector::Zero(3), Vector::Ones(3), 1.0, 3.5, m), InvalidInput);
  CHECK_THROWS_AS(solve_projection(id, Vector::Zero(3), Vector::Ones(3), 0.0, 0.0, m), InvalidInput);
  CHECK_THROWS_AS(solve_projection(id, Vector::Constant(3, 0.5), Vector::Ones(3), 1.0, 0.0, m), InvalidInput);
  CHECK_THROWS_AS(solve_projection(id, Vector::Constant(3, 1.5), Vector::Ones(3), 1.0, 4.5, m), InvalidInput);
}

TEST_CASE("BFGS metric") {
  std::mt19937_64 rng(8);
  const int n = 6;
  Eigen::MatrixXd A0 = random_spd(n, rng);
  Eigen::MatrixXd H = random_spd(n, rng);

  SUBCASE("curvature safeguard") {
    Metric a(sparse(A0));
    Vector s = testing::random_field(n, rng, -1, 1);
    CHECK_FALSE(a.bfgs_update(s, -s));
    CHECK(a.num_pairs() == 0);
    Vector v = testing::random_field(n, rng, -1, 1);
    CHECK((a.apply(v) - A0 * v).norm() < 1e-12);
  }
  SUBCASE("secant equation and symmetry") {
    Metric a(sparse(A0));
    for (int k = 0; k < 4; ++k) {
      Vector s = testing::random_field(n, rng, -1, 1);
      Vector y = H * s;
      REQUIRE(a.bfgs_update(s, y));
      CHECK(a.apply(s).dot(s) == doctest::Approx(y.dot(s)).epsilon(1e-10));
      CHECK((a.apply(s) - y).norm() <= 1e-10 * y.norm());
    }
    for (int k = 0; k < 10; ++k) {
      Vector v = testing::random_field(n, rng, -1, 1), w = testing::random_field(n, rng, -1, 1);
      CHECK(a.inner(v, w) == doctest::Approx(a.inner(w, v)).epsilon(1e-10));
      CHECK(a.inner(v, v) > 0.0);
    }
  }
  SUBCASE("exact Hessian recovered after n conjugate steps") {
    Metric a(sparse(A0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    for (int k = 0; k < n; ++k) {
      Vector s = es.eigenvectors().col(k);
      REQUIRE(a.bfgs_update(s, H * s));
    }
    for (int k = 0; k < 5; ++k) {
      Vector v = testing::random_field(n, rng, -1, 1);
      CHECK((a.apply(v) - H * v).norm() <= 1e-9 * (H * v).norm());
    }
  }
  SUBCASE("limited memory") {
    Metric a(sparse(A0));
    a.set_memory(2);
    for (int k = 0; k < 5; ++k) {
      Vector s = testing::random_field(n, rng, -1, 1);
      a.bfgs_update(s, H * s);
    }
    CHECK(a.num_pairs() == 2);
  }
  SUBCASE("projection with a BFGS metric matches the oracle on the dense matrix") {
    Metric a(sparse(A0));
    for (int k = 0; k < 3; ++k) {
      Vector s = testing::random_field(n, rng, -1, 1);
      a.bfgs_update(s, H * s);
    }
    Eigen::MatrixXd dense(n, n);
    for (int j = 0; j < n; ++j) dense.col(j) = a.apply(Vector(Vector::Unit(n, j)));
    for (int k = 0; k < 10; ++k) {
      Instance in = random_instance(n, rng, true);
      ProjectionResult r = solve_projection(a, in.anchor, in.g, in.zeta, in.V, in.m);
      auto ref = oracle::enumerate_qp(dense, in.anchor, in.zeta * in.g, in.m, in.V);
      REQUIRE(ref);
      CHECK((r.y - ref->y).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("second-order metric") {
  Mesh mesh = testing::cantilever_mesh(0.25);
  ScalarForms forms(mesh);
  std::mt19937_64 rng(4);
  const LoadSpec load = LoadSpec::uniform({0, 0}, {0, -250});
  Vector phi = testing::random_field(mesh.num_vertices(), rng, -0.9, 0.9);
  const double gamma = 0.5, eps = 0.1;

  SUBCASE("homogeneous material reduces to the scaled Laplacian") {
    MaterialModel homog = MaterialModel::from_lame(10, 10, 10, 10);
    ElasticityOperator op(mesh, phi, homog);
    Vector u = op.state(load);
    Vector v = testing::random_field(mesh.num_vertices(), rng, -1, 1);
    Vector bv = second_order_metric_action(op, forms, u, gamma, eps, v);
    CHECK((bv - gamma * eps * (forms.laplacian * v)).norm() <= 1e-12 * bv.norm());
  }
  SUBCASE("symmetric pairing") {
    MaterialModel beam = MaterialModel::from_lame(5000, 5000, 10, 10);
    ElasticityOperator op(mesh, phi, beam);
    Vector u = op.state(load);
    for (int k = 0; k < 5; ++k) {
      Vector v = testing::random_field(mesh.num_vertices(), rng, -1, 1);
      Vector w = testing::random_field(mesh.num_vertices(), rng, -1, 1);
      double vw = second_order_metric_action(op, forms, u, gamma, eps, v).dot(w);
      double wv = second_order_metric_action(op, forms, u, gamma, eps, w).dot(v);
      CHECK(std::abs(vw - wv) <= 1e-8 * (std::abs(vw) + std::abs(wv)));
    }
  }
}
