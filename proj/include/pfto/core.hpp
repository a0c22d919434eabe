#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pfto {

using Vector = Eigen::VectorXd;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Precondition violated by caller-supplied data.
class InvalidInput : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_input"; }
};

/// An iterative or direct solver failed to deliver a solution.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, double residual = NAN)
      : Error(what), residual_(residual) {}
  const char* kind() const noexcept override { return "solver_failure"; }
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Phase field left the box [-1, 1]; the obstacle potential is +infinity there.
class InfeasiblePhase : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "infeasible_phase"; }
};

inline constexpr double kTolBox = 1e-12;

}  // namespace pfto
