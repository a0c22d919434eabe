#pragma once

#include "pfto/core.hpp"

#include <variant>

namespace pfto {

/// Symmetric 2x2 tensor (strain or stress).
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static Sym2 identity() { return {1.0, 0.0, 1.0}; }
  /// Throws InvalidInput unless a12 == a21 (to 1e-12 relative).
  static Sym2 from_matrix(double a11, double a12, double a21, double a22);

  double trace() const { return xx + yy; }

  friend Sym2 operator+(Sym2 a, Sym2 b) { return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
  friend Sym2 operator-(Sym2 a, Sym2 b) { return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy}; }
  friend Sym2 operator*(double s, Sym2 a) { return {s * a.xx, s * a.xy, s * a.yy}; }
  friend bool operator==(Sym2 a, Sym2 b) = default;
};

/// Frobenius contraction A : B.
inline double ddot(Sym2 a, Sym2 b) { return a.xx * b.xx + 2.0 * a.xy * b.xy + a.yy * b.yy; }

namespace eigenstrain {
struct Zero {};
/// E(phi) = delta * phi * I
struct IsotropicLinear {
  double delta = 0.0;
};
/// E(phi) = delta * phi * diag(-1, 1)
struct DiagonalLinear {
  double delta = 0.0;
};
/// E(phi) = phi * M
struct AffineMatrix {
  Sym2 m;
};
}  // namespace eigenstrain

using EigenstrainSpec = std::variant<eigenstrain::Zero, eigenstrain::IsotropicLinear, eigenstrain::DiagonalLinear,
                                     eigenstrain::AffineMatrix>;

/// Quadratic interpolation weight 0.25(1-d)phi^2 - 0.5(1-d)phi + 0.25(1-d) + d.
/// Equals 1 at phi = -1 and d at phi = +1. Throws for phi outside [-1, 1].
double iota(double delta, double phi);
/// d(iota)/d(phi) = 0.5(1-d)(phi-1).
double diota(double delta, double phi);

/// How the Lame pair is blended between the phases. Both agree at phi = +-1.
///   Printed:  lambda(phi) = iota(dl, phi) lambda2. Concave for dl > 1, so the
///             phi = 0 layer carries most of the stiffer phase's stiffness.
///   Mirrored: lambda(phi) = iota(1/dl, -phi) lambda1. Quadratic with its vertex
///             on the phi = -1 side: convex for dl > 1, soft diffuse layer.
enum class Interpolation { Printed, Mirrored };

const char* to_string(Interpolation mode);

/// Two isotropic materials blended by the phase field. phi = +1 selects
/// material 1 (lambda1 = delta_lambda*lambda2, mu1 = delta_mu*mu2), phi = -1
/// material 2.
class MaterialModel {
 public:
  MaterialModel(double lambda2, double mu2, double delta_lambda, double delta_mu,
                EigenstrainSpec eigen = eigenstrain::Zero{}, Interpolation mode = Interpolation::Printed);

  static MaterialModel from_lame(double lambda1, double mu1, double lambda2, double mu2,
                                 EigenstrainSpec eigen = eigenstrain::Zero{},
                                 Interpolation mode = Interpolation::Printed);

  double lambda2() const { return lambda2_; }
  double mu2() const { return mu2_; }
  double delta_lambda() const { return delta_lambda_; }
  double delta_mu() const { return delta_mu_; }
  const EigenstrainSpec& eigenstrain_spec() const { return eigen_; }
  Interpolation interpolation() const { return mode_; }
  bool has_eigenstrain() const;

  /// Lame pair (lambda(phi), mu(phi)).
  std::array<double, 2> lame(double phi) const;
  std::array<double, 2> dlame(double phi) const;

  /// C(phi) E = 2 mu(phi) E + lambda(phi) tr(E) I.
  Sym2 apply_C(double phi, Sym2 e) const;
  Sym2 apply_dC(double phi, Sym2 e) const;

  Sym2 eigenstrain(double phi) const;
  Sym2 d_eigenstrain(double phi) const;

  /// Coercivity constant 2 mu2 min(1, delta_mu).
  double coercivity() const;
  /// Continuity bound 2 mu2 max(1, delta_mu) + 2 lambda2 max(1, delta_lambda).
  double continuity() const;

 private:
  double lambda2_, mu2_, delta_lambda_, delta_mu_;
  EigenstrainSpec eigen_;
  Interpolation mode_;
};

}  // namespace pfto
