#include "pfto/materials.hpp"

#include <algorithm>
#include <string>

namespace pfto {

namespace {

void check_phase(double phi) {
  if (!(phi >= -1.0 - kTolBox && phi <= 1.0 + kTolBox))
    throw InfeasiblePhase("phase value " + std::to_string(phi) + " outside [-1, 1]");
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

Sym2 eigenstrain_slope(const EigenstrainSpec& spec) {
  return std::visit(Overloaded{
                        [](const eigenstrain::Zero&) { return Sym2{}; },
                        [](const eigenstrain::IsotropicLinear& e) { return e.delta * Sym2::identity(); },
                        [](const eigenstrain::DiagonalLinear& e) { return Sym2{-e.delta, 0.0, e.delta}; },
                        [](const eigenstrain::AffineMatrix& e) { return e.m; },
                    },
                    spec);
}

}  // namespace

Sym2 Sym2::from_matrix(double a11, double a12, double a21, double a22) {
  double scale = std::max({std::abs(a11), std::abs(a12), std::abs(a21), std::abs(a22), 1e-300});
  if (std::abs(a12 - a21) > 1e-12 * scale) throw InvalidInput("tensor is not symmetric");
  return {a11, 0.5 * (a12 + a21), a22};
}

double iota(double delta, double phi) {
  check_phase(phi);
  // Factored form of the printed quadratic; exact at both endpoints.
  double d = phi - 1.0;
  return 0.25 * (1.0 - delta) * d * d + delta;
}

double diota(double delta, double phi) {
  check_phase(phi);
  return 0.5 * (1.0 - delta) * (phi - 1.0);
}

const char* to_string(Interpolation mode) { return mode == Interpolation::Printed ? "printed" : "mirrored"; }

MaterialModel::MaterialModel(double lambda2, double mu2, double delta_lambda, double delta_mu, EigenstrainSpec eigen,
                             Interpolation mode)
    : lambda2_(lambda2),
      mu2_(mu2),
      delta_lambda_(delta_lambda),
      delta_mu_(delta_mu),
      eigen_(std::move(eigen)),
      mode_(mode) {
  if (!(lambda2_ >= 0.0)) throw InvalidInput("lambda2 must be non-negative");
  if (!(mu2_ > 0.0)) throw InvalidInput("mu2 must be positive");
  if (!(delta_lambda_ > 0.0) || !(delta_mu_ > 0.0)) throw InvalidInput("material ratios must be positive");
  Sym2 m = eigenstrain_slope(eigen_);
  if (!std::isfinite(m.xx) || !std::isfinite(m.xy) || !std::isfinite(m.yy))
    throw InvalidInput("eigenstrain must be finite");
}

MaterialModel MaterialModel::from_lame(double lambda1, double mu1, double lambda2, double mu2, EigenstrainSpec eigen,
                                      Interpolation mode) {
  if (!(lambda2 > 0.0)) throw InvalidInput("lambda2 must be positive to form the ratio lambda1/lambda2");
  if (!(mu2 > 0.0)) throw InvalidInput("mu2 must be positive");
  return MaterialModel(lambda2, mu2, lambda1 / lambda2, mu1 / mu2, std::move(eigen), mode);
}

bool MaterialModel::has_eigenstrain() const { return !std::holds_alternative<eigenstrain::Zero>(eigen_); }

std::array<double, 2> MaterialModel::lame(double phi) const {
  if (mode_ == Interpolation::Mirrored)
    return {iota(1.0 / delta_lambda_, -phi) * delta_lambda_ * lambda2_, iota(1.0 / delta_mu_, -phi) * delta_mu_ * mu2_};
  return {iota(delta_lambda_, phi) * lambda2_, iota(delta_mu_, phi) * mu2_};
}

std::array<double, 2> MaterialModel::dlame(double phi) const {
  if (mode_ == Interpolation::Mirrored)
    return {-diota(1.0 / delta_lambda_, -phi) * delta_lambda_ * lambda2_,
            -diota(1.0 / delta_mu_, -phi) * delta_mu_ * mu2_};
  return {diota(delta_lambda_, phi) * lambda2_, diota(delta_mu_, phi) * mu2_};
}

Sym2 MaterialModel::apply_C(double phi, Sym2 e) const {
  auto [l, m] = lame(phi);
  return 2.0 * m * e + (l * e.trace()) * Sym2::identity();
}

Sym2 MaterialModel::apply_dC(double phi, Sym2 e) const {
  auto [l, m] = dlame(phi);
  return 2.0 * m * e + (l * e.trace()) * Sym2::identity();
}

Sym2 MaterialModel::eigenstrain(double phi) const {
  check_phase(phi);
  return phi * eigenstrain_slope(eigen_);
}

Sym2 MaterialModel::d_eigenstrain(double phi) const {
  check_phase(phi);
  return eigenstrain_slope(eigen_);
}

double MaterialModel::coercivity() const { return 2.0 * mu2_ * std::min(1.0, delta_mu_); }

double MaterialModel::continuity() const {
  return 2.0 * mu2_ * std::max(1.0, delta_mu_) + 2.0 * lambda2_ * std::max(1.0, delta_lambda_);
}

}  // namespace pfto
