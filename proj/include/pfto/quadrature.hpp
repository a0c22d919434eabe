#pragma once

#include <array>
#include <cmath>

namespace pfto::quad {

/// Barycentric point with weight; weights sum to one (scale by the area).
struct TriPoint {
  std::array<double, 3> bary;
  double weight;
};

/// Edge-midpoint rule, exact for polynomials of degree 2.
inline constexpr std::array<TriPoint, 3> kMidpoint3{{
    {{0.5, 0.5, 0.0}, 1.0 / 3.0},
    {{0.0, 0.5, 0.5}, 1.0 / 3.0},
    {{0.5, 0.0, 0.5}, 1.0 / 3.0},
}};

namespace detail {
inline constexpr double a = 0.44594849091596488632;
inline constexpr double wa = 0.22338158967801146570;
inline constexpr double b = 0.091576213509770743460;
inline constexpr double wb = 0.10995174365532186764;
}  // namespace detail

/// Six-point Strang-Fix/Dunavant rule, exact for degree 4.
inline constexpr std::array<TriPoint, 6> kDegree4{{
    {{detail::a, detail::a, 1.0 - 2.0 * detail::a}, detail::wa},
    {{detail::a, 1.0 - 2.0 * detail::a, detail::a}, detail::wa},
    {{1.0 - 2.0 * detail::a, detail::a, detail::a}, detail::wa},
    {{detail::b, detail::b, 1.0 - 2.0 * detail::b}, detail::wb},
    {{detail::b, 1.0 - 2.0 * detail::b, detail::b}, detail::wb},
    {{1.0 - 2.0 * detail::b, detail::b, detail::b}, detail::wb},
}};

/// Two-point Gauss-Legendre on [0, 1]; weights sum to one.
struct LinePoint {
  double t;
  double weight;
};
inline const std::array<LinePoint, 2> kGauss2{{
    {0.5 - 0.5 / std::sqrt(3.0), 0.5},
    {0.5 + 0.5 / std::sqrt(3.0), 0.5},
}};

}  // namespace pfto::quad
