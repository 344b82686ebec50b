#pragma once
// Forward-mode scalar: value plus gradient w.r.t. up to kMaxParams inputs.
// Gives machine-exact gradients of the closed-form gate functionals without
// hand-deriving boundary/frequency derivatives of every primitive.
//
// Gradient storage is fixed-capacity (stack only). A default-constructed or
// double-converted Dual is a constant: empty gradient, treated as zero.

#include <Eigen/Core>
#include <cmath>

namespace gateforge::ad {

inline constexpr int kMaxParams = 80;

using GradVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxParams, 1>;

struct Dual {
  double v{};
  GradVec g{0};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit constant lift
  Dual(double value, GradVec grad) : v(value), g(std::move(grad)) {}

  static Dual var(double value, int index, int n_params) {
    Dual d(value);
    d.g = GradVec::Zero(n_params);
    d.g[index] = 1.0;
    return d;
  }
};

namespace detail {
// ca * a.g + cb * b.g with empty gradients meaning zero
inline GradVec lin2(const GradVec& a, double ca, const GradVec& b, double cb) {
  if (a.size() == 0 && b.size() == 0) return GradVec{0};
  if (a.size() == 0) return GradVec(cb * b);
  if (b.size() == 0) return GradVec(ca * a);
  return GradVec(ca * a + cb * b);
}
inline GradVec lin1(const GradVec& a, double ca) {
  if (a.size() == 0) return GradVec{0};
  return GradVec(ca * a);
}
}  // namespace detail

inline Dual operator+(const Dual& a, const Dual& b) {
  return {a.v + b.v, detail::lin2(a.g, 1.0, b.g, 1.0)};
}
inline Dual operator-(const Dual& a, const Dual& b) {
  return {a.v - b.v, detail::lin2(a.g, 1.0, b.g, -1.0)};
}
inline Dual operator-(const Dual& a) { return {-a.v, detail::lin1(a.g, -1.0)}; }
inline Dual operator*(const Dual& a, const Dual& b) {
  return {a.v * b.v, detail::lin2(a.g, b.v, b.g, a.v)};
}
inline Dual operator/(const Dual& a, const Dual& b) {
  double inv = 1.0 / b.v;
  return {a.v * inv, detail::lin2(a.g, inv, b.g, -a.v * inv * inv)};
}

inline Dual& operator+=(Dual& a, const Dual& b) { return a = a + b; }
inline Dual& operator-=(Dual& a, const Dual& b) { return a = a - b; }
inline Dual& operator*=(Dual& a, const Dual& b) { return a = a * b; }

inline Dual sin(const Dual& a) { return {std::sin(a.v), detail::lin1(a.g, std::cos(a.v))}; }
inline Dual cos(const Dual& a) { return {std::cos(a.v), detail::lin1(a.g, -std::sin(a.v))}; }
inline Dual exp(const Dual& a) {
  double e = std::exp(a.v);
  return {e, detail::lin1(a.g, e)};
}
inline Dual log(const Dual& a) { return {std::log(a.v), detail::lin1(a.g, 1.0 / a.v)}; }
inline Dual sqrt(const Dual& a) {
  double r = std::sqrt(a.v);
  return {r, detail::lin1(a.g, 0.5 / r)};
}
inline Dual atan2(const Dual& y, const Dual& x) {
  double d = x.v * x.v + y.v * y.v;
  return {std::atan2(y.v, x.v), detail::lin2(y.g, x.v / d, x.g, -y.v / d)};
}

// branch tests only: value magnitude, no derivative
inline double abs(const Dual& a) { return std::abs(a.v); }

inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
inline bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
inline bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }

}  // namespace gateforge::ad
