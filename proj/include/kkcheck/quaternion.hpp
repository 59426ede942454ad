#pragma once

#include <array>
#include <cmath>

namespace kkcheck {

/// Quaternion w + x i + y j + z k over a scalar type (double or Jet).
///
/// Unit quaternions model SU(2). The su(2) basis used throughout is t_i = e_i / 2
/// (e_1 = i, e_2 = j, e_3 = k), which gives [t_i, t_j] = eps_ijk t_k.
template <class T>
struct Quat {
  T w, x, y, z;

  friend Quat operator*(const Quat& a, const Quat& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
  }
  friend Quat operator+(const Quat& a, const Quat& b) { return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Quat operator-(const Quat& a, const Quat& b) { return {a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z}; }

  Quat conj() const { return {w, -x, -y, -z}; }
  std::array<T, 3> vec() const { return {x, y, z}; }
};

template <class T>
Quat<T> pure(const T& zero, const std::array<T, 3>& v) {
  return {zero, v[0], v[1], v[2]};
}

/// exp(angle * t_axis) for a coordinate axis: cos(angle/2) + sin(angle/2) e_axis.
template <class T>
Quat<T> axis_exp(int axis, const T& angle) {
  using std::cos;
  using std::sin;
  const T half = angle * 0.5;
  const T c = cos(half), s = sin(half);
  const T zero = s * 0.0;
  Quat<T> q{c, zero, zero, zero};
  if (axis == 0) q.x = s;
  if (axis == 1) q.y = s;
  if (axis == 2) q.z = s;
  return q;
}

/// Components of q v q^{-1} for unit q and v in R^3 (the adjoint action on su(2)).
template <class T>
std::array<T, 3> rotate(const Quat<T>& q, const std::array<T, 3>& v) {
  const T zero = v[0] * 0.0;
  const Quat<T> r = q * pure(zero, v) * q.conj();
  return r.vec();
}

using Quatd = Quat<double>;

inline double norm(const Quatd& q) { return std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z); }

/// exp(xi^i t_i) for xi in R^3.
inline Quatd su2_exp(const std::array<double, 3>& xi) {
  const double a = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
  if (a < 1e-300) return {1.0, 0.0, 0.0, 0.0};
  const double s = std::sin(a / 2.0) / a;
  return {std::cos(a / 2.0), s * xi[0], s * xi[1], s * xi[2]};
}

}  // namespace kkcheck
