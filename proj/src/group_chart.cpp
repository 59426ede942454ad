#include "kkcheck/group_chart.hpp"

#include "kkcheck/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kkcheck {
namespace {

template <class T>
std::array<T, 3> unit(const T& zero, int i) {
  std::array<T, 3> e{zero, zero, zero};
  e[i] = e[i] + 1.0;
  return e;
}

}  // namespace

GroupChart GroupChart::for_algebra(const LieAlgebra& alg) {
  if (alg.blocks.size() == 1 && alg.blocks[0].kind == LieAlgebra::Kind::u1) return GroupChart(Kind::u1);
  if (alg.blocks.size() == 1 && alg.blocks[0].kind == LieAlgebra::Kind::su2) return GroupChart(Kind::su2);
  throw InputError("group charts exist for u(1) and su(2) only");
}

void GroupChart::check_domain(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != dim()) throw InputError("group coordinate count mismatch");
  if (kind_ == Kind::su2 && std::abs(y[1]) > std::numbers::pi / 2 - 1e-3)
    throw DomainError("group chart near its coordinate singularity");
}

Quat<Jet> GroupChart::element(std::span<const Jet> y) const {
  if (kind_ == Kind::u1) {
    const Jet zero = y[0] * 0.0;
    return {cos(y[0]), zero, zero, sin(y[0])};
  }
  return axis_exp(0, y[0]) * axis_exp(1, y[1]) * axis_exp(2, y[2]);
}

Quatd GroupChart::element(std::span<const double> y) const {
  if (kind_ == Kind::u1) return {std::cos(y[0]), 0, 0, std::sin(y[0])};
  return axis_exp(0, y[0]) * axis_exp(1, y[1]) * axis_exp(2, y[2]);
}

std::vector<Jet> rotation_jets(const Quat<Jet>& q) {
  const Jet zero = q.w * 0.0;
  std::vector<Jet> S(9, zero);
  for (int j = 0; j < 3; ++j) {
    const auto v = rotate(q, unit(zero, j));
    for (int i = 0; i < 3; ++i) S[i * 3 + j] = v[i];
  }
  return S;
}

std::vector<Jet> GroupChart::left_mc(std::span<const Jet> y) const {
  if (kind_ == Kind::u1) return {Jet::constant(y[0].dim(), y[0].order(), 1.0)};
  const Jet zero = y[0] * 0.0;
  const auto g2 = axis_exp(1, y[1]), g3 = axis_exp(2, y[2]);
  const auto g23 = g2 * g3;
  // g^-1 d_m g: m = 1 -> (g2 g3)^-1 t1 (g2 g3), m = 2 -> g3^-1 t2 g3, m = 3 -> t3.
  const std::array<std::array<Jet, 3>, 3> cols{rotate(g23.conj(), unit(zero, 0)), rotate(g3.conj(), unit(zero, 1)),
                                               unit(zero, 2)};
  std::vector<Jet> r(9, zero);
  for (int m = 0; m < 3; ++m)
    for (int i = 0; i < 3; ++i) r[i * 3 + m] = cols[m][i];
  return r;
}

std::vector<Jet> GroupChart::right_mc(std::span<const Jet> y) const {
  if (kind_ == Kind::u1) return {Jet::constant(y[0].dim(), y[0].order(), 1.0)};
  const Jet zero = y[0] * 0.0;
  const auto g1 = axis_exp(0, y[0]), g2 = axis_exp(1, y[1]);
  // d_m g g^-1: m = 1 -> t1, m = 2 -> g1 t2 g1^-1, m = 3 -> (g1 g2) t3 (g1 g2)^-1.
  const std::array<std::array<Jet, 3>, 3> cols{unit(zero, 0), rotate(g1, unit(zero, 1)), rotate(g1 * g2, unit(zero, 2))};
  std::vector<Jet> r(9, zero);
  for (int m = 0; m < 3; ++m)
    for (int i = 0; i < 3; ++i) r[i * 3 + m] = cols[m][i];
  return r;
}

std::vector<Jet> GroupChart::adjoint(std::span<const Jet> y) const {
  if (kind_ == Kind::u1) return {Jet::constant(y[0].dim(), y[0].order(), 1.0)};
  return rotation_jets(element(y));
}

std::array<double, 3> GroupChart::coordinates(const Quatd& q) const {
  if (kind_ == Kind::u1) {
    double a = std::atan2(q.z, q.w);
    if (a < 0) a += 2.0 * std::numbers::pi;
    return {a, 0.0, 0.0};
  }
  const Eigen::Matrix3d R = rotation_matrix(q);
  const double s2 = std::clamp(R(0, 2), -1.0, 1.0);
  std::array<double, 3> y{std::atan2(-R(1, 2), R(2, 2)), std::asin(s2), std::atan2(-R(0, 1), R(0, 0))};
  const Quatd p = element(std::span<const double>(y));
  if (p.w * q.w + p.x * q.x + p.y * q.y + p.z * q.z < 0) y[0] += 2.0 * std::numbers::pi;
  return y;
}

}  // namespace kkcheck
