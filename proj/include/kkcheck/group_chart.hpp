#pragma once

#include "kkcheck/jet.hpp"
#include "kkcheck/lie.hpp"
#include "kkcheck/quaternion.hpp"

#include <array>
#include <span>
#include <vector>

namespace kkcheck {

/// Coordinates on the structure group. For SU(2):
///   g(y) = exp(y1 t1) exp(y2 t2) exp(y3 t3),  |y2| < pi/2.
/// For U(1): g(y) = exp(y t) with a single 2 pi-periodic coordinate, stored as the
/// unit complex number cos y + k sin y.
class GroupChart {
public:
  enum class Kind { u1, su2 };

  explicit GroupChart(Kind kind) : kind_(kind) {}
  static GroupChart for_algebra(const LieAlgebra& alg);

  Kind kind() const { return kind_; }
  int dim() const { return kind_ == Kind::u1 ? 1 : 3; }

  /// Throws DomainError near the coordinate singularity y2 = +-pi/2.
  void check_domain(std::span<const double> y) const;

  Quat<Jet> element(std::span<const Jet> y) const;
  Quatd element(std::span<const double> y) const;

  /// Left Maurer-Cartan form g^-1 dg: row i, column m holds the coefficient of dy^m.
  std::vector<Jet> left_mc(std::span<const Jet> y) const;
  /// Right Maurer-Cartan form dg g^-1.
  std::vector<Jet> right_mc(std::span<const Jet> y) const;
  /// Adjoint matrix S(g(y)) (row-major, r x r).
  std::vector<Jet> adjoint(std::span<const Jet> y) const;

  /// Chart coordinates of a unit quaternion (inverse of `element`); y1 in (-pi, 3pi].
  std::array<double, 3> coordinates(const Quatd& q) const;

private:
  Kind kind_;
};

/// Rotation matrix entries of a jet quaternion (adjoint action on su(2)).
std::vector<Jet> rotation_jets(const Quat<Jet>& q);

}  // namespace kkcheck
