#pragma once

#include <boost/container/small_vector.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace kkcheck {

/// Truncated multivariate Taylor polynomial ("jet") in `dim` variables up to total
/// degree `order` (at most 3).
///
/// Coefficients are stored in graded order: the constant term, then the degree-1
/// monomials z_0..z_{n-1}, then degree-2 monomials z_i z_j (i <= j), then degree 3.
/// Because the order is graded, truncating to a lower order is a prefix operation.
/// Coefficient c_alpha multiplies h^alpha (Taylor coefficient, i.e. the partial
/// derivative divided by alpha!).
class Jet {
public:
  static constexpr int kMaxOrder = 3;
  static constexpr int kMaxDim = 16;

  Jet() = default;

  static Jet constant(int dim, int order, double value);
  /// The coordinate function z_i expanded about `value`.
  static Jet variable(int dim, int order, int i, double value);

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return c_.size(); }

  double value() const { return c_.empty() ? 0.0 : c_[0]; }
  /// First partial derivative d/dz_i at the expansion point.
  double partial(int i) const;
  /// Second partial derivative d^2/dz_i dz_j at the expansion point.
  double partial2(int i, int j) const;
  /// Third partial derivative.
  double partial3(int i, int j, int k) const;

  /// Exact partial derivative as a jet of order `order() - 1`.
  Jet derivative(int i) const;
  Jet truncated(int order) const;

  std::span<const double> coefficients() const { return {c_.data(), c_.size()}; }
  std::span<double> coefficients() { return {c_.data(), c_.size()}; }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator+=(double s) { c_[0] += s; return *this; }
  Jet& operator-=(double s) { c_[0] -= s; return *this; }
  Jet& operator*=(double s);
  Jet& operator/=(double s) { return *this *= 1.0 / s; }

  Jet operator-() const;

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return (-a) += s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a /= s; }
  friend Jet operator/(double s, const Jet& a);

  /// a += s * b without a temporary.
  void add_scaled(const Jet& b, double s);
  /// a += b * c without a temporary.
  void add_product(const Jet& b, const Jet& c);

  bool is_constant() const;

private:
  friend Jet compose(const Jet& a, std::span<const double> taylor);
  friend Jet compose(const Jet& f, std::span<const Jet> w);

  int dim_ = 0;
  int order_ = 0;
  boost::container::small_vector<double, 40> c_;
};

/// f(a) where `taylor[k] = f^(k)(a.value()) / k!` for k = 0..a.order().
Jet compose(const Jet& a, std::span<const double> taylor);

/// Multivariate composition: f is a jet about w0 = (w_i.value()), the result is
/// f(w(z)) as a jet in the variables of w.
Jet compose(const Jet& f, std::span<const Jet> w);

Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet inverse(const Jet& a);
Jet pow(const Jet& a, int n);

/// Seeds the coordinate jets of a point: z_i = point_i + h_i.
std::vector<Jet> seed_point(std::span<const double> point, int order);

/// Number of monomials of total degree <= order in dim variables.
std::size_t jet_size(int dim, int order);

}  // namespace kkcheck
