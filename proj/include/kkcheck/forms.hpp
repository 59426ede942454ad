#pragma once

#include "kkcheck/errors.hpp"
#include "kkcheck/jet.hpp"

#include <boost/container/flat_map.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace kkcheck {

enum class Basis { coordinate, frame };

/// Index set of a basis monomial dz^{i1} ^ ... ^ dz^{ip}, i1 < ... < ip, as a bitmask.
using Mask = std::uint32_t;

inline int degree_of(Mask m) { return std::popcount(m); }
inline Mask bit(int i) { return Mask{1} << i; }

/// Sign of (dz^a) ^ (dz^b) relative to dz^{a|b}; 0 when the sets intersect.
inline int wedge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int swaps = 0;
  for (Mask r = b; r; r &= r - 1) {
    const int j = std::countr_zero(r);
    swaps += std::popcount(a >> (j + 1));
  }
  return (swaps & 1) ? -1 : 1;
}

/// Parity of a sequence of distinct indices (0 if an index repeats).
int permutation_sign(std::span<const int> seq);

/// Alternating p-form in `dim` variables, stored sparsely over strictly increasing
/// index tuples. T is double (values at a point) or Jet (values with derivatives).
template <class T>
class Form {
public:
  using Terms = boost::container::flat_map<Mask, T>;

  Form() = default;
  Form(int dim, int degree, Basis basis = Basis::coordinate) : dim_(dim), degree_(degree), basis_(basis) {
    if (dim < 1 || dim > 31 || degree < 0) throw InputError("form shape out of range");
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  Basis basis() const { return basis_; }
  const Terms& terms() const { return terms_; }
  Terms& terms() { return terms_; }
  bool empty() const { return terms_.empty(); }

  /// Adds s * v to the coefficient of mask.
  void add(Mask m, const T& v, double s = 1.0) {
    if (degree_of(m) != degree_) throw InputError("term degree does not match form degree");
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_.emplace(m, v * s);
    } else {
      add_scaled(it->second, v, s);
    }
  }

  const T* find(Mask m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? nullptr : &it->second;
  }

  Form& operator+=(const Form& o) {
    check_compatible(o);
    for (const auto& [m, v] : o.terms_) add(m, v);
    return *this;
  }
  Form& operator-=(const Form& o) {
    check_compatible(o);
    for (const auto& [m, v] : o.terms_) add(m, v, -1.0);
    return *this;
  }
  Form& operator*=(double s) {
    for (auto& [m, v] : terms_) v = v * s;
    return *this;
  }
  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator*(Form a, double s) { return a *= s; }
  friend Form operator*(double s, Form a) { return a *= s; }

  /// Multiplies every coefficient by a scalar function value.
  Form times(const T& f) const {
    Form r(dim_, degree_, basis_);
    for (const auto& [m, v] : terms_) r.terms_.emplace(m, v * f);
    return r;
  }

  void check_compatible(const Form& o) const {
    if (o.dim_ != dim_ || o.basis_ != basis_) throw InputError("forms live in different spaces or bases");
    if (o.degree_ != degree_ && !o.terms_.empty() && !terms_.empty())
      throw InputError("adding forms of different degree");
  }

private:
  static void add_scaled(double& a, double b, double s) { a += s * b; }
  static void add_scaled(Jet& a, const Jet& b, double s) { a.add_scaled(b, s); }

  int dim_ = 1;
  int degree_ = 0;
  Basis basis_ = Basis::coordinate;
  Terms terms_;
};

using FormD = Form<double>;
using FormJ = Form<Jet>;

template <class T>
Form<T> wedge(const Form<T>& a, const Form<T>& b) {
  if (a.dim() != b.dim() || a.basis() != b.basis()) throw InputError("wedge of forms in different bases");
  Form<T> r(a.dim(), a.degree() + b.degree(), a.basis());
  if (a.degree() + b.degree() > a.dim()) return r;
  for (const auto& [ma, va] : a.terms()) {
    for (const auto& [mb, vb] : b.terms()) {
      const int s = wedge_sign(ma, mb);
      if (s == 0) continue;
      r.add(ma | mb, va * vb, s);
    }
  }
  return r;
}

/// Interior product with a vector whose components are given in the same basis.
template <class T>
Form<T> iota(std::span<const T> X, const Form<T>& a) {
  if (static_cast<int>(X.size()) != a.dim()) throw InputError("vector and form dimensions differ");
  if (a.degree() == 0) return Form<T>(a.dim(), 0, a.basis());
  Form<T> r(a.dim(), a.degree() - 1, a.basis());
  for (const auto& [m, v] : a.terms()) {
    for (Mask rest = m; rest; rest &= rest - 1) {
      const int i = std::countr_zero(rest);
      const int pos = std::popcount(m & (bit(i) - 1));
      r.add(m & ~bit(i), v * X[i], (pos & 1) ? -1.0 : 1.0);
    }
  }
  return r;
}

/// Rewrites a form under the substitution dz^mu = sum_I M(mu, I) w^I, giving a form
/// in the w basis with tag `target`.
template <class T, class MatrixFn>
Form<T> substitute(const Form<T>& a, int new_dim, MatrixFn&& M, Basis target) {
  Form<T> r(new_dim, a.degree(), target);
  std::vector<Form<T>> rows;
  rows.reserve(a.dim());
  for (int mu = 0; mu < a.dim(); ++mu) {
    Form<T> row(new_dim, 1, target);
    for (int I = 0; I < new_dim; ++I) {
      T v = M(mu, I);
      row.terms().emplace(bit(I), std::move(v));
    }
    rows.push_back(std::move(row));
  }
  for (const auto& [m, v] : a.terms()) {
    Form<T> acc(new_dim, 0, target);
    acc.terms().emplace(Mask{0}, v);
    for (Mask rest = m; rest; rest &= rest - 1) acc = wedge(acc, rows[std::countr_zero(rest)]);
    r += acc;
  }
  return r;
}

/// Coordinate-basis exterior derivative of a jet-valued form. The result carries jets
/// of one order less.
FormJ ext_d(const FormJ& a);

FormD values(const FormJ& a);
double max_abs(const FormD& a);
/// max |a - b| over the union of supports.
double max_abs_diff(const FormD& a, const FormD& b);

/// Frame-basis form sign * w^{complement} for the index tuple I taken inside the
/// index window [lo, hi): eps_{I, rest} w^{rest} with eps_{lo..hi-1} = +1. Zero when I
/// repeats. Used for all the graded volumes (e^(4), e_a^(3), theta-bar, theta-hat).
FormD window_volume(int dim, int lo, int hi, std::span<const int> I);
FormD hat_volume(int dim, std::span<const int> I);
FormD hat_volume(int dim, std::initializer_list<int> I);

/// Constant frame-basis monomial.
FormD monomial(int dim, Mask m, double v = 1.0, Basis b = Basis::frame);

}  // namespace kkcheck
