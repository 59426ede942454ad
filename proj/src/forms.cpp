#include "kkcheck/forms.hpp"

#include <algorithm>

namespace kkcheck {

int permutation_sign(std::span<const int> seq) {
  int inv = 0;
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t j = i + 1; j < seq.size(); ++j) {
      if (seq[i] == seq[j]) return 0;
      if (seq[i] > seq[j]) ++inv;
    }
  return (inv & 1) ? -1 : 1;
}

FormJ ext_d(const FormJ& a) {
  if (a.basis() != Basis::coordinate) throw InputError("ext_d expects a coordinate-basis form");
  const int n = a.dim();
  if (a.degree() + 1 > n) return FormJ(n, a.degree(), Basis::coordinate);
  FormJ r(n, a.degree() + 1, Basis::coordinate);
  for (const auto& [m, f] : a.terms()) {
    if (f.order() < 1) throw InputError("ext_d needs first-order jets");
    if (f.dim() != n) throw InputError("jet and form dimensions differ");
    for (int mu = 0; mu < n; ++mu) {
      if (m & bit(mu)) continue;
      const int pos = std::popcount(m & (bit(mu) - 1));
      r.add(m | bit(mu), f.derivative(mu), (pos & 1) ? -1.0 : 1.0);
    }
  }
  return r;
}

FormD values(const FormJ& a) {
  FormD r(a.dim(), a.degree(), a.basis());
  for (const auto& [m, v] : a.terms()) r.terms().emplace(m, v.value());
  return r;
}

double max_abs(const FormD& a) {
  double w = 0.0;
  for (const auto& [m, v] : a.terms()) w = std::max(w, std::abs(v));
  return w;
}

double max_abs_diff(const FormD& a, const FormD& b) {
  FormD d = a;
  for (const auto& [m, v] : b.terms()) {
    auto it = d.terms().find(m);
    if (it == d.terms().end())
      d.terms().emplace(m, -v);
    else
      it->second -= v;
  }
  return max_abs(d);
}

FormD window_volume(int dim, int lo, int hi, std::span<const int> I) {
  if (lo < 0 || hi > dim || lo > hi) throw InputError("bad volume window");
  std::vector<int> seq;
  Mask used = 0;
  for (int i : I) {
    if (i < lo || i >= hi) throw InputError("volume index outside its window");
    seq.push_back(i);
    used |= bit(i);
  }
  Mask rest = 0;
  for (int j = lo; j < hi; ++j)
    if (!(used & bit(j))) {
      seq.push_back(j);
      rest |= bit(j);
    }
  FormD r(dim, hi - lo - static_cast<int>(I.size()) < 0 ? 0 : hi - lo - static_cast<int>(I.size()), Basis::frame);
  const int s = static_cast<int>(seq.size()) == hi - lo ? permutation_sign(seq) : 0;
  if (s != 0) r.terms().emplace(rest, static_cast<double>(s));
  return r;
}

FormD hat_volume(int dim, std::span<const int> I) { return window_volume(dim, 0, dim, I); }
FormD hat_volume(int dim, std::initializer_list<int> I) {
  return window_volume(dim, 0, dim, std::span<const int>(I.begin(), I.size()));
}

FormD monomial(int dim, Mask m, double v, Basis b) {
  FormD r(dim, degree_of(m), b);
  r.terms().emplace(m, v);
  return r;
}

}  // namespace kkcheck
