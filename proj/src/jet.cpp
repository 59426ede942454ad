#include "kkcheck/jet.hpp"

#include "kkcheck/errors.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <mutex>

namespace kkcheck {
namespace {

struct Layout {
  int n = 0;
  std::array<std::size_t, Jet::kMaxOrder + 2> count{};  // count[K] = #monomials of degree <= K
  std::vector<std::array<std::uint8_t, Jet::kMaxDim>> exps;
  std::vector<int> degree;
  // prod[i] lists result indices for j = 0..count[3 - deg i] - 1.
  std::vector<std::vector<std::uint32_t>> prod;
  // raise[mu][beta] = index of beta + e_mu, for deg beta < 3.
  std::vector<std::vector<std::uint32_t>> raise;
  // lower[k] = (parent, var) with exps[k] = exps[parent] + e_var, for k > 0.
  std::vector<std::pair<std::uint32_t, int>> lower;
};

std::size_t binom(int n, int k) {
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

std::unique_ptr<Layout> build_layout(int n) {
  auto L = std::make_unique<Layout>();
  L->n = n;
  using E = std::array<std::uint8_t, Jet::kMaxDim>;
  E zero{};
  L->exps.push_back(zero);
  L->degree.push_back(0);
  for (int i = 0; i < n; ++i) {
    E e{};
    e[i] = 1;
    L->exps.push_back(e);
    L->degree.push_back(1);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      E e{};
      ++e[i];
      ++e[j];
      L->exps.push_back(e);
      L->degree.push_back(2);
    }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        E e{};
        ++e[i];
        ++e[j];
        ++e[k];
        L->exps.push_back(e);
        L->degree.push_back(3);
      }
  for (int K = 0; K <= Jet::kMaxOrder; ++K) L->count[K] = binom(n + K, K);

  auto find = [&](const E& e) -> std::uint32_t {
    int d = 0;
    for (int i = 0; i < n; ++i) d += e[i];
    std::size_t lo = d == 0 ? 0 : L->count[d - 1];
    for (std::size_t k = lo; k < L->count[d]; ++k)
      if (L->exps[k] == e) return static_cast<std::uint32_t>(k);
    return UINT32_MAX;
  };

  const std::size_t total = L->count[Jet::kMaxOrder];
  L->prod.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    const int di = L->degree[i];
    const std::size_t nj = L->count[Jet::kMaxOrder - di];
    L->prod[i].resize(nj);
    for (std::size_t j = 0; j < nj; ++j) {
      E e{};
      for (int v = 0; v < n; ++v) e[v] = static_cast<std::uint8_t>(L->exps[i][v] + L->exps[j][v]);
      L->prod[i][j] = find(e);
    }
  }
  L->raise.resize(n);
  for (int mu = 0; mu < n; ++mu) {
    const std::size_t nb = L->count[Jet::kMaxOrder - 1];
    L->raise[mu].resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      E e = L->exps[b];
      ++e[mu];
      L->raise[mu][b] = find(e);
    }
  }
  L->lower.assign(total, {0, 0});
  for (std::size_t k = 1; k < total; ++k) {
    int v = 0;
    while (L->exps[k][v] == 0) ++v;
    E e = L->exps[k];
    --e[v];
    L->lower[k] = {find(e), v};
  }
  return L;
}

const Layout& layout(int n) {
  static std::array<std::unique_ptr<Layout>, Jet::kMaxDim + 1> layouts;
  static std::array<std::once_flag, Jet::kMaxDim + 1> flags;
  if (n < 1 || n > Jet::kMaxDim) throw InputError("jet dimension out of range");
  std::call_once(flags[n], [n] { layouts[n] = build_layout(n); });
  return *layouts[n];
}

}  // namespace

std::size_t jet_size(int dim, int order) { return layout(dim).count[order]; }

Jet Jet::constant(int dim, int order, double value) {
  if (order < 0 || order > kMaxOrder) throw InputError("jet order out of range");
  Jet j;
  j.dim_ = dim;
  j.order_ = order;
  j.c_.assign(layout(dim).count[order], 0.0);
  j.c_[0] = value;
  return j;
}

Jet Jet::variable(int dim, int order, int i, double value) {
  Jet j = constant(dim, order, value);
  if (order >= 1) j.c_[1 + i] = 1.0;
  return j;
}

double Jet::partial(int i) const { return order_ >= 1 ? c_[1 + i] : 0.0; }

double Jet::partial2(int i, int j) const {
  if (order_ < 2) return 0.0;
  const Layout& L = layout(dim_);
  const std::uint32_t k = L.raise[j][1 + i];
  return c_[k] * (i == j ? 2.0 : 1.0);
}

double Jet::partial3(int i, int j, int k) const {
  if (order_ < 3) return 0.0;
  const Layout& L = layout(dim_);
  const std::uint32_t idx = L.raise[k][L.raise[j][1 + i]];
  double f = 1.0;
  for (int v = 0; v < dim_; ++v) {
    const int e = L.exps[idx][v];
    for (int m = 2; m <= e; ++m) f *= m;
  }
  return c_[idx] * f;
}

Jet Jet::derivative(int i) const {
  if (order_ == 0) throw InputError("derivative of an order-0 jet");
  const Layout& L = layout(dim_);
  Jet r;
  r.dim_ = dim_;
  r.order_ = order_ - 1;
  const std::size_t n = L.count[r.order_];
  r.c_.resize(n);
  for (std::size_t b = 0; b < n; ++b) {
    const std::uint32_t up = L.raise[i][b];
    r.c_[b] = c_[up] * static_cast<double>(L.exps[b][i] + 1);
  }
  return r;
}

Jet Jet::truncated(int order) const {
  if (order >= order_) return *this;
  Jet r = *this;
  r.order_ = order;
  r.c_.resize(layout(dim_).count[order]);
  return r;
}

Jet& Jet::operator+=(const Jet& o) {
  if (o.order_ < order_) {
    order_ = o.order_;
    c_.resize(o.c_.size());
  }
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (o.order_ < order_) {
    order_ = o.order_;
    c_.resize(o.c_.size());
  }
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = *this * o;
  return *this;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (double& v : r.c_) v = -v;
  return r;
}

void Jet::add_scaled(const Jet& b, double s) {
  if (b.order_ < order_) {
    order_ = b.order_;
    c_.resize(b.c_.size());
  }
  for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += s * b.c_[k];
}

void Jet::add_product(const Jet& b, const Jet& c) {
  const int K = std::min({order_, b.order_, c.order_});
  const Layout& L = layout(dim_);
  if (K < order_) {
    order_ = K;
    c_.resize(L.count[K]);
  }
  if (K == 0) {
    c_[0] += b.c_[0] * c.c_[0];
    return;
  }
  if (K == 1) {
    const double b0 = b.c_[0], c0 = c.c_[0];
    c_[0] += b0 * c0;
    for (int i = 1; i <= dim_; ++i) c_[i] += b0 * c.c_[i] + c0 * b.c_[i];
    return;
  }
  const std::size_t ni = L.count[K];
  for (std::size_t i = 0; i < ni; ++i) {
    const double bi = b.c_[i];
    if (bi == 0.0) continue;
    const std::size_t nj = L.count[K - L.degree[i]];
    const std::uint32_t* p = L.prod[i].data();
    for (std::size_t j = 0; j < nj; ++j) c_[p[j]] += bi * c.c_[j];
  }
}

Jet operator*(const Jet& a, const Jet& b) {
  const int K = std::min(a.order_, b.order_);
  Jet r = Jet::constant(a.dim_, K, 0.0);
  r.add_product(a, b);
  return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * inverse(b); }
Jet operator/(double s, const Jet& a) { return inverse(a) * s; }

bool Jet::is_constant() const {
  for (std::size_t k = 1; k < c_.size(); ++k)
    if (c_[k] != 0.0) return false;
  return true;
}

Jet compose(const Jet& a, std::span<const double> taylor) {
  Jet h = a;
  h.c_[0] = 0.0;
  Jet r = Jet::constant(a.dim_, a.order_, taylor[a.order_]);
  for (int k = a.order_ - 1; k >= 0; --k) {
    r = r * h;
    r.c_[0] += taylor[k];
  }
  return r;
}

Jet compose(const Jet& f, std::span<const Jet> w) {
  if (static_cast<int>(w.size()) != f.dim_) throw InputError("composition needs one jet per variable");
  const Layout& L = layout(f.dim_);
  int K = f.order_;
  for (const auto& wi : w) K = std::min(K, wi.order());
  const int m = w.empty() ? 1 : w[0].dim();
  std::vector<Jet> h;
  h.reserve(w.size());
  for (const auto& wi : w) {
    Jet d = wi.truncated(K);
    d.c_[0] = 0.0;
    h.push_back(std::move(d));
  }
  const std::size_t n = L.count[K];
  std::vector<Jet> mono(n);
  mono[0] = Jet::constant(m, K, 1.0);
  Jet r = Jet::constant(m, K, f.c_[0]);
  for (std::size_t k = 1; k < n; ++k) {
    const auto [parent, v] = L.lower[k];
    mono[k] = mono[parent] * h[static_cast<std::size_t>(v)];
    if (f.c_[k] != 0.0) r.add_scaled(mono[k], f.c_[k]);
  }
  return r;
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const std::array<double, 4> t{s, c, -s / 2.0, -c / 6.0};
  return compose(a, t);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  const std::array<double, 4> t{c, -s, -c / 2.0, s / 6.0};
  return compose(a, t);
}

Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  const std::array<double, 4> t{e, e, e / 2.0, e / 6.0};
  return compose(a, t);
}

Jet log(const Jet& a) {
  const double x = a.value();
  if (x <= 0.0) throw DomainError("log of a non-positive jet");
  const std::array<double, 4> t{std::log(x), 1.0 / x, -1.0 / (2.0 * x * x), 1.0 / (3.0 * x * x * x)};
  return compose(a, t);
}

Jet sqrt(const Jet& a) {
  const double x = a.value();
  if (x <= 0.0) throw DomainError("sqrt of a non-positive jet");
  const double s = std::sqrt(x);
  const std::array<double, 4> t{s, 0.5 / s, -0.125 / (s * x), 0.0625 / (s * x * x)};
  return compose(a, t);
}

Jet inverse(const Jet& a) {
  const double x = a.value();
  if (x == 0.0) throw DegeneracyError("inverse of a jet with zero value");
  const double i = 1.0 / x;
  const std::array<double, 4> t{i, -i * i, i * i * i, -i * i * i * i};
  return compose(a, t);
}

Jet pow(const Jet& a, int n) {
  if (n < 0) return inverse(pow(a, -n));
  Jet r = Jet::constant(a.dim(), a.order(), 1.0);
  for (int k = 0; k < n; ++k) r = r * a;
  return r;
}

std::vector<Jet> seed_point(std::span<const double> point, int order) {
  const int n = static_cast<int>(point.size());
  std::vector<Jet> z;
  z.reserve(point.size());
  for (int i = 0; i < n; ++i) z.push_back(Jet::variable(n, order, i, point[i]));
  return z;
}

}  // namespace kkcheck
