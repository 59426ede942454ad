#include "kkcheck/lie.hpp"

#include "kkcheck/errors.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace kkcheck {
namespace {

void normalize(long long& n, long long& d) {
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const long long g = std::gcd(n < 0 ? -n : n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  if (n == 0) d = 1;
}

void add_frac(long long n1, long long d1, long long n2, long long d2, long long& n, long long& d) {
  n = n1 * d2 + n2 * d1;
  d = d1 * d2;
  normalize(n, d);
}

void mul_frac(long long n1, long long d1, long long n2, long long d2, long long& n, long long& d) {
  n = n1 * n2;
  d = d1 * d2;
  normalize(n, d);
}

}  // namespace

Surd3 Surd3::rational(long long num, long long den) {
  Surd3 s;
  s.an = num;
  s.ad = den;
  normalize(s.an, s.ad);
  return s;
}

Surd3 Surd3::sqrt3(long long num, long long den) {
  Surd3 s;
  s.bn = num;
  s.bd = den;
  normalize(s.bn, s.bd);
  return s;
}

double Surd3::to_double() const {
  return static_cast<double>(an) / static_cast<double>(ad) +
         std::sqrt(3.0) * static_cast<double>(bn) / static_cast<double>(bd);
}

Surd3 operator+(const Surd3& x, const Surd3& y) {
  Surd3 r;
  add_frac(x.an, x.ad, y.an, y.ad, r.an, r.ad);
  add_frac(x.bn, x.bd, y.bn, y.bd, r.bn, r.bd);
  return r;
}

Surd3 operator-(const Surd3& x, const Surd3& y) {
  Surd3 r;
  add_frac(x.an, x.ad, -y.an, y.ad, r.an, r.ad);
  add_frac(x.bn, x.bd, -y.bn, y.bd, r.bn, r.bd);
  return r;
}

Surd3 operator*(const Surd3& x, const Surd3& y) {
  long long n1, d1, n2, d2;
  Surd3 r;
  mul_frac(x.an, x.ad, y.an, y.ad, n1, d1);
  mul_frac(3 * x.bn, x.bd, y.bn, y.bd, n2, d2);
  add_frac(n1, d1, n2, d2, r.an, r.ad);
  mul_frac(x.an, x.ad, y.bn, y.bd, n1, d1);
  mul_frac(x.bn, x.bd, y.an, y.ad, n2, d2);
  add_frac(n1, d1, n2, d2, r.bn, r.bd);
  return r;
}

LieAlgebra LieAlgebra::from_constants(std::string name, int dim, std::vector<double> c, Eigen::MatrixXd k) {
  if (dim <= 0) throw InputError("Lie algebra dimension must be positive");
  if (c.size() != static_cast<std::size_t>(dim) * dim * dim)
    throw InputError("structure constant array has wrong size");
  if (k.rows() != dim || k.cols() != dim) throw InputError("metric has wrong shape");
  LieAlgebra a;
  a.name = std::move(name);
  a.dim = dim;
  a.c = std::move(c);
  a.k_metric = std::move(k);
  a.blocks = {{Kind::custom, 0, dim}};
  return a;
}

LieAlgebra LieAlgebra::with_metric(const Eigen::MatrixXd& k) const {
  if (k.rows() != dim || k.cols() != dim) throw InputError("metric has wrong shape");
  LieAlgebra a = *this;
  a.k_metric = k;
  a.k_exact_identity = k.isIdentity(0.0);
  return a;
}

LieAlgebra u1() {
  LieAlgebra a;
  a.name = "u1";
  a.dim = 1;
  a.c = {0.0};
  a.exact_c = std::vector<Surd3>{Surd3{}};
  a.k_metric = Eigen::MatrixXd::Identity(1, 1);
  a.k_exact_identity = true;
  a.blocks = {{LieAlgebra::Kind::u1, 0, 1}};
  return a;
}

LieAlgebra su2() {
  LieAlgebra a;
  a.name = "su2";
  a.dim = 3;
  a.c.assign(27, 0.0);
  std::vector<Surd3> ex(27);
  const int perm[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}};
  for (int p = 0; p < 6; ++p) {
    const int i = perm[p][0], j = perm[p][1], k = perm[p][2];
    const int s = p < 3 ? 1 : -1;
    a(k, i, j) = s;
    ex[(k * 3 + i) * 3 + j] = Surd3::rational(s);
  }
  a.exact_c = std::move(ex);
  a.k_metric = Eigen::MatrixXd::Identity(3, 3);
  a.k_exact_identity = true;
  a.blocks = {{LieAlgebra::Kind::su2, 0, 3}};
  return a;
}

LieAlgebra su3() {
  // Gell-Mann f_abc (totally antisymmetric); with t_a = -i lambda_a / 2 one has
  // [t_a, t_b] = f_abc t_c.
  struct Entry {
    int a, b, c;
    Surd3 v;
  };
  const Surd3 one = Surd3::rational(1), half = Surd3::rational(1, 2), mhalf = Surd3::rational(-1, 2),
              r3 = Surd3::sqrt3(1, 2);
  const Entry entries[] = {{1, 2, 3, one},   {1, 4, 7, half},  {1, 5, 6, mhalf}, {2, 4, 6, half},
                           {2, 5, 7, half},  {3, 4, 5, half},  {3, 6, 7, mhalf}, {4, 5, 8, r3},
                           {6, 7, 8, r3}};
  LieAlgebra a;
  a.name = "su3";
  a.dim = 8;
  a.c.assign(512, 0.0);
  std::vector<Surd3> ex(512);
  for (const auto& e : entries) {
    const int idx[3] = {e.a - 1, e.b - 1, e.c - 1};
    const int perm[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}};
    for (int p = 0; p < 6; ++p) {
      const int i = idx[perm[p][0]], j = idx[perm[p][1]], k = idx[perm[p][2]];
      const Surd3 v = p < 3 ? e.v : Surd3{} - e.v;
      ex[(k * 8 + i) * 8 + j] = v;
      a(k, i, j) = v.to_double();
    }
  }
  a.exact_c = std::move(ex);
  a.k_metric = Eigen::MatrixXd::Identity(8, 8);
  a.k_exact_identity = true;
  a.blocks = {{LieAlgebra::Kind::su3, 0, 8}};
  return a;
}

LieAlgebra direct_sum(const std::vector<LieAlgebra>& parts) {
  if (parts.empty()) throw InputError("direct sum of no algebras");
  LieAlgebra a;
  int r = 0;
  for (const auto& p : parts) r += p.dim;
  a.dim = r;
  a.c.assign(static_cast<std::size_t>(r) * r * r, 0.0);
  std::vector<Surd3> ex(a.c.size());
  bool exact = true, kid = true;
  a.k_metric = Eigen::MatrixXd::Zero(r, r);
  int off = 0;
  for (const auto& p : parts) {
    a.name += (a.name.empty() ? "" : "+") + p.name;
    exact = exact && p.exact_c.has_value();
    kid = kid && p.k_exact_identity;
    for (int k = 0; k < p.dim; ++k)
      for (int i = 0; i < p.dim; ++i)
        for (int j = 0; j < p.dim; ++j) {
          a(off + k, off + i, off + j) = p(k, i, j);
          if (p.exact_c) ex[((off + k) * r + off + i) * r + off + j] = (*p.exact_c)[(k * p.dim + i) * p.dim + j];
        }
    a.k_metric.block(off, off, p.dim, p.dim) = p.k_metric;
    for (const auto& b : p.blocks) a.blocks.push_back({b.kind, off + b.offset, b.dim});
    off += p.dim;
  }
  if (exact) a.exact_c = std::move(ex);
  a.k_exact_identity = kid;
  return a;
}

double jacobi_residual(const LieAlgebra& alg) {
  const int r = alg.dim;
  if (alg.c.size() != static_cast<std::size_t>(r) * r * r) throw InputError("structure constants shape mismatch");
  double worst = 0.0;
  if (alg.exact_c) {
    const auto& e = *alg.exact_c;
    auto C = [&](int k, int i, int j) -> const Surd3& { return e[(k * r + i) * r + j]; };
    for (int m = 0; m < r; ++m)
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
          for (int k = 0; k < r; ++k) {
            Surd3 s;
            for (int l = 0; l < r; ++l) s = s + C(m, i, l) * C(l, j, k) + C(m, j, l) * C(l, k, i) + C(m, k, l) * C(l, i, j);
            worst = std::max(worst, std::abs(s.to_double()));
          }
    return worst;
  }
  for (int m = 0; m < r; ++m)
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k) {
          double s = 0.0;
          for (int l = 0; l < r; ++l)
            s += alg(m, i, l) * alg(l, j, k) + alg(m, j, l) * alg(l, k, i) + alg(m, k, l) * alg(l, i, j);
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

double unimodularity_residual(const LieAlgebra& alg) {
  const int r = alg.dim;
  double worst = 0.0;
  for (int j = 0; j < r; ++j) {
    if (alg.exact_c) {
      Surd3 s;
      for (int i = 0; i < r; ++i) s = s + (*alg.exact_c)[(i * r + i) * r + j];
      worst = std::max(worst, std::abs(s.to_double()));
    } else {
      double s = 0.0;
      for (int i = 0; i < r; ++i) s += alg(i, i, j);
      worst = std::max(worst, std::abs(s));
    }
  }
  return worst;
}

Eigen::MatrixXd killing_form(const LieAlgebra& alg) {
  const int r = alg.dim;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(r, r);
  for (int j = 0; j < r; ++j)
    for (int k = 0; k < r; ++k) {
      double s = 0.0;
      for (int m = 0; m < r; ++m)
        for (int n = 0; n < r; ++n) s += alg(m, j, n) * alg(n, k, m);
      B(j, k) = s;
    }
  return B;
}

double killing_contraction(const LieAlgebra& alg) {
  const int r = alg.dim;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(alg.k_metric);
  if (!lu.isInvertible()) throw InputError("metric k is singular");
  const Eigen::MatrixXd kinv = lu.inverse();
  double direct = 0.0;
  for (int i = 0; i < r; ++i)
    for (int l = 0; l < r; ++l)
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k) direct += alg(i, l, k) * alg(l, i, j) * kinv(j, k);
  direct *= 0.5;
  const double via_killing = 0.5 * (killing_form(alg).cwiseProduct(kinv)).sum();
  if (std::abs(direct - via_killing) > 1e-12 * std::max(1.0, std::abs(direct)))
    throw ConsistencyError("<B,k> routes disagree");
  return direct;
}

double ad_invariance_residual(const LieAlgebra& alg) {
  const int r = alg.dim;
  double worst = 0.0;
  const bool exact = alg.exact_c && alg.k_exact_identity;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int m = 0; m < r; ++m) {
        if (exact) {
          // k = identity: k_ml c^l_ij + k_jl c^l_im = c^m_ij + c^j_im
          const Surd3 s = (*alg.exact_c)[(m * r + i) * r + j] + (*alg.exact_c)[(j * r + i) * r + m];
          worst = std::max(worst, std::abs(s.to_double()));
          continue;
        }
        double s = 0.0;
        for (int l = 0; l < r; ++l) s += alg.k_metric(m, l) * alg(l, i, j) + alg.k_metric(j, l) * alg(l, i, m);
        worst = std::max(worst, std::abs(s));
      }
  return worst;
}

GroupElement GroupElement::u1(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a < 0) a += two_pi;
  return {U1Element{a}};
}

GroupElement GroupElement::su2(const Quatd& q) {
  if (std::abs(norm(q) - 1.0) > 1e-12) throw InputError("SU(2) element is not a unit quaternion");
  return {SU2Element{q}};
}

GroupElement GroupElement::product(std::vector<GroupElement> parts) { return {ProductElement{std::move(parts)}}; }

GroupElement GroupElement::operator*(const GroupElement& other) const {
  if (value.index() != other.value.index()) throw InputError("group elements of different groups");
  if (auto* a = std::get_if<U1Element>(&value)) return u1(a->angle + std::get<U1Element>(other.value).angle);
  if (auto* a = std::get_if<SU2Element>(&value)) {
    Quatd q = a->q * std::get<SU2Element>(other.value).q;
    const double n = norm(q);
    return su2({q.w / n, q.x / n, q.y / n, q.z / n});
  }
  const auto& pa = std::get<ProductElement>(value).parts;
  const auto& pb = std::get<ProductElement>(other.value).parts;
  if (pa.size() != pb.size()) throw InputError("product elements of different shape");
  std::vector<GroupElement> out;
  for (std::size_t i = 0; i < pa.size(); ++i) out.push_back(pa[i] * pb[i]);
  return product(std::move(out));
}

Eigen::Matrix3d rotation_matrix(const Quatd& q) {
  Eigen::Matrix3d R;
  for (int j = 0; j < 3; ++j) {
    std::array<double, 3> e{0.0, 0.0, 0.0};
    e[j] = 1.0;
    const auto v = rotate(q, e);
    for (int i = 0; i < 3; ++i) R(i, j) = v[i];
  }
  return R;
}

namespace {

void fill_adjoint(const GroupElement& g, const LieAlgebra& alg, std::size_t& block, Eigen::MatrixXd& S) {
  if (block >= alg.blocks.size()) throw InputError("group element has more factors than the algebra");
  if (auto* p = std::get_if<ProductElement>(&g.value)) {
    for (const auto& part : p->parts) fill_adjoint(part, alg, block, S);
    return;
  }
  const auto& b = alg.blocks[block++];
  if (std::holds_alternative<U1Element>(g.value)) {
    if (b.kind != LieAlgebra::Kind::u1) throw InputError("U(1) element paired with a non-abelian block");
    S.block(b.offset, b.offset, b.dim, b.dim).setIdentity();
    return;
  }
  if (b.kind != LieAlgebra::Kind::su2) throw InputError("SU(2) element paired with a non-su(2) block");
  S.block(b.offset, b.offset, 3, 3) = rotation_matrix(std::get<SU2Element>(g.value).q);
}

}  // namespace

Eigen::MatrixXd adjoint_matrix(const GroupElement& g, const LieAlgebra& alg) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(alg.dim, alg.dim);
  std::size_t block = 0;
  fill_adjoint(g, alg, block, S);
  if (block != alg.blocks.size()) throw InputError("group element has fewer factors than the algebra");
  return S;
}

}  // namespace kkcheck
