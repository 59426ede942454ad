#include "kkcheck/errors.hpp"
#include "kkcheck/variational.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>

namespace kkcheck {

namespace {

constexpr double eta(int a) { return a == 0 ? -1.0 : 1.0; }

double top(const FormD& a) {
  const double* v = a.find((Mask{1} << a.dim()) - 1);
  return v ? *v : 0.0;
}

/// acc += s * (a ^ b) for frame-basis forms.
void add_wedge(FormD& acc, const FormD& a, const FormD& b, double s = 1.0) {
  for (const auto& [ma, va] : a.terms())
    for (const auto& [mb, vb] : b.terms())
      if (!(ma & mb)) acc.add(ma | mb, va * vb, s * wedge_sign(ma, mb));
}

struct Hats {
  int n = 0;
  std::vector<FormD> h1, h2, h3;
  std::vector<double> s2;  // top(hat_IJ ^ theta^I ^ theta^J)
  const FormD& one(int I) const { return h1[static_cast<std::size_t>(I)]; }
  const FormD& two(int I, int J) const { return h2[static_cast<std::size_t>(I * n + J)]; }
  const FormD& three(int I, int J, int K) const { return h3[static_cast<std::size_t>((I * n + J) * n + K)]; }
  double pair_top(int I, int J) const { return s2[static_cast<std::size_t>(I * n + J)]; }
};

const Hats& hats(int n) {
  static std::map<int, Hats> cache;
  static std::mutex mu;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Hats h;
  h.n = n;
  for (int I = 0; I < n; ++I) {
    h.h1.push_back(hat_volume(n, {I}));
    for (int J = 0; J < n; ++J) {
      h.h2.push_back(hat_volume(n, {I, J}));
      h.s2.push_back(I == J ? 0.0 : top(wedge(h.h2.back(), monomial(n, bit(I) | bit(J)))));
      for (int K = 0; K < n; ++K) h.h3.push_back(hat_volume(n, {I, J, K}));
    }
  }
  return cache.emplace(n, std::move(h)).first->second;
}

FormD one_form(int n, const double* c) {
  FormD w(n, 1, Basis::frame);
  for (int K = 0; K < n; ++K)
    if (c[K] != 0.0) w.add(bit(K), c[K]);
  return w;
}

FormD two_form(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  FormD w(n, 2, Basis::frame);
  for (int M = 0; M < n; ++M)
    for (int N = M + 1; N < n; ++N)
      if (A(M, N) != 0.0) w.add(bit(M) | bit(N), A(M, N));
  return w;
}

/// EYM fields at a point in the frame basis of theta; dense components.
struct EYMLocal {
  int r = 0, n = 0, m = 0;
  FramePoint fp;
  Eigen::MatrixXd h;
  Eigen::MatrixXd phiv;            // pairs x n
  std::vector<double> mix;         // phi^I_K components, (I, K, M)
  std::vector<Eigen::MatrixXd> Phi;  // per pair, antisymmetric
  std::vector<Eigen::MatrixXd> Th;   // Theta^I, antisymmetric
  std::vector<double> pc;          // pi_K^{JL}, antisymmetric in J L
  std::vector<Jet> pi;             // n x m
  std::vector<FormD> slot_hat;
  const Hats* H = nullptr;

  std::vector<double> up;          // phi^{IJ} components, (I, J, M)
  double phi_up(int I, int J, int M) const { return up[static_cast<std::size_t>((I * n + J) * n + M)]; }
  const double* mixed(int I, int K) const { return mix.data() + (I * n + K) * n; }
  FormD mixed_form(int I, int K) const { return one_form(n, mixed(I, K)); }
  double pic(int K, int J, int L) const { return pc[static_cast<std::size_t>((K * n + J) * n + L)]; }
  double theta(int K, int M, int N) const { return Th[static_cast<std::size_t>(K)](M, N); }
  FormD pi_form(int K) const {
    FormD s(n, n - 2, Basis::frame);
    for (int q = 0; q < m; ++q) s += slot_hat[static_cast<std::size_t>(q)] * pi[static_cast<std::size_t>(K * m + q)].value();
    return s;
  }
};

EYMLocal eym_local(const EYMFields& f, JetArgs z) {
  EYMLocal L;
  L.r = f.alg.dim;
  L.n = 4 + L.r;
  L.m = eym_slots(L.r);
  L.H = &hats(4 + L.r);
  const Hats& H = *L.H;
  const int n = L.n, r = L.r, P = n * (n - 1) / 2;
  if (f.theta.dim != n || static_cast<int>(z.size()) != n) throw InputError("EYM chart dimension is 4 + r");
  L.fp = frame_point(f.theta.coeffs(z), n);
  L.h = FrameMetric::for_algebra(f.alg).h;

  const auto ph = f.phi(z);
  if (static_cast<int>(ph.size()) != P * n) throw InputError("connection component count");
  L.phiv.resize(P, n);
  for (int p = 0; p < P; ++p)
    L.phiv.row(p) = L.fp.components(std::span<const Jet>(ph.data() + p * n, static_cast<std::size_t>(n))).transpose();
  L.up.assign(static_cast<std::size_t>(n * n * n), 0.0);
  for (int I = 0; I < n; ++I)
    for (int J = I + 1; J < n; ++J)
      for (int M = 0; M < n; ++M) {
        const double v = L.phiv(pair_index(n, I, J), M);
        L.up[static_cast<std::size_t>((I * n + J) * n + M)] = v;
        L.up[static_cast<std::size_t>((J * n + I) * n + M)] = -v;
      }
  L.mix.assign(static_cast<std::size_t>(n * n * n), 0.0);
  for (int I = 0; I < n; ++I)
    for (int K = 0; K < n; ++K)
      for (int Q = 0; Q < n; ++Q)
        if (L.h(Q, K) != 0.0)
          for (int M = 0; M < n; ++M) L.mix[static_cast<std::size_t>((I * n + K) * n + M)] += L.phi_up(I, Q, M) * L.h(Q, K);
  for (int I = 0; I < n; ++I)
    for (int J = I + 1; J < n; ++J) {
      const int p = pair_index(n, I, J);
      Eigen::MatrixXd F = L.fp.curl(std::span<const Jet>(ph.data() + p * n, static_cast<std::size_t>(n)));
      for (int K = 0; K < n; ++K) {
        const double* a = L.mixed(I, K);
        for (int M = 0; M < n; ++M)
          for (int N = 0; N < n; ++N) F(M, N) += a[M] * L.phi_up(K, J, N) - a[N] * L.phi_up(K, J, M);
      }
      L.Phi.push_back(std::move(F));
    }
  for (int I = 0; I < n; ++I) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [mk, v] : L.fp.dw[static_cast<std::size_t>(I)].terms()) {
      const int M = std::countr_zero(mk), N = std::countr_zero(mk & (mk - 1));
      T(M, N) += v;
      T(N, M) -= v;
    }
    if (I >= 4)
      for (int j = 0; j < r; ++j)
        for (int k = j + 1; k < r; ++k) {
          T(4 + j, 4 + k) += f.alg(I - 4, j, k);
          T(4 + k, 4 + j) -= f.alg(I - 4, j, k);
        }
    L.Th.push_back(std::move(T));
  }
  L.pi = f.pi(z);
  if (static_cast<int>(L.pi.size()) != n * L.m) throw InputError("EYM momentum component count");
  L.pc.assign(static_cast<std::size_t>(n * n * n), 0.0);
  auto put = [&](int K, int J, int M, double v) {
    L.pc[static_cast<std::size_t>((K * n + J) * n + M)] = v;
    L.pc[static_cast<std::size_t>((K * n + M) * n + J)] = -v;
  };
  for (int K = 0; K < n; ++K) {
    for (int a = 0; a < 4; ++a)
      for (int k = 0; k < r; ++k) put(K, a, 4 + k, L.pi[static_cast<std::size_t>(K * L.m + eym_slot_ak(r, a, k))].value());
    for (int j = 0; j < r; ++j)
      for (int k = j + 1; k < r; ++k) put(K, 4 + j, 4 + k, L.pi[static_cast<std::size_t>(K * L.m + eym_slot_jk(r, j, k))].value());
  }
  for (int a = 0; a < 4; ++a)
    for (int k = 0; k < r; ++k) L.slot_hat.push_back(H.two(a, 4 + k));
  for (int j = 0; j < r; ++j)
    for (int k = j + 1; k < r; ++k) L.slot_hat.push_back(H.two(4 + j, 4 + k));
  return L;
}

/// d^theta pi_I in the frame basis.
std::vector<FormD> covariant_dpi(const EYMFields& f, const EYMLocal& L) {
  const int n = L.n, r = L.r;
  std::vector<FormD> dh;
  for (const auto& hq : L.slot_hat) dh.push_back(L.fp.d(hq));
  std::vector<FormD> pis, out;
  for (int I = 0; I < n; ++I) pis.push_back(L.pi_form(I));
  for (int I = 0; I < n; ++I) {
    FormD d(n, n - 1, Basis::frame);
    for (int q = 0; q < L.m; ++q) {
      const Jet& c = L.pi[static_cast<std::size_t>(I * L.m + q)];
      add_wedge(d, L.fp.grad(c), L.slot_hat[static_cast<std::size_t>(q)]);
      d += dh[static_cast<std::size_t>(q)] * c.value();
    }
    if (I >= 4)
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k)
          if (f.alg(j, k, I - 4) != 0.0) add_wedge(d, monomial(n, bit(4 + k)), pis[static_cast<std::size_t>(4 + j)], -f.alg(j, k, I - 4));
    out.push_back(std::move(d));
  }
  return out;
}

/// The theta-equation forms E_I (frame basis).
std::vector<FormD> theta_equation(const EYMFields& f, const EYMLocal& L, bool literal) {
  const int n = L.n;
  const Hats& H = *L.H;
  auto E = covariant_dpi(f, L);
  double trace = 0.0;
  for (int K = 0; K < n; ++K)
    for (int J = 0; J < n; ++J)
      for (int M = J + 1; M < n; ++M) trace += L.pic(K, J, M) * L.theta(K, J, M);
  for (int I = 0; I < n; ++I) {
    FormD& e = E[static_cast<std::size_t>(I)];
    for (int J = 0; J < n; ++J)
      for (int K = J + 1; K < n; ++K) {
        if (J == I || K == I) continue;
        const Eigen::MatrixXd& F = L.Phi[static_cast<std::size_t>(pair_index(n, J, K))];
        for (const auto& [m0, v0] : H.three(I, J, K).terms()) {
          const Mask rest = ((Mask{1} << n) - 1) & ~m0;
          for (Mask a = rest; a; a &= a - 1)
            for (Mask b = a & (a - 1); b; b &= b - 1) {
              const int M = std::countr_zero(a), N = std::countr_zero(b);
              const Mask mn = bit(M) | bit(N);
              e.add(m0 | mn, v0 * F(M, N), wedge_sign(m0, mn));
            }
        }
      }
    for (int l = literal ? 4 : 0; l < n; ++l) {
      double s = 0.0;
      for (int K = 0; K < n; ++K)
        for (int J = 0; J < n; ++J) s += L.theta(K, I, J) * L.pic(K, l, J);
      if (s != 0.0) e -= H.one(l) * s;
    }
    if (!literal) e += H.one(I) * trace;
    e -= H.one(I) * f.lambda0;
  }
  return E;
}

/// d^phi hat_IJ = d hat_IJ - phi^K_I ^ hat_KJ - phi^K_J ^ hat_IK.
FormD covariant_dhat(const EYMLocal& L, int I, int J) {
  const Hats& H = *L.H;
  FormD c = L.fp.d(H.two(I, J));
  for (int K = 0; K < L.n; ++K) {
    add_wedge(c, L.mixed_form(K, I), H.two(K, J), -1.0);
    add_wedge(c, L.mixed_form(K, J), H.two(I, K), -1.0);
  }
  return c;
}

}  // namespace

int eym_slots(int r) { return 4 * r + r * (r - 1) / 2; }
int eym_slot_ak(int r, int a, int k) {
  if (a < 0 || a > 3 || k < 0 || k >= r) throw InputError("momentum slot (a, k) out of range");
  return a * r + k;
}
int eym_slot_jk(int r, int j, int k) {
  if (!(0 <= j && j < k && k < r)) throw InputError("momentum slot (j, k) needs j < k");
  return 4 * r + pair_index(r, j, k);
}

double eym_density(const EYMFields& f, std::span<const double> z) {
  const auto zs = seed_point(z, 1);
  const EYMLocal L = eym_local(f, zs);
  const Hats& H = *L.H;
  const int n = L.n;
  double s = -f.lambda0;
  for (int I = 0; I < n; ++I)
    for (int J = I + 1; J < n; ++J) s += H.pair_top(I, J) * L.Phi[static_cast<std::size_t>(pair_index(n, I, J))](I, J);
  // pi_K ^ Theta^K: only the slot pair survives
  for (int K = 0; K < n; ++K)
    for (int J = 0; J < n; ++J)
      for (int M = J + 1; M < n; ++M)
        if (const double p = L.pic(K, J, M); p != 0.0) s += p * H.pair_top(J, M) * L.theta(K, J, M);
  return s * L.fp.det;
}

double action_eym(const EYMFields& f, const Domain& d) {
  return integrate(d, [&](std::span<const double> z) { return eym_density(f, z); });
}

double EYMResidual::max() const {
  double m = std::max({a, b, c_agreement});
  for (const auto& x : c) m = std::max(m, max_abs(x));
  for (const auto& x : d) m = std::max(m, max_abs(x));
  return m;
}

EYMResidual el_residual_eym(const EYMFields& f, std::span<const double> z, bool literal) {
  const auto zs = seed_point(z, 1);
  const EYMLocal L = eym_local(f, zs);
  const int n = L.n, r = L.r;
  const Hats& H = *L.H;
  EYMResidual res;
  for (int I = 0; I < n; ++I) {
    for (int a = 0; a < 4; ++a)
      for (int k = 0; k < r; ++k) res.a = std::max(res.a, std::abs(L.theta(I, a, 4 + k)));
    for (int j = 0; j < r; ++j)
      for (int k = j + 1; k < r; ++k) res.b = std::max(res.b, std::abs(L.theta(I, 4 + j, 4 + k)));
  }
  // torsion d^phi theta^K = d theta^K + phi^K_L ^ theta^L
  std::vector<FormD> torsion;
  for (int K = 0; K < n; ++K) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [mk, v] : L.fp.dw[static_cast<std::size_t>(K)].terms()) {
      const int M = std::countr_zero(mk), N = std::countr_zero(mk & (mk - 1));
      T(M, N) += v;
      T(N, M) -= v;
    }
    for (int M = 0; M < n; ++M)
      for (int N = 0; N < n; ++N) T(M, N) += L.mixed(K, N)[M] - L.mixed(K, M)[N];
    torsion.push_back(two_form(T));
  }
  for (int I = 0; I < n; ++I)
    for (int J = I + 1; J < n; ++J) {
      FormD c = covariant_dhat(L, I, J);
      FormD alt(n, n - 1, Basis::frame);
      for (int K = 0; K < n; ++K)
        if (K != I && K != J) add_wedge(alt, torsion[static_cast<std::size_t>(K)], H.three(I, J, K));
      res.c_agreement = std::max(res.c_agreement, max_abs_diff(c, alt));
      res.c.push_back(std::move(c));
      res.c_alt.push_back(std::move(alt));
    }
  res.d = theta_equation(f, L, literal);
  return res;
}

double eym_pairing(const EYMFields& f, const EYMVariation& v, const Domain& d, bool literal) {
  return integrate(d, [&](std::span<const double> z) {
    const auto zs = seed_point(z, 1);
    const EYMLocal L = eym_local(f, zs);
    const int n = L.n;
    double s = 0.0;
    if (v.theta) {
      const auto E = theta_equation(f, L, literal);
      const auto dt = v.theta(zs);
      for (int I = 0; I < n; ++I) {
        const Eigen::VectorXd c = L.fp.components(std::span<const Jet>(dt.data() + I * n, static_cast<std::size_t>(n)));
        s += top(wedge(one_form(n, c.data()), E[static_cast<std::size_t>(I)]));
      }
    }
    if (v.phi) {
      const auto dp = v.phi(zs);
      for (int I = 0; I < n; ++I)
        for (int J = I + 1; J < n; ++J) {
          const int p = pair_index(n, I, J);
          const Eigen::VectorXd c = L.fp.components(std::span<const Jet>(dp.data() + p * n, static_cast<std::size_t>(n)));
          s += top(wedge(one_form(n, c.data()), covariant_dhat(L, I, J)));
        }
    }
    if (v.pi) {
      const auto dq = v.pi(zs);
      for (int K = 0; K < n; ++K) {
        FormD w(n, n - 2, Basis::frame);
        for (int q = 0; q < L.m; ++q) w += L.slot_hat[static_cast<std::size_t>(q)] * dq[static_cast<std::size_t>(K * L.m + q)].value();
        s += top(wedge(w, two_form(L.Th[static_cast<std::size_t>(K)])));
      }
    }
    return s * L.fp.det;
  });
}

// ---------------------------------------------------------------- vacuum solution

Chart eym_chart() { return Chart::box({-1, -1, -1, -1, -1, -1, -1}, {1, 1, 1, 1, 1, 1, 1}); }

EYMFields build_eym_vacuum_solution(double lambda0) {
  EYMFields f;
  f.alg = su2();
  f.lambda0 = lambda0;
  const KKFrames frames = kk_coframe(reduced_flat(3), f.alg, GroupChart::for_algebra(f.alg));
  f.theta = frames.raw;
  const LieAlgebra alg = f.alg;
  const GroupChart chart = GroupChart::for_algebra(f.alg);
  // Levi-Civita connection of the raw frame: phi^i_j = -1/2 c^i_jk theta^k, k = identity.
  // With A = 0, theta^k has only fibre components (the left Maurer-Cartan form).
  f.phi = [alg, chart](JetArgs z) {
    const int n = 7;
    const auto mc = chart.left_mc(z.subspan(4));
    std::vector<Jet> ph(static_cast<std::size_t>(21 * n), z[0] * 0.0);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          const double c = alg(i, j, k);
          if (c == 0.0) continue;
          const int p = pair_index(n, 4 + i, 4 + j);
          for (int m = 0; m < 3; ++m)
            ph[static_cast<std::size_t>(p * n + 4 + m)].add_scaled(mc[static_cast<std::size_t>(k * 3 + m)], -0.5 * c);
        }
    return ph;
  };
  // pi_i^{0i} = -x0 / 2, so that the dressed p_i^{j0} = delta_i^j x0 / 2
  f.pi = [](JetArgs z) {
    const int m = eym_slots(3);
    std::vector<Jet> p(static_cast<std::size_t>(7 * m), z[0] * 0.0);
    for (int i = 0; i < 3; ++i) p[static_cast<std::size_t>((4 + i) * m + eym_slot_ak(3, 0, i))] = -0.5 * z[0];
    return p;
  };
  return f;
}

EYMFields perturb(const EYMFields& f, const EYMVariation& v, double eps) {
  auto add = [eps](const CoeffField& base, const CoeffField& dv) -> CoeffField {
    if (!dv) return base;
    return [base, dv, eps](JetArgs z) {
      auto r = base(z);
      const auto d = dv(z);
      for (std::size_t i = 0; i < r.size(); ++i) r[i].add_scaled(d[i], eps);
      return r;
    };
  };
  EYMFields g = f;
  g.theta.coeffs = add(f.theta.coeffs, v.theta);
  g.phi = add(f.phi, v.phi);
  g.pi = add(f.pi, v.pi);
  return g;
}

// ---------------------------------------------------------------- projected system

ProjectedResidual projected_equations_check(const ReducedData& red, const LieAlgebra& alg, double lambda0,
                                            std::span<const double> x) {
  const int r = alg.dim;
  const ReducedPoint p = reduce(red, alg, x, 2);
  const FrameMetric m4 = FrameMetric::lorentz(Eigen::MatrixXd());
  const Eigen::MatrixXd ein_g = einstein_tensor(curvature(p.base, torsionfree_solve(p.base, m4)), m4).values();
  const Eigen::MatrixXd& k = alg.k_metric;
  const double Lambda = lambda_effective(lambda0, alg);

  // F_i^{ab} = k_ij eta^ac eta^bd F^j_cd (eta is its own inverse)
  auto Fup = [&](int i, int a, int b) {
    double s = 0.0;
    for (int j = 0; j < r; ++j) s += k(i, j) * p.f(j, a, b).value();
    return s * eta(a) * eta(b);
  };
  double norm2 = 0.0;
  for (int i = 0; i < r; ++i)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) norm2 += 0.5 * Fup(i, a, b) * p.f(i, a, b).value();

  ProjectedResidual res;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double stress = 0.0;
      for (int i = 0; i < r; ++i)
        for (int c = 0; c < 4; ++c) stress += p.f(i, a, c).value() * Fup(i, b, c);
      stress = 0.5 * (stress - (a == b ? 0.5 * norm2 : 0.0));
      res.einstein = std::max(res.einstein, std::abs(ein_g(a, b) + (a == b ? Lambda : 0.0) - stress));
    }

  // d^{gamma,A}_b F_i^{ab}
  std::vector<double> div(static_cast<std::size_t>(4 * r), 0.0);
  for (int i = 0; i < r; ++i)
    for (int a = 0; a < 4; ++a) {
      double s = 0.0;
      for (int b = 0; b < 4; ++b) {
        Jet Fj = p.f(0, 0, 0) * 0.0;
        for (int j = 0; j < r; ++j) Fj.add_scaled(p.f(j, a, b), k(i, j) * eta(a) * eta(b));
        s += p.base.derive(Fj, b).value();
        for (int j = 0; j < r; ++j)
          for (int kk = 0; kk < r; ++kk) s -= alg(j, kk, i) * p.A[static_cast<std::size_t>(kk * 4 + b)].value() * Fup(j, a, b);
        for (int c = 0; c < 4; ++c) s += Fup(i, c, b) * p.g(a, c, b).value() + p.g(c, b, c).value() * Fup(i, a, b);
      }
      div[static_cast<std::size_t>(i * 4 + a)] = s;
      res.yang_mills = std::max(res.yang_mills, std::abs(s));
    }

  const FrameData hf = reduced_frame_data(p, alg);
  const FrameMetric mh = FrameMetric::for_algebra(alg);
  const Eigen::MatrixXd ein_h = einstein_tensor(curvature(hf, torsionfree_solve(hf, mh)), mh).values();
  for (int i = 0; i < r; ++i)
    for (int a = 0; a < 4; ++a)
      res.chain = std::max(res.chain, std::abs(ein_h(4 + i, a) - 0.5 * div[static_cast<std::size_t>(i * 4 + a)]));
  return res;
}

}  // namespace kkcheck
