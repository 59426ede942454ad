#include "kkcheck/errors.hpp"
#include "kkcheck/variational.hpp"

#include <cmath>

namespace kkcheck {

namespace {

using Jets = std::vector<Jet>;

bool is_seed(JetArgs z) {
  const int n = static_cast<int>(z.size());
  for (int i = 0; i < n; ++i) {
    const auto c = z[i].coefficients();
    for (std::size_t k = 1; k < c.size(); ++k)
      if (c[k] != (static_cast<int>(k) == i + 1 ? 1.0 : 0.0)) return false;
  }
  return true;
}

std::vector<double> point_of(JetArgs z) {
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = z[i].value();
  return p;
}

// Back from local seed variables to the variables of z.
Jets pull_back_to(Jets v, JetArgs z, int order) {
  const bool seeds = is_seed(z);
  for (auto& j : v) {
    j = j.truncated(order);
    if (!seeds) j = compose(j, z);
  }
  return v;
}

/// Runs g at seeds one order above z: g may differentiate once.
Jets lifted(JetArgs z, const std::function<Jets(JetArgs)>& g) {
  const int k = z[0].order();
  if (k + 1 > Jet::kMaxOrder) throw InputError("gauge transform needs jets below the maximum order");
  const auto p = point_of(z);
  return pull_back_to(g(seed_point(p, k + 1)), z, k);
}

/// field(w) for arbitrary jets w, evaluated in its own seed variables and composed.
Jets at_image(const CoeffField& field, JetArgs w) {
  Jets v = field(seed_point(point_of(w), w[0].order()));
  for (auto& j : v) j = compose(j, w);
  return v;
}

Jets fibred_image(const ChartMap& T, JetArgs z) {
  auto w = T(z);
  if (w.size() != z.size()) throw InputError("chart map changes dimension");
  for (int a = 0; a < 4; ++a) {
    const std::span<const double> cw = w[a].coefficients(), cz = z[a].coefficients();
    for (std::size_t k = 0; k < cw.size(); ++k)
      if (std::abs(cw[k] - cz[k]) > 1e-12) throw InputError("chart map is not fibred over the base");
  }
  return w;
}

// theta^R_mu -> theta^R_nu(T) d_mu T^nu for `rows` one-forms; w of order k + 1.
Jets pull_rows(const Jets& th, JetArgs w, int rows, int k) {
  const int n = static_cast<int>(w.size());
  Jets out(static_cast<std::size_t>(rows * n), Jet::constant(w[0].dim(), k, 0.0));
  for (int nu = 0; nu < n; ++nu)
    for (int mu = 0; mu < n; ++mu) {
      const Jet dT = w[nu].derivative(mu);
      if (dT.is_constant() && dT.value() == 0.0) continue;
      for (int R = 0; R < rows; ++R) out[R * n + mu].add_product(th[R * n + nu].truncated(k), dT);
    }
  return out;
}

CoeffField pulled_rows(const CoeffField& coeffs, const ChartMap& T, int rows, bool fibred) {
  return [coeffs, T, rows, fibred](JetArgs z) {
    return lifted(z, [&](JetArgs hi) {
      const auto w = fibred ? fibred_image(T, hi) : T(hi);
      if (w.size() != hi.size()) throw InputError("chart map changes dimension");
      return pull_rows(at_image(coeffs, w), w, rows, hi[0].order() - 1);
    });
  };
}

CoeffField composed(const CoeffField& c, const ChartMap& T, bool fibred) {
  return [c, T, fibred](JetArgs z) {
    const auto w = fibred ? fibred_image(T, z) : T(z);
    if (w.size() != z.size()) throw InputError("chart map changes dimension");
    return at_image(c, w);
  };
}

Jet det3(const Jets& E, int m0, int m1, int m2, int a0, int a1, int a2) {
  auto at = [&](int mu, int a) -> const Jet& { return E[static_cast<std::size_t>(mu * 4 + a)]; };
  return at(m0, a0) * (at(m1, a1) * at(m2, a2) - at(m1, a2) * at(m2, a1)) -
         at(m0, a1) * (at(m1, a0) * at(m2, a2) - at(m1, a2) * at(m2, a0)) +
         at(m0, a2) * (at(m1, a0) * at(m2, a1) - at(m1, a1) * at(m2, a0));
}

// Full antisymmetric matrices from pair slots and back.
Jets to_matrix(const Jets& slots, std::size_t off, int n, const std::vector<std::pair<int, int>>& pairs) {
  Jets P(static_cast<std::size_t>(n * n), slots.at(off) * 0.0);
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto [J, K] = pairs[q];
    P[J * n + K] = slots[off + q];
    P[K * n + J] = -slots[off + q];
  }
  return P;
}

// L P L^T
Jets congruence(const Eigen::MatrixXd& L, const Jets& P, int n) {
  Jets tmp(P.size(), P[0] * 0.0), out(P.size(), P[0] * 0.0);
  for (int J = 0; J < n; ++J)
    for (int Q = 0; Q < n; ++Q)
      for (int R = 0; R < n; ++R)
        if (L(J, R) != 0.0) tmp[J * n + Q].add_scaled(P[R * n + Q], L(J, R));
  for (int J = 0; J < n; ++J)
    for (int K = 0; K < n; ++K)
      for (int Q = 0; Q < n; ++Q)
        if (L(K, Q) != 0.0) out[J * n + K].add_scaled(tmp[J * n + Q], L(K, Q));
  return out;
}

Eigen::MatrixXd lift_adjoint(const Eigen::MatrixXd& S) {
  const auto r = S.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(4 + r, 4 + r);
  L.bottomRightCorner(r, r) = S;
  return L;
}

/// Momenta pi_A (one antisymmetric matrix per A, stored in `pairs` slots) -> sum_B Linv^B_A L pi_B L^T.
Jets coadjoint(const Jets& pi, int count, int n, const std::vector<std::pair<int, int>>& pairs, const Eigen::MatrixXd& L,
               const Eigen::MatrixXd& Ainv) {
  const std::size_t m = pairs.size();
  std::vector<Jets> moved;
  for (int B = 0; B < count; ++B) moved.push_back(congruence(L, to_matrix(pi, B * m, n, pairs), n));
  Jets out(pi.size(), pi[0] * 0.0);
  for (int A = 0; A < count; ++A)
    for (int B = 0; B < count; ++B) {
      if (Ainv(B, A) == 0.0) continue;
      for (std::size_t q = 0; q < m; ++q) {
        const auto [J, K] = pairs[q];
        out[A * m + q].add_scaled(moved[B][J * n + K], Ainv(B, A));
      }
    }
  return out;
}

std::vector<std::pair<int, int>> all_pairs(int n) {
  std::vector<std::pair<int, int>> p(static_cast<std::size_t>(n * (n - 1) / 2));
  for (int J = 0; J < n; ++J)
    for (int K = J + 1; K < n; ++K) p[pair_index(n, J, K)] = {J, K};
  return p;
}

std::vector<std::pair<int, int>> eym_pairs(int r) {
  std::vector<std::pair<int, int>> p(static_cast<std::size_t>(eym_slots(r)));
  for (int a = 0; a < 4; ++a)
    for (int k = 0; k < r; ++k) p[eym_slot_ak(r, a, k)] = {a, 4 + k};
  for (int j = 0; j < r; ++j)
    for (int k = j + 1; k < r; ++k) p[eym_slot_jk(r, j, k)] = {4 + j, 4 + k};
  return p;
}

}  // namespace

MaxwellFields pullback_fields(const MaxwellFields& f, const ChartMap& T) {
  MaxwellFields g = f;
  g.theta = pulled_rows(f.theta, T, 1, true);
  g.pi2 = composed(f.pi2, T, true);
  g.pi1 = composed(f.pi1, T, true);
  return g;
}

YMFields pullback_fields(const YMFields& f, const ChartMap& T) {
  YMFields g = f;
  g.theta = pulled_rows(f.theta, T, f.alg.dim, true);
  g.pi = composed(f.pi, T, true);
  return g;
}

EYMFields pullback_fields(const EYMFields& f, const ChartMap& T) {
  EYMFields g = f;
  const int n = f.theta.dim;
  g.theta.coeffs = pulled_rows(f.theta.coeffs, T, n, false);
  g.phi = pulled_rows(f.phi, T, n * (n - 1) / 2, false);
  g.pi = composed(f.pi, T, false);
  return g;
}

MaxwellFields shift_exact(const MaxwellFields& f, const ScalarField& V) {
  MaxwellFields g = f;
  g.theta = [f, V](JetArgs z) {
    return lifted(z, [&](JetArgs hi) {
      const int k = hi[0].order() - 1;
      auto th = f.theta(hi);
      const Jet v = V(hi.first(4));
      for (int mu = 0; mu < 4; ++mu) th[mu] = th[mu].truncated(k) + v.derivative(mu);
      th[4] = th[4].truncated(k);
      return th;
    });
  };
  // 1/2 pi^{ab} e_ab ^ dV = pi^{ab} V_b hat_a
  g.pi1 = [f, V](JetArgs z) {
    return lifted(z, [&](JetArgs hi) {
      const int k = hi[0].order() - 1;
      const Jet v = V(hi.first(4));
      Jets E = invert(f.e(hi.first(4)), 4);
      for (auto& x : E) x = x.truncated(k);
      Jets Vb(4, Jet::constant(hi[0].dim(), k, 0.0));
      for (int b = 0; b < 4; ++b)
        for (int mu = 0; mu < 4; ++mu) Vb[b].add_product(E[mu * 4 + b], v.derivative(mu));
      const auto p2 = f.pi2(hi);
      auto p1 = f.pi1(hi);
      for (auto& x : p1) x = x.truncated(k);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          if (a == b) continue;
          const Jet pab = p2[base_pair(std::min(a, b), std::max(a, b))].truncated(k) * (a < b ? 1.0 : -1.0);
          p1[a].add_product(pab, Vb[b]);
        }
      return p1;
    });
  };
  return g;
}

MaxwellFields shift_psi(const MaxwellFields& f, const FormField& psi, std::span<const std::vector<double>> samples,
                        bool unchecked) {
  for (const auto& s : samples) {
    const FormJ p = psi(seed_point(s, 1));
    if (p.dim() != 5 || p.degree() != 3 || p.basis() != Basis::coordinate)
      throw InputError("psi must be a coordinate 3-form on the 5-dim chart");
    for (const auto& [m, v] : p.terms())
      if ((m & bit(4)) && std::abs(v.value()) > 1e-12) throw InputError("psi has fibre components");
    if (!unchecked && max_abs(values(ext_d(p))) > 1e-9) throw PreconditionError("psi is not closed");
  }
  MaxwellFields g = f;
  g.pi1 = [f, psi](JetArgs z) {
    const FormJ p = psi(z);
    const Jets E = invert(f.e(z.first(4)), 4);
    auto p1 = f.pi1(z);
    for (int d = 0; d < 4; ++d) {
      const FormD h = window_volume(5, 0, 4, std::vector<int>{d});
      const auto& [hm, hs] = *h.terms().begin();
      int abc[3], q = 0;
      for (int a = 0; a < 4; ++a)
        if (hm & bit(a)) abc[q++] = a;
      // frame component psi_{abc} from the coordinate ones
      for (const auto& [m, v] : p.terms()) {
        if (m & bit(4)) continue;
        int mu[3], t = 0;
        for (int x = 0; x < 4; ++x)
          if (m & bit(x)) mu[t++] = x;
        p1[d].add_product(v, det3(E, mu[0], mu[1], mu[2], abc[0], abc[1], abc[2]) * (-hs));
      }
    }
    return p1;
  };
  return g;
}

YMFields shift_chi(const YMFields& f, const CoeffField& chi, std::span<const std::vector<double>> samples) {
  const int r = f.alg.dim, n = 4 + r, P = n * (n - 1) / 2;
  YMFields c = f;
  c.pi = chi;
  for (const auto& s : samples) {
    const auto x = chi(seed_point(s, 0));
    if (static_cast<int>(x.size()) != r * P) throw InputError("chi has the wrong number of components");
    for (int i = 0; i < r; ++i)
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
          if (std::abs(x[i * P + pair_index(n, a, b)].value()) > 1e-12) throw InputError("chi has horizontal pair components");
    const YMResidual res = el_residual_ym(c, s);
    double cond = 0.0;
    for (int i = 0; i < r; ++i) {
      const FormD w = wedge(monomial(n, bit(4 + i)), res.d[i]);
      if (const double* v = w.find((Mask{1} << n) - 1)) cond += *v;
    }
    if (std::abs(cond) > 1e-9) throw PreconditionError("theta^i ^ d^theta chi_i does not vanish");
  }
  YMFields g = f;
  g.pi = [p = f.pi, chi](JetArgs z) {
    auto a = p(z);
    const auto b = chi(z);
    for (std::size_t q = 0; q < a.size(); ++q) a[q] += b[q];
    return a;
  };
  return g;
}

YMFields dress_constant(const YMFields& f, const GroupElement& g) {
  const Eigen::MatrixXd S = adjoint_matrix(g, f.alg), Sinv = S.inverse();
  const int r = f.alg.dim, n = 4 + r;
  YMFields h = f;
  h.theta = [t = f.theta, S, r, n](JetArgs z) {
    const auto th = t(z);
    Jets out(th.size(), th[0] * 0.0);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        for (int mu = 0; mu < n; ++mu) out[i * n + mu].add_scaled(th[j * n + mu], S(i, j));
    return out;
  };
  h.pi = [p = f.pi, L = lift_adjoint(S), Sinv, r, n](JetArgs z) { return coadjoint(p(z), r, n, all_pairs(n), L, Sinv); };
  return h;
}

EYMFields dress_constant(const EYMFields& f, const GroupElement& g) {
  const int r = f.alg.dim, n = 4 + r;
  if (f.theta.dim != n) throw InputError("frame dimension does not match the algebra");
  const Eigen::MatrixXd L = lift_adjoint(adjoint_matrix(g, f.alg)), Linv = L.inverse();
  EYMFields h = f;
  h.theta.coeffs = [t = f.theta.coeffs, L, n](JetArgs z) {
    const auto th = t(z);
    Jets out(th.size(), th[0] * 0.0);
    for (int I = 0; I < n; ++I)
      for (int K = 0; K < n; ++K)
        if (L(I, K) != 0.0)
          for (int mu = 0; mu < n; ++mu) out[I * n + mu].add_scaled(th[K * n + mu], L(I, K));
    return out;
  };
  h.phi = [p = f.phi, L, n](JetArgs z) {
    const auto ph = p(z);
    const auto pairs = all_pairs(n);
    const std::size_t P = pairs.size();
    Jets out(ph.size(), ph[0] * 0.0);
    for (int mu = 0; mu < n; ++mu) {
      Jets col(P, ph[0]);
      for (std::size_t q = 0; q < P; ++q) col[q] = ph[q * n + mu];
      const Jets M = congruence(L, to_matrix(col, 0, n, pairs), n);
      for (std::size_t q = 0; q < P; ++q) out[q * n + mu] = M[pairs[q].first * n + pairs[q].second];
    }
    return out;
  };
  h.pi = [p = f.pi, L, Linv, r, n](JetArgs z) { return coadjoint(p(z), n, n, eym_pairs(r), L, Linv); };
  return h;
}

EYMFields dress_local(const EYMFields& f, const CoeffField& S) {
  const int r = f.alg.dim, n = 4 + r;
  // L = diag(1, S) as jets
  auto lift = [S, r, n](JetArgs z) {
    const auto s = S(z);
    if (static_cast<int>(s.size()) != r * r) throw InputError("dressing matrix has the wrong size");
    Jets L(static_cast<std::size_t>(n * n), s[0] * 0.0);
    for (int a = 0; a < 4; ++a) L[a * n + a] += 1.0;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) L[(4 + i) * n + 4 + j] = s[i * r + j];
    return L;
  };
  auto cong = [n](const Jets& L, const Jets& P) {
    Jets tmp(P.size(), P[0] * 0.0), out(P.size(), P[0] * 0.0);
    for (int J = 0; J < n; ++J)
      for (int Q = 0; Q < n; ++Q)
        for (int R = 0; R < n; ++R) tmp[J * n + Q].add_product(L[J * n + R], P[R * n + Q]);
    for (int J = 0; J < n; ++J)
      for (int K = 0; K < n; ++K)
        for (int Q = 0; Q < n; ++Q) out[J * n + K].add_product(tmp[J * n + Q], L[K * n + Q]);
    return out;
  };
  EYMFields h = f;
  h.theta.coeffs = [t = f.theta.coeffs, lift, n](JetArgs z) {
    const auto th = t(z);
    const Jets L = lift(z);
    Jets out(th.size(), th[0] * 0.0);
    for (int I = 0; I < n; ++I)
      for (int K = 0; K < n; ++K)
        for (int mu = 0; mu < n; ++mu) out[I * n + mu].add_product(L[I * n + K], th[K * n + mu]);
    return out;
  };
  h.phi = [p = f.phi, lift, cong, n](JetArgs z) {
    const auto ph = p(z);
    const Jets L = lift(z);
    const auto pairs = all_pairs(n);
    const std::size_t P = pairs.size();
    Jets out(ph.size(), ph[0] * 0.0);
    for (int mu = 0; mu < n; ++mu) {
      Jets col(P, ph[0]);
      for (std::size_t q = 0; q < P; ++q) col[q] = ph[q * n + mu];
      const Jets M = cong(L, to_matrix(col, 0, n, pairs));
      for (std::size_t q = 0; q < P; ++q) out[q * n + mu] = M[pairs[q].first * n + pairs[q].second];
    }
    return out;
  };
  h.pi = [p = f.pi, lift, cong, r, n](JetArgs z) {
    const auto pi = p(z);
    const Jets L = lift(z), Linv = invert(L, n);
    const auto pairs = eym_pairs(r);
    const std::size_t m = pairs.size();
    std::vector<Jets> moved;
    for (int B = 0; B < n; ++B) moved.push_back(cong(L, to_matrix(pi, B * m, n, pairs)));
    Jets out(pi.size(), pi[0] * 0.0);
    for (int A = 0; A < n; ++A)
      for (int B = 0; B < n; ++B)
        for (std::size_t q = 0; q < m; ++q)
          out[A * m + q].add_product(Linv[B * n + A], moved[B][pairs[q].first * n + pairs[q].second]);
    return out;
  };
  return h;
}

}  // namespace kkcheck
