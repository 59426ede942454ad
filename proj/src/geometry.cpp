#include "kkcheck/geometry.hpp"

#include "kkcheck/errors.hpp"

#include <algorithm>
#include <cmath>

namespace kkcheck {
namespace {

Jet zero_like(const Jet& j, int order) { return Jet::constant(j.dim(), std::min(order, j.order()), 0.0); }

}  // namespace

FrameMetric FrameMetric::lorentz(const Eigen::MatrixXd& k) {
  const int r = static_cast<int>(k.rows());
  if (k.cols() != r) throw InputError("k must be square");
  if (r > 0) {
    if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw InputError("k must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) throw InputError("k must be positive definite");
  }
  FrameMetric m;
  m.h = Eigen::MatrixXd::Zero(4 + r, 4 + r);
  for (int a = 0; a < 4; ++a) m.h(a, a) = eta[static_cast<std::size_t>(a)];
  if (r > 0) m.h.bottomRightCorner(r, r) = k;
  m.h_inv = m.h.inverse();
  return m;
}

Jet FrameData::derive(const Jet& f, int M) const {
  Jet r = Jet::constant(f.dim(), f.order() - 1, 0.0);
  for (int v = 0; v < vars; ++v) {
    const Jet& e = E[v * n + M];
    if (e.is_constant() && e.value() == 0.0) continue;
    r.add_product(e, f.derivative(v));
  }
  return r;
}

std::vector<Jet> invert(std::span<const Jet> M, int n) {
  std::vector<Jet> a(M.begin(), M.end());
  const Jet& proto = a.at(0);
  std::vector<Jet> inv(static_cast<std::size_t>(n * n), Jet::constant(proto.dim(), proto.order(), 0.0));
  for (int i = 0; i < n; ++i) inv[i * n + i] += 1.0;
  double scale = 0.0;
  for (const auto& j : a) scale = std::max(scale, std::abs(j.value()));
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col].value()) > std::abs(a[piv * n + col].value())) piv = r;
    if (std::abs(a[piv * n + col].value()) <= 1e-13 * std::max(scale, 1e-300))
      throw DegeneracyError("singular frame matrix");
    if (piv != col)
      for (int c = 0; c < n; ++c) {
        std::swap(a[piv * n + c], a[col * n + c]);
        std::swap(inv[piv * n + c], inv[col * n + c]);
      }
    const Jet p = inverse(a[col * n + col]);
    for (int c = 0; c < n; ++c) {
      a[col * n + c] *= p;
      inv[col * n + c] *= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Jet f = a[r * n + col];
      if (f.is_constant() && f.value() == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        a[r * n + c] -= f * a[col * n + c];
        inv[r * n + c] -= f * inv[col * n + c];
      }
    }
  }
  return inv;
}

FrameData frame_data(std::span<const Jet> theta, int n) {
  if (static_cast<int>(theta.size()) != n * n) throw InputError("coframe coefficient count mismatch");
  const int K = theta[0].order();
  if (K < 1) throw InputError("frame data needs first-order jets");
  if (theta[0].dim() != n) throw InputError("coframe jets must live on the chart coordinates");
  FrameData f;
  f.n = n;
  f.vars = n;
  f.E = invert(theta, n);
  f.D.assign(static_cast<std::size_t>(n * n * n), Jet::constant(n, K - 1, 0.0));
  std::vector<Jet> C(static_cast<std::size_t>(n * n), Jet::constant(n, K - 1, 0.0));
  std::vector<Jet> T(static_cast<std::size_t>(n * n), Jet::constant(n, K - 1, 0.0));
  for (int L = 0; L < n; ++L) {
    for (int mu = 0; mu < n; ++mu)
      for (int nu = 0; nu < n; ++nu)
        C[mu * n + nu] = theta[L * n + nu].derivative(mu) - theta[L * n + mu].derivative(nu);
    for (int mu = 0; mu < n; ++mu)
      for (int N = 0; N < n; ++N) {
        Jet t = Jet::constant(n, K - 1, 0.0);
        for (int nu = 0; nu < n; ++nu) t.add_product(C[mu * n + nu], f.E[nu * n + N]);
        T[mu * n + N] = std::move(t);
      }
    for (int M = 0; M < n; ++M)
      for (int N = 0; N < n; ++N) {
        Jet d = Jet::constant(n, K - 1, 0.0);
        for (int mu = 0; mu < n; ++mu) d.add_product(f.E[mu * n + M], T[mu * n + N]);
        f.D[(L * n + M) * n + N] = std::move(d);
      }
  }
  return f;
}

Connection torsionfree_solve(const FrameData& f, const FrameMetric& m) {
  const int n = f.n;
  if (m.dim() != n) throw InputError("metric and frame sizes differ");
  const Jet zero = zero_like(f.D[0], f.D[0].order());
  auto lower = [&](std::vector<Jet>& out, const std::vector<Jet>& in) {
    for (int I = 0; I < n; ++I)
      for (int L = 0; L < n; ++L) {
        const double hIL = m.h(I, L);
        if (hIL == 0.0) continue;
        for (int J = 0; J < n; ++J)
          for (int K = 0; K < n; ++K) out[(I * n + J) * n + K].add_scaled(in[(L * n + J) * n + K], hIL);
      }
  };
  std::vector<Jet> Dl(f.D.size(), zero);
  lower(Dl, f.D);
  auto dl = [&](int I, int J, int K) -> const Jet& { return Dl[(I * n + J) * n + K]; };
  std::vector<Jet> wl(f.D.size(), zero);
  for (int I = 0; I < n; ++I)
    for (int J = 0; J < n; ++J)
      for (int K = 0; K < n; ++K) wl[(I * n + J) * n + K] = 0.5 * (dl(I, J, K) - dl(J, I, K) - dl(K, I, J));
  Connection w{n, std::vector<Jet>(f.D.size(), zero)};
  for (int I = 0; I < n; ++I)
    for (int L = 0; L < n; ++L) {
      const double hIL = m.h_inv(I, L);
      if (hIL == 0.0) continue;
      for (int J = 0; J < n; ++J)
        for (int K = 0; K < n; ++K) w(I, J, K).add_scaled(wl[(L * n + J) * n + K], hIL);
    }
  return w;
}

std::vector<double> torsionfree_linear_values(const FrameData& f, const FrameMetric& m) {
  const int n = f.n;
  const int pairs = n * (n - 1) / 2;
  std::vector<int> pid(static_cast<std::size_t>(n * n), -1);
  for (int I = 0, p = 0; I < n; ++I)
    for (int J = I + 1; J < n; ++J) pid[I * n + J] = p++;
  // omega_IJK (lowered) = sign * x[pair(I,J) * n + K]
  auto col = [&](int I, int J, int K, double& s) {
    if (I == J) return -1;
    s = I < J ? 1.0 : -1.0;
    return pid[std::min(I, J) * n + std::max(I, J)] * n + K;
  };
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n * pairs, pairs * n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n * pairs);
  for (int I = 0; I < n; ++I)
    for (int M = 0; M < n; ++M)
      for (int N = M + 1; N < n; ++N) {
        const int row = I * pairs + pid[M * n + N];
        double s = 0.0;
        if (int c = col(I, M, N, s); c >= 0) A(row, c) += s;
        if (int c = col(I, N, M, s); c >= 0) A(row, c) -= s;
        double rhs = 0.0;
        for (int L = 0; L < n; ++L) rhs += m.h(I, L) * f.d(L, M, N).value();
        b(row) = rhs;
      }
  const Eigen::VectorXd x = A.fullPivLu().solve(b);
  std::vector<double> w(static_cast<std::size_t>(n * n * n), 0.0);
  for (int I = 0; I < n; ++I)
    for (int J = 0; J < n; ++J)
      for (int K = 0; K < n; ++K) {
        double acc = 0.0;
        for (int L = 0; L < n; ++L) {
          double s = 0.0;
          const int c = col(L, J, K, s);
          if (c >= 0) acc += m.h_inv(I, L) * s * x(c);
        }
        w[(I * n + J) * n + K] = acc;
      }
  return w;
}

double torsion_residual(const FrameData& f, const Connection& w) {
  const int n = f.n;
  double r = 0.0;
  for (int I = 0; I < n; ++I)
    for (int M = 0; M < n; ++M)
      for (int N = 0; N < n; ++N)
        r = std::max(r, std::abs(w(I, M, N).value() - w(I, N, M).value() - f.d(I, M, N).value()));
  return r;
}

double metricity_residual(const Connection& w, const FrameMetric& m) {
  const int n = w.n;
  double r = 0.0;
  auto low = [&](int I, int J, int K) {
    double s = 0.0;
    for (int L = 0; L < n; ++L) s += m.h(I, L) * w(L, J, K).value();
    return s;
  };
  for (int I = 0; I < n; ++I)
    for (int J = 0; J < n; ++J)
      for (int K = 0; K < n; ++K) r = std::max(r, std::abs(low(I, J, K) + low(J, I, K)));
  return r;
}

Curvature curvature(const FrameData& f, const Connection& w) {
  const int n = f.n;
  const int K = w.w[0].order();
  if (K < 1) throw InputError("curvature needs first-order connection jets");
  const Jet zero = zero_like(w.w[0], K - 1);
  Curvature c{n, std::vector<Jet>(static_cast<std::size_t>(n * n * n * n), zero)};
  auto at = [&](int I, int J, int M, int N) -> Jet& { return c.omega[((I * n + J) * n + M) * n + N]; };
  for (int I = 0; I < n; ++I)
    for (int J = 0; J < n; ++J)
      for (int M = 0; M < n; ++M)
        for (int N = M + 1; N < n; ++N) {
          Jet v = f.derive(w(I, J, N), M) - f.derive(w(I, J, M), N);
          for (int L = 0; L < n; ++L) v.add_product(w(I, J, L), f.d(L, M, N));
          for (int Q = 0; Q < n; ++Q) {
            v.add_product(w(I, Q, M), w(Q, J, N));
            v.add_product(-w(I, Q, N), w(Q, J, M));
          }
          at(I, J, N, M) = -v;
          at(I, J, M, N) = std::move(v);
        }
  return c;
}

double first_bianchi_residual(const Curvature& c) {
  const int n = c.n;
  double r = 0.0;
  for (int I = 0; I < n; ++I)
    for (int K = 0; K < n; ++K)
      for (int M = 0; M < n; ++M)
        for (int N = 0; N < n; ++N)
          r = std::max(r, std::abs(c(I, K, M, N).value() + c(I, M, N, K).value() + c(I, N, K, M).value()));
  return r;
}

double curvature_antisymmetry(const Curvature& c, const FrameMetric& m) {
  const int n = c.n;
  double r = 0.0;
  auto low = [&](int I, int J, int M, int N) {
    double s = 0.0;
    for (int L = 0; L < n; ++L) s += m.h(I, L) * c(L, J, M, N).value();
    return s;
  };
  for (int I = 0; I < n; ++I)
    for (int J = 0; J < n; ++J)
      for (int M = 0; M < n; ++M)
        for (int N = M + 1; N < n; ++N) r = std::max(r, std::abs(low(I, J, M, N) + low(J, I, M, N)));
  return r;
}

Eigen::MatrixXd EinsteinResult::values() const {
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(ein.size()))));
  Eigen::MatrixXd m(n, n);
  for (int I = 0; I < n; ++I)
    for (int J = 0; J < n; ++J) m(I, J) = ein[I * n + J].value();
  return m;
}

EinsteinResult einstein_tensor(const Curvature& c, const FrameMetric& m, double tol) {
  const int n = c.n;
  const Jet zero = zero_like(c.omega[0], c.omega[0].order());
  std::vector<Jet> ric_low(static_cast<std::size_t>(n * n), zero);
  for (int J = 0; J < n; ++J)
    for (int N = 0; N < n; ++N)
      for (int I = 0; I < n; ++I) ric_low[J * n + N] += c(I, J, I, N);
  EinsteinResult e;
  e.ric.assign(static_cast<std::size_t>(n * n), zero);
  for (int J = 0; J < n; ++J)
    for (int N = 0; N < n; ++N)
      for (int L = 0; L < n; ++L)
        if (m.h_inv(L, N) != 0.0) e.ric[J * n + N].add_scaled(ric_low[J * n + L], m.h_inv(L, N));
  e.scalar = zero;
  for (int J = 0; J < n; ++J) e.scalar += e.ric[J * n + J];
  e.ein = e.ric;
  for (int J = 0; J < n; ++J) e.ein[J * n + J].add_scaled(e.scalar, -0.5);

  // 1/2 hat_IJK ^ Omega^JK against -Ein_I^J hat_J, all in the frame basis.
  double worst = 0.0, scale = 1.0;
  for (const auto& j : e.ein) scale = std::max(scale, std::abs(j.value()));
  for (int I = 0; I < n; ++I) {
    FormD lhs(n, n - 1, Basis::frame), rhs(n, n - 1, Basis::frame);
    for (int J = 0; J < n; ++J) {
      if (J == I) continue;
      for (int K = 0; K < n; ++K) {
        if (K == I || K == J) continue;
        FormD om(n, 2, Basis::frame);
        for (int M = 0; M < n; ++M)
          for (int N = M + 1; N < n; ++N) {
            double v = 0.0;
            for (int L = 0; L < n; ++L)
              if (m.h_inv(L, K) != 0.0) v += c(J, L, M, N).value() * m.h_inv(L, K);
            if (v != 0.0) om.terms().emplace(bit(M) | bit(N), v);
          }
        const int idx[3] = {I, J, K};
        lhs += 0.5 * wedge(window_volume(n, 0, n, idx), om);
      }
    }
    for (int J = 0; J < n; ++J) {
      const int idx[1] = {J};
      rhs -= e.ein[I * n + J].value() * window_volume(n, 0, n, idx);
    }
    worst = std::max(worst, max_abs_diff(lhs, rhs));
  }
  e.palatini_residual = worst;
  if (worst > tol * scale) throw ConsistencyError("Palatini contraction disagrees with Ric - R/2");
  return e;
}

double einstein_symmetry(const EinsteinResult& e, const FrameMetric& m) {
  const Eigen::MatrixXd low = e.values() * m.h;
  return (low - low.transpose()).cwiseAbs().maxCoeff();
}

double contracted_bianchi(const FrameData& f, const Connection& w, const EinsteinResult& e) {
  const int n = f.n;
  if (e.ein[0].order() < 1) throw InputError("contracted Bianchi needs first-order Einstein jets");
  double r = 0.0;
  for (int I = 0; I < n; ++I) {
    double div = 0.0;
    for (int J = 0; J < n; ++J) {
      div += f.derive(e.ein[I * n + J], J).value();
      for (int L = 0; L < n; ++L) {
        div += w(J, L, J).value() * e.ein[I * n + L].value();
        div -= w(L, I, J).value() * e.ein[L * n + J].value();
      }
    }
    r = std::max(r, std::abs(div));
  }
  return r;
}

std::vector<Jet> base_spin_connection(const FrameData& base) {
  if (base.n != 4) throw InputError("base spin connection expects a vierbein");
  const auto& eta = FrameMetric::eta;
  const Jet zero = zero_like(base.D[0], base.D[0].order());
  std::vector<Jet> g(64, zero);
  auto T = [&](int a, int b, int c) -> const Jet& { return base.d(a, b, c); };
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        Jet v = T(a, b, c);
        // eta^{ad} = eta_{ad} = diag
        for (int d = 0; d < 4; ++d) {
          if (d != a) continue;
          for (int e = 0; e < 4; ++e) {
            if (e == b) v.add_scaled(T(e, d, c), -eta[a] * eta[b]);
            if (e == c) v.add_scaled(T(e, d, b), -eta[a] * eta[c]);
          }
        }
        g[(a * 4 + b) * 4 + c] = 0.5 * v;
      }
  return g;
}

ReducedData reduced_flat(int r) {
  ReducedData d;
  d.vierbein = [](JetArgs x) {
    std::vector<Jet> e(16, x[0] * 0.0);
    for (int a = 0; a < 4; ++a) e[a * 4 + a] += 1.0;
    return e;
  };
  d.potential = [r](JetArgs x) { return std::vector<Jet>(static_cast<std::size_t>(4 * r), x[0] * 0.0); };
  return d;
}

ReducedData reduced_random(std::uint64_t seed, int r, double e_scale, double a_scale) {
  RandomFields rf(Chart::box({-1, -1, -1, -1}, {1, 1, 1, 1}), seed);
  std::vector<ScalarField> e, A;
  for (int k = 0; k < 16; ++k) e.push_back(rf.scalar(2, 0));
  for (int k = 0; k < 4 * r; ++k) A.push_back(rf.scalar(2, 0));
  ReducedData d;
  d.vierbein = [e, e_scale](JetArgs x) {
    std::vector<Jet> out;
    for (int k = 0; k < 16; ++k) {
      Jet v = e[static_cast<std::size_t>(k)](x) * e_scale;
      if (k % 5 == 0) v += 1.0;
      out.push_back(std::move(v));
    }
    return out;
  };
  d.potential = [A, a_scale](JetArgs x) {
    std::vector<Jet> out;
    for (const auto& s : A) out.push_back(s(x) * a_scale);
    return out;
  };
  return d;
}

ReducedPoint reduce(const ReducedData& red, const LieAlgebra& alg, std::span<const double> x, int order) {
  if (x.size() != 4) throw InputError("reduced data lives on four base coordinates");
  const int r = alg.dim;
  const auto z = seed_point(x, order);
  ReducedPoint p;
  p.r = r;
  p.base = frame_data(red.vierbein(z), 4);
  const auto Ac = red.potential(z);
  if (static_cast<int>(Ac.size()) != 4 * r) throw InputError("potential must have r x 4 components");
  const Jet zero = Jet::constant(4, order, 0.0);
  const Jet zero1 = Jet::constant(4, order - 1, 0.0);
  const auto& E = p.base.E;
  p.A.assign(static_cast<std::size_t>(4 * r), zero);
  for (int i = 0; i < r; ++i)
    for (int b = 0; b < 4; ++b)
      for (int mu = 0; mu < 4; ++mu) p.A[i * 4 + b].add_product(Ac[i * 4 + mu], E[mu * 4 + b]);
  p.F.assign(static_cast<std::size_t>(16 * r), zero1);
  std::vector<Jet> Fc(16, zero1);
  for (int i = 0; i < r; ++i) {
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu) {
        Jet v = Ac[i * 4 + nu].derivative(mu) - Ac[i * 4 + mu].derivative(nu);
        for (int j = 0; j < r; ++j)
          for (int k = 0; k < r; ++k) {
            const double cijk = alg(i, j, k);
            if (cijk != 0.0) v.add_scaled(Ac[j * 4 + mu] * Ac[k * 4 + nu], cijk);
          }
        Fc[mu * 4 + nu] = std::move(v);
      }
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) {
        Jet v = zero1;
        for (int mu = 0; mu < 4; ++mu)
          for (int nu = 0; nu < 4; ++nu) v.add_product(Fc[mu * 4 + nu], E[mu * 4 + b] * E[nu * 4 + c]);
        p.F[(i * 4 + b) * 4 + c] = std::move(v);
      }
  }
  p.gamma = base_spin_connection(p.base);
  return p;
}

double field_strength_residual(const ReducedData& red, const LieAlgebra& alg, std::span<const double> x, int order) {
  const ReducedPoint p = reduce(red, alg, x, order);
  const auto z = seed_point(x, order);
  const auto Ac = red.potential(z);
  const auto th = red.vierbein(z);
  Eigen::MatrixXd e(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int mu = 0; mu < 4; ++mu) e(a, mu) = th[a * 4 + mu].value();
  const int r = alg.dim;
  std::vector<FormJ> A;
  for (int i = 0; i < r; ++i) {
    FormJ a(4, 1);
    for (int mu = 0; mu < 4; ++mu) a.add(bit(mu), Ac[i * 4 + mu]);
    A.push_back(std::move(a));
  }
  double worst = 0.0;
  for (int i = 0; i < r; ++i) {
    FormJ F = ext_d(A[i]);
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k)
        if (alg(i, j, k) != 0.0) F += 0.5 * alg(i, j, k) * wedge(A[j], A[k]);
    const FormD Ff = frame_components(values(F), e);
    FormD pred(4, 2, Basis::frame);
    for (int b = 0; b < 4; ++b)
      for (int c = b + 1; c < 4; ++c) pred.terms().emplace(bit(b) | bit(c), p.f(i, b, c).value());
    worst = std::max(worst, max_abs_diff(Ff, pred));
  }
  return worst;
}

FrameData reduced_frame_data(const ReducedPoint& p, const LieAlgebra& alg) {
  const int r = p.r, n = 4 + r;
  const int K = p.base.D[0].order();
  const Jet zero = Jet::constant(4, K, 0.0);
  FrameData f;
  f.n = n;
  f.vars = 4;
  f.E.assign(static_cast<std::size_t>(4 * n), Jet::constant(4, K + 1, 0.0));
  for (int v = 0; v < 4; ++v)
    for (int a = 0; a < 4; ++a) f.E[v * n + a] = p.base.E[v * 4 + a];
  f.D.assign(static_cast<std::size_t>(n * n * n), zero);
  auto D = [&](int L, int M, int N) -> Jet& { return f.D[(L * n + M) * n + N]; };
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) D(a, b, c) = p.base.d(a, b, c);
  for (int i = 0; i < r; ++i) {
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) D(4 + i, b, c) = p.f(i, b, c).truncated(K);
    for (int j = 0; j < r; ++j)
      for (int c = 0; c < 4; ++c) {
        Jet v = zero;
        for (int k = 0; k < r; ++k)
          if (alg(i, j, k) != 0.0) v.add_scaled(p.A[k * 4 + c], -alg(i, j, k));
        D(4 + i, c, 4 + j) = -v;
        D(4 + i, 4 + j, c) = std::move(v);
      }
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) D(4 + i, 4 + j, 4 + k) = zero + alg(i, j, k);
  }
  return f;
}

KKFrames kk_coframe(const ReducedData& red, const LieAlgebra& alg, const GroupChart& chart) {
  if (chart.dim() != alg.dim) throw InputError("group chart does not match the algebra");
  const int r = alg.dim, n = 4 + r;
  auto build = [red, chart, r, n](bool dressed) {
    return [red, chart, r, n, dressed](JetArgs z) {
      if (static_cast<int>(z.size()) != n) throw InputError("coframe expects N+1 coordinates");
      std::vector<double> yv;
      for (int m = 0; m < r; ++m) yv.push_back(z[4 + m].value());
      chart.check_domain(yv);
      const auto x = z.first(4);
      const auto y = z.subspan(4);
      const auto e = red.vierbein(x);
      const auto A = red.potential(x);
      const Jet zero = z[0] * 0.0;
      std::vector<Jet> th(static_cast<std::size_t>(n * n), zero);
      for (int a = 0; a < 4; ++a)
        for (int mu = 0; mu < 4; ++mu) th[a * n + mu] = e[a * 4 + mu];
      if (dressed) {
        const auto R = chart.right_mc(y);
        for (int i = 0; i < r; ++i) {
          for (int mu = 0; mu < 4; ++mu) th[(4 + i) * n + mu] = A[i * 4 + mu];
          for (int m = 0; m < r; ++m) th[(4 + i) * n + 4 + m] = R[i * r + m];
        }
      } else {
        const auto L = chart.left_mc(y);
        const bool no_A = std::all_of(A.begin(), A.end(), [](const Jet& a) { return a.is_constant() && a.value() == 0.0; });
        const auto S = no_A ? std::vector<Jet>{} : chart.adjoint(y);
        for (int i = 0; i < r; ++i) {
          for (int mu = 0; mu < 4 && !no_A; ++mu) {
            Jet v = zero;
            for (int j = 0; j < r; ++j) v.add_product(S[j * r + i], A[j * 4 + mu]);
            th[(4 + i) * n + mu] = std::move(v);
          }
          for (int m = 0; m < r; ++m) th[(4 + i) * n + 4 + m] = L[i * r + m];
        }
      }
      return th;
    };
  };
  KKFrames f;
  f.raw = CoFrameField{n, 4, build(false)};
  f.dressed = CoFrameField{n, 4, build(true)};
  return f;
}

Connection kk_connection_closed_form(const ReducedPoint& p, const LieAlgebra& alg) {
  const int r = p.r, n = 4 + r;
  const int K = p.gamma[0].order();
  const Jet zero = Jet::constant(4, K, 0.0);
  const auto& eta = FrameMetric::eta;
  const Eigen::MatrixXd& k = alg.k_metric;
  Connection w{n, std::vector<Jet>(static_cast<std::size_t>(n * n * n), zero)};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      for (int c = 0; c < 4; ++c) w(a, b, c) = p.g(a, b, c);
      for (int i = 0; i < r; ++i) {
        Jet wb = zero, wi = zero;
        for (int j = 0; j < r; ++j) {
          wb.add_scaled(p.f(j, a, b), -0.5 * k(i, j) * eta[a]);
          wi.add_scaled(p.f(j, b, a), 0.5 * k(i, j) * eta[a]);
        }
        w(a, b, 4 + i) = std::move(wb);  // omega^a_b along e^i
        w(a, 4 + i, b) = std::move(wi);  // omega^a_i along e^b
      }
    }
  for (int i = 0; i < r; ++i) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) w(4 + i, a, b) = 0.5 * p.f(i, a, b);
    for (int j = 0; j < r; ++j) {
      for (int kk = 0; kk < r; ++kk) w(4 + i, 4 + j, 4 + kk) = zero + 0.5 * alg(i, j, kk);
      for (int b = 0; b < 4; ++b) {
        Jet v = zero;
        for (int kk = 0; kk < r; ++kk)
          if (alg(i, j, kk) != 0.0) v.add_scaled(p.A[kk * 4 + b], -alg(i, j, kk));
        w(4 + i, 4 + j, b) = std::move(v);
      }
    }
  }
  return w;
}

Eigen::MatrixXd einstein_reduction(const ReducedPoint& p, const LieAlgebra& alg, const Eigen::MatrixXd& ein_g) {
  const int r = p.r, n = 4 + r;
  const auto& eta = FrameMetric::eta;
  const Eigen::MatrixXd& k = alg.k_metric;
  const Eigen::MatrixXd kinv = r > 0 ? Eigen::MatrixXd(k.inverse()) : Eigen::MatrixXd();
  const double BK = killing_contraction(alg);
  // F_i^{ab} = k_ij eta^aa eta^bb F^j_ab, kept as jets for the divergence.
  const Jet zero = zero_like(p.F.empty() ? p.gamma[0] : p.F[0], p.gamma[0].order());
  std::vector<Jet> Fu(static_cast<std::size_t>(16 * r), zero);
  auto fu = [&](int i, int a, int b) -> Jet& { return Fu[(i * 4 + a) * 4 + b]; };
  for (int i = 0; i < r; ++i)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int j = 0; j < r; ++j)
          if (k(i, j) != 0.0) fu(i, a, b).add_scaled(p.f(j, a, b), k(i, j) * eta[a] * eta[b]);
  double F2 = 0.0;
  for (int i = 0; i < r; ++i)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) F2 += 0.5 * fu(i, a, b).value() * p.f(i, a, b).value();
  const double shift = 0.25 * (F2 + BK);

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double v = ein_g(a, b);
      for (int i = 0; i < r; ++i)
        for (int c = 0; c < 4; ++c) v -= 0.5 * p.f(i, a, c).value() * fu(i, b, c).value();
      out(a, b) = v + (a == b ? shift : 0.0);
    }
  for (int i = 0; i < r; ++i)
    for (int a = 0; a < 4; ++a) {
      double div = 0.0;
      for (int b = 0; b < 4; ++b) {
        div += p.base.derive(fu(i, a, b), b).value();
        for (int j = 0; j < r; ++j)
          for (int kk = 0; kk < r; ++kk) div -= alg(j, kk, i) * p.A[kk * 4 + b].value() * fu(j, a, b).value();
        for (int c = 0; c < 4; ++c) {
          div += fu(i, c, b).value() * p.g(a, c, b).value();
          div += p.g(c, b, c).value() * fu(i, a, b).value();
        }
      }
      out(4 + i, a) = 0.5 * div;
    }
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) v += 0.25 * fu(i, a, b).value() * p.f(j, a, b).value();
      for (int kk = 0; kk < r; ++kk)
        for (int l = 0; l < r; ++l)
          for (int m = 0; m < r; ++m) v -= 0.25 * alg(kk, i, l) * alg(j, kk, m) * kinv(l, m);
      // the fibre block also carries -R(g)/2 = tr Ein(g) / 2
      out(4 + i, 4 + j) = v + (i == j ? shift + 0.5 * ein_g.trace() : 0.0);
    }
  // Ein_a^i from the symmetry of Ein_IJ.
  for (int a = 0; a < 4; ++a)
    for (int i = 0; i < r; ++i) {
      double v = 0.0;
      for (int l = 0; l < r; ++l) v += kinv(i, l) * eta[a] * out(4 + l, a);
      out(a, 4 + i) = v;
    }
  return out;
}

double lambda_effective(double lambda0, const LieAlgebra& alg) { return lambda0 + 0.25 * killing_contraction(alg); }

}  // namespace kkcheck
