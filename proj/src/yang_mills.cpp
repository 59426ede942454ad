#include "kkcheck/errors.hpp"
#include "kkcheck/quadrature.hpp"
#include "kkcheck/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace kkcheck {

namespace {

Jet zero_like(const Jet& z) { return z * 0.0; }

constexpr double eta(int a) { return a == 0 ? -1.0 : 1.0; }

/// Pieces of a Yang-Mills configuration at a seeded point, in the frame (e^a, theta^i).
struct YMLocal {
  int r = 0, n = 0, P = 0;
  FramePoint fp;
  std::vector<Jet> pi;       // r x P
  std::vector<FormD> Theta;  // frame basis
  std::vector<FormD> hats;   // hat_JK, pairs
  double norm2 = 0.0;
  Eigen::MatrixXd k_inv;

  double p(int i, int J, int K) const {
    const Jet& v = pi[static_cast<std::size_t>(i * P + pair_index(n, J, K))];
    return v.value();
  }
};

YMLocal ym_local(const YMFields& f, JetArgs z) {
  YMLocal L;
  L.r = f.alg.dim;
  L.n = 4 + L.r;
  L.P = L.n * (L.n - 1) / 2;
  const int n = L.n, r = L.r;
  if (static_cast<int>(z.size()) != n) throw InputError("Yang-Mills chart dimension is 4 + r");
  const auto e = f.e(z.first(4));
  const auto th = f.theta(z);
  L.pi = f.pi(z);
  if (e.size() != 16 || static_cast<int>(th.size()) != r * n || static_cast<int>(L.pi.size()) != r * L.P)
    throw InputError("Yang-Mills field component counts");
  std::vector<Jet> rows(static_cast<std::size_t>(n * n), zero_like(z[0]));
  for (int a = 0; a < 4; ++a)
    for (int mu = 0; mu < 4; ++mu) rows[static_cast<std::size_t>(a * n + mu)] = e[static_cast<std::size_t>(a * 4 + mu)];
  std::copy(th.begin(), th.end(), rows.begin() + 4 * n);
  L.fp = frame_point(rows, n);

  for (int i = 0; i < r; ++i) {
    FormD T = L.fp.dw[static_cast<std::size_t>(4 + i)];
    for (int j = 0; j < r; ++j)
      for (int k = j + 1; k < r; ++k)
        if (f.alg(i, j, k) != 0.0) T.add(bit(4 + j) | bit(4 + k), f.alg(i, j, k));
    L.Theta.push_back(std::move(T));
  }
  for (int J = 0; J < n; ++J)
    for (int K = J + 1; K < n; ++K) L.hats.push_back(hat_volume(n, {J, K}));

  L.k_inv = f.alg.k_metric.inverse();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) L.norm2 += eta(a) * eta(b) * L.p(i, a, b) * L.k_inv(i, j) * L.p(j, a, b);
  return L;
}

double top(const FormD& a) {
  const double* v = a.find((Mask{1} << a.dim()) - 1);
  return v ? *v : 0.0;
}

double component(const FormD& a, Mask m) {
  const double* v = a.find(m);
  return v ? *v : 0.0;
}

}  // namespace

double ym_density(const YMFields& f, std::span<const double> z) {
  const auto zs = seed_point(z, 1);
  const YMLocal L = ym_local(f, zs);
  double s = 0.5 * L.norm2;  // e^(4) ^ bar^(r) is the frame volume
  for (int i = 0; i < L.r; ++i) {
    FormD pi_i(L.n, L.n - 2, Basis::frame);
    for (int q = 0; q < L.P; ++q) pi_i += L.hats[static_cast<std::size_t>(q)] * L.pi[static_cast<std::size_t>(i * L.P + q)].value();
    s += top(wedge(pi_i, L.Theta[static_cast<std::size_t>(i)]));
  }
  return s * L.fp.det;
}

double action_ym(const YMFields& f, const Domain& d) {
  return integrate(d, [&](std::span<const double> z) { return ym_density(f, z); });
}

double YMResidual::max() const {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  for (double v : b) m = std::max(m, std::abs(v));
  for (double v : c) m = std::max(m, std::abs(v));
  for (const auto& x : d) m = std::max(m, max_abs(x));
  return m;
}

YMResidual el_residual_ym(const YMFields& f, std::span<const double> z) {
  const auto zs = seed_point(z, 1);
  const YMLocal L = ym_local(f, zs);
  const int r = L.r, n = L.n;
  YMResidual res;
  for (int i = 0; i < r; ++i)
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        double lowered = 0.0;
        for (int j = 0; j < r; ++j) lowered += L.k_inv(i, j) * L.p(j, a, b);
        res.a.push_back(eta(a) * eta(b) * lowered + component(L.Theta[static_cast<std::size_t>(i)], bit(a) | bit(b)));
      }
  for (int i = 0; i < r; ++i)
    for (int a = 0; a < 4; ++a)
      for (int k = 0; k < r; ++k) res.b.push_back(component(L.Theta[static_cast<std::size_t>(i)], bit(a) | bit(4 + k)));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k)
        res.c.push_back(j == k ? 0.0 : (j < k ? 1.0 : -1.0) * component(L.Theta[static_cast<std::size_t>(i)], bit(4 + j) | bit(4 + k)));

  std::vector<FormD> dhat;
  for (const auto& h : L.hats) dhat.push_back(L.fp.d(h));
  std::vector<FormD> pis, dpis;
  for (int i = 0; i < r; ++i) {
    FormD pi_i(n, n - 2, Basis::frame), dpi(n, n - 1, Basis::frame);
    for (int q = 0; q < L.P; ++q) {
      const Jet& c = L.pi[static_cast<std::size_t>(i * L.P + q)];
      pi_i += L.hats[static_cast<std::size_t>(q)] * c.value();
      dpi += wedge(L.fp.grad(c), L.hats[static_cast<std::size_t>(q)]) + dhat[static_cast<std::size_t>(q)] * c.value();
    }
    pis.push_back(std::move(pi_i));
    dpis.push_back(std::move(dpi));
  }
  for (int i = 0; i < r; ++i) {
    FormD d = dpis[static_cast<std::size_t>(i)];
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k)
        if (f.alg(j, k, i) != 0.0) d -= wedge(monomial(n, bit(4 + k)), pis[static_cast<std::size_t>(j)]) * f.alg(j, k, i);
    d -= hat_volume(n, {4 + i}) * (0.5 * L.norm2);
    res.d.push_back(std::move(d));
  }
  return res;
}

YMFields embed_maxwell(const MaxwellFields& f) {
  YMFields y;
  y.alg = u1();
  y.e = f.e;
  y.theta = f.theta;
  y.pi = [f](JetArgs z) {
    const auto p2 = f.pi2(z);
    const auto p1 = f.pi1(z);
    std::vector<Jet> p(10, zero_like(z[0]));
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) p[static_cast<std::size_t>(pair_index(5, a, b))] = p2[static_cast<std::size_t>(base_pair(a, b))];
      p[static_cast<std::size_t>(pair_index(5, a, 4))] = p1[static_cast<std::size_t>(a)];  // hat_a4 = -e_a
    }
    return p;
  };
  return y;
}

// ---------------------------------------------------------------- dressed momenta

double identity_check_15abis(const ReducedData& red, const LieAlgebra& alg, const CoeffField& p,
                             std::span<const double> z) {
  const int r = alg.dim, n = 4 + r, P = n * (n - 1) / 2;
  if (static_cast<int>(z.size()) != n) throw InputError("identity check needs a point of R^4 x G");
  const GroupChart chart = GroupChart::for_algebra(alg);
  const KKFrames frames = kk_coframe(red, alg, chart);
  const auto zs = seed_point(z, 1);
  const FramePoint fp = frame_point(frames.dressed.coeffs(zs), n);
  const auto pc = p(zs);
  if (static_cast<int>(pc.size()) != r * P) throw InputError("dressed momentum component count");
  const ReducedPoint rp = reduce(red, alg, z.first(4), 1);

  // full antisymmetric p_i^{JK} values and frame derivatives
  auto pv = [&](int i, int J, int K) {
    if (J == K) return 0.0;
    const double v = pc[static_cast<std::size_t>(i * P + pair_index(n, std::min(J, K), std::max(J, K)))].value();
    return J < K ? v : -v;
  };
  auto dp = [&](int i, int J, int K, int M) {
    if (J == K) return 0.0;
    const double v = fp.derive(pc[static_cast<std::size_t>(i * P + pair_index(n, std::min(J, K), std::max(J, K)))], M);
    return J < K ? v : -v;
  };
  auto A = [&](int k, int b) { return rp.A[static_cast<std::size_t>(k * 4 + b)].value(); };

  // route 1: d p_i - c^j_ki A^k ^ p_j with the exterior derivative of the dressed frame
  std::vector<FormD> hats, dhats;
  for (int J = 0; J < n; ++J)
    for (int K = J + 1; K < n; ++K) {
      hats.push_back(hat_volume(n, {J, K}));
      dhats.push_back(fp.d(hats.back()));
    }
  double worst = 0.0;
  for (int i = 0; i < r; ++i) {
    std::vector<FormD> pj;
    for (int j = 0; j < r; ++j) {
      FormD f(n, n - 2, Basis::frame);
      for (int q = 0; q < P; ++q) f += hats[static_cast<std::size_t>(q)] * pc[static_cast<std::size_t>(j * P + q)].value();
      pj.push_back(std::move(f));
    }
    FormD route1(n, n - 1, Basis::frame);
    for (int q = 0; q < P; ++q) {
      const Jet& c = pc[static_cast<std::size_t>(i * P + q)];
      route1 += wedge(fp.grad(c), hats[static_cast<std::size_t>(q)]) + dhats[static_cast<std::size_t>(q)] * c.value();
    }
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) {
        if (alg(j, k, i) == 0.0) continue;
        FormD Ak(n, 1, Basis::frame);
        for (int b = 0; b < 4; ++b) Ak.add(bit(b), A(k, b));
        route1 -= wedge(Ak, pj[static_cast<std::size_t>(j)]) * alg(j, k, i);
      }

    // route 2: the closed form
    FormD route2(n, n - 1, Basis::frame);
    for (int a = 0; a < 4; ++a) {
      double X = 0.0;
      for (int b = 0; b < 4; ++b) {
        X += dp(i, a, b, b);
        for (int k = 0; k < r; ++k)
          for (int l = 0; l < r; ++l) X -= A(k, b) * alg(l, k, i) * pv(l, a, b);
        for (int c = 0; c < 4; ++c) X += rp.g(a, c, b).value() * pv(i, c, b) + rp.g(b, c, b).value() * pv(i, a, c);
      }
      for (int k = 0; k < r; ++k) X += dp(i, a, 4 + k, 4 + k);
      route2 += hat_volume(n, {a}) * X;
    }
    for (int j = 0; j < r; ++j) {
      double Y = 0.0;
      for (int b = 0; b < 4; ++b) {
        Y += dp(i, 4 + j, b, b);
        for (int k = 0; k < r; ++k)
          for (int l = 0; l < r; ++l) {
            Y -= A(k, b) * alg(l, k, i) * pv(l, 4 + j, b);
            Y += A(k, b) * alg(j, k, l) * pv(i, 4 + l, b);
          }
        for (int c = 0; c < 4; ++c) Y += rp.g(b, c, b).value() * pv(i, 4 + j, c);
      }
      for (int k = 0; k < r; ++k) Y += dp(i, 4 + j, 4 + k, 4 + k);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) Y += 0.5 * rp.f(j, a, b).value() * pv(i, a, b);
      for (int k = 0; k < r; ++k)
        for (int l = 0; l < r; ++l) Y += 0.5 * alg(j, k, l) * pv(i, 4 + k, 4 + l);
      route2 += hat_volume(n, {4 + j}) * Y;
    }
    worst = std::max(worst, max_abs_diff(route1, route2));
  }
  return worst;
}

// ---------------------------------------------------------------- cancellation

double cancellation_average(const ScalarField& p, const Chart& chart, std::span<const double> x, int n) {
  const int s = chart.dim - 1;
  if (!chart.is_periodic(s)) throw PreconditionError("fibre coordinate is not periodic");
  if (static_cast<int>(x.size()) != s) throw InputError("base point dimension");
  const double q = chart.period[static_cast<std::size_t>(s)];
  const Rule1D rule = periodic_trapezoid(n, q);
  std::vector<double> z(x.begin(), x.end());
  z.push_back(0.0);
  std::vector<double> terms;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    z.back() = rule.nodes[k];
    terms.push_back(rule.weights[k] * evaluate(p, z, 1).partial(s));
  }
  return pairwise_sum(terms) / q;
}

Quatd haar_sample(std::uint64_t seed, std::uint64_t m) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(m),
                    static_cast<std::uint32_t>(m >> 32)};
  std::mt19937_64 rng(seq);
  // Box-Muller: explicit so that samples do not depend on the library's normal_distribution
  auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  double g[4];
  for (int k = 0; k < 4; k += 2) {
    const double u1 = uniform(), u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    g[k] = rad * std::cos(2.0 * std::numbers::pi * u2);
    g[k + 1] = rad * std::sin(2.0 * std::numbers::pi * u2);
  }
  const double nrm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
  return {g[0] / nrm, g[1] / nrm, g[2] / nrm, g[3] / nrm};
}

HaarEstimate haar_divergence_average(const std::function<std::array<Jet, 3>(const Quat<Jet>&)>& f, int samples,
                                     std::uint64_t seed) {
  if (samples < 2) throw InputError("need at least two Haar samples");
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(samples));
  const std::vector<double> origin(3, 0.0);
  const auto tau = seed_point(origin, 1);
  for (int m = 0; m < samples; ++m) {
    const Quatd g = haar_sample(seed, static_cast<std::uint64_t>(m));
    const Jet one = Jet::constant(3, 1, 1.0);
    // exp(tau^k t_k) g to first order, t_k = unit / 2
    const Quat<Jet> left{one, tau[0] * 0.5, tau[1] * 0.5, tau[2] * 0.5};
    const Quat<Jet> gj{one * g.w, one * g.x, one * g.y, one * g.z};
    const auto v = f(left * gj);
    vals.push_back(v[0].partial(0) + v[1].partial(1) + v[2].partial(2));
  }
  HaarEstimate h;
  h.samples = samples;
  h.mean = pairwise_sum(vals) / samples;
  double ss = 0.0;
  for (double v : vals) ss += (v - h.mean) * (v - h.mean);
  h.sigma = std::sqrt(ss / (samples - 1)) / std::sqrt(static_cast<double>(samples));
  return h;
}

}  // namespace kkcheck
