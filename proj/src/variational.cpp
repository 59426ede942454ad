#include "kkcheck/variational.hpp"

#include "kkcheck/errors.hpp"
#include "kkcheck/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace kkcheck {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Jet zero_like(const Jet& z) { return z * 0.0; }

}  // namespace

// ---------------------------------------------------------------- quadrature

Domain Domain::whole(const Chart& chart, std::vector<int> nodes) {
  std::vector<double> lo(chart.lo), hi(chart.hi);
  for (int i = 0; i < chart.dim; ++i)
    if (chart.is_periodic(i)) {
      lo[static_cast<std::size_t>(i)] = 0.0;
      hi[static_cast<std::size_t>(i)] = chart.period[static_cast<std::size_t>(i)];
    }
  return box(chart, std::move(lo), std::move(hi), std::move(nodes));
}

Domain Domain::box(const Chart& chart, std::vector<double> lo, std::vector<double> hi, std::vector<int> nodes) {
  const auto n = static_cast<std::size_t>(chart.dim);
  if (lo.size() != n || hi.size() != n || nodes.size() != n) throw InputError("domain shape does not match chart");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lo[i] < hi[i]) || nodes[i] < 1) throw InputError("empty quadrature interval");
    if (chart.is_periodic(static_cast<int>(i))) continue;
    if (lo[i] < chart.lo[i] || hi[i] > chart.hi[i]) throw DomainError("quadrature box leaves the chart");
  }
  return Domain{chart, std::move(lo), std::move(hi), std::move(nodes)};
}

double integrate(const Domain& d, const std::function<double(std::span<const double>)>& density) {
  std::vector<Rule1D> rules;
  for (int i = 0; i < d.chart.dim; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double len = d.hi[k] - d.lo[k];
    if (d.chart.is_periodic(i) && std::abs(len - d.chart.period[k]) < 1e-12 * d.chart.period[k]) {
      Rule1D r = periodic_trapezoid(d.nodes[k], len);
      for (double& x : r.nodes) x += d.lo[k];
      rules.push_back(std::move(r));
    } else {
      rules.push_back(gauss_legendre(d.nodes[k], d.lo[k], d.hi[k]));
    }
  }
  std::vector<double> terms;
  tensor_grid(rules, [&](std::span<const double> p, double w) {
    if (!d.chart.contains(p)) throw DomainError("quadrature node outside the chart");
    terms.push_back(w * density(p));
  });
  return pairwise_sum(terms);
}

double scan_max(std::span<const double> lo, std::span<const double> hi, std::span<const int> counts,
                const std::function<double(std::span<const double>)>& f) {
  std::vector<Rule1D> grids;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    Rule1D r;
    const int m = counts[i];
    for (int k = 0; k < m; ++k) {
      r.nodes.push_back(m == 1 ? 0.5 * (lo[i] + hi[i]) : lo[i] + (hi[i] - lo[i]) * k / (m - 1));
      r.weights.push_back(1.0);
    }
    grids.push_back(std::move(r));
  }
  double worst = 0.0;
  tensor_grid(grids, [&](std::span<const double> p, double) { worst = std::max(worst, f(p)); });
  return worst;
}

// ---------------------------------------------------------------- frame basis

FramePoint frame_point(std::span<const Jet> theta, int n) {
  if (static_cast<int>(theta.size()) != n * n) throw InputError("coframe coefficient count");
  FramePoint f;
  f.n = n;
  f.M.resize(n, n);
  for (int I = 0; I < n; ++I)
    for (int mu = 0; mu < n; ++mu) f.M(I, mu) = theta[static_cast<std::size_t>(I * n + mu)].value();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(f.M);
  if (!lu.isInvertible() || lu.rcond() < 1e-13) throw DegeneracyError("coframe is singular");
  f.W = lu.inverse();
  f.det = lu.determinant();
  f.dw.reserve(static_cast<std::size_t>(n));
  for (int L = 0; L < n; ++L) {
    const Eigen::MatrixXd D = f.curl(theta.subspan(static_cast<std::size_t>(L * n), static_cast<std::size_t>(n)));
    FormD w(n, 2, Basis::frame);
    for (int M = 0; M < n; ++M)
      for (int N = M + 1; N < n; ++N)
        if (D(M, N) != 0.0) w.add(bit(M) | bit(N), D(M, N));
    f.dw.push_back(std::move(w));
  }
  return f;
}

Eigen::MatrixXd FramePoint::curl(std::span<const Jet> a) const {
  Eigen::MatrixXd C(n, n);
  for (int mu = 0; mu < n; ++mu)
    for (int nu = 0; nu < n; ++nu)
      C(mu, nu) = a[static_cast<std::size_t>(nu)].partial(mu) - a[static_cast<std::size_t>(mu)].partial(nu);
  return W.transpose() * C * W;
}

Eigen::VectorXd FramePoint::components(std::span<const Jet> a) const {
  Eigen::VectorXd v(n);
  for (int mu = 0; mu < n; ++mu) v(mu) = a[static_cast<std::size_t>(mu)].value();
  return W.transpose() * v;
}

double FramePoint::derive(const Jet& f, int I) const {
  double s = 0.0;
  for (int mu = 0; mu < n; ++mu) s += W(mu, I) * f.partial(mu);
  return s;
}

FormD FramePoint::grad(const Jet& f) const {
  FormD r(n, 1, Basis::frame);
  for (int I = 0; I < n; ++I) {
    const double v = derive(f, I);
    if (v != 0.0) r.add(bit(I), v);
  }
  return r;
}

FormD FramePoint::d(const FormD& a) const {
  FormD r(n, a.degree() + 1, Basis::frame);
  if (a.degree() + 1 > n) return r;
  for (const auto& [m, v] : a.terms()) {
    int k = 0;
    for (Mask rest = m; rest; rest &= rest - 1, ++k) {
      const int L = std::countr_zero(rest);
      const Mask pre = m & (bit(L) - 1), post = m & ~(bit(L + 1) - 1);
      for (const auto& [P, c] : dw[static_cast<std::size_t>(L)].terms()) {
        const int s1 = wedge_sign(pre, P);
        if (s1 == 0) continue;
        const int s2 = wedge_sign(pre | P, post);
        if (s2 == 0) continue;
        r.add(pre | P | post, v * c, ((k & 1) ? -1.0 : 1.0) * s1 * s2);
      }
    }
  }
  return r;
}

int pair_index(int n, int J, int K) {
  if (!(0 <= J && J < K && K < n)) throw InputError("pair index needs J < K");
  return J * n - J * (J + 1) / 2 + (K - J - 1);
}

FormD momentum_form(int n, std::span<const double> c) {
  FormD r(n, n - 2, Basis::frame);
  for (int J = 0; J < n; ++J)
    for (int K = J + 1; K < n; ++K) {
      const double v = c[static_cast<std::size_t>(pair_index(n, J, K))];
      if (v != 0.0) r += hat_volume(n, {J, K}) * v;
    }
  return r;
}

ScalarField bump(std::vector<double> lo, std::vector<double> hi) {
  return [lo, hi](JetArgs z) {
    Jet b = Jet::constant(z[0].dim(), z[0].order(), 1.0);
    for (std::size_t i = 0; i < lo.size(); ++i) {
      const double v = z[i].value();
      if (v <= lo[i] || v >= hi[i]) return zero_like(z[0]);
      const Jet t = (z[i] - 0.5 * (lo[i] + hi[i])) * (2.0 / (hi[i] - lo[i]));
      const Jet s = 1.0 - t * t;
      b = b * s * s;
    }
    return b;
  };
}

// ---------------------------------------------------------------- Maxwell

int base_pair(int a, int b) {
  static constexpr int table[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
  if (a == b) throw InputError("base pair needs distinct indices");
  return table[a][b];
}

namespace {

constexpr double eta(int a) { return a == 0 ? -1.0 : 1.0; }

/// Maxwell fields at a seeded point: theta jets, value forms, and (on request) d pi in
/// the frame basis (e^a, theta).
struct MaxwellLocal {
  FormJ theta;
  std::vector<Jet> pi2, pi1;
  FormD piv;             // pi, coordinate basis
  FormD dpi;             // d pi, frame basis
  double norm2 = 0.0;    // |pi|^2 = 1/2 pi^ab pi_ab
  Eigen::MatrixXd frame;
};

FormD lift_values(const FormD& a, const Eigen::MatrixXd& frame) { return coordinate_components(a, frame); }

MaxwellLocal maxwell_local(const MaxwellFields& f, JetArgs z, bool derivative) {
  if (z.size() != 5) throw InputError("Maxwell fields live on a 5-dim chart");
  MaxwellLocal L;
  const auto e = f.e(z.first(4));
  const auto th = f.theta(z);
  L.pi2 = f.pi2(z);
  L.pi1 = f.pi1(z);
  if (e.size() != 16 || th.size() != 5 || L.pi2.size() != 6 || L.pi1.size() != 4)
    throw InputError("Maxwell field component counts");
  std::vector<Jet> rows(25, zero_like(z[0]));
  for (int a = 0; a < 4; ++a)
    for (int mu = 0; mu < 4; ++mu) rows[static_cast<std::size_t>(a * 5 + mu)] = e[static_cast<std::size_t>(a * 4 + mu)];
  L.theta = FormJ(5, 1);
  for (int mu = 0; mu < 5; ++mu) {
    L.theta.terms().emplace(bit(mu), th[static_cast<std::size_t>(mu)]);
    rows[static_cast<std::size_t>(20 + mu)] = th[static_cast<std::size_t>(mu)];
  }
  L.frame.resize(5, 5);
  for (int I = 0; I < 5; ++I)
    for (int mu = 0; mu < 5; ++mu) L.frame(I, mu) = rows[static_cast<std::size_t>(I * 5 + mu)].value();

  FramePoint fp;
  if (derivative) {
    fp = frame_point(rows, 5);
    L.dpi = FormD(5, 4, Basis::frame);
  }
  FormD frame_pi(5, 3, Basis::frame);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      const Jet& c = L.pi2[static_cast<std::size_t>(base_pair(a, b))];
      const int ab[2] = {a, b};
      const FormD m = wedge(window_volume(5, 0, 4, ab), monomial(5, bit(4)));
      frame_pi += m * c.value();
      if (derivative) L.dpi += wedge(fp.grad(c), m) + fp.d(m) * c.value();
      L.norm2 += c.value() * c.value() * eta(a) * eta(b);
    }
  for (int a = 0; a < 4; ++a) {
    const int idx[1] = {a};
    const FormD m = window_volume(5, 0, 4, idx);
    const Jet& c = L.pi1[static_cast<std::size_t>(a)];
    frame_pi -= m * c.value();
    if (derivative) L.dpi -= wedge(fp.grad(c), m) + fp.d(m) * c.value();
  }
  L.piv = lift_values(frame_pi, L.frame);
  return L;
}

double top(const FormD& a) {
  const double* v = a.find((Mask{1} << a.dim()) - 1);
  return v ? *v : 0.0;
}

FormD e4_coordinate(const MaxwellLocal& L) { return lift_values(monomial(5, 0b1111), L.frame); }

}  // namespace

double maxwell_density(const MaxwellFields& f, std::span<const double> z) {
  const auto zs = seed_point(z, 1);
  const MaxwellLocal L = maxwell_local(f, zs, false);
  const FormD th = values(L.theta);
  FormD dens = wedge(e4_coordinate(L), th) * (0.5 * L.norm2);
  dens += wedge(L.piv, values(ext_d(L.theta)));
  return top(dens);
}

double maxwell_density_expanded(const MaxwellFields& f, std::span<const double> z) {
  const auto zs = seed_point(z, 1);
  const MaxwellLocal L = maxwell_local(f, zs, false);
  const FormD dth = frame_components(values(ext_d(L.theta)), L.frame);
  double s = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      const double p = L.pi2[static_cast<std::size_t>(base_pair(a, b))].value();
      const double* T = dth.find(bit(a) | bit(b));
      s += 0.5 * p * p * eta(a) * eta(b) + (T ? *T : 0.0) * p;
    }
    const double* Ta = dth.find(bit(a) | bit(4));
    s += (Ta ? *Ta : 0.0) * L.pi1[static_cast<std::size_t>(a)].value();
  }
  return s * L.frame.determinant();
}

double action_maxwell(const MaxwellFields& f, const Domain& d) {
  return integrate(d, [&](std::span<const double> z) { return maxwell_density(f, z); });
}

double action_maxwell_expanded(const MaxwellFields& f, const Domain& d) {
  return integrate(d, [&](std::span<const double> z) { return maxwell_density_expanded(f, z); });
}

double MaxwellResidual::max() const {
  double m = max_abs(c);
  for (double v : a) m = std::max(m, std::abs(v));
  for (double v : b) m = std::max(m, std::abs(v));
  return m;
}

MaxwellResidual el_residual_maxwell(const MaxwellFields& f, std::span<const double> z) {
  const auto zs = seed_point(z, 1);
  const MaxwellLocal L = maxwell_local(f, zs, true);
  const FormD dth = frame_components(values(ext_d(L.theta)), L.frame);
  MaxwellResidual r;
  for (int a = 0; a < 4; ++a) {
    const double* Ta = dth.find(bit(a) | bit(4));
    r.a[static_cast<std::size_t>(a)] = Ta ? *Ta : 0.0;
    for (int b = a + 1; b < 4; ++b) {
      const double* T = dth.find(bit(a) | bit(b));
      const double p = L.pi2[static_cast<std::size_t>(base_pair(a, b))].value();
      r.b[static_cast<std::size_t>(base_pair(a, b))] = (T ? *T : 0.0) + p * eta(a) * eta(b);
    }
  }
  r.c = L.dpi - monomial(5, 0b1111) * (0.5 * L.norm2);
  return r;
}

Chart maxwell_chart(double half_width) {
  Chart c = Chart::box({-half_width, -half_width, -half_width, -half_width, 0.0},
                       {half_width, half_width, half_width, half_width, kTwoPi});
  c.set_periodic(4, kTwoPi);
  return c;
}

namespace {

CoeffField flat_vierbein() {
  return [](JetArgs x) {
    std::vector<Jet> e(16, zero_like(x[0]));
    for (int a = 0; a < 4; ++a) e[static_cast<std::size_t>(a * 5)] += 1.0;
    return e;
  };
}

}  // namespace

MaxwellFields build_maxwell_solution(double B) {
  MaxwellFields f;
  f.e = flat_vierbein();
  f.theta = [B](JetArgs z) {
    std::vector<Jet> t(5, zero_like(z[0]));
    t[1] = B * z[0];
    t[4] += 1.0;
    return t;
  };
  f.pi2 = [B](JetArgs z) {
    std::vector<Jet> p(6, zero_like(z[0]));
    p[static_cast<std::size_t>(base_pair(0, 1))] += B;  // pi^01 = -F^01 = B
    return p;
  };
  // pi^a = p^a + pi^ab A_b with A_1 = B x0 and p^3 = -|F|^2 x3 / 2.
  f.pi1 = [B](JetArgs z) {
    std::vector<Jet> p(4, zero_like(z[0]));
    p[0] = B * B * z[0];
    p[3] = 0.5 * B * B * z[3];
    return p;
  };
  return f;
}

MaxwellFields perturb(const MaxwellFields& f, const MaxwellVariation& v, double eps) {
  auto add = [eps](const CoeffField& base, const CoeffField& dv) -> CoeffField {
    if (!dv) return base;
    return [base, dv, eps](JetArgs z) {
      auto r = base(z);
      const auto d = dv(z);
      for (std::size_t i = 0; i < r.size(); ++i) r[i].add_scaled(d[i], eps);
      return r;
    };
  };
  return MaxwellFields{f.e, add(f.theta, v.theta), add(f.pi2, v.pi2), add(f.pi1, v.pi1)};
}

namespace {

/// count components, each bump * (c0 + c.t) with t the support-box coordinates.
CoeffField random_bumped(std::mt19937_64& rng, int count, const std::vector<double>& lo, const std::vector<double>& hi,
                         double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = lo.size();
  std::vector<std::vector<double>> c(static_cast<std::size_t>(count), std::vector<double>(n + 1));
  for (auto& row : c)
    for (double& x : row) x = scale * u(rng);
  const ScalarField b = bump(lo, hi);
  return [c, b, lo, hi, n](JetArgs z) {
    const Jet bz = b(z);
    std::vector<Jet> t;
    for (std::size_t i = 0; i < n; ++i) t.push_back((z[i] - 0.5 * (lo[i] + hi[i])) * (2.0 / (hi[i] - lo[i])));
    std::vector<Jet> r;
    r.reserve(c.size());
    for (const auto& row : c) {
      Jet p = Jet::constant(z[0].dim(), z[0].order(), row[n]);
      for (std::size_t i = 0; i < n; ++i) p.add_scaled(t[i], row[i]);
      r.push_back(bz * p);
    }
    return r;
  };
}

}  // namespace

MaxwellVariation random_maxwell_variation(std::uint64_t seed, std::vector<double> lo, std::vector<double> hi,
                                          double scale, bool vary_theta, bool vary_pi) {
  std::mt19937_64 rng(seed);
  MaxwellVariation v;
  if (vary_theta) v.theta = random_bumped(rng, 5, lo, hi, scale);
  if (vary_pi) {
    v.pi2 = random_bumped(rng, 6, lo, hi, scale);
    v.pi1 = random_bumped(rng, 4, lo, hi, scale);
  }
  return v;
}

EYMVariation random_eym_variation(std::uint64_t seed, const EYMFields& f, std::vector<double> lo,
                                  std::vector<double> hi, double scale) {
  const int n = 4 + f.alg.dim;
  if (static_cast<int>(lo.size()) != n || hi.size() != lo.size()) throw InputError("variation box dimension");
  std::mt19937_64 rng(seed);
  EYMVariation v;
  v.theta = random_bumped(rng, n * n, lo, hi, scale);
  v.phi = random_bumped(rng, n * (n - 1) / 2 * n, lo, hi, scale);
  v.pi = random_bumped(rng, n * eym_slots(f.alg.dim), lo, hi, scale);
  return v;
}

MaxwellFields maxwell_off_shell(std::uint64_t seed, double B, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  // each component gets scale * (c0 + c.x) * (1 + d1 sin y + d2 cos y)
  auto make = [&](int count) {
    std::vector<std::array<double, 7>> c(static_cast<std::size_t>(count));
    for (auto& row : c)
      for (double& x : row) x = u(rng);
    return c;
  };
  auto field = [scale](std::vector<std::array<double, 7>> c) {
    return [c, scale](JetArgs z) {
      std::vector<Jet> r;
      const Jet s = sin(z[4]), co = cos(z[4]);
      for (const auto& row : c) {
        Jet p = Jet::constant(z[0].dim(), z[0].order(), row[0]);
        for (int i = 0; i < 4; ++i) p.add_scaled(z[static_cast<std::size_t>(i)], row[static_cast<std::size_t>(i + 1)]);
        Jet q = 1.0 + row[5] * s + row[6] * co;
        r.push_back(p * q * scale);
      }
      return r;
    };
  };
  MaxwellVariation v{field(make(5)), field(make(6)), field(make(4))};
  return perturb(build_maxwell_solution(B), v, 1.0);
}

double maxwell_pairing(const MaxwellFields& f, const MaxwellVariation& v, const Domain& d) {
  return integrate(d, [&](std::span<const double> z) {
    const auto zs = seed_point(z, 1);
    const MaxwellLocal L = maxwell_local(f, zs, true);
    const FormD th = values(L.theta);
    const FormD E_theta = lift_values(L.dpi - monomial(5, 0b1111) * (0.5 * L.norm2), L.frame);
    FormD E_pi = values(ext_d(L.theta));
    std::vector<FormD> e;
    for (int a = 0; a < 4; ++a) e.push_back(lift_values(monomial(5, bit(a)), L.frame));
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        E_pi += wedge(e[static_cast<std::size_t>(a)], e[static_cast<std::size_t>(b)]) *
                (L.pi2[static_cast<std::size_t>(base_pair(a, b))].value() * eta(a) * eta(b));

    const auto zero = std::vector<Jet>{};
    const auto dth = v.theta ? v.theta(zs) : zero;
    const auto dp2 = v.pi2 ? v.pi2(zs) : zero;
    const auto dp1 = v.pi1 ? v.pi1(zs) : zero;
    FormD delta_theta(5, 1);
    for (int mu = 0; mu < 5 && !dth.empty(); ++mu) delta_theta.add(bit(mu), dth[static_cast<std::size_t>(mu)].value());
    FormD delta_pi(5, 3);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        const int ab[2] = {a, b};
        const FormD eab = lift_values(window_volume(5, 0, 4, ab), L.frame);
        const std::size_t k = static_cast<std::size_t>(base_pair(a, b));
        if (!dp2.empty()) delta_pi += wedge(eab, th) * dp2[k].value();
        delta_pi += wedge(eab, delta_theta) * L.pi2[k].value();
      }
    for (int a = 0; a < 4 && !dp1.empty(); ++a) {
      const int idx[1] = {a};
      delta_pi -= lift_values(window_volume(5, 0, 4, idx), L.frame) * dp1[static_cast<std::size_t>(a)].value();
    }
    return top(wedge(E_theta, delta_theta) + wedge(delta_pi, E_pi));
  });
}

double gateaux(const std::function<double(double)>& action_along, double eps) {
  return (action_along(eps) - action_along(-eps)) / (2.0 * eps);
}

}  // namespace kkcheck
