#include "kkcheck/fibration.hpp"

#include "kkcheck/errors.hpp"
#include "kkcheck/geometry.hpp"
#include "kkcheck/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kkcheck {
namespace {

Eigen::MatrixXd coeff_matrix(const CoFrameField& theta, std::span<const double> z) {
  const int n = theta.dim;
  const auto c = theta.coeffs(seed_point(z, 1));
  Eigen::MatrixXd m(n, n);
  for (int I = 0; I < n; ++I)
    for (int mu = 0; mu < n; ++mu) m(I, mu) = c[I * n + mu].value();
  return m;
}

// Differences reduced to (-p/2, p/2] on periodic coordinates.
Eigen::VectorXd wrapped_diff(const Chart& chart, std::span<const double> a, std::span<const double> b) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    double v = a[i] - b[i];
    if (chart.is_periodic(static_cast<int>(i))) {
      const double p = chart.period[i];
      v = std::remainder(v, p);
    }
    d(static_cast<Eigen::Index>(i)) = v;
  }
  return d;
}

std::vector<double> wrapped(const Chart& chart, std::vector<double> z) {
  chart.wrap(z);
  return z;
}

}  // namespace

Eigen::MatrixXd dual_frame(const CoFrameField& theta, std::span<const double> z) {
  const Eigen::MatrixXd m = coeff_matrix(theta, z);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible() || lu.rcond() < 1e-12) throw DegeneracyError("coframe singular along the path");
  return lu.inverse();
}

Eigen::VectorXd vertical_vector(const CoFrameField& theta, std::span<const double> z, std::span<const double> xi) {
  const Eigen::MatrixXd E = dual_frame(theta, z);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.dim);
  for (std::size_t i = 0; i < xi.size(); ++i) v += xi[i] * E.col(theta.horizontal + static_cast<Eigen::Index>(i));
  return v;
}

Eigen::VectorXd horizontal_lift(const CoFrameField& theta, std::span<const double> z, std::span<const double> xi) {
  const Eigen::MatrixXd E = dual_frame(theta, z);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.dim);
  for (std::size_t a = 0; a < xi.size(); ++a) v += xi[a] * E.col(static_cast<Eigen::Index>(a));
  return v;
}

CoFrameField pullback_coframe(const CoFrameField& theta, const ChartMap& T) {
  CoFrameField r = theta;
  r.coeffs = [theta, T](JetArgs z) {
    const int n = theta.dim;
    const auto w = T(z);
    const auto th = theta.coeffs(w);
    const Jet zero = Jet::constant(z[0].dim(), z[0].order() - 1, 0.0);
    std::vector<Jet> out(static_cast<std::size_t>(n * n), zero);
    for (int nu = 0; nu < n; ++nu)
      for (int mu = 0; mu < n; ++mu) {
        const Jet dT = w[static_cast<std::size_t>(nu)].derivative(mu);
        if (dT.is_constant() && dT.value() == 0.0) continue;
        for (int I = 0; I < n; ++I) out[I * n + mu].add_product(th[I * n + nu], dT);
      }
    return out;
  };
  return r;
}

LeafTrajectory integrate_leaf(const CoFrameField& theta, const Chart& chart, std::span<const double> start,
                              std::span<const double> xi, double horizon, double tol) {
  if (horizon == 0.0) throw InputError("leaf horizon must be nonzero");
  const std::vector<double> xiv(xi.begin(), xi.end());
  OdeRhs f = [&theta, xiv](double, std::span<const double> y, std::span<double> dy) {
    const Eigen::VectorXd v = vertical_vector(theta, y, xiv);
    for (std::size_t i = 0; i < dy.size(); ++i) dy[i] = v(static_cast<Eigen::Index>(i));
  };
  OdeOptions opt;
  opt.rtol = opt.atol = tol;
  LeafTrajectory tr;
  tr.ode = dopri5(f, 0.0, std::vector<double>(start.begin(), start.end()), horizon, opt);
  tr.t.push_back(0.0);
  tr.z.push_back(wrapped(chart, std::vector<double>(start.begin(), start.end())));
  for (const auto& s : tr.ode.steps) {
    tr.t.push_back(s.t1());
    tr.z.push_back(wrapped(chart, s.eval(s.t1())));
  }
  tr.steps = tr.ode.accepted;
  tr.max_error = tr.ode.max_error;
  return tr;
}

ClosureResult detect_closure(const CoFrameField& theta, const Chart& chart, std::span<const double> start,
                             std::span<const double> xi, double horizon, double eps, double tol) {
  if (horizon <= 0.0) throw InputError("closure horizon must be positive");
  const std::vector<double> z0(start.begin(), start.end());
  const std::vector<double> xiv(xi.begin(), xi.end());
  const Eigen::VectorXd v0 = vertical_vector(theta, z0, xiv);
  if (v0.norm() == 0.0) throw InputError("vertical direction vanishes at the start");
  auto g = [&](const std::vector<double>& z) { return wrapped_diff(chart, z, z0).dot(v0); };
  OdeRhs f = [&theta, xiv](double, std::span<const double> y, std::span<double> dy) {
    const Eigen::VectorXd v = vertical_vector(theta, y, xiv);
    for (std::size_t i = 0; i < dy.size(); ++i) dy[i] = v(static_cast<Eigen::Index>(i));
  };
  OdeOptions opt;
  opt.rtol = opt.atol = tol;
  opt.keep_steps = false;
  ClosureResult res;
  double g_prev = 0.0;
  // Steps on a smooth leaf can be long, so the section is sampled inside each step.
  const double sample = 0.05 / v0.norm();
  auto on_step = [&](const DenseStep& s) {
    const int m = std::max(1, static_cast<int>(std::ceil(s.h / sample)));
    double a = s.t0;
    for (int k = 1; k <= m; ++k) {
      const double b = k == m ? s.t1() : s.t0 + s.h * k / m;
      const double g_end = g(s.eval(b));
      if (g_prev < 0.0 && g_end >= 0.0) {
        ++res.crossings;
        double lo = a, hi = b;
        for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
          const double mid = 0.5 * (lo + hi);
          (g(s.eval(mid)) < 0.0 ? lo : hi) = mid;
        }
        const double tc = 0.5 * (lo + hi);
        const double d = chart.distance(wrapped(chart, s.eval(tc)), z0);
        if (d <= eps) {
          res.closed = true;
          res.period = tc;
          res.distance = d;
          return false;
        }
      }
      g_prev = g_end;
      a = b;
    }
    return true;
  };
  dopri5(f, 0.0, z0, horizon, opt, on_step);
  return res;
}

double fiber_flux(const CoFrameField& theta, const Chart& chart, std::span<const double> x, int n) {
  const int h = theta.horizontal;
  if (theta.dim != h + 1) throw InputError("fiber flux expects a single vertical coordinate");
  if (!chart.is_periodic(h)) throw PreconditionError("fibre coordinate is not periodic");
  const double p = chart.period[static_cast<std::size_t>(h)];
  const Rule1D rule = periodic_trapezoid(n, p);
  std::vector<double> terms;
  std::vector<double> z(x.begin(), x.end());
  z.resize(static_cast<std::size_t>(h + 1));
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    z[static_cast<std::size_t>(h)] = rule.nodes[k];
    const Eigen::MatrixXd m = coeff_matrix(theta, z);
    for (int a = 0; a < h; ++a)
      if (std::abs(m(a, h)) > 1e-12) throw PreconditionError("fibre over x is not the coordinate circle");
    terms.push_back(rule.weights[k] * m(h, h));
  }
  return pairwise_sum(terms);
}

double flux_constancy_scan(const CoFrameField& theta, const Chart& chart, const std::vector<std::vector<double>>& xs,
                           int n) {
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double q = fiber_flux(theta, chart, xs[k], n);
    if (k == 0) lo = hi = q;
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  return hi - lo;
}

double frobenius_residual(const CoFrameField& theta, const LieAlgebra& alg, std::span<const double> z) {
  const int h = theta.horizontal, r = theta.dim - h;
  const auto Th = g_curvature(theta, alg, seed_point(z, 2));
  const Eigen::MatrixXd E = dual_frame(theta, z);
  double worst = 0.0;
  for (int i = 0; i < r; ++i) {
    const FormD F = values(Th[static_cast<std::size_t>(h + i)]);
    for (int j = 0; j < r; ++j)
      for (int k = j + 1; k < r; ++k) {
        double v = 0.0;
        for (const auto& [m, c] : F.terms()) {
          const int mu = std::countr_zero(m), nu = 31 - std::countl_zero(m);
          v += c * (E(mu, h + j) * E(nu, h + k) - E(nu, h + j) * E(mu, h + k));
        }
        worst = std::max(worst, std::abs(v));
      }
  }
  return worst;
}

double commuting_flows_residual(const CoFrameField& theta, std::span<const double> xi, std::span<const double> z) {
  const int n = theta.dim, h = theta.horizontal;
  const std::vector<double> xiv(xi.begin(), xi.end());
  auto column = [theta, n](JetArgs zz, const std::vector<double>& w, int offset) {
    const auto E = invert(theta.coeffs(zz), n);
    std::vector<Jet> v(static_cast<std::size_t>(n), zz[0] * 0.0);
    for (std::size_t k = 0; k < w.size(); ++k)
      for (int mu = 0; mu < n; ++mu) v[static_cast<std::size_t>(mu)].add_scaled(E[mu * n + offset + static_cast<int>(k)], w[k]);
    return v;
  };
  const VectorField X = [column, xiv](JetArgs zz) { return column(zz, xiv, 0); };
  const auto jets = seed_point(z, 2);
  double worst = 0.0;
  for (int i = 0; i < n - h; ++i) {
    std::vector<double> e(static_cast<std::size_t>(n - h), 0.0);
    e[static_cast<std::size_t>(i)] = 1.0;
    const VectorField Y = [column, e, h](JetArgs zz) { return column(zz, e, h); };
    for (const auto& c : vector_bracket(X, Y, jets)) worst = std::max(worst, std::abs(c.value()));
  }
  return worst;
}

GroupPath constant_path(std::vector<double> xi) {
  GroupPath p;
  p.velocity = [xi](double) { return xi; };
  return p;
}

GroupPath segment_path(std::vector<std::vector<double>> xis) {
  const int m = static_cast<int>(xis.size());
  if (m == 0) throw InputError("empty group path");
  GroupPath p;
  for (int k = 1; k < m; ++k) p.breaks.push_back(static_cast<double>(k) / m);
  p.velocity = [xis, m](double t) {
    const int k = std::clamp(static_cast<int>(std::floor(t * m)), 0, m - 1);
    std::vector<double> v = xis[static_cast<std::size_t>(k)];
    for (auto& c : v) c *= m;
    return v;
  };
  return p;
}

std::vector<double> holonomy_map(const CoFrameField& theta, const Chart& chart, std::span<const double> z,
                                 const GroupPath& u, double tol) {
  std::vector<double> knots{0.0};
  knots.insert(knots.end(), u.breaks.begin(), u.breaks.end());
  knots.push_back(1.0);
  std::vector<double> v(z.begin(), z.end());
  OdeOptions opt;
  opt.rtol = opt.atol = tol;
  opt.keep_steps = false;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    // velocity sampled strictly inside the segment so a jump at a knot is never seen
    const double a = knots[k], b = knots[k + 1], pad = 1e-12 * (b - a);
    OdeRhs f = [&theta, &u, a, b, pad](double t, std::span<const double> y, std::span<double> dy) {
      const auto w = u.velocity(std::clamp(t, a + pad, b - pad));
      const Eigen::VectorXd vv = vertical_vector(theta, y, w);
      for (std::size_t i = 0; i < dy.size(); ++i) dy[i] = vv(static_cast<Eigen::Index>(i));
    };
    v = dopri5(f, knots[k], v, knots[k + 1], opt).y_end;
  }
  chart.wrap(v);
  return v;
}

double fiber_primitive(const CoFrameField& theta, std::span<const double> z, int n) {
  const int last = theta.dim - 1, h = theta.horizontal;
  const double y = z[static_cast<std::size_t>(last)];
  if (y == 0.0) return 0.0;
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(y))));
  std::vector<double> p(z.begin(), z.end());
  std::vector<double> terms;
  int sign = 0;
  for (int k = 0; k < panels; ++k) {
    const Rule1D rule = gauss_legendre(n, y * k / panels, y * (k + 1) / panels);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      p[static_cast<std::size_t>(last)] = rule.nodes[q];
      const double ty = coeff_matrix(theta, p)(h, last);
      const int s = ty > 1e-12 ? 1 : (ty < -1e-12 ? -1 : 0);
      if (s == 0 || (sign != 0 && s != sign)) throw DegeneracyError("theta_y vanishes on the fibre");
      sign = s;
      terms.push_back(rule.weights[q] * ty);
    }
  }
  return pairwise_sum(terms);
}

double fiber_coordinate(const CoFrameField& theta, const Chart& chart, std::span<const double> z, int n) {
  const double q = fiber_flux(theta, chart, z.first(static_cast<std::size_t>(theta.horizontal)), 64);
  const double s = fiber_primitive(theta, z, n);
  double r = std::fmod(s, std::abs(q));
  if (r < 0) r += std::abs(q);
  return r;
}

std::array<double, 4> normalized_potential(const CoFrameField& theta, std::span<const double> z, int n) {
  const int last = theta.dim - 1, h = theta.horizontal, dim = theta.dim;
  const double y = z[static_cast<std::size_t>(last)];
  std::array<double, 4> A{};
  {
    const auto c = theta.coeffs(seed_point(z, 1));
    for (int a = 0; a < 4; ++a) A[static_cast<std::size_t>(a)] = c[h * dim + a].value();
  }
  if (y == 0.0) return A;
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(y))));
  std::vector<double> p(z.begin(), z.end());
  for (int k = 0; k < panels; ++k) {
    const Rule1D rule = gauss_legendre(n, y * k / panels, y * (k + 1) / panels);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      p[static_cast<std::size_t>(last)] = rule.nodes[q];
      const auto c = theta.coeffs(seed_point(p, 2));
      for (int a = 0; a < 4; ++a) A[static_cast<std::size_t>(a)] -= rule.weights[q] * c[h * dim + last].partial(a);
    }
  }
  return A;
}

std::array<double, 3> su2_log(const Quatd& q) {
  const double s = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
  if (s < 1e-300) return {0.0, 0.0, 0.0};
  const double a = 2.0 * std::atan2(s, q.w);
  return {a * q.x / s, a * q.y / s, a * q.z / s};
}

}  // namespace kkcheck
