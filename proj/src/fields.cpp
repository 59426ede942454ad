#include "kkcheck/fields.hpp"

#include <cmath>
#include <numbers>

namespace kkcheck {

Chart Chart::box(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size() || lo.empty()) throw InputError("chart bounds of different length");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw InputError("empty chart interval");
  Chart c;
  c.dim = static_cast<int>(lo.size());
  c.lo = std::move(lo);
  c.hi = std::move(hi);
  c.period.assign(c.lo.size(), 0.0);
  return c;
}

Chart& Chart::set_periodic(int i, double p) {
  if (i < 0 || i >= dim) throw InputError("periodic index out of range");
  if (!(p > 0.0)) throw InputError("period must be positive");
  period[i] = p;
  lo[i] = 0.0;
  hi[i] = p;
  return *this;
}

bool Chart::contains(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != dim) return false;
  for (int i = 0; i < dim; ++i) {
    if (is_periodic(i)) continue;
    if (z[i] < lo[i] || z[i] > hi[i]) return false;
  }
  return true;
}

void Chart::wrap(std::span<double> z) const {
  for (int i = 0; i < dim; ++i) {
    if (!is_periodic(i)) continue;
    z[i] = std::fmod(z[i], period[i]);
    if (z[i] < 0) z[i] += period[i];
  }
}

double Chart::distance(std::span<const double> a, std::span<const double> b) const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    double d = a[i] - b[i];
    if (is_periodic(i)) {
      d = std::fmod(std::abs(d), period[i]);
      d = std::min(d, period[i] - d);
    }
    s += d * d;
  }
  return std::sqrt(s);
}

FormJ CoFrameField::one_form(JetArgs z, int I) const {
  const auto c = coeffs(z);
  FormJ r(dim, 1);
  for (int mu = 0; mu < dim; ++mu) r.terms().emplace(bit(mu), c[static_cast<std::size_t>(I * dim + mu)]);
  return r;
}

Eigen::MatrixXd frame_matrix(const CoFrameField& f, std::span<const double> point) {
  const auto z = seed_point(point, 0);
  const auto c = f.coeffs(z);
  Eigen::MatrixXd m(f.dim, f.dim);
  for (int I = 0; I < f.dim; ++I)
    for (int mu = 0; mu < f.dim; ++mu) m(I, mu) = c[static_cast<std::size_t>(I * f.dim + mu)].value();
  return m;
}

Jet evaluate(const ScalarField& f, std::span<const double> point, int order) {
  const auto z = seed_point(point, order);
  return f(z);
}

FormJ evaluate(const FormField& f, std::span<const double> point, int order) {
  const auto z = seed_point(point, order);
  return f(z);
}

namespace {

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& m) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) throw DegeneracyError("frame matrix is singular");
  return lu.inverse();
}

}  // namespace

FormD frame_components(const FormD& a, const Eigen::MatrixXd& theta) {
  if (a.basis() != Basis::coordinate) throw InputError("expected a coordinate-basis form");
  const Eigen::MatrixXd E = checked_inverse(theta);
  return substitute(a, a.dim(), [&](int mu, int I) { return E(mu, I); }, Basis::frame);
}

FormD coordinate_components(const FormD& a, const Eigen::MatrixXd& theta) {
  if (a.basis() != Basis::frame) throw InputError("expected a frame-basis form");
  return substitute(a, a.dim(), [&](int I, int mu) { return theta(I, mu); }, Basis::coordinate);
}

std::vector<FormJ> g_curvature(const CoFrameField& theta, const LieAlgebra& alg, JetArgs z) {
  const int n = theta.dim, h = theta.horizontal;
  if (alg.dim != n - h) throw InputError("algebra dimension does not match the vertical block");
  std::vector<FormJ> th;
  const auto c = theta.coeffs(z);
  for (int I = 0; I < n; ++I) {
    FormJ f(n, 1);
    for (int mu = 0; mu < n; ++mu) f.terms().emplace(bit(mu), c[static_cast<std::size_t>(I * n + mu)]);
    th.push_back(std::move(f));
  }
  std::vector<FormJ> out;
  for (int I = 0; I < n; ++I) {
    FormJ t = ext_d(th[I]);
    if (I >= h) {
      const int i = I - h;
      for (int j = 0; j < alg.dim; ++j)
        for (int k = j + 1; k < alg.dim; ++k) {
          const double cc = alg(i, j, k);
          if (cc != 0.0) t += wedge(th[h + j], th[h + k]) * cc;
        }
    }
    out.push_back(std::move(t));
  }
  return out;
}

GradedVolumes::GradedVolumes(const Eigen::MatrixXd& theta, int horizontal)
    : theta_(theta), n_(static_cast<int>(theta.rows())), h_(horizontal) {
  if (theta.rows() != theta.cols()) throw InputError("frame matrix must be square");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(theta);
  if (!lu.isInvertible()) throw DegeneracyError("frame matrix is singular");
}

FormD GradedVolumes::frame_to_coordinate(const FormD& a) const { return coordinate_components(a, theta_); }

FormD GradedVolumes::hat(std::span<const int> I) const { return frame_to_coordinate(window_volume(n_, 0, n_, I)); }

FormD GradedVolumes::base(std::initializer_list<int> I) const {
  return frame_to_coordinate(window_volume(n_, 0, h_, std::span<const int>(I.begin(), I.size())));
}

FormD GradedVolumes::bar(std::initializer_list<int> I) const {
  return frame_to_coordinate(window_volume(n_, h_, n_, std::span<const int>(I.begin(), I.size())));
}

double GradedVolumes::contraction_residual() const {
  const FormD top = hat({});
  double w = 0.0;
  for (int K = 0; K < n_; ++K) {
    FormD thK(n_, 1);
    for (int mu = 0; mu < n_; ++mu) thK.terms().emplace(bit(mu), theta_(K, mu));
    for (int I = 0; I < n_; ++I) {
      const int idx[1] = {I};
      FormD lhs = wedge(thK, hat(idx));
      if (K == I) lhs -= top;
      w = std::max(w, max_abs(lhs));
    }
  }
  return w;
}

FormJ lie_derivative(const VectorField& X, const FormField& a, JetArgs z) {
  const auto x = X(z);
  const FormJ av = a(z);
  const FormJ da = ext_d(av);
  std::vector<Jet> xl;
  xl.reserve(x.size());
  for (const auto& v : x) xl.push_back(v.truncated(v.order() - 1));
  FormJ second = iota<Jet>(xl, da);
  if (av.degree() == 0) return second;  // i_X f = 0
  return ext_d(iota<Jet>(x, av)) + second;
}

FormD lie_derivative_flow(const VectorField& X, const FormField& a, std::span<const double> point, double h) {
  auto flow = [&](double t) -> ChartMap {
    return [&X, t](JetArgs z) {
      std::vector<Jet> y(z.begin(), z.end());
      const int steps = 8;
      const double dt = t / steps;
      for (int s = 0; s < steps; ++s) {
        auto add = [](const std::vector<Jet>& base, const std::vector<Jet>& k, double c) {
          std::vector<Jet> r = base;
          for (std::size_t i = 0; i < r.size(); ++i) r[i].add_scaled(k[i], c);
          return r;
        };
        const auto k1 = X(y);
        const auto k2 = X(add(y, k1, dt / 2));
        const auto k3 = X(add(y, k2, dt / 2));
        const auto k4 = X(add(y, k3, dt));
        for (std::size_t i = 0; i < y.size(); ++i) {
          y[i].add_scaled(k1[i], dt / 6);
          y[i].add_scaled(k2[i], dt / 3);
          y[i].add_scaled(k3[i], dt / 3);
          y[i].add_scaled(k4[i], dt / 6);
        }
      }
      return y;
    };
  };
  const auto z = seed_point(point, 1);
  const FormD plus = values(pullback(flow(h), a, z));
  const FormD minus = values(pullback(flow(-h), a, z));
  return (plus - minus) * (0.5 / h);
}

std::vector<Jet> vector_bracket(const VectorField& X, const VectorField& Y, JetArgs z) {
  const auto x = X(z);
  const auto y = Y(z);
  const int n = static_cast<int>(z.size());
  std::vector<Jet> r;
  for (int nu = 0; nu < n; ++nu) {
    Jet acc = Jet::constant(z[0].dim(), std::max(z[0].order() - 1, 0), 0.0);
    for (int mu = 0; mu < n; ++mu) {
      acc.add_product(x[mu], y[nu].derivative(mu));
      acc.add_product(y[mu], x[nu].derivative(mu) * -1.0);
    }
    r.push_back(std::move(acc));
  }
  return r;
}

FormJ pullback(const ChartMap& T, const FormField& a, JetArgs z, bool require_invertible) {
  const auto w = T(z);
  const int n = static_cast<int>(z.size());
  if (static_cast<int>(w.size()) != n) throw InputError("chart map changes dimension");
  if (w[0].order() < 1) throw InputError("pullback needs first-order jets of the map");
  if (require_invertible) {
    Eigen::MatrixXd J(n, n);
    for (int nu = 0; nu < n; ++nu)
      for (int mu = 0; mu < n; ++mu) J(nu, mu) = w[nu].partial(mu);
    if (std::abs(J.determinant()) < 1e-12) throw DegeneracyError("chart map Jacobian is singular");
  }
  // Evaluate the field at the image point in its own variables, then compose. Fields
  // that differentiate internally (d a, brackets, ...) stay correct this way.
  std::vector<double> w0(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w0[i] = w[i].value();
  const FormJ local = a(seed_point(w0, w[0].order()));
  FormJ alpha(local.dim(), local.degree(), local.basis());
  for (const auto& [m, v] : local.terms()) alpha.terms().emplace(m, compose(v, w));
  std::vector<Jet> dT;
  dT.reserve(static_cast<std::size_t>(n * n));
  for (int nu = 0; nu < n; ++nu)
    for (int mu = 0; mu < n; ++mu) dT.push_back(w[nu].derivative(mu));
  return substitute(alpha, n, [&](int nu, int mu) { return dT[static_cast<std::size_t>(nu * n + mu)]; },
                    Basis::coordinate);
}

RandomFields::RandomFields(const Chart& chart, std::uint64_t seed) : chart_(chart), rng_(seed) {}

double RandomFields::uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

ScalarField RandomFields::scalar(int max_degree, int trig_degree) {
  struct Term {
    double c;
    std::vector<int> exps;   // box coordinates
    std::vector<int> waves;  // periodic coordinates
    std::vector<double> phases;
  };
  const int nterms = 6;
  std::vector<Term> terms;
  std::uniform_int_distribution<int> coord(0, chart_.dim - 1);
  std::uniform_int_distribution<int> deg(0, max_degree);
  std::uniform_int_distribution<int> wave(0, trig_degree);
  for (int t = 0; t < nterms; ++t) {
    Term term;
    term.c = uniform() / nterms;
    term.exps.assign(chart_.dim, 0);
    term.waves.assign(chart_.dim, 0);
    term.phases.assign(chart_.dim, 0.0);
    const int d = deg(rng_);
    for (int k = 0; k < d; ++k) {
      const int i = coord(rng_);
      if (!chart_.is_periodic(i)) ++term.exps[i];
    }
    for (int i = 0; i < chart_.dim; ++i)
      if (chart_.is_periodic(i)) {
        term.waves[i] = wave(rng_);
        term.phases[i] = uniform(0.0, 2.0 * std::numbers::pi);
      }
    terms.push_back(std::move(term));
  }
  const Chart chart = chart_;
  return [terms, chart](JetArgs z) {
    Jet acc = Jet::constant(z[0].dim(), z[0].order(), 0.0);
    for (const auto& t : terms) {
      Jet m = Jet::constant(z[0].dim(), z[0].order(), t.c);
      for (int i = 0; i < chart.dim; ++i) {
        if (t.exps[i] > 0) m = m * pow(z[i], t.exps[i]);
        if (chart.is_periodic(i)) {
          const double w = 2.0 * std::numbers::pi / chart.period[i] * t.waves[i];
          m = m * cos(z[i] * w + t.phases[i]);
        }
      }
      acc += m;
    }
    return acc;
  };
}

FormField RandomFields::form(int degree, int max_degree) {
  const int n = chart_.dim;
  std::vector<std::pair<Mask, ScalarField>> coeffs;
  for (Mask m = 0; m < bit(n); ++m)
    if (degree_of(m) == degree) coeffs.emplace_back(m, scalar(max_degree));
  return [coeffs, n, degree](JetArgs z) {
    FormJ f(n, degree);
    for (const auto& [m, s] : coeffs) f.terms().emplace(m, s(z));
    return f;
  };
}

CoFrameField RandomFields::coframe(double scale, int horizontal) {
  const int n = chart_.dim;
  std::vector<ScalarField> c;
  for (int k = 0; k < n * n; ++k) c.push_back(scalar(3));
  CoFrameField f;
  f.dim = n;
  f.horizontal = horizontal;
  f.coeffs = [c, n, scale](JetArgs z) {
    std::vector<Jet> out;
    out.reserve(static_cast<std::size_t>(n * n));
    for (int I = 0; I < n; ++I)
      for (int mu = 0; mu < n; ++mu) {
        Jet v = c[static_cast<std::size_t>(I * n + mu)](z) * scale;
        if (I == mu) v += 1.0;
        out.push_back(std::move(v));
      }
    return out;
  };
  return f;
}

VectorField RandomFields::vector(int max_degree) {
  std::vector<ScalarField> c;
  for (int k = 0; k < chart_.dim; ++k) c.push_back(scalar(max_degree));
  return [c](JetArgs z) {
    std::vector<Jet> out;
    for (const auto& s : c) out.push_back(s(z));
    return out;
  };
}

ChartMap RandomFields::fibered_map(int horizontal, double scale) {
  std::vector<ScalarField> c;
  for (int k = horizontal; k < chart_.dim; ++k) c.push_back(scalar(3));
  return [c, horizontal, scale](JetArgs z) {
    std::vector<Jet> out(z.begin(), z.end());
    for (std::size_t k = 0; k < c.size(); ++k) out[horizontal + k] += c[k](z) * scale;
    return out;
  };
}

}  // namespace kkcheck
