#include "kkcheck/ode.hpp"

#include "kkcheck/errors.hpp"

#include <algorithm>
#include <cmath>

namespace kkcheck {
namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

}  // namespace

std::vector<double> DenseStep::eval(double t) const {
  const double s = h == 0.0 ? 0.0 : (t - t0) / h, s1 = 1.0 - s;
  std::vector<double> y(r[0].size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
  return y;
}

std::vector<double> OdeSolution::at(double t) const {
  if (steps.empty()) return y_end;
  const bool fwd = steps.front().h >= 0;
  auto it = std::lower_bound(steps.begin(), steps.end(), t, [fwd](const DenseStep& s, double v) {
    return fwd ? s.t1() < v : s.t1() > v;
  });
  if (it == steps.end()) --it;
  return it->eval(t);
}

OdeSolution dopri5(const OdeRhs& f, double t0, std::vector<double> y0, double t1, const OdeOptions& opt,
                   const std::function<bool(const DenseStep&)>& on_step) {
  const std::size_t n = y0.size();
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  OdeSolution sol;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), y1(n), err(n);
  auto norm = [&](const std::vector<double>& v, const std::vector<double>& ref) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(ref[i]);
      s += (v[i] / sc) * (v[i] / sc);
    }
    return std::sqrt(s / static_cast<double>(std::max<std::size_t>(n, 1)));
  };
  double t = t0;
  std::vector<double> y = std::move(y0);
  f(t, y, k1);
  double h = opt.h0;
  if (h <= 0.0) {
    // initial guess from the first derivative
    const double d0 = norm(y, y), dd = norm(k1, y);
    h = (d0 < 1e-5 || dd < 1e-5) ? 1e-6 : 0.01 * d0 / dd;
    h = std::min(h, std::abs(t1 - t0));
  }
  h *= dir;
  if (t1 == t0) {
    sol.y_end = y;
    sol.t_end = t;
    return sol;
  }
  while (dir * (t1 - t) > 0.0) {
    if (sol.accepted + sol.rejected >= opt.max_steps) throw StiffnessError("ODE step budget exhausted");
    if (dir * (t + h - t1) > 0.0) h = t1 - t;
    if (std::abs(h) < opt.hmin * std::max(1.0, std::abs(t))) throw StiffnessError("ODE step size underflow");
    for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * a21 * k1[i];
    f(t + c2 * h, yt, k2);
    for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * h, yt, k3);
    for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * h, yt, k4);
    for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * h, yt, k5);
    for (std::size_t i = 0; i < n; ++i)
      yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(t + h, yt, k6);
    for (std::size_t i = 0; i < n; ++i)
      y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f(t + h, y1, k7);
    for (std::size_t i = 0; i < n; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    std::vector<double> ref(n);
    for (std::size_t i = 0; i < n; ++i) ref[i] = std::max(std::abs(y[i]), std::abs(y1[i]));
    const double en = norm(err, ref);
    if (en <= 1.0) {
      DenseStep st;
      st.t0 = t;
      st.h = h;
      for (auto& r : st.r) r.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        st.r[0][i] = y[i];
        st.r[1][i] = y1[i] - y[i];
        st.r[2][i] = h * k1[i] - st.r[1][i];
        st.r[3][i] = st.r[1][i] - h * k7[i] - st.r[2][i];
        st.r[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      t += h;
      y = y1;
      k1 = k7;
      ++sol.accepted;
      sol.max_error = std::max(sol.max_error, en);
      const bool go = on_step ? on_step(st) : true;
      if (opt.keep_steps) sol.steps.push_back(std::move(st));
      if (!go) {
        sol.stopped = true;
        break;
      }
    } else {
      ++sol.rejected;
    }
    const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    h *= en <= 1.0 ? fac : std::min(fac, 1.0);
  }
  sol.y_end = y;
  sol.t_end = t;
  return sol;
}

}  // namespace kkcheck
