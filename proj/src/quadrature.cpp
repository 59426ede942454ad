#include "kkcheck/quadrature.hpp"

#include "kkcheck/errors.hpp"

#include <cmath>
#include <numbers>

namespace kkcheck {

Rule1D gauss_legendre(int n, double a, double b) {
  if (n < 1) throw InputError("quadrature needs at least one node");
  Rule1D r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // derivative at the converged node
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[static_cast<std::size_t>(i)] = mid - half * x;
    r.nodes[static_cast<std::size_t>(n - 1 - i)] = mid + half * x;
    r.weights[static_cast<std::size_t>(i)] = r.weights[static_cast<std::size_t>(n - 1 - i)] = half * w;
  }
  return r;
}

Rule1D periodic_trapezoid(int n, double period) {
  if (n < 1 || period <= 0.0) throw InputError("bad trapezoid rule");
  Rule1D r;
  for (int k = 0; k < n; ++k) {
    r.nodes.push_back(period * k / n);
    r.weights.push_back(period / n);
  }
  return r;
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

void tensor_grid(std::span<const Rule1D> rules, const std::function<void(std::span<const double>, double)>& f) {
  const std::size_t d = rules.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> p(d);
  for (const auto& r : rules)
    if (r.nodes.empty()) return;
  while (true) {
    double w = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      p[k] = rules[k].nodes[idx[k]];
      w *= rules[k].weights[idx[k]];
    }
    f(p, w);
    std::size_t k = d;
    while (k > 0) {
      --k;
      if (++idx[k] < rules[k].nodes.size()) break;
      idx[k] = 0;
      if (k == 0) return;
    }
    if (d == 0) return;
  }
}

}  // namespace kkcheck
