#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace kkcheck {

struct Rule1D {
  std::vector<double> nodes, weights;
};

/// n-point Gauss-Legendre rule on [a, b].
Rule1D gauss_legendre(int n, double a = -1.0, double b = 1.0);
/// Periodic trapezoid rule with n nodes on [0, period): exact for trigonometric
/// polynomials of degree < n.
Rule1D periodic_trapezoid(int n, double period);

/// Pairwise (cascade) summation: error grows like log n instead of n.
double pairwise_sum(std::span<const double> v);

/// Tensor-product grid; calls f(point, weight) for every node, in lexicographic order.
void tensor_grid(std::span<const Rule1D> rules, const std::function<void(std::span<const double>, double)>& f);

}  // namespace kkcheck
