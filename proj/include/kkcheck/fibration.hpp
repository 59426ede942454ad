#pragma once

#include "kkcheck/fields.hpp"
#include "kkcheck/group_chart.hpp"
#include "kkcheck/lie.hpp"
#include "kkcheck/ode.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace kkcheck {

/// Dual frame at a point (columns E_I, E^mu_I), value level. Throws DegeneracyError.
Eigen::MatrixXd dual_frame(const CoFrameField& theta, std::span<const double> z);

/// V = xi^i V_i with theta^a(V_i) = 0, theta^j(V_i) = delta^j_i.
Eigen::VectorXd vertical_vector(const CoFrameField& theta, std::span<const double> z, std::span<const double> xi);
/// Horizontal lift X(xi): theta^a(X) = xi^a, theta^i(X) = 0.
Eigen::VectorXd horizontal_lift(const CoFrameField& theta, std::span<const double> z, std::span<const double> xi);

/// theta pulled back by a chart map. Coefficient jets come out one order lower.
CoFrameField pullback_coframe(const CoFrameField& theta, const ChartMap& T);

struct LeafTrajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> z;  // wrapped into the chart
  OdeSolution ode;                     // unwrapped dense solution
  int steps = 0;
  double max_error = 0.0;
};

/// Integrates dz/dt = xi^i V_i(z) from `start` for t in [0, horizon] (horizon may be
/// negative) with absolute and relative tolerance `tol`.
LeafTrajectory integrate_leaf(const CoFrameField& theta, const Chart& chart, std::span<const double> start,
                              std::span<const double> xi, double horizon, double tol = 1e-11);

struct ClosureResult {
  bool closed = false;
  double period = 0.0;
  double distance = 0.0;  // chart distance at the detected return
  int crossings = 0;      // section crossings examined
};

/// Smallest t in (0, horizon] with the leaf back at its start within eps, found by
/// crossings of the hyperplane through the start orthogonal to the initial velocity
/// and bisection on the dense output.
ClosureResult detect_closure(const CoFrameField& theta, const Chart& chart, std::span<const double> start,
                             std::span<const double> xi, double horizon = 1e3, double eps = 1e-7,
                             double tol = 1e-11);

/// Integral of theta^{vertical} along the fibre over base point x (one periodic vertical
/// coordinate), composite trapezoid with n nodes. The fibre must be the coordinate
/// circle: PreconditionError if some theta^a has a dy component.
double fiber_flux(const CoFrameField& theta, const Chart& chart, std::span<const double> x, int n = 64);
/// max |q(x) - q(x')| over the given base points.
double flux_constancy_scan(const CoFrameField& theta, const Chart& chart, const std::vector<std::vector<double>>& xs,
                           int n = 64);

/// max |Theta^i(V_j, V_k)|.
double frobenius_residual(const CoFrameField& theta, const LieAlgebra& alg, std::span<const double> z);
/// max over vertical i of the coordinate components of [X(xi), V_i].
double commuting_flows_residual(const CoFrameField& theta, std::span<const double> xi, std::span<const double> z);

/// Path in G through its left velocity w(t) = u^-1 du/dt on [0, 1], u(0) = 1.
struct GroupPath {
  std::function<std::vector<double>(double)> velocity;
  std::vector<double> breaks;  // times where the velocity jumps
};
GroupPath constant_path(std::vector<double> xi);
/// exp(xi_1) exp(xi_2) ... with segment k traversed on [k/m, (k+1)/m].
GroupPath segment_path(std::vector<std::vector<double>> xis);

/// End point v(1) of dv/dt = w^i(t) V_i(v), v(0) = z.
std::vector<double> holonomy_map(const CoFrameField& theta, const Chart& chart, std::span<const double> z,
                                 const GroupPath& u, double tol = 1e-12);

/// s(x, y) = int_0^y theta_y(x, y') dy' for the last coordinate (Gauss-Legendre, n nodes
/// per unit length). DegeneracyError if theta_y vanishes or changes sign on the range.
double fiber_primitive(const CoFrameField& theta, std::span<const double> z, int n = 24);
/// s mod q with q = fiber_flux at the base point.
double fiber_coordinate(const CoFrameField& theta, const Chart& chart, std::span<const double> z, int n = 24);
/// A_a(x, y) = theta_a - d_a s: the potential of the normalized frame theta = A_a dx^a + ds.
std::array<double, 4> normalized_potential(const CoFrameField& theta, std::span<const double> z, int n = 24);

/// su(2) logarithm: xi with exp(xi^i t_i) = q, |xi| <= 2 pi.
std::array<double, 3> su2_log(const Quatd& q);

}  // namespace kkcheck
