#pragma once

#include "kkcheck/forms.hpp"
#include "kkcheck/lie.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace kkcheck {

/// Box chart with optional periodic coordinates.
struct Chart {
  int dim = 0;
  std::vector<double> lo, hi;
  std::vector<double> period;  // 0 for box coordinates

  static Chart box(std::vector<double> lo, std::vector<double> hi);
  Chart& set_periodic(int i, double p);

  bool is_periodic(int i) const { return period[static_cast<std::size_t>(i)] > 0.0; }
  bool contains(std::span<const double> z) const;
  /// Reduces periodic coordinates into [0, period).
  void wrap(std::span<double> z) const;
  /// Euclidean distance with per-coordinate wrapping on periodic coordinates.
  double distance(std::span<const double> a, std::span<const double> b) const;
};

using JetArgs = std::span<const Jet>;
using ScalarField = std::function<Jet(JetArgs)>;
using FormField = std::function<FormJ(JetArgs)>;
using VectorField = std::function<std::vector<Jet>(JetArgs)>;
/// Chart map z -> T(z), components as jets.
using ChartMap = std::function<std::vector<Jet>(JetArgs)>;

/// N+1 one-forms theta^I = theta^I_mu dz^mu. Indices below `horizontal` are a-type.
struct CoFrameField {
  int dim = 0;
  int horizontal = 4;
  /// Row-major theta^I_mu, size dim * dim.
  std::function<std::vector<Jet>(JetArgs)> coeffs;

  FormJ one_form(JetArgs z, int I) const;
};

Eigen::MatrixXd frame_matrix(const CoFrameField& f, std::span<const double> point);

/// Scalar/ form evaluation at a point with jets of the given order.
Jet evaluate(const ScalarField& f, std::span<const double> point, int order);
FormJ evaluate(const FormField& f, std::span<const double> point, int order);

/// Components of a coordinate-basis form in the frame basis at a point. Throws
/// DegeneracyError on a singular frame.
FormD frame_components(const FormD& a, const Eigen::MatrixXd& theta);
/// Inverse operation: frame basis -> coordinate basis.
FormD coordinate_components(const FormD& a, const Eigen::MatrixXd& theta);

/// Theta^a = d theta^a, Theta^i = d theta^i + 1/2 c^i_jk theta^j ^ theta^k.
std::vector<FormJ> g_curvature(const CoFrameField& theta, const LieAlgebra& alg, JetArgs z);

/// Graded volume forms of a frame at a point, in coordinate basis.
class GradedVolumes {
public:
  GradedVolumes(const Eigen::MatrixXd& theta, int horizontal);

  int dim() const { return n_; }
  /// hat-theta^{(N+1-|I|)}_I over all indices.
  FormD hat(std::span<const int> I) const;
  FormD hat(std::initializer_list<int> I) const { return hat(std::span<const int>(I.begin(), I.size())); }
  /// e^{(4-|I|)}_I over the horizontal block.
  FormD base(std::initializer_list<int> I) const;
  /// theta-bar^{(r-|I|)}_I over the vertical block.
  FormD bar(std::initializer_list<int> I) const;
  FormD frame_to_coordinate(const FormD& a) const;
  /// max over K, I of |theta^K ^ hat_I - delta^K_I hat|.
  double contraction_residual() const;

private:
  Eigen::MatrixXd theta_;
  int n_, h_;
};

/// L_X a = d(i_X a) + i_X da.
FormJ lie_derivative(const VectorField& X, const FormField& a, JetArgs z);
/// Independent route: (phi_h^* a - phi_{-h}^* a) / 2h with phi the flow of X, the flow
/// map carried as jets through classical RK4 substeps.
FormD lie_derivative_flow(const VectorField& X, const FormField& a, std::span<const double> point, double h = 1e-4);

std::vector<Jet> vector_bracket(const VectorField& X, const VectorField& Y, JetArgs z);

/// T^* a at z. When `require_invertible` the Jacobian of T is checked.
FormJ pullback(const ChartMap& T, const FormField& a, JetArgs z, bool require_invertible = false);

/// Seeded random smooth fields: polynomials of degree <= 3 in box coordinates times
/// trigonometric polynomials in periodic ones, coefficients uniform in [-1, 1].
class RandomFields {
public:
  RandomFields(const Chart& chart, std::uint64_t seed);

  ScalarField scalar(int max_degree = 3, int trig_degree = 2);
  FormField form(int degree, int max_degree = 3);
  /// Identity coframe plus `scale` times random coefficients.
  CoFrameField coframe(double scale, int horizontal = 4);
  VectorField vector(int max_degree = 2);
  /// Fibered map (x, y) -> (x, y + scale * f(x, y)) on the vertical block.
  ChartMap fibered_map(int horizontal, double scale);

  std::mt19937_64& rng() { return rng_; }
  double uniform(double a = -1.0, double b = 1.0);

private:
  Chart chart_;
  std::mt19937_64 rng_;
};

}  // namespace kkcheck
