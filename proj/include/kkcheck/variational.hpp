#pragma once

#include "kkcheck/fields.hpp"
#include "kkcheck/geometry.hpp"
#include "kkcheck/group_chart.hpp"
#include "kkcheck/lie.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace kkcheck {

/// Coefficient functions of the chart coordinates (or of the four base coordinates).
using CoeffField = std::function<std::vector<Jet>(JetArgs)>;

// ---------------------------------------------------------------- quadrature

/// Tensor-product quadrature box inside a chart. Periodic chart coordinates whose
/// interval covers a full period use the periodic trapezoid rule, all others
/// Gauss-Legendre.
struct Domain {
  Chart chart;
  std::vector<double> lo, hi;
  std::vector<int> nodes;

  /// The whole chart with the given node counts.
  static Domain whole(const Chart& chart, std::vector<int> nodes);
  /// Sub-box; DomainError when it leaves the chart.
  static Domain box(const Chart& chart, std::vector<double> lo, std::vector<double> hi, std::vector<int> nodes);
};

/// sum of weight * density over the nodes, pairwise-summed in lexicographic order.
double integrate(const Domain& d, const std::function<double(std::span<const double>)>& density);

/// Max of f over a uniform grid with counts[i] points per axis (endpoints included;
/// a count of 1 uses the midpoint).
double scan_max(std::span<const double> lo, std::span<const double> hi, std::span<const int> counts,
                const std::function<double(std::span<const double>)>& f);

// ---------------------------------------------------------------- frame basis

/// A coframe at a point, values only: theta^I = M(I, mu) dz^mu, E_I = W(mu, I) d_mu,
/// d w^L as frame-basis 2-forms.
struct FramePoint {
  int n = 0;
  Eigen::MatrixXd M, W;
  double det = 0.0;
  std::vector<FormD> dw;

  /// d of a frame-basis form with constant coefficients.
  FormD d(const FormD& a) const;
  /// df = (E_M f) w^M.
  FormD grad(const Jet& f) const;
  double derive(const Jet& f, int I) const;
  /// Frame components of the coordinate 2-form with coefficients d_mu a_nu - d_nu a_mu.
  Eigen::MatrixXd curl(std::span<const Jet> a) const;
  /// Frame components a_I of a coordinate one-form.
  Eigen::VectorXd components(std::span<const Jet> a) const;
};

/// theta coefficients (row-major, order >= 1).
FramePoint frame_point(std::span<const Jet> theta, int n);

/// Index of the pair (J, K), J < K, among the n(n-1)/2 pairs in lexicographic order.
int pair_index(int n, int J, int K);
/// sum_{J<K} c_JK hat_JK, the momentum form with antisymmetric components.
FormD momentum_form(int n, std::span<const double> c);

/// Bump prod (1 - t_i^2)^2 on a box (zero outside), t_i the box coordinate in [-1, 1].
ScalarField bump(std::vector<double> lo, std::vector<double> hi);

// ---------------------------------------------------------------- Maxwell

/// theta on Y^5 with the fixed base vierbein e and the momenta of
///   pi = 1/2 pi^{ab} e_ab ^ theta - pi^a e_a.
struct MaxwellFields {
  CoeffField e;      // base coordinates -> e^a_mu, 16
  CoeffField theta;  // z -> theta_mu, 5
  CoeffField pi2;    // z -> pi^{ab} for 01, 02, 03, 12, 13, 23
  CoeffField pi1;    // z -> pi^a
};

/// Position of (a, b), a < b, in the pi2 layout.
int base_pair(int a, int b);

/// 1/2 |pi|^2 e^(4) ^ theta + pi ^ d theta as a density (coordinate forms).
double maxwell_density(const MaxwellFields& f, std::span<const double> z);
/// (1/4 pi^ab pi_ab + 1/2 Theta_ab pi^ab + Theta_a pi^a) e^(4) ^ theta.
double maxwell_density_expanded(const MaxwellFields& f, std::span<const double> z);
double action_maxwell(const MaxwellFields& f, const Domain& d);
double action_maxwell_expanded(const MaxwellFields& f, const Domain& d);

struct MaxwellResidual {
  std::array<double, 4> a{};  // Theta_a
  std::array<double, 6> b{};  // Theta_ab + pi_ab
  FormD c;                    // d pi - 1/2 |pi|^2 e^(4), frame basis
  double max() const;
};
MaxwellResidual el_residual_maxwell(const MaxwellFields& f, std::span<const double> z);

/// theta = B x0 dx1 + dy on the flat base, pi^{ab} = -F^{ab}, p^3 = 1/2 B^2 x3.
MaxwellFields build_maxwell_solution(double B);
/// 4-dim box x 2pi circle chart used by the Maxwell checks.
Chart maxwell_chart(double half_width = 1.0);

/// Additive variation; each field gets eps times these coefficients.
struct MaxwellVariation {
  CoeffField theta, pi2, pi1;
};
MaxwellFields perturb(const MaxwellFields& f, const MaxwellVariation& v, double eps);
/// Seeded polynomial times bump on the support box, amplitude `scale`.
MaxwellVariation random_maxwell_variation(std::uint64_t seed, std::vector<double> lo, std::vector<double> hi,
                                          double scale = 1.0, bool vary_theta = true, bool vary_pi = true);
/// Seeded off-shell perturbation of the solution (magnitude ~ scale everywhere).
MaxwellFields maxwell_off_shell(std::uint64_t seed, double B = 0.7, double scale = 0.1);
/// int (E_theta ^ delta theta + delta pi ^ E_pi) over the domain, where
/// E_theta = d pi - 1/2 |pi|^2 e^(4), E_pi = d theta + 1/2 pi_ab e^a ^ e^b.
double maxwell_pairing(const MaxwellFields& f, const MaxwellVariation& v, const Domain& d);

// ---------------------------------------------------------------- Yang-Mills

/// theta^i on Y^{4+r}, fixed e, pi_i = sum_{J<K} pi_i^{JK} hat_JK over the frame
/// (e^a, theta^i) (the horizontal pairs are pi_i^{ab}, mixed pairs -pi_i^{ak}...).
struct YMFields {
  LieAlgebra alg;
  CoeffField e;      // base -> e^a_mu, 16
  CoeffField theta;  // z -> theta^i_mu, r x n
  CoeffField pi;     // z -> pi_i^{JK}, r x n(n-1)/2
};

double ym_density(const YMFields& f, std::span<const double> z);
double action_ym(const YMFields& f, const Domain& d);

struct YMResidual {
  std::vector<double> a;  // pi^i_ab + Theta^i_ab, r x 6
  std::vector<double> b;  // Theta^i_ak, r x 4 x r
  std::vector<double> c;  // Theta^i_jk, r x r x r
  std::vector<FormD> d;   // d^theta pi_i - 1/2 |pi|^2 e^(4) ^ bar_i, frame basis
  double max() const;
};
YMResidual el_residual_ym(const YMFields& f, std::span<const double> z);

/// Maxwell fields as u(1) Yang-Mills fields.
YMFields embed_maxwell(const MaxwellFields& f);

/// Dressed momenta p_i^{JK} (r x n(n-1)/2) over the dressed frame (e^a, A + dg g^-1).
/// Returns the max deviation between d^A p_i from the exterior derivative pipeline and
/// the closed form in terms of partial^{gamma,A}, partial_k, F and c.
double identity_check_15abis(const ReducedData& red, const LieAlgebra& alg, const CoeffField& p,
                             std::span<const double> z);

// ---------------------------------------------------------------- cancellation

/// Average over the periodic last coordinate of d_s p at base point x (trapezoid, n
/// nodes). PreconditionError unless that coordinate is periodic in the chart.
double cancellation_average(const ScalarField& p, const Chart& chart, std::span<const double> x, int n = 16);

struct HaarEstimate {
  double mean = 0.0, sigma = 0.0;
  int samples = 0;
};
/// Monte-Carlo Haar average over SU(2) of sum_k E_k f^k with E_k the right-invariant
/// fields dual to dg g^-1. Sample m uses its own generator seeded from (seed, m).
HaarEstimate haar_divergence_average(const std::function<std::array<Jet, 3>(const Quat<Jet>&)>& f, int samples,
                                     std::uint64_t seed);
/// Uniform unit quaternion for sample m.
Quatd haar_sample(std::uint64_t seed, std::uint64_t m);

// ---------------------------------------------------------------- Einstein-Yang-Mills

/// theta^I, phi^{IJ} (coordinate components, pairs I<J x n) and the momenta of
///   pi_I = -pi_I^{ak} theta_a^(3) ^ bar_k + 1/2 pi_I^{jk} theta^(4) ^ bar_jk.
/// pi_I^{ab} has no slot, so the constraint holds by construction.
struct EYMFields {
  LieAlgebra alg;
  CoFrameField theta;
  CoeffField phi;  // z -> phi^{IJ}_mu, n(n-1)/2 x n
  CoeffField pi;   // z -> n x m, m = 4r + r(r-1)/2: (a, k) slots then (j < k)
  double lambda0 = 0.0;
};

int eym_slots(int r);
int eym_slot_ak(int r, int a, int k);   // k in 0..r-1
int eym_slot_jk(int r, int j, int k);   // j < k in 0..r-1

double eym_density(const EYMFields& f, std::span<const double> z);
double action_eym(const EYMFields& f, const Domain& d);

struct EYMResidual {
  double a = 0.0;              // max |Theta^I_ak|
  double b = 0.0;              // max |Theta^I_jk|
  std::vector<FormD> c;        // d^phi hat_IJ, pairs
  std::vector<FormD> c_alt;    // d^phi theta^K ^ hat_IJK
  double c_agreement = 0.0;
  std::vector<FormD> d;        // per I, frame basis
  double max() const;
};
/// `literal`: the theta equation with the sum over vertical L only and no trace term;
/// otherwise the complete first variation. The two agree when Theta^I_ak = Theta^I_jk = 0.
EYMResidual el_residual_eym(const EYMFields& f, std::span<const double> z, bool literal = true);

/// R^4 x SU(2): flat base, A = 0, theta^i = g^-1 dg, phi its Levi-Civita connection,
/// pi_i^{0i} = -x0/2 (p_i^{j0} = delta x0 / 2), Lambda_0 = 3/4.
EYMFields build_eym_vacuum_solution(double lambda0 = 0.75);
/// Chart of R^4 x SU(2) used for EYM checks: |x| <= 1, |y| <= 1.
Chart eym_chart();

struct EYMVariation {
  CoeffField theta, phi, pi;
};
EYMFields perturb(const EYMFields& f, const EYMVariation& v, double eps);
EYMVariation random_eym_variation(std::uint64_t seed, const EYMFields& f, std::vector<double> lo,
                                  std::vector<double> hi, double scale = 1.0);
/// Integral of dtheta^I ^ E_I + dphi^{IJ} ^ d^phi hat_IJ + dpi_I ^ Theta^I.
double eym_pairing(const EYMFields& f, const EYMVariation& v, const Domain& d, bool literal = false);

/// Residuals of the projected system: Ein(g) + Lambda = 1/2 (FF - 1/2|F|^2), the
/// Yang-Mills divergence, and Ein(h)_i^a - 1/2 d^{gamma,A}_b F_i^{ab} from the numeric
/// Einstein tensor of the dressed frame.
struct ProjectedResidual {
  double einstein = 0.0;
  double yang_mills = 0.0;
  double chain = 0.0;
};
ProjectedResidual projected_equations_check(const ReducedData& red, const LieAlgebra& alg, double lambda0,
                                            std::span<const double> x);

// ---------------------------------------------------------------- variations, gauge

/// (A(eps) - A(-eps)) / 2 eps.
double gateaux(const std::function<double(double)>& action_along, double eps = 1e-4);

/// Fibred diffeomorphism T(x, y) = (x, y + f(x, y)) applied by pullback.
MaxwellFields pullback_fields(const MaxwellFields& f, const ChartMap& T);
YMFields pullback_fields(const YMFields& f, const ChartMap& T);
EYMFields pullback_fields(const EYMFields& f, const ChartMap& T);
/// theta -> theta + dV with V a function of the base; pi is kept as a form.
MaxwellFields shift_exact(const MaxwellFields& f, const ScalarField& V);
/// pi -> pi + psi for a base 3-form psi (coordinate components, 5-dim chart). Unless
/// `unchecked`, PreconditionError when d psi != 0 at the sample points.
MaxwellFields shift_psi(const MaxwellFields& f, const FormField& psi, std::span<const std::vector<double>> samples,
                        bool unchecked = false);
/// pi_i -> pi_i + chi_i with chi_i = chi_i^{bk} e_b^(3) ^ bar_k + 1/2 chi_i^{jk} e^(4) ^ bar_jk
/// given as momentum components; PreconditionError unless theta^i ^ d^theta chi_i = 0
/// at the sample points.
YMFields shift_chi(const YMFields& f, const CoeffField& chi, std::span<const std::vector<double>> samples);
/// Constant Ad_g dressing of all fields.
YMFields dress_constant(const YMFields& f, const GroupElement& g);
EYMFields dress_constant(const EYMFields& f, const GroupElement& g);
/// The same substitution with a position-dependent S(z) (r x r, row-major). phi is
/// rotated as a tensor, without the dS S^-1 term, so the action is not invariant.
EYMFields dress_local(const EYMFields& f, const CoeffField& S);

}  // namespace kkcheck
