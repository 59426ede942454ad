#pragma once

#include "kkcheck/fields.hpp"
#include "kkcheck/group_chart.hpp"
#include "kkcheck/lie.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace kkcheck {

/// h = eta (+) k with eta = diag(-1, 1, 1, 1) on the horizontal block.
struct FrameMetric {
  static constexpr std::array<double, 4> eta{-1.0, 1.0, 1.0, 1.0};
  static_assert(eta[0] == -1.0 && eta[1] == 1.0 && eta[2] == 1.0 && eta[3] == 1.0,
                "only the (-,+,+,+) signature is supported");

  int horizontal = 4;
  Eigen::MatrixXd h, h_inv;

  /// eta (+) k. k may be empty (base only). Throws InputError unless k is symmetric
  /// positive definite.
  static FrameMetric lorentz(const Eigen::MatrixXd& k);
  static FrameMetric for_algebra(const LieAlgebra& alg) { return lorentz(alg.k_metric); }

  int dim() const { return static_cast<int>(h.rows()); }
};

/// Everything the connection/curvature pipeline needs about a frame near a point:
///   d theta^L = 1/2 D^L_MN theta^M ^ theta^N,
///   E_M f = sum_v E(v, M) d f / d u^v
/// where u are the jet variables (chart coordinates, or base coordinates only when
/// the coefficient fields are constant along the fibres).
struct FrameData {
  int n = 0;
  int vars = 0;
  std::vector<Jet> E;  // vars x n
  std::vector<Jet> D;  // n^3, D[(L n + M) n + N]

  const Jet& d(int L, int M, int N) const { return D[(L * n + M) * n + N]; }
  Jet derive(const Jet& f, int M) const;
};

/// Frame data of a coframe with coefficient jets theta^I_mu (row-major, order >= 1).
/// Throws DegeneracyError on a singular frame.
FrameData frame_data(std::span<const Jet> theta, int n);

/// Inverse of a jet matrix (row-major n x n), pivoting on values.
std::vector<Jet> invert(std::span<const Jet> M, int n);

/// omega^I_J = omega^I_JK theta^K.
struct Connection {
  int n = 0;
  std::vector<Jet> w;  // w[(I n + J) n + K]

  const Jet& operator()(int I, int J, int K) const { return w[(I * n + J) * n + K]; }
  Jet& operator()(int I, int J, int K) { return w[(I * n + J) * n + K]; }
};

/// Levi-Civita connection via omega_IJK = 1/2 (D_IJK - D_JIK - D_KIJ).
Connection torsionfree_solve(const FrameData& f, const FrameMetric& m);
/// Independent route: the torsion-free + metric system solved as a dense linear system
/// in the unknowns omega_IJK (I < J), values only.
std::vector<double> torsionfree_linear_values(const FrameData& f, const FrameMetric& m);
/// max |omega^I_MN - omega^I_NM - D^I_MN|.
double torsion_residual(const FrameData& f, const Connection& w);
/// max |omega_IJK + omega_JIK| after lowering.
double metricity_residual(const Connection& w, const FrameMetric& m);

struct Curvature {
  int n = 0;
  std::vector<Jet> omega;  // Omega^I_{J MN}, n^4
  const Jet& operator()(int I, int J, int M, int N) const { return omega[((I * n + J) * n + M) * n + N]; }
};

/// Omega = d omega + omega ^ omega through the structure equations.
Curvature curvature(const FrameData& f, const Connection& w);
/// max |Omega^I_[KMN]| (first Bianchi identity of a torsion-free connection).
double first_bianchi_residual(const Curvature& c);
/// max |Omega_IJMN + Omega_JIMN| after lowering.
double curvature_antisymmetry(const Curvature& c, const FrameMetric& m);

struct EinsteinResult {
  std::vector<Jet> ein;   // Ein_I^J, n x n
  std::vector<Jet> ric;   // Ric_I^J
  Jet scalar;
  double palatini_residual = 0.0;

  Eigen::MatrixXd values() const;
};

/// Ein_I^J = Ric_I^J - 1/2 R delta. Also evaluates 1/2 hat_IJK ^ Omega^JK in the frame
/// basis and compares it to -Ein_I^J hat_J; throws ConsistencyError beyond `tol`.
EinsteinResult einstein_tensor(const Curvature& c, const FrameMetric& m, double tol = 1e-8);
/// max |Ein_IJ - Ein_JI|.
double einstein_symmetry(const EinsteinResult& e, const FrameMetric& m);
/// max_I |nabla_J Ein_I^J|; needs Ein as order-1 jets.
double contracted_bianchi(const FrameData& f, const Connection& w, const EinsteinResult& e);

/// Base vierbein e^a_mu(x) and gauge potential A^i_mu(x), both functions of the four
/// base coordinates only.
struct ReducedData {
  std::function<std::vector<Jet>(JetArgs)> vierbein;   // 16, row-major e^a_mu
  std::function<std::vector<Jet>(JetArgs)> potential;  // r x 4, A^i_mu
};

/// e^a = dx^a, A = 0.
ReducedData reduced_flat(int r);
/// Seeded polynomial data of degree <= 2 on [-1, 1]^4: e = 1 + e_scale * P, A = a_scale * P.
ReducedData reduced_random(std::uint64_t seed, int r, double e_scale = 0.2, double a_scale = 0.5);

/// Reduced fields evaluated as jets in the base coordinates around x.
struct ReducedPoint {
  int r = 0;
  FrameData base;           // frame data of e^a
  std::vector<Jet> A;       // A^i_b frame components, r x 4
  std::vector<Jet> F;       // F^i_bc frame components, r x 4 x 4
  std::vector<Jet> gamma;   // gamma^a_bc, 4 x 4 x 4

  const Jet& f(int i, int b, int c) const { return F[(i * 4 + b) * 4 + c]; }
  const Jet& g(int a, int b, int c) const { return gamma[(a * 4 + b) * 4 + c]; }
};

/// gamma^a_bc = 1/2 (Theta^a_bc - eta^ad eta_be Theta^e_dc - eta^ad eta_ce Theta^e_db).
std::vector<Jet> base_spin_connection(const FrameData& base);
/// max |F - (dA + 1/2 [A ^ A])| where the right side is recomputed in coordinates.
double field_strength_residual(const ReducedData& red, const LieAlgebra& alg, std::span<const double> x, int order);

ReducedPoint reduce(const ReducedData& red, const LieAlgebra& alg, std::span<const double> x, int order);

/// Dressed frame (e^a, e^i = A^i + dg g^-1) data with fibre-constant coefficients:
/// D^a_bc from e, D^i_bc = F^i_bc, D^i_jc = -c^i_jk A^k_c, D^i_jk = c^i_jk.
FrameData reduced_frame_data(const ReducedPoint& p, const LieAlgebra& alg);

struct KKFrames {
  CoFrameField raw;      // (e^a, g^-1 A g + g^-1 dg)
  CoFrameField dressed;  // (e^a, A + dg g^-1)
};

/// Coframes on R^4 x G over chart coordinates (x, y). Evaluation throws DomainError
/// when y leaves the group chart.
KKFrames kk_coframe(const ReducedData& red, const LieAlgebra& alg, const GroupChart& chart);

/// The block formulas for omega in the dressed frame.
Connection kk_connection_closed_form(const ReducedPoint& p, const LieAlgebra& alg);

/// Predicted Ein(h)_I^J blocks from Ein(g), F and <B,k>. The fibre block includes the
/// base scalar curvature term -R(g)/2 delta_i^j.
Eigen::MatrixXd einstein_reduction(const ReducedPoint& p, const LieAlgebra& alg, const Eigen::MatrixXd& ein_g);

/// Lambda = Lambda_0 + 1/4 <B,k>.
double lambda_effective(double lambda0, const LieAlgebra& alg);

}  // namespace kkcheck
