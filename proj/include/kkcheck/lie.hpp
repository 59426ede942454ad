#pragma once

#include "kkcheck/quaternion.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace kkcheck {

/// Exact number a + b*sqrt(3) with rational a, b. Enough to hold the su(2) and su(3)
/// structure constants so that catalog invariants can be checked with zero error.
struct Surd3 {
  long long an = 0, ad = 1;  // a = an / ad
  long long bn = 0, bd = 1;  // b = bn / bd

  static Surd3 rational(long long num, long long den = 1);
  static Surd3 sqrt3(long long num, long long den = 1);

  double to_double() const;
  bool is_zero() const { return an == 0 && bn == 0; }

  friend Surd3 operator+(const Surd3& x, const Surd3& y);
  friend Surd3 operator-(const Surd3& x, const Surd3& y);
  friend Surd3 operator*(const Surd3& x, const Surd3& y);
  friend bool operator==(const Surd3& x, const Surd3& y) = default;
};

/// Lie algebra given by structure constants [t_i, t_j] = c^k_ij t_k and an
/// ad-invariant scalar product k_ij.
struct LieAlgebra {
  enum class Kind { u1, su2, su3, custom };
  struct Block {
    Kind kind;
    int offset;
    int dim;
  };

  std::string name;
  int dim = 0;
  std::vector<double> c;            // c[(k * dim + i) * dim + j] = c^k_ij
  std::optional<std::vector<Surd3>> exact_c;
  Eigen::MatrixXd k_metric;
  bool k_exact_identity = false;    // k is the identity (exact integer arithmetic applies)
  std::vector<Block> blocks;

  double operator()(int k, int i, int j) const { return c[(k * dim + i) * dim + j]; }
  double& operator()(int k, int i, int j) { return c[(k * dim + i) * dim + j]; }

  /// Builds a custom algebra from a dense constant array, validating shapes.
  static LieAlgebra from_constants(std::string name, int dim, std::vector<double> c, Eigen::MatrixXd k);

  LieAlgebra with_metric(const Eigen::MatrixXd& k) const;
};

LieAlgebra u1();
LieAlgebra su2();
LieAlgebra su3();
/// Block sum g_1 + g_2 + ... with block-diagonal metric.
LieAlgebra direct_sum(const std::vector<LieAlgebra>& parts);

/// max |c^m_il c^l_jk + c^m_jl c^l_ki + c^m_kl c^l_ij|; exact for catalog algebras.
double jacobi_residual(const LieAlgebra& alg);
/// max_j |sum_i c^i_ij|.
double unimodularity_residual(const LieAlgebra& alg);
/// B_jk = sum_{m,n} c^m_jn c^n_km.
Eigen::MatrixXd killing_form(const LieAlgebra& alg);
/// <B,k> = 1/2 c^i_lk c^l_ij k^jk. Throws InputError when k is singular and
/// ConsistencyError when the direct sum and 1/2 B_jk k^jk disagree beyond 1e-12.
double killing_contraction(const LieAlgebra& alg);
/// max |k_ml c^l_ij + k_jl c^l_im|.
double ad_invariance_residual(const LieAlgebra& alg);

struct U1Element {
  double angle;  // reduced to [0, 2 pi)
};
struct SU2Element {
  Quatd q;
};
struct GroupElement;
struct ProductElement {
  std::vector<GroupElement> parts;
};

struct GroupElement {
  std::variant<U1Element, SU2Element, ProductElement> value;

  static GroupElement u1(double angle);
  /// Throws InputError unless |q| = 1 within 1e-12.
  static GroupElement su2(const Quatd& q);
  static GroupElement product(std::vector<GroupElement> parts);

  GroupElement operator*(const GroupElement& other) const;
};

/// Matrix S with g t_j g^-1 = S^i_j t_i.
Eigen::MatrixXd adjoint_matrix(const GroupElement& g, const LieAlgebra& alg);

/// Rotation matrix of a unit quaternion (the su(2) adjoint representation).
Eigen::Matrix3d rotation_matrix(const Quatd& q);

}  // namespace kkcheck
