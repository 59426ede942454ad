#pragma once

#include "kkcheck/lie.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace kkcheck {

/// One named verification result. pass <=> max_residual <= tolerance (NaN fails).
struct Check {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<std::pair<std::string, double>> extra;
  bool fixed_tolerance = false;  // controls: --tol does not apply
};

Check make_check(std::string name, double residual, double tolerance,
                 std::vector<std::pair<std::string, double>> extra = {});

/// Negative control: passes when `effect` reaches `threshold`. The residual is the
/// shortfall max(0, threshold - effect) against tolerance 0.
Check control_check(std::string name, double effect, double threshold);

/// u1 | su2 | product (u(1) + su(2)); InputError otherwise.
LieAlgebra group_algebra(const std::string& tag);
bool is_group_tag(const std::string& tag);

/// Suites. `samples` scales the number of random instances; expensive checks cap it.
std::vector<Check> lie_checks(const std::string& group, std::uint64_t seed, int samples);
std::vector<Check> forms_checks(const std::string& group, std::uint64_t seed, int samples);
std::vector<Check> geometry_checks(const std::string& group, std::uint64_t seed, int samples);
std::vector<Check> fibration_checks(const std::string& group, std::uint64_t seed, int samples);
std::vector<Check> variational_checks(const std::string& group, std::uint64_t seed, int samples);

/// Brute-force oracles shared with the acceptance runner.
Eigen::MatrixXd killing_oracle(const LieAlgebra& alg);
double killing_contraction_oracle(const LieAlgebra& alg);

}  // namespace kkcheck
