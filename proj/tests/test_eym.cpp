#include "kkcheck/errors.hpp"
#include "kkcheck/variational.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace kkcheck;

namespace {

std::vector<std::vector<double>> sample_points(int count, std::uint64_t seed, double half = 0.9) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-half, half);
  std::vector<std::vector<double>> pts;
  for (int k = 0; k < count; ++k) {
    std::vector<double> p(7);
    for (double& x : p) x = u(rng);
    pts.push_back(std::move(p));
  }
  return pts;
}

// sub-box of the EYM chart with sides in [0.5, 0.8]
void sub_box(std::uint64_t seed, std::vector<double>& lo, std::vector<double>& hi) {
  std::mt19937_64 rng(seed * 104729 + 11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  lo.assign(7, 0.0);
  hi.assign(7, 0.0);
  for (int i = 0; i < 7; ++i) {
    lo[i] = -0.9 + u(rng);
    hi[i] = lo[i] + 0.5 + 0.3 * u(rng);
  }
}

double max_of(const std::vector<FormD>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, max_abs(x));
  return m;
}

EYMFields zero_momenta(EYMFields f) {
  const int n = 4 + f.alg.dim, m = eym_slots(f.alg.dim);
  f.pi = [n, m](JetArgs z) { return std::vector<Jet>(static_cast<std::size_t>(n * m), z[0] * 0.0); };
  return f;
}

EYMFields flat_u1(double lambda0) {
  EYMFields f;
  f.alg = u1();
  f.lambda0 = lambda0;
  f.theta = CoFrameField{5, 4, [](JetArgs z) {
                           std::vector<Jet> t(25, z[0] * 0.0);
                           for (int i = 0; i < 5; ++i) t[static_cast<std::size_t>(i * 6)] += 1.0;
                           return t;
                         }};
  f.phi = [](JetArgs z) { return std::vector<Jet>(50, z[0] * 0.0); };
  return zero_momenta(f);
}

// off-shell configuration: the vacuum plus a smooth non-compact deformation
EYMFields off_shell(std::uint64_t seed) {
  const EYMFields f = build_eym_vacuum_solution();
  return perturb(f, random_eym_variation(seed, f, std::vector<double>(7, -3.0), std::vector<double>(7, 3.0), 0.3), 1.0);
}

}  // namespace

TEST_CASE("eym: flat frame with vanishing fields") {
  const EYMFields f = flat_u1(0.0);
  const Chart c = Chart::box({-1, -1, -1, -1, 0}, {1, 1, 1, 1, 1});
  CHECK(std::abs(action_eym(f, Domain::whole(c, {2, 2, 2, 2, 2}))) == 0.0);
  const std::vector<double> z{0.1, 0.2, -0.3, 0.4, 0.5};
  const EYMResidual r = el_residual_eym(f, z);
  CHECK(r.max() == 0.0);
  // only the cosmological term survives
  const EYMFields g = flat_u1(0.6);
  CHECK(action_eym(g, Domain::whole(c, {2, 2, 2, 2, 2})) == doctest::Approx(-0.6 * 16.0).epsilon(1e-12));
}

TEST_CASE("eym: slot layout") {
  CHECK(eym_slots(3) == 15);
  CHECK(eym_slot_ak(3, 2, 1) == 7);
  CHECK(eym_slot_jk(3, 1, 2) == 14);
  CHECK_THROWS_AS(eym_slot_jk(3, 2, 1), InputError);
  CHECK_THROWS_AS(eym_slot_ak(3, 4, 0), InputError);
}

TEST_CASE("eym: vacuum solution satisfies the field equations") {
  const EYMFields f = build_eym_vacuum_solution();
  for (const auto& z : sample_points(60, 5)) {
    const EYMResidual lit = el_residual_eym(f, z, true);
    const EYMResidual full = el_residual_eym(f, z, false);
    CHECK(lit.max() <= 1e-7);
    CHECK(full.max() <= 1e-7);
  }
}

TEST_CASE("eym: broken configurations are detected") {
  const std::vector<double> z{0.3, -0.2, 0.5, 0.1, 0.4, -0.3, 0.2};
  const EYMFields f = build_eym_vacuum_solution();
  // wrong cosmological constant
  CHECK(max_of(el_residual_eym(build_eym_vacuum_solution(0.5), z).d) >= 0.2);
  // connection perturbation creates torsion
  EYMVariation v = random_eym_variation(3, f, std::vector<double>(7, -2.0), std::vector<double>(7, 2.0));
  EYMVariation only_phi;
  only_phi.phi = v.phi;
  const EYMResidual rc = el_residual_eym(perturb(f, only_phi, 0.1), z);
  CHECK(max_of(rc.c) >= 1e-2);
  CHECK(rc.a == 0.0);
  // momenta with the opposite sign
  EYMFields g = f;
  g.pi = [p = f.pi](JetArgs x) {
    auto q = p(x);
    for (auto& j : q) j *= -1.0;
    return q;
  };
  CHECK(max_of(el_residual_eym(g, z).d) >= 1e-2);
}

TEST_CASE("eym: torsion routes agree") {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const EYMFields f = off_shell(s);
    for (const auto& z : sample_points(4, s)) {
      const EYMResidual r = el_residual_eym(f, z);
      CHECK(max_of(r.c) >= 1e-3);
      CHECK(r.c_agreement <= 1e-9);
    }
  }
}

TEST_CASE("eym: orientation flip negates the action") {
  const EYMFields f = zero_momenta(build_eym_vacuum_solution(0.25));
  EYMFields g = f;
  g.theta.coeffs = [t = f.theta.coeffs](JetArgs z) {
    auto c = t(z);
    for (int mu = 0; mu < 7; ++mu) c[static_cast<std::size_t>(mu)] *= -1.0;
    return c;
  };
  const Domain d = Domain::box(eym_chart(), std::vector<double>(7, -0.5), std::vector<double>(7, 0.5), std::vector<int>(7, 2));
  const double a = action_eym(f, d);
  CHECK(std::abs(a) >= 1e-3);
  CHECK(action_eym(g, d) == doctest::Approx(-a).epsilon(1e-12));
}

TEST_CASE("eym: Gateaux derivative vanishes on shell") {
  const EYMFields f = build_eym_vacuum_solution();
  for (std::uint64_t s = 1; s <= 3; ++s) {
    std::vector<double> lo, hi;
    sub_box(s, lo, hi);
    const Domain d = Domain::box(eym_chart(), lo, hi, std::vector<int>(7, 4));
    const EYMVariation v = random_eym_variation(s, f, lo, hi);
    CHECK(std::abs(gateaux([&](double e) { return action_eym(perturb(f, v, e), d); })) <= 5e-6);
  }
}

TEST_CASE("eym: Gateaux derivative equals the complete pairing off shell") {
  for (std::uint64_t s = 1; s <= 2; ++s) {
    const EYMFields f = off_shell(40 + s);
    std::vector<double> lo, hi;
    sub_box(s, lo, hi);
    const Domain d = Domain::box(eym_chart(), lo, hi, std::vector<int>(7, 4));
    const EYMVariation v = random_eym_variation(s, f, lo, hi);
    const double g = gateaux([&](double e) { return action_eym(perturb(f, v, e), d); });
    const double complete = eym_pairing(f, v, d, false);
    const double literal = eym_pairing(f, v, d, true);
    CHECK(std::abs(g) >= 1e-4);
    CHECK(std::abs(g - complete) <= 1e-5);
    // the vertical-only theta equation misses terms that vanish on shell
    CHECK(std::abs(g - literal) >= 10.0 * std::abs(g - complete));
  }
}

TEST_CASE("eym: projected equations") {
  const std::vector<double> x{0.2, -0.1, 0.3, 0.4};
  SUBCASE("flat su(2) vacuum with Lambda = 0") {
    const ProjectedResidual p = projected_equations_check(reduced_flat(3), su2(), 0.75, x);
    CHECK(p.einstein <= 1e-7);
    CHECK(p.yang_mills <= 1e-7);
    CHECK(p.chain <= 1e-7);
    CHECK(projected_equations_check(reduced_flat(3), su2(), 0.5, x).einstein == doctest::Approx(0.25));
  }
  SUBCASE("constant u(1) field on flat space is not a solution") {
    const double B = 0.7;
    ReducedData red = reduced_flat(1);
    red.potential = [B](JetArgs z) {
      std::vector<Jet> A(4, z[0] * 0.0);
      A[1] = B * z[0];
      return A;
    };
    const ProjectedResidual p = projected_equations_check(red, u1(), 0.0, x);
    // stress of F_01 = B: T_0^0 = 1/2 (F_0c F^0c - 1/2 |F|^2) = -B^2 / 4
    CHECK(p.einstein == doctest::Approx(B * B / 4.0).epsilon(1e-9));
    CHECK(p.yang_mills <= 1e-10);
    CHECK(p.chain <= 1e-8);
  }
  SUBCASE("the reduction chain holds for random data") {
    for (std::uint64_t s = 1; s <= 4; ++s) CHECK(projected_equations_check(reduced_random(s, 3), su2(), 0.75, x).chain <= 1e-6);
  }
}
