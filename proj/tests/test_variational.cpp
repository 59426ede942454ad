#include "kkcheck/errors.hpp"
#include "kkcheck/variational.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace kkcheck;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<std::vector<double>> random_points(const Chart& c, int count, std::uint64_t seed, double shrink = 0.9) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> pts;
  for (int k = 0; k < count; ++k) {
    std::vector<double> p;
    for (int i = 0; i < c.dim; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const double mid = 0.5 * (c.lo[u] + c.hi[u]), half = 0.5 * (c.hi[u] - c.lo[u]) * shrink;
      p.push_back(std::uniform_real_distribution<double>(mid - half, mid + half)(rng));
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

// support box for variation `seed`, strictly inside the Maxwell chart
void support(std::uint64_t seed, std::vector<double>& lo, std::vector<double>& hi) {
  std::mt19937_64 rng(seed * 7919 + 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  lo.assign(5, 0.0);
  hi.assign(5, 0.0);
  for (int i = 0; i < 4; ++i) {
    lo[i] = -0.95 + 0.5 * u(rng);
    hi[i] = lo[i] + 0.8 + 0.5 * u(rng);
  }
  lo[4] = 2.0 * pi * u(rng) * 0.6;
  hi[4] = lo[4] + 1.0 + u(rng);
}

MaxwellFields constant_pi(double p01) {
  MaxwellFields f = build_maxwell_solution(0.0);
  f.pi2 = [p01](JetArgs z) {
    std::vector<Jet> p(6, z[0] * 0.0);
    p[0] += p01;
    return p;
  };
  f.pi1 = [](JetArgs z) { return std::vector<Jet>(4, z[0] * 0.0); };
  return f;
}

}  // namespace

TEST_CASE("maxwell: trivial and constant-momentum actions") {
  const Chart c = maxwell_chart();
  const Domain d = Domain::whole(c, {3, 3, 3, 3, 4});
  CHECK(std::abs(action_maxwell(constant_pi(0.0), d)) <= 1e-14);
  // theta = dy, pi^01 = 1: density -1/2 vol
  const double vol = 16.0 * 2.0 * pi;
  CHECK(action_maxwell(constant_pi(1.0), d) == doctest::Approx(-0.5 * vol).epsilon(1e-12));
  CHECK(action_maxwell_expanded(constant_pi(1.0), d) == doctest::Approx(-0.5 * vol).epsilon(1e-12));
}

TEST_CASE("maxwell: e_a momentum does not see horizontal curvature") {
  MaxwellFields f = constant_pi(0.0);
  f.theta = [](JetArgs z) {
    std::vector<Jet> t(5, z[0] * 0.0);
    t[0] = 0.3 * z[1];  // theta = 0.3 x1 dx0 + dy, d theta = -0.3 dx0 ^ dx1
    t[4] += 1.0;
    return t;
  };
  f.pi1 = [](JetArgs z) {
    std::vector<Jet> p(4, z[0] * 0.0);
    p[0] += 2.0;
    return p;
  };
  const std::vector<double> z = {0.1, 0.2, -0.3, 0.4, 1.0};
  // pi ^ d theta = -2 e_0 ^ (-0.3) e^0 ^ e^1: no e^a ^ theta component, so zero
  CHECK(std::abs(maxwell_density(f, z)) <= 1e-15);
  CHECK(std::abs(maxwell_density_expanded(f, z)) <= 1e-15);
  const auto r = el_residual_maxwell(f, z);
  CHECK(r.b[0] == doctest::Approx(-0.3));
  CHECK(std::abs(r.a[0]) <= 1e-15);
}

TEST_CASE("maxwell: coordinate and expanded routes agree") {
  const Chart c = maxwell_chart();
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const MaxwellFields f = maxwell_off_shell(s, 0.7, 0.3);
    for (const auto& p : random_points(c, 20, s))
      CHECK(std::abs(maxwell_density(f, p) - maxwell_density_expanded(f, p)) <= 1e-12);
    const Domain d = Domain::whole(c, {3, 3, 3, 3, 6});
    CHECK(std::abs(action_maxwell(f, d) - action_maxwell_expanded(f, d)) <= 1e-9);
  }
}

TEST_CASE("maxwell: built solution satisfies the field equations") {
  const MaxwellFields f = build_maxwell_solution(0.7);
  const Chart c = maxwell_chart();
  const std::vector<double> lo = {-1, -1, -1, -1, 0}, hi = {1, 1, 1, 1, 2 * pi - 1e-9};
  const std::vector<int> counts = {17, 17, 17, 17, 2};
  const double worst = scan_max(lo, hi, counts, [&](std::span<const double> z) { return el_residual_maxwell(f, z).max(); });
  CHECK(worst <= 1e-8);
  // |pi|^2 = -B^2: the (c) equation fails if the sign of |F|^2 is flipped
  MaxwellFields g = f;
  g.pi1 = [](JetArgs z) {
    std::vector<Jet> p(4, z[0] * 0.0);
    p[0] = 0.49 * z[0];
    p[3] = -0.5 * 0.49 * z[3];
    return p;
  };
  CHECK(el_residual_maxwell(g, std::vector<double>{0.1, 0.1, 0.1, 0.1, 1.0}).max() >= 0.1);
  (void)c;
}

TEST_CASE("maxwell: Gateaux derivative vanishes on shell") {
  const MaxwellFields f = build_maxwell_solution(0.7);
  const Chart c = maxwell_chart();
  for (std::uint64_t s = 1; s <= 10; ++s) {
    std::vector<double> lo, hi;
    support(s, lo, hi);
    const Domain d = Domain::box(c, lo, hi, {5, 5, 5, 5, 5});
    const MaxwellVariation v = random_maxwell_variation(s, lo, hi);
    const double g = gateaux([&](double e) { return action_maxwell(perturb(f, v, e), d); });
    CHECK(std::abs(g) <= 1e-7);
  }
}

TEST_CASE("maxwell: Gateaux derivative equals the Euler-Lagrange pairing off shell") {
  const Chart c = maxwell_chart();
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const MaxwellFields f = maxwell_off_shell(100 + s, 0.7, 0.3);
    std::vector<double> lo, hi;
    support(s, lo, hi);
    const Domain d = Domain::box(c, lo, hi, {5, 5, 5, 5, 5});
    const MaxwellVariation v = random_maxwell_variation(s, lo, hi);
    const double g = gateaux([&](double e) { return action_maxwell(perturb(f, v, e), d); });
    const double p = maxwell_pairing(f, v, d);
    CHECK(std::abs(g - p) <= 1e-5);
    CHECK(std::abs(p) >= 1e-4);
  }
}

TEST_CASE("maxwell: domain checks") {
  const Chart c = maxwell_chart();
  CHECK_THROWS_AS(Domain::box(c, {-2, -1, -1, -1, 0}, {1, 1, 1, 1, 1}, {2, 2, 2, 2, 2}), DomainError);
  CHECK_THROWS_AS(Domain::box(c, {1, -1, -1, -1, 0}, {1, 1, 1, 1, 1}, {2, 2, 2, 2, 2}), InputError);
}

// ---------------------------------------------------------------- Yang-Mills

namespace {

std::vector<double> ym_point(std::mt19937_64& rng, int r) {
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  std::vector<double> z;
  for (int i = 0; i < 4 + r; ++i) z.push_back(u(rng));
  if (r == 1) z[4] = 2.0 * pi * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return z;
}

// seeded components c0 + c.z + c' sin(z_last)
CoeffField random_coeffs(std::uint64_t seed, int count, int dim, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> c(static_cast<std::size_t>(count), std::vector<double>(static_cast<std::size_t>(dim + 3)));
  for (auto& row : c)
    for (double& x : row) x = scale * u(rng);
  return [c, dim](JetArgs z) {
    std::vector<Jet> r;
    for (const auto& row : c) {
      Jet p = z[0] * 0.0 + row[0];
      if (dim == 0) {
        r.push_back(p);
        continue;
      }
      for (int i = 0; i < dim; ++i) p.add_scaled(z[static_cast<std::size_t>(i)], row[static_cast<std::size_t>(i + 1)]);
      p.add_scaled(sin(z[static_cast<std::size_t>(dim - 1)]), row[static_cast<std::size_t>(dim + 1)]);
      p.add_scaled(z[0] * z[1], row[static_cast<std::size_t>(dim + 2)]);
      r.push_back(p);
    }
    return r;
  };
}

}  // namespace

TEST_CASE("yang-mills: u(1) reproduces the Maxwell model") {
  const Chart c = maxwell_chart();
  for (std::uint64_t s = 1; s <= 4; ++s) {
    const MaxwellFields f = maxwell_off_shell(s, 0.7, 0.3);
    const YMFields y = embed_maxwell(f);
    for (const auto& p : random_points(c, 10, s + 50)) {
      CHECK(std::abs(ym_density(y, p) - maxwell_density(f, p)) <= 1e-10);
      const auto rm = el_residual_maxwell(f, p);
      const auto ry = el_residual_ym(y, p);
      double worst = max_abs_diff(rm.c, ry.d[0]);
      for (int a = 0; a < 4; ++a) {
        worst = std::max(worst, std::abs(rm.a[static_cast<std::size_t>(a)] - ry.b[static_cast<std::size_t>(a)]));
        for (int b = a + 1; b < 4; ++b) {
          const auto k = static_cast<std::size_t>(base_pair(a, b));
          worst = std::max(worst, std::abs(rm.b[k] - ry.a[k]));
        }
      }
      CHECK(worst <= 1e-10);
    }
  }
  CHECK(el_residual_ym(embed_maxwell(build_maxwell_solution(0.7)), std::vector<double>{0.3, -0.2, 0.5, 0.1, 2.0}).max() <= 1e-12);
}

TEST_CASE("yang-mills: pure gauge su(2) is a solution, a deformed frame is not") {
  const LieAlgebra alg = su2();
  const KKFrames frames = kk_coframe(reduced_flat(3), alg, GroupChart::for_algebra(alg));
  YMFields y;
  y.alg = alg;
  y.e = [](JetArgs x) {
    std::vector<Jet> e(16, x[0] * 0.0);
    for (int a = 0; a < 4; ++a) e[static_cast<std::size_t>(a * 5)] += 1.0;
    return e;
  };
  y.theta = [frames](JetArgs z) {
    const auto rows = frames.raw.coeffs(z);
    return std::vector<Jet>(rows.begin() + 28, rows.end());
  };
  y.pi = [](JetArgs z) { return std::vector<Jet>(63, z[0] * 0.0); };
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) CHECK(el_residual_ym(y, ym_point(rng, 3)).max() <= 1e-8);

  YMFields bent = y;
  bent.theta = [frames](JetArgs z) {
    const auto rows = frames.raw.coeffs(z);
    std::vector<Jet> t(rows.begin() + 28, rows.end());
    t[4] = t[4] * (1.0 + 0.2 * z[0]);
    return t;
  };
  CHECK(el_residual_ym(bent, ym_point(rng, 3)).max() >= 1e-2);
}

TEST_CASE("yang-mills: d^A p closed form matches the exterior derivative") {
  SUBCASE("u(1), constant p") {
    const ReducedData red = reduced_random(3, 1);
    const CoeffField p = random_coeffs(4, 10, 0, 1.0);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 10; ++k) CHECK(identity_check_15abis(red, u1(), p, ym_point(rng, 1)) <= 1e-8);
  }
  SUBCASE("su(2), random p") {
    const LieAlgebra alg = su2();
    for (std::uint64_t s = 1; s <= 10; ++s) {
      const ReducedData red = reduced_random(s, 3);
      const CoeffField p = random_coeffs(s + 100, 63, 7, 0.5);
      std::mt19937_64 rng(s);
      for (int k = 0; k < 3; ++k) CHECK(identity_check_15abis(red, alg, p, ym_point(rng, 3)) <= 1e-8);
    }
  }
  SUBCASE("p = 0") {
    const CoeffField zero = [](JetArgs z) { return std::vector<Jet>(63, z[0] * 0.0); };
    std::mt19937_64 rng(2);
    CHECK(identity_check_15abis(reduced_random(9, 3), su2(), zero, ym_point(rng, 3)) == 0.0);
  }
}

TEST_CASE("cancellation: fibre averages of d_s p vanish") {
  const Chart c = maxwell_chart();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    std::array<double, 13> a{};
    for (double& x : a) x = u(rng);
    const ScalarField p = [a](JetArgs z) {
      Jet s = z[0] * 0.0 + a[0];
      for (int k = 1; k <= 6; ++k)
        s = s + (a[static_cast<std::size_t>(2 * k - 1)] + z[0] * z[1]) * cos(k * z[4]) + a[static_cast<std::size_t>(2 * k)] * sin(k * z[4]);
      return s;
    };
    const std::vector<double> x = {u(rng), u(rng), u(rng), u(rng)};
    CHECK(std::abs(cancellation_average(p, c, x, 16)) <= 1e-12);
  }
  // a non-periodic fibre coordinate has no such cancellation
  const Chart flat = Chart::box({-1, -1, -1, -1, 0}, {1, 1, 1, 1, 1});
  const ScalarField s = [](JetArgs z) { return z[4]; };
  CHECK_THROWS_AS(cancellation_average(s, flat, std::vector<double>{0, 0, 0, 0}), PreconditionError);
}

TEST_CASE("cancellation: Haar average of the right-invariant divergence") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    std::array<std::array<double, 10>, 3> a{};
    for (auto& row : a)
      for (double& x : row) x = u(rng);
    auto f = [a](const Quat<Jet>& q) {
      std::array<Jet, 3> r;
      const Jet v[4] = {q.w, q.x, q.y, q.z};
      for (std::size_t k = 0; k < 3; ++k) {
        Jet s = v[0] * a[k][0] + v[1] * a[k][1] + v[2] * a[k][2] + v[3] * a[k][3];
        s = s + v[0] * v[1] * a[k][4] + v[2] * v[3] * a[k][5] + v[1] * v[1] * a[k][6] + v[0] * v[3] * a[k][7];
        s = s + sin(v[1] + v[2]) * a[k][8] + v[0] * v[1] * v[2] * a[k][9];
        r[k] = s;
      }
      return r;
    };
    const HaarEstimate h = haar_divergence_average(f, 4000, 42 + static_cast<std::uint64_t>(t));
    CHECK(h.sigma > 0.0);
    CHECK(std::abs(h.mean) <= 3.0 * h.sigma);
  }
  const Quatd q1 = haar_sample(7, 3), q2 = haar_sample(7, 3);
  CHECK(q1.w == q2.w);
  CHECK(std::abs(norm(q1) - 1.0) <= 1e-15);
}
