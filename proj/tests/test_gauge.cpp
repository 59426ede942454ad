#include "kkcheck/errors.hpp"
#include "kkcheck/variational.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace kkcheck;

namespace {

// seeded components c0 + c.z, scaled
CoeffField linear_coeffs(std::uint64_t seed, int count, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> c(static_cast<std::size_t>(count), std::vector<double>(8));
  for (auto& row : c)
    for (double& x : row) x = u(rng) * scale;
  return [c](JetArgs z) {
    std::vector<Jet> out;
    for (const auto& row : c) {
      Jet p = Jet::constant(z[0].dim(), z[0].order(), row[0]);
      for (std::size_t i = 0; i < z.size() && i + 1 < row.size(); ++i) p.add_scaled(z[i], row[i + 1]);
      out.push_back(p);
    }
    return out;
  };
}

// su(2) pure gauge frame with theta^0 bent along dx^1 by h(x, y)
YMFields bent_su2(std::uint64_t seed, double amp) {
  const LieAlgebra alg = su2();
  const KKFrames frames = kk_coframe(reduced_flat(3), alg, GroupChart::for_algebra(alg));
  const ScalarField h = bump({-1e9, -1e9, -1e9, -1e9, -0.3, -0.45, -0.2}, {1e9, 1e9, 1e9, 1e9, 0.5, 0.3, 0.4});
  YMFields y;
  y.alg = alg;
  y.e = [](JetArgs x) {
    std::vector<Jet> e(16, x[0] * 0.0);
    for (int a = 0; a < 4; ++a) e[static_cast<std::size_t>(a * 5)] += 1.0;
    return e;
  };
  y.theta = [frames, h, amp](JetArgs z) {
    const auto rows = frames.raw.coeffs(z);
    std::vector<Jet> t(rows.begin() + 28, rows.end());
    t[1] += h(z) * (1.0 + z[0]) * amp;
    return t;
  };
  y.pi = linear_coeffs(seed, 63, 0.5);
  return y;
}

GroupElement unit_element() {
  const double w = std::cos(0.4), x = 0.3, y = -0.5, z = 0.6, s = std::sqrt(w * w + x * x + y * y + z * z);
  return GroupElement::su2(Quatd{w / s, x / s, y / s, z / s});
}

double max_diff(const std::vector<Jet>& a, const std::vector<Jet>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ca = a[i].coefficients(), cb = b[i].coefficients();
    for (std::size_t k = 0; k < ca.size(); ++k) m = std::max(m, std::abs(ca[k] - cb[k]));
  }
  return m;
}

std::vector<double> jacobian_det(const ChartMap& T, std::span<const double> z, double& det) {
  const auto w = T(seed_point(z, 1));
  const auto n = static_cast<Eigen::Index>(z.size());
  Eigen::MatrixXd J(n, n);
  std::vector<double> p;
  for (Eigen::Index i = 0; i < n; ++i) {
    p.push_back(w[static_cast<std::size_t>(i)].value());
    for (Eigen::Index j = 0; j < n; ++j) J(i, j) = w[static_cast<std::size_t>(i)].partial(static_cast<int>(j));
  }
  det = J.determinant();
  return p;
}

}  // namespace

TEST_CASE("gauge: Maxwell fibre shift leaves the action unchanged") {
  const ChartMap T = [](JetArgs z) {
    std::vector<Jet> w(z.begin(), z.end());
    w[4] = z[4] + 0.5 * sin(z[0]);
    return w;
  };
  const Domain d = Domain::whole(maxwell_chart(), {3, 3, 3, 3, 12});
  for (std::uint64_t s = 1; s <= 2; ++s) {
    const MaxwellFields f = maxwell_off_shell(s, 0.7, 0.3);
    const MaxwellFields g = pullback_fields(f, T);
    const double a = action_maxwell(f, d);
    CHECK(std::abs(a) >= 1e-2);
    CHECK(std::abs(action_maxwell(g, d) - a) <= 1e-7);
    // the map does move the fields
    const std::vector<double> z{0.3, -0.2, 0.1, 0.4, 1.0};
    CHECK(max_diff(f.theta(seed_point(z, 1)), g.theta(seed_point(z, 1))) >= 1e-2);
  }
  const ChartMap bad = [](JetArgs z) {
    std::vector<Jet> w(z.begin(), z.end());
    w[0] = z[0] + 0.1 * z[4];
    return w;
  };
  const MaxwellFields g = pullback_fields(build_maxwell_solution(0.7), bad);
  CHECK_THROWS_AS(g.theta(seed_point(std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5}, 1)), InputError);
}

TEST_CASE("gauge: Maxwell exact shift of theta keeps the density") {
  const ScalarField V = [](JetArgs x) { return sin(x[0]) * x[1] + x[2] * x[2] * x[3] + 0.3 * x[3]; };
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const MaxwellFields f = maxwell_off_shell(s, 0.7, 0.3);
    const MaxwellFields g = shift_exact(f, V);
    const Domain d = Domain::whole(maxwell_chart(), {3, 3, 3, 3, 6});
    CHECK(std::abs(action_maxwell(g, d) - action_maxwell(f, d)) <= 1e-7);
    // a shift of theta alone (momentum components held fixed) is not a symmetry
    MaxwellFields naive = g;
    naive.pi1 = f.pi1;
    CHECK(std::abs(action_maxwell(naive, d) - action_maxwell(f, d)) >= 1e-3);
  }
}

TEST_CASE("gauge: Maxwell closed psi shift") {
  const std::vector<double> lo{-0.8, -0.7, -0.9, -0.6, 0.0}, hi{0.7, 0.8, 0.6, 0.9, 2.0 * 3.141592653589793};
  const ScalarField b = bump({lo[0], lo[1], lo[2], lo[3]}, {hi[0], hi[1], hi[2], hi[3]});
  // beta = b (x0 dx1 dx2 + x3 dx0 dx3), psi = d beta
  const FormField beta = [b](JetArgs z) {
    FormJ f(5, 2);
    const Jet v = b(z.first(4));
    f.add(bit(1) | bit(2), v * z[0]);
    f.add(bit(0) | bit(3), v * z[3]);
    return f;
  };
  const FormField psi = [beta](JetArgs z) {
    std::vector<double> p;
    for (const auto& x : z) p.push_back(x.value());
    const FormJ db = ext_d(beta(seed_point(p, z[0].order() + 1)));
    FormJ r(5, 3);
    for (const auto& [m, v] : db.terms()) r.add(m, compose(v.truncated(z[0].order()), z));
    return r;
  };
  const FormField open = [b](JetArgs z) {
    FormJ f(5, 3);
    f.add(bit(1) | bit(2) | bit(3), b(z.first(4)) * z[0]);
    return f;
  };
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  std::vector<std::vector<double>> samples;
  for (int k = 0; k < 10; ++k) samples.push_back({u(rng), u(rng), u(rng), u(rng), 3.0 + u(rng)});

  const Domain d = Domain::box(maxwell_chart(), lo, hi, {7, 7, 7, 7, 6});
  for (std::uint64_t s = 1; s <= 2; ++s) {
    const MaxwellFields f = maxwell_off_shell(20 + s, 0.7, 0.3);
    const double a = action_maxwell(f, d);
    const MaxwellFields g = shift_psi(f, psi, samples);
    CHECK(std::abs(action_maxwell(g, d) - a) <= 1e-7);
    // the momenta moved
    const std::vector<double> z{0.1, 0.2, -0.1, 0.3, 1.0};
    CHECK(max_diff(f.pi1(seed_point(z, 1)), g.pi1(seed_point(z, 1))) >= 1e-3);
    CHECK(std::abs(maxwell_density(g, z) - maxwell_density(f, z)) >= 1e-4);
    CHECK(std::abs(action_maxwell(shift_psi(f, open, samples, true), d) - a) > 1e-3);
  }
  const MaxwellFields f = maxwell_off_shell(1, 0.7, 0.3);
  CHECK_THROWS_AS(shift_psi(f, open, samples), PreconditionError);
  const FormField fibre = [](JetArgs z) {
    FormJ r(5, 3);
    r.add(bit(0) | bit(1) | bit(4), z[0] * 0.0 + 1.0);
    return r;
  };
  CHECK_THROWS_AS(shift_psi(f, fibre, samples), InputError);
}

TEST_CASE("gauge: Yang-Mills fibred pullback transforms the density") {
  const ChartMap T = [](JetArgs z) {
    std::vector<Jet> w(z.begin(), z.end());
    w[4] = z[4] + 0.2 * sin(z[0] + z[5]);
    w[5] = z[5] * (1.0 + 0.1 * z[1]) + 0.05 * z[6] * z[6];
    w[6] = z[6] - 0.1 * z[4] * z[2];
    return w;
  };
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const YMFields f = bent_su2(s, 0.4);
    const YMFields g = pullback_fields(f, T);
    for (int k = 0; k < 5; ++k) {
      std::vector<double> z(7);
      for (double& x : z) x = u(rng);
      double det = 0.0;
      const auto w = jacobian_det(T, z, det);
      const double rho = ym_density(f, w);
      CHECK(std::abs(rho) >= 1e-3);
      CHECK(std::abs(ym_density(g, z) - det * rho) <= 1e-7);
    }
  }
}

TEST_CASE("gauge: constant Ad dressing") {
  const GroupElement g = unit_element();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  SUBCASE("Yang-Mills") {
    for (std::uint64_t s = 1; s <= 3; ++s) {
      const YMFields f = bent_su2(s, 0.4);
      const YMFields h = dress_constant(f, g);
      for (int k = 0; k < 5; ++k) {
        std::vector<double> z(7);
        for (double& x : z) x = u(rng);
        CHECK(std::abs(ym_density(h, z) - ym_density(f, z)) <= 1e-7);
        CHECK(max_diff(f.theta(seed_point(z, 1)), h.theta(seed_point(z, 1))) >= 1e-2);
      }
    }
  }
  SUBCASE("Einstein-Yang-Mills") {
    const EYMFields base = build_eym_vacuum_solution();
    for (std::uint64_t s = 1; s <= 3; ++s) {
      const EYMFields f = perturb(base, random_eym_variation(s, base, std::vector<double>(7, -3.0), std::vector<double>(7, 3.0), 0.3), 1.0);
      const EYMFields h = dress_constant(f, g);
      for (int k = 0; k < 5; ++k) {
        std::vector<double> z(7);
        for (double& x : z) x = u(rng);
        const double rho = eym_density(f, z);
        CHECK(std::abs(rho) >= 1e-3);
        CHECK(std::abs(eym_density(h, z) - rho) <= 1e-7);
      }
    }
  }
}

TEST_CASE("gauge: EYM diffeomorphism pullback") {
  const ChartMap T = [](JetArgs z) {
    std::vector<Jet> w(z.begin(), z.end());
    w[0] = z[0] + 0.1 * sin(z[4]) * z[1];
    w[2] = z[2] * (1.0 + 0.1 * z[5]);
    w[5] = z[5] + 0.15 * z[3] * z[0];
    return w;
  };
  const EYMFields base = build_eym_vacuum_solution();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::uint64_t s = 1; s <= 2; ++s) {
    const EYMFields f = perturb(base, random_eym_variation(s, base, std::vector<double>(7, -3.0), std::vector<double>(7, 3.0), 0.3), 1.0);
    const EYMFields g = pullback_fields(f, T);
    for (int k = 0; k < 5; ++k) {
      std::vector<double> z(7);
      for (double& x : z) x = u(rng);
      double det = 0.0;
      const auto w = jacobian_det(T, z, det);
      CHECK(det > 0.0);
      CHECK(std::abs(eym_density(g, z) - det * eym_density(f, w)) <= 1e-7);
    }
  }
}

TEST_CASE("gauge: Yang-Mills chi shift") {
  const int n = 7;
  // chi_0 on the (e_1, theta^0) slot, independent of x^1
  const CoeffField chi = [n](JetArgs z) {
    std::vector<Jet> c(static_cast<std::size_t>(3 * 21), z[0] * 0.0);
    c[static_cast<std::size_t>(pair_index(n, 1, 4))] = 0.7 + z[0] * z[2] - 0.4 * z[3];
    return c;
  };
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  std::vector<std::vector<double>> samples;
  for (int k = 0; k < 8; ++k) {
    std::vector<double> z(7);
    for (double& x : z) x = u(rng);
    samples.push_back(z);
  }
  const std::vector<double> lo{-0.5, -0.4, -0.6, -0.5, -0.3, -0.45, -0.2}, hi{0.6, 0.5, 0.4, 0.5, 0.5, 0.3, 0.4};
  const Domain d = Domain::whole(Chart::box(lo, hi), {3, 3, 3, 3, 8, 8, 8});
  const YMFields f = bent_su2(2, 0.6);
  const YMFields g = shift_chi(f, chi, samples);
  // chi pairs with mixed curvature pointwise; only the integral vanishes
  CHECK(std::abs(ym_density(g, samples[0]) - ym_density(f, samples[0])) >= 1e-4);
  CHECK(std::abs(action_ym(g, d) - action_ym(f, d)) <= 1e-7);

  const CoeffField tilted = [n](JetArgs z) {
    std::vector<Jet> c(static_cast<std::size_t>(3 * 21), z[0] * 0.0);
    c[static_cast<std::size_t>(pair_index(n, 1, 4))] = 0.7 + z[1] * z[2];
    return c;
  };
  CHECK_THROWS_AS(shift_chi(f, tilted, samples), PreconditionError);
  const CoeffField horizontal = [n](JetArgs z) {
    std::vector<Jet> c(static_cast<std::size_t>(3 * 21), z[0] * 0.0);
    c[static_cast<std::size_t>(pair_index(n, 0, 1))] += 1.0;
    return c;
  };
  CHECK_THROWS_AS(shift_chi(f, horizontal, samples), InputError);
}

TEST_CASE("gauge: position-dependent dressing is not a symmetry") {
  // rotation about the third axis by an x-dependent angle
  const CoeffField S = [](JetArgs z) {
    const Jet a = 0.8 * z[0] + 0.3 * z[2];
    std::vector<Jet> s(9, z[0] * 0.0);
    s[0] = cos(a);
    s[1] = -sin(a);
    s[3] = sin(a);
    s[4] = cos(a);
    s[8] += 1.0;
    return s;
  };
  const CoeffField constant = [](JetArgs z) {
    std::vector<Jet> s(9, z[0] * 0.0);
    s[0] += std::cos(0.5);
    s[1] -= std::sin(0.5);
    s[3] += std::sin(0.5);
    s[4] += std::cos(0.5);
    s[8] += 1.0;
    return s;
  };
  // the vacuum density vanishes identically, so use off-shell fields
  const EYMFields v = build_eym_vacuum_solution();
  const EYMFields f = perturb(v, random_eym_variation(3, v, std::vector<double>(7, -3.0), std::vector<double>(7, 3.0), 0.3), 1.0);
  const std::vector<double> z{0.2, -0.3, 0.1, 0.4, 0.3, -0.2, 0.1};
  CHECK(std::abs(eym_density(f, z)) >= 1e-2);
  CHECK(std::abs(eym_density(dress_local(f, constant), z) - eym_density(f, z)) <= 1e-12);
  CHECK(std::abs(eym_density(dress_local(f, S), z) - eym_density(f, z)) >= 1e-3);
}
