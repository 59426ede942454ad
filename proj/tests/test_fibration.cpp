#include "kkcheck/errors.hpp"
#include "kkcheck/fibration.hpp"
#include "kkcheck/geometry.hpp"
#include "kkcheck/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace kkcheck;

namespace {

constexpr double pi = std::numbers::pi;

using Coeffs = std::function<std::vector<Jet>(JetArgs)>;

CoFrameField frame(int n, Coeffs c) { return CoFrameField{n, 4, std::move(c)}; }

// theta^a = dx^a, theta^4 = sum_mu w_mu dz^mu from the given coefficient function.
CoFrameField u1_frame(std::function<std::vector<Jet>(JetArgs)> last_row) {
  return frame(5, [last_row](JetArgs z) {
    std::vector<Jet> t(25, z[0] * 0.0);
    for (int a = 0; a < 4; ++a) t[a * 5 + a] += 1.0;
    const auto row = last_row(z);
    for (int mu = 0; mu < 5; ++mu) t[20 + mu] = row[static_cast<std::size_t>(mu)];
    return t;
  });
}

// A = 0.7 x0 dx1 + 0.2 x2 dx3, plus d(y + 0.3 sin(y) x0).
CoFrameField solution_frame() {
  return u1_frame([](JetArgs z) {
    const Jet zero = z[0] * 0.0;
    std::vector<Jet> r(5, zero);
    r[0] = 0.3 * sin(z[4]);
    r[1] = 0.7 * z[0];
    r[3] = 0.2 * z[2];
    r[4] = 1.0 + 0.3 * z[0] * cos(z[4]);
    return r;
  });
}

Chart u1_chart() {
  Chart c = Chart::box({-1, -1, -1, -1, 0}, {1, 1, 1, 1, 2 * pi});
  c.set_periodic(4, 2 * pi);
  return c;
}

std::vector<std::vector<double>> base_points(int count, std::uint64_t seed, double half = 0.8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-half, half);
  std::vector<std::vector<double>> xs;
  for (int k = 0; k < count; ++k) xs.push_back({u(rng), u(rng), u(rng), u(rng)});
  return xs;
}

const double kOne[1] = {1.0};

}  // namespace

TEST_CASE("dopri5: accuracy, dense output and step underflow") {
  OdeRhs f = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  OdeOptions opt;
  opt.rtol = opt.atol = 1e-12;
  const OdeSolution s = dopri5(f, 0.0, {0.0, 1.0}, 10.0, opt);
  CHECK(s.y_end[0] == doctest::Approx(std::sin(10.0)).epsilon(1e-9));
  for (double t : {0.37, 2.5, 7.77}) {
    const auto y = s.at(t);
    CHECK(std::abs(y[0] - std::sin(t)) < 1e-9);
    CHECK(std::abs(y[1] - std::cos(t)) < 1e-9);
  }
  OdeRhs blow = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0]; };
  CHECK_THROWS_AS(dopri5(blow, 0.0, {1.0}, 2.0, opt), StiffnessError);
}

TEST_CASE("gauss-legendre and trapezoid rules") {
  const Rule1D g = gauss_legendre(5, 0.0, 2.0);
  double s = 0.0;
  for (std::size_t k = 0; k < g.nodes.size(); ++k) s += g.weights[k] * std::pow(g.nodes[k], 9);
  CHECK(s == doctest::Approx(std::pow(2.0, 10) / 10).epsilon(1e-14));
  const Rule1D t = periodic_trapezoid(16, 2 * pi);
  double c = 0.0;
  for (std::size_t k = 0; k < t.nodes.size(); ++k) c += t.weights[k] * std::pow(std::cos(t.nodes[k]), 6);
  CHECK(c == doctest::Approx(2 * pi * 10.0 / 32.0).epsilon(1e-14));
}

TEST_CASE("leaf integration: trivial frame is a straight line in s") {
  const CoFrameField th = u1_frame([](JetArgs z) {
    std::vector<Jet> r(5, z[0] * 0.0);
    r[4] += 1.0;
    return r;
  });
  const double start[5] = {0, 0, 0, 0, 0};
  const LeafTrajectory tr = integrate_leaf(th, u1_chart(), start, kOne, 5.0);
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    for (int a = 0; a < 4; ++a) CHECK(tr.z[k][static_cast<std::size_t>(a)] == 0.0);
    CHECK(std::abs(std::remainder(tr.z[k][4] - tr.t[k], 2 * pi)) < 1e-12);
  }
}

TEST_CASE("closure detection on circle fibres") {
  const Chart chart = u1_chart();
  const double start[5] = {0.1, 0.2, -0.3, 0.0, 0.5};
  SUBCASE("unit speed: period 2 pi") {
    const CoFrameField th = u1_frame([](JetArgs z) {
      std::vector<Jet> r(5, z[0] * 0.0);
      r[4] += 1.0;
      return r;
    });
    const ClosureResult c = detect_closure(th, chart, start, kOne);
    REQUIRE(c.closed);
    CHECK(std::abs(c.period - 2 * pi) <= 1e-8);
  }
  SUBCASE("theta_4 = 2: period equals the flux 4 pi") {
    const CoFrameField th = u1_frame([](JetArgs z) {
      std::vector<Jet> r(5, z[0] * 0.0);
      r[4] += 2.0;
      return r;
    });
    const ClosureResult c = detect_closure(th, chart, start, kOne);
    REQUIRE(c.closed);
    CHECK(std::abs(c.period - 4 * pi) <= 1e-8);
    CHECK(std::abs(c.period - fiber_flux(th, chart, std::span<const double>(start, 4))) <= 1e-8);
  }
  SUBCASE("irrational winding on a 2-torus does not return") {
    Chart t2 = Chart::box({-1, -1, -1, -1, 0, 0}, {1, 1, 1, 1, 2 * pi, 2 * pi});
    t2.set_periodic(4, 2 * pi).set_periodic(5, 2 * pi);
    const CoFrameField th = frame(6, [](JetArgs z) {
      std::vector<Jet> t(36, z[0] * 0.0);
      for (int I = 0; I < 6; ++I) t[I * 7] += 1.0;
      return t;
    });
    const double s6[6] = {0, 0, 0, 0, 0.3, 0.1};
    const double irr[2] = {1.0, std::sqrt(2.0)};
    const ClosureResult c = detect_closure(th, t2, s6, irr, 1e3, 1e-3, 1e-10);
    CHECK_FALSE(c.closed);
    CHECK(c.crossings > 10);
    const double rat[2] = {1.0, 2.0};
    const ClosureResult r = detect_closure(th, t2, s6, rat, 1e3, 1e-7, 1e-10);
    REQUIRE(r.closed);
    CHECK(std::abs(r.period - 2 * pi) <= 1e-8);
  }
}

TEST_CASE("su(2) Maurer-Cartan leaves are one-parameter subgroups") {
  const LieAlgebra g = su2();
  const GroupChart chart(GroupChart::Kind::su2);
  const CoFrameField raw = kk_coframe(reduced_flat(3), g, chart).raw;
  const Chart box = Chart::box(std::vector<double>(7, -20.0), std::vector<double>(7, 20.0));
  SUBCASE("xi = t3 from the identity, |t| <= 10") {
    const double start[7] = {0, 0, 0, 0, 0, 0, 0};
    const double xi[3] = {0, 0, 1};
    for (double horizon : {10.0, -10.0}) {
      const LeafTrajectory tr = integrate_leaf(raw, box, start, xi, horizon, 1e-12);
      double worst = 0.0;
      for (std::size_t k = 0; k < tr.t.size(); ++k) {
        const Quatd q = chart.element(std::span<const double>(tr.z[k].data() + 4, 3));
        const Quatd e = su2_exp({0, 0, tr.t[k]});
        worst = std::max(worst, std::abs(q.w - e.w) + std::abs(q.x - e.x) + std::abs(q.y - e.y) + std::abs(q.z - e.z));
      }
      CHECK(worst <= 1e-8);
    }
  }
  SUBCASE("random direction from a random start: v(t) = g0 exp(t xi)") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int k = 0; k < 5; ++k) {
      const double start[7] = {0, 0, 0, 0, u(rng), u(rng), u(rng)};
      const std::array<double, 3> xi{u(rng), u(rng), u(rng)};
      const LeafTrajectory tr = integrate_leaf(raw, box, start, xi, 1.0, 1e-12);
      const Quatd g0 = chart.element(std::span<const double>(start + 4, 3));
      double worst = 0.0;
      for (std::size_t j = 0; j < tr.t.size(); ++j) {
        const Quatd q = chart.element(std::span<const double>(tr.z[j].data() + 4, 3));
        const Quatd e = g0 * su2_exp({xi[0] * tr.t[j], xi[1] * tr.t[j], xi[2] * tr.t[j]});
        worst = std::max(worst, std::abs(q.w - e.w) + std::abs(q.x - e.x) + std::abs(q.y - e.y) + std::abs(q.z - e.z));
      }
      CHECK(worst <= 1e-8);
    }
  }
}

TEST_CASE("fibre flux") {
  const Chart chart = u1_chart();
  const double x1[4] = {0.1, 0.2, 0.3, 0.4}, x2[4] = {-0.5, 0.6, -0.2, 0.0};
  SUBCASE("A + ds gives 2 pi") {
    const CoFrameField th = u1_frame([](JetArgs z) {
      std::vector<Jet> r(5, z[0] * 0.0);
      r[1] = 0.7 * z[0];
      r[4] += 1.0;
      return r;
    });
    CHECK(fiber_flux(th, chart, x1) == doctest::Approx(2 * pi).epsilon(1e-14));
  }
  SUBCASE("theta_4 = 2 gives 4 pi") {
    const CoFrameField th = u1_frame([](JetArgs z) {
      std::vector<Jet> r(5, z[0] * 0.0);
      r[4] += 2.0;
      return r;
    });
    CHECK(fiber_flux(th, chart, x1) == doctest::Approx(4 * pi).epsilon(1e-14));
  }
  SUBCASE("solution frame: flux independent of x") {
    const CoFrameField th = solution_frame();
    CHECK(std::abs(fiber_flux(th, chart, x1) - fiber_flux(th, chart, x2)) <= 1e-9);
    CHECK(flux_constancy_scan(th, chart, base_points(20, 3)) <= 1e-9);
    CHECK(flux_constancy_scan(th, chart, {std::vector<double>(x1, x1 + 4)}) == 0.0);
  }
  SUBCASE("broken frame: Theta_a != 0 moves the flux") {
    const CoFrameField th = u1_frame([](JetArgs z) {
      std::vector<Jet> r(5, z[0] * 0.0);
      r[0] = sin(z[4]);
      r[4] = 1.0 + 0.1 * z[0];
      return r;
    });
    const double a[4] = {0, 0, 0, 0}, b[4] = {1, 0, 0, 0};
    const double direct = 2 * pi * 0.1;  // int (d theta) over the cylinder between the fibres
    CHECK(std::abs(fiber_flux(th, chart, b) - fiber_flux(th, chart, a)) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(flux_constancy_scan(th, chart, {{0, 0, 0, 0}, {1, 0, 0, 0}}) >= 1e-2);
  }
  SUBCASE("invariant under fibred reparametrization") {
    const CoFrameField th = solution_frame();
    const ChartMap T = [](JetArgs z) {
      std::vector<Jet> w(z.begin(), z.end());
      w[4] = z[4] + 0.2 * (1.0 + 0.3 * z[0]) * sin(z[4]);
      return w;
    };
    const CoFrameField pulled = pullback_coframe(th, T);
    for (const auto& x : base_points(5, 8))
      CHECK(std::abs(fiber_flux(pulled, chart, x) - fiber_flux(th, chart, x)) <= 1e-10);
  }
  SUBCASE("fibre must be the coordinate circle") {
    const CoFrameField tilted = pullback_coframe(solution_frame(), [](JetArgs z) {
      std::vector<Jet> w(z.begin(), z.end());
      w[0] = z[0] + 0.2 * sin(z[4]);
      return w;
    });
    CHECK_THROWS_AS(fiber_flux(tilted, chart, x1), PreconditionError);
  }
}

TEST_CASE("period propagation across base points") {
  // A non-fibred change of coordinates tilts the leaves, so closure has to be found by
  // following the flow rather than the coordinate circle.
  const Chart chart = u1_chart();
  const CoFrameField th = pullback_coframe(solution_frame(), [](JetArgs z) {
    std::vector<Jet> w(z.begin(), z.end());
    w[0] = z[0] + 0.2 * sin(z[4]);
    return w;
  });
  const double z0[5] = {0.1, -0.2, 0.3, 0.1, 0.0};
  const ClosureResult first = detect_closure(th, chart, z0, kOne);
  REQUIRE(first.closed);
  CHECK(first.period == doctest::Approx(2 * pi).epsilon(1e-9));
  double worst = 0.0;
  for (const auto& x : base_points(20, 99, 0.6)) {
    const double z[5] = {x[0], x[1], x[2], x[3], 1.0};
    const ClosureResult c = detect_closure(th, chart, z, kOne);
    REQUIRE(c.closed);
    worst = std::max(worst, std::abs(c.period - first.period));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("Frobenius residual") {
  SUBCASE("Maurer-Cartan vertical block") {
    const CoFrameField raw = kk_coframe(reduced_flat(3), su2(), GroupChart(GroupChart::Kind::su2)).raw;
    const double z[7] = {0.1, 0.2, 0.3, 0.4, 0.5, -0.4, 0.3};
    CHECK(frobenius_residual(raw, su2(), z) <= 1e-9);
  }
  SUBCASE("u(1) KK frame with random A") {
    const CoFrameField th = kk_coframe(reduced_random(3, 1), u1(), GroupChart(GroupChart::Kind::u1)).dressed;
    const double z[5] = {0.1, 0.2, 0.3, 0.4, 0.5};
    CHECK(frobenius_residual(th, u1(), z) <= 1e-10);
  }
  SUBCASE("broken 2-dim vertical block") {
    const CoFrameField th = frame(6, [](JetArgs z) {
      std::vector<Jet> t(36, z[0] * 0.0);
      for (int I = 0; I < 6; ++I) t[I * 7] += 1.0;
      t[4 * 6 + 4] = 1.0 + 0.5 * sin(z[5]);
      return t;
    });
    const double z[6] = {0, 0, 0, 0, 0.2, 0.4};
    CHECK(frobenius_residual(th, direct_sum({u1(), u1()}), z) > 0.1);
  }
}

TEST_CASE("commuting horizontal and vertical flows") {
  const double xi[4] = {0.3, -0.5, 0.7, 0.2};
  const double z[5] = {0.1, 0.2, -0.3, 0.4, 1.3};
  SUBCASE("product frame") {
    const CoFrameField th = u1_frame([](JetArgs zz) {
      std::vector<Jet> r(5, zz[0] * 0.0);
      r[4] += 1.0;
      return r;
    });
    CHECK(commuting_flows_residual(th, xi, z) <= 1e-14);
  }
  SUBCASE("u(1) KK frame with A(x)") {
    const CoFrameField th = kk_coframe(reduced_random(5, 1, 0.2, 0.8), u1(), GroupChart(GroupChart::Kind::u1)).dressed;
    CHECK(commuting_flows_residual(th, xi, z) <= 1e-8);
  }
  SUBCASE("solution frame with y-dependent coefficients") {
    CHECK(commuting_flows_residual(solution_frame(), xi, z) <= 1e-8);
  }
  SUBCASE("theta_4 coupling x and y") {
    const CoFrameField th = u1_frame([](JetArgs zz) {
      std::vector<Jet> r(5, zz[0] * 0.0);
      r[1] = 0.5 + 0.0 * zz[0];
      r[4] = 1.0 + 0.3 * zz[0] * sin(zz[4]);
      return r;
    });
    CHECK(commuting_flows_residual(th, xi, z) > 1e-2);
  }
}

TEST_CASE("holonomy map") {
  const GroupChart chart(GroupChart::Kind::su2);
  const Chart box = Chart::box(std::vector<double>(7, -20.0), std::vector<double>(7, 20.0));
  const CoFrameField raw = kk_coframe(reduced_random(12, 3, 0.1, 0.5), su2(), chart).raw;
  SUBCASE("constant path") {
    const double z[7] = {0.1, 0.2, 0.3, 0.4, 0.2, -0.1, 0.3};
    const auto end = holonomy_map(raw, box, z, constant_path({0, 0, 0}));
    for (int k = 0; k < 7; ++k) CHECK(end[static_cast<std::size_t>(k)] == doctest::Approx(z[k]).epsilon(1e-15));
  }
  SUBCASE("path independence on SU(2)") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const double z[7] = {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
      const std::vector<double> xi{u(rng), u(rng), u(rng)}, xi1{u(rng), u(rng), u(rng)};
      const Quatd g = su2_exp({xi[0], xi[1], xi[2]});
      const Quatd g1 = su2_exp({xi1[0], xi1[1], xi1[2]});
      const auto l2 = su2_log(g1.conj() * g);
      const auto a = holonomy_map(raw, box, z, constant_path(xi));
      const auto b = holonomy_map(raw, box, z, segment_path({xi1, {l2[0], l2[1], l2[2]}}));
      worst = std::max(worst, box.distance(a, b));
      // both equal the right translate g0 g on the fibre
      const Quatd expect = chart.element(std::span<const double>(z + 4, 3)) * g;
      const Quatd got = chart.element(std::span<const double>(a.data() + 4, 3));
      CHECK(std::abs(got.w - expect.w) + std::abs(got.x - expect.x) + std::abs(got.y - expect.y) +
                std::abs(got.z - expect.z) <= 1e-9);
    }
    CHECK(worst <= 1e-6);
  }
  SUBCASE("u(1): an extra full winding lands on the same point") {
    const CoFrameField th = kk_coframe(reduced_random(4, 1), u1(), GroupChart(GroupChart::Kind::u1)).dressed;
    const Chart chart5 = u1_chart();
    const double z[5] = {0.1, 0.2, 0.3, 0.4, 0.5};
    const double q = detect_closure(th, chart5, z, kOne).period;
    const auto a = holonomy_map(th, chart5, z, constant_path({0.8}));
    const auto b = holonomy_map(th, chart5, z, constant_path({0.8 + q}));
    CHECK(chart5.distance(a, b) <= 1e-9);
  }
}

TEST_CASE("fibre coordinate") {
  const Chart chart = u1_chart();
  SUBCASE("theta_4 = 1") {
    const CoFrameField th = u1_frame([](JetArgs z) {
      std::vector<Jet> r(5, z[0] * 0.0);
      r[4] += 1.0;
      return r;
    });
    const double z[5] = {0.1, 0.2, 0.3, 0.4, 1.7};
    CHECK(fiber_coordinate(th, chart, z) == doctest::Approx(1.7).epsilon(1e-14));
  }
  SUBCASE("theta_4 = 2") {
    const CoFrameField th = u1_frame([](JetArgs z) {
      std::vector<Jet> r(5, z[0] * 0.0);
      r[4] += 2.0;
      return r;
    });
    const double z[5] = {0, 0, 0, 0, pi};
    CHECK(fiber_coordinate(th, chart, z) == doctest::Approx(2 * pi).epsilon(1e-14));
  }
  SUBCASE("theta_4 = 1 + sin(y)/2") {
    const CoFrameField th = u1_frame([](JetArgs z) {
      std::vector<Jet> r(5, z[0] * 0.0);
      r[4] = 1.0 + 0.5 * sin(z[4]);
      return r;
    });
    const double z[5] = {0, 0, 0, 0, 2 * pi};
    CHECK(fiber_primitive(th, z) == doctest::Approx(2 * pi).epsilon(1e-13));
    const double zy[5] = {0, 0, 0, 0, 1.0};
    CHECK(fiber_primitive(th, zy) == doctest::Approx(1.0 + 0.5 * (1.0 - std::cos(1.0))).epsilon(1e-13));
  }
  SUBCASE("normalized frame of a solution has y-independent potential") {
    const CoFrameField th = solution_frame();
    for (const auto& x : base_points(5, 4)) {
      const double z0[5] = {x[0], x[1], x[2], x[3], 0.0};
      const auto A0 = normalized_potential(th, z0);
      for (double y : {0.7, 2.9, 5.5}) {
        const double z[5] = {x[0], x[1], x[2], x[3], y};
        const auto A = normalized_potential(th, z);
        for (int a = 0; a < 4; ++a) CHECK(std::abs(A[static_cast<std::size_t>(a)] - A0[static_cast<std::size_t>(a)]) <= 1e-12);
      }
      CHECK(A0[1] == doctest::Approx(0.7 * x[0]));
    }
  }
  SUBCASE("vanishing theta_4") {
    const CoFrameField th = u1_frame([](JetArgs z) {
      std::vector<Jet> r(5, z[0] * 0.0);
      r[4] = cos(z[4]);
      return r;
    });
    const double z[5] = {0, 0, 0, 0, 3.0};
    CHECK_THROWS_AS(fiber_primitive(th, z), DegeneracyError);
  }
}
