#include "doctest.h"

#include "kkcheck/jet.hpp"

#include <cmath>
#include <functional>
#include <vector>

using namespace kkcheck;

namespace {

// Central finite difference of a scalar function of n variables.
double fd(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x, int i, double h = 1e-5) {
  x[i] += h;
  const double a = f(x);
  x[i] -= 2 * h;
  const double b = f(x);
  return (a - b) / (2 * h);
}

}  // namespace

TEST_CASE("jet sizes follow binomial counts") {
  CHECK(jet_size(5, 0) == 1);
  CHECK(jet_size(5, 1) == 6);
  CHECK(jet_size(5, 2) == 21);
  CHECK(jet_size(5, 3) == 56);
  CHECK(jet_size(8, 3) == 165);
}

TEST_CASE("products and elementary functions match hand derivatives") {
  const std::vector<double> p{0.3, -0.7, 1.1};
  auto z = seed_point(p, 3);
  const Jet f = sin(z[0]) * z[1] * z[1] + exp(z[2]) / (2.0 + cos(z[0]));
  auto scalar = [](const std::vector<double>& x) {
    return std::sin(x[0]) * x[1] * x[1] + std::exp(x[2]) / (2.0 + std::cos(x[0]));
  };
  CHECK(f.value() == doctest::Approx(scalar(p)).epsilon(1e-14));
  for (int i = 0; i < 3; ++i) CHECK(f.partial(i) == doctest::Approx(fd(scalar, p, i)).epsilon(1e-8));

  // second and third derivatives of x0^2 x1^3 x2
  const Jet g = z[0] * z[0] * z[1] * z[1] * z[1] * z[2];
  CHECK(g.partial2(0, 1) == doctest::Approx(2 * p[0] * 3 * p[1] * p[1] * p[2]));
  CHECK(g.partial2(1, 1) == doctest::Approx(p[0] * p[0] * 6 * p[1] * p[2]));
  CHECK(g.partial3(0, 0, 1) == doctest::Approx(2 * 3 * p[1] * p[1] * p[2]));
  CHECK(g.partial3(1, 1, 1) == doctest::Approx(6 * p[0] * p[0] * p[2]));
  CHECK(g.partial3(0, 1, 2) == doctest::Approx(2 * p[0] * 3 * p[1] * p[1]));
}

TEST_CASE("derivative jets commute and drop one order") {
  const std::vector<double> p{0.2, 0.4, -0.1, 0.9, 0.5};
  auto z = seed_point(p, 3);
  const Jet f = log(2.0 + z[0] * z[3]) * sqrt(1.5 + z[1]) + pow(z[2], 3) * inverse(1.0 + z[4] * z[4]);
  const Jet a = f.derivative(1).derivative(3);
  const Jet b = f.derivative(3).derivative(1);
  REQUIRE(a.order() == 1);
  CHECK(a.value() == doctest::Approx(b.value()).epsilon(1e-13));
  for (int i = 0; i < 5; ++i) CHECK(a.partial(i) == doctest::Approx(b.partial(i)).epsilon(1e-12));
  CHECK(a.value() == doctest::Approx(f.partial2(1, 3)).epsilon(1e-13));
}

TEST_CASE("mixed orders truncate to the lower one") {
  auto z3 = seed_point(std::vector<double>{1.0, 2.0}, 3);
  const Jet low = z3[0].truncated(1);
  const Jet r = low * z3[1] + z3[0];
  CHECK(r.order() == 1);
  CHECK(r.partial(1) == doctest::Approx(1.0));
}
