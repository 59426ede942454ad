#pragma once

#include <functional>
#include <span>
#include <vector>

namespace kkcheck {

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

/// One accepted Dormand-Prince step with its continuous extension.
struct DenseStep {
  double t0 = 0.0, h = 0.0;
  std::vector<double> r[5];

  double t1() const { return t0 + h; }
  std::vector<double> eval(double t) const;
};

struct OdeSolution {
  std::vector<DenseStep> steps;
  std::vector<double> y_end;
  double t_end = 0.0;
  int accepted = 0, rejected = 0;
  double max_error = 0.0;  // largest accepted scaled error estimate
  bool stopped = false;    // on_step asked to stop

  std::vector<double> at(double t) const;
};

struct OdeOptions {
  double rtol = 1e-10, atol = 1e-10;
  double h0 = 0.0;  // 0: automatic
  double hmin = 1e-13;
  long max_steps = 2'000'000;
  bool keep_steps = true;
};

/// Embedded Runge-Kutta 5(4) (Dormand-Prince) with dense output. `on_step` is called
/// after each accepted step; returning false stops the integration. Throws
/// StiffnessError on step-size underflow.
OdeSolution dopri5(const OdeRhs& f, double t0, std::vector<double> y0, double t1, const OdeOptions& opt,
                   const std::function<bool(const DenseStep&)>& on_step = {});

}  // namespace kkcheck
