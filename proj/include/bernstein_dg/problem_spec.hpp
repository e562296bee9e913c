#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bernstein_dg/bernstein.hpp"

namespace bdg {

/// Scalar flux f with its derivative f' (the characteristic speed).
struct FluxSpec {
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
  /// Points where f'' vanishes, i.e. interior extrema of f'.
  std::vector<double> speed_extrema;
  /// max |f'| over the range of the initial data.
  double global_wave_speed = 0.0;

  /// max |f'(u)| for u between a and b.
  double max_speed(double a, double b) const {
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    double s = std::max(std::abs(f_prime(a)), std::abs(f_prime(b)));
    for (double c : speed_extrema) {
      if (c > lo && c < hi) s = std::max(s, std::abs(f_prime(c)));
    }
    return s;
  }
};

enum class ProblemId { LinearAdvection, Burgers, ConcaveFlux, BuckleyLeverett };

enum class ReferenceKind { ClosedForm, Characteristics, FVOracle };

struct ProblemSpec {
  ProblemId id;
  std::string name;
  FluxSpec flux;
  Interval domain;
  std::function<double(double)> initial;
  /// Derivative of the initial condition where it is smooth (Burgers only).
  std::function<double(double)> initial_prime;
  std::optional<double> break_time;
  ReferenceKind reference;
  double initial_min = 0.0;
  double initial_max = 1.0;
};

}  // namespace bdg
