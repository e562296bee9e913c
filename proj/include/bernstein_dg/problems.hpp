#pragma once

// The four periodic benchmark problems and their reference solutions:
// exact translation for linear advection, Newton on the characteristic
// equation for pre-break Burgers, and a fine first-order monotone
// finite-volume solution for everything with shocks or compound waves.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bernstein_dg/dg_solver.hpp"
#include "bernstein_dg/errors.hpp"
#include "bernstein_dg/problem_spec.hpp"
#include "bernstein_dg/quadrature.hpp"

namespace bdg {

inline std::string_view problem_name(ProblemId id) {
  switch (id) {
    case ProblemId::LinearAdvection: return "linear";
    case ProblemId::Burgers: return "burgers";
    case ProblemId::ConcaveFlux: return "concave";
    case ProblemId::BuckleyLeverett: return "buckley-leverett";
  }
  return "unknown";
}

inline ProblemId parse_problem_id(std::string_view name) {
  for (ProblemId id : {ProblemId::LinearAdvection, ProblemId::Burgers, ProblemId::ConcaveFlux,
                       ProblemId::BuckleyLeverett}) {
    if (problem_name(id) == name) return id;
  }
  throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

/// Reduces x into [a, b) by periodicity.
inline double wrap_periodic(double x, const Interval& domain) {
  const double length = domain.length();
  const double shifted = x - domain.a();
  double y = domain.a() + (shifted - length * std::floor(shifted / length));
  if (y >= domain.b()) y = domain.a();
  return y;
}

namespace detail {

inline std::function<double(double)> box(double lo, double hi) {
  return [lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; };
}

}  // namespace detail

inline ProblemSpec make_problem(ProblemId id) {
  ProblemSpec p{id, std::string(problem_name(id)), {}, Interval::unit(), {}, {}, std::nullopt,
                ReferenceKind::FVOracle, 0.0, 1.0};
  switch (id) {
    case ProblemId::LinearAdvection:
      p.flux.f = [](double u) { return u; };
      p.flux.f_prime = [](double) { return 1.0; };
      p.domain = Interval(0.0, 1.0);
      p.initial = detail::box(0.4, 0.8);
      p.reference = ReferenceKind::ClosedForm;
      break;
    case ProblemId::Burgers: {
      constexpr double amp = 1.0 / (4.0 * std::numbers::pi);
      p.flux.f = [](double u) { return 0.5 * u * u; };
      p.flux.f_prime = [](double u) { return u; };
      p.domain = Interval(0.0, 1.0);
      p.initial = [](double x) { return 1.0 + amp * std::sin(2.0 * std::numbers::pi * x); };
      p.initial_prime = [](double x) { return 0.5 * std::cos(2.0 * std::numbers::pi * x); };
      // -1 / min u0' with min u0' = -1/2.
      p.break_time = 2.0;
      p.reference = ReferenceKind::Characteristics;
      p.initial_min = 1.0 - amp;
      p.initial_max = 1.0 + amp;
      break;
    }
    case ProblemId::ConcaveFlux:
      p.flux.f = [](double u) { return u * (1.0 - u); };
      p.flux.f_prime = [](double u) { return 1.0 - 2.0 * u; };
      p.domain = Interval(0.0, 2.0);
      p.initial = detail::box(0.5, 1.5);
      break;
    case ProblemId::BuckleyLeverett: {
      p.flux.f = [](double u) {
        const double v = 1.0 - u;
        return u * u / (u * u + v * v);
      };
      p.flux.f_prime = [](double u) {
        const double v = 1.0 - u;
        const double d = u * u + v * v;
        return 2.0 * u * v / (d * d);
      };
      // f' is even about 1/2 with extrema at 1/2 and 1/2 +- sqrt(3)/2.
      const double offset = 0.5 * std::sqrt(3.0);
      p.flux.speed_extrema = {0.5 - offset, 0.5, 0.5 + offset};
      p.domain = Interval(0.0, 2.0);
      p.initial = detail::box(0.5, 1.5);
      break;
    }
  }
  p.flux.global_wave_speed = p.flux.max_speed(p.initial_min, p.initial_max);
  return p;
}

/// u0(x - t) with periodic wrap.
inline double exact_advection(const std::function<double(double)>& u0, double x, double t, const Interval& domain) {
  return u0(wrap_periodic(x - t, domain));
}

/// Solves u = u0(x - t u) by Newton from u0(x); valid before the wave breaks.
inline double burgers_characteristic(const std::function<double(double)>& u0,
                                     const std::function<double(double)>& u0_prime, double x, double t) {
  double u = u0(x);
  for (int iter = 0; iter < 50; ++iter) {
    const double residual = u - u0(x - t * u);
    if (std::abs(residual) <= 1e-13) return u;
    const double slope = 1.0 + t * u0_prime(x - t * u);
    if (slope == 0.0) break;
    u -= residual / slope;
  }
  if (std::abs(u - u0(x - t * u)) <= 1e-13) return u;
  throw OracleError("burgers_characteristic: Newton did not converge at x=" + std::to_string(x) +
                    ", t=" + std::to_string(t) + "; use the finite-volume oracle");
}

struct FVOracleConfig {
  int cells = 20000;
  double cfl = 0.4;
};

/// Cell averages of a finite-volume solution on a uniform periodic grid.
struct FVProfile {
  Interval domain;
  std::vector<double> values;
  double time = 0.0;
  /// Discrete TV never increased over a step.
  bool tvd_held = true;
  /// Cell averages stayed within [min u0, max u0].
  bool bounds_held = true;

  double cell_width() const { return domain.length() / static_cast<double>(values.size()); }
  double center(std::size_t i) const { return domain.a() + (static_cast<double>(i) + 0.5) * cell_width(); }

  /// Piecewise-constant evaluation.
  double operator()(double x) const {
    const double y = wrap_periodic(x, domain);
    auto i = static_cast<std::size_t>((y - domain.a()) / cell_width());
    return values[std::min(i, values.size() - 1)];
  }
};

inline double periodic_total_variation(std::span<const double> v) {
  double tv = std::abs(v.front() - v.back());
  for (std::size_t i = 0; i + 1 < v.size(); ++i) tv += std::abs(v[i + 1] - v[i]);
  return tv;
}

/// First-order Rusanov / forward-Euler solution at time t.
inline FVProfile fv_reference(const ProblemSpec& problem, double t, const FVOracleConfig& cfg = {}) {
  if (cfg.cells < 100) throw std::invalid_argument("fv_reference: need at least 100 cells");
  if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0)) throw std::invalid_argument("fv_reference: cfl must lie in (0,1]");
  if (!(t >= 0.0)) throw std::invalid_argument("fv_reference: t must be >= 0");

  const auto n = static_cast<std::size_t>(cfg.cells);
  FVProfile prof{problem.domain, std::vector<double>(n), 0.0};
  const double dx = prof.cell_width();
  const auto gauss = gauss_legendre(4);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t q = 0; q < gauss.nodes.size(); ++q)
      sum += gauss.weights[q] * problem.initial(prof.center(i) + 0.5 * dx * gauss.nodes[q]);
    prof.values[i] = 0.5 * sum;
  }
  const double lo = *std::min_element(prof.values.begin(), prof.values.end());
  const double hi = *std::max_element(prof.values.begin(), prof.values.end());
  const double bound_tol = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));

  const FluxSpec& flux = problem.flux;
  const double dt_max = cfg.cfl * dx / flux.global_wave_speed;
  std::vector<double> f(n), speed(n), face(n);
  double tv = periodic_total_variation(prof.values);
  while (prof.time < t) {
    const double dt = std::min(dt_max, t - prof.time);
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = flux.f(prof.values[i]);
      speed[i] = std::abs(flux.f_prime(prof.values[i]));
    }
    // face[i] sits between cell i and cell i+1.
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + 1 == n ? 0 : i + 1;
      const double ul = prof.values[i];
      const double ur = prof.values[j];
      double lambda = std::max(speed[i], speed[j]);
      for (double c : flux.speed_extrema) {
        if (c > std::min(ul, ur) && c < std::max(ul, ur)) lambda = std::max(lambda, std::abs(flux.f_prime(c)));
      }
      face[i] = 0.5 * (f[i] + f[j]) - 0.5 * lambda * (ur - ul);
    }
    const double ratio = dt / dx;
    double prev_face = face[n - 1];
    for (std::size_t i = 0; i < n; ++i) {
      prof.values[i] -= ratio * (face[i] - prev_face);
      prev_face = face[i];
    }
    prof.time = prof.time + dt >= t ? t : prof.time + dt;

    const double tv_new = periodic_total_variation(prof.values);
    if (tv_new > tv + 1e-12 * std::max(1.0, tv)) prof.tvd_held = false;
    tv = tv_new;
    const auto [mn, mx] = std::minmax_element(prof.values.begin(), prof.values.end());
    if (*mn < lo - bound_tol || *mx > hi + bound_tol) prof.bounds_held = false;
  }
  return prof;
}

enum class Norm { L1, L2, Linf };

/// L^p distance between the DG solution and a reference function, integrated
/// with 4(N+1) Gauss points per element.
inline double error_norms(const SolutionState& state, const ElementBasis& basis, const Mesh& mesh,
                          const std::function<double(double)>& reference, Norm norm) {
  const auto gauss = gauss_legendre(4 * basis.num_nodes);
  const Eigen::MatrixXd interp = interpolation_matrix(basis.nodes, gauss.nodes);
  const double half = 0.5 * mesh.element_width();
  double acc = 0.0;
  for (int i = 0; i < state.num_elements(); ++i) {
    const auto e = state.element(i);
    const Eigen::Map<const Eigen::VectorXd> u(e.data(), static_cast<Eigen::Index>(e.size()));
    const Eigen::VectorXd at_gauss = interp * u;
    for (std::size_t q = 0; q < gauss.nodes.size(); ++q) {
      const double err = std::abs(at_gauss[static_cast<Eigen::Index>(q)] - reference(mesh.map(i, gauss.nodes[q])));
      switch (norm) {
        case Norm::L1: acc += half * gauss.weights[q] * err; break;
        case Norm::L2: acc += half * gauss.weights[q] * err * err; break;
        case Norm::Linf: acc = std::max(acc, err); break;
      }
    }
  }
  return norm == Norm::L2 ? std::sqrt(acc) : acc;
}

/// Reference solution of `problem` at time t as a function of x.
inline std::function<double(double)> reference_solution(const ProblemSpec& problem, double t, ReferenceKind kind,
                                                         const FVOracleConfig& fv = {}) {
  switch (kind) {
    case ReferenceKind::ClosedForm:
      if (problem.id != ProblemId::LinearAdvection)
        throw std::invalid_argument("closed-form reference is only available for linear advection");
      return [u0 = problem.initial, t, domain = problem.domain](double x) {
        return exact_advection(u0, x, t, domain);
      };
    case ReferenceKind::Characteristics:
      if (!problem.initial_prime || (problem.break_time && t >= *problem.break_time))
        throw std::invalid_argument("characteristic reference requires a smooth pre-break solution");
      return [u0 = problem.initial, du0 = problem.initial_prime, t](double x) {
        return burgers_characteristic(u0, du0, x, t);
      };
    case ReferenceKind::FVOracle: {
      auto profile = std::make_shared<FVProfile>(fv_reference(problem, t, fv));
      return [profile](double x) { return (*profile)(x); };
    }
  }
  throw std::invalid_argument("unknown reference kind");
}

}  // namespace bdg
