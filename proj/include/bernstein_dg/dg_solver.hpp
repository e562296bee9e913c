#pragma once

// Nodal collocation DG on a uniform periodic 1D mesh: LGL element basis,
// strong-form right-hand side with Rusanov interface fluxes, SSPRK(3,3) time
// stepping, and the Bernstein / mean-value shock-capturing post-processing.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bernstein_dg/bernstein.hpp"
#include "bernstein_dg/errors.hpp"
#include "bernstein_dg/pa_sensor.hpp"
#include "bernstein_dg/problem_spec.hpp"
#include "bernstein_dg/quadrature.hpp"

namespace bdg {

/// Nodal values, one row per element, one column per collocation node.
using NodalValues = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::vector<double> barycentric_weights(std::span<const double> nodes) {
  std::vector<double> w(nodes.size(), 1.0);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i == j) continue;
      const double d = nodes[j] - nodes[i];
      if (d == 0.0) throw std::invalid_argument("barycentric_weights: duplicate nodes");
      w[j] /= d;
    }
  }
  return w;
}

/// Row r holds the Lagrange cardinal functions of `nodes` evaluated at targets[r].
/// A target that coincides with a node yields the exact unit row.
inline Eigen::MatrixXd interpolation_matrix(std::span<const double> nodes, std::span<const double> targets) {
  const auto w = barycentric_weights(nodes);
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(targets.size()), n);
  for (std::size_t r = 0; r < targets.size(); ++r) {
    const double x = targets[r];
    const auto hit = std::find(nodes.begin(), nodes.end(), x);
    if (hit != nodes.end()) {
      m(static_cast<Eigen::Index>(r), hit - nodes.begin()) = 1.0;
      continue;
    }
    double denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) denom += w[j] / (x - nodes[j]);
    for (Eigen::Index j = 0; j < n; ++j) m(static_cast<Eigen::Index>(r), j) = w[j] / (x - nodes[j]) / denom;
  }
  return m;
}

/// D(i,j) = l_j'(x_i) for the Lagrange cardinal functions of `nodes`.
inline Eigen::MatrixXd diff_matrix(std::span<const double> nodes) {
  const auto w = barycentric_weights(nodes);
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = (w[j] / w[i]) / (nodes[i] - nodes[j]);
      diag -= d(i, j);
    }
    d(i, i) = diag;
  }
  return d;
}

/// Everything that depends only on the polynomial degree N.
struct ElementBasis {
  explicit ElementBasis(int degree_)
      : degree(degree_),
        num_nodes(degree_ + 1),
        bernstein_to_nodal(build_transform(degree_, TargetBasis::LagrangeGaussLobatto)) {
    const auto lgl = lgl_nodes_weights(degree);
    nodes = lgl.nodes;
    weights = lgl.weights;
    diff = diff_matrix(nodes);
    bernstein_sample_points.resize(num_nodes);
    for (int n = 0; n < num_nodes; ++n) bernstein_sample_points[n] = -1.0 + 2.0 * n / degree;
    bernstein_sample_points.back() = 1.0;
    lagrange_to_bernstein_samples = interpolation_matrix(nodes, bernstein_sample_points);
    const auto gauss = gauss_legendre(degree + 2);
    gauss_weights = gauss.weights;
    to_gauss = interpolation_matrix(nodes, gauss.nodes);
    bary = barycentric_weights(nodes);
  }

  /// Interpolant of one element's nodal values at reference coordinate xi.
  double evaluate(std::span<const double> values, double xi) const {
    double num = 0.0;
    double den = 0.0;
    for (int j = 0; j < num_nodes; ++j) {
      const double d = xi - nodes[j];
      if (d == 0.0) return values[j];
      num += bary[j] / d * values[j];
      den += bary[j] / d;
    }
    return num / den;
  }

  int degree;
  int num_nodes;
  std::vector<double> nodes;
  std::vector<double> weights;
  Eigen::MatrixXd diff;
  std::vector<double> bernstein_sample_points;
  Eigen::MatrixXd lagrange_to_bernstein_samples;
  TransformMatrix bernstein_to_nodal;
  // N+2 point Gauss rule, exact for squares of degree-N polynomials.
  Eigen::MatrixXd to_gauss;
  std::vector<double> gauss_weights;
  std::vector<double> bary;
};

/// Uniform partition of the domain into I elements.
class Mesh {
 public:
  Mesh(Interval domain, int num_elements) : domain_(domain), num_elements_(num_elements) {
    if (num_elements < 1) throw std::invalid_argument("Mesh: need at least one element");
    edges_.resize(num_elements + 1);
    for (int i = 0; i <= num_elements; ++i)
      edges_[i] = domain.a() + domain.length() * static_cast<double>(i) / num_elements;
    edges_.back() = domain.b();
  }

  const Interval& domain() const noexcept { return domain_; }
  int num_elements() const noexcept { return num_elements_; }
  std::span<const double> edges() const noexcept { return edges_; }
  double element_width() const noexcept { return domain_.length() / num_elements_; }

  /// Physical coordinate of reference point xi in element i.
  double map(int element, double xi) const {
    return edges_[element] + 0.5 * (xi + 1.0) * (edges_[element + 1] - edges_[element]);
  }

 private:
  Interval domain_;
  int num_elements_;
  std::vector<double> edges_;
};

struct SolutionState {
  NodalValues values;
  double time = 0.0;

  std::span<const double> element(int i) const {
    return {values.data() + static_cast<std::ptrdiff_t>(i) * values.cols(), static_cast<std::size_t>(values.cols())};
  }
  std::span<double> element(int i) {
    return {values.data() + static_cast<std::ptrdiff_t>(i) * values.cols(), static_cast<std::size_t>(values.cols())};
  }
  int num_elements() const noexcept { return static_cast<int>(values.rows()); }
};

enum class CaptureMode { None, Bernstein, MeanFilter };
enum class CaptureTiming { PerStage, PerStep };

struct CaptureConfig {
  CaptureMode mode = CaptureMode::None;
  SensorConfig sensor;
  std::optional<BoundsSpec> bounds;
  CaptureTiming timing = CaptureTiming::PerStage;
};

struct RunConfig {
  double cfl_constant = 0.1;
  double t_final = 0.0;
  Mesh mesh;
  int degree = 4;
};

/// Local Lax-Friedrichs flux with lambda = max |f'| between u- and u+.
inline double rusanov_flux(double u_minus, double u_plus, const FluxSpec& flux) {
  const double lambda = flux.max_speed(u_minus, u_plus);
  return 0.5 * (flux.f(u_plus) + flux.f(u_minus)) - 0.5 * lambda * (u_plus - u_minus);
}

/// Semi-discrete operator L(u) for periodic boundary conditions.
inline NodalValues dg_rhs(const SolutionState& state, const FluxSpec& flux, const ElementBasis& basis,
                          const Mesh& mesh) {
  const int elements = state.num_elements();
  const int p = basis.num_nodes;
  if (elements != mesh.num_elements() || state.values.cols() != p)
    throw std::invalid_argument("dg_rhs: state shape does not match mesh and basis");
  const double scale = 2.0 / mesh.element_width();

  NodalValues f(elements, p);
  for (int i = 0; i < elements; ++i)
    for (int k = 0; k < p; ++k) f(i, k) = flux.f(state.values(i, k));

  // right_flux[i]: numerical flux at the right edge of element i.
  std::vector<double> right_flux(elements);
  for (int i = 0; i < elements; ++i) {
    const int next = (i + 1) % elements;
    right_flux[i] = rusanov_flux(state.values(i, p - 1), state.values(next, 0), flux);
  }

  NodalValues out = -scale * (f * basis.diff.transpose());
  const double lift_left = scale / basis.weights.front();
  const double lift_right = scale / basis.weights.back();
  for (int i = 0; i < elements; ++i) {
    const int prev = (i + elements - 1) % elements;
    out(i, 0) -= lift_left * (f(i, 0) - right_flux[prev]);
    out(i, p - 1) += lift_right * (f(i, p - 1) - right_flux[i]);
  }
  return out;
}

/// dt = C |Omega| / (I (2N+1)^2 max|f'|).
inline double compute_dt(const RunConfig& run, const FluxSpec& flux) {
  if (!(flux.global_wave_speed > 0.0)) throw std::invalid_argument("compute_dt: wave speed must be positive");
  if (!(run.cfl_constant > 0.0)) throw std::invalid_argument("compute_dt: CFL constant must be positive");
  const double order = 2.0 * run.degree + 1.0;
  return run.cfl_constant * run.mesh.domain().length() /
         (run.mesh.num_elements() * order * order * flux.global_wave_speed);
}

namespace detail {

inline void check_finite(const SolutionState& state) {
  for (int i = 0; i < state.num_elements(); ++i) {
    for (double v : state.element(i)) {
      if (!std::isfinite(v)) throw BlowUpError(state.time, static_cast<std::size_t>(i));
    }
  }
}

}  // namespace detail

/// One SSPRK(3,3) step; `capture` post-processes each stage (PerStage) or the
/// final value only (PerStep).
template <class Rhs, class Capture>
SolutionState ssprk33_step(const SolutionState& state, double dt, Rhs&& rhs, Capture&& capture,
                           CaptureTiming timing = CaptureTiming::PerStage) {
  if (!(dt > 0.0)) throw std::invalid_argument("ssprk33_step: dt must be positive");
  const bool per_stage = timing == CaptureTiming::PerStage;

  SolutionState stage1{state.values + dt * rhs(state), state.time + dt};
  detail::check_finite(stage1);
  if (per_stage) capture(stage1);

  SolutionState stage2{0.75 * state.values + 0.25 * stage1.values + 0.25 * dt * rhs(stage1),
                       state.time + 0.5 * dt};
  detail::check_finite(stage2);
  if (per_stage) capture(stage2);

  SolutionState next{(1.0 / 3.0) * state.values + (2.0 / 3.0) * stage2.values +
                         (2.0 / 3.0) * dt * rhs(stage2),
                     state.time + dt};
  detail::check_finite(next);
  capture(next);
  return next;
}

template <class Rhs>
SolutionState ssprk33_step(const SolutionState& state, double dt, Rhs&& rhs) {
  return ssprk33_step(state, dt, std::forward<Rhs>(rhs), [](SolutionState&) {});
}

/// Replaces one element's nodal values by the alpha Bernstein reconstruction.
///
/// The interpolant is sampled at the equispaced points -1 + 2n/N, the samples
/// (clipped when bounds are given) become Bernstein coefficients, and the
/// reconstruction is evaluated back at the Gauss-Lobatto nodes before blending.
inline void bernstein_blend_element(std::span<double> values, const ElementBasis& basis, double alpha,
                                    const std::optional<BoundsSpec>& bounds) {
  if (alpha >= 1.0) return;
  const auto p = static_cast<Eigen::Index>(values.size());
  const Eigen::Map<const Eigen::VectorXd> u(values.data(), p);
  const Eigen::VectorXd samples = basis.lagrange_to_bernstein_samples * u;
  const std::span<const double> sample_span(samples.data(), static_cast<std::size_t>(p));
  const BernsteinPoly poly = bounds ? reconstruct_bounded(sample_span, Interval::reference(), *bounds)
                                    : reconstruct(sample_span, Interval::reference());
  const auto nodal = to_basis_coeffs(poly, basis.bernstein_to_nodal);
  const auto mixed = blend(values, nodal, alpha);
  std::copy(mixed.begin(), mixed.end(), values.begin());
}

/// LGL mean (1/2) sum_k w_k u_k on the reference element.
inline double element_mean(std::span<const double> values, const ElementBasis& basis) {
  double sum = 0.0;
  for (int k = 0; k < basis.num_nodes; ++k) sum += basis.weights[k] * values[k];
  return 0.5 * sum;
}

inline std::vector<SensorReading> sense(const SolutionState& state, const PASensor& sensor) {
  std::vector<SensorReading> readings(state.num_elements());
  for (int i = 0; i < state.num_elements(); ++i) readings[i] = sensor.read(state.element(i));
  return readings;
}

/// Bernstein procedure with given per-element alphas (no sensing).
inline SolutionState apply_bernstein_capture_with_alphas(const SolutionState& state, const ElementBasis& basis,
                                                         std::span<const double> alphas,
                                                         const std::optional<BoundsSpec>& bounds) {
  if (alphas.size() != static_cast<std::size_t>(state.num_elements()))
    throw std::invalid_argument("apply_bernstein_capture: one alpha per element required");
  SolutionState out = state;
  for (int i = 0; i < out.num_elements(); ++i) bernstein_blend_element(out.element(i), basis, alphas[i], bounds);
  return out;
}

inline std::pair<SolutionState, std::vector<SensorReading>> apply_bernstein_capture(
    const SolutionState& state, const ElementBasis& basis, const CaptureConfig& capture) {
  if (capture.mode != CaptureMode::Bernstein)
    throw std::invalid_argument("apply_bernstein_capture: capture mode must be Bernstein");
  const PASensor sensor(basis.nodes, capture.sensor);
  auto readings = sense(state, sensor);
  std::vector<double> alphas(readings.size());
  std::transform(readings.begin(), readings.end(), alphas.begin(), [](const SensorReading& r) { return r.alpha; });
  return {apply_bernstein_capture_with_alphas(state, basis, alphas, capture.bounds), std::move(readings)};
}

/// Mean-value filter: elements with sensor ratio >= 1 are set to their mean.
inline SolutionState apply_mean_filter(const SolutionState& state, const ElementBasis& basis,
                                       const SensorConfig& sensor_cfg) {
  const PASensor sensor(basis.nodes, sensor_cfg);
  SolutionState out = state;
  for (int i = 0; i < out.num_elements(); ++i) {
    if (sensor.read(out.element(i)).ratio >= 1.0) {
      auto e = out.element(i);
      std::fill(e.begin(), e.end(), element_mean(e, basis));
    }
  }
  return out;
}

/// Sum of |jumps| between consecutive nodal values, interfaces and periodic wrap included.
inline double discrete_total_variation(const SolutionState& state) {
  const NodalValues& v = state.values;
  const double* data = v.data();
  const auto count = v.size();
  if (count == 0) return 0.0;
  double tv = 0.0;
  for (Eigen::Index k = 0; k + 1 < count; ++k) tv += std::abs(data[k + 1] - data[k]);
  tv += std::abs(data[0] - data[count - 1]);
  return tv;
}

/// int u dx over the domain (LGL quadrature, exact for the DG polynomial).
inline double total_mass(const SolutionState& state, const ElementBasis& basis, const Mesh& mesh) {
  double mass = 0.0;
  for (int i = 0; i < state.num_elements(); ++i) mass += element_mean(state.element(i), basis);
  return mass * mesh.element_width();
}

/// int u^2 dx over the domain, exact for the DG polynomial.
inline double total_square_entropy(const SolutionState& state, const ElementBasis& basis, const Mesh& mesh) {
  double sum = 0.0;
  const Eigen::MatrixXd at_gauss = basis.to_gauss * state.values.transpose();
  for (Eigen::Index i = 0; i < at_gauss.cols(); ++i)
    for (Eigen::Index q = 0; q < at_gauss.rows(); ++q) sum += basis.gauss_weights[q] * at_gauss(q, i) * at_gauss(q, i);
  return 0.5 * mesh.element_width() * sum;
}

struct StepDiagnostics {
  std::size_t step = 0;
  double t = 0.0;
  double dt = 0.0;
  double total_variation = 0.0;
  double min = 0.0;
  double max = 0.0;
  /// Elements with alpha < 1 (Bernstein) or ratio >= 1 (mean filter) in any stage of the step.
  int troubled_count = 0;
  double entropy = 0.0;
  /// Mass relative to the initial mass.
  double conservation_defect = 0.0;
};

using DiagnosticsSeries = std::vector<StepDiagnostics>;

struct RunResult {
  SolutionState state;
  DiagnosticsSeries diagnostics;
};

/// Thrown by run() on blow-up; carries the last finite state and the diagnostics so far.
class RunAborted : public BlowUpError {
 public:
  RunAborted(const BlowUpError& cause, RunResult last_good)
      : BlowUpError(cause), last_good_(std::move(last_good)) {}
  const RunResult& last_good() const noexcept { return last_good_; }

 private:
  RunResult last_good_;
};

/// Called after every completed step with the readings of the last capture pass.
using StepObserver =
    std::function<void(const StepDiagnostics&, const SolutionState&, std::span<const SensorReading>)>;

inline SolutionState sample_initial(const ProblemSpec& problem, const ElementBasis& basis, const Mesh& mesh) {
  SolutionState s{NodalValues(mesh.num_elements(), basis.num_nodes), 0.0};
  for (int i = 0; i < mesh.num_elements(); ++i)
    for (int k = 0; k < basis.num_nodes; ++k) s.values(i, k) = problem.initial(mesh.map(i, basis.nodes[k]));
  return s;
}

/// Stateful capture pass used inside the time loop.
class ShockCapture {
 public:
  ShockCapture(const ElementBasis& basis, const CaptureConfig& cfg) : basis_(basis), cfg_(cfg) {
    if (basis.num_nodes >= cfg.sensor.high_order + 1) sensor_.emplace(basis.nodes, cfg.sensor);
    if (!sensor_ && cfg.mode != CaptureMode::None)
      throw std::invalid_argument("ShockCapture: too few nodes per element for the PA sensor");
  }

  /// Applies the configured capture in place; updates the readings and the
  /// per-element troubled flags (which accumulate until reset).
  void operator()(SolutionState& state) {
    if (!sensor_) return;
    readings_ = sense(state, *sensor_);
    troubled_.resize(readings_.size(), false);
    for (int i = 0; i < state.num_elements(); ++i) {
      const SensorReading& r = readings_[i];
      switch (cfg_.mode) {
        case CaptureMode::None:
          break;
        case CaptureMode::Bernstein:
          if (r.alpha < 1.0) {
            troubled_[i] = true;
            bernstein_blend_element(state.element(i), basis_, r.alpha, cfg_.bounds);
          }
          break;
        case CaptureMode::MeanFilter:
          if (r.ratio >= 1.0) {
            troubled_[i] = true;
            auto e = state.element(i);
            std::fill(e.begin(), e.end(), element_mean(e, basis_));
          }
          break;
      }
    }
  }

  std::span<const SensorReading> readings() const noexcept { return readings_; }
  int troubled_count() const { return static_cast<int>(std::count(troubled_.begin(), troubled_.end(), true)); }
  void reset_troubled() { std::fill(troubled_.begin(), troubled_.end(), false); }

 private:
  const ElementBasis& basis_;
  CaptureConfig cfg_;
  std::optional<PASensor> sensor_;
  std::vector<SensorReading> readings_;
  std::vector<bool> troubled_;
};

/// Time integration from the sampled initial condition to run.t_final.
inline RunResult run(const ProblemSpec& problem, const RunConfig& cfg, const CaptureConfig& capture,
                     const StepObserver& observer = {}) {
  if (!(cfg.t_final >= 0.0)) throw std::invalid_argument("run: t_final must be >= 0");
  if (cfg.mesh.domain() != problem.domain) throw std::invalid_argument("run: mesh domain differs from problem domain");
  if (capture.mode != CaptureMode::None && cfg.degree < 4)
    std::clog << "warning: the PA sensor is unreliable for N < 4 (N = " << cfg.degree << ")\n";

  const ElementBasis basis(cfg.degree);
  const Mesh& mesh = cfg.mesh;
  ShockCapture capturer(basis, capture);
  auto rhs = [&](const SolutionState& s) { return dg_rhs(s, problem.flux, basis, mesh); };

  RunResult result{sample_initial(problem, basis, mesh), {}};
  const double mass0 = total_mass(result.state, basis, mesh);

  auto record = [&](std::size_t step, double dt) {
    const SolutionState& s = result.state;
    StepDiagnostics d;
    d.step = step;
    d.t = s.time;
    d.dt = dt;
    d.total_variation = discrete_total_variation(s);
    d.min = s.values.minCoeff();
    d.max = s.values.maxCoeff();
    d.troubled_count = capturer.troubled_count();
    d.entropy = total_square_entropy(s, basis, mesh);
    d.conservation_defect = total_mass(s, basis, mesh) - mass0;
    result.diagnostics.push_back(d);
    if (observer) observer(d, s, capturer.readings());
  };

  capturer.reset_troubled();
  record(0, 0.0);
  if (cfg.t_final == 0.0) return result;

  const double dt_max = compute_dt(cfg, problem.flux);
  std::size_t step = 0;
  while (result.state.time < cfg.t_final) {
    double dt = std::min(dt_max, cfg.t_final - result.state.time);
    const bool last = result.state.time + dt >= cfg.t_final;
    capturer.reset_troubled();
    try {
      SolutionState next = ssprk33_step(result.state, dt, rhs, std::ref(capturer), capture.timing);
      if (last) next.time = cfg.t_final;
      result.state = std::move(next);
    } catch (const BlowUpError& e) {
      throw RunAborted(e, result);
    }
    record(++step, dt);
  }
  return result;
}

}  // namespace bdg
