#pragma once

// Polynomial annihilation (PA) jump estimates and the element sensor that
// compares orders 1 and 3 to steer the Bernstein blending parameter.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bernstein_dg/errors.hpp"

namespace bdg {

/// m+1 strictly increasing points around the evaluation point x.
class Stencil {
 public:
  Stencil(std::vector<double> points, double eval_point)
      : points_(std::move(points)), eval_point_(eval_point) {
    if (points_.size() < 2) throw std::invalid_argument("Stencil: need at least two points");
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
      if (!(points_[i] < points_[i + 1]))
        throw std::invalid_argument("Stencil: points must be distinct and increasing");
    }
  }

  int order() const noexcept { return static_cast<int>(points_.size()) - 1; }
  std::span<const double> points() const noexcept { return points_; }
  double eval_point() const noexcept { return eval_point_; }

  /// Largest gap between consecutive points.
  double spacing() const {
    double h = 0.0;
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) h = std::max(h, points_[i + 1] - points_[i]);
    return h;
  }

 private:
  std::vector<double> points_;
  double eval_point_;
};

struct SensorConfig {
  int low_order = 1;
  int high_order = 3;
  double kappa = 0.5;
  /// Relative floor on S_low below which the ratio is defined as 0.
  double s1_floor = 1e-12;

  void validate() const {
    if (!(low_order >= 1 && low_order < high_order))
      throw std::invalid_argument("SensorConfig: require 1 <= low_order < high_order");
    if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("SensorConfig: kappa must lie in (0,1)");
    if (!(s1_floor >= 0.0)) throw std::invalid_argument("SensorConfig: s1_floor must be >= 0");
  }
};

struct SensorReading {
  double s1 = 0.0;
  double s3 = 0.0;
  double ratio = 0.0;
  double alpha = 1.0;
};

/// c_j = m! / prod_{i != j} (xi_j - xi_i).
inline std::vector<double> annihilation_coefficients(const Stencil& st) {
  const auto pts = st.points();
  const int m = st.order();
  double factorial = 1.0;
  for (int k = 2; k <= m; ++k) factorial *= k;
  std::vector<double> c(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    double omega = 1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i != j) omega *= pts[j] - pts[i];
    }
    c[j] = factorial / omega;
  }
  return c;
}

/// q_m = sum of c_j over the stencil points at or right of the evaluation point.
inline double normalization_factor(const Stencil& st, std::span<const double> coeffs) {
  if (coeffs.size() != st.points().size())
    throw std::invalid_argument("normalization_factor: dimension mismatch");
  double q = 0.0;
  double scale = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    scale = std::max(scale, std::abs(coeffs[j]));
    if (st.points()[j] >= st.eval_point()) q += coeffs[j];
  }
  if (std::abs(q) < 1e-14 * std::max(1.0, scale))
    throw NumericalError("normalization_factor: degenerate stencil (q_m = 0)");
  return q;
}

/// L_m[s](x) = (1/q_m) sum_j c_j s(xi_j).
///
/// Evaluated as sum_j c_j (s(xi_j) - s(xi_0)), which is the same value since
/// the c_j sum to zero, but returns exactly 0 on constant data.
inline double pa_apply(std::span<const double> values, const Stencil& st) {
  if (values.size() != st.points().size()) throw std::invalid_argument("pa_apply: dimension mismatch");
  const auto c = annihilation_coefficients(st);
  const double q = normalization_factor(st, c);
  double sum = 0.0;
  for (std::size_t j = 1; j < c.size(); ++j) sum += c[j] * (values[j] - values[0]);
  return sum / q;
}

/// Blending parameter from the sensor ratio: 1 for S <= kappa, 0 for S >= 1, linear in between.
inline double ramp(double s, double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("ramp: kappa must lie in (0,1)");
  if (s <= kappa) return 1.0;
  if (s >= 1.0) return 0.0;
  return (1.0 - s) / (1.0 - kappa);
}

/// Element-local PA sensor with the normalized annihilation weights precomputed
/// for one set of collocation nodes.
///
/// Midpoint k (between nodes k and k+1) uses an order-m stencil of m+1
/// consecutive nodes, centered where possible and shifted inward near the
/// element ends; stencils never leave the element.
class PASensor {
 public:
  PASensor(std::span<const double> nodes, const SensorConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int count = static_cast<int>(nodes.size());
    if (count < cfg_.high_order + 1)
      throw std::invalid_argument("PASensor: need at least high_order+1 nodes per element");
    for (int k = 0; k + 1 < count; ++k) {
      if (!(nodes[k] < nodes[k + 1])) throw std::invalid_argument("PASensor: nodes must be increasing");
    }
    low_ = build(nodes, cfg_.low_order);
    high_ = build(nodes, cfg_.high_order);
  }

  const SensorConfig& config() const noexcept { return cfg_; }
  std::size_t num_nodes() const noexcept { return num_nodes_; }

  SensorReading read(std::span<const double> values) const {
    if (values.size() != num_nodes_) throw std::invalid_argument("PASensor: wrong number of values");
    SensorReading r;
    r.s1 = max_abs(low_, values);
    r.s3 = max_abs(high_, values);
    double scale = 1.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    r.ratio = r.s1 > cfg_.s1_floor * scale ? r.s3 / r.s1 : 0.0;
    r.alpha = ramp(r.ratio, cfg_.kappa);
    return r;
  }

 private:
  struct Row {
    std::size_t start;
    std::vector<double> weights;  // c_j / q_m
  };

  std::vector<Row> build(std::span<const double> nodes, int order) {
    num_nodes_ = nodes.size();
    const int last_start = static_cast<int>(nodes.size()) - 1 - order;
    std::vector<Row> rows;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
      const int start = std::clamp(static_cast<int>(k) - (order - 1) / 2, 0, last_start);
      std::vector<double> pts(nodes.begin() + start, nodes.begin() + start + order + 1);
      const Stencil st(std::move(pts), 0.5 * (nodes[k] + nodes[k + 1]));
      auto c = annihilation_coefficients(st);
      const double q = normalization_factor(st, c);
      for (double& w : c) w /= q;
      rows.push_back({static_cast<std::size_t>(start), std::move(c)});
    }
    return rows;
  }

  static double max_abs(const std::vector<Row>& rows, std::span<const double> values) {
    double s = 0.0;
    for (const Row& row : rows) {
      const double base = values[row.start];
      double sum = 0.0;
      for (std::size_t j = 1; j < row.weights.size(); ++j) sum += row.weights[j] * (values[row.start + j] - base);
      s = std::max(s, std::abs(sum));
    }
    return s;
  }

  SensorConfig cfg_;
  std::size_t num_nodes_ = 0;
  std::vector<Row> low_;
  std::vector<Row> high_;
};

/// Sensor reading S_1, S_3, S = S_3/S_1 and alpha for one element's nodal values.
inline SensorReading element_sensor(std::span<const double> node_values, std::span<const double> nodes,
                                    const SensorConfig& cfg) {
  if (node_values.size() != nodes.size()) throw std::invalid_argument("element_sensor: dimension mismatch");
  if (nodes.size() < static_cast<std::size_t>(cfg.high_order) + 1)
    throw std::invalid_argument("element_sensor: unsupported order for this many nodes");
  return PASensor(nodes, cfg).read(node_values);
}

}  // namespace bdg
