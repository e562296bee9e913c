#pragma once

// Legendre polynomials and the Gauss / Gauss-Lobatto rules built from them.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bdg {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Value and first derivative of the Legendre polynomial P_n at x (three-term recurrence).
inline std::pair<double, double> legendre_with_derivative(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p_prev = 1.0;
  double p = x;
  double dp_prev = 0.0;
  double dp = 1.0;
  for (int k = 2; k <= n; ++k) {
    const double p_next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
    const double dp_next = dp_prev + (2.0 * k - 1.0) * p;
    p_prev = p;
    p = p_next;
    dp_prev = dp;
    dp = dp_next;
  }
  return {p, dp};
}

inline double legendre(int n, double x) { return legendre_with_derivative(n, x).first; }

/// Gauss-Legendre rule with `points` nodes on [-1,1], exact for degree 2*points-1.
inline QuadratureRule gauss_legendre(int points) {
  if (points < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  QuadratureRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  for (int i = 0; i < (points + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre_with_derivative(points, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre_with_derivative(points, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[points - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[points - 1 - i] = w;
  }
  if (points % 2 == 1) rule.nodes[points / 2] = 0.0;
  return rule;
}

/// Legendre-Gauss-Lobatto nodes (roots of (1-x^2) P_N') and weights 2/(N(N+1) P_N(x_k)^2).
///
/// Interior nodes are found by Newton iteration on P_N' started from the
/// Chebyshev-Gauss-Lobatto points; the nodes are returned in increasing order
/// and are exactly antisymmetric about zero.
inline QuadratureRule lgl_nodes_weights(int degree) {
  if (degree < 1) throw std::invalid_argument("lgl_nodes_weights: degree must be >= 1");
  const int n = degree;
  QuadratureRule rule;
  rule.nodes.assign(n + 1, 0.0);
  rule.weights.assign(n + 1, 0.0);
  rule.nodes.front() = -1.0;
  rule.nodes.back() = 1.0;
  for (int i = 1; i <= n / 2; ++i) {
    double x = -std::cos(std::numbers::pi * i / n);
    for (int iter = 0; iter < 100; ++iter) {
      // P_N'' from the Legendre ODE: (1-x^2) P'' = 2x P' - N(N+1) P.
      const auto [p, dp] = legendre_with_derivative(n, x);
      const double ddp = (2.0 * x * dp - n * (n + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / ddp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.nodes[n - i] = -x;
  }
  if (n % 2 == 0) rule.nodes[n / 2] = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double p = legendre(n, rule.nodes[k]);
    rule.weights[k] = 2.0 / (n * (n + 1.0) * p * p);
  }
  return rule;
}

}  // namespace bdg
