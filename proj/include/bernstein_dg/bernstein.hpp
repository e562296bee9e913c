#pragma once

// Bernstein basis, the plain and bound-enforcing Bernstein reconstructions,
// change of basis to nodal / modal representations, and the total-variation
// and entropy diagnostics used to check the reconstruction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bernstein_dg/errors.hpp"
#include "bernstein_dg/quadrature.hpp"

namespace bdg {

/// Closed interval [a, b] with a < b.
class Interval {
 public:
  constexpr Interval() = default;
  Interval(double a, double b) : a_(a), b_(b) {
    if (!(a < b)) throw std::invalid_argument("Interval: require a < b");
  }

  constexpr double a() const noexcept { return a_; }
  constexpr double b() const noexcept { return b_; }
  constexpr double length() const noexcept { return b_ - a_; }
  constexpr bool contains(double x) const noexcept { return x >= a_ && x <= b_; }

  static Interval reference() { return {-1.0, 1.0}; }
  static Interval unit() { return {0.0, 1.0}; }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double a_ = -1.0;
  double b_ = 1.0;
};

/// Lower and upper solution bounds m <= M for the bounded reconstruction.
struct BoundsSpec {
  double lower;
  double upper;

  BoundsSpec(double m, double M) : lower(m), upper(M) {
    if (!(m <= M)) throw std::invalid_argument("BoundsSpec: require lower <= upper");
  }
};

/// Polynomial sum_n coeffs[n] * b_{n,N}(x) over an interval, N = coeffs.size() - 1.
class BernsteinPoly {
 public:
  BernsteinPoly(std::vector<double> coeffs, Interval interval)
      : coeffs_(std::move(coeffs)), interval_(interval) {
    if (coeffs_.empty()) throw std::invalid_argument("BernsteinPoly: need at least one coefficient");
  }

  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const double> coeffs() const noexcept { return coeffs_; }
  const Interval& interval() const noexcept { return interval_; }

  double min_coeff() const { return *std::min_element(coeffs_.begin(), coeffs_.end()); }
  double max_coeff() const { return *std::max_element(coeffs_.begin(), coeffs_.end()); }

 private:
  std::vector<double> coeffs_;
  Interval interval_;
};

enum class TargetBasis { LagrangeGaussLobatto, Legendre };

/// Square change-of-basis matrix: target coefficients = entries * Bernstein coefficients.
struct TransformMatrix {
  Eigen::MatrixXd entries;
  TargetBasis target;

  int size() const noexcept { return static_cast<int>(entries.rows()); }
};

/// Convex entropy U; the default is the L2 entropy U(u) = u^2.
using EntropyFunctional = std::function<double(double)>;

inline double square_entropy(double u) { return u * u; }

namespace detail {

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline void check_same_size(std::size_t lhs, std::size_t rhs, const char* what) {
  if (lhs != rhs) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

// de Casteljau at local parameter t in [0,1]; works on a scratch copy.
inline double de_casteljau(std::span<const double> coeffs, double t) {
  std::vector<double> work(coeffs.begin(), coeffs.end());
  const double s = 1.0 - t;
  for (std::size_t level = work.size() - 1; level > 0; --level) {
    for (std::size_t i = 0; i < level; ++i) work[i] = s * work[i] + t * work[i + 1];
  }
  return work[0];
}

// Split the Bernstein coefficients on [0,1] at t into those of [0,t] and [t,1].
inline std::pair<std::vector<double>, std::vector<double>> split(std::span<const double> coeffs,
                                                                 double t) {
  const std::size_t n = coeffs.size();
  std::vector<double> work(coeffs.begin(), coeffs.end());
  std::vector<double> left(n);
  std::vector<double> right(n);
  const double s = 1.0 - t;
  left[0] = work[0];
  right[n - 1] = work[n - 1];
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = 0; i + level < n; ++i) work[i] = s * work[i] + t * work[i + 1];
    left[level] = work[0];
    right[n - 1 - level] = work[n - 1 - level];
  }
  return {std::move(left), std::move(right)};
}

inline bool is_monotone(std::span<const double> coeffs) {
  bool up = false;
  bool down = false;
  for (std::size_t i = 0; i + 1 < coeffs.size(); ++i) {
    const double d = coeffs[i + 1] - coeffs[i];
    up = up || d > 0.0;
    down = down || d < 0.0;
  }
  return !(up && down);
}

inline double variation(std::span<const double> coeffs, double width, double tol) {
  if (is_monotone(coeffs) || width <= tol) return std::abs(coeffs.back() - coeffs.front());
  const auto [left, right] = split(coeffs, 0.5);
  return variation(left, 0.5 * width, tol) + variation(right, 0.5 * width, tol);
}

}  // namespace detail

/// b_{n,N}(x) = binom(N,n) (x-a)^n (b-x)^(N-n) / (b-a)^N.
inline double basis_eval(int n, int degree, double x, const Interval& iv) {
  if (degree < 0 || n < 0 || n > degree) throw std::invalid_argument("basis_eval: index out of range");
  if (!iv.contains(x)) throw std::invalid_argument("basis_eval: x outside interval");
  const double t = (x - iv.a()) / iv.length();
  const double s = (iv.b() - x) / iv.length();
  return detail::binomial(degree, n) * std::pow(t, n) * std::pow(s, degree - n);
}

/// Bernstein reconstruction: the samples u(a + n/N (b-a)) become the coefficients.
inline BernsteinPoly reconstruct(std::span<const double> samples, const Interval& iv) {
  if (samples.size() < 2) throw std::invalid_argument("reconstruct: need at least 2 samples");
  return {std::vector<double>(samples.begin(), samples.end()), iv};
}

/// Bernstein reconstruction with the samples clipped into [m, M].
inline BernsteinPoly reconstruct_bounded(std::span<const double> samples, const Interval& iv,
                                         const BoundsSpec& bounds) {
  if (samples.size() < 2) throw std::invalid_argument("reconstruct_bounded: need at least 2 samples");
  std::vector<double> coeffs(samples.begin(), samples.end());
  for (double& c : coeffs) c = std::clamp(c, bounds.lower, bounds.upper);
  return {std::move(coeffs), iv};
}

inline double eval(const BernsteinPoly& p, double x) {
  if (!p.interval().contains(x)) throw std::invalid_argument("eval: x outside interval");
  const Interval& iv = p.interval();
  return detail::de_casteljau(p.coeffs(), (x - iv.a()) / iv.length());
}

/// Derivative as a degree N-1 Bernstein polynomial: N (beta_{n+1} - beta_n) / (b - a).
inline BernsteinPoly derivative(const BernsteinPoly& p) {
  const int n = p.degree();
  if (n == 0) return {{0.0}, p.interval()};
  const auto c = p.coeffs();
  const double scale = n / p.interval().length();
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = scale * (c[i + 1] - c[i]);
  return {std::move(d), p.interval()};
}

/// Splits p at x into its restrictions to [a, x] and [x, b].
inline std::pair<BernsteinPoly, BernsteinPoly> subdivide(const BernsteinPoly& p, double x) {
  const Interval& iv = p.interval();
  if (!(x > iv.a() && x < iv.b())) throw std::invalid_argument("subdivide: x must be interior");
  auto [left, right] = detail::split(p.coeffs(), (x - iv.a()) / iv.length());
  return {BernsteinPoly(std::move(left), {iv.a(), x}), BernsteinPoly(std::move(right), {x, iv.b()})};
}

/// Change-of-basis matrix from Bernstein coefficients on [-1,1].
///
/// LagrangeGaussLobatto: T(k,n) = b_{n,N}(x_k) at the Gauss-Lobatto nodes, so
/// T * beta are the nodal values. Legendre: T(l,n) = (2l+1)/2 * int b_{n,N} P_l,
/// the L2 projection coefficients, integrated exactly with N+5 Gauss points.
inline TransformMatrix build_transform(int degree, TargetBasis basis) {
  if (degree < 1) throw std::invalid_argument("build_transform: degree must be >= 1");
  const int size = degree + 1;
  const Interval ref = Interval::reference();
  TransformMatrix t{Eigen::MatrixXd::Zero(size, size), basis};
  if (basis == TargetBasis::LagrangeGaussLobatto) {
    const auto lgl = lgl_nodes_weights(degree);
    for (int k = 0; k < size; ++k)
      for (int n = 0; n < size; ++n) t.entries(k, n) = basis_eval(n, degree, lgl.nodes[k], ref);
  } else {
    const auto gauss = gauss_legendre(degree + 5);
    for (int l = 0; l < size; ++l) {
      for (int n = 0; n < size; ++n) {
        double sum = 0.0;
        for (std::size_t q = 0; q < gauss.nodes.size(); ++q)
          sum += gauss.weights[q] * basis_eval(n, degree, gauss.nodes[q], ref) * legendre(l, gauss.nodes[q]);
        t.entries(l, n) = 0.5 * (2 * l + 1) * sum;
      }
    }
  }
  return t;
}

/// Target-basis coefficients T * beta of p.
inline std::vector<double> to_basis_coeffs(const BernsteinPoly& p, const TransformMatrix& t) {
  detail::check_same_size(static_cast<std::size_t>(t.size()), p.coeffs().size(), "to_basis_coeffs");
  const auto c = p.coeffs();
  const Eigen::Map<const Eigen::VectorXd> beta(c.data(), static_cast<Eigen::Index>(c.size()));
  const Eigen::VectorXd out = t.entries * beta;
  return {out.data(), out.data() + out.size()};
}

/// Inverse change of basis: the Bernstein form on [-1,1] of the polynomial with
/// the given target-basis coefficients.
inline BernsteinPoly from_basis_coeffs(std::span<const double> coeffs, const TransformMatrix& t) {
  detail::check_same_size(static_cast<std::size_t>(t.size()), coeffs.size(), "from_basis_coeffs");
  const Eigen::Map<const Eigen::VectorXd> rhs(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  const Eigen::VectorXd beta = t.entries.partialPivLu().solve(rhs);
  return {std::vector<double>(beta.data(), beta.data() + beta.size()), Interval::reference()};
}

/// Spectral condition number sigma_max(T) / sigma_min(T) from the eigenvalues of T^T T.
inline double condition_number(const TransformMatrix& t) {
  const Eigen::MatrixXd gram = t.entries.transpose() * t.entries;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("condition_number: eigen solver failed");
  const auto& lambda = solver.eigenvalues();
  const double lmax = lambda.maxCoeff();
  const double lmin = lambda.minCoeff();
  if (!(lmin > lmax * 1e-28)) throw NumericalError("condition_number: matrix is singular");
  return std::sqrt(lmax / lmin);
}

/// alpha * original + (1 - alpha) * bernstein, componentwise.
inline std::vector<double> blend(std::span<const double> original, std::span<const double> bernstein,
                                 double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("blend: alpha must lie in [0,1]");
  detail::check_same_size(original.size(), bernstein.size(), "blend");
  std::vector<double> out(original.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = alpha * original[i] + (1.0 - alpha) * bernstein[i];
  return out;
}

/// Total variation int |p'| over the interval.
///
/// The interval is subdivided until the Bernstein coefficients on each piece
/// are monotone (then so is p there, with variation |beta_N - beta_0|) or the
/// piece is narrower than `tolerance` in x.
inline double total_variation(const BernsteinPoly& p, double tolerance = 1e-12) {
  if (p.degree() == 0) return 0.0;
  return detail::variation(p.coeffs(), 1.0, tolerance / p.interval().length());
}

/// int U(p(x)) dx with 2N+8 Gauss-Legendre points.
inline double total_entropy(const BernsteinPoly& p, const EntropyFunctional& entropy = square_entropy) {
  const auto gauss = gauss_legendre(2 * p.degree() + 8);
  const Interval& iv = p.interval();
  const double half = 0.5 * iv.length();
  double sum = 0.0;
  for (std::size_t q = 0; q < gauss.nodes.size(); ++q) {
    const double t = 0.5 * (gauss.nodes[q] + 1.0);
    sum += gauss.weights[q] * entropy(detail::de_casteljau(p.coeffs(), t));
  }
  return half * sum;
}

}  // namespace bdg
