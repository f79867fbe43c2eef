#pragma once

#include <cmath>
#include <span>
#include <string>

#include "lpit/linalg.hpp"

namespace lpit {

// Exponent p in (0,1) and one strictly positive smoothing weight per coordinate.
struct PenaltyParams {
  double p = 0.5;
  Vector epsilon;

  void validate() const {
    detail::require(p > 0.0 && p < 1.0, "PenaltyParams: p must lie in (0,1), got " + std::to_string(p));
    for (double e : epsilon)
      detail::require(e > 0.0 && std::isfinite(e), "PenaltyParams: epsilon entries must be positive");
  }
};

// sum_i |x_i| / (|x_i| + eps_i)^(1-p)
//
// Tends to sum_i |x_i|^p as eps -> 0+ and never exceeds it.
inline double modified_penalty(std::span<const double> x, const PenaltyParams& params) {
  detail::require(x.size() == params.epsilon.size(),
                  "modified_penalty: length(x)=" + std::to_string(x.size()) +
                      " but length(epsilon)=" + std::to_string(params.epsilon.size()));
  const double q = 1.0 - params.p;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ax = std::abs(x[i]);
    s += ax / std::pow(ax + params.epsilon[i], q);
  }
  return s;
}

// Penalty with the weights frozen at an anchor point y:
// sum_i |x_i| / (|y_i| + eps_i)^(1-p).
inline double anchored_penalty(std::span<const double> x, std::span<const double> y,
                               const PenaltyParams& params) {
  detail::require(x.size() == y.size() && x.size() == params.epsilon.size(),
                  "anchored_penalty: length mismatch");
  const double q = 1.0 - params.p;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    s += std::abs(x[i]) / std::pow(std::abs(y[i]) + params.epsilon[i], q);
  return s;
}

inline double residual_squared(const DenseMatrix& a, std::span<const double> b, std::span<const double> x) {
  detail::require(b.size() == a.rows(), "residual: length(b) != A.rows");
  Vector ax = matvec(a, x);
  double s = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double d = ax[i] - b[i];
    s += d * d;
  }
  return s;
}

// H1(x) = ||Ax - b||^2 + lambda * modified_penalty(x)
inline double objective_h1(const DenseMatrix& a, std::span<const double> b, std::span<const double> x,
                           double lambda, const PenaltyParams& params) {
  detail::require(lambda > 0.0, "objective_h1: lambda must be positive");
  return residual_squared(a, b, x) + lambda * modified_penalty(x, params);
}

// H2(x, y) = mu ||Ax - b||^2 + lambda mu sum |x_i|/(|y_i|+eps_i)^(1-p)
//            - mu ||Ax - Ay||^2 + ||x - y||^2
// H2(x, x) = mu H1(x).
inline double surrogate_h2(const DenseMatrix& a, std::span<const double> b, std::span<const double> x,
                           std::span<const double> y, double lambda, double mu,
                           const PenaltyParams& params) {
  detail::require(lambda > 0.0 && mu > 0.0, "surrogate_h2: lambda and mu must be positive");
  detail::require(x.size() == y.size(), "surrogate_h2: length(x) != length(y)");
  Vector diff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - y[i];
  const double a_diff = norm2_squared(matvec(a, diff));
  return mu * residual_squared(a, b, x) + lambda * mu * anchored_penalty(x, y, params) - mu * a_diff +
         norm2_squared(diff);
}

}  // namespace lpit
