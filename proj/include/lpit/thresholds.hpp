#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lpit {

// argmin_a (a - beta)^2 + lambda |a|  =  sign(beta) max(|beta| - lambda/2, 0)
inline double soft_threshold(double beta, double lambda) noexcept {
  const double mag = std::abs(beta) - 0.5 * lambda;
  if (mag <= 0.0) return 0.0;
  return std::copysign(mag, beta);
}

// Weight 1/(|x_prev|+eps)^(1-p) applied to the scalar threshold lambda*mu.
inline double it_threshold_weight(double lambda, double mu, double p, double x_prev,
                                  double epsilon) noexcept {
  return lambda * mu / std::pow(std::abs(x_prev) + epsilon, 1.0 - p);
}

// One coordinate of the IT update: soft thresholding of [B_mu(x^k)]_i with
// the reweighted threshold lambda*mu/(|x_i^k| + eps_i)^(1-p).
inline double it_coordinate_update(double b_mu_i, double x_prev_i, double lambda, double mu, double p,
                                   double epsilon_i) noexcept {
  return soft_threshold(b_mu_i, it_threshold_weight(lambda, mu, p, x_prev_i, epsilon_i));
}

// Dead-zone edge of the half operator: |beta| <= this maps to zero.
inline double half_dead_zone(double lambda) noexcept {
  return std::cbrt(54.0) / 4.0 * std::pow(lambda, 2.0 / 3.0);
}

// Inverse of half_dead_zone: the lambda whose dead zone ends exactly at tau.
inline double half_lambda_for_dead_zone(double tau) noexcept {
  return std::pow(4.0 * tau / std::cbrt(54.0), 1.5);
}

// Global minimizer of (a - beta)^2 + lambda |a|^(1/2).
//
// Outside the dead zone the minimizer is the largest root of the cubic
// stationarity condition, written in trigonometric form. On the dead-zone
// edge both 0 and the nonzero root are global minimizers; 0 is returned.
inline double half_threshold(double beta, double lambda) noexcept {
  const double mag = std::abs(beta);
  if (mag <= half_dead_zone(lambda)) return 0.0;
  const double c = std::clamp(lambda / 8.0 * std::pow(mag / 3.0, -1.5), -1.0, 1.0);
  const double phi = std::acos(c);
  const double out = 2.0 / 3.0 * mag * (1.0 + std::cos(2.0 * std::numbers::pi / 3.0 - 2.0 / 3.0 * phi));
  return std::copysign(out, beta);
}

}  // namespace lpit
