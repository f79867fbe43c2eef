#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpit/linalg.hpp"
#include "lpit/penalty.hpp"
#include "lpit/rng.hpp"
#include "lpit/thresholds.hpp"

namespace lpit {

enum class Algorithm { IT, Soft, Half };
enum class Termination { Converged, MaxIterations, DegenerateInput };

inline std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::IT: return "it";
    case Algorithm::Soft: return "soft";
    case Algorithm::Half: return "half";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "it" || s == "IT") return Algorithm::IT;
  if (s == "soft" || s == "Soft") return Algorithm::Soft;
  if (s == "half" || s == "Half") return Algorithm::Half;
  throw ContractViolation("unknown algorithm '" + std::string(s) + "' (expected it|soft|half)");
}

inline std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::DegenerateInput: return "degenerate_input";
  }
  return "?";
}

struct SolverConfig {
  Algorithm algorithm = Algorithm::IT;
  double p = 0.7;                 // IT only
  double eta = 0.01;              // mu = (1 - eta) / ||A||^2
  std::size_t sparsity_r = 1;     // target support size used by the lambda rule
  double tolerance = 1e-8;        // relative step ||x+ - x|| / ||x||
  std::size_t max_iterations = 5000;
  double epsilon_scale = 0.7;
  double epsilon_floor = 1e-3;
  std::optional<double> fixed_lambda;   // overrides the adaptive rule
  std::optional<Vector> fixed_epsilon;  // IT only; freezes eps instead of recomputing it
  bool random_start = false;            // x0 ~ N(0, I) from rng_seed instead of x0 = 0
  std::uint64_t rng_seed = 0;
  bool record_trace = true;

  void validate(std::size_t n) const {
    using detail::require;
    require(eta > 0.0 && eta < 1.0, "SolverConfig: eta must lie in (0,1)");
    require(algorithm != Algorithm::IT || (p > 0.0 && p < 1.0), "SolverConfig: p must lie in (0,1)");
    require(tolerance > 0.0, "SolverConfig: tolerance must be positive");
    require(max_iterations > 0, "SolverConfig: max_iterations must be positive");
    require(sparsity_r >= 1 && sparsity_r < n,
            "SolverConfig: sparsity_r must satisfy 1 <= r < n (r=" + std::to_string(sparsity_r) +
                ", n=" + std::to_string(n) + ")");
    require(epsilon_scale > 0.0 && epsilon_floor > 0.0, "SolverConfig: epsilon scale and floor must be positive");
    if (fixed_lambda) require(*fixed_lambda > 0.0, "SolverConfig: fixed_lambda must be positive");
    if (fixed_epsilon) {
      require(fixed_epsilon->size() == n, "SolverConfig: fixed_epsilon length must equal n");
      for (double e : *fixed_epsilon) require(e > 0.0, "SolverConfig: fixed_epsilon entries must be positive");
    }
  }
};

struct IterationRecord {
  double h1 = 0.0;         // objective at x^{k+1} with this iteration's lambda (and eps for IT)
  double step_norm = 0.0;  // ||x^{k+1} - x^k||
  double lambda = 0.0;
  std::size_t support = 0;  // nonzeros of x^{k+1}
};

using IterationTrace = std::vector<IterationRecord>;

struct SolveResult {
  Vector solution;
  std::size_t iterations = 0;
  Termination termination = Termination::MaxIterations;
  IterationTrace trace;
  double mu = 0.0;
  double final_relative_step = 0.0;
  Vector final_epsilon;  // IT only
  std::string diagnostic;
};

// B_mu(x) = x + mu A^T (b - A x)
inline Vector gradient_step(const DenseMatrix& a, std::span<const double> b, std::span<const double> x,
                            double mu) {
  detail::require(mu > 0.0, "gradient_step: mu must be positive");
  detail::require(b.size() == a.rows(), "gradient_step: length(b) != A.rows");
  Vector r = matvec(a, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  Vector out = matvec_transpose(a, r);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = x[j] + mu * out[j];
  return out;
}

namespace detail {

// eps_i = max(scale * |mu g_i|, floor), where g = A^T (b - A x).
inline void epsilon_from_gradient(std::span<const double> g, double mu, double scale, double floor,
                                  std::span<double> out) {
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::max(scale * std::abs(mu * g[i]), floor);
}

}  // namespace detail

inline Vector compute_epsilon(const DenseMatrix& a, std::span<const double> b, std::span<const double> x,
                              double mu, double scale, double floor) {
  detail::require(b.size() == a.rows(), "compute_epsilon: length(b) != A.rows");
  Vector r = matvec(a, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const Vector g = matvec_transpose(a, r);
  Vector eps(g.size());
  detail::epsilon_from_gradient(g, mu, scale, floor, eps);
  return eps;
}

// lambda_k = 2 |B_mu(x)|_(r+1) * (|x|_(r+1) + |eps|_(r+1))^(1-p) / mu
//
// (k) denotes the k-th entry of the nonincreasing rearrangement of the
// magnitudes; each of B_mu(x), x and eps is rearranged on its own.
inline double adaptive_lambda(std::span<const double> b_mu, std::span<const double> x,
                              std::span<const double> epsilon, double mu, double p, std::size_t r) {
  detail::require(b_mu.size() == x.size() && x.size() == epsilon.size(), "adaptive_lambda: length mismatch");
  detail::require(r >= 1 && r < x.size(), "adaptive_lambda: need 1 <= r < n (r=" + std::to_string(r) +
                                              ", n=" + std::to_string(x.size()) + ")");
  detail::require(mu > 0.0, "adaptive_lambda: mu must be positive");
  const double bk = kth_largest_magnitude(b_mu, r);
  if (bk == 0.0) return 0.0;
  const double xk = kth_largest_magnitude(x, r);
  const double ek = kth_largest_magnitude(epsilon, r);
  return 2.0 * bk * std::pow(xk + ek, 1.0 - p) / mu;
}

// Soft baseline: threshold lambda*mu/2 placed at the (r+1)-st largest |B_mu|.
inline double soft_adaptive_lambda(std::span<const double> b_mu, double mu, std::size_t r) {
  detail::require(r >= 1 && r < b_mu.size(), "soft_adaptive_lambda: need 1 <= r < n");
  return 2.0 * kth_largest_magnitude(b_mu, r) / mu;
}

// Half baseline: dead zone of the half operator at lambda*mu ends at the
// (r+1)-st largest |B_mu|.
inline double half_adaptive_lambda(std::span<const double> b_mu, double mu, std::size_t r) {
  detail::require(r >= 1 && r < b_mu.size(), "half_adaptive_lambda: need 1 <= r < n");
  return half_lambda_for_dead_zone(kth_largest_magnitude(b_mu, r)) / mu;
}

inline double relative_error(std::span<const double> x_star, std::span<const double> x0) {
  detail::require(x_star.size() == x0.size(), "relative_error: length mismatch");
  const double denom = norm2(x0);
  detail::require(denom > 0.0, "relative_error: reference signal is zero");
  return distance2(x_star, x0) / denom;
}

// Iterative thresholding driver shared by IT, Soft and Half.
inline SolveResult solve(const DenseMatrix& a, std::span<const double> b, const SolverConfig& cfg) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  detail::require(b.size() == m, "solve: length(b)=" + std::to_string(b.size()) + " but A.rows=" +
                                     std::to_string(m));
  cfg.validate(n);

  SolveResult res;
  res.solution.assign(n, 0.0);

  const double sigma = spectral_norm(a);
  if (sigma == 0.0) {
    res.termination = Termination::DegenerateInput;
    res.diagnostic = "measurement matrix is zero";
    return res;
  }
  if (!detail::all_finite(b)) {
    res.termination = Termination::DegenerateInput;
    res.diagnostic = "observation contains non-finite values";
    return res;
  }
  const double mu = (1.0 - cfg.eta) / (sigma * sigma);
  detail::require(mu * sigma * sigma < 1.0, "solve: step size guard mu*||A||^2 < 1 violated");
  res.mu = mu;

  Vector x(n, 0.0);
  if (cfg.random_start) {
    Xoshiro256 rng(cfg.rng_seed);
    for (auto& v : x) v = rng.normal();
  }

  Vector x_next(n), grad(n), b_mu(n), eps(n, cfg.epsilon_floor), ax(m), resid(m);
  if (cfg.fixed_epsilon) eps = *cfg.fixed_epsilon;
  PenaltyParams pen{cfg.p, {}};

  matvec_into(a, x, ax);
  for (std::size_t i = 0; i < m; ++i) resid[i] = b[i] - ax[i];

  if (cfg.record_trace) res.trace.reserve(std::min<std::size_t>(cfg.max_iterations, 1024));

  for (std::size_t k = 0; k < cfg.max_iterations; ++k) {
    matvec_transpose_into(a, resid, grad);
    for (std::size_t j = 0; j < n; ++j) b_mu[j] = x[j] + mu * grad[j];

    double lambda = 0.0;
    double penalty_next = 0.0;
    switch (cfg.algorithm) {
      case Algorithm::IT: {
        if (!cfg.fixed_epsilon)
          detail::epsilon_from_gradient(grad, mu, cfg.epsilon_scale, cfg.epsilon_floor, eps);
        lambda = cfg.fixed_lambda ? *cfg.fixed_lambda : adaptive_lambda(b_mu, x, eps, mu, cfg.p, cfg.sparsity_r);
        for (std::size_t j = 0; j < n; ++j)
          x_next[j] = it_coordinate_update(b_mu[j], x[j], lambda, mu, cfg.p, eps[j]);
        pen.epsilon = eps;
        penalty_next = modified_penalty(x_next, pen);
        break;
      }
      case Algorithm::Soft: {
        lambda = cfg.fixed_lambda ? *cfg.fixed_lambda : soft_adaptive_lambda(b_mu, mu, cfg.sparsity_r);
        for (std::size_t j = 0; j < n; ++j) {
          x_next[j] = soft_threshold(b_mu[j], lambda * mu);
          penalty_next += std::abs(x_next[j]);
        }
        break;
      }
      case Algorithm::Half: {
        lambda = cfg.fixed_lambda ? *cfg.fixed_lambda : half_adaptive_lambda(b_mu, mu, cfg.sparsity_r);
        for (std::size_t j = 0; j < n; ++j) {
          x_next[j] = half_threshold(b_mu[j], lambda * mu);
          penalty_next += std::sqrt(std::abs(x_next[j]));
        }
        break;
      }
    }

    if (!std::isfinite(lambda) || !detail::all_finite(x_next)) {
      res.termination = Termination::DegenerateInput;
      res.diagnostic = "non-finite value at iteration " + std::to_string(k);
      res.iterations = k;
      res.solution = x;
      return res;
    }

    const double step = distance2(x_next, x);
    const double x_norm = norm2(x);

    matvec_into(a, x_next, ax);
    double resid_sq = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      resid[i] = b[i] - ax[i];
      resid_sq += resid[i] * resid[i];
    }

    if (cfg.record_trace)
      res.trace.push_back({resid_sq + lambda * penalty_next, step, lambda, support_size(x_next)});

    x.swap(x_next);
    res.iterations = k + 1;

    // From x = 0 the relative step is undefined; only a zero step counts.
    const double rel = x_norm > 0.0 ? step / x_norm : (step == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    res.final_relative_step = rel;
    if (rel <= cfg.tolerance) {
      res.termination = Termination::Converged;
      break;
    }
  }

  res.solution = std::move(x);
  if (cfg.algorithm == Algorithm::IT) res.final_epsilon = std::move(eps);
  return res;
}

}  // namespace lpit
