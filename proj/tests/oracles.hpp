#pragma once

// Independent reference computations used only by the test suites. Nothing
// here calls into the library's numerical routines.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace lpit::oracle {

// Ternary search on [lo, hi] for a function unimodal there.
inline double ternary_min(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  for (int i = 0; i < iters && hi - lo > 1e-15; ++i) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2))
      hi = m2;
    else
      lo = m1;
  }
  return 0.5 * (lo + hi);
}

// Brute-force global argmin of a 1-D function on [lo, hi]:
// coarse scan, then a 1e-6 grid around every coarse local minimum, then
// ternary refinement inside the best fine cell. Extra candidates (e.g. the
// kink at 0) are evaluated exactly. Ties resolve toward the smaller |a|.
inline double grid_argmin(const std::function<double(double)>& f, double lo, double hi,
                          std::vector<double> extra_candidates = {}) {
  const double coarse = 1e-3;
  const double fine = 1e-6;
  const auto nc = static_cast<long>(std::ceil((hi - lo) / coarse));
  std::vector<double> fc(static_cast<std::size_t>(nc + 1));
  for (long i = 0; i <= nc; ++i) fc[static_cast<std::size_t>(i)] = f(std::min(lo + static_cast<double>(i) * coarse, hi));

  std::vector<double> candidates = std::move(extra_candidates);
  for (long i = 0; i <= nc; ++i) {
    const double left = i > 0 ? fc[static_cast<std::size_t>(i - 1)] : std::numeric_limits<double>::infinity();
    const double right = i < nc ? fc[static_cast<std::size_t>(i + 1)] : std::numeric_limits<double>::infinity();
    const double c = fc[static_cast<std::size_t>(i)];
    if (c <= left && c <= right) {
      const double centre = std::min(lo + static_cast<double>(i) * coarse, hi);
      const double a = std::max(lo, centre - coarse);
      const double b = std::min(hi, centre + coarse);
      double best_x = a;
      double best_f = f(a);
      for (double x = a; x <= b; x += fine) {
        const double v = f(x);
        if (v < best_f) {
          best_f = v;
          best_x = x;
        }
      }
      candidates.push_back(ternary_min(f, std::max(a, best_x - fine), std::min(b, best_x + fine)));
    }
  }

  double best_x = candidates.front();
  double best_f = f(best_x);
  for (double x : candidates) {
    const double v = f(x);
    if (v < best_f || (v == best_f && std::abs(x) < std::abs(best_x))) {
      best_f = v;
      best_x = x;
    }
  }
  return best_x;
}

// Eigenvalues of a symmetric matrix (row-major, k x k) by cyclic Jacobi rotations.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> s, std::size_t k) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) off += s[i * k + j] * s[i * k + j];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        const double apq = s[p * k + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (s[q * k + q] - s[p * k + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t r = 0; r < k; ++r) {
          const double arp = s[r * k + p];
          const double arq = s[r * k + q];
          s[r * k + p] = c * arp - sn * arq;
          s[r * k + q] = sn * arp + c * arq;
        }
        for (std::size_t r = 0; r < k; ++r) {
          const double apr = s[p * k + r];
          const double aqr = s[q * k + r];
          s[p * k + r] = c * apr - sn * aqr;
          s[q * k + r] = sn * apr + c * aqr;
        }
      }
    }
  }
  std::vector<double> ev(k);
  for (std::size_t i = 0; i < k; ++i) ev[i] = s[i * k + i];
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

// x + mu * A^T (b - A x) with A given as nested rows; plain loops only.
inline std::vector<double> gradient_step_loops(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                                               const std::vector<double>& x, double mu) {
  const std::size_t m = a.size();
  const std::size_t n = x.size();
  std::vector<double> resid(m);
  for (std::size_t i = 0; i < m; ++i) {
    long double s = 0.0L;
    for (std::size_t j = 0; j < n; ++j) s += static_cast<long double>(a[i][j]) * x[j];
    resid[i] = b[i] - static_cast<double>(s);
  }
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < m; ++i) s += static_cast<long double>(a[i][j]) * resid[i];
    out[j] = x[j] + mu * static_cast<double>(s);
  }
  return out;
}

}  // namespace lpit::oracle
