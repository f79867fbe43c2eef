#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lpit {

using Vector = std::vector<double>;

// Raised when a caller breaks an operation's precondition (shapes, ranges).
class ContractViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double e) { return std::isfinite(e); });
}

}  // namespace detail

// Row-major dense matrix. The spectral norm is cached after the first
// request; the cache is an idempotent atomic write, so a const matrix can be
// shared across worker threads.
class DenseMatrix {
public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    detail::require(rows > 0 && cols > 0, "DenseMatrix: dimensions must be positive");
  }

  DenseMatrix(std::size_t rows, std::size_t cols, Vector entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    detail::require(rows > 0 && cols > 0, "DenseMatrix: dimensions must be positive");
    detail::require(data_.size() == rows * cols,
                    "DenseMatrix: entry count " + std::to_string(data_.size()) +
                        " != rows*cols " + std::to_string(rows * cols));
    detail::require(detail::all_finite(data_), "DenseMatrix: entries must be finite");
  }

  DenseMatrix(const DenseMatrix& o)
      : rows_(o.rows_), cols_(o.cols_), data_(o.data_),
        norm_cache_(o.norm_cache_.load(std::memory_order_relaxed)) {}
  DenseMatrix(DenseMatrix&& o) noexcept
      : rows_(o.rows_), cols_(o.cols_), data_(std::move(o.data_)),
        norm_cache_(o.norm_cache_.load(std::memory_order_relaxed)) {}
  DenseMatrix& operator=(DenseMatrix o) noexcept {
    rows_ = o.rows_;
    cols_ = o.cols_;
    data_.swap(o.data_);
    norm_cache_.store(o.norm_cache_.load(std::memory_order_relaxed), std::memory_order_relaxed);
    return *this;
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) a.data_[i * n + i] = 1.0;
    return a;
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  // Mutable element access drops the cached norm.
  double& at(std::size_t i, std::size_t j) {
    invalidate();
    return data_[i * cols_ + j];
  }

  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  [[nodiscard]] std::span<const double> entries() const noexcept { return data_; }

  [[nodiscard]] bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](double e) { return e == 0.0; });
  }

  // Negative means "not computed yet".
  [[nodiscard]] double cached_spectral_norm() const noexcept {
    return norm_cache_.load(std::memory_order_acquire);
  }
  void cache_spectral_norm(double v) const noexcept { norm_cache_.store(v, std::memory_order_release); }

private:
  void invalidate() noexcept { norm_cache_.store(-1.0, std::memory_order_relaxed); }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
  mutable std::atomic<double> norm_cache_{-1.0};
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  detail::require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2_squared(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(norm2_squared(a)); }

inline double distance2(std::span<const double> a, std::span<const double> b) {
  detail::require(a.size() == b.size(), "distance2: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline void matvec_into(const DenseMatrix& a, std::span<const double> x, std::span<double> out) {
  detail::require(a.cols() == x.size(), "matvec: A.cols=" + std::to_string(a.cols()) +
                                            " but length(x)=" + std::to_string(x.size()));
  detail::require(out.size() == a.rows(), "matvec: output length mismatch");
  const std::size_t n = a.cols();
  const double* p = a.entries().data();
  for (std::size_t i = 0; i < a.rows(); ++i, p += n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += p[j] * x[j];
    out[i] = s;
  }
}

inline Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  Vector out(a.rows());
  matvec_into(a, x, out);
  return out;
}

inline void matvec_transpose_into(const DenseMatrix& a, std::span<const double> y, std::span<double> out) {
  detail::require(a.rows() == y.size(), "matvec_transpose: A.rows=" + std::to_string(a.rows()) +
                                            " but length(y)=" + std::to_string(y.size()));
  detail::require(out.size() == a.cols(), "matvec_transpose: output length mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t n = a.cols();
  const double* p = a.entries().data();
  for (std::size_t i = 0; i < a.rows(); ++i, p += n) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) out[j] += yi * p[j];
  }
}

inline Vector matvec_transpose(const DenseMatrix& a, std::span<const double> y) {
  Vector out(a.cols());
  matvec_transpose_into(a, y, out);
  return out;
}

// Largest singular value by power iteration on the smaller Gram matrix
// (A A^T when rows <= cols, else A^T A). Stops once successive Rayleigh
// quotients agree to 1e-12 relative; the start vector comes from a fixed
// seed so repeated calls give the same value. Result is cached on `a`.
inline double spectral_norm(const DenseMatrix& a, std::size_t max_iterations = 10000) {
  if (const double c = a.cached_spectral_norm(); c >= 0.0) return c;
  if (a.is_zero()) {
    a.cache_spectral_norm(0.0);
    return 0.0;
  }

  const bool wide = a.rows() <= a.cols();
  const std::size_t k = wide ? a.rows() : a.cols();
  Vector gram(k * k, 0.0);
  if (wide) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto ri = a.row(i);
      for (std::size_t j = i; j < k; ++j) {
        const double g = dot(ri, a.row(j));
        gram[i * k + j] = g;
        gram[j * k + i] = g;
      }
    }
  } else {
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const auto row = a.row(r);
      for (std::size_t i = 0; i < k; ++i) {
        const double ri = row[i];
        if (ri == 0.0) continue;
        for (std::size_t j = 0; j < k; ++j) gram[i * k + j] += ri * row[j];
      }
    }
  }

  // Fixed pseudo-random start (splitmix64 stream) so every coordinate
  // direction has a nonzero component almost surely.
  Vector v(k);
  std::uint64_t state = 0x9E3779B97F4A7C15ULL;
  for (auto& e : v) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    e = static_cast<double>(z >> 11) * 0x1.0p-53 + 0.25;
  }
  double nv = norm2(v);
  for (auto& e : v) e /= nv;

  Vector w(k);
  double rq = 0.0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0.0;
      const double* g = gram.data() + i * k;
      for (std::size_t j = 0; j < k; ++j) s += g[j] * v[j];
      w[i] = s;
    }
    const double next = dot(v, w);  // Rayleigh quotient, v is unit
    nv = norm2(w);
    if (nv == 0.0) break;
    for (std::size_t i = 0; i < k; ++i) v[i] = w[i] / nv;
    const bool done = it > 0 && std::abs(next - rq) <= 1e-12 * next;
    rq = next;
    if (done) break;
  }
  const double sigma = std::sqrt(std::max(rq, 0.0));
  a.cache_spectral_norm(sigma);
  return sigma;
}

// Number of nonzero entries.
inline std::size_t support_size(std::span<const double> x) noexcept {
  std::size_t s = 0;
  for (double v : x) s += (v != 0.0);
  return s;
}

// |x| sorted in nonincreasing order; equal magnitudes keep input order.
inline Vector nonincreasing_rearrangement(std::span<const double> x) {
  Vector out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [](double v) { return std::abs(v); });
  std::stable_sort(out.begin(), out.end(), std::greater<>());
  return out;
}

// The k-th entry (0-based) of the nonincreasing rearrangement of |x|,
// without sorting the whole vector.
inline double kth_largest_magnitude(std::span<const double> x, std::size_t k) {
  detail::require(k < x.size(), "kth_largest_magnitude: index " + std::to_string(k) +
                                    " out of range for length " + std::to_string(x.size()));
  Vector mags(x.size());
  std::transform(x.begin(), x.end(), mags.begin(), [](double v) { return std::abs(v); });
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(k), mags.end(),
                   std::greater<>());
  return mags[k];
}

}  // namespace lpit
