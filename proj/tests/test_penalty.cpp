#include <gtest/gtest.h>

#include <cmath>

#include "lpit/penalty.hpp"
#include "lpit/rng.hpp"

using namespace lpit;

namespace {

double lp_sum(const Vector& x, double p) {
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v), p);
  return s;
}

}  // namespace

TEST(ModifiedPenalty, Examples) {
  EXPECT_EQ(modified_penalty(Vector{0, 0, 0}, {0.3, {0.1, 1.0, 5.0}}), 0.0);
  EXPECT_NEAR(modified_penalty(Vector{1}, {0.5, {1e-9}}), 1.0, 1e-6);
  // 2/sqrt(2.5) + 1/sqrt(1.5), evaluated at 40 digits
  EXPECT_NEAR(modified_penalty(Vector{2, -1}, {0.5, {0.5, 0.5}}), 2.0814076449950778, 1e-15);
}

TEST(ModifiedPenalty, DimensionMismatch) {
  EXPECT_THROW(modified_penalty(Vector{1, 2}, {0.5, {1.0}}), ContractViolation);
}

TEST(PenaltyParams, Validation) {
  EXPECT_THROW((PenaltyParams{1.0, {1.0}}.validate()), ContractViolation);
  EXPECT_THROW((PenaltyParams{0.0, {1.0}}.validate()), ContractViolation);
  EXPECT_THROW((PenaltyParams{0.5, {0.0}}.validate()), ContractViolation);
  EXPECT_NO_THROW((PenaltyParams{0.5, {1e-3}}.validate()));
}

TEST(ModifiedPenalty, UpperBoundedByLpSum) {
  Xoshiro256 rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(10);
    Vector x(n), eps(n);
    for (auto& v : x) v = 5.0 * rng.normal();
    for (auto& e : eps) e = std::exp(-8.0 + 10.0 * rng.uniform());
    const double p = 0.01 + 0.98 * rng.uniform();
    EXPECT_LE(modified_penalty(x, {p, eps}), lp_sum(x, p) * (1.0 + 1e-14));
  }
}

TEST(ModifiedPenalty, InterpolatesLpNormAsEpsilonShrinks) {
  Xoshiro256 rng(8);
  for (double p : {0.3, 0.5, 0.7}) {
    for (int trial = 0; trial < 20; ++trial) {
      Vector x(16);
      for (auto& v : x) v = (rng.uniform() < 0.5 ? -1 : 1) * (0.1 + 9.9 * rng.uniform());
      const double target = lp_sum(x, p);
      double prev_gap = INFINITY;
      for (int k = 2; k <= 8; ++k) {
        const double gap = target - modified_penalty(x, {p, Vector(x.size(), std::pow(10.0, -k))});
        EXPECT_GE(gap, 0.0);
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
      }
      EXPECT_LT(prev_gap / target, 1e-3);
    }
  }
}

TEST(ModifiedPenalty, StrictlyDecreasingInEachEpsilon) {
  Xoshiro256 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    Vector x{rng.normal(), rng.normal(), rng.normal()};
    Vector eps{0.1 + rng.uniform(), 0.1 + rng.uniform(), 0.1 + rng.uniform()};
    const double p = 0.05 + 0.9 * rng.uniform();
    const double base = modified_penalty(x, {p, eps});
    const auto i = static_cast<std::size_t>(rng.below(3));
    eps[i] *= 1.5;
    EXPECT_LT(modified_penalty(x, {p, eps}), base);
  }
}

TEST(ObjectiveH1, Examples) {
  const DenseMatrix one(1, 1, {1.0});
  EXPECT_EQ(objective_h1(DenseMatrix(2, 3, {1, 2, 3, 4, 5, 6}), Vector{0, 0}, Vector{0, 0, 0}, 1.0,
                         {0.5, {1, 1, 1}}),
            0.0);
  EXPECT_DOUBLE_EQ(objective_h1(one, Vector{1}, Vector{0}, 2.0, {0.5, {1.0}}), 1.0);
  // 1 + 2 / sqrt(2)
  EXPECT_NEAR(objective_h1(one, Vector{0}, Vector{1}, 2.0, {0.5, {1.0}}), 2.4142135623730950, 1e-15);
  EXPECT_THROW(objective_h1(one, Vector{0, 1}, Vector{1}, 2.0, {0.5, {1.0}}), ContractViolation);
}

TEST(SurrogateH2, Examples) {
  const DenseMatrix one(1, 1, {1.0});
  EXPECT_DOUBLE_EQ(surrogate_h2(one, Vector{0}, Vector{1}, Vector{0}, 1.0, 0.5, {0.5, {1.0}}), 1.5);
  EXPECT_EQ(surrogate_h2(DenseMatrix(1, 2, {1, 2}), Vector{0}, Vector{0, 0}, Vector{0, 0}, 1.0, 0.5,
                         {0.5, {1.0, 1.0}}),
            0.0);
}

TEST(SurrogateH2, DiagonalEqualsScaledH1AndMajorizationGap) {
  Xoshiro256 rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + rng.below(5), n = m + 1 + rng.below(6);
    Vector entries(m * n);
    for (auto& e : entries) e = rng.normal();
    const DenseMatrix a(m, n, entries);
    Vector b(m), x(n), y(n), eps(n);
    for (auto& v : b) v = rng.normal();
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    for (auto& v : eps) v = 1e-3 + rng.uniform();
    const PenaltyParams pp{0.05 + 0.9 * rng.uniform(), eps};
    const double lambda = 0.01 + 2.0 * rng.uniform();
    const double mu = 0.99 / std::pow(spectral_norm(a), 2);

    const double h1 = objective_h1(a, b, x, lambda, pp);
    EXPECT_NEAR(surrogate_h2(a, b, x, x, lambda, mu, pp), mu * h1, 1e-10 * std::max(1.0, mu * h1));

    // H2(x,y) - mu||Ax-b||^2 - lambda mu anchored = ||x-y||^2 - mu||A(x-y)||^2 >= 0
    const double gap = surrogate_h2(a, b, x, y, lambda, mu, pp) - mu * residual_squared(a, b, x) -
                       lambda * mu * anchored_penalty(x, y, pp);
    EXPECT_GE(gap, -1e-12);
  }
}
