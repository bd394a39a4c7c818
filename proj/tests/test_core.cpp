#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sirvar/core.hpp"
#include "sirvar/parallel.hpp"

namespace sirvar {
namespace {

TEST(SirParams, RejectsOutOfRangeFields) {
  EXPECT_THROW(SirParams(0, 1.0, 0.5, 1.0, 0), InvalidArgument);
  EXPECT_THROW(SirParams(10, -0.1, 0.5, 1.0, 0), InvalidArgument);
  EXPECT_THROW(SirParams(10, 1.0, 1.5, 1.0, 0), InvalidArgument);
  EXPECT_THROW(SirParams(10, 1.0, -0.01, 1.0, 0), InvalidArgument);
  EXPECT_THROW(SirParams(10, 1.0, 0.5, 0.0, 0), InvalidArgument);
  EXPECT_THROW(SirParams(10, 1.0, 0.5, -1.0, 0), InvalidArgument);
  EXPECT_THROW(SirParams(10, 1.0, 0.5, 1.0, 11), InvalidArgument);
  EXPECT_THROW(SirParams(10, 1.0, 0.5, 1.0, -1), InvalidArgument);
  EXPECT_THROW(SirParams(10, NAN, 0.5, 1.0, 0), InvalidArgument);
  EXPECT_THROW(SirParams(10, 1.0, 0.5, INFINITY, 0), InvalidArgument);
  EXPECT_NO_THROW(SirParams(1, 0.0, 0.0, 1e-9, 1));
  EXPECT_NO_THROW(SirParams(1, 0.0, 1.0, 1.0, 0));
}

TEST(DerivedRates, UnitCase) {
  const Rates r = derived_rates(SirParams(1, 1.0, 1.0, 1.0, 0));
  EXPECT_DOUBLE_EQ(r.transmission, 1.0);
  EXPECT_DOUBLE_EQ(r.recovery, 1.0);
}

TEST(DerivedRates, ReferencePopulation) {
  const Rates r = derived_rates(SirParams(52910, 5.65, 0.065, 4.2, 1));
  EXPECT_NEAR(r.transmission, 5.65 * 0.065 / 52910.0, 1e-18);
  EXPECT_NEAR(r.transmission, 6.941e-6, 0.001e-6);
  EXPECT_NEAR(r.recovery, 0.2381, 1e-4);
}

TEST(DerivedRates, NoContactNoTransmission) {
  const Rates r = derived_rates(SirParams(500, 0.0, 0.3, 2.5, 3));
  EXPECT_EQ(r.transmission, 0.0);
  EXPECT_DOUBLE_EQ(r.recovery, 1.0 / 2.5);
}

TEST(DerivedRates, Homogeneity) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> c(0.0, 20.0), p(0.0, 1.0), d(0.1, 20.0);
  std::uniform_int_distribution<std::int64_t> n(1, 1'000'000);
  for (int i = 0; i < 500; ++i) {
    const SirParams base(n(gen), c(gen), p(gen), d(gen), 0);
    const double a = derived_rates(base).transmission;
    EXPECT_DOUBLE_EQ(derived_rates(base.with_population(2 * base.population())).transmission,
                     a / 2);
    EXPECT_DOUBLE_EQ(derived_rates(base.with_contact_rate(2 * base.contact_rate())).transmission,
                     2 * a);
    EXPECT_EQ(derived_rates(base).transmission, a);  // deterministic
  }
}

// Independent route to the final size: damped fixed-point iteration of
// z <- 1 - exp(-r0 z) started from z = 1.
double final_size_fixed_point(double r0) {
  double z = 1.0;
  for (int i = 0; i < 200000; ++i) z = 0.5 * z + 0.5 * (1.0 - std::exp(-r0 * z));
  return z;
}

TEST(FinalSize, NewtonMatchesFixedPoint) {
  for (double r0 : {1.05, 1.2, 1.5436, 2.0, 3.0, 8.0}) {
    EXPECT_NEAR(final_size(r0), final_size_fixed_point(r0), 1e-10) << "r0=" << r0;
  }
  EXPECT_EQ(final_size(0.9), 0.0);
  EXPECT_EQ(final_size(1.0), 0.0);
}

TEST(FinalSize, CalibratedContactRate) {
  const double r0 = r0_for_attack_rate(0.61);
  EXPECT_NEAR(r0, 1.544, 1e-3);
  EXPECT_NEAR(final_size(r0), 0.61, 1e-12);
  // Bisection on the fixed-point final size as a second route.
  double lo = 1.01, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (final_size_fixed_point(mid) < 0.61 ? lo : hi) = mid;
  }
  EXPECT_NEAR(r0, lo, 1e-9);

  const double c = calibrate_contact_rate(0.61, 0.065, 4.2);
  EXPECT_NEAR(c, 5.65, 0.01);
  EXPECT_NEAR(basic_reproduction_number(defaults::params()), r0, 1e-12);
  EXPECT_THROW(r0_for_attack_rate(1.0), InvalidArgument);
  EXPECT_THROW(r0_for_attack_rate(0.0), InvalidArgument);
}

TEST(WeeklySeries, Invariants) {
  EXPECT_THROW(WeeklySeries(std::vector<double>{}), InvalidArgument);
  EXPECT_THROW(WeeklySeries({1.0, -1.0}), InvalidArgument);
  EXPECT_THROW(WeeklySeries({1.0, NAN}), InvalidArgument);
  const WeeklySeries s({1.0, 2.0, 3.0});
  EXPECT_EQ(s.weeks(), 3u);
  EXPECT_EQ(s[2], 3.0);
}

TEST(EnsembleResult, Invariants) {
  EXPECT_THROW(EnsembleResult(std::vector<WeeklySeries>{}), EmptyEnsemble);
  EXPECT_THROW(EnsembleResult({WeeklySeries({1.0}), WeeklySeries({1.0, 2.0})}), LengthMismatch);
  const EnsembleResult e({WeeklySeries({1.0, 2.0}), WeeklySeries({3.0, 4.0})});
  EXPECT_EQ(e.replicates(), 2u);
  EXPECT_EQ(e.weeks(), 2u);
  EXPECT_EQ(e.column(1), (std::vector<double>{2.0, 4.0}));
}

TEST(ParallelFor, CoversEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  try {
    parallel_for(100, 3, [](std::size_t i) {
      if (i == 17 || i == 60) throw ReplicateError(i, "boom");
    });
    FAIL() << "expected an exception";
  } catch (const ReplicateError& e) {
    EXPECT_EQ(e.replicate(), 17u);
  }
}

}  // namespace
}  // namespace sirvar
