#include <cmath>

#include <gtest/gtest.h>

#include "sirvar/abm.hpp"

namespace sirvar::abm {
namespace {

SirParams small_params(std::int64_t n, double c, double p, double d, std::int64_t i0) {
  return SirParams(n, c, p, d, i0);
}

TEST(StepDay, NoInfectiousIsNoOp) {
  const auto topo = net::build_small_world(20, 4, 0.2, 1);
  std::vector<AgentState> agents(20);
  agents[3].status = Status::kRecovered;
  const auto before = agents;
  Xoshiro256 rng(1);
  const auto res = step_day(agents, topo, small_params(20, 5.0, 1.0, 3.0, 0), rng);
  EXPECT_EQ(res.new_infections, 0u);
  EXPECT_EQ(agents, before);
}

TEST(StepDay, SizeMismatch) {
  const auto topo = net::build_small_world(20, 4, 0.2, 1);
  std::vector<AgentState> agents(19);
  Xoshiro256 rng(1);
  EXPECT_THROW(step_day(agents, topo, small_params(20, 5.0, 1.0, 3.0, 0), rng),
               PopulationMismatch);
}

// One spreader on a complete graph: each contact hits a uniform neighbour,
// so the number of distinct susceptible neighbours infected has mean
// k_s * (1 - exp(-c p / k)).
double mean_new_infections(std::size_t recovered_neighbours, double c, double p, int trials) {
  const std::size_t n = 11;
  const std::size_t k = n - 1;
  const auto topo = net::build_small_world(n, static_cast<int>(k), 0.0, 0);
  const SirParams params(static_cast<std::int64_t>(n), c, p, 4.2, 1);
  Xoshiro256 rng(123);
  double total = 0;
  for (int t = 0; t < trials; ++t) {
    std::vector<AgentState> agents(n);
    agents[0] = {Status::kInfectious, 4.2};
    for (std::size_t r = 1; r <= recovered_neighbours; ++r) agents[r].status = Status::kRecovered;
    total += static_cast<double>(step_day(agents, topo, params, rng).new_infections);
  }
  return total / trials;
}

TEST(StepDay, ExpectedInfectionsFromOneSpreader) {
  const double c = 5.654, p = 0.5, k = 10;
  const double expected_all = k * (1 - std::exp(-c * p / k));
  EXPECT_NEAR(mean_new_infections(0, c, p, 10000), expected_all, 0.05);
  // Half the neighbourhood already recovered.
  EXPECT_NEAR(mean_new_infections(5, c, p, 10000), expected_all / 2, 0.04);
  // Small c*p/k: essentially c * p * susceptible fraction.
  EXPECT_NEAR(mean_new_infections(0, 5.654, 0.065, 10000), 5.654 * 0.065, 0.03);
}

TEST(StepDay, FixedDurationLastsCeilDays) {
  for (double d : {1.0, 3.0, 4.2}) {
    const auto topo = net::build_small_world(10, 2, 0.0, 0);
    const SirParams params(10, 5.0, 0.0, d, 1);
    std::vector<AgentState> agents(10);
    agents[0] = {Status::kInfectious, d};
    Xoshiro256 rng(0);
    int days = 0;
    while (agents[0].status == Status::kInfectious) {
      step_day(agents, topo, params, rng);
      ++days;
    }
    EXPECT_EQ(days, static_cast<int>(std::ceil(d))) << "D=" << d;
    EXPECT_EQ(agents[0].status, Status::kRecovered);
  }
}

TEST(IllnessLength, ExponentialMeanMatchesDuration) {
  const SirParams params = defaults::params();
  Xoshiro256 rng(5);
  double s = 0;
  for (int i = 0; i < 100000; ++i) s += illness_length(params, RecoveryModel::kExponential, rng);
  EXPECT_NEAR(s / 100000, 4.2, 0.05);
  EXPECT_EQ(illness_length(params, RecoveryModel::kFixedDuration, rng), 4.2);
}

TEST(SeedAgents, DistinctIndexCases) {
  Xoshiro256 rng(2);
  const auto agents = seed_agents(SirParams(100, 1.0, 0.1, 2.0, 37), 100, rng);
  EXPECT_EQ(count_states(agents).i, 37u);
  EXPECT_EQ(count_states(agents).s, 63u);
}

TEST(RunAbm, NoIndexCaseNoEpidemic) {
  const auto topo = net::build_small_world(500, 10, 0.1, 0);
  const auto series = run_abm(SirParams(500, 5.0, 0.5, 4.2, 0), topo, 15, 1);
  for (double v : series.infected()) EXPECT_EQ(v, 0.0);
}

TEST(RunAbm, ZeroInfectionProbabilityDiesInWeekOne) {
  const auto topo = net::build_small_world(500, 10, 0.1, 0);
  const auto series = run_abm(SirParams(500, 5.0, 0.0, 4.2, 20), topo, 3, 1);
  for (double v : series.infected()) EXPECT_EQ(v, 0.0);
}

TEST(RunAbm, SaturatesWhenTransmissionIsCertain) {
  const auto topo = net::build_small_world(200, 20, 0.3, 2);
  const SirParams params(200, 40.0, 1.0, 3.0, 1);
  Counts last;
  run_abm(params, topo, 10, 3, {}, [&](int, std::span<const AgentState> a) { last = count_states(a); });
  EXPECT_EQ(last.r, 200u);
  EXPECT_EQ(last.i, 0u);
}

TEST(RunAbm, ConservationAndMonotoneCompartments) {
  const std::size_t n = 3000;
  const auto topo = net::build_small_world(n, 10, 0.1, 4);
  const SirParams params(static_cast<std::int64_t>(n), 8.0, 0.1, 4.2, 5);
  Counts prev{n, 0, 0};
  int checked = 0;
  run_abm(params, topo, 15, 9, {}, [&](int day, std::span<const AgentState> a) {
    const Counts c = count_states(a);
    ASSERT_EQ(c.s + c.i + c.r, n);
    if (day > 0) {
      ASSERT_LE(c.s, prev.s);
      ASSERT_GE(c.r, prev.r);
    }
    prev = c;
    ++checked;
  });
  EXPECT_EQ(checked, 15 * 7 + 1);
}

TEST(RunAbm, WeeklyValuesAreEndOfWeekPrevalence) {
  const std::size_t n = 1000;
  const auto topo = net::build_small_world(n, 10, 0.1, 4);
  const SirParams params(static_cast<std::int64_t>(n), 8.0, 0.1, 4.2, 5);
  std::vector<double> daily;
  const auto weekly = run_abm(params, topo, 4, 11, {}, [&](int, std::span<const AgentState> a) {
    daily.push_back(static_cast<double>(count_states(a).i));
  });
  for (std::size_t w = 0; w < 4; ++w) EXPECT_EQ(weekly[w], daily[7 * (w + 1)]);
}

TEST(RunAbm, Deterministic) {
  const auto topo = net::build_small_world(2000, 10, 0.1, 7);
  const SirParams params(2000, 8.0, 0.1, 4.2, 3);
  EXPECT_EQ(run_abm(params, topo, 15, 5), run_abm(params, topo, 15, 5));
}

TEST(RunAbm, PopulationMismatch) {
  const auto topo = net::build_small_world(100, 10, 0.1, 7);
  EXPECT_THROW(run_abm(SirParams(101, 5.0, 0.1, 4.2, 1), topo, 15, 0), PopulationMismatch);
  EXPECT_THROW(run_abm(SirParams(100, 5.0, 0.1, 4.2, 1), topo, 0, 0), InvalidArgument);
}

TEST(RunAbm, EpidemicEndsWithinAYear) {
  const auto topo = net::build_small_world(2000, 10, 0.1, 8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto series = run_abm(SirParams(2000, 8.0, 0.1, 4.2, 5), topo, 52, seed);
    EXPECT_EQ(series[51], 0.0) << "seed " << seed;
  }
}

TEST(Ensemble, SingleReplicateMatchesManualRun) {
  const SirParams params(3000, 8.0, 0.1, 4.2, 2);
  EnsembleOptions opts;
  opts.replicates = 1;
  opts.master_seed = 21;
  opts.threads = 1;
  const auto e = run_abm_ensemble(params, 10, 0.1, opts);
  const auto topo = net::build_small_world(3000, 10, 0.1, topology_seed(21, 0, false));
  EXPECT_EQ(e[0], run_abm(params, topo, 15, simulation_seed(21, 0)));
}

TEST(Ensemble, ReuseSharesOneTopology) {
  const SirParams params(3000, 8.0, 0.1, 4.2, 2);
  EnsembleOptions opts;
  opts.replicates = 4;
  opts.master_seed = 5;
  opts.reuse_network = true;
  const auto e = run_abm_ensemble(params, 10, 0.1, opts);
  const auto topo = net::build_small_world(3000, 10, 0.1, topology_seed(5, 0, true));
  for (std::size_t r = 0; r < 4; ++r)
    EXPECT_EQ(e[r], run_abm(params, topo, 15, simulation_seed(5, r)));

  opts.reuse_network = false;
  EXPECT_NE(run_abm_ensemble(params, 10, 0.1, opts), e);
}

TEST(Ensemble, ThreadCountDoesNotChangeResults) {
  const SirParams params(3000, 8.0, 0.1, 4.2, 2);
  EnsembleOptions opts;
  opts.replicates = 12;
  opts.threads = 1;
  const auto one = run_abm_ensemble(params, 10, 0.1, opts);
  opts.threads = 6;
  EXPECT_EQ(run_abm_ensemble(params, 10, 0.1, opts), one);
}

TEST(Ensemble, ArgumentErrors) {
  EnsembleOptions opts;
  opts.replicates = 0;
  EXPECT_THROW(run_abm_ensemble(SirParams(100, 5.0, 0.1, 4.2, 1), 10, 0.1, opts),
               InvalidArgument);
  opts.replicates = 2;
  EXPECT_THROW(run_abm_ensemble(SirParams(100, 5.0, 0.1, 4.2, 1), 9, 0.1, opts),
               InvalidArgument);
}

}  // namespace
}  // namespace sirvar::abm
