#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"
#include "network.hpp"
#include "parallel.hpp"
#include "rng.hpp"

// Agent-based SIR on a contact network, advanced in synchronous daily steps.
//
// Each day every agent that was Infectious at the start of the day draws
// Poisson(contact_rate) contacts, each a uniform pick (with replacement) from
// its neighbours, and infects a Susceptible contact with probability
// infection_prob. Newly infected agents become Infectious for the next day.
// Afterwards, agents that were Infectious at the start of the day lose one
// day of illness and recover once nothing remains.

namespace sirvar::abm {

enum class Status : std::uint8_t { kSusceptible, kInfectious, kRecovered };

struct AgentState {
  Status status = Status::kSusceptible;
  double days_remaining = 0.0;  // > 0 iff Infectious

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

enum class RecoveryModel {
  // Exactly illness_duration days of illness; with whole-day steps an
  // agent stays infectious for ceil(illness_duration) days.
  kFixedDuration,
  // Whole-day illness length drawn from a geometric law with mean
  // illness_duration (daily recovery probability 1/D), the discrete
  // counterpart of the ODE's b*I outflow.
  kExponential,
};

inline const char* to_string(RecoveryModel m) noexcept {
  return m == RecoveryModel::kFixedDuration ? "fixed" : "exponential";
}

struct AbmOptions {
  RecoveryModel recovery = RecoveryModel::kFixedDuration;
};

inline double illness_length(const SirParams& params, RecoveryModel model, Xoshiro256& rng) {
  if (model == RecoveryModel::kFixedDuration) return params.illness_duration();
  const double p = std::min(1.0, 1.0 / params.illness_duration());
  return static_cast<double>(geometric_trials(rng, p));
}

struct StepResult {
  std::size_t new_infections = 0;
};

/// Advances every agent by one day in place.
inline StepResult step_day(std::span<AgentState> agents, const net::NetworkTopology& topo,
                           const SirParams& params, Xoshiro256& rng,
                           const AbmOptions& options = {}) {
  if (agents.size() != topo.n())
    throw PopulationMismatch("agent count does not match network size");

  const PoissonSampler contacts(params.contact_rate());
  const double p = params.infection_prob();

  std::vector<std::uint32_t> spreaders;
  for (std::size_t i = 0; i < agents.size(); ++i)
    if (agents[i].status == Status::kInfectious) spreaders.push_back(static_cast<std::uint32_t>(i));

  std::vector<std::uint32_t> infected_today;
  for (std::uint32_t i : spreaders) {
    const auto& nbrs = topo.neighbors(i);
    const std::uint64_t count = contacts(rng);
    if (nbrs.empty()) continue;
    for (std::uint64_t c = 0; c < count; ++c) {
      const std::uint32_t j = nbrs[rng.below(nbrs.size())];
      if (agents[j].status != Status::kSusceptible) continue;
      if (rng.uniform() < p) {
        // Marked Infectious right away so repeat contacts cannot double count;
        // the spreader list above was frozen at the start of the day.
        agents[j].status = Status::kInfectious;
        infected_today.push_back(j);
      }
    }
  }

  for (std::uint32_t i : spreaders) {
    AgentState& a = agents[i];
    a.days_remaining -= 1.0;
    if (a.days_remaining <= 0.0) {
      a.days_remaining = 0.0;
      a.status = Status::kRecovered;
    }
  }
  for (std::uint32_t j : infected_today)
    agents[j].days_remaining = illness_length(params, options.recovery, rng);

  return {infected_today.size()};
}

struct Counts {
  std::size_t s = 0;
  std::size_t i = 0;
  std::size_t r = 0;
};

inline Counts count_states(std::span<const AgentState> agents) noexcept {
  Counts c;
  for (const auto& a : agents) {
    switch (a.status) {
      case Status::kSusceptible: ++c.s; break;
      case Status::kInfectious: ++c.i; break;
      case Status::kRecovered: ++c.r; break;
    }
  }
  return c;
}

/// Initial population: `initial_infected` distinct agents chosen uniformly
/// at random are Infectious, everyone else Susceptible.
inline std::vector<AgentState> seed_agents(const SirParams& params, std::size_t n,
                                           Xoshiro256& rng, const AbmOptions& options = {}) {
  std::vector<AgentState> agents(n);
  const auto k = static_cast<std::size_t>(params.initial_infected());
  // Partial Fisher-Yates over a virtual identity permutation.
  std::vector<std::uint32_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
  for (std::size_t x = 0; x < k; ++x) {
    const std::size_t y = x + rng.below(n - x);
    std::swap(perm[x], perm[y]);
    agents[perm[x]] = {Status::kInfectious, illness_length(params, options.recovery, rng)};
  }
  return agents;
}

/// Optional per-day hook for tests and diagnostics: (day, agents).
using DayObserver = std::function<void(int, std::span<const AgentState>)>;

inline WeeklySeries run_abm(const SirParams& params, const net::NetworkTopology& topo,
                            int weeks, std::uint64_t seed, const AbmOptions& options = {},
                            const DayObserver& observer = {}) {
  if (weeks < 1) throw InvalidArgument("weeks must be >= 1");
  if (static_cast<std::size_t>(params.population()) != topo.n())
    throw PopulationMismatch("population " + std::to_string(params.population()) +
                             " does not match network size " + std::to_string(topo.n()));

  Xoshiro256 rng(seed);
  std::vector<AgentState> agents = seed_agents(params, topo.n(), rng, options);
  if (observer) observer(0, agents);

  std::vector<double> weekly;
  weekly.reserve(static_cast<std::size_t>(weeks));
  std::size_t infectious = static_cast<std::size_t>(params.initial_infected());
  for (int day = 1; day <= 7 * weeks; ++day) {
    if (infectious > 0) {
      step_day(agents, topo, params, rng, options);
      infectious = count_states(agents).i;
    }
    if (observer) observer(day, agents);
    if (day % 7 == 0) weekly.push_back(static_cast<double>(infectious));
  }
  return WeeklySeries(std::move(weekly));
}

struct EnsembleOptions {
  int weeks = defaults::kWeeks;
  std::size_t replicates = defaults::kReplicates;
  std::uint64_t master_seed = 0;
  bool reuse_network = false;
  unsigned threads = default_thread_count();
  AbmOptions abm;
};

// Replicate index used to derive the shared topology seed under reuse.
inline constexpr std::uint64_t kSharedTopologyReplicate = ~std::uint64_t{0};

inline std::uint64_t topology_seed(std::uint64_t master, std::size_t replicate, bool reuse) {
  return derive_seed(master, reuse ? kSharedTopologyReplicate : replicate, Stream::kTopology);
}

inline std::uint64_t simulation_seed(std::uint64_t master, std::size_t replicate) {
  return derive_seed(master, replicate, Stream::kSimulation);
}

/// Independent topology, index case and simulation stream per replicate,
/// all derived from (master_seed, replicate index).
inline EnsembleResult run_abm_ensemble(const SirParams& params, int k, double p_rewire,
                                       const EnsembleOptions& opts) {
  if (opts.replicates < 1) throw InvalidArgument("replicates must be >= 1");
  const auto n = static_cast<std::size_t>(params.population());

  std::optional<net::NetworkTopology> shared;
  if (opts.reuse_network)
    shared = net::build_small_world(n, k, p_rewire, topology_seed(opts.master_seed, 0, true));
  else
    net::check_small_world_args(n, k, p_rewire);

  std::vector<std::optional<WeeklySeries>> slots(opts.replicates);
  parallel_for(opts.replicates, opts.threads, [&](std::size_t r) {
    try {
      const std::uint64_t sim = simulation_seed(opts.master_seed, r);
      if (shared) {
        slots[r] = run_abm(params, *shared, opts.weeks, sim, opts.abm);
      } else {
        const auto topo = net::build_small_world(
            n, k, p_rewire, topology_seed(opts.master_seed, r, false));
        slots[r] = run_abm(params, topo, opts.weeks, sim, opts.abm);
      }
    } catch (const std::exception& e) {
      throw ReplicateError(r, e.what());
    }
  });

  std::vector<WeeklySeries> series;
  series.reserve(opts.replicates);
  for (auto& s : slots) series.push_back(std::move(*s));
  return EnsembleResult(std::move(series));
}

}  // namespace sirvar::abm
