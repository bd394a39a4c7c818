#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <optional>
#include <string>

#include "abm.hpp"
#include "core.hpp"
#include "data.hpp"
#include "monte_carlo.hpp"
#include "network.hpp"
#include "sd_model.hpp"
#include "stats.hpp"
#include "version.hpp"

// Run configurations as they appear in metadata.json, and their execution.
// A saved metadata block is enough to rebuild the RunConfig and replay the
// run bit-for-bit.

namespace sirvar::experiment {

using data::Json;

enum class Kind { kSd, kMonteCarlo, kAbm };

inline const char* command_name(Kind k) noexcept {
  switch (k) {
    case Kind::kSd: return "run-sd";
    case Kind::kMonteCarlo: return "run-mc";
    case Kind::kAbm: return "run-abm";
  }
  return "?";
}

inline Kind kind_from_command(const std::string& s) {
  if (s == "run-sd") return Kind::kSd;
  if (s == "run-mc") return Kind::kMonteCarlo;
  if (s == "run-abm") return Kind::kAbm;
  throw InvalidArgument("unknown command '" + s + "'");
}

struct RunConfig {
  Kind kind = Kind::kSd;

  std::int64_t population = defaults::kPopulation;
  double contact_rate = defaults::contact_rate();
  double infection_prob = defaults::kInfectionProb;
  double illness_duration = defaults::kIllnessDuration;
  std::int64_t initial_infected = defaults::kInitialInfected;

  int weeks = defaults::kWeeks;
  double dt = defaults::kDt;
  std::uint64_t seed = 0;
  unsigned threads = default_thread_count();  // not part of the result

  std::string scenario = "all";
  double sigma = defaults::kSigmaFraction;
  std::size_t replicates = defaults::kReplicates;

  int k = defaults::kMeanDegree;
  double p_rewire = defaults::kRewireProb;
  bool reuse_network = false;
  abm::RecoveryModel recovery = abm::RecoveryModel::kFixedDuration;

  SirParams params() const {
    return {population, contact_rate, infection_prob, illness_duration, initial_infected};
  }
  mc::VariationSpec variation() const {
    return mc::VariationSpec::scenario(scenario, sigma, replicates, seed);
  }
  abm::EnsembleOptions abm_options() const {
    abm::EnsembleOptions o;
    o.weeks = weeks;
    o.replicates = replicates;
    o.master_seed = seed;
    o.reuse_network = reuse_network;
    o.threads = threads;
    o.abm.recovery = recovery;
    return o;
  }

  /// Throws InvalidArgument for any out-of-range setting.
  void validate() const {
    (void)params();
    if (weeks < 1) throw InvalidArgument("weeks must be >= 1");
    if (!(dt > 0.0) || dt > 7.0 * weeks) throw InvalidArgument("dt must lie in (0, 7*weeks]");
    if (threads < 1) throw InvalidArgument("threads must be >= 1");
    if (kind == Kind::kMonteCarlo) (void)variation();
    if (kind == Kind::kAbm) {
      if (replicates < 1) throw InvalidArgument("replicates must be >= 1");
      net::check_small_world_args(static_cast<std::size_t>(population), k, p_rewire);
    }
  }
};

inline abm::RecoveryModel parse_recovery(const std::string& s) {
  if (s == "fixed") return abm::RecoveryModel::kFixedDuration;
  if (s == "exponential") return abm::RecoveryModel::kExponential;
  throw InvalidArgument("unknown recovery model '" + s + "' (expected fixed or exponential)");
}

inline Json config_json(const RunConfig& c) {
  Json j = {{"command", command_name(c.kind)},
            {"seed", c.seed},
            {"weeks", c.weeks},
            {"params",
             {{"population", c.population},
              {"contact_rate", c.contact_rate},
              {"infection_prob", c.infection_prob},
              {"illness_duration", c.illness_duration},
              {"initial_infected", c.initial_infected}}}};
  if (c.kind != Kind::kAbm) j["dt"] = c.dt;
  if (c.kind != Kind::kSd) j["replicates"] = c.replicates;
  if (c.kind == Kind::kMonteCarlo)
    j["variation"] = {{"scenario", c.scenario},
                      {"sigma_fraction", c.sigma},
                      {"distribution", "normal(mean=x, sd=sigma_fraction*x)"},
                      {"out_of_domain", "redraw up to 100 times, then clamp"}};
  if (c.kind == Kind::kAbm)
    j["network"] = {{"model", "watts-strogatz"},
                    {"k", c.k},
                    {"p_rewire", c.p_rewire},
                    {"reuse_network", c.reuse_network},
                    {"recovery", abm::to_string(c.recovery)}};
  return j;
}

inline RunConfig config_from_json(const Json& j) {
  RunConfig c;
  c.kind = kind_from_command(j.at("command").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.weeks = j.at("weeks").get<int>();
  const Json& p = j.at("params");
  c.population = p.at("population").get<std::int64_t>();
  c.contact_rate = p.at("contact_rate").get<double>();
  c.infection_prob = p.at("infection_prob").get<double>();
  c.illness_duration = p.at("illness_duration").get<double>();
  c.initial_infected = p.at("initial_infected").get<std::int64_t>();
  if (j.contains("dt")) c.dt = j["dt"].get<double>();
  if (j.contains("replicates")) c.replicates = j["replicates"].get<std::size_t>();
  if (j.contains("variation")) {
    c.scenario = j["variation"].at("scenario").get<std::string>();
    c.sigma = j["variation"].at("sigma_fraction").get<double>();
  }
  if (j.contains("network")) {
    const Json& n = j["network"];
    c.k = n.at("k").get<int>();
    c.p_rewire = n.at("p_rewire").get<double>();
    c.reuse_network = n.at("reuse_network").get<bool>();
    c.recovery = parse_recovery(n.at("recovery").get<std::string>());
  }
  return c;
}

/// Where each default comes from, so readers can tell observed values from
/// calibrated or chosen ones.
inline Json provenance_json(const RunConfig& c) {
  auto src = [](bool is_default, const char* origin) { return is_default ? origin : "user"; };
  Json j = {
      {"population", src(c.population == defaults::kPopulation, "dataset")},
      {"infection_prob", src(c.infection_prob == defaults::kInfectionProb, "dataset")},
      {"illness_duration", src(c.illness_duration == defaults::kIllnessDuration, "dataset")},
      {"contact_rate",
       src(c.contact_rate == defaults::contact_rate(),
           "calibrated: final-size relation, 61% attack rate with infection_prob 0.065 and "
           "illness_duration 4.2")},
      {"initial_infected",
       src(c.initial_infected == defaults::kInitialInfected, "chosen: single index case")},
      {"weeks", src(c.weeks == defaults::kWeeks, "dataset: 15-week reporting window")},
  };
  if (c.kind != Kind::kSd)
    j["replicates"] = src(c.replicates == defaults::kReplicates, "dataset: 100 per experiment");
  if (c.kind != Kind::kAbm) j["dt"] = src(c.dt == defaults::kDt, "chosen: RK4 step");
  if (c.kind == Kind::kMonteCarlo)
    j["sigma_fraction"] = src(c.sigma == defaults::kSigmaFraction, "chosen");
  if (c.kind == Kind::kAbm) {
    j["k"] = src(c.k == defaults::kMeanDegree, "chosen");
    j["p_rewire"] = src(c.p_rewire == defaults::kRewireProb, "chosen");
  }
  return j;
}

inline Json conventions_json() {
  return {{"weekly_sampling",
           "end-of-week prevalence: week w reports infected at day 7*w (w = 1..weeks)"},
          {"quantile_rule",
           "linear interpolation between order statistics at 1-based position 1+(n-1)q "
           "(Hyndman-Fan type 7)"},
          {"total_variation", "sum over weeks of q3 - q1"},
          {"transmission", "a = contact_rate*infection_prob/population, b = 1/illness_duration"},
          {"integrator", "classical RK4, fixed step dt (days)"},
          {"abm_step", "synchronous daily steps, Poisson(contact_rate) contacts per infectious "
                       "agent drawn uniformly with replacement from its neighbours"},
          {"seeding", "per-replicate streams derived from (seed, replicate, stream id) via "
                      "splitmix64; xoshiro256** generator"}};
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunOutput {
  std::optional<WeeklySeries> series;     // run-sd
  double final_recovered = 0.0;           // run-sd: R at the horizon
  std::optional<EnsembleResult> ensemble; // run-mc, run-abm
  std::size_t clamped_draws = 0;
  double elapsed_seconds = 0.0;
};

inline RunOutput execute(const RunConfig& c) {
  c.validate();
  RunOutput out;
  const auto t0 = std::chrono::steady_clock::now();
  switch (c.kind) {
    case Kind::kSd:
    {
      const double days = 7.0 * c.weeks;
      const auto traj = sd::integrate(c.params(), c.dt * std::ceil(days / c.dt - 1e-9), c.dt);
      out.series = sd::weekly_sample(traj, c.weeks);
      out.final_recovered = traj.states.back().r;
      break;
    }
    case Kind::kMonteCarlo: {
      auto run = mc::run_sd_ensemble_detailed(c.params(), c.variation(), c.weeks, c.dt, c.threads);
      out.ensemble = std::move(run.ensemble);
      out.clamped_draws = run.clamped_draws;
      break;
    }
    case Kind::kAbm:
      out.ensemble = abm::run_abm_ensemble(c.params(), c.k, c.p_rewire, c.abm_options());
      break;
  }
  out.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline Json metadata_json(const RunConfig& c, const RunOutput& out) {
  Json j = {{"tool", "sirvar"},
            {"version", kVersion},
            {"created_utc", utc_timestamp()},
            {"config", config_json(c)},
            {"provenance", provenance_json(c)},
            {"conventions", conventions_json()},
            {"threads", c.threads},
            {"elapsed_seconds", out.elapsed_seconds}};
  if (c.kind == Kind::kMonteCarlo) j["clamped_draws"] = out.clamped_draws;
  if (c.kind == Kind::kSd && out.series) {
    const auto& v = out.series->infected();
    std::size_t peak = 0;
    for (std::size_t w = 1; w < v.size(); ++w)
      if (v[w] > v[peak]) peak = w;
    j["peak_week"] = peak + 1;
    j["peak_infected"] = v[peak];
    j["final_recovered"] = out.final_recovered;
  }
  return j;
}

/// Executes and writes the run into `dir`. Returns the output for callers
/// that keep working with it.
inline RunOutput run_and_save(const RunConfig& c, const data::fs::path& dir, data::Format format) {
  RunOutput out = execute(c);
  Json meta = metadata_json(c, out);
  if (out.series) {
    data::save_series_run(*out.series, dir, format, std::move(meta));
  } else {
    data::save_ensemble(*out.ensemble, stats::weekly_summary(*out.ensemble), dir, format,
                        std::move(meta));
  }
  return out;
}

}  // namespace sirvar::experiment
