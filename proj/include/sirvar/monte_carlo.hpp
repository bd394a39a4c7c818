#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "sd_model.hpp"

namespace sirvar::mc {

/// Which SD inputs are perturbed, and how.
class VariationSpec {
 public:
  VariationSpec(bool vary_illness, bool vary_contact, bool vary_infection,
                double sigma_fraction = defaults::kSigmaFraction,
                std::size_t replicates = defaults::kReplicates,
                std::uint64_t master_seed = 0)
      : vary_illness_(vary_illness),
        vary_contact_(vary_contact),
        vary_infection_(vary_infection),
        sigma_fraction_(sigma_fraction),
        replicates_(replicates),
        master_seed_(master_seed) {
    if (!(vary_illness || vary_contact || vary_infection))
      throw InvalidArgument("at least one parameter must be varied");
    if (!(sigma_fraction > 0.0) || !std::isfinite(sigma_fraction))
      throw InvalidArgument("sigma_fraction must be > 0");
    if (replicates < 1) throw InvalidArgument("replicates must be >= 1");
  }

  /// Named scenarios: illness, contact, infection, all.
  static VariationSpec scenario(const std::string& name,
                                double sigma_fraction = defaults::kSigmaFraction,
                                std::size_t replicates = defaults::kReplicates,
                                std::uint64_t master_seed = 0) {
    if (name == "illness") return {true, false, false, sigma_fraction, replicates, master_seed};
    if (name == "contact") return {false, true, false, sigma_fraction, replicates, master_seed};
    if (name == "infection") return {false, false, true, sigma_fraction, replicates, master_seed};
    if (name == "all") return {true, true, true, sigma_fraction, replicates, master_seed};
    throw InvalidArgument("unknown variation scenario '" + name + "'");
  }

  bool vary_illness() const noexcept { return vary_illness_; }
  bool vary_contact() const noexcept { return vary_contact_; }
  bool vary_infection() const noexcept { return vary_infection_; }
  double sigma_fraction() const noexcept { return sigma_fraction_; }
  std::size_t replicates() const noexcept { return replicates_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }

  std::string scenario_name() const {
    if (vary_illness_ && vary_contact_ && vary_infection_) return "all";
    std::string out;
    auto add = [&](const char* s) { out += out.empty() ? s : std::string("+") + s; };
    if (vary_illness_) add("illness");
    if (vary_contact_) add("contact");
    if (vary_infection_) add("infection");
    return out;
  }

 private:
  bool vary_illness_;
  bool vary_contact_;
  bool vary_infection_;
  double sigma_fraction_;
  std::size_t replicates_;
  std::uint64_t master_seed_;
};

inline constexpr int kMaxRedraws = 100;
inline constexpr double kMinIllnessDuration = 1e-3;

struct SampledParams {
  SirParams params;
  std::size_t clamped = 0;  // parameters that exhausted their redraws
};

namespace detail {

// Draws from Normal(mean, sigma_fraction*mean) restricted to [lo, hi] by
// rejection; after kMaxRedraws failures the last draw is clamped.
inline double draw_truncated(std::uint64_t seed, double mean, double sigma_fraction,
                             double lo, double hi, bool& clamped) {
  Xoshiro256 rng(seed);
  const double sd = sigma_fraction * mean;
  double x = mean;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    x = mean + sd * standard_normal(rng);
    if (x >= lo && x <= hi) return x;
  }
  clamped = true;
  return x < lo ? lo : hi;
}

}  // namespace detail

inline SampledParams sample_params_checked(const SirParams& base, const VariationSpec& spec,
                                           std::size_t replicate_index) {
  if (replicate_index >= spec.replicates())
    throw InvalidArgument("replicate index out of range");
  const std::uint64_t master = spec.master_seed();
  const double sigma = spec.sigma_fraction();
  std::size_t clamped = 0;

  double duration = base.illness_duration();
  double contact = base.contact_rate();
  double prob = base.infection_prob();

  auto draw = [&](Stream stream, double mean, double lo, double hi) {
    bool c = false;
    const double v = detail::draw_truncated(derive_seed(master, replicate_index, stream),
                                            mean, sigma, lo, hi, c);
    clamped += c ? 1 : 0;
    return v;
  };

  if (spec.vary_illness())
    duration = draw(Stream::kIllnessDuration, duration, kMinIllnessDuration,
                    std::numeric_limits<double>::infinity());
  if (spec.vary_contact())
    contact = draw(Stream::kContactRate, contact, 0.0, std::numeric_limits<double>::infinity());
  if (spec.vary_infection()) prob = draw(Stream::kInfectionProb, prob, 0.0, 1.0);

  return {SirParams(base.population(), contact, prob, duration, base.initial_infected()),
          clamped};
}

inline SirParams sample_params(const SirParams& base, const VariationSpec& spec,
                               std::size_t replicate_index) {
  return sample_params_checked(base, spec, replicate_index).params;
}

struct SdEnsembleRun {
  EnsembleResult ensemble;
  std::vector<SirParams> sampled;
  std::size_t clamped_draws = 0;
};

/// One SD integration per replicate with freshly sampled parameters.
inline SdEnsembleRun run_sd_ensemble_detailed(const SirParams& base, const VariationSpec& spec,
                                              int weeks = defaults::kWeeks,
                                              double dt = defaults::kDt,
                                              unsigned threads = default_thread_count()) {
  const std::size_t n = spec.replicates();
  std::vector<std::optional<WeeklySeries>> slots(n);
  std::vector<std::optional<SirParams>> params(n);
  std::vector<std::size_t> clamped(n, 0);

  parallel_for(n, threads, [&](std::size_t r) {
    try {
      SampledParams s = sample_params_checked(base, spec, r);
      slots[r] = sd::run_weekly(s.params, weeks, dt);
      clamped[r] = s.clamped;
      params[r] = s.params;
    } catch (const ReplicateError&) {
      throw;
    } catch (const std::exception& e) {
      throw ReplicateError(r, e.what());
    }
  });

  SdEnsembleRun out;
  std::vector<WeeklySeries> series;
  series.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    series.push_back(std::move(*slots[r]));
    out.sampled.push_back(*params[r]);
    out.clamped_draws += clamped[r];
  }
  out.ensemble = EnsembleResult(std::move(series));
  return out;
}

inline EnsembleResult run_sd_ensemble(const SirParams& base, const VariationSpec& spec,
                                      int weeks = defaults::kWeeks, double dt = defaults::kDt,
                                      unsigned threads = default_thread_count()) {
  return run_sd_ensemble_detailed(base, spec, weeks, dt, threads).ensemble;
}

}  // namespace sirvar::mc
