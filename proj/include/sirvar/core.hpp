#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sirvar {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class StepTooLarge : public Error {
 public:
  using Error::Error;
};

class HorizonTooShort : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class PopulationMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyEnsemble : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Raised by ensemble drivers; carries the failing replicate.
class ReplicateError : public Error {
 public:
  ReplicateError(std::size_t replicate, const std::string& what)
      : Error("replicate " + std::to_string(replicate) + ": " + what),
        replicate_(replicate) {}
  std::size_t replicate() const noexcept { return replicate_; }

 private:
  std::size_t replicate_;
};

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// Epidemiological parameters shared by the ODE and agent-based models.
///
/// Validated on construction; the fields are read-only afterwards so a
/// SirParams value can be handed to any number of worker threads.
class SirParams {
 public:
  SirParams(std::int64_t population, double contact_rate, double infection_prob,
            double illness_duration, std::int64_t initial_infected)
      : population_(population),
        contact_rate_(contact_rate),
        infection_prob_(infection_prob),
        illness_duration_(illness_duration),
        initial_infected_(initial_infected) {
    if (population < 1) throw InvalidArgument("population must be >= 1");
    if (!(contact_rate >= 0.0) || !std::isfinite(contact_rate))
      throw InvalidArgument("contact_rate must be finite and >= 0");
    if (!(infection_prob >= 0.0 && infection_prob <= 1.0))
      throw InvalidArgument("infection_prob must lie in [0, 1]");
    if (!(illness_duration > 0.0) || !std::isfinite(illness_duration))
      throw InvalidArgument("illness_duration must be finite and > 0");
    if (initial_infected < 0 || initial_infected > population)
      throw InvalidArgument("initial_infected must lie in [0, population]");
  }

  std::int64_t population() const noexcept { return population_; }
  double contact_rate() const noexcept { return contact_rate_; }
  double infection_prob() const noexcept { return infection_prob_; }
  double illness_duration() const noexcept { return illness_duration_; }
  std::int64_t initial_infected() const noexcept { return initial_infected_; }

  SirParams with_population(std::int64_t n) const {
    return {n, contact_rate_, infection_prob_, illness_duration_, initial_infected_};
  }
  SirParams with_contact_rate(double c) const {
    return {population_, c, infection_prob_, illness_duration_, initial_infected_};
  }
  SirParams with_infection_prob(double p) const {
    return {population_, contact_rate_, p, illness_duration_, initial_infected_};
  }
  SirParams with_illness_duration(double d) const {
    return {population_, contact_rate_, infection_prob_, d, initial_infected_};
  }
  SirParams with_initial_infected(std::int64_t i0) const {
    return {population_, contact_rate_, infection_prob_, illness_duration_, i0};
  }

  friend bool operator==(const SirParams&, const SirParams&) = default;

 private:
  std::int64_t population_;
  double contact_rate_;
  double infection_prob_;
  double illness_duration_;
  std::int64_t initial_infected_;
};

struct Rates {
  double transmission;  // a, per individual per day
  double recovery;      // b, per day
};

/// Frequency-dependent transmission: a = c*p/N, b = 1/D.
inline Rates derived_rates(const SirParams& params) noexcept {
  return {params.contact_rate() * params.infection_prob() /
              static_cast<double>(params.population()),
          1.0 / params.illness_duration()};
}

/// R0 = a*N/b = c*p*D.
inline double basic_reproduction_number(const SirParams& params) noexcept {
  const Rates r = derived_rates(params);
  return r.transmission * static_cast<double>(params.population()) / r.recovery;
}

// ---------------------------------------------------------------------------
// Final-size calibration
// ---------------------------------------------------------------------------

/// Solves z = 1 - exp(-r0 * z) for the non-trivial root by Newton's method.
/// Returns 0 when r0 <= 1 (no major outbreak in the deterministic limit).
inline double final_size(double r0) {
  if (!(r0 >= 0.0)) throw InvalidArgument("r0 must be >= 0");
  if (r0 <= 1.0) return 0.0;
  double z = 1.0 - std::exp(-r0);  // start right of the root, f(z) < 0 there
  for (int it = 0; it < 100; ++it) {
    const double e = std::exp(-r0 * z);
    const double f = z - 1.0 + e;
    const double df = 1.0 - r0 * e;
    const double next = z - f / df;
    if (std::abs(next - z) < 1e-15) return next;
    z = next;
  }
  return z;
}

/// Inverts the final-size relation: the R0 whose attack rate is `attack`.
inline double r0_for_attack_rate(double attack) {
  if (!(attack > 0.0 && attack < 1.0))
    throw InvalidArgument("attack rate must lie in (0, 1)");
  const double s_inf = 1.0 - attack;
  return -std::log(s_inf) / attack;
}

/// Contact rate c such that c*p*D reproduces the target attack rate.
inline double calibrate_contact_rate(double attack, double infection_prob,
                                     double illness_duration) {
  if (!(infection_prob > 0.0)) throw InvalidArgument("infection_prob must be > 0");
  if (!(illness_duration > 0.0)) throw InvalidArgument("illness_duration must be > 0");
  return r0_for_attack_rate(attack) / (infection_prob * illness_duration);
}

// Reference configuration of the Österlövsta parish data set.
namespace defaults {
inline constexpr std::int64_t kPopulation = 52910;
inline constexpr double kInfectionProb = 0.065;
inline constexpr double kIllnessDuration = 4.2;
inline constexpr double kAttackRate = 0.61;
inline constexpr std::int64_t kInitialInfected = 1;
inline constexpr int kWeeks = 15;
inline constexpr std::size_t kReplicates = 100;
inline constexpr double kDt = 0.1;
inline constexpr double kSigmaFraction = 0.1;
inline constexpr int kMeanDegree = 10;
inline constexpr double kRewireProb = 0.1;

inline double contact_rate() {
  return calibrate_contact_rate(kAttackRate, kInfectionProb, kIllnessDuration);
}

inline SirParams params() {
  return {kPopulation, contact_rate(), kInfectionProb, kIllnessDuration,
          kInitialInfected};
}
}  // namespace defaults

// ---------------------------------------------------------------------------
// States and series
// ---------------------------------------------------------------------------

struct CompartmentState {
  double s = 0.0;
  double i = 0.0;
  double r = 0.0;

  double total() const noexcept { return s + i + r; }
  friend bool operator==(const CompartmentState&, const CompartmentState&) = default;
};

struct Trajectory {
  double dt = 1.0;
  std::vector<CompartmentState> states;

  double duration() const noexcept {
    return states.empty() ? 0.0 : dt * static_cast<double>(states.size() - 1);
  }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Infected counts on the weekly reporting grid.
class WeeklySeries {
 public:
  WeeklySeries() = default;
  explicit WeeklySeries(std::vector<double> infected) : infected_(std::move(infected)) {
    if (infected_.empty()) throw InvalidArgument("weekly series needs at least one week");
    for (double v : infected_)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw InvalidArgument("weekly counts must be finite and >= 0");
  }

  std::size_t weeks() const noexcept { return infected_.size(); }
  const std::vector<double>& infected() const noexcept { return infected_; }
  double operator[](std::size_t w) const { return infected_[w]; }

  friend bool operator==(const WeeklySeries&, const WeeklySeries&) = default;

 private:
  std::vector<double> infected_;
};

/// Replicate x week matrix.
class EnsembleResult {
 public:
  EnsembleResult() = default;
  explicit EnsembleResult(std::vector<WeeklySeries> series) : series_(std::move(series)) {
    if (series_.empty()) throw EmptyEnsemble("ensemble needs at least one replicate");
    const std::size_t w = series_.front().weeks();
    for (const auto& s : series_)
      if (s.weeks() != w) throw LengthMismatch("ensemble replicates differ in horizon");
  }

  std::size_t replicates() const noexcept { return series_.size(); }
  std::size_t weeks() const noexcept { return series_.empty() ? 0 : series_.front().weeks(); }
  const std::vector<WeeklySeries>& series() const noexcept { return series_; }
  const WeeklySeries& operator[](std::size_t r) const { return series_[r]; }

  /// Values of every replicate at one week.
  std::vector<double> column(std::size_t week) const {
    std::vector<double> out;
    out.reserve(series_.size());
    for (const auto& s : series_) out.push_back(s[week]);
    return out;
  }

  friend bool operator==(const EnsembleResult&, const EnsembleResult&) = default;

 private:
  std::vector<WeeklySeries> series_;
};

}  // namespace sirvar
