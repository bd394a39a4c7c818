// sirvar: command-line driver for the SD, Monte-Carlo and agent-based SIR
// experiments and their comparison against a reference series.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sirvar/sirvar.hpp"

namespace {

namespace fs = std::filesystem;
using sirvar::data::Json;
using sirvar::experiment::Kind;
using sirvar::experiment::RunConfig;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Flags shared by every subcommand.
struct CommonFlags {
  std::string out = "sirvar-out";
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonFlags& common, RunConfig& cfg, bool with_params) {
  cmd->add_option("--out", common.out, "Output directory");
  cmd->add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", cfg.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 4096u));
  if (!with_params) return;
  cmd->add_option("--seed", cfg.seed, "Master seed (u64)");
  cmd->add_option("--weeks", cfg.weeks, "Horizon in weeks")->check(CLI::PositiveNumber);
  cmd->add_option("--population", cfg.population, "Population size N")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--contact-rate", cfg.contact_rate,
                  "Contacts per individual per day (default calibrated to a 61% attack rate)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--infection-prob", cfg.infection_prob,
                  "Transmission probability per contact")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--illness-duration", cfg.illness_duration, "Days infectious")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--initial-infected", cfg.initial_infected, "Index cases at t=0")
      ->check(CLI::NonNegativeNumber);
}

int write_run(const RunConfig& cfg, const CommonFlags& common) {
  cfg.validate();
  const fs::path dir = common.out;
  const auto out = sirvar::experiment::run_and_save(cfg, dir, sirvar::data::parse_format(common.format));
  if (out.series) {
    const auto& v = out.series->infected();
    std::size_t peak = 0;
    for (std::size_t w = 1; w < v.size(); ++w)
      if (v[w] > v[peak]) peak = w;
    std::cout << command_name(cfg.kind) << ": " << v.size() << " weeks, peak "
              << sirvar::data::format_number(v[peak]) << " in week " << peak + 1 << "\n";
  } else {
    const auto summary = sirvar::stats::weekly_summary(*out.ensemble);
    std::cout << command_name(cfg.kind) << ": " << out.ensemble->replicates() << " x "
              << out.ensemble->weeks() << " ensemble, total variation "
              << sirvar::data::format_number(summary.total_variation) << ", peak median week "
              << summary.peak_week() + 1 << "\n";
    if (out.clamped_draws > 0)
      std::cout << "warning: " << out.clamped_draws << " parameter draws were clamped\n";
  }
  std::cout << "elapsed " << out.elapsed_seconds << " s; wrote " << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareRow {
  std::string name;
  bool ensemble = false;
  std::size_t replicates = 1;
  sirvar::stats::WilcoxonResult test;
  std::optional<sirvar::stats::WeeklySummary> summary;
};

const char* method_name(sirvar::stats::PMethod m) {
  switch (m) {
    case sirvar::stats::PMethod::kExact: return "exact";
    case sirvar::stats::PMethod::kNormal: return "normal";
    case sirvar::stats::PMethod::kNone: return "none";
  }
  return "?";
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  using sirvar::data::format_number;
  std::string out =
      "input,kind,replicates,n_effective,w_statistic,p_value,method,reject_5pct,"
      "total_variation,peak_week,peak_relative_iqr\n";
  for (const auto& r : rows) {
    out += r.name + "," + (r.ensemble ? "ensemble" : "series") + "," +
           std::to_string(r.replicates) + "," + std::to_string(r.test.n_effective) + "," +
           format_number(r.test.w_statistic) + "," + format_number(r.test.p_value) + "," +
           method_name(r.test.method) + "," + (r.test.reject_at_5pct ? "1" : "0") + ",";
    if (r.summary)
      out += format_number(r.summary->total_variation) + "," +
             std::to_string(r.summary->peak_week() + 1) + "," +
             format_number(r.summary->peak_relative_iqr());
    else
      out += ",,";
    out += "\n";
  }
  return out;
}

std::string compare_text(const std::vector<CompareRow>& rows, const std::string& reference) {
  std::ostringstream os;
  os << "Wilcoxon signed-rank test against " << reference << " (5% level)\n\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-32s %10s %8s %10s %8s %16s\n", "input", "p-value", "n_eff",
                "W", "reject", "total variation");
  os << line;
  for (const auto& r : rows) {
    const std::string tv =
        r.summary ? sirvar::data::format_number(std::round(r.summary->total_variation)) : "-";
    std::snprintf(line, sizeof line, "%-32s %10.4f %8zu %10.1f %8s %16s\n", r.name.c_str(),
                  r.test.p_value, r.test.n_effective, r.test.w_statistic,
                  r.test.reject_at_5pct ? "yes" : "no", tv.c_str());
    os << line;
  }
  return os.str();
}

int run_compare(const std::string& reference_path, const std::vector<std::string>& inputs,
                const CommonFlags& common) {
  const auto reference = sirvar::data::load_reference(reference_path);
  std::vector<CompareRow> rows;
  for (const auto& in : inputs) {
    auto run = sirvar::data::load_run(in);
    CompareRow row;
    row.name = run.name;
    row.ensemble = run.is_ensemble;
    row.replicates = run.ensemble.replicates();
    // Deterministic series are compared as-is; ensembles through their weekly median.
    const sirvar::WeeklySeries series =
        run.is_ensemble ? sirvar::stats::median_series(run.ensemble) : run.ensemble[0];
    if (series.weeks() != reference.series.weeks()) {
      std::cerr << "error: " << in << " has " << series.weeks() << " weeks but reference "
                << reference_path << " has " << reference.series.weeks() << "\n";
      return kExitRuntime;
    }
    row.test = sirvar::stats::wilcoxon_signed_rank(series, reference.series);
    if (run.is_ensemble) row.summary = sirvar::stats::weekly_summary(run.ensemble);
    rows.push_back(std::move(row));
  }

  const fs::path dir = common.out;
  sirvar::data::ensure_directory(dir);
  const std::string text = compare_text(rows, reference_path);
  sirvar::data::detail::write_file(dir / "compare.csv", compare_csv(rows));
  sirvar::data::detail::write_file(dir / "compare.txt", text);
  std::cout << text;
  return kExitOk;
}

// Rounded deterministic SD series, labelled as synthetic.
int run_synth_reference(const RunConfig& cfg, const CommonFlags& common) {
  cfg.validate();
  const auto series = sirvar::sd::run_weekly(cfg.params(), cfg.weeks, cfg.dt);
  std::vector<double> rounded;
  for (double v : series.infected()) rounded.push_back(std::round(v));
  const fs::path dir = common.out;
  sirvar::data::ensure_directory(dir);
  sirvar::data::save_series(sirvar::WeeklySeries(std::move(rounded)), dir / "reference.csv");
  Json meta = {{"tool", "sirvar"},
               {"version", sirvar::kVersion},
               {"synthetic", true},
               {"description",
                "SYNTHETIC reference: deterministic SD run rounded to the nearest integer; "
                "not observed data"},
               {"config", sirvar::experiment::config_json(cfg)}};
  sirvar::data::detail::write_file(dir / "reference.json", meta.dump(2) + "\n");
  std::cout << "wrote " << (dir / "reference.csv").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SIR variance toolkit: deterministic SD, Monte-Carlo SD and agent-based runs"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sirvar::kVersion));

  CommonFlags common;
  RunConfig sd_cfg, mc_cfg, abm_cfg, ref_cfg;
  sd_cfg.kind = Kind::kSd;
  mc_cfg.kind = Kind::kMonteCarlo;
  abm_cfg.kind = Kind::kAbm;
  ref_cfg.kind = Kind::kSd;

  auto* sd = app.add_subcommand("run-sd", "Deterministic SD run sampled weekly");
  add_common(sd, common, sd_cfg, true);
  sd->add_option("--dt", sd_cfg.dt, "RK4 step in days")->check(CLI::PositiveNumber);

  auto* mc = app.add_subcommand("run-mc", "Monte-Carlo ensemble of SD runs");
  add_common(mc, common, mc_cfg, true);
  mc->add_option("--dt", mc_cfg.dt, "RK4 step in days")->check(CLI::PositiveNumber);
  mc->add_option("--vary", mc_cfg.scenario, "Varied parameters")
      ->check(CLI::IsMember({"illness", "contact", "infection", "all"}));
  mc->add_option("--sigma", mc_cfg.sigma, "Standard deviation as a fraction of the mean")
      ->check(CLI::PositiveNumber);
  mc->add_option("--replicates", mc_cfg.replicates, "Number of replicates")
      ->check(CLI::PositiveNumber);

  bool export_network = false;
  std::string recovery = "fixed";
  auto* ab = app.add_subcommand("run-abm", "Agent-based ensemble on small-world networks");
  add_common(ab, common, abm_cfg, true);
  ab->add_option("--k", abm_cfg.k, "Mean degree of the ring lattice (even)");
  ab->add_option("--p-rewire", abm_cfg.p_rewire, "Watts-Strogatz rewiring probability")
      ->check(CLI::Range(0.0, 1.0));
  ab->add_option("--replicates", abm_cfg.replicates, "Number of replicates")
      ->check(CLI::PositiveNumber);
  ab->add_flag("--reuse-network", abm_cfg.reuse_network,
               "Share one network across replicates instead of regenerating");
  ab->add_option("--recovery", recovery, "Illness length: fixed duration or exponential")
      ->check(CLI::IsMember({"fixed", "exponential"}));
  ab->add_flag("--export-network", export_network,
               "Also write replicate 0's network as an edge list (network_edges.txt)");

  std::string reference;
  std::vector<std::string> inputs;
  auto* cmp = app.add_subcommand("compare", "Signed-rank test and total variation vs a reference");
  add_common(cmp, common, ref_cfg, false);
  cmp->add_option("--reference", reference, "Reference CSV (week,infected)")->required();
  cmp->add_option("--inputs", inputs, "Run directories or files to compare")->required();

  auto* synth = app.add_subcommand("synth-reference",
                                   "Write a synthetic reference series from the SD model");
  add_common(synth, common, ref_cfg, true);
  synth->add_option("--dt", ref_cfg.dt, "RK4 step in days")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*ab) abm_cfg.recovery = sirvar::experiment::parse_recovery(recovery);
    if (*sd) return write_run(sd_cfg, common);
    if (*mc) return write_run(mc_cfg, common);
    if (*ab) {
      const int rc = write_run(abm_cfg, common);
      if (rc == kExitOk && export_network) {
        const auto topo = sirvar::net::build_small_world(
            static_cast<std::size_t>(abm_cfg.population), abm_cfg.k, abm_cfg.p_rewire,
            sirvar::abm::topology_seed(abm_cfg.seed, 0, abm_cfg.reuse_network));
        sirvar::net::save_edge_list(topo, (fs::path(common.out) / "network_edges.txt").string());
      }
      return rc;
    }
    if (*cmp) return run_compare(reference, inputs, common);
    if (*synth) return run_synth_reference(ref_cfg, common);
  } catch (const sirvar::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
