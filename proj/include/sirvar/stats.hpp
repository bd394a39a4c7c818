#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "core.hpp"

namespace sirvar::stats {

/// Quantile by linear interpolation between order statistics at 1-based
/// position 1 + (n-1)*q (Hyndman-Fan type 7). `sorted` must be ascending.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw EmptyEnsemble("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, q);
}

struct WeekQuartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Per-week quartiles across replicates and their total variation
/// (the sum of weekly inter-quartile ranges).
struct WeeklySummary {
  std::vector<WeekQuartiles> weeks;
  double total_variation = 0.0;

  std::size_t size() const noexcept { return weeks.size(); }

  /// Index of the week with the largest median (first on ties).
  std::size_t peak_week() const noexcept {
    std::size_t best = 0;
    for (std::size_t w = 1; w < weeks.size(); ++w)
      if (weeks[w].median > weeks[best].median) best = w;
    return best;
  }

  /// IQR / median at the peak-median week; 0 when that median is 0.
  double peak_relative_iqr() const noexcept {
    if (weeks.empty()) return 0.0;
    const auto& w = weeks[peak_week()];
    return w.median > 0.0 ? w.iqr / w.median : 0.0;
  }
};

inline WeekQuartiles quartiles(std::vector<double> column) {
  std::sort(column.begin(), column.end());
  WeekQuartiles out;
  out.q1 = quantile_sorted(column, 0.25);
  out.median = quantile_sorted(column, 0.5);
  out.q3 = quantile_sorted(column, 0.75);
  out.iqr = out.q3 - out.q1;
  out.min = column.front();
  out.max = column.back();
  return out;
}

inline WeeklySummary weekly_summary(const EnsembleResult& ensemble) {
  if (ensemble.replicates() == 0) throw EmptyEnsemble("summary of an empty ensemble");
  WeeklySummary s;
  s.weeks.reserve(ensemble.weeks());
  for (std::size_t w = 0; w < ensemble.weeks(); ++w) {
    s.weeks.push_back(quartiles(ensemble.column(w)));
    s.total_variation += s.weeks.back().iqr;
  }
  return s;
}

inline WeeklySeries median_series(const EnsembleResult& ensemble) {
  if (ensemble.replicates() == 0) throw EmptyEnsemble("median of an empty ensemble");
  std::vector<double> med;
  med.reserve(ensemble.weeks());
  for (std::size_t w = 0; w < ensemble.weeks(); ++w) {
    auto col = ensemble.column(w);
    std::sort(col.begin(), col.end());
    med.push_back(quantile_sorted(col, 0.5));
  }
  return WeeklySeries(std::move(med));
}

inline WeeklySeries mean_series(const EnsembleResult& ensemble) {
  if (ensemble.replicates() == 0) throw EmptyEnsemble("mean of an empty ensemble");
  std::vector<double> mean(ensemble.weeks(), 0.0);
  for (const auto& s : ensemble.series())
    for (std::size_t w = 0; w < mean.size(); ++w) mean[w] += s[w];
  for (double& m : mean) m /= static_cast<double>(ensemble.replicates());
  return WeeklySeries(std::move(mean));
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank test
// ---------------------------------------------------------------------------
//
// Paired test on weekly series. Zero differences are dropped, tied |d| get
// midranks, W = min(W+, W-). For up to kExactLimit non-zero pairs the
// two-sided p-value is exact: the null distribution of W+ over all 2^n sign
// assignments is counted by dynamic programming on doubled (hence integer)
// midranks. Beyond that, the normal approximation with tie-corrected
// variance and a 0.5 continuity correction is used.
//
// The paired signed-rank test is the right one for week-matched series even
// where reports of such comparisons call it a "rank sum" test.

inline constexpr std::size_t kExactLimit = 20;
inline constexpr double kSignificance = 0.05;

enum class PMethod { kNone, kExact, kNormal };

struct WilcoxonResult {
  std::size_t n_effective = 0;
  double w_statistic = 0.0;
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;
  bool reject_at_5pct = false;
  PMethod method = PMethod::kNone;
};

struct SignedRanks {
  std::vector<double> ranks;  // midranks of |d|, ascending |d|
  std::vector<bool> positive;
  std::vector<std::size_t> tie_sizes;
};

/// Midranks of |d| over the non-zero differences.
inline SignedRanks signed_ranks(std::span<const double> diffs) {
  std::vector<std::pair<double, bool>> nz;
  for (double d : diffs)
    if (d != 0.0) nz.emplace_back(std::abs(d), d > 0.0);
  std::sort(nz.begin(), nz.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  SignedRanks out;
  out.ranks.resize(nz.size());
  out.positive.resize(nz.size());
  for (std::size_t i = 0; i < nz.size();) {
    std::size_t j = i;
    while (j + 1 < nz.size() && nz[j + 1].first == nz[i].first) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) {
      out.ranks[t] = mid;
      out.positive[t] = nz[t].second;
    }
    out.tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }
  return out;
}

/// P(W+ <= w) under the null, counted over all sign assignments.
inline double exact_lower_tail(std::span<const double> ranks, double w) {
  // Doubled midranks are integers.
  std::vector<std::size_t> r2;
  r2.reserve(ranks.size());
  std::size_t total = 0;
  for (double r : ranks) {
    r2.push_back(static_cast<std::size_t>(std::llround(2.0 * r)));
    total += r2.back();
  }
  std::vector<double> ways(total + 1, 0.0);
  ways[0] = 1.0;
  std::size_t reach = 0;
  for (std::size_t r : r2) {
    for (std::size_t s = reach + 1; s-- > 0;)
      if (ways[s] != 0.0) ways[s + r] += ways[s];
    reach += r;
  }
  const auto limit = static_cast<std::size_t>(std::llround(std::floor(2.0 * w + 1e-9)));
  double count = 0.0;
  for (std::size_t s = 0; s <= std::min(limit, total); ++s) count += ways[s];
  return count / std::ldexp(1.0, static_cast<int>(ranks.size()));
}

inline double standard_normal_cdf(double z) noexcept {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Two-sided normal-approximation p-value for W = min(W+, W-).
inline double normal_approx_p(std::size_t n, double w, std::span<const std::size_t> tie_sizes) {
  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
  for (std::size_t t : tie_sizes) {
    const double tt = static_cast<double>(t);
    var -= (tt * tt * tt - tt) / 48.0;
  }
  if (var <= 0.0) return 1.0;
  const double z = std::min(0.0, w - mean + 0.5) / std::sqrt(var);
  return std::min(1.0, 2.0 * standard_normal_cdf(z));
}

inline WilcoxonResult wilcoxon_from_differences(std::span<const double> diffs,
                                                bool force_normal = false) {
  const SignedRanks sr = signed_ranks(diffs);
  WilcoxonResult res;
  res.n_effective = sr.ranks.size();
  for (std::size_t i = 0; i < sr.ranks.size(); ++i)
    (sr.positive[i] ? res.w_plus : res.w_minus) += sr.ranks[i];
  res.w_statistic = std::min(res.w_plus, res.w_minus);

  if (res.n_effective == 0) {
    res.p_value = 1.0;
    res.method = PMethod::kNone;
  } else if (res.n_effective <= kExactLimit && !force_normal) {
    res.p_value = std::min(1.0, 2.0 * exact_lower_tail(sr.ranks, res.w_statistic));
    res.method = PMethod::kExact;
  } else {
    res.p_value = normal_approx_p(res.n_effective, res.w_statistic, sr.tie_sizes);
    res.method = PMethod::kNormal;
  }
  res.reject_at_5pct = res.p_value < kSignificance;
  return res;
}

inline WilcoxonResult wilcoxon_signed_rank(const WeeklySeries& x, const WeeklySeries& y) {
  if (x.weeks() != y.weeks())
    throw LengthMismatch("series lengths differ: " + std::to_string(x.weeks()) + " vs " +
                         std::to_string(y.weeks()));
  if (x.weeks() == 0) throw InvalidArgument("series must be non-empty");
  std::vector<double> d(x.weeks());
  for (std::size_t w = 0; w < d.size(); ++w) d[w] = x[w] - y[w];
  return wilcoxon_from_differences(d);
}

}  // namespace sirvar::stats
