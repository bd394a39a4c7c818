#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "stats.hpp"

// On-disk formats.
//
//   Reference / single series CSV:   week,infected        (weeks 1-indexed)
//   Ensemble CSV:                    replicate,week_1,...,week_W
//   Summary CSV:                     week,median,q1,q3,iqr,min,max
//   metadata.json:                   run configuration and conventions
//
// Numbers are written in shortest round-trip form, so integer counts appear
// as plain integers and reals reload bit-exactly.

namespace sirvar::data {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct ReferenceSeries {
  std::string region;
  WeeklySeries series;
  std::string provenance;
};

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

inline bool parse_int(std::string_view s, long long& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

inline std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  os << contents;
  os.flush();
  if (!os) throw IoError(path.string(), "write failed");
}

// Lines with 1-based numbers; strips a UTF-8 BOM, skips blanks and '#' comments.
inline std::vector<std::pair<std::size_t, std::string_view>> content_lines(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t number = 0;
  while (!text.empty()) {
    ++number;
    const std::size_t nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;
    out.emplace_back(number, line);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reference series
// ---------------------------------------------------------------------------

inline WeeklySeries parse_series_csv(std::string_view text, const std::string& label) {
  const auto lines = detail::content_lines(text);
  if (lines.empty()) throw ParseError(label, 1, "empty file; expected header 'week,infected'");
  {
    const auto cols = detail::split(lines.front().second);
    if (cols.size() != 2 || cols[0] != "week" || cols[1] != "infected")
      throw ParseError(label, lines.front().first, "expected header 'week,infected'");
  }
  std::vector<double> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [number, line] = lines[i];
    const auto cols = detail::split(line);
    if (cols.size() != 2)
      throw ParseError(label, number, "expected 2 columns, found " + std::to_string(cols.size()));
    long long week = 0;
    if (!detail::parse_int(cols[0], week))
      throw ParseError(label, number, "week '" + std::string(cols[0]) + "' is not an integer");
    if (week != static_cast<long long>(values.size()) + 1)
      throw ParseError(label, number,
                       "expected week " + std::to_string(values.size() + 1) + ", found " +
                           std::to_string(week));
    double count = 0.0;
    if (!detail::parse_double(cols[1], count))
      throw ParseError(label, number, "infected '" + std::string(cols[1]) + "' is not a number");
    if (count < 0.0)
      throw ParseError(label, number, "negative infected count " + std::string(cols[1]));
    values.push_back(count);
  }
  if (values.empty()) throw ParseError(label, lines.back().first, "no data rows");
  return WeeklySeries(std::move(values));
}

inline ReferenceSeries load_reference(const fs::path& path) {
  if (!fs::exists(path)) throw IoError(path.string(), "file does not exist");
  ReferenceSeries ref{path.stem().string(),
                      parse_series_csv(detail::read_file(path), path.string()),
                      "loaded from " + path.string()};
  return ref;
}

inline std::string series_csv(const WeeklySeries& series) {
  std::string out = "week,infected\n";
  for (std::size_t w = 0; w < series.weeks(); ++w)
    out += std::to_string(w + 1) + "," + format_number(series[w]) + "\n";
  return out;
}

inline void save_series(const WeeklySeries& series, const fs::path& path) {
  detail::write_file(path, series_csv(series));
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

enum class Format { kCsv, kJson };

inline Format parse_format(std::string_view s) {
  if (s == "csv") return Format::kCsv;
  if (s == "json") return Format::kJson;
  throw InvalidArgument("unknown format '" + std::string(s) + "' (expected csv or json)");
}

inline std::string ensemble_csv(const EnsembleResult& e) {
  std::string out = "replicate";
  for (std::size_t w = 0; w < e.weeks(); ++w) out += ",week_" + std::to_string(w + 1);
  out += '\n';
  for (std::size_t r = 0; r < e.replicates(); ++r) {
    out += std::to_string(r);
    for (double v : e[r].infected()) out += "," + format_number(v);
    out += '\n';
  }
  return out;
}

inline EnsembleResult parse_ensemble_csv(std::string_view text, const std::string& label) {
  const auto lines = detail::content_lines(text);
  if (lines.empty()) throw ParseError(label, 1, "empty file");
  const auto header = detail::split(lines.front().second);
  if (header.size() < 2 || header[0] != "replicate")
    throw ParseError(label, lines.front().first, "expected header 'replicate,week_1,...'");
  const std::size_t weeks = header.size() - 1;
  std::vector<WeeklySeries> series;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [number, line] = lines[i];
    const auto cols = detail::split(line);
    if (cols.size() != weeks + 1)
      throw ParseError(label, number,
                       "expected " + std::to_string(weeks + 1) + " columns, found " +
                           std::to_string(cols.size()));
    long long rep = 0;
    if (!detail::parse_int(cols[0], rep) || rep != static_cast<long long>(series.size()))
      throw ParseError(label, number, "replicate index out of sequence");
    std::vector<double> v(weeks);
    for (std::size_t w = 0; w < weeks; ++w) {
      if (!detail::parse_double(cols[w + 1], v[w]))
        throw ParseError(label, number, "value '" + std::string(cols[w + 1]) + "' is not a number");
      if (v[w] < 0.0) throw ParseError(label, number, "negative infected count");
    }
    series.emplace_back(std::move(v));
  }
  if (series.empty()) throw ParseError(label, lines.back().first, "no replicate rows");
  return EnsembleResult(std::move(series));
}

inline std::string summary_csv(const stats::WeeklySummary& s) {
  std::string out = "week,median,q1,q3,iqr,min,max\n";
  for (std::size_t w = 0; w < s.size(); ++w) {
    const auto& q = s.weeks[w];
    out += std::to_string(w + 1) + "," + format_number(q.median) + "," + format_number(q.q1) +
           "," + format_number(q.q3) + "," + format_number(q.iqr) + "," + format_number(q.min) +
           "," + format_number(q.max) + "\n";
  }
  return out;
}

inline Json summary_json(const stats::WeeklySummary& s) {
  Json weeks = Json::array();
  for (std::size_t w = 0; w < s.size(); ++w) {
    const auto& q = s.weeks[w];
    weeks.push_back({{"week", w + 1},
                     {"median", q.median},
                     {"q1", q.q1},
                     {"q3", q.q3},
                     {"iqr", q.iqr},
                     {"min", q.min},
                     {"max", q.max}});
  }
  return {{"total_variation", s.total_variation},
          {"peak_week", s.peak_week() + 1},
          {"peak_relative_iqr", s.peak_relative_iqr()},
          {"weeks", std::move(weeks)}};
}

inline Json ensemble_json(const EnsembleResult& e) {
  Json rows = Json::array();
  for (const auto& s : e.series()) rows.push_back(s.infected());
  return rows;
}

inline EnsembleResult ensemble_from_json(const Json& rows) {
  std::vector<WeeklySeries> series;
  for (const auto& row : rows) series.emplace_back(row.get<std::vector<double>>());
  return EnsembleResult(std::move(series));
}

inline constexpr const char* kEnsembleCsv = "ensemble.csv";
inline constexpr const char* kSummaryCsv = "summary.csv";
inline constexpr const char* kSeriesCsv = "series.csv";
inline constexpr const char* kMetadataJson = "metadata.json";
inline constexpr const char* kRunJson = "run.json";

inline void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create directory: " + ec.message());
}

/// Writes the replicate matrix, its summary and run metadata into `dir`.
/// csv: ensemble.csv + summary.csv + metadata.json; json: run.json.
inline void save_ensemble(const EnsembleResult& ensemble, const stats::WeeklySummary& summary,
                          const fs::path& dir, Format format, Json metadata) {
  ensure_directory(dir);
  metadata["summary"] = summary_json(summary);
  if (format == Format::kCsv) {
    detail::write_file(dir / kEnsembleCsv, ensemble_csv(ensemble));
    detail::write_file(dir / kSummaryCsv, summary_csv(summary));
    detail::write_file(dir / kMetadataJson, metadata.dump(2) + "\n");
  } else {
    Json doc = {{"metadata", std::move(metadata)}, {"ensemble", ensemble_json(ensemble)}};
    detail::write_file(dir / kRunJson, doc.dump(2) + "\n");
  }
}

/// Single deterministic series: series.csv + metadata.json, or run.json.
inline void save_series_run(const WeeklySeries& series, const fs::path& dir, Format format,
                            Json metadata) {
  ensure_directory(dir);
  if (format == Format::kCsv) {
    save_series(series, dir / kSeriesCsv);
    detail::write_file(dir / kMetadataJson, metadata.dump(2) + "\n");
  } else {
    Json doc = {{"metadata", std::move(metadata)}, {"series", series.infected()}};
    detail::write_file(dir / kRunJson, doc.dump(2) + "\n");
  }
}

inline Json load_json(const fs::path& path) {
  const std::string text = detail::read_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

/// Any saved run: a directory written by save_ensemble/save_series_run, or a
/// single file (series CSV, ensemble CSV, run.json).
struct LoadedRun {
  std::string name;
  bool is_ensemble = false;
  EnsembleResult ensemble;  // a series loads as a one-replicate ensemble
  Json metadata;
};

inline LoadedRun load_run(const fs::path& path) {
  if (!fs::exists(path)) throw IoError(path.string(), "does not exist");
  LoadedRun run;
  if (fs::is_directory(path)) {
    fs::path norm = fs::absolute(path).lexically_normal();
    if (!norm.has_filename()) norm = norm.parent_path();
    run.name = norm.filename().string();
  } else {
    run.name = path.stem().string();
  }

  auto from_json_doc = [&](const Json& doc) {
    if (doc.contains("metadata")) run.metadata = doc["metadata"];
    if (doc.contains("ensemble")) {
      run.ensemble = ensemble_from_json(doc["ensemble"]);
      run.is_ensemble = true;
    } else if (doc.contains("series")) {
      run.ensemble = EnsembleResult({WeeklySeries(doc["series"].get<std::vector<double>>())});
    } else {
      throw ParseError(path.string(), 0, "run.json has neither 'ensemble' nor 'series'");
    }
  };

  if (fs::is_directory(path)) {
    if (fs::exists(path / kRunJson)) {
      from_json_doc(load_json(path / kRunJson));
      return run;
    }
    if (fs::exists(path / kMetadataJson)) run.metadata = load_json(path / kMetadataJson);
    if (fs::exists(path / kEnsembleCsv)) {
      run.ensemble = parse_ensemble_csv(detail::read_file(path / kEnsembleCsv),
                                        (path / kEnsembleCsv).string());
      run.is_ensemble = true;
    } else if (fs::exists(path / kSeriesCsv)) {
      run.ensemble = EnsembleResult({load_reference(path / kSeriesCsv).series});
    } else {
      throw IoError(path.string(), "no ensemble.csv, series.csv or run.json found");
    }
    return run;
  }

  if (path.extension() == ".json") {
    from_json_doc(load_json(path));
    return run;
  }
  const std::string text = detail::read_file(path);
  const auto lines = detail::content_lines(text);
  if (!lines.empty() && lines.front().second.starts_with("replicate")) {
    run.ensemble = parse_ensemble_csv(text, path.string());
    run.is_ensemble = true;
  } else {
    run.ensemble = EnsembleResult({parse_series_csv(text, path.string())});
  }
  return run;
}

}  // namespace sirvar::data
