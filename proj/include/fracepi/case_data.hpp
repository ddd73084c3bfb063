#ifndef FRACEPI_CASE_DATA_HPP
#define FRACEPI_CASE_DATA_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "fracepi/csv.hpp"
#include "fracepi/error.hpp"

namespace fracepi {

using Date = std::chrono::sys_days;

/// Parses YYYY-MM-DD; nullopt on anything else.
inline std::optional<Date> parse_date(std::string_view text) {
  text = csv::trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  auto digits = [&](std::size_t from, std::size_t len, auto& out) {
    out = 0;
    for (std::size_t i = from; i < from + len; ++i) {
      if (text[i] < '0' || text[i] > '9') return false;
      out = out * 10 + static_cast<std::remove_reference_t<decltype(out)>>(text[i] - '0');
    }
    return true;
  };
  if (!digits(0, 4, y) || !digits(5, 2, m) || !digits(8, 2, d)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

inline std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

/// Mean of the current and previous four days. The first four entries average
/// whatever history exists.
inline std::vector<double> trailing_mean(std::span<const double> daily, std::size_t window = 5) {
  std::vector<double> out(daily.size());
  for (std::size_t k = 0; k < daily.size(); ++k) {
    const std::size_t count = std::min(k + 1, window);
    // Summed afresh per entry so shifted series give bit-identical means.
    double sum = 0.0;
    for (std::size_t j = k + 1 - count; j <= k; ++j) sum += daily[j];
    out[k] = sum / static_cast<double>(count);
  }
  return out;
}

/// Daily reported cases on consecutive dates plus their 5-day trailing mean.
struct CaseSeries {
  std::vector<Date> dates;
  std::vector<double> daily_cases;
  std::vector<double> smoothed;

  std::size_t size() const noexcept { return dates.size(); }

  std::optional<std::size_t> index_of(Date d) const {
    if (dates.empty() || d < dates.front() || d > dates.back()) return std::nullopt;
    return static_cast<std::size_t>((d - dates.front()).count());
  }

  static CaseSeries from_daily(Date first, std::vector<double> daily) {
    CaseSeries s;
    s.dates.reserve(daily.size());
    for (std::size_t k = 0; k < daily.size(); ++k) s.dates.push_back(first + std::chrono::days{k});
    for (double v : daily) {
      if (!(v >= 0.0 && std::isfinite(v))) throw ValidationError("daily case counts must be non-negative");
    }
    s.smoothed = trailing_mean(daily);
    s.daily_cases = std::move(daily);
    return s;
  }
};

/// Reads CSV with header "date,confirmed_daily", ISO dates, one row per consecutive day.
inline CaseSeries parse_case_data(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  CaseSeries series;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = csv::trim(line);
    if (trimmed.empty()) continue;
    if (!have_header) {
      const auto cols = csv::split(trimmed);
      if (cols.size() != 2 || csv::trim(cols[0]) != "date" || csv::trim(cols[1]) != "confirmed_daily") {
        throw ParseError(source, line_no, "expected header 'date,confirmed_daily'");
      }
      have_header = true;
      continue;
    }
    const auto cols = csv::split(trimmed);
    if (cols.size() != 2) throw ParseError(source, line_no, "expected 2 columns");
    const auto date = parse_date(cols[0]);
    if (!date) throw ParseError(source, line_no, "malformed date '" + std::string(cols[0]) + "'");
    double count = 0.0;
    if (!csv::parse_double(cols[1], count) || !std::isfinite(count)) {
      throw ParseError(source, line_no, "malformed count '" + std::string(cols[1]) + "'");
    }
    if (count < 0.0) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": negative case count");
    }
    if (!series.dates.empty()) {
      const Date expected = series.dates.back() + std::chrono::days{1};
      if (*date > expected) throw GapError(format_date(expected));
      if (*date < expected) {
        throw ValidationError(source + ":" + std::to_string(line_no) + ": dates must be strictly increasing");
      }
    }
    series.dates.push_back(*date);
    series.daily_cases.push_back(count);
  }
  if (!have_header) throw ParseError(source, line_no, "empty file");
  if (series.dates.empty()) throw ValidationError(source + ": no data rows");
  series.smoothed = trailing_mean(series.daily_cases);
  return series;
}

inline CaseSeries load_case_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open case data file '" + path + "'");
  return parse_case_data(in, path);
}

inline void write_case_data(std::ostream& os, const CaseSeries& series) {
  os << "date,confirmed_daily\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    os << format_date(series.dates[k]) << ',' << csv::format(series.daily_cases[k]) << '\n';
  }
}

}  // namespace fracepi

#endif  // FRACEPI_CASE_DATA_HPP
