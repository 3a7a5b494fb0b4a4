#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace marketnet {

inline constexpr const char* kUnknownSector = "UNKNOWN";

struct Timestamp {
  std::string text;           // as written in the input file
  std::int64_t seconds = 0;   // seconds since 1970-01-01T00:00:00Z
  int year = 1970;            // calendar year in the timestamp's own offset
};

// ISO-8601 date or date-time: YYYY-MM-DD, optionally followed by 'T' or ' '
// and HH:MM[:SS[.fff]] with an optional 'Z' or +HH:MM / -HH:MM offset.
std::optional<Timestamp> parse_timestamp(const std::string& text);

// Closing prices, rows = timestamps, columns = tickers. Absent cells are NaN
// until clean_and_align() removes the affected tickers.
struct PricePanel {
  std::vector<std::string> tickers;
  std::vector<Timestamp> timestamps;
  Eigen::MatrixXd prices;
  std::map<std::string, std::string> sectors;

  std::size_t rows() const { return timestamps.size(); }
  std::size_t cols() const { return tickers.size(); }

  // Sector label for a ticker, kUnknownSector when not annotated.
  const std::string& sector(const std::string& ticker) const;

  // Copy of rows [first, first + count).
  PricePanel slice_rows(std::size_t first, std::size_t count) const;
};

// Reads the price CSV. The first header cell must be `timestamp` (`date`
// and `datetime` are accepted aliases); every other column is one ticker.
// Non-numeric cells become absent; an unparsable or non-increasing
// timestamp is an InputError naming the offending row.
PricePanel load_prices(const std::filesystem::path& path,
                       const std::optional<std::filesystem::path>& sector_path = std::nullopt);
PricePanel read_prices_csv(std::istream& in, const std::string& source_name = "<stream>");

// Two-column `ticker,sector` file; a header row is optional.
std::map<std::string, std::string> read_sectors_csv(std::istream& in);

struct CleanResult {
  PricePanel panel;
  std::vector<std::string> dropped;  // in original column order
};

// Drops every ticker with an absent or non-positive price anywhere in the
// range. Throws InputError when nothing survives.
CleanResult clean_and_align(const PricePanel& raw);

struct WindowSplit {
  std::vector<PricePanel> windows;
  std::size_t discarded_rows = 0;
};

// Consecutive non-overlapping windows of window_len rows; a short trailing
// remainder is discarded. Requires 3 <= window_len <= panel.rows().
WindowSplit split_windows(const PricePanel& panel, std::size_t window_len);

// One window per calendar year of the timestamps. Years with fewer than
// three rows are discarded.
WindowSplit split_calendar_years(const PricePanel& panel);

// Fixed window length for `n_periods` equal windows: floor(n_rows / n_periods).
std::size_t period_window_length(std::size_t n_rows, std::size_t n_periods = 30);

// Plain-text dropped-ticker list, one ticker per line.
void write_dropped_report(std::ostream& out, const std::vector<std::string>& dropped);

}  // namespace marketnet
