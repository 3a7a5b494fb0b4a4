#include "marketnet/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "marketnet/error.hpp"

namespace marketnet {
namespace {

std::string trim(std::string_view text) {
  std::size_t first = 0;
  std::size_t last = text.size();
  while (first < last && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
  while (last > first && std::isspace(static_cast<unsigned char>(text[last - 1]))) --last;
  std::string out(text.substr(first, last - first));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string current;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      current.push_back(c);
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  cells.push_back(trim(current));
  return cells;
}

std::string lower(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return text;
}

bool read_int(std::string_view text, std::size_t pos, std::size_t width, int& out) {
  if (pos + width > text.size()) return false;
  for (std::size_t i = pos; i < pos + width; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + width, out);
  return ec == std::errc{} && ptr == text.data() + pos + width;
}

// Days since 1970-01-01 in the proleptic Gregorian calendar.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2 ? 1 : 0;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

int days_in_month(int y, int m) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  return m == 2 && leap ? 29 : kDays[m - 1];
}

std::optional<double> parse_price(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(const std::string& raw) {
  const std::string text = trim(raw);
  int year = 0, month = 0, day = 0;
  if (!read_int(text, 0, 4, year) || text.size() < 10 || text[4] != '-' || !read_int(text, 5, 2, month) ||
      text[7] != '-' || !read_int(text, 8, 2, day)) {
    return std::nullopt;
  }
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) return std::nullopt;

  int hour = 0, minute = 0, second = 0, offset_minutes = 0;
  std::size_t pos = 10;
  if (pos < text.size()) {
    if (text[pos] != 'T' && text[pos] != ' ') return std::nullopt;
    ++pos;
    if (!read_int(text, pos, 2, hour) || pos + 2 >= text.size() || text[pos + 2] != ':' ||
        !read_int(text, pos + 3, 2, minute)) {
      return std::nullopt;
    }
    pos += 5;
    if (pos < text.size() && text[pos] == ':') {
      if (!read_int(text, pos + 1, 2, second)) return std::nullopt;
      pos += 3;
      if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      }
    }
    if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
    if (pos < text.size()) {
      if (text[pos] == 'Z') {
        ++pos;
      } else if (text[pos] == '+' || text[pos] == '-') {
        const int sign = text[pos] == '+' ? 1 : -1;
        int oh = 0, om = 0;
        if (!read_int(text, pos + 1, 2, oh)) return std::nullopt;
        std::size_t next = pos + 3;
        if (next < text.size() && text[next] == ':') ++next;
        if (!read_int(text, next, 2, om)) return std::nullopt;
        if (oh > 23 || om > 59) return std::nullopt;
        offset_minutes = sign * (oh * 60 + om);
        pos = next + 2;
      }
    }
    if (pos != text.size()) return std::nullopt;
  }

  Timestamp ts;
  ts.text = text;
  ts.year = year;
  ts.seconds = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400 +
               hour * 3600 + minute * 60 + second - offset_minutes * 60;
  return ts;
}

const std::string& PricePanel::sector(const std::string& ticker) const {
  static const std::string unknown = kUnknownSector;
  auto it = sectors.find(ticker);
  return it == sectors.end() ? unknown : it->second;
}

PricePanel PricePanel::slice_rows(std::size_t first, std::size_t count) const {
  if (first + count > rows()) throw InputError("slice_rows: range exceeds panel length");
  PricePanel out;
  out.tickers = tickers;
  out.sectors = sectors;
  out.timestamps.assign(timestamps.begin() + static_cast<std::ptrdiff_t>(first),
                        timestamps.begin() + static_cast<std::ptrdiff_t>(first + count));
  out.prices = prices.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
  return out;
}

PricePanel read_prices_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw InputError(source_name + ": empty price file");
  const std::string first = lower(header.front());
  if (first != "timestamp" && first != "date" && first != "datetime") {
    throw InputError(source_name + ": missing timestamp column (first header cell is '" + header.front() + "')");
  }

  PricePanel panel;
  std::set<std::string> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].empty()) throw InputError(source_name + ": empty ticker name in header column " + std::to_string(c + 1));
    if (!seen.insert(header[c]).second) throw InputError(source_name + ": duplicate ticker column '" + header[c] + "'");
    panel.tickers.push_back(header[c]);
  }
  if (panel.tickers.empty()) throw InputError(source_name + ": no ticker columns");

  const std::size_t n_tickers = panel.tickers.size();
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() > n_tickers + 1) {
      throw InputError(source_name + ": line " + std::to_string(line_no) + " has more cells than the header");
    }
    auto ts = parse_timestamp(cells.front());
    if (!ts) {
      throw InputError(source_name + ": unparsable timestamp '" + cells.front() + "' on line " + std::to_string(line_no));
    }
    if (!panel.timestamps.empty() && ts->seconds <= panel.timestamps.back().seconds) {
      throw InputError(source_name + ": timestamp '" + cells.front() + "' on line " + std::to_string(line_no) +
                       " is not strictly after the previous row");
    }
    panel.timestamps.push_back(std::move(*ts));
    for (std::size_t c = 0; c < n_tickers; ++c) {
      const std::size_t cell = c + 1;
      auto price = cell < cells.size() ? parse_price(cells[cell]) : std::nullopt;
      values.push_back(price.value_or(std::numeric_limits<double>::quiet_NaN()));
    }
  }
  if (panel.timestamps.empty()) throw InputError(source_name + ": no data rows");

  const auto rows = static_cast<Eigen::Index>(panel.timestamps.size());
  panel.prices = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, static_cast<Eigen::Index>(n_tickers));
  return panel;
}

std::map<std::string, std::string> read_sectors_csv(std::istream& in) {
  std::map<std::string, std::string> sectors;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (first) {
      first = false;
      if (cells.size() >= 2 && lower(cells[0]) == "ticker" && lower(cells[1]) == "sector") continue;
    }
    if (cells.size() < 2 || cells[0].empty()) throw InputError("sector file: expected 'ticker,sector' rows");
    sectors[cells[0]] = cells[1].empty() ? kUnknownSector : cells[1];
  }
  return sectors;
}

PricePanel load_prices(const std::filesystem::path& path, const std::optional<std::filesystem::path>& sector_path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open price file " + path.string());
  PricePanel panel = read_prices_csv(in, path.string());
  if (sector_path) {
    std::ifstream sin(*sector_path);
    if (!sin) throw InputError("cannot open sector file " + sector_path->string());
    auto sectors = read_sectors_csv(sin);
    for (const auto& ticker : panel.tickers) {
      auto it = sectors.find(ticker);
      panel.sectors[ticker] = it == sectors.end() ? kUnknownSector : it->second;
    }
  }
  return panel;
}

CleanResult clean_and_align(const PricePanel& raw) {
  std::vector<Eigen::Index> keep;
  CleanResult result;
  for (std::size_t c = 0; c < raw.cols(); ++c) {
    const auto column = raw.prices.col(static_cast<Eigen::Index>(c));
    const bool complete = column.allFinite() && (column.array() > 0.0).all();
    if (complete) {
      keep.push_back(static_cast<Eigen::Index>(c));
    } else {
      result.dropped.push_back(raw.tickers[c]);
    }
  }
  if (keep.empty()) throw InputError("no ticker has a complete, positive price history");

  PricePanel& out = result.panel;
  out.timestamps = raw.timestamps;
  out.prices.resize(raw.prices.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const std::string& ticker = raw.tickers[static_cast<std::size_t>(keep[k])];
    out.tickers.push_back(ticker);
    out.prices.col(static_cast<Eigen::Index>(k)) = raw.prices.col(keep[k]);
    if (auto it = raw.sectors.find(ticker); it != raw.sectors.end()) out.sectors.insert(*it);
  }
  return result;
}

WindowSplit split_windows(const PricePanel& panel, std::size_t window_len) {
  if (window_len < 3) throw InputError("window length must be at least 3 rows");
  if (window_len > panel.rows()) {
    throw InputError("window length " + std::to_string(window_len) + " exceeds panel length " +
                     std::to_string(panel.rows()));
  }
  WindowSplit split;
  const std::size_t count = panel.rows() / window_len;
  split.windows.reserve(count);
  for (std::size_t w = 0; w < count; ++w) split.windows.push_back(panel.slice_rows(w * window_len, window_len));
  split.discarded_rows = panel.rows() - count * window_len;
  return split;
}

WindowSplit split_calendar_years(const PricePanel& panel) {
  WindowSplit split;
  std::size_t start = 0;
  while (start < panel.rows()) {
    std::size_t end = start;
    while (end < panel.rows() && panel.timestamps[end].year == panel.timestamps[start].year) ++end;
    if (end - start >= 3) {
      split.windows.push_back(panel.slice_rows(start, end - start));
    } else {
      split.discarded_rows += end - start;
    }
    start = end;
  }
  if (split.windows.empty()) throw InputError("no calendar year has at least 3 rows");
  return split;
}

std::size_t period_window_length(std::size_t n_rows, std::size_t n_periods) {
  if (n_periods == 0) throw InputError("period count must be positive");
  return n_rows / n_periods;
}

void write_dropped_report(std::ostream& out, const std::vector<std::string>& dropped) {
  for (const auto& ticker : dropped) out << ticker << '\n';
}

}  // namespace marketnet
