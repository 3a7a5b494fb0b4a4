#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "marketnet/error.hpp"
#include "marketnet/ingest.hpp"

using namespace marketnet;

namespace {

PricePanel parse(const std::string& text) {
  std::istringstream in(text);
  return read_prices_csv(in, "test.csv");
}

std::string complete_csv(std::size_t rows) {
  std::ostringstream out;
  out << "timestamp,AAA,BBB,CCC\n";
  for (std::size_t r = 0; r < rows; ++r)
    out << "2020-01-" << (r + 10) << ',' << 10 + r << ',' << 20 + r << ',' << 30 + r << '\n';
  return out.str();
}

}  // namespace

TEST(Ingest, CompleteCsvLoadsAsDenseMatrix) {
  const PricePanel p = parse(complete_csv(5));
  EXPECT_EQ(p.rows(), 5u);
  EXPECT_EQ(p.cols(), 3u);
  EXPECT_EQ(p.prices.rows(), 5);
  EXPECT_EQ(p.prices.cols(), 3);
  EXPECT_DOUBLE_EQ(p.prices(4, 2), 34.0);
  EXPECT_EQ(p.tickers, (std::vector<std::string>{"AAA", "BBB", "CCC"}));
}

TEST(Ingest, EmptyCellIsAbsent) {
  const PricePanel p = parse("timestamp,A,B\n2020-01-01,1,2\n2020-01-02,,3\n");
  EXPECT_TRUE(std::isnan(p.prices(1, 0)));
  EXPECT_DOUBLE_EQ(p.prices(1, 1), 3.0);
}

TEST(Ingest, NonNumericCellIsAbsent) {
  const PricePanel p = parse("timestamp,A\n2020-01-01,abc\n2020-01-02,4\n");
  EXPECT_TRUE(std::isnan(p.prices(0, 0)));
}

TEST(Ingest, MissingTimestampColumn) {
  try {
    parse("ticker,A\n2020-01-01,1\n");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("missing timestamp column"), std::string::npos);
  }
}

TEST(Ingest, DuplicateTickerIsError) { EXPECT_THROW(parse("timestamp,A,A\n2020-01-01,1,2\n"), InputError); }

TEST(Ingest, UnparsableTimestampNamesTheLine) {
  try {
    parse("timestamp,A\n2020-01-01,1\nnot-a-date,2\n");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Ingest, NonIncreasingTimestampIsError) {
  EXPECT_THROW(parse("timestamp,A\n2020-01-02,1\n2020-01-01,2\n"), InputError);
  EXPECT_THROW(parse("timestamp,A\n2020-01-02,1\n2020-01-02,2\n"), InputError);
}

TEST(Ingest, TimestampFormats) {
  const auto day = parse_timestamp("2021-03-04");
  ASSERT_TRUE(day);
  EXPECT_EQ(day->year, 2021);
  const auto hour = parse_timestamp("2021-03-04T10:30:00Z");
  ASSERT_TRUE(hour);
  EXPECT_EQ(hour->seconds - day->seconds, 10 * 3600 + 30 * 60);
  const auto offset = parse_timestamp("2021-03-04 10:30+02:00");
  ASSERT_TRUE(offset);
  EXPECT_EQ(hour->seconds - offset->seconds, 2 * 3600);
  EXPECT_FALSE(parse_timestamp("2021-13-01"));
  EXPECT_FALSE(parse_timestamp("yesterday"));
}

TEST(Ingest, SectorsDefaultToUnknown) {
  std::istringstream sectors("ticker,sector\nAAA,Tech\n");
  PricePanel p = parse(complete_csv(3));
  p.sectors = read_sectors_csv(sectors);
  EXPECT_EQ(p.sector("AAA"), "Tech");
  EXPECT_EQ(p.sector("BBB"), kUnknownSector);
}

TEST(Clean, NoAbsentCellsIsNoOp) {
  const PricePanel p = parse(complete_csv(4));
  const CleanResult c = clean_and_align(p);
  EXPECT_TRUE(c.dropped.empty());
  EXPECT_EQ(c.panel.tickers, p.tickers);
  EXPECT_EQ(c.panel.prices, p.prices);
}

TEST(Clean, TickerWithGapIsDropped) {
  const PricePanel p = parse("timestamp,A,B,C\n2020-01-01,1,2,3\n2020-01-02,1,,3\n2020-01-03,1,2,3\n");
  const CleanResult c = clean_and_align(p);
  EXPECT_EQ(c.panel.tickers, (std::vector<std::string>{"A", "C"}));
  EXPECT_EQ(c.dropped, (std::vector<std::string>{"B"}));
  std::ostringstream report;
  write_dropped_report(report, c.dropped);
  EXPECT_EQ(report.str(), "B\n");
}

TEST(Clean, NonPositivePriceIsDropped) {
  const PricePanel p = parse("timestamp,A,B\n2020-01-01,1,0\n2020-01-02,1,2\n");
  EXPECT_EQ(clean_and_align(p).dropped, (std::vector<std::string>{"B"}));
}

TEST(Clean, NothingSurvivesIsError) {
  const PricePanel p = parse("timestamp,A\n2020-01-01,\n2020-01-02,1\n");
  EXPECT_THROW(clean_and_align(p), InputError);
}

TEST(Clean, AddingAnAbsentCellNeverGrowsTheSurvivorSet) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    PricePanel p = parse(complete_csv(6));
    std::uniform_int_distribution<int> row(0, 5), col(0, 2);
    for (int k = 0; k < trial % 3; ++k) p.prices(row(gen), col(gen)) = std::nan("");
    const auto before = clean_and_align(p).panel.tickers.size();
    p.prices(row(gen), col(gen)) = std::nan("");
    try {
      EXPECT_LE(clean_and_align(p).panel.tickers.size(), before);
    } catch (const InputError&) {
      // every ticker gone: still not an increase
    }
  }
}

TEST(Windows, TenRowsByThree) {
  const PricePanel p = parse(complete_csv(10));
  const WindowSplit s = split_windows(p, 3);
  EXPECT_EQ(s.windows.size(), 3u);
  EXPECT_EQ(s.discarded_rows, 1u);
}

TEST(Windows, ConcatenationIsAPrefix) {
  const PricePanel p = parse(complete_csv(11));
  const WindowSplit s = split_windows(p, 4);
  std::size_t row = 0;
  for (const auto& w : s.windows)
    for (std::size_t r = 0; r < w.rows(); ++r, ++row) {
      EXPECT_EQ(w.timestamps[r].text, p.timestamps[row].text);
      EXPECT_EQ(w.prices.row(r), p.prices.row(row));
    }
  EXPECT_EQ(row + s.discarded_rows, p.rows());
}

TEST(Windows, InvalidLengths) {
  const PricePanel p = parse(complete_csv(5));
  EXPECT_THROW(split_windows(p, 2), InputError);
  EXPECT_THROW(split_windows(p, 6), InputError);
}

TEST(Windows, YearlyCountsFromRowTotals) {
  EXPECT_EQ(7805u / period_window_length(7805, 30), 30u);
  EXPECT_EQ(3346u / 14u, 239u);
}

TEST(Windows, CalendarYears) {
  std::ostringstream csv;
  csv << "timestamp,A\n";
  for (int y = 2000; y < 2003; ++y)
    for (int m = 1; m <= (y == 2002 ? 2 : 4); ++m) csv << y << "-0" << m << "-01," << 1 + m << '\n';
  const WindowSplit s = split_calendar_years(parse(csv.str()));
  EXPECT_EQ(s.windows.size(), 2u);
  EXPECT_EQ(s.discarded_rows, 2u);
  EXPECT_EQ(s.windows[1].timestamps.front().year, 2001);
}

TEST(Ingest, DeterministicLoad) {
  const PricePanel a = parse(complete_csv(7));
  const PricePanel b = parse(complete_csv(7));
  EXPECT_EQ(a.prices, b.prices);
  EXPECT_EQ(a.tickers, b.tickers);
}
