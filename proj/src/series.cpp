#include "pvqmle/series.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

namespace pvq {

DataError::DataError(std::size_t row, const std::string& what)
    : Error(fmt::format("row {}: {}", row, what)), row_(row) {}

std::string_view to_string(SampleSpace space) {
  switch (space) {
    case SampleSpace::Counts: return "counts";
    case SampleSpace::UnitInterval: return "unit";
    case SampleSpace::Reals: return "reals";
  }
  return "reals";
}

SampleSpace parse_sample_space(std::string_view name) {
  if (name == "counts") return SampleSpace::Counts;
  if (name == "unit" || name == "unit-interval") return SampleSpace::UnitInterval;
  if (name == "reals") return SampleSpace::Reals;
  throw Error(fmt::format("unknown sample space '{}'", name));
}

namespace {

void check_value(double y, SampleSpace space, std::size_t row) {
  if (!std::isfinite(y)) throw DataError(row, "non-finite value");
  switch (space) {
    case SampleSpace::Counts:
      if (y < 0.0 || y != std::floor(y))
        throw DataError(row, fmt::format("{} is not a non-negative integer count", y));
      break;
    case SampleSpace::UnitInterval:
      if (!(y > 0.0 && y < 1.0))
        throw DataError(row, fmt::format("{} is outside the open interval (0,1)", y));
      break;
    case SampleSpace::Reals:
      break;
  }
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view token, double& out) {
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

}  // namespace

TimeSeries::TimeSeries(std::vector<double> values, SampleSpace space)
    : values_(std::move(values)), space_(space) {
  for (std::size_t i = 0; i < values_.size(); ++i) check_value(values_[i], space_, i + 1);
  if (values_.size() < 2)
    throw Error(fmt::format("a time series needs at least 2 observations, got {}", values_.size()));
}

double TimeSeries::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double TimeSeries::stddev() const {
  const double m = mean();
  double ss = 0.0;
  for (double y : values_) ss += (y - m) * (y - m);
  return std::sqrt(ss / static_cast<double>(values_.size() - 1));
}

TimeSeries parse_csv(std::string_view text, SampleSpace space) {
  std::vector<double> values;
  std::size_t row = 0;
  bool first_data_row = true;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++row;
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    // Only the first column is read; anything after a comma is ignored.
    auto token = trim(line.substr(0, line.find(',')));
    double y = 0.0;
    if (!parse_double(token, y)) {
      if (first_data_row && values.empty()) {
        first_data_row = false;
        continue;
      }
      throw DataError(row, fmt::format("cannot parse '{}' as a number", token));
    }
    first_data_row = false;
    check_value(y, space, row);
    values.push_back(y);
  }
  if (values.size() < 2)
    throw Error(fmt::format("a time series needs at least 2 observations, got {}", values.size()));
  return TimeSeries(std::move(values), space);
}

TimeSeries load_csv(const std::filesystem::path& path, SampleSpace space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), space);
}

std::string to_csv(const TimeSeries& series) {
  std::string out = "y\n";
  for (double y : series.values()) {
    if (series.space() == SampleSpace::Counts)
      out += fmt::format("{}\n", static_cast<long long>(y));
    else
      out += fmt::format("{}\n", y);  // shortest round-trip representation
  }
  return out;
}

void write_csv(const TimeSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << to_csv(series);
}

TimeSeries rescale_to_unit(const TimeSeries& series, double lower, double upper) {
  if (!(lower < upper)) throw Error(fmt::format("rescale bounds must satisfy lower < upper ({} >= {})", lower, upper));
  std::vector<double> out;
  out.reserve(series.size());
  const double width = upper - lower;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = series[i];
    if (!(y > lower && y < upper))
      throw DataError(i + 1, fmt::format("{} is not strictly inside ({}, {})", y, lower, upper));
    out.push_back((y - lower) / width);
  }
  return TimeSeries(std::move(out), SampleSpace::UnitInterval);
}

}  // namespace pvq
