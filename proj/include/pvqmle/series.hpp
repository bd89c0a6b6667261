#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pvq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-space input, carrying the 1-based row it was found at.
class DataError : public Error {
 public:
  DataError(std::size_t row, const std::string& what);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

enum class SampleSpace { Counts, UnitInterval, Reals };

std::string_view to_string(SampleSpace space);
SampleSpace parse_sample_space(std::string_view name);

/// Ordered univariate observations Y_1..Y_T with a declared sample space.
///
/// Construction validates the space: counts must be non-negative integers,
/// unit-interval values must lie strictly inside (0, 1), and T >= 2.
class TimeSeries {
 public:
  TimeSeries(std::vector<double> values, SampleSpace space);

  std::span<const double> values() const noexcept { return values_; }
  SampleSpace space() const noexcept { return space_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t t) const { return values_[t]; }

  double mean() const;
  /// Sample standard deviation (n - 1 denominator).
  double stddev() const;

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<double> values_;
  SampleSpace space_;
};

/// One value per row; a single non-numeric first row is treated as a header.
TimeSeries load_csv(const std::filesystem::path& path, SampleSpace space);
TimeSeries parse_csv(std::string_view text, SampleSpace space);

/// Writes the series in the format accepted by load_csv (header "y").
void write_csv(const TimeSeries& series, const std::filesystem::path& path);
std::string to_csv(const TimeSeries& series);

/// Affine map (y - lower) / (upper - lower) into the open unit interval.
TimeSeries rescale_to_unit(const TimeSeries& series, double lower, double upper);

}  // namespace pvq
