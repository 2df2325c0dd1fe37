#pragma once

#include <string>
#include <vector>

#include "lyapflow/types.hpp"

namespace lyapflow {

/// Shortest text that reads back to the same double ("nan", "inf" for
/// non-finite values).
std::string format_double(double v);

/// CSV assembled in memory, written in one go.
class CsvTable
{
public:
  explicit CsvTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_; }

  CsvTable& row(const std::vector<double>& values);
  /// Leading integer columns (ids, step indices) followed by doubles.
  CsvTable& row(const std::vector<long long>& ints, const std::vector<double>& values);

  const std::string& text() const { return text_; }
  void write(const std::string& path) const;

private:
  void check_width(std::size_t n) const;

  std::vector<std::string> header_;
  std::string text_;
  std::size_t rows_ = 0;
};

/// Names with a running index: prefix0 .. prefix{n-1} (or from `first`).
std::vector<std::string> indexed_names(const std::string& prefix, int n, int first = 0);

/// Writes `content` to `path`; throws IoError.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace lyapflow
