#include "lyapflow/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lyapflow/error.hpp"

namespace lyapflow {

std::string format_double(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header))
{
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i)
      text_ += ',';
    text_ += header_[i];
  }
  text_ += '\n';
}

void CsvTable::check_width(std::size_t n) const
{
  if (n != header_.size())
    throw DimensionError("csv row has " + std::to_string(n) + " fields, header has " +
                         std::to_string(header_.size()));
}

CsvTable& CsvTable::row(const std::vector<double>& values)
{
  return row({}, values);
}

CsvTable& CsvTable::row(const std::vector<long long>& ints, const std::vector<double>& values)
{
  check_width(ints.size() + values.size());
  bool first = true;
  for (long long i : ints) {
    if (!first)
      text_ += ',';
    text_ += std::to_string(i);
    first = false;
  }
  for (double v : values) {
    if (!first)
      text_ += ',';
    text_ += format_double(v);
    first = false;
  }
  text_ += '\n';
  ++rows_;
  return *this;
}

void CsvTable::write(const std::string& path) const
{
  write_text_file(path, text_);
}

std::vector<std::string> indexed_names(const std::string& prefix, int n, int first)
{
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i)
    out.push_back(prefix + std::to_string(first + i));
  return out;
}

void write_text_file(const std::string& path, const std::string& content)
{
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw IoError("cannot open " + path + " for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.close();
  if (!f)
    throw IoError("failed writing " + path);
}

std::string read_text_file(const std::string& path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw IoError("cannot open " + path);
  std::ostringstream s;
  s << f.rdbuf();
  if (f.bad())
    throw IoError("failed reading " + path);
  return s.str();
}

} // namespace lyapflow
