#include "ancestry/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "ancestry/errors.hpp"

namespace ancestry {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

TimeSeries ingest_csv_stream(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) {
    throw InsufficientDataError(origin + ": empty file");
  }
  const std::vector<std::string> names = split_line(line);
  if (names.size() < 2) {
    throw InsufficientDataError(origin + ": need at least 2 columns, found " +
                                std::to_string(names.size()));
  }
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (names[c].empty()) {
      throw ParseError(origin + ": empty name for column " + std::to_string(c + 1));
    }
  }

  const std::size_t d = names.size();
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != d) {
      throw ParseError(origin + ": row " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(d));
    }
    for (std::size_t c = 0; c < d; ++c) {
      if (cells[c].empty()) {
        throw MissingDataError(origin + ": missing value at row " +
                               std::to_string(line_no) + ", column " + names[c]);
      }
      const char* text = cells[c].c_str();
      char* end = nullptr;
      const double v = std::strtod(text, &end);
      if (end == text || *end != '\0') {
        throw ParseError(origin + ": non-numeric cell '" + cells[c] + "' at row " +
                         std::to_string(line_no) + ", column " + names[c]);
      }
      if (!std::isfinite(v)) {
        throw MissingDataError(origin + ": non-finite value at row " +
                               std::to_string(line_no) + ", column " + names[c]);
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) {
    throw InsufficientDataError(origin + ": header only, no data rows");
  }

  Eigen::MatrixXd data(rows, d);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < d; ++c) data(r, c) = values[r * d + c];
  }
  return make_series(std::move(data), names);
}

TimeSeries ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return ingest_csv_stream(in, path);
}

void write_csv(const TimeSeries& x, std::ostream& out) {
  for (std::size_t c = 0; c < x.names.size(); ++c) {
    if (c > 0) out << ',';
    out << x.names[c];
  }
  out << '\n';
  char buf[40];
  for (Eigen::Index r = 0; r < x.T(); ++r) {
    for (Eigen::Index c = 0; c < x.d(); ++c) {
      if (c > 0) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g", x.data(r, c));
      out << buf;
    }
    out << '\n';
  }
}

void write_csv(const TimeSeries& x, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_csv(x, out);
  if (!out.good()) throw IoError("failed while writing '" + path + "'");
}

TimeSeries shift_column(const TimeSeries& x, const std::string& column) {
  const auto it = std::find(x.names.begin(), x.names.end(), column);
  if (it == x.names.end()) {
    std::string known;
    for (const auto& n : x.names) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("no column named '" + column + "' (have: " + known + ")");
  }
  if (x.T() < 2) throw InsufficientDataError("cannot shift a single-row series");
  const Eigen::Index c = it - x.names.begin();
  Eigen::MatrixXd data = x.data.topRows(x.T() - 1);
  data.col(c) = x.data.col(c).tail(x.T() - 1);
  return make_series(std::move(data), x.names);
}

}  // namespace ancestry
