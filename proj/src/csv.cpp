#include "lpnest/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace lpnest {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (const char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

Dataset read_csv(std::istream& in) {
  Dataset data;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  data.columns = split_line(line);
  data.cols = data.columns.size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != data.cols) {
      throw std::runtime_error("csv: line " + std::to_string(line_no) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(data.cols));
    }
    for (const std::string& f : fields) {
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (end == f.c_str() || *end != '\0') {
        throw std::runtime_error("csv: line " + std::to_string(line_no) +
                                 ": not a number: '" + f + "'");
      }
      data.values.push_back(v);
    }
    ++data.rows;
  }
  return data;
}

Dataset read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  return read_csv(in);
}

void write_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t j = 0; j < data.cols; ++j) {
    if (j) out << ',';
    out << data.columns[j];
  }
  out << '\n';
  for (std::size_t i = 0; i < data.rows; ++i) {
    for (std::size_t j = 0; j < data.cols; ++j) {
      if (j) out << ',';
      out << format_double(data.at(i, j));
    }
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
  write_csv(out, data);
}

}  // namespace lpnest
