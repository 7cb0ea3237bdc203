#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpnest {

// Row-major sample matrix with column labels; rows are samples.
struct Dataset {
  std::vector<std::string> columns;
  std::vector<double> values;  // rows * cols, row-major
  std::size_t rows = 0;
  std::size_t cols = 0;

  static Dataset zeros(std::size_t rows, std::size_t cols) {
    Dataset d;
    d.rows = rows;
    d.cols = cols;
    d.values.assign(rows * cols, 0.0);
    d.columns.reserve(cols);
    for (std::size_t j = 0; j < cols; ++j) d.columns.push_back("x" + std::to_string(j));
    return d;
  }

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }

  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

}  // namespace lpnest
