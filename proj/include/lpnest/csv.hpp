#pragma once

#include <iosfwd>
#include <string>

#include "lpnest/dataset.hpp"

namespace lpnest {

// Comma-separated, one header row, '.' decimal point, no quoting.
// Numbers are written with up to 17 significant digits so values
// round-trip exactly.
Dataset read_csv(std::istream& in);
Dataset read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const Dataset& data);
void write_csv_file(const std::string& path, const Dataset& data);

// Shortest decimal form of x that parses back to the same double.
std::string format_double(double x);

}  // namespace lpnest
