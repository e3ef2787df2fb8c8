#ifndef GVACL_CSV_HPP
#define GVACL_CSV_HPP

#include <iosfwd>
#include <string>

#include "gvacl/data.hpp"

namespace gvacl {

// Long-format CSV: header `row,col,y,x1[,x2,...]`, UTF-8, `.` decimal
// separator, one record per cell, complete grid. Values are written with 17
// significant digits so a round trip is bit-exact.
void write_csv(std::ostream& out, const Dataset& data);
void write_csv_file(const std::string& path, const Dataset& data);

// Parses and validates; throws DataError with a line-numbered message on
// schema violations (duplicate (row,col), missing cells, bad domains).
Dataset read_csv(std::istream& in, const Family& family);
Dataset read_csv_file(const std::string& path, const Family& family);

}  // namespace gvacl

#endif
