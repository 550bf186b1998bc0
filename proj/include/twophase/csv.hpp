#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace twophase {

using CsvCell = std::variant<double, long long, std::string>;

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<CsvCell>> rows;
};

/// Shortest decimal that reads back to the same double.
std::string format_real(double x);

/// Header row then one line per row. Reals are written with format_real;
/// strings are quoted when they contain a comma, quote, or line break.
/// Returns the number of bytes written. Throws PreconditionError on ragged rows.
std::size_t emit_csv(const CsvTable& table, std::ostream& out);

/// Throws IoError if the file cannot be written.
std::size_t emit_csv(const CsvTable& table, const std::filesystem::path& destination);

}  // namespace twophase
