#include "twophase/csv.hpp"

#include "twophase/errors.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>

namespace twophase {
namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string render(const CsvCell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_real(*d);
  if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
  return quote(std::get<std::string>(cell));
}

}  // namespace

std::string format_real(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::size_t emit_csv(const CsvTable& table, std::ostream& out) {
  for (const auto& row : table.rows)
    if (row.size() != table.columns.size())
      throw PreconditionError("emit_csv: row width does not match the header");

  std::size_t bytes = 0;
  auto line = [&](const std::string& s) {
    out << s << '\n';
    bytes += s.size() + 1;
  };
  std::string header;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) header += ',';
    header += quote(table.columns[c]);
  }
  line(header);
  for (const auto& row : table.rows) {
    std::string text;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) text += ',';
      text += render(row[c]);
    }
    line(text);
  }
  return bytes;
}

std::size_t emit_csv(const CsvTable& table, const std::filesystem::path& destination) {
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + destination.string() + "'");
  const std::size_t bytes = emit_csv(table, out);
  out.flush();
  if (!out) throw IoError("write to '" + destination.string() + "' failed");
  return bytes;
}

}  // namespace twophase
