#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "cmjlab/errors.hpp"

namespace cmjlab {

/// Shortest round-trip decimal form of a double. `.` decimal point, no
/// locale, no thousands separators -- byte-stable across runs.
inline std::string fmt_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw NumericalError("fmt_double: to_chars failed");
  return std::string(buf, ptr);
}

inline std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

/// Write a whole file through a `.partial` sibling and rename into place, so
/// a crash never leaves a truncated file under the final name.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".partial";
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ValidationError("short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open for reading: " + path.string());
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return s;
}

}  // namespace cmjlab
