#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "venuestab/errors.hpp"
#include "venuestab/version.hpp"

namespace venuestab {

// Shortest decimal form that round-trips the exact double value.
inline std::string format_double(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a64_hex(const std::string& data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

// Leading comment line carried by every generated file: tool version plus a
// hash of the run configuration, so outputs can be traced back to their run.
inline std::string file_header(const std::string& config_hash) {
  return std::string("# venuestab ") + kVersion + " config=" + config_hash + "\n";
}

// Write-to-temp-then-rename so readers never observe a partial file.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

// Lines of a text file, minus blank lines and "#" comment lines.
inline std::vector<std::string> read_data_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

// `venue_id,label` CSV with labels TT or NTT; a header row is optional.
inline std::map<std::string, std::string> read_labels_csv(const std::filesystem::path& path) {
  std::map<std::string, std::string> labels;
  for (const std::string& line : read_data_lines(path)) {
    std::vector<std::string> cells = split(line, ',');
    if (cells.size() != 2) throw ParseError("labels file " + path.string() + ": expected 2 columns, got line: " + line);
    if (cells[0] == "venue_id" && cells[1] == "label") continue;
    if (cells[1] != "TT" && cells[1] != "NTT")
      throw ParseError("labels file " + path.string() + ": label must be TT or NTT, got '" + cells[1] + "'");
    if (!labels.emplace(cells[0], cells[1]).second)
      throw ParseError("labels file " + path.string() + ": duplicate venue '" + cells[0] + "'");
  }
  if (labels.empty()) throw ParseError("labels file " + path.string() + ": no rows");
  return labels;
}

}  // namespace venuestab
