#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "qmg/errors.hpp"

namespace qmg::csv {

/// Shortest decimal that round-trips to the same double.
inline std::string format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("csv::format: conversion failed");
  return std::string(buf, ptr);
}

inline std::string format(std::size_t v) { return std::to_string(v); }
inline std::string format(int v) { return std::to_string(v); }
inline std::string format(const std::string& v) { return v; }
inline std::string format(const char* v) { return v; }
inline std::string format(bool v) { return v ? "1" : "0"; }

/// Row-oriented writer; fields are written verbatim, so callers pass
/// plain tokens without commas.
class Writer {
 public:
  explicit Writer(std::vector<std::string> header) : columns_(header.size()) { row_strings(header); }

  template <class... Ts>
  void row(const Ts&... fields) {
    if (sizeof...(Ts) != columns_) throw ContractViolation("csv row has the wrong field count");
    std::vector<std::string> f{format(fields)...};
    row_strings(f);
  }

  const std::string& str() const { return out_; }

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << out_;
  }

 private:
  void row_strings(const std::vector<std::string>& f) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out_ += ',';
      out_ += f[i];
    }
    out_ += '\n';
  }

  std::size_t columns_;
  std::string out_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name, or -1.
  long column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<long>(i);
    return -1;
  }

  std::vector<double> numeric(std::size_t col) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(std::stod(r.at(col)));
    return out;
  }
};

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) {
    while (!cur.empty() && (cur.back() == '\r' || cur.back() == ' ')) cur.pop_back();
    std::size_t b = 0;
    while (b < cur.size() && cur[b] == ' ') ++b;
    out.push_back(cur.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline Table read(std::istream& is) {
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      t.header = split(line);
      first = false;
    } else {
      t.rows.push_back(split(line));
    }
  }
  return t;
}

inline Table read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  return read(is);
}

}  // namespace qmg::csv
