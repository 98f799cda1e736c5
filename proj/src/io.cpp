#include "snl/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "snl/error.hpp"

namespace snl::io {

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
  std::vector<double> row;
  const char* p = line.data();
  const char* end = line.data() + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) {
      throw InputError("csv line " + std::to_string(line_no) + ": cannot parse number");
    }
    row.push_back(v);
    p = next;
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p < end) {
      if (*p != ',') throw InputError("csv line " + std::to_string(line_no) + ": expected ','");
      ++p;
    }
  }
  return row;
}

}  // namespace

Matrix read_csv_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    rows.push_back(parse_row(line, line_no));
    if (rows.back().size() != rows.front().size())
      throw InputError("csv line " + std::to_string(line_no) + ": ragged row");
  }
  if (rows.empty()) throw InputError("csv: no data rows");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  return m;
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_csv_matrix(in);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericalError("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_csv_matrix(std::ostream& out, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_csv_matrix(out, m);
}

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    data.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  }
  json j{{"dim", m.rows()}, {"data", std::move(data)}};
  if (m.rows() != m.cols()) {
    j["rows"] = m.rows();
    j["cols"] = m.cols();
  }
  return j;
}

Matrix matrix_from_json(const json& j) {
  if (!j.contains("data") || !j["data"].is_array() || j["data"].empty())
    throw InputError("matrix json: missing or empty \"data\"");
  const auto& data = j["data"];
  const std::size_t rows = data.size();
  const std::size_t cols = data[0].size();
  if (j.contains("dim") && j["dim"].get<std::size_t>() != rows)
    throw InputError("matrix json: \"dim\" disagrees with data");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!data[i].is_array() || data[i].size() != cols) throw InputError("matrix json: ragged row");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!data[i][k].is_number()) throw InputError("matrix json: non-numeric entry");
      m(i, k) = data[i][k].get<double>();
    }
  }
  return m;
}

json read_json(std::istream& in) {
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid json: ") + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_json(in);
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string config_hash(const std::string& canonical_config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json Provenance::to_json() const {
  return {{"seed", seed}, {"config_hash", config_hash}, {"tool_version", tool_version}};
}

std::string Provenance::csv_comment() const {
  return "# seed=" + std::to_string(seed) + ",config_hash=" + config_hash +
         ",tool_version=" + tool_version;
}

}  // namespace snl::io
