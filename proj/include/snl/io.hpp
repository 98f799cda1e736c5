#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"
#include "snl/matrix.hpp"

namespace snl::io {

using json = nlohmann::json;

// Dense CSV: one row per line, comma separated, '.' decimal separator, no
// header. Lines starting with '#' and blank lines are skipped on read.
Matrix read_csv_matrix(std::istream& in);
Matrix read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(std::ostream& out, const Matrix& m);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);

// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

// {"dim": n, "data": [[...], ...]}. Non-square matrices also carry
// "rows"/"cols"; the reader infers the shape from "data" either way.
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json read_json(const std::filesystem::path& path);
json read_json(std::istream& in);
void write_json(const std::filesystem::path& path, const json& j);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string config_hash(const std::string& canonical_config);

// Embedded in every artifact the tools write.
struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string tool_version = SNL_VERSION;

  json to_json() const;
  // "# seed=...,config_hash=...,tool_version=..."
  std::string csv_comment() const;
};

}  // namespace snl::io
