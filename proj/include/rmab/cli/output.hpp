#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rmab/cli/config.hpp"

namespace rmab::cli {

inline constexpr const char* kToolkitName = "rmab";
inline constexpr const char* kToolkitVersion = "1.0.0";

using Cell = std::variant<long long, double, std::string>;

/// One result table with its run metadata. Column order is frozen per mode.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  /// Written as "# key=value" lines ahead of the CSV header, or into the
  /// JSON sidecar. Kept in insertion order.
  std::vector<std::pair<std::string, std::string>> metadata;

  void add_meta(std::string key, std::string value) { metadata.emplace_back(std::move(key), std::move(value)); }
};

/// 9 significant digits, scientific, locale independent ("1.50000000e-01").
std::string format_number(double value);

std::string to_csv(const Table& table);
/// JSON array of row objects keyed by column name.
std::string to_json(const Table& table);
/// JSON object holding the metadata.
std::string metadata_json(const Table& table);

/// Sidecar path for JSON output: "<output>.meta.json".
std::string metadata_path(const std::string& output);

/// Write to `output` ("-" is standard output). JSON output also writes the
/// metadata sidecar when `output` is a file.
void write_table(const Table& table, Format format, const std::string& output);

}  // namespace rmab::cli
