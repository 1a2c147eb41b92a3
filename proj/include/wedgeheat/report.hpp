#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wedgeheat/experiments.hpp"

namespace wedgeheat {

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);

/// 16 hex digits of fnv1a64(kind + '\n' + config.dump()). The config dump is
/// canonical because every writer emits keys in a fixed order.
std::string config_hash(const ExperimentReport& r);

/// Timestamp policy: SOURCE_DATE_EPOCH (seconds, UTC) when set, else the
/// wall clock when `wall_clock` is true, else none. ISO 8601, "Z" suffix.
std::optional<std::string> report_timestamp(bool wall_clock);

/// The full JSON document (schema in docs/report_schema.md). Non-finite
/// numbers become null.
Json report_to_json(const ExperimentReport& r);

/// RFC 4180 CSV: header row, `,` delimiter, shortest round-trip decimal
/// doubles, "nan" / "inf" / "-inf" for non-finite values, true/false.
std::string table_to_csv(const Table& t);

/// Shortest representation that reads back to the same double.
std::string format_double(double x);

struct WriteOptions {
  std::filesystem::path out_dir = ".";
  bool wall_clock = false;
};

struct WrittenReport {
  std::string hash;
  std::filesystem::path json;
  std::vector<std::filesystem::path> csv;  ///< primary table first
};

/// Writes <kind>_<hash>.json, <kind>_<hash>.csv (first table) and
/// <kind>_<hash>.<table>.csv (the others), each atomically. Sets
/// r.timestamp per report_timestamp. Creates out_dir if needed.
WrittenReport write_report(ExperimentReport& r, const WriteOptions& opt = {});

/// Write to a sibling temporary file, then rename over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace wedgeheat
