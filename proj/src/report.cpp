#include "wedgeheat/report.hpp"

#include <unistd.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace wedgeheat {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentReport& r) {
  const std::uint64_t h = fnv1a64(r.kind + '\n' + r.config.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string iso8601(std::time_t secs) {
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// The serializer already prints non-finite numbers as null; storing null
// keeps the in-memory document equal to what a reader gets back.
Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json cell_json(const Cell& c) {
  struct V {
    Json operator()(double x) const { return finite_or_null(x); }
    Json operator()(std::int64_t x) const { return Json(x); }
    Json operator()(const std::string& x) const { return Json(x); }
    Json operator()(bool x) const { return Json(x); }
  };
  return std::visit(V{}, c);
}

Json sanitized(const Json& j) {
  if (j.is_number_float()) return finite_or_null(j.get<double>());
  if (!j.is_structured()) return j;
  Json out = j;
  for (auto it = out.begin(); it != out.end(); ++it) *it = sanitized(*it);
  return out;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string cell_csv(const Cell& c) {
  struct V {
    std::string operator()(double x) const { return format_double(x); }
    std::string operator()(std::int64_t x) const { return std::to_string(x); }
    std::string operator()(const std::string& s) const { return csv_quote(s); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  };
  return std::visit(V{}, c);
}

}  // namespace

std::optional<std::string> report_timestamp(bool wall_clock) {
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    long long secs = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto [ptr, ec] = std::from_chars(env, end, secs);
    if (ec != std::errc{} || ptr != end || secs < 0) {
      throw std::invalid_argument("SOURCE_DATE_EPOCH is not a non-negative integer");
    }
    return iso8601(static_cast<std::time_t>(secs));
  }
  if (wall_clock) return iso8601(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now()));
  return std::nullopt;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json report_to_json(const ExperimentReport& r) {
  const std::string hash = config_hash(r);
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = r.kind;
  j["tool_version"] = r.tool_version;
  j["timestamp"] = r.timestamp ? Json(*r.timestamp) : Json(nullptr);
  j["config_hash"] = hash;
  j["config"] = sanitized(r.config);
  j["all_pass"] = r.all_pass();
  j["verdicts"] = Json::array();
  for (const auto& v : r.verdicts) j["verdicts"].push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  j["summary"] = sanitized(r.summary);
  j["tables"] = Json::array();
  for (std::size_t i = 0; i < r.tables.size(); ++i) {
    const auto& t = r.tables[i];
    Json rows = Json::array();
    for (const auto& row : t.rows) {
      Json jr = Json::array();
      for (const auto& c : row) jr.push_back(cell_json(c));
      rows.push_back(std::move(jr));
    }
    const std::string file = r.kind + "_" + hash + (i == 0 ? "" : "." + t.name) + ".csv";
    j["tables"].push_back({{"name", t.name}, {"file", file}, {"columns", t.columns}, {"rows", std::move(rows)}});
  }
  return j;
}

std::string table_to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_quote(t.columns[i]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += cell_csv(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    f.close();
    if (!f) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

WrittenReport write_report(ExperimentReport& r, const WriteOptions& opt) {
  r.timestamp = report_timestamp(opt.wall_clock);
  std::filesystem::create_directories(opt.out_dir);

  WrittenReport out;
  out.hash = config_hash(r);
  const std::string stem = r.kind + "_" + out.hash;
  out.json = opt.out_dir / (stem + ".json");
  write_file_atomic(out.json, report_to_json(r).dump(2) + "\n");
  for (std::size_t i = 0; i < r.tables.size(); ++i) {
    const auto& t = r.tables[i];
    auto path = opt.out_dir / (stem + (i == 0 ? "" : "." + t.name) + ".csv");
    write_file_atomic(path, table_to_csv(t));
    out.csv.push_back(std::move(path));
  }
  return out;
}

}  // namespace wedgeheat
