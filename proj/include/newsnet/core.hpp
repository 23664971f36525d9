#pragma once
// Shared vocabulary for the newsnet library: calendar weeks, error types,
// diagnostics, seed derivation, number formatting and a minimal CSV codec.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

namespace newsnet {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that cannot be parsed or violates a schema.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of iterations.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : Error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

// ---------------------------------------------------------------------------
// Dates
// ---------------------------------------------------------------------------

/// Calendar day. Weeks are labelled by the Sunday that ends them.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days d) : days_(d) {}
  Date(int y, unsigned m, unsigned d)
      : days_(std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}) {}

  /// Strict "YYYY-MM-DD".
  static Date parse(std::string_view s) {
    auto bad = [&] { return ParseError("invalid date '" + std::string(s) + "'"); };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') throw bad();
    int y = 0;
    unsigned m = 0, d = 0;
    auto num = [&](std::string_view part, auto& out) {
      auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
      if (ec != std::errc{} || p != part.data() + part.size()) throw bad();
    };
    num(s.substr(0, 4), y);
    num(s.substr(5, 2), m);
    num(s.substr(8, 2), d);
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                    std::chrono::day{d}};
    if (!ymd.ok()) throw bad();
    return Date(std::chrono::sys_days{ymd});
  }

  std::string str() const {
    std::chrono::year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
  }

  std::chrono::sys_days days() const { return days_; }
  long serial() const { return days_.time_since_epoch().count(); }
  bool is_sunday() const { return std::chrono::weekday{days_} == std::chrono::Sunday; }

  Date plus_days(int n) const { return Date(days_ + std::chrono::days{n}); }
  Date plus_weeks(int n) const { return plus_days(7 * n); }

  /// The Sunday label of the week containing this day (itself when Sunday).
  Date week_label() const {
    unsigned wd = std::chrono::weekday{days_}.c_encoding();  // Sunday == 0
    return wd == 0 ? *this : plus_days(int(7 - wd));
  }

  friend auto operator<=>(const Date&, const Date&) = default;
  friend bool operator==(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

inline long days_between(const Date& a, const Date& b) { return b.serial() - a.serial(); }

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

/// Collects non-fatal diagnostics (rejected records, dropped rows).
struct Diagnostics {
  std::vector<std::string> messages;
  bool echo = false;

  void warn(std::string msg) {
    if (echo) std::cerr << "warning: " << msg << '\n';
    messages.push_back(std::move(msg));
  }
  bool empty() const { return messages.empty(); }
};

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a; stable across platforms, used for stage sub-seeds and config hashes.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  return splitmix64(master ^ fnv1a(label));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label, long index) {
  return splitmix64(derive_seed(master, label) + static_cast<std::uint64_t>(index));
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

/// Shortest round-trip representation; identical bytes for identical doubles.
inline std::string fmt_num(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline double parse_double(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParseError("invalid number '" + std::string(s) + "'");
  return v;
}

inline long parse_long(std::string_view s) {
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParseError("invalid integer '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180 subset: quoted fields, doubled quotes, no embedded newlines)
// ---------------------------------------------------------------------------

using CsvRow = std::vector<std::string>;

inline std::string csv_field(std::string_view f) {
  if (f.find_first_of(",\"\n") == std::string_view::npos) return std::string(f);
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_line(const CsvRow& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += csv_field(row[i]);
  }
  return out + '\n';
}

inline CsvRow parse_csv_line(std::string_view line) {
  CsvRow row;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  row.push_back(std::move(cur));
  return row;
}

struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError("missing CSV column '" + std::string(name) + "'");
  }
};

inline CsvTable parse_csv(std::istream& in, const std::string& source = "csv") {
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto row = parse_csv_line(line);
    if (first) {
      t.header = std::move(row);
      first = false;
    } else {
      if (row.size() != t.header.size())
        throw ParseError(source + ": row width " + std::to_string(row.size()) +
                         " != header width " + std::to_string(t.header.size()));
      t.rows.push_back(std::move(row));
    }
  }
  if (first) throw ParseError(source + ": empty CSV");
  return t;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_csv(in, path.string());
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Write-temp-then-rename so readers never observe a partial artifact.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Parallelism
// ---------------------------------------------------------------------------

/// Runs body(i) for i in [0, n) on up to hardware_concurrency threads. Each
/// index must write only its own output slot.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace newsnet
