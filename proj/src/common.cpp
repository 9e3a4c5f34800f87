#include "unresolved/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "unresolved/io.hpp"
#include "unresolved/rng.hpp"
#include "unresolved/timestamp.hpp"

namespace unresolved {

std::string_view to_string(Label label) {
  return label == Label::Unresolved ? "Unresolved" : "Resolved";
}

Label parse_label(std::string_view text) {
  if (text == "Unresolved") return Label::Unresolved;
  if (text == "Resolved") return Label::Resolved;
  throw DataError("unknown label '" + std::string(text) + "'");
}

// ---------------------------------------------------------------- time

namespace {

template <class Int>
Int digits(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
  Int value{};
  if (pos + len > text.size()) throw DataError("truncated timestamp '" + std::string(whole) + "'");
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc{} || ptr != first + len) {
    throw DataError("malformed timestamp '" + std::string(whole) + "'");
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c, std::string_view whole) {
  if (pos >= text.size() || text[pos] != c) {
    throw DataError("malformed timestamp '" + std::string(whole) + "'");
  }
}

}  // namespace

Timestamp make_timestamp(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) throw DataError("invalid calendar date");
  return Timestamp{std::chrono::sys_days{ymd}};
}

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  const int year = digits<int>(text, 0, 4, text);
  expect(text, 4, '-', text);
  const unsigned month = digits<unsigned>(text, 5, 2, text);
  expect(text, 7, '-', text);
  const unsigned day = digits<unsigned>(text, 8, 2, text);
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) throw DataError("invalid calendar date in '" + std::string(text) + "'");
  Timestamp t{sys_days{ymd}};
  if (text.size() == 10) return t;

  if (text[10] != 'T' && text[10] != ' ') throw DataError("malformed timestamp '" + std::string(text) + "'");
  const int hh = digits<int>(text, 11, 2, text);
  expect(text, 13, ':', text);
  const int mm = digits<int>(text, 14, 2, text);
  expect(text, 16, ':', text);
  const int ss = digits<int>(text, 17, 2, text);
  if (hh > 23 || mm > 59 || ss > 60) throw DataError("time out of range in '" + std::string(text) + "'");
  t += hours{hh} + minutes{mm} + seconds{ss};

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    std::string_view frac = text.substr(start, pos - start);
    if (frac.empty()) throw DataError("malformed fractional seconds in '" + std::string(text) + "'");
    int ms = 0;
    for (std::size_t i = 0; i < 3; ++i) ms = ms * 10 + (i < frac.size() ? frac[i] - '0' : 0);
    t += milliseconds{ms};
  }
  if (pos < text.size() && text[pos] == 'Z') ++pos;
  if (pos != text.size()) throw DataError("trailing characters in timestamp '" + std::string(text) + "'");
  return t;
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const sys_days day = floor<days>(t);
  const year_month_day ymd{day};
  auto rest = t - day;
  const auto h = duration_cast<hours>(rest);
  rest -= h;
  const auto m = duration_cast<minutes>(rest);
  rest -= m;
  const auto s = duration_cast<seconds>(rest);
  rest -= s;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(h.count()), static_cast<int>(m.count()),
                static_cast<int>(s.count()), static_cast<int>(rest.count()));
  return buf;
}

std::int64_t whole_days_between(Timestamp from, Timestamp to) {
  return std::chrono::floor<std::chrono::days>(to - from).count();
}

// ---------------------------------------------------------------- io

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "NA";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw InvariantError("to_chars failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  if (text == "NA" || text.empty()) return std::numeric_limits<double>::quiet_NaN();
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw DataError("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

// ---------------------------------------------------------------- rng

double Rng::normal(double mean, double sd) {
  // Box-Muller; one value per call keeps the stream position simple.
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential(double mean) {
  double u = uniform01();
  while (u <= 0.0) u = uniform01();
  return -mean * std::log(u);
}

double Rng::gamma(double shape) {
  // Marsaglia-Tsang, with the usual boost for shape < 1.
  if (shape < 1.0) {
    double u = uniform01();
    while (u <= 0.0) u = uniform01();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal(0.0, 1.0);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  return x / (x + y);
}

}  // namespace unresolved
