#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace unresolved {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" and "YYYY-MM-DDTHH:MM:SS.fff"
// (the Stack Exchange dump format). All times are UTC. Throws DataError.
Timestamp parse_timestamp(std::string_view text);

// Always emits millisecond precision, e.g. "2015-02-18T00:00:00.000".
std::string format_timestamp(Timestamp t);

// floor((to - from) / 1 day); negative when `to` precedes `from`.
std::int64_t whole_days_between(Timestamp from, Timestamp to);

Timestamp make_timestamp(int year, unsigned month, unsigned day);

}  // namespace unresolved
