#pragma once

#include <cstdint>
#include <vector>

#include "unresolved/timestamp.hpp"

namespace unresolved {

struct QuestionOutcome {
  std::int64_t question_id = 0;
  bool was_answered = false;
  bool was_resolved = false;  // implies was_answered
  bool operator==(const QuestionOutcome&) const = default;
};

// A question owner as seen from the whole dump: reputation, last access and
// the outcome of every question they asked.
struct UserProfile {
  std::int64_t user_id = 0;
  std::int64_t reputation = 0;
  Timestamp last_access_date{};
  std::vector<QuestionOutcome> question_history;  // ascending question id
  bool operator==(const UserProfile&) const = default;
};

}  // namespace unresolved
