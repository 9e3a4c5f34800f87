#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unresolved/common.hpp"
#include "unresolved/profile.hpp"
#include "unresolved/timestamp.hpp"

namespace unresolved {

enum class PostType { Question, Answer };

struct PostRow {
  std::int64_t id = 0;
  PostType post_type = PostType::Question;
  std::optional<std::int64_t> parent_id;           // answers only
  std::optional<std::int64_t> accepted_answer_id;  // questions only
  Timestamp creation_date{};
  std::int64_t score = 0;
  std::string body;  // HTML, XML entities already decoded
  std::optional<std::int64_t> owner_user_id;
  std::int64_t answer_count = 0;  // as recorded in the dump (questions only)
  bool operator==(const PostRow&) const = default;
};

struct UserRow {
  std::int64_t id = 0;
  std::int64_t reputation = 0;
  Timestamp last_access_date{};
  bool operator==(const UserRow&) const = default;
};

// Malformed XML. The byte offset points into the input stream.
class XmlParseError : public DataError {
 public:
  XmlParseError(const std::string& message, std::int64_t byte_offset)
      : DataError(message + " at byte " + std::to_string(byte_offset)), byte_offset_(byte_offset) {}
  std::int64_t byte_offset() const { return byte_offset_; }

 private:
  std::int64_t byte_offset_;
};

struct RowError {
  std::size_t row_index = 0;  // 0-based ordinal among <row> elements
  std::string message;
};

template <class Row>
struct RowsResult {
  std::vector<Row> rows;
  std::vector<RowError> errors;
  std::size_t skipped = 0;  // rows of other post types
};

using PostsResult = RowsResult<PostRow>;
using UsersResult = RowsResult<UserRow>;

// Stream the Stack Exchange dump schema: a root element holding <row .../>
// elements with CamelCase attributes. Row-level problems are collected and
// the row skipped; malformed XML throws XmlParseError.
PostsResult parse_posts(std::istream& in);
UsersResult parse_users(std::istream& in);

void write_posts_xml(std::ostream& out, std::span<const PostRow> posts);
void write_users_xml(std::ostream& out, std::span<const UserRow> users);

// ---------------------------------------------------------------- threads

struct QuestionThread {
  PostRow question;
  std::vector<PostRow> answers;  // ascending id
  std::shared_ptr<const UserProfile> owner;  // null when unknown
  Label label = Label::Unresolved;
  std::optional<std::int64_t> best_answer_id;  // null iff no answers

  const PostRow* find_answer(std::int64_t id) const;
  const PostRow* best_answer() const;
  // The answer used for topic comparison: the accepted answer of a resolved
  // question, otherwise the best (top-voted) answer.
  const PostRow* topic_answer() const;
};

struct LinkReport {
  std::size_t dangling_answers = 0;      // parent_id names no question
  std::size_t broken_accepted_refs = 0;  // accepted_answer_id names no linked answer
  std::size_t owners_without_profile = 0;
  std::vector<std::string> warnings;
};

struct LinkResult {
  std::vector<QuestionThread> threads;  // ascending question id
  LinkReport report;
};

// Maximum score; ties by earliest creation date, then lowest id.
std::optional<std::int64_t> select_best_answer(std::span<const PostRow> answers);

LinkResult link_threads(std::span<const PostRow> posts, std::span<const UserRow> users);

// ---------------------------------------------------------------- selection

struct SelectionCriteria {
  int min_age_days = 183;
  int min_answers = 10;
  Timestamp analysis_date = make_timestamp(2015, 2, 18);

  void validate() const;  // throws ConfigError
  bool operator==(const SelectionCriteria&) const = default;
};

struct SelectionCounts {
  std::size_t considered = 0;
  std::size_t retained = 0;
  std::size_t resolved = 0;
  std::size_t unresolved = 0;
  std::size_t too_young = 0;
  std::size_t too_few_answers = 0;
  std::size_t no_owner = 0;  // owner id absent or unknown user
  bool operator==(const SelectionCounts&) const = default;
};

struct Dataset {
  SelectionCriteria criteria;
  std::vector<QuestionThread> threads;  // ascending question id
  SelectionCounts counts;
};

// Keeps threads aged >= min_age_days with >= min_answers linked answers and
// a known owner. Throws DataError naming the first question created after
// the analysis date.
Dataset apply_selection(std::span<const QuestionThread> threads, const SelectionCriteria& criteria);

}  // namespace unresolved
