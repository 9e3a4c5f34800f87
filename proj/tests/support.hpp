#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <unistd.h>

#include "unresolved/dump.hpp"
#include "unresolved/rng.hpp"

namespace testing {

using namespace unresolved;

inline bool rel_close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

inline Timestamp day(int y, unsigned m, unsigned d) { return make_timestamp(y, m, d); }

inline Timestamp days_before(Timestamp t, int days) { return t - std::chrono::days(days); }

inline PostRow question(std::int64_t id, std::int64_t owner, Timestamp created, std::int64_t score = 0,
                        std::optional<std::int64_t> accepted = std::nullopt, std::string body = "<p>q</p>") {
  PostRow p;
  p.id = id;
  p.post_type = PostType::Question;
  p.accepted_answer_id = accepted;
  p.creation_date = created;
  p.score = score;
  p.body = std::move(body);
  p.owner_user_id = owner;
  return p;
}

inline PostRow answer(std::int64_t id, std::int64_t parent, Timestamp created, std::int64_t score = 0,
                      std::string body = "<p>a</p>") {
  PostRow p;
  p.id = id;
  p.post_type = PostType::Answer;
  p.parent_id = parent;
  p.creation_date = created;
  p.score = score;
  p.body = std::move(body);
  p.owner_user_id = 1000 + id;
  return p;
}

inline std::string posts_xml(std::span<const PostRow> posts) {
  std::ostringstream out;
  write_posts_xml(out, posts);
  return out.str();
}

inline std::string users_xml(std::span<const UserRow> users) {
  std::ostringstream out;
  write_users_xml(out, users);
  return out.str();
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("unresolved-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
