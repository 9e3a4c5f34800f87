#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "unresolved/dataset_io.hpp"
#include "unresolved/dump.hpp"

using namespace testing;

namespace {

PostsResult parse_posts_text(const std::string& xml) {
  std::istringstream in(xml);
  return parse_posts(in);
}

UsersResult parse_users_text(const std::string& xml) {
  std::istringstream in(xml);
  return parse_users(in);
}

const Timestamp kAnalysis = day(2015, 2, 18);

// A thread with `answers` answers aged `age` days; answer ids follow the question id.
std::vector<PostRow> thread_rows(std::int64_t qid, std::int64_t owner, int age, int answers, bool resolved) {
  std::vector<PostRow> rows;
  const Timestamp created = days_before(kAnalysis, age);
  rows.push_back(question(qid, owner, created, 1, resolved ? std::optional<std::int64_t>(qid + 1) : std::nullopt));
  for (int a = 0; a < answers; ++a) rows.push_back(answer(qid + 1 + a, qid, created + std::chrono::hours(a + 1), a));
  return rows;
}

}  // namespace

TEST_CASE("question row maps fields directly") {
  const auto r = parse_posts_text(
      R"(<posts><row Id="3" PostTypeId="1" AcceptedAnswerId="7" CreationDate="2014-01-02T03:04:05.678" )"
      R"(Score="4" Body="&lt;p&gt;a &amp;amp; b&lt;/p&gt;" OwnerUserId="9" AnswerCount="2" /></posts>)");
  REQUIRE(r.rows.size() == 1);
  CHECK(r.errors.empty());
  const auto& q = r.rows[0];
  CHECK(q.id == 3);
  CHECK(q.post_type == PostType::Question);
  CHECK(q.accepted_answer_id == 7);
  CHECK(q.score == 4);
  CHECK(q.owner_user_id == 9);
  CHECK(q.answer_count == 2);
  CHECK(format_timestamp(q.creation_date) == "2014-01-02T03:04:05.678");
  // XML entities decoded once; the HTML entity survives for the content layer.
  CHECK(q.body == "<p>a &amp; b</p>");
}

TEST_CASE("answer row keeps a negative score") {
  const auto r = parse_posts_text(
      R"(<posts><row Id="8" PostTypeId="2" ParentId="3" CreationDate="2014-01-02" Score="-2" /></posts>)");
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].post_type == PostType::Answer);
  CHECK(r.rows[0].parent_id == 3);
  CHECK(r.rows[0].score == -2);
  CHECK_FALSE(r.rows[0].owner_user_id.has_value());
}

TEST_CASE("row lacking Id is collected as an error") {
  const auto r = parse_posts_text(R"(<posts>
    <row Id="1" PostTypeId="1" CreationDate="2014-01-01" />
    <row Id="2" PostTypeId="2" ParentId="1" CreationDate="2014-01-01" />
    <row PostTypeId="2" ParentId="1" CreationDate="2014-01-01" />
    <row Id="4" PostTypeId="2" ParentId="1" CreationDate="2014-01-01" />
    <row Id="5" PostTypeId="2" ParentId="1" CreationDate="2014-01-01" />
  </posts>)");
  CHECK(r.rows.size() == 4);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].row_index == 2);
  CHECK(r.errors[0].message.find("Id") != std::string::npos);
}

TEST_CASE("other post types are skipped, row problems are tallied") {
  const auto r = parse_posts_text(R"(<posts>
    <row Id="1" PostTypeId="5" CreationDate="2014-01-01" />
    <row Id="2" PostTypeId="2" CreationDate="2014-01-01" />
    <row Id="3" PostTypeId="1" CreationDate="not a date" />
    <row Id="4" PostTypeId="1" CreationDate="2014-01-01" Score="x" />
    <row Id="6" PostTypeId="1" CreationDate="2014-01-01" />
    <row Id="6" PostTypeId="1" CreationDate="2014-01-01" />
  </posts>)");
  CHECK(r.skipped == 1);
  CHECK(r.rows.size() == 1);
  CHECK(r.errors.size() == 4);
}

TEST_CASE("malformed XML reports a byte offset") {
  const std::string xml = "<posts><row Id=\"1\" PostTypeId=\"1\" CreationDate=\"2014-01-01\" /><row Id=</posts>";
  try {
    parse_posts_text(xml);
    FAIL("expected XmlParseError");
  } catch (const XmlParseError& e) {
    CHECK(e.byte_offset() > 0);
    CHECK(e.byte_offset() <= static_cast<std::int64_t>(xml.size()));
  }
  CHECK_THROWS_AS(parse_posts_text("<posts><row></posts>"), DataError);
}

TEST_CASE("users parse with required attributes") {
  const auto r = parse_users_text(R"(<users>
    <row Id="1" Reputation="101" LastAccessDate="2015-02-08T00:00:00" DisplayName="a" />
    <row Id="2" Reputation="1" LastAccessDate="2015-02-08T00:00:00" />
    <row Id="3" LastAccessDate="2015-02-08T00:00:00" />
    <row Id="4" Reputation="0" LastAccessDate="2015-02-08T00:00:00.000" />
  </users>)");
  CHECK(r.rows.size() == 3);
  CHECK(r.errors.size() == 1);
  CHECK(r.rows[0].reputation == 101);
  CHECK(r.rows[0].last_access_date == day(2015, 2, 8));
  CHECK(parse_users_text("<users></users>").rows.empty());
  CHECK(parse_users_text(R"(<users><row Id="1" Reputation="-1" LastAccessDate="2015-02-08" /></users>)").errors.size() ==
        1);
}

TEST_CASE("best answer: highest score, then earliest, then lowest id") {
  const Timestamp t1 = day(2014, 1, 1), t2 = day(2014, 1, 2);
  const std::vector<PostRow> answers = {answer(10, 1, t1, 2), answer(11, 1, t2, 5), answer(12, 1, t1, 5)};
  CHECK(select_best_answer(answers) == 12);
  const std::vector<PostRow> same_time = {answer(21, 1, t1, 5), answer(20, 1, t1, 5)};
  CHECK(select_best_answer(same_time) == 20);
  CHECK_FALSE(select_best_answer(std::span<const PostRow>{}).has_value());
}

TEST_CASE("best answer ignores input order") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PostRow> answers;
    const auto n = rng.between(1, 8);
    for (int i = 0; i < n; ++i) {
      answers.push_back(answer(100 + i, 1, day(2014, 1, 1) + std::chrono::hours(rng.between(0, 3)), rng.between(-1, 2)));
    }
    const auto expected = select_best_answer(answers);
    for (int p = 0; p < 5; ++p) {
      rng.shuffle(std::span<PostRow>(answers));
      CHECK(select_best_answer(answers) == expected);
    }
  }
}

TEST_CASE("linking sets labels and reports broken references") {
  const Timestamp t = day(2014, 1, 1);
  const std::vector<PostRow> posts = {question(1, 5, t, 0, 3), answer(2, 1, t), answer(3, 1, t),
                                      question(4, 5, t, 0, 99), answer(6, 4, t), answer(7, 42, t)};
  const std::vector<UserRow> users = {{5, 10, t}};
  const auto linked = link_threads(posts, users);
  REQUIRE(linked.threads.size() == 2);
  CHECK(linked.threads[0].label == Label::Resolved);
  CHECK(linked.threads[0].answers.size() == 2);
  CHECK(linked.threads[1].label == Label::Unresolved);
  CHECK(linked.report.broken_accepted_refs == 1);
  CHECK(linked.report.dangling_answers == 1);
  REQUIRE(linked.report.warnings.size() == 1);
  CHECK(linked.report.warnings[0].find("99") != std::string::npos);
  // Both threads share one owner profile with the full history.
  REQUIRE(linked.threads[0].owner);
  CHECK(linked.threads[0].owner == linked.threads[1].owner);
  CHECK(linked.threads[0].owner->question_history.size() == 2);
}

TEST_CASE("selection thresholds") {
  std::vector<PostRow> posts;
  auto add = [&](std::vector<PostRow> rows) { posts.insert(posts.end(), rows.begin(), rows.end()); };
  add(thread_rows(100, 1, 200, 12, true));   // kept
  add(thread_rows(200, 1, 200, 9, false));   // too few answers
  add(thread_rows(300, 1, 100, 12, false));  // too young
  add(thread_rows(400, 1, 183, 10, false));  // exactly at both thresholds
  add(thread_rows(500, 2, 300, 10, true));   // owner unknown
  const std::vector<UserRow> users = {{1, 10, day(2015, 1, 1)}};
  const auto linked = link_threads(posts, users);
  const Dataset ds = apply_selection(linked.threads, SelectionCriteria{});
  REQUIRE(ds.threads.size() == 2);
  CHECK(ds.threads[0].question.id == 100);
  CHECK(ds.threads[1].question.id == 400);
  CHECK(ds.counts.considered == 5);
  CHECK(ds.counts.too_few_answers == 1);
  CHECK(ds.counts.too_young == 1);
  CHECK(ds.counts.no_owner == 1);
  CHECK(ds.counts.resolved == 1);
  CHECK(ds.counts.unresolved == 1);

  SelectionCriteria looser;
  looser.min_answers = 1;
  CHECK(apply_selection(linked.threads, looser).threads.size() == 3);
}

TEST_CASE("future-dated question is an error naming it") {
  const std::vector<PostRow> posts = {question(77, 1, day(2015, 3, 1))};
  const auto linked = link_threads(posts, std::vector<UserRow>{{1, 1, day(2015, 1, 1)}});
  CHECK_THROWS_WITH_AS(apply_selection(linked.threads, SelectionCriteria{}), doctest::Contains("77"), DataError);
}

TEST_CASE("invalid criteria are rejected") {
  SelectionCriteria c;
  c.min_answers = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.min_age_days = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

// ---------------------------------------------------------------- properties

namespace {

std::vector<PostRow> random_posts(Rng& rng) {
  static const char* bodies[] = {"<p>plain</p>", "", "<pre><code>a < b && c > d\n\tq \"x\" 'y'</code></pre>",
                                 "line one\nline two\r\nthree", "ünïcode &amp; entities"};
  std::vector<PostRow> posts;
  std::int64_t id = 1;
  const auto questions = rng.between(0, 6);
  for (int q = 0; q < questions; ++q) {
    const std::int64_t qid = id++;
    const auto n = rng.between(0, 4);
    PostRow row = question(qid, rng.between(1, 5), day(2013, 1, 1) + std::chrono::milliseconds(rng.between(0, 1'000'000'000)),
                           rng.between(-5, 50), std::nullopt, bodies[rng.below(5)]);
    if (rng.bernoulli(0.3)) row.owner_user_id.reset();
    row.answer_count = n;
    if (n > 0 && rng.bernoulli(0.5)) row.accepted_answer_id = qid + 1;
    posts.push_back(row);
    for (int a = 0; a < n; ++a) {
      PostRow ans = answer(id++, qid, row.creation_date + std::chrono::hours(a), rng.between(-3, 9), bodies[rng.below(5)]);
      posts.push_back(ans);
    }
  }
  return posts;
}

}  // namespace

TEST_CASE("property: posts survive a write/parse round trip") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto posts = random_posts(rng);
    const auto parsed = parse_posts_text(posts_xml(posts));
    CHECK(parsed.errors.empty());
    CHECK(parsed.rows == posts);
  }
}

TEST_CASE("property: users survive a write/parse round trip") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<UserRow> users;
    const auto n = rng.between(0, 10);
    for (int i = 0; i < n; ++i) {
      users.push_back({i + 1, rng.between(0, 100000), day(2010, 1, 1) + std::chrono::milliseconds(rng.between(0, 1LL << 37))});
    }
    const auto parsed = parse_users_text(users_xml(users));
    CHECK(parsed.rows == users);
  }
}

TEST_CASE("property: selection partitions and is idempotent") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PostRow> posts;
    std::vector<UserRow> users;
    const auto threads = rng.between(1, 12);
    for (int t = 0; t < threads; ++t) {
      const auto rows = thread_rows(100 * (t + 1), rng.between(1, 4), static_cast<int>(rng.between(0, 400)),
                                    static_cast<int>(rng.between(0, 14)), rng.bernoulli(0.5));
      posts.insert(posts.end(), rows.begin(), rows.end());
    }
    for (int u = 1; u <= 3; ++u) users.push_back({u, u * 10, day(2015, 1, 1)});
    SelectionCriteria c;
    c.min_age_days = static_cast<int>(rng.between(0, 300));
    c.min_answers = static_cast<int>(rng.between(1, 12));
    const auto linked = link_threads(posts, users);
    const Dataset once = apply_selection(linked.threads, c);
    CHECK(once.counts.resolved + once.counts.unresolved == once.counts.retained);
    CHECK(once.counts.retained + once.counts.too_young + once.counts.too_few_answers + once.counts.no_owner ==
          once.counts.considered);
    long resolved = 0;
    for (const auto& t : once.threads) resolved += t.label == Label::Resolved;
    CHECK(resolved == static_cast<long>(once.counts.resolved));
    const Dataset twice = apply_selection(once.threads, c);
    REQUIRE(twice.threads.size() == once.threads.size());
    for (std::size_t i = 0; i < once.threads.size(); ++i) {
      CHECK(twice.threads[i].question == once.threads[i].question);
      CHECK(twice.threads[i].label == once.threads[i].label);
    }
    CHECK(std::is_sorted(once.threads.begin(), once.threads.end(),
                         [](const auto& a, const auto& b) { return a.question.id < b.question.id; }));
  }
}

TEST_CASE("dataset file round trip keeps what featurization needs") {
  std::vector<PostRow> posts = thread_rows(100, 1, 200, 11, true);
  const auto more = thread_rows(200, 1, 250, 10, false);
  posts.insert(posts.end(), more.begin(), more.end());
  const auto linked = link_threads(posts, std::vector<UserRow>{{1, 50, day(2015, 1, 1)}});
  const Dataset ds = apply_selection(linked.threads, SelectionCriteria{});
  std::stringstream buffer;
  IngestSummary summary;
  summary.post_rows = posts.size();
  write_dataset(buffer, ds, summary);
  const LoadedDataset loaded = read_dataset(buffer);
  CHECK(loaded.summary.post_rows == posts.size());
  CHECK(loaded.dataset.counts == ds.counts);
  CHECK(loaded.dataset.criteria == ds.criteria);
  REQUIRE(loaded.dataset.threads.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& a = loaded.dataset.threads[i];
    const auto& b = ds.threads[i];
    CHECK(a.question == b.question);
    CHECK(a.label == b.label);
    CHECK(a.best_answer_id == b.best_answer_id);
    CHECK(a.answers.size() == b.answers.size());
    CHECK(*a.owner == *b.owner);
    REQUIRE(a.topic_answer());
    CHECK(*a.topic_answer() == *b.topic_answer());
  }
  // Owners are shared again after loading.
  CHECK(loaded.dataset.threads[0].owner == loaded.dataset.threads[1].owner);

  std::istringstream bad("{\"record\":\"header\"}\nnot json\n");
  CHECK_THROWS_AS(read_dataset(bad), DataError);
}
