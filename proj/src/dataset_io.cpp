#include "unresolved/dataset_io.hpp"

#include <istream>
#include <map>
#include <ostream>

#include "json.hpp"

namespace unresolved {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "unresolved-dataset/1";

json opt(const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::int64_t> opt_int(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::int64_t>();
}

json post_json(const PostRow& p, bool with_body) {
  json j = {{"id", p.id},
            {"creation_date", format_timestamp(p.creation_date)},
            {"score", p.score},
            {"owner_user_id", opt(p.owner_user_id)}};
  if (p.post_type == PostType::Question) {
    j["accepted_answer_id"] = opt(p.accepted_answer_id);
    j["answer_count"] = p.answer_count;
  } else {
    j["parent_id"] = opt(p.parent_id);
  }
  if (with_body) j["body"] = p.body;
  return j;
}

PostRow post_from_json(const json& j, PostType type) {
  PostRow p;
  p.post_type = type;
  p.id = j.at("id").get<std::int64_t>();
  p.creation_date = parse_timestamp(j.at("creation_date").get<std::string>());
  p.score = j.at("score").get<std::int64_t>();
  p.owner_user_id = opt_int(j, "owner_user_id");
  if (type == PostType::Question) {
    p.accepted_answer_id = opt_int(j, "accepted_answer_id");
    p.answer_count = j.value("answer_count", std::int64_t{0});
  } else {
    p.parent_id = opt_int(j, "parent_id");
  }
  if (auto it = j.find("body"); it != j.end()) p.body = it->get<std::string>();
  return p;
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& ds, const IngestSummary& s) {
  const auto& c = ds.counts;
  json header = {
      {"record", "header"},
      {"format", kFormat},
      {"criteria",
       {{"min_age_days", ds.criteria.min_age_days},
        {"min_answers", ds.criteria.min_answers},
        {"analysis_date", format_timestamp(ds.criteria.analysis_date)}}},
      {"counts",
       {{"considered", c.considered},
        {"retained", c.retained},
        {"resolved", c.resolved},
        {"unresolved", c.unresolved},
        {"too_young", c.too_young},
        {"too_few_answers", c.too_few_answers},
        {"no_owner", c.no_owner}}},
      {"ingest",
       {{"post_rows", s.post_rows},
        {"post_row_errors", s.post_row_errors},
        {"other_post_types", s.other_post_types},
        {"user_rows", s.user_rows},
        {"user_row_errors", s.user_row_errors},
        {"dangling_answers", s.dangling_answers},
        {"broken_accepted_refs", s.broken_accepted_refs},
        {"owners_without_profile", s.owners_without_profile}}}};
  out << header.dump() << '\n';

  for (const auto& t : ds.threads) {
    const PostRow* topic = t.topic_answer();
    json answers = json::array();
    for (const auto& a : t.answers) {
      answers.push_back({{"id", a.id}, {"score", a.score}, {"creation_date", format_timestamp(a.creation_date)},
                         {"owner_user_id", opt(a.owner_user_id)}});
    }
    json owner = nullptr;
    if (t.owner) {
      json history = json::array();
      for (const auto& h : t.owner->question_history) {
        history.push_back({h.question_id, h.was_answered, h.was_resolved});
      }
      owner = {{"id", t.owner->user_id},
               {"reputation", t.owner->reputation},
               {"last_access_date", format_timestamp(t.owner->last_access_date)},
               {"history", std::move(history)}};
    }
    json rec = {{"record", "thread"},
                {"question", post_json(t.question, true)},
                {"label", std::string(to_string(t.label))},
                {"best_answer_id", opt(t.best_answer_id)},
                {"topic_answer", topic ? post_json(*topic, true) : json(nullptr)},
                {"answers", std::move(answers)},
                {"owner", std::move(owner)}};
    out << rec.dump() << '\n';
  }
}

LoadedDataset read_dataset(std::istream& in) {
  LoadedDataset loaded;
  std::map<std::int64_t, std::shared_ptr<const UserProfile>> owners;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      const auto kind = rec.at("record").get<std::string>();
      if (kind == "header") {
        if (rec.at("format").get<std::string>() != kFormat) throw DataError("unsupported dataset format");
        const auto& cr = rec.at("criteria");
        auto& criteria = loaded.dataset.criteria;
        criteria.min_age_days = cr.at("min_age_days").get<int>();
        criteria.min_answers = cr.at("min_answers").get<int>();
        criteria.analysis_date = parse_timestamp(cr.at("analysis_date").get<std::string>());
        const auto& co = rec.at("counts");
        auto& counts = loaded.dataset.counts;
        counts.considered = co.at("considered").get<std::size_t>();
        counts.retained = co.at("retained").get<std::size_t>();
        counts.resolved = co.at("resolved").get<std::size_t>();
        counts.unresolved = co.at("unresolved").get<std::size_t>();
        counts.too_young = co.at("too_young").get<std::size_t>();
        counts.too_few_answers = co.at("too_few_answers").get<std::size_t>();
        counts.no_owner = co.at("no_owner").get<std::size_t>();
        const auto& ig = rec.at("ingest");
        auto& s = loaded.summary;
        s.post_rows = ig.at("post_rows").get<std::size_t>();
        s.post_row_errors = ig.at("post_row_errors").get<std::size_t>();
        s.other_post_types = ig.at("other_post_types").get<std::size_t>();
        s.user_rows = ig.at("user_rows").get<std::size_t>();
        s.user_row_errors = ig.at("user_row_errors").get<std::size_t>();
        s.dangling_answers = ig.at("dangling_answers").get<std::size_t>();
        s.broken_accepted_refs = ig.at("broken_accepted_refs").get<std::size_t>();
        s.owners_without_profile = ig.at("owners_without_profile").get<std::size_t>();
        have_header = true;
        continue;
      }
      if (kind != "thread") throw DataError("unknown record kind '" + kind + "'");
      if (!have_header) throw DataError("thread record before header");

      QuestionThread t;
      t.question = post_from_json(rec.at("question"), PostType::Question);
      t.label = parse_label(rec.at("label").get<std::string>());
      t.best_answer_id = opt_int(rec, "best_answer_id");
      std::optional<PostRow> topic;
      if (const auto& ta = rec.at("topic_answer"); !ta.is_null()) topic = post_from_json(ta, PostType::Answer);
      for (const auto& a : rec.at("answers")) {
        PostRow row;
        row.post_type = PostType::Answer;
        row.id = a.at("id").get<std::int64_t>();
        row.parent_id = t.question.id;
        row.score = a.at("score").get<std::int64_t>();
        row.creation_date = parse_timestamp(a.at("creation_date").get<std::string>());
        row.owner_user_id = opt_int(a, "owner_user_id");
        if (topic && topic->id == row.id) row.body = topic->body;
        t.answers.push_back(std::move(row));
      }
      if (const auto& o = rec.at("owner"); !o.is_null()) {
        const auto id = o.at("id").get<std::int64_t>();
        auto& shared = owners[id];
        if (!shared) {
          auto p = std::make_shared<UserProfile>();
          p->user_id = id;
          p->reputation = o.at("reputation").get<std::int64_t>();
          p->last_access_date = parse_timestamp(o.at("last_access_date").get<std::string>());
          for (const auto& h : o.at("history")) {
            p->question_history.push_back(
                {h.at(0).get<std::int64_t>(), h.at(1).get<bool>(), h.at(2).get<bool>()});
          }
          shared = std::move(p);
        }
        t.owner = shared;
      }
      loaded.dataset.threads.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw DataError("dataset line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("dataset line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw DataError("dataset has no header record");
  if (loaded.dataset.threads.size() != loaded.dataset.counts.retained) {
    throw DataError("dataset header says " + std::to_string(loaded.dataset.counts.retained) +
                    " threads but file holds " + std::to_string(loaded.dataset.threads.size()));
  }
  return loaded;
}

}  // namespace unresolved
