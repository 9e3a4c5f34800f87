#include "unresolved/dump.hpp"

#include <expat.h>

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "unresolved/io.hpp"

namespace unresolved {

namespace {

using Attributes = std::vector<std::pair<std::string_view, std::string_view>>;

std::optional<std::string_view> find_attr(const Attributes& attrs, std::string_view name) {
  for (const auto& [k, v] : attrs) {
    if (k == name) return v;
  }
  return std::nullopt;
}

struct RowMissing {
  std::string message;
};

std::string_view required(const Attributes& attrs, std::string_view name) {
  auto v = find_attr(attrs, name);
  if (!v) throw RowMissing{"missing required attribute " + std::string(name)};
  return *v;
}

std::optional<std::int64_t> optional_int(const Attributes& attrs, std::string_view name) {
  auto v = find_attr(attrs, name);
  if (!v || v->empty()) return std::nullopt;
  return parse_int(*v);
}

// Drives expat over a stream and hands every depth-2 <row> to `on_row`.
template <class OnRow>
void scan_rows(std::istream& in, OnRow on_row) {
  struct State {
    OnRow* on_row;
    int depth = 0;
    std::size_t row_index = 0;
    bool saw_root = false;
  } state{&on_row};

  std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"), &XML_ParserFree);
  if (!parser) throw InvariantError("cannot create XML parser");
  XML_SetUserData(parser.get(), &state);
  XML_SetElementHandler(
      parser.get(),
      [](void* data, const XML_Char* name, const XML_Char** atts) {
        auto* s = static_cast<State*>(data);
        ++s->depth;
        s->saw_root = true;
        if (s->depth != 2 || std::string_view(name) != "row") return;
        Attributes attrs;
        for (int i = 0; atts[i] != nullptr; i += 2) attrs.emplace_back(atts[i], atts[i + 1]);
        (*s->on_row)(s->row_index++, attrs);
      },
      [](void* data, const XML_Char*) { --static_cast<State*>(data)->depth; });

  std::vector<char> buffer(1 << 16);
  while (true) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    const auto got = in.gcount();
    const bool last = got < static_cast<std::streamsize>(buffer.size());
    if (XML_Parse(parser.get(), buffer.data(), static_cast<int>(got), last) == XML_STATUS_ERROR) {
      throw XmlParseError(XML_ErrorString(XML_GetErrorCode(parser.get())),
                          static_cast<std::int64_t>(XML_GetCurrentByteIndex(parser.get())));
    }
    if (last) break;
  }
}

void write_attr(std::ostream& out, std::string_view name, std::string_view value) {
  out << ' ' << name << "=\"";
  for (char c : value) {
    switch (c) {
      case '<': out << "&lt;"; break;
      case '>': out << "&gt;"; break;
      case '&': out << "&amp;"; break;
      case '"': out << "&quot;"; break;
      case '\n': out << "&#xA;"; break;
      case '\r': out << "&#xD;"; break;
      case '\t': out << "&#x9;"; break;
      default: out << c;
    }
  }
  out << '"';
}

}  // namespace

PostsResult parse_posts(std::istream& in) {
  PostsResult result;
  std::unordered_set<std::int64_t> seen;
  scan_rows(in, [&](std::size_t index, const Attributes& attrs) {
    try {
      PostRow row;
      row.id = parse_int(required(attrs, "Id"));
      const auto type = parse_int(required(attrs, "PostTypeId"));
      row.creation_date = parse_timestamp(required(attrs, "CreationDate"));
      if (type != 1 && type != 2) {
        ++result.skipped;
        return;
      }
      if (row.id <= 0) throw RowMissing{"non-positive Id"};
      row.post_type = type == 1 ? PostType::Question : PostType::Answer;
      if (auto score = optional_int(attrs, "Score")) row.score = *score;
      if (auto body = find_attr(attrs, "Body")) row.body = std::string(*body);
      row.owner_user_id = optional_int(attrs, "OwnerUserId");
      if (row.post_type == PostType::Question) {
        row.accepted_answer_id = optional_int(attrs, "AcceptedAnswerId");
        row.answer_count = optional_int(attrs, "AnswerCount").value_or(0);
      } else {
        row.parent_id = optional_int(attrs, "ParentId");
        if (!row.parent_id) throw RowMissing{"answer without ParentId"};
      }
      if (!seen.insert(row.id).second) throw RowMissing{"duplicate Id " + std::to_string(row.id)};
      result.rows.push_back(std::move(row));
    } catch (const RowMissing& e) {
      result.errors.push_back({index, e.message});
    } catch (const DataError& e) {
      result.errors.push_back({index, e.what()});
    }
  });
  return result;
}

UsersResult parse_users(std::istream& in) {
  UsersResult result;
  std::unordered_set<std::int64_t> seen;
  scan_rows(in, [&](std::size_t index, const Attributes& attrs) {
    try {
      UserRow row;
      row.id = parse_int(required(attrs, "Id"));
      row.reputation = parse_int(required(attrs, "Reputation"));
      row.last_access_date = parse_timestamp(required(attrs, "LastAccessDate"));
      if (row.reputation < 0) throw RowMissing{"negative Reputation"};
      if (!seen.insert(row.id).second) throw RowMissing{"duplicate Id " + std::to_string(row.id)};
      result.rows.push_back(row);
    } catch (const RowMissing& e) {
      result.errors.push_back({index, e.message});
    } catch (const DataError& e) {
      result.errors.push_back({index, e.what()});
    }
  });
  return result;
}

void write_posts_xml(std::ostream& out, std::span<const PostRow> posts) {
  out << "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<posts>\n";
  for (const auto& p : posts) {
    out << "  <row";
    write_attr(out, "Id", std::to_string(p.id));
    write_attr(out, "PostTypeId", p.post_type == PostType::Question ? "1" : "2");
    if (p.parent_id) write_attr(out, "ParentId", std::to_string(*p.parent_id));
    if (p.accepted_answer_id) write_attr(out, "AcceptedAnswerId", std::to_string(*p.accepted_answer_id));
    write_attr(out, "CreationDate", format_timestamp(p.creation_date));
    write_attr(out, "Score", std::to_string(p.score));
    write_attr(out, "Body", p.body);
    if (p.owner_user_id) write_attr(out, "OwnerUserId", std::to_string(*p.owner_user_id));
    if (p.post_type == PostType::Question) write_attr(out, "AnswerCount", std::to_string(p.answer_count));
    out << " />\n";
  }
  out << "</posts>\n";
}

void write_users_xml(std::ostream& out, std::span<const UserRow> users) {
  out << "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<users>\n";
  for (const auto& u : users) {
    out << "  <row";
    write_attr(out, "Id", std::to_string(u.id));
    write_attr(out, "Reputation", std::to_string(u.reputation));
    write_attr(out, "LastAccessDate", format_timestamp(u.last_access_date));
    out << " />\n";
  }
  out << "</users>\n";
}

// ---------------------------------------------------------------- threads

const PostRow* QuestionThread::find_answer(std::int64_t id) const {
  auto it = std::lower_bound(answers.begin(), answers.end(), id,
                             [](const PostRow& a, std::int64_t v) { return a.id < v; });
  return it != answers.end() && it->id == id ? &*it : nullptr;
}

const PostRow* QuestionThread::best_answer() const {
  return best_answer_id ? find_answer(*best_answer_id) : nullptr;
}

const PostRow* QuestionThread::topic_answer() const {
  if (label == Label::Resolved && question.accepted_answer_id) {
    if (const auto* a = find_answer(*question.accepted_answer_id)) return a;
  }
  return best_answer();
}

std::optional<std::int64_t> select_best_answer(std::span<const PostRow> answers) {
  const PostRow* best = nullptr;
  for (const auto& a : answers) {
    if (best == nullptr || a.score > best->score ||
        (a.score == best->score &&
         (a.creation_date < best->creation_date || (a.creation_date == best->creation_date && a.id < best->id)))) {
      best = &a;
    }
  }
  if (best == nullptr) return std::nullopt;
  return best->id;
}

LinkResult link_threads(std::span<const PostRow> posts, std::span<const UserRow> users) {
  LinkResult result;
  std::map<std::int64_t, QuestionThread> by_id;
  for (const auto& p : posts) {
    if (p.post_type == PostType::Question) by_id[p.id].question = p;
  }
  for (const auto& p : posts) {
    if (p.post_type != PostType::Answer) continue;
    auto it = p.parent_id ? by_id.find(*p.parent_id) : by_id.end();
    if (it == by_id.end()) {
      ++result.report.dangling_answers;
      continue;
    }
    it->second.answers.push_back(p);
  }

  std::unordered_map<std::int64_t, const UserRow*> user_index;
  for (const auto& u : users) user_index.emplace(u.id, &u);
  std::map<std::int64_t, std::shared_ptr<UserProfile>> profiles;

  for (auto& [id, thread] : by_id) {
    std::sort(thread.answers.begin(), thread.answers.end(),
              [](const PostRow& a, const PostRow& b) { return a.id < b.id; });
    thread.best_answer_id = select_best_answer(thread.answers);
    thread.label = Label::Unresolved;
    if (const auto accepted = thread.question.accepted_answer_id) {
      if (thread.find_answer(*accepted) != nullptr) {
        thread.label = Label::Resolved;
      } else {
        ++result.report.broken_accepted_refs;
        result.report.warnings.push_back("question " + std::to_string(id) + ": accepted answer " +
                                         std::to_string(*accepted) + " not found; labelled Unresolved");
      }
    }
    if (const auto owner = thread.question.owner_user_id) {
      auto uit = user_index.find(*owner);
      if (uit == user_index.end()) {
        ++result.report.owners_without_profile;
        continue;
      }
      auto& profile = profiles[*owner];
      if (!profile) {
        profile = std::make_shared<UserProfile>();
        profile->user_id = uit->second->id;
        profile->reputation = uit->second->reputation;
        profile->last_access_date = uit->second->last_access_date;
      }
      profile->question_history.push_back(
          {id, !thread.answers.empty(), thread.label == Label::Resolved});
    }
  }

  result.threads.reserve(by_id.size());
  for (auto& [id, thread] : by_id) {
    if (const auto owner = thread.question.owner_user_id) {
      auto pit = profiles.find(*owner);
      if (pit != profiles.end()) thread.owner = pit->second;
    }
    result.threads.push_back(std::move(thread));
  }
  return result;
}

// ---------------------------------------------------------------- selection

void SelectionCriteria::validate() const {
  if (min_age_days < 0) throw ConfigError("min_age_days must be >= 0");
  if (min_answers < 1) throw ConfigError("min_answers must be >= 1");
}

Dataset apply_selection(std::span<const QuestionThread> threads, const SelectionCriteria& criteria) {
  criteria.validate();
  for (const auto& t : threads) {
    if (t.question.creation_date > criteria.analysis_date) {
      throw DataError("question " + std::to_string(t.question.id) + " was created after the analysis date");
    }
  }
  Dataset ds;
  ds.criteria = criteria;
  for (const auto& t : threads) {
    ++ds.counts.considered;
    if (whole_days_between(t.question.creation_date, criteria.analysis_date) < criteria.min_age_days) {
      ++ds.counts.too_young;
    } else if (static_cast<std::int64_t>(t.answers.size()) < criteria.min_answers) {
      ++ds.counts.too_few_answers;
    } else if (!t.owner) {
      ++ds.counts.no_owner;
    } else {
      ds.threads.push_back(t);
      ++(t.label == Label::Resolved ? ds.counts.resolved : ds.counts.unresolved);
    }
  }
  std::sort(ds.threads.begin(), ds.threads.end(),
            [](const QuestionThread& a, const QuestionThread& b) { return a.question.id < b.question.id; });
  ds.counts.retained = ds.threads.size();
  return ds;
}

}  // namespace unresolved
