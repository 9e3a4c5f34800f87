#include "unresolved/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <string>

#include "unresolved/content.hpp"
#include "unresolved/rng.hpp"

namespace unresolved {

void SynthParams::validate() const {
  if (n_questions < 2) throw ConfigError("synthetic dump needs at least 2 questions");
  if (!(unresolved_fraction > 0.0 && unresolved_fraction < 1.0)) {
    throw ConfigError("unresolved fraction must lie strictly between 0 and 1");
  }
  if (min_age_days < 0) throw ConfigError("min_age_days must be non-negative");
  if (vocab_topics < 1 || words_per_topic < 1) throw ConfigError("vocabulary shape must be positive");
  if (mix_resolved < 1 || mix_unresolved < 1 || mix_resolved > vocab_topics || mix_unresolved > vocab_topics) {
    throw ConfigError("topic mix must lie in [1, vocab_topics]");
  }
  for (double v : {accept_a_resolved, accept_b_resolved, accept_a_unresolved, accept_b_unresolved, lad_mean_resolved,
                   lad_mean_unresolved, votes_sd, log_rep_sd}) {
    if (!(v > 0)) throw ConfigError("synthetic distribution parameters must be positive");
  }
}

namespace {

constexpr std::array<std::string_view, 16> kOnsets = {"b", "d", "f", "g", "k", "l", "m", "n",
                                                      "p", "r", "s", "t", "v", "z", "br", "st"};
constexpr std::array<std::string_view, 6> kNuclei = {"a", "e", "i", "o", "u", "ai"};
constexpr std::array<std::string_view, 10> kFiller = {"the", "and", "is", "to", "of", "it", "when", "how", "my", "with"};
constexpr int kAnswererPool = 300;
constexpr std::int64_t kDayMs = 86'400'000;

using Vocab = std::vector<std::vector<std::string>>;

Vocab make_vocabulary(const SynthParams& p, Rng& rng) {
  std::set<std::string> seen;
  Vocab vocab(static_cast<std::size_t>(p.vocab_topics));
  for (auto& topic : vocab) {
    while (static_cast<int>(topic.size()) < p.words_per_topic) {
      std::string word;
      const auto syllables = rng.between(2, 3);
      for (int s = 0; s < syllables; ++s) {
        word += kOnsets[rng.below(kOnsets.size())];
        word += kNuclei[rng.below(kNuclei.size())];
      }
      if (is_stopword(word) || !seen.insert(word).second) continue;
      topic.push_back(std::move(word));
    }
  }
  return vocab;
}

class Writer {
 public:
  Writer(const Vocab& vocab, Rng& rng) : vocab_(vocab), rng_(rng) {}

  std::string sentence(std::span<const int> topics, double noise) {
    std::string out;
    const auto words = rng_.between(6, 12);
    for (int i = 0; i < words; ++i) {
      std::string_view w;
      if (rng_.bernoulli(0.25)) {
        w = kFiller[rng_.below(kFiller.size())];
      } else {
        const int t = rng_.bernoulli(noise) ? static_cast<int>(rng_.below(vocab_.size()))
                                            : topics[rng_.below(topics.size())];
        const auto& list = vocab_[static_cast<std::size_t>(t)];
        w = list[rng_.below(list.size())];
      }
      if (i > 0) out += ' ';
      if (i == 0) {
        out += static_cast<char>(w[0] - 'a' + 'A');
        out += w.substr(1);
      } else {
        out += w;
      }
    }
    out += rng_.bernoulli(0.2) ? "?" : ".";
    return out;
  }

  std::string paragraphs(std::span<const int> topics, double noise, int min_sentences, int max_sentences) {
    std::string out = "<p>";
    const auto n = rng_.between(min_sentences, max_sentences);
    for (int i = 0; i < n; ++i) {
      if (i > 0) out += (i % 3 == 0) ? "</p>\n<p>" : " ";
      out += sentence(topics, noise);
    }
    return out + "</p>";
  }

  std::string code(int topic) {
    const auto& list = vocab_[static_cast<std::size_t>(topic)];
    auto ident = [&] { return list[rng_.below(list.size())]; };
    std::string out = "<pre><code>";
    const auto lines = rng_.between(2, 8);
    for (int i = 0; i < lines; ++i) {
      switch (rng_.below(4)) {
        case 0: out += "int " + ident() + " = " + std::to_string(rng_.between(0, 99)) + ";"; break;
        case 1: out += "if (" + ident() + " &gt; " + std::to_string(rng_.between(0, 9)) + ") {\n    " + ident() + "();\n}"; break;
        case 2: out += "// " + ident() + " " + ident(); break;
        default: out += ident() + "." + ident() + "(" + ident() + ");"; break;
      }
      out += '\n';
    }
    return out + "</code></pre>";
  }

 private:
  const Vocab& vocab_;
  Rng& rng_;
};

Timestamp days_before(Timestamp t, double days) {
  return t - std::chrono::milliseconds(static_cast<std::int64_t>(days * kDayMs));
}
Timestamp days_after(Timestamp t, double days) {
  return t + std::chrono::milliseconds(static_cast<std::int64_t>(days * kDayMs));
}

}  // namespace

SynthDump generate_synthetic(const SynthParams& p) {
  p.validate();
  Rng rng(p.seed);
  const Vocab vocab = make_vocabulary(p, rng);
  Writer writer(vocab, rng);

  const auto n = static_cast<std::size_t>(p.n_questions);
  const auto n_unresolved = static_cast<std::size_t>(std::llround(p.unresolved_fraction * static_cast<double>(n)));
  std::vector<Label> labels(n, Label::Resolved);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_unresolved), Label::Unresolved);
  rng.shuffle(std::span<Label>(labels));

  SynthDump dump;
  const Timestamp earliest = make_timestamp(2008, 9, 1);
  const Timestamp latest_target = days_before(p.analysis_date, p.min_age_days);
  const std::int64_t answerer_base = static_cast<std::int64_t>(n) + 1;
  std::int64_t next_post = 1;

  auto random_time = [&](Timestamp lo, Timestamp hi) {
    if (hi <= lo) return lo;
    const auto span = (hi - lo).count();
    return lo + std::chrono::milliseconds(static_cast<std::int64_t>(rng.uniform01() * static_cast<double>(span)));
  };
  auto answerer = [&] { return answerer_base + static_cast<std::int64_t>(rng.below(kAnswererPool)); };

  // Appends a question with `answers` answers; returns the answer ids.
  auto emit_thread = [&](std::int64_t owner, Timestamp created, std::int64_t score, std::string body, int answers,
                         int main_topic) {
    PostRow q;
    q.id = next_post++;
    q.post_type = PostType::Question;
    q.creation_date = created;
    q.score = score;
    q.body = std::move(body);
    q.owner_user_id = owner;
    q.answer_count = answers;
    const std::size_t q_index = dump.posts.size();
    dump.posts.push_back(std::move(q));
    std::vector<std::int64_t> ids;
    for (int a = 0; a < answers; ++a) {
      PostRow row;
      row.id = next_post++;
      row.post_type = PostType::Answer;
      row.parent_id = dump.posts[q_index].id;
      row.creation_date = std::min(days_after(created, rng.uniform(0.01, 60.0)), p.analysis_date);
      row.score = std::llround(rng.normal(2.0, 3.0));
      const int topic = rng.bernoulli(0.5) ? main_topic : static_cast<int>(rng.below(vocab.size()));
      const int topics[] = {topic};
      row.body = writer.paragraphs(topics, 0.1, 1, 3);
      row.owner_user_id = answerer();
      ids.push_back(row.id);
      dump.posts.push_back(std::move(row));
    }
    return std::pair{q_index, ids};
  };

  for (std::size_t i = 0; i < n; ++i) {
    const bool unresolved = is_positive(labels[i]);
    const auto owner = static_cast<std::int64_t>(i) + 1;

    const double lad = std::min(rng.exponential(unresolved ? p.lad_mean_unresolved : p.lad_mean_resolved), 1500.0);
    const Timestamp last_access = days_before(p.analysis_date, lad);
    const double log_rep = rng.normal(unresolved ? p.log_rep_mean_unresolved : p.log_rep_mean_resolved, p.log_rep_sd);
    dump.users.push_back({owner, std::max<std::int64_t>(1, std::llround(std::exp(log_rep))), last_access});

    const double accept = unresolved ? rng.beta(p.accept_a_unresolved, p.accept_b_unresolved)
                                     : rng.beta(p.accept_a_resolved, p.accept_b_resolved);
    const auto history = rng.between(3, 8);
    for (int h = 0; h < history; ++h) {
      const int topic = static_cast<int>(rng.below(vocab.size()));
      const int topics[] = {topic};
      const int answers = rng.bernoulli(0.15) ? 0 : static_cast<int>(rng.between(1, 3));
      auto [q_index, ids] = emit_thread(owner, random_time(earliest, last_access), rng.between(-1, 5),
                                        writer.paragraphs(topics, 0.1, 1, 2), answers, topic);
      if (!ids.empty() && rng.bernoulli(accept)) dump.posts[q_index].accepted_answer_id = ids[rng.below(ids.size())];
    }

    // The target question.
    std::vector<int> topics;
    const int mix = unresolved ? p.mix_unresolved : p.mix_resolved;
    while (static_cast<int>(topics.size()) < mix) {
      const int t = static_cast<int>(rng.below(vocab.size()));
      if (std::find(topics.begin(), topics.end(), t) == topics.end()) topics.push_back(t);
    }
    std::string body = writer.paragraphs(topics, unresolved ? 0.1 : 0.05, 3, 5);
    if (rng.bernoulli(p.code_probability)) body += "\n" + writer.code(topics.front());
    const auto votes = std::llround(rng.normal(unresolved ? p.votes_mean_unresolved : p.votes_mean_resolved, p.votes_sd));
    const Timestamp created = random_time(earliest, std::min(latest_target, last_access));
    auto [q_index, ids] = emit_thread(owner, created, votes, std::move(body), static_cast<int>(rng.between(10, 14)),
                                      topics.front());
    if (!unresolved) dump.posts[q_index].accepted_answer_id = ids[rng.below(ids.size())];
    dump.targets.emplace_back(dump.posts[q_index].id, labels[i]);
  }

  for (int a = 0; a < kAnswererPool; ++a) {
    const double lad = rng.exponential(20.0);
    dump.users.push_back({answerer_base + a, std::llround(std::exp(rng.normal(7.5, 1.5))),
                          days_before(p.analysis_date, lad)});
  }
  return dump;
}

}  // namespace unresolved
