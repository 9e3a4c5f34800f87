#include "unresolved/user_metrics.hpp"

#include <cmath>

#include "unresolved/common.hpp"

namespace unresolved {

std::optional<double> answer_rejection_ratio(const UserProfile& profile, std::int64_t exclude_question) {
  long answered = 0;
  long rejected = 0;
  for (const auto& q : profile.question_history) {
    if (q.question_id == exclude_question || !q.was_answered) continue;
    ++answered;
    if (!q.was_resolved) ++rejected;
  }
  if (answered == 0) return std::nullopt;
  return static_cast<double>(rejected) / static_cast<double>(answered);
}

ImputedValue impute(std::optional<double> value, double fallback) {
  if (value) return {*value, false};
  return {fallback, true};
}

std::optional<double> mean_of_defined(std::span<const std::optional<double>> values) {
  double sum = 0;
  long n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::int64_t last_access_delay(const UserProfile& profile, Timestamp analysis_date) {
  if (profile.last_access_date > analysis_date) {
    throw DataError("user " + std::to_string(profile.user_id) + " last accessed the site after the analysis date");
  }
  return whole_days_between(profile.last_access_date, analysis_date);
}

double log1p_transform(double x) {
  if (!(x >= 0.0)) throw DataError("log transform needs a non-negative value");
  return std::log1p(x);
}

Popularity popularity(const PostRow& question, const UserProfile& owner) {
  return {question.score, log1p_transform(static_cast<double>(owner.reputation))};
}

BehaviourFeatures behaviour_features(const QuestionThread& thread, Timestamp analysis_date) {
  if (!thread.owner) throw DataError("question " + std::to_string(thread.question.id) + " has no owner profile");
  const UserProfile& owner = *thread.owner;
  BehaviourFeatures f;
  f.arr = answer_rejection_ratio(owner, thread.question.id);
  f.lad_days = last_access_delay(owner, analysis_date);
  f.log_lad = log1p_transform(static_cast<double>(f.lad_days));
  const Popularity pop = popularity(thread.question, owner);
  f.votes = pop.votes;
  f.reputation = owner.reputation;
  f.log_reputation = pop.log_reputation;
  return f;
}

}  // namespace unresolved
