#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "unresolved/dump.hpp"
#include "unresolved/profile.hpp"
#include "unresolved/timestamp.hpp"

namespace unresolved {

// Share of the owner's answered questions (other than `exclude_question`)
// that never got an accepted answer. nullopt when no such question exists.
std::optional<double> answer_rejection_ratio(const UserProfile& profile, std::int64_t exclude_question);

struct ImputedValue {
  double value = 0;
  bool imputed = false;
};

ImputedValue impute(std::optional<double> value, double fallback);

// Mean of the defined values; nullopt when there are none.
std::optional<double> mean_of_defined(std::span<const std::optional<double>> values);

// Whole days between the owner's last access and the analysis date.
// Throws DataError when the access lies after the analysis date.
std::int64_t last_access_delay(const UserProfile& profile, Timestamp analysis_date);

// ln(1 + x) for x >= 0. Throws DataError for negative or NaN input.
double log1p_transform(double x);

struct Popularity {
  std::int64_t votes = 0;  // raw question score, may be negative
  double log_reputation = 0;
};

Popularity popularity(const PostRow& question, const UserProfile& owner);

struct BehaviourFeatures {
  std::optional<double> arr;  // before imputation
  std::int64_t lad_days = 0;
  double log_lad = 0;
  std::int64_t votes = 0;
  std::int64_t reputation = 0;
  double log_reputation = 0;
};

// All owner/popularity metrics for one selected thread (owner required).
BehaviourFeatures behaviour_features(const QuestionThread& thread, Timestamp analysis_date);

}  // namespace unresolved
