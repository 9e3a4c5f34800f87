#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unresolved/content.hpp"

namespace unresolved {

// A grade level, or nullopt when the formula is undefined for the input
// (no words or no sentences). Callers apply their own missing-value policy.
using Grade = std::optional<double>;

Grade flesch_kincaid(const TextStats& stats);
Grade gunning_fog(const TextStats& stats);
Grade coleman_liau(const TextStats& stats);
Grade smog(const TextStats& stats);
Grade ari(const TextStats& stats);

// Mean over the defined grades; nullopt when none is defined.
Grade average_grade(std::span<const Grade> grades);

struct ReadabilityGrades {
  std::array<Grade, 5> per_formula;  // FK, Fog, Coleman-Liau, SMOG, ARI
  Grade average;
};

ReadabilityGrades text_readability(const TextStats& stats);

// ---------------------------------------------------------------- code

inline constexpr std::size_t kCodeFeatureCount = 10;

struct CodeFeatureVector {
  double avg_line_length = 0;
  double max_line_length = 0;
  double avg_identifier_length = 0;
  double identifiers_per_line = 0;
  double keywords_per_line = 0;
  double numbers_per_line = 0;
  double comments_per_line = 0;
  double blank_line_fraction = 0;
  double avg_indentation = 0;
  double branching_tokens_per_line = 0;
  bool empty = true;  // no code at all; the values are all zero

  std::array<double, kCodeFeatureCount> values() const;
  static const std::array<std::string_view, kCodeFeatureCount>& names();
};

// Features over the concatenation of all blocks (joined by newlines).
CodeFeatureVector code_features(std::span<const std::string> code_blocks);

// Logistic surrogate scorer: sigmoid(bias + sum_i weight_i * (f_i - mean_i) / scale_i).
struct CodeScorer {
  double bias = 0;
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<double> weight;

  static CodeScorer defaults();
  // key=value lines: "bias", "<feature>.mean", "<feature>.scale",
  // "<feature>.weight"; '#' starts a comment. Throws ConfigError.
  static CodeScorer parse(std::string_view text);
  std::string serialize() const;
};

// Strictly inside (0, 1): the logit is clamped to +-35 before the sigmoid.
// Throws ConfigError when the scorer dimensions do not match the features.
double code_readability(const CodeFeatureVector& features, const CodeScorer& scorer);

}  // namespace unresolved
