#pragma once

#include <cstdint>
#include <vector>

#include "unresolved/dump.hpp"

namespace unresolved {

// Knobs for the synthetic dump. Per-class values are (resolved, unresolved).
//
// Every target question gets its own asker, 10-14 answers and an age of at
// least `min_age_days`, so all of them pass the default selection. Askers
// also own 3-8 history questions with 0-3 answers each; those fail the
// answer threshold but feed the asker's rejection ratio.
struct SynthParams {
  int n_questions = 2000;
  double unresolved_fraction = 0.5;
  std::uint64_t seed = 42;
  Timestamp analysis_date = make_timestamp(2015, 2, 18);
  int min_age_days = 190;

  // Probability that an answered history question got an accepted answer,
  // drawn per asker from Beta(a, b).
  double accept_a_resolved = 6, accept_b_resolved = 2;
  double accept_a_unresolved = 2, accept_b_unresolved = 4;

  // Days since the asker's last visit, exponential with these means.
  double lad_mean_resolved = 30, lad_mean_unresolved = 240;

  // Question score, normal then rounded.
  double votes_mean_resolved = 6, votes_mean_unresolved = 2, votes_sd = 3;

  // ln(reputation), normal.
  double log_rep_mean_resolved = 7.0, log_rep_mean_unresolved = 5.5, log_rep_sd = 1.2;

  // Number of topics the question prose mixes.
  int mix_resolved = 1, mix_unresolved = 3;

  int vocab_topics = 12;
  int words_per_topic = 40;
  double code_probability = 0.4;

  void validate() const;  // throws ConfigError
};

struct SynthDump {
  std::vector<PostRow> posts;  // ascending id
  std::vector<UserRow> users;  // ascending id
  std::vector<std::pair<std::int64_t, Label>> targets;  // ground truth, ascending id
};

// Deterministic for a given parameter set.
SynthDump generate_synthetic(const SynthParams& params);

}  // namespace unresolved
