#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "unresolved/dump.hpp"
#include "unresolved/learner.hpp"
#include "unresolved/synth.hpp"
#include "unresolved/topic_model.hpp"

namespace unresolved {

namespace fs = std::filesystem;

// Workdir layout.
inline constexpr const char* kDatasetFile = "dataset.jsonl";
inline constexpr const char* kLdaFile = "lda_model.txt";
inline constexpr const char* kFeaturesFile = "features.csv";
inline constexpr const char* kExtendedFile = "features_extended.csv";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kPredictionsFile = "predictions.csv";
inline constexpr const char* kSummaryFile = "describe_summary.csv";
inline constexpr const char* kHistogramFile = "describe_histograms.csv";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kTruthFile = "synth_truth.csv";

struct RunConfig {
  fs::path posts;  // default <workdir>/Posts.xml
  fs::path users;  // default <workdir>/Users.xml
  fs::path workdir = ".";

  SelectionCriteria criteria;

  LdaParams lda;
  AlphaMode alpha_mode = AlphaMode::CorpusMarginal;
  bool reuse_lda = false;
  std::optional<fs::path> cr_weights;  // default: built-in scorer

  LearnerParams learner;
  int folds = 10;
  std::uint64_t seed = 1;  // cross-validation seed
  std::optional<FeatureSet> feature_set;  // nullopt: both
  std::optional<Algorithm> algorithm;     // nullopt: all three

  std::optional<fs::path> model;     // predict
  std::optional<fs::path> features;  // predict input, default <workdir>/features.csv
  std::optional<fs::path> output;    // predict output, default <workdir>/predictions.csv

  SynthParams synth;

  void validate() const;  // throws ConfigError
  fs::path posts_path() const;
  fs::path users_path() const;
  fs::path in_workdir(const char* name) const { return workdir / name; }
  // Stable text rendering of every setting; hashed into the manifest.
  std::string canonical() const;
};

struct IngestResult {
  SelectionCounts counts;
  std::size_t post_row_errors = 0;
  std::size_t user_row_errors = 0;
};

// Parses the dumps, applies the selection criteria and writes the dataset.
// Throws DataError when no question survives.
IngestResult cmd_ingest(const RunConfig& config, std::ostream& log);

// Trains (or reloads) the topic model and writes the model-input and
// extended feature tables.
std::size_t cmd_featurize(const RunConfig& config, std::ostream& log);

// Fits each selected algorithm x feature set on all rows; writes
// model_<algorithm>_<set>.txt files. Returns the paths written.
std::vector<fs::path> cmd_train(const RunConfig& config, std::ostream& log);

EvaluationReport cmd_evaluate(const RunConfig& config, std::ostream& log);

struct PredictionLine {
  std::int64_t question_id = 0;
  Prediction prediction;
};

std::vector<PredictionLine> cmd_predict(const RunConfig& config, std::ostream& log);

void cmd_report(const RunConfig& config, std::ostream& log);

// Writes Posts.xml, Users.xml and the ground-truth labels into the workdir
// (or to --posts / --users when given).
SynthDump cmd_synth(const RunConfig& config, std::ostream& log);

}  // namespace unresolved
