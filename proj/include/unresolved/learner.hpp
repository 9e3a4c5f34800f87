#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "unresolved/common.hpp"

namespace unresolved {

// FULL = {TE, ARR, LAD, V, R}; REDUCED = {ARR, LAD, V}.
enum class FeatureSet { Full, Reduced };
enum class Algorithm { DecisionTree, LogisticRegression, NaiveBayes };

std::string_view to_string(FeatureSet set);
std::string_view to_string(Algorithm algorithm);
FeatureSet parse_feature_set(std::string_view text);  // "full" | "reduced"
Algorithm parse_algorithm(std::string_view text);     // "tree" | "logistic" | "nb"
std::string_view display_name(Algorithm algorithm);

// Column names as they appear in the feature CSV.
const std::vector<std::string>& feature_names(FeatureSet set);

struct FeatureRow {
  std::int64_t question_id = 0;
  std::vector<double> values;  // NaN marks a missing value
  Label label = Label::Resolved;
  bool operator==(const FeatureRow&) const = default;
};

struct FeatureMatrix {
  std::vector<std::string> feature_names;
  std::vector<FeatureRow> rows;
};

// features.csv: header "question_id,te,arr,lad_log,votes,rep_log,label",
// missing values written as NA.
void write_feature_csv(std::ostream& out, const FeatureMatrix& table);
FeatureMatrix read_feature_csv(std::istream& in);  // throws DataError

// Picks the feature set's columns out of a full table and orders rows by
// question id. Throws DataError for an empty or single-class table.
FeatureMatrix assemble(const FeatureMatrix& table, FeatureSet set);

// ---------------------------------------------------------------- models

struct TreeParams {
  int min_leaf = 2;
  int max_depth = 25;
};

struct LogisticParams {
  double l2 = 1e-8;
  double tol = 1e-8;
  int max_iter = 500;
};

struct NaiveBayesParams {
  double variance_floor = 1e-9;
};

struct LearnerParams {
  TreeParams tree;
  LogisticParams logistic;
  NaiveBayesParams nb;
};

// Column means over training rows, used to fill missing values.
struct Imputer {
  std::vector<double> means;

  static Imputer fit(const FeatureMatrix& matrix);
  void apply(std::span<double> row) const;
  bool operator==(const Imputer&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0;  // go left when value <= threshold
  int left = -1;
  int right = -1;
  int positives = 0;  // training rows labelled Unresolved
  int negatives = 0;
  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int depth() const;
  bool operator==(const DecisionTree&) const = default;
};

struct LogisticModel {
  std::vector<double> mean;   // z-score parameters from the training rows
  std::vector<double> scale;
  std::vector<double> weights;  // on standardized features
  double bias = 0;
  bool converged = false;
  int iterations = 0;
  bool operator==(const LogisticModel&) const = default;
};

struct NaiveBayesModel {
  double prior_positive = 0.5;
  double prior_negative = 0.5;
  std::vector<double> mean_positive, var_positive;
  std::vector<double> mean_negative, var_negative;
  bool operator==(const NaiveBayesModel&) const = default;
};

// C4.5-style binary tree: numeric thresholds at midpoints between adjacent
// distinct values, chosen by gain ratio among candidates whose information
// gain is at least the average. Stops on purity, min_leaf or max_depth.
DecisionTree train_tree(const FeatureMatrix& matrix, const TreeParams& params = {});

// L2-regularized logistic regression by damped Newton iterations on
// z-scored features. Minimizes mean NLL + l2/2 |w|^2 (bias unpenalized).
LogisticModel train_logistic(const FeatureMatrix& matrix, const LogisticParams& params = {});

// Gaussian naive Bayes with maximum-likelihood variances, floored.
NaiveBayesModel train_nb(const FeatureMatrix& matrix, const NaiveBayesParams& params = {});

// Gradient of the logistic objective at the model's parameters, ordered
// (bias, weights...), over the matrix standardized with the model's scaler.
std::vector<double> logistic_gradient(const LogisticModel& model, const FeatureMatrix& matrix, double l2);

// Probability of the Unresolved class.
double positive_probability(const DecisionTree& tree, std::span<const double> row);
double positive_probability(const LogisticModel& model, std::span<const double> row);
double positive_probability(const NaiveBayesModel& model, std::span<const double> row);

struct Posterior {
  double positive = 0;
  double negative = 0;
};
Posterior nb_posterior(const NaiveBayesModel& model, std::span<const double> row);

struct TrainedModel {
  Algorithm algorithm = Algorithm::DecisionTree;
  std::vector<std::string> feature_names;
  Imputer imputer;
  std::variant<DecisionTree, LogisticModel, NaiveBayesModel> params;
  bool operator==(const TrainedModel&) const = default;
};

// Fits the imputer on the matrix, then the algorithm on the imputed rows.
// Throws DataError when the rows hold a single class.
TrainedModel fit(Algorithm algorithm, const FeatureMatrix& matrix, const LearnerParams& params = {});

struct Prediction {
  Label label = Label::Unresolved;
  double probability = 0;  // of Unresolved
};

// Exactly 0.5 goes to Unresolved.
Label decide(double positive_probability);
Prediction predict(const TrainedModel& model, std::span<const double> row);

void save_trained_model(std::ostream& out, const TrainedModel& model);
TrainedModel load_trained_model(std::istream& in);  // throws DataError

// ---------------------------------------------------------------- evaluation

// Fold index per row. Each class is shuffled with the seed and dealt
// round-robin, continuing the deal across classes, so fold sizes differ
// by at most one overall and per class.
std::vector<int> stratified_folds(std::span<const Label> labels, int k, std::uint64_t seed);

// The model for one fold, fitted on every row outside it.
TrainedModel fit_fold(Algorithm algorithm, const FeatureMatrix& matrix, std::span<const int> folds, int fold,
                      const LearnerParams& params = {});

struct ConfusionMatrix {
  long tp = 0, fp = 0, fn = 0, tn = 0;  // Unresolved is positive

  void add(Label truth, Label predicted);
  long total() const { return tp + fp + fn + tn; }
  double accuracy() const;
  std::optional<double> precision() const;
  std::optional<double> recall() const;
  bool operator==(const ConfusionMatrix&) const = default;
};

struct EvaluationRecord {
  Algorithm algorithm = Algorithm::DecisionTree;
  std::vector<std::string> feature_names;
  ConfusionMatrix confusion;  // pooled over folds
  int folds = 10;
  std::uint64_t seed = 0;
  bool operator==(const EvaluationRecord&) const = default;
};

EvaluationRecord cross_validate(Algorithm algorithm, const FeatureMatrix& matrix, int k, std::uint64_t seed,
                                const LearnerParams& params = {});

struct EvaluationReport {
  LearnerParams params;
  int folds = 10;
  std::uint64_t seed = 0;
  std::vector<EvaluationRecord> records;
};

std::string report_json(const EvaluationReport& report);
// Algorithm / Metrics / Accuracy / Precision / Recall, percentages.
std::string report_table(const EvaluationReport& report);

}  // namespace unresolved
