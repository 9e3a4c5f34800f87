#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "unresolved/learner.hpp"

using namespace testing;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr Label U = Label::Unresolved;
constexpr Label R = Label::Resolved;

FeatureMatrix matrix(std::vector<std::string> names, std::vector<std::pair<std::vector<double>, Label>> rows) {
  FeatureMatrix m;
  m.feature_names = std::move(names);
  std::int64_t id = 1;
  for (auto& [values, label] : rows) m.rows.push_back({id++, std::move(values), label});
  return m;
}

double training_accuracy(const TrainedModel& model, const FeatureMatrix& m) {
  long ok = 0;
  for (const auto& r : m.rows) ok += predict(model, r.values).label == r.label;
  return static_cast<double>(ok) / static_cast<double>(m.rows.size());
}

FeatureMatrix xor_fixture() {
  std::vector<std::pair<std::vector<double>, Label>> rows;
  auto add = [&](double x, double y, Label l, int n) {
    for (int i = 0; i < n; ++i) rows.push_back({{x, y}, l});
  };
  add(-1, -1, U, 4);
  add(-1, 1, R, 2);
  add(1, -1, R, 4);
  add(1, 1, U, 2);
  return matrix({"x", "y"}, rows);
}

// Two-feature data, labels from a noisy linear rule. Not separable.
FeatureMatrix noisy_linear(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<std::vector<double>, Label>> rows;
  for (int i = 0; i < n; ++i) {
    const double a = rng.normal(0, 2), b = rng.normal(5, 1);
    const double z = 1.2 * a - 0.8 * (b - 5) + rng.normal(0, 1.5);
    rows.push_back({{a, b}, z > 0 ? U : R});
  }
  return matrix({"a", "b"}, rows);
}

// Mean NLL + l2/2 |w|^2 on features standardized with the model's scaler.
double objective(const LogisticModel& m, const FeatureMatrix& data, double l2) {
  double loss = 0;
  for (const auto& r : data.rows) {
    double z = m.bias;
    for (std::size_t j = 0; j < m.weights.size(); ++j) z += m.weights[j] * (r.values[j] - m.mean[j]) / m.scale[j];
    const double y = is_positive(r.label) ? 1 : 0;
    loss += std::log(1 + std::exp(z)) - y * z;
  }
  loss /= static_cast<double>(data.rows.size());
  for (double w : m.weights) loss += 0.5 * l2 * w * w;
  return loss;
}

std::vector<double> numeric_gradient(const LogisticModel& m, const FeatureMatrix& data, double l2) {
  const double h = 1e-6;
  std::vector<double> g;
  for (std::size_t p = 0; p <= m.weights.size(); ++p) {
    LogisticModel up = m, down = m;
    (p == 0 ? up.bias : up.weights[p - 1]) += h;
    (p == 0 ? down.bias : down.weights[p - 1]) -= h;
    g.push_back((objective(up, data, l2) - objective(down, data, l2)) / (2 * h));
  }
  return g;
}

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

// ---------------------------------------------------------------- tables

TEST_CASE("assemble picks the feature set's columns in id order") {
  FeatureMatrix table;
  table.feature_names = feature_names(FeatureSet::Full);
  for (int i = 10; i >= 1; --i) {
    table.rows.push_back({i, {0.1 * i, i % 3 ? 0.5 : kNaN, 1.0 * i, -1.0 * i, 2.0 * i}, i % 2 ? U : R});
  }
  const FeatureMatrix full = assemble(table, FeatureSet::Full);
  CHECK(full.feature_names.size() == 5);
  CHECK(full.rows.size() == 10);
  CHECK(full.rows.front().question_id == 1);
  const FeatureMatrix reduced = assemble(table, FeatureSet::Reduced);
  CHECK(reduced.feature_names == std::vector<std::string>{"arr", "lad_log", "votes"});
  CHECK(reduced.rows[0].values[1] == 1.0);
  CHECK(reduced.rows[0].values[2] == -1.0);

  FeatureMatrix one_class = table;
  for (auto& r : one_class.rows) r.label = R;
  CHECK_THROWS_AS(assemble(one_class, FeatureSet::Full), DataError);
  CHECK_THROWS_AS(assemble(FeatureMatrix{table.feature_names, {}}, FeatureSet::Full), DataError);
  FeatureMatrix narrow = table;
  narrow.feature_names[0] = "other";
  CHECK_THROWS_AS(assemble(narrow, FeatureSet::Full), DataError);
}

TEST_CASE("feature CSV round trip with missing values") {
  FeatureMatrix m = matrix(feature_names(FeatureSet::Full),
                           {{{0.25, kNaN, 3.5, -2, 1e-17}, U}, {{1.0 / 3, 0.5, 0, 7, 4.6151205168412594}, R}});
  std::stringstream buffer;
  write_feature_csv(buffer, m);
  CHECK(buffer.str().rfind("question_id,te,arr,lad_log,votes,rep_log,label\n", 0) == 0);
  CHECK(buffer.str().find(",NA,") != std::string::npos);
  FeatureMatrix back = read_feature_csv(buffer);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.feature_names == m.feature_names);
  CHECK(std::isnan(back.rows[0].values[1]));
  back.rows[0].values[1] = 0;
  m.rows[0].values[1] = 0;
  CHECK(back.rows == m.rows);

  std::istringstream bad("question_id,te,label\n1,x,Resolved\n");
  CHECK_THROWS_AS(read_feature_csv(bad), DataError);
  std::istringstream short_row("question_id,te,label\n1,Resolved\n");
  CHECK_THROWS_AS(read_feature_csv(short_row), DataError);
}

// ---------------------------------------------------------------- tree

TEST_CASE("tree: one split separates two clusters") {
  const FeatureMatrix m = matrix({"x"}, {{{1}, U}, {{2}, U}, {{8}, R}, {{9}, R}});
  const DecisionTree tree = train_tree(m);
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].feature == 0);
  CHECK(tree.nodes[0].threshold > 2);
  CHECK(tree.nodes[0].threshold < 8);
  CHECK(tree.nodes[0].threshold == 5);
  CHECK(training_accuracy(fit(Algorithm::DecisionTree, m), m) == 1.0);
}

TEST_CASE("tree: XOR-style fixture needs exactly two levels") {
  const FeatureMatrix m = xor_fixture();

  // Brute force over every axis-aligned stump and every depth-2 tree built
  // from midpoint thresholds: no stump is perfect, some depth-2 tree is.
  const std::vector<double> cuts = {0.0};  // the only midpoint on either axis
  auto leaf_correct = [&](const std::vector<const FeatureRow*>& rows) {
    long u = 0;
    for (auto* r : rows) u += is_positive(r->label);
    return std::max<long>(u, static_cast<long>(rows.size()) - u);
  };
  bool stump_perfect = false, depth2_perfect = false;
  for (int f = 0; f < 2; ++f) {
    for (double c : cuts) {
      std::vector<const FeatureRow*> left, right;
      for (const auto& r : m.rows) (r.values[f] <= c ? left : right).push_back(&r);
      if (leaf_correct(left) + leaf_correct(right) == static_cast<long>(m.rows.size())) stump_perfect = true;
      for (int g = 0; g < 2; ++g) {
        long correct = 0;
        for (const auto* side : {&left, &right}) {
          std::vector<const FeatureRow*> a, b;
          for (auto* r : *side) (r->values[g] <= 0.0 ? a : b).push_back(r);
          correct += leaf_correct(a) + leaf_correct(b);
        }
        if (correct == static_cast<long>(m.rows.size())) depth2_perfect = true;
      }
    }
  }
  REQUIRE_FALSE(stump_perfect);
  REQUIRE(depth2_perfect);

  const DecisionTree tree = train_tree(m);
  CHECK(tree.depth() == 2);
  CHECK(training_accuracy(fit(Algorithm::DecisionTree, m), m) == 1.0);
}

TEST_CASE("tree: stopping rules") {
  const FeatureMatrix m = xor_fixture();
  TreeParams shallow;
  shallow.max_depth = 1;
  CHECK(train_tree(m, shallow).depth() == 1);
  TreeParams big_leaves;
  big_leaves.min_leaf = 7;
  CHECK(train_tree(m, big_leaves).depth() == 0);
  const FeatureMatrix pure = matrix({"x"}, {{{1}, U}, {{2}, U}});
  CHECK(train_tree(pure).nodes.size() == 1);
}

TEST_CASE("tree: internal nodes have one feature and two children") {
  const FeatureMatrix m = noisy_linear(300, 3);
  const DecisionTree tree = train_tree(m);
  for (const auto& n : tree.nodes) {
    if (n.is_leaf()) continue;
    CHECK(n.feature >= 0);
    CHECK(n.feature < 2);
    CHECK(n.left > 0);
    CHECK(n.right > 0);
    CHECK(n.positives + n.negatives ==
          tree.nodes[n.left].positives + tree.nodes[n.left].negatives + tree.nodes[n.right].positives +
              tree.nodes[n.right].negatives);
  }
}

TEST_CASE("Laplace-smoothed leaf probability") {
  DecisionTree tree;
  tree.nodes.push_back(TreeNode{-1, 0, -1, -1, 3, 1});
  const std::vector<double> row = {0.0};
  CHECK(std::abs(positive_probability(tree, row) - 4.0 / 6.0) < 1e-15);
  TrainedModel model;
  model.algorithm = Algorithm::DecisionTree;
  model.feature_names = {"x"};
  model.imputer.means = {0};
  model.params = tree;
  CHECK(predict(model, row).label == U);
}

// ---------------------------------------------------------------- logistic

TEST_CASE("logistic: separable 1-D data") {
  const FeatureMatrix m = matrix({"x"}, {{{-3}, R}, {{-2}, R}, {{-1}, R}, {{1}, U}, {{2}, U}, {{3}, U}});
  const TrainedModel model = fit(Algorithm::LogisticRegression, m);
  CHECK(training_accuracy(model, m) == 1.0);
  for (double w : std::get<LogisticModel>(model.params).weights) CHECK(std::isfinite(w));
}

TEST_CASE("logistic: symmetric data gives zero bias") {
  const FeatureMatrix m = matrix({"x"}, {{{-2}, R}, {{-1}, U}, {{1}, R}, {{2}, U}});
  const LogisticModel lr = train_logistic(m);
  CHECK(lr.converged);
  CHECK(std::abs(lr.bias) < 1e-6);
}

TEST_CASE("logistic: gradient vanishes at the optimum and matches finite differences") {
  const FeatureMatrix m = noisy_linear(200, 5);
  LogisticParams params;
  const LogisticModel lr = train_logistic(m, params);
  CHECK(lr.converged);
  const auto g = logistic_gradient(lr, m, params.l2);
  CHECK(norm(g) <= 1e-5);
  const auto fd = numeric_gradient(lr, m, params.l2);
  CHECK(norm(fd) <= 1e-5);

  LogisticModel off = lr;
  off.bias += 0.3;
  off.weights[0] -= 0.5;
  const auto ga = logistic_gradient(off, m, 0.1);
  const auto gn = numeric_gradient(off, m, 0.1);
  for (std::size_t i = 0; i < ga.size(); ++i) CHECK(std::abs(ga[i] - gn[i]) < 1e-6);
}

TEST_CASE("logistic: zero weights predict 0.5, which goes to Unresolved") {
  TrainedModel model;
  model.algorithm = Algorithm::LogisticRegression;
  model.feature_names = {"x", "y"};
  model.imputer.means = {0, 0};
  model.params = LogisticModel{{0, 0}, {1, 1}, {0, 0}, 0, true, 1};
  const std::vector<double> row = {3, -4};
  const Prediction p = predict(model, row);
  CHECK(p.probability == 0.5);
  CHECK(p.label == U);
  CHECK(decide(0.5) == U);
  CHECK(decide(std::nextafter(0.5, 0.0)) == R);
}

TEST_CASE("logistic: constant feature keeps unit scale") {
  const FeatureMatrix m = matrix({"c", "x"}, {{{5, -1}, R}, {{5, -2}, R}, {{5, 1}, U}, {{5, 0.5}, R}, {{5, 2}, U}});
  const LogisticModel lr = train_logistic(m);
  CHECK(lr.scale[0] == 1.0);
  CHECK(std::isfinite(lr.bias));
}

// ---------------------------------------------------------------- naive Bayes

TEST_CASE("naive Bayes worked posteriors") {
  NaiveBayesModel nb;
  nb.mean_positive = {0};
  nb.var_positive = {1};
  nb.mean_negative = {2};
  nb.var_negative = {1};
  const std::vector<double> mid = {1}, zero = {0};
  const Posterior at_mid = nb_posterior(nb, mid);
  CHECK(std::abs(at_mid.positive - 0.5) < 1e-12);
  CHECK(std::abs(at_mid.negative - 0.5) < 1e-12);
  const double e2 = std::exp(2.0);
  CHECK(std::abs(nb_posterior(nb, zero).positive - 0.8808) < 1e-4);
  CHECK(std::abs(nb_posterior(nb, zero).positive - e2 / (1 + e2)) < 1e-12);

  NaiveBayesModel priors;
  priors.prior_positive = 0.9;
  priors.prior_negative = 0.1;
  priors.mean_positive = priors.mean_negative = {1};
  priors.var_positive = priors.var_negative = {2};
  const Posterior p = nb_posterior(priors, zero);
  CHECK(std::abs(p.positive - 0.9) < 1e-12);
  CHECK(std::abs(p.negative - 0.1) < 1e-12);

  TrainedModel model;
  model.algorithm = Algorithm::NaiveBayes;
  model.feature_names = {"x"};
  model.imputer.means = {0};
  model.params = nb;
  CHECK(predict(model, mid).label == U);
}

TEST_CASE("naive Bayes training: frequencies, moments and the variance floor") {
  const FeatureMatrix m = matrix({"x", "c"}, {{{1, 3}, U}, {{3, 3}, U}, {{10, 3}, R}, {{12, 3}, R}, {{14, 3}, R}});
  const NaiveBayesModel nb = train_nb(m);
  CHECK(nb.prior_positive == doctest::Approx(0.4));
  CHECK(nb.mean_positive[0] == doctest::Approx(2));
  CHECK(nb.var_positive[0] == doctest::Approx(1));
  CHECK(nb.mean_negative[0] == doctest::Approx(12));
  CHECK(nb.var_negative[0] == doctest::Approx(8.0 / 3));
  CHECK(nb.var_positive[1] == 1e-9);
  CHECK(nb.var_negative[1] == 1e-9);
}

// ---------------------------------------------------------------- folds and CV

TEST_CASE("stratified folds") {
  std::vector<Label> balanced(100, U);
  std::fill(balanced.begin() + 50, balanced.end(), R);
  const auto folds = stratified_folds(balanced, 10, 3);
  std::map<int, std::pair<int, int>> per_fold;
  for (std::size_t i = 0; i < folds.size(); ++i) {
    auto& [u, r] = per_fold[folds[i]];
    ++(is_positive(balanced[i]) ? u : r);
  }
  REQUIRE(per_fold.size() == 10);
  for (const auto& [f, counts] : per_fold) {
    CHECK(counts.first == 5);
    CHECK(counts.second == 5);
  }

  std::vector<Label> odd = balanced;
  odd.push_back(U);
  std::map<int, int> sizes;
  for (int f : stratified_folds(odd, 10, 3)) ++sizes[f];
  int elevens = 0;
  for (const auto& [f, n] : sizes) {
    CHECK((n == 10 || n == 11));
    elevens += n == 11;
  }
  CHECK(elevens == 1);

  CHECK(stratified_folds(balanced, 10, 3) == folds);
  CHECK_FALSE(stratified_folds(balanced, 10, 4) == folds);
  CHECK_THROWS_AS(stratified_folds(balanced, 1, 3), ConfigError);
  CHECK_THROWS_AS(stratified_folds(std::vector<Label>{U, R}, 3, 3), DataError);
}

TEST_CASE("confusion metrics") {
  const ConfusionMatrix c{50, 10, 20, 20};
  CHECK(c.total() == 100);
  CHECK(c.accuracy() == doctest::Approx(0.70));
  CHECK(std::abs(*c.precision() - 0.8333) < 1e-4);
  CHECK(std::abs(*c.recall() - 0.7143) < 1e-4);
  const ConfusionMatrix none{0, 0, 5, 5};
  CHECK_FALSE(none.precision().has_value());
  CHECK(*none.recall() == 0);
}

TEST_CASE("cross-validation on separable data is perfect for every algorithm") {
  Rng rng(61);
  std::vector<std::pair<std::vector<double>, Label>> rows;
  for (int i = 0; i < 60; ++i) {
    const bool u = i % 2 == 0;
    rows.push_back({{u ? rng.uniform(9, 10) : rng.uniform(0, 1), rng.normal(0, 1)}, u ? U : R});
  }
  const FeatureMatrix m = matrix({"x", "noise"}, rows);
  for (Algorithm a : {Algorithm::DecisionTree, Algorithm::LogisticRegression, Algorithm::NaiveBayes}) {
    const auto rec = cross_validate(a, m, 10, 7);
    CHECK(rec.confusion.accuracy() == 1.0);
    CHECK(rec.confusion.total() == 60);
  }
}

TEST_CASE("a training fold with one class is reported") {
  std::vector<std::pair<std::vector<double>, Label>> rows = {{{1}, U}};
  for (int i = 0; i < 9; ++i) rows.push_back({{2.0 + i}, R});
  const FeatureMatrix m = matrix({"x"}, rows);
  CHECK_THROWS_WITH_AS(cross_validate(Algorithm::NaiveBayes, m, 2, 1), doctest::Contains("single class"), DataError);
}

TEST_CASE("missing values are filled with training means") {
  const FeatureMatrix m = matrix({"x", "y"}, {{{1, kNaN}, U}, {{3, 4}, U}, {{kNaN, 8}, R}, {{7, 6}, R}});
  const Imputer imp = Imputer::fit(m);
  CHECK(imp.means == std::vector<double>{11.0 / 3, 6});
  std::vector<double> row = {kNaN, kNaN};
  imp.apply(row);
  CHECK(row == imp.means);
  for (Algorithm a : {Algorithm::DecisionTree, Algorithm::LogisticRegression, Algorithm::NaiveBayes}) {
    const auto model = fit(a, m);
    const double p = predict(model, std::vector<double>{kNaN, kNaN}).probability;
    CHECK(p >= 0);
    CHECK(p <= 1);
  }
}

TEST_CASE("saved models reload and predict identically") {
  const FeatureMatrix m = noisy_linear(120, 9);
  for (Algorithm a : {Algorithm::DecisionTree, Algorithm::LogisticRegression, Algorithm::NaiveBayes}) {
    const TrainedModel model = fit(a, m);
    std::stringstream buffer;
    save_trained_model(buffer, model);
    const TrainedModel back = load_trained_model(buffer);
    CHECK(back == model);
    for (const auto& r : m.rows) CHECK(predict(back, r.values).probability == predict(model, r.values).probability);
  }
  std::istringstream junk("unresolved-model/1\nalgorithm svm\n");
  CHECK_THROWS_AS(load_trained_model(junk), DataError);
  std::istringstream truncated("unresolved-model/1\nalgorithm nb\nfeatures x\nimputer 0\n");
  CHECK_THROWS_AS(load_trained_model(truncated), DataError);
}

TEST_CASE("report renders one record per evaluation") {
  EvaluationReport report;
  report.folds = 10;
  report.seed = 3;
  EvaluationRecord rec;
  rec.feature_names = feature_names(FeatureSet::Reduced);
  rec.confusion = {50, 10, 20, 20};
  report.records = {rec, rec};
  const std::string json = report_json(report);
  CHECK(json.find("\"feature_set\": \"reduced\"") != std::string::npos);
  CHECK(json.find("\"precision_unresolved\": 0.833") != std::string::npos);
  const std::string table = report_table(report);
  CHECK(table.find("Decision tree") != std::string::npos);
  CHECK(table.find("70.00%") != std::string::npos);
  CHECK(table.find("83.33%") != std::string::npos);
  CHECK(table.find("71.43%") != std::string::npos);
}

// ---------------------------------------------------------------- properties

TEST_CASE("property: held-out rows never influence a fold's model") {
  Rng rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    FeatureMatrix m = noisy_linear(80, 100 + static_cast<std::uint64_t>(trial));
    for (auto& r : m.rows) {
      if (rng.bernoulli(0.1)) r.values[0] = kNaN;
    }
    std::vector<Label> labels;
    for (const auto& r : m.rows) labels.push_back(r.label);
    const auto folds = stratified_folds(labels, 5, static_cast<std::uint64_t>(trial));
    const int fold = static_cast<int>(rng.below(5));
    FeatureMatrix mutated = m;
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      if (folds[i] != fold) continue;
      for (auto& v : mutated.rows[i].values) v = rng.bernoulli(0.2) ? kNaN : rng.normal(0, 1000);
      mutated.rows[i].label = rng.bernoulli(0.5) ? U : R;
    }
    for (Algorithm a : {Algorithm::DecisionTree, Algorithm::LogisticRegression, Algorithm::NaiveBayes}) {
      CHECK(fit_fold(a, m, folds, fold) == fit_fold(a, mutated, folds, fold));
    }
  }
}

TEST_CASE("property: tree predictions survive strictly increasing transforms") {
  Rng rng(72);
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureMatrix m = noisy_linear(100, 200 + static_cast<std::uint64_t>(trial));
    FeatureMatrix t = m;
    for (auto& r : t.rows) {
      r.values[0] = std::exp(r.values[0] / 3);
      r.values[1] = r.values[1] * r.values[1] * r.values[1] + 2 * r.values[1];
    }
    const TrainedModel a = fit(Algorithm::DecisionTree, m);
    const TrainedModel b = fit(Algorithm::DecisionTree, t);
    CHECK(std::get<DecisionTree>(a.params).nodes.size() == std::get<DecisionTree>(b.params).nodes.size());
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      CHECK(predict(a, m.rows[i].values).label == predict(b, t.rows[i].values).label);
    }
  }
}

TEST_CASE("property: naive Bayes posteriors sum to one") {
  Rng rng(73);
  const NaiveBayesModel nb = train_nb(noisy_linear(100, 17));
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> row = {rng.normal(0, 20), rng.normal(5, 20)};
    const Posterior p = nb_posterior(nb, row);
    CHECK(std::abs(p.positive + p.negative - 1.0) <= 1e-12);
    CHECK(p.positive >= 0);
    CHECK(p.negative >= 0);
  }
}

TEST_CASE("property: pooled confusion covers every row; reports are reproducible") {
  for (int trial = 0; trial < 5; ++trial) {
    const FeatureMatrix m = noisy_linear(50 + 7 * trial, 300 + static_cast<std::uint64_t>(trial));
    EvaluationReport a, b;
    for (Algorithm alg : {Algorithm::DecisionTree, Algorithm::LogisticRegression, Algorithm::NaiveBayes}) {
      a.records.push_back(cross_validate(alg, m, 10, 5));
      b.records.push_back(cross_validate(alg, m, 10, 5));
      CHECK(a.records.back().confusion.total() == static_cast<long>(m.rows.size()));
    }
    CHECK(a.records == b.records);
    CHECK(report_json(a) == report_json(b));
  }
}
