#include "unresolved/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "unresolved/io.hpp"
#include "unresolved/rng.hpp"

namespace unresolved {

std::string_view to_string(FeatureSet set) { return set == FeatureSet::Full ? "full" : "reduced"; }

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::DecisionTree: return "tree";
    case Algorithm::LogisticRegression: return "logistic";
    case Algorithm::NaiveBayes: return "nb";
  }
  return "?";
}

std::string_view display_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::DecisionTree: return "Decision tree (C4.5)";
    case Algorithm::LogisticRegression: return "Logistic regression";
    case Algorithm::NaiveBayes: return "Naive Bayes";
  }
  return "?";
}

FeatureSet parse_feature_set(std::string_view text) {
  if (text == "full") return FeatureSet::Full;
  if (text == "reduced") return FeatureSet::Reduced;
  throw ConfigError("unknown feature set '" + std::string(text) + "' (expected full or reduced)");
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "tree") return Algorithm::DecisionTree;
  if (text == "logistic") return Algorithm::LogisticRegression;
  if (text == "nb") return Algorithm::NaiveBayes;
  throw ConfigError("unknown algorithm '" + std::string(text) + "' (expected tree, logistic or nb)");
}

const std::vector<std::string>& feature_names(FeatureSet set) {
  static const std::vector<std::string> kFull = {"te", "arr", "lad_log", "votes", "rep_log"};
  static const std::vector<std::string> kReduced = {"arr", "lad_log", "votes"};
  return set == FeatureSet::Full ? kFull : kReduced;
}

namespace {

std::string feature_set_name(const std::vector<std::string>& names) {
  if (names == feature_names(FeatureSet::Full)) return "full";
  if (names == feature_names(FeatureSet::Reduced)) return "reduced";
  std::string joined;
  for (const auto& n : names) joined += (joined.empty() ? "" : "+") + n;
  return joined;
}

void require_both_classes(const FeatureMatrix& m, const std::string& what) {
  bool pos = false, neg = false;
  for (const auto& r : m.rows) (is_positive(r.label) ? pos : neg) = true;
  if (!pos || !neg) throw DataError(what + " hold a single class");
}

void require_complete(const FeatureMatrix& m) {
  for (const auto& r : m.rows) {
    if (r.values.size() != m.feature_names.size()) throw DataError("feature row has the wrong width");
    for (double v : r.values) {
      if (!std::isfinite(v)) throw DataError("non-finite feature value for question " + std::to_string(r.question_id));
    }
  }
}

double entropy2(double pos, double neg) {
  const double n = pos + neg;
  double h = 0;
  if (pos > 0) h -= (pos / n) * std::log2(pos / n);
  if (neg > 0) h -= (neg / n) * std::log2(neg / n);
  return h;
}

}  // namespace

// ---------------------------------------------------------------- csv

void write_feature_csv(std::ostream& out, const FeatureMatrix& table) {
  out << "question_id";
  for (const auto& n : table.feature_names) out << ',' << n;
  out << ",label\n";
  for (const auto& r : table.rows) {
    out << r.question_id;
    for (double v : r.values) out << ',' << format_double(v);
    out << ',' << to_string(r.label) << '\n';
  }
}

FeatureMatrix read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("feature file is empty");
  auto header = split_csv_line(line);
  if (header.size() < 3 || header.front() != "question_id" || header.back() != "label") {
    throw DataError("feature file header must start with question_id and end with label");
  }
  FeatureMatrix m;
  m.feature_names.assign(header.begin() + 1, header.end() - 1);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError("feature file line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                      " fields");
    }
    try {
      FeatureRow row;
      row.question_id = parse_int(fields.front());
      for (std::size_t i = 1; i + 1 < fields.size(); ++i) row.values.push_back(parse_double(fields[i]));
      row.label = parse_label(fields.back());
      m.rows.push_back(std::move(row));
    } catch (const DataError& e) {
      throw DataError("feature file line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return m;
}

FeatureMatrix assemble(const FeatureMatrix& table, FeatureSet set) {
  if (table.rows.empty()) throw DataError("feature table is empty");
  FeatureMatrix m;
  m.feature_names = feature_names(set);
  std::vector<std::size_t> columns;
  for (const auto& name : m.feature_names) {
    auto it = std::find(table.feature_names.begin(), table.feature_names.end(), name);
    if (it == table.feature_names.end()) throw DataError("feature table lacks column '" + name + "'");
    columns.push_back(static_cast<std::size_t>(it - table.feature_names.begin()));
  }
  for (const auto& r : table.rows) {
    FeatureRow row{r.question_id, {}, r.label};
    for (auto c : columns) row.values.push_back(r.values.at(c));
    m.rows.push_back(std::move(row));
  }
  std::sort(m.rows.begin(), m.rows.end(),
            [](const FeatureRow& a, const FeatureRow& b) { return a.question_id < b.question_id; });
  require_both_classes(m, "feature table rows");
  return m;
}

// ---------------------------------------------------------------- imputer

Imputer Imputer::fit(const FeatureMatrix& matrix) {
  Imputer imp;
  const std::size_t d = matrix.feature_names.size();
  std::vector<double> sum(d, 0.0);
  std::vector<long> n(d, 0);
  for (const auto& r : matrix.rows) {
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isnan(r.values[j])) {
        sum[j] += r.values[j];
        ++n[j];
      }
    }
  }
  imp.means.resize(d);
  for (std::size_t j = 0; j < d; ++j) imp.means[j] = n[j] > 0 ? sum[j] / static_cast<double>(n[j]) : 0.0;
  return imp;
}

void Imputer::apply(std::span<double> row) const {
  for (std::size_t j = 0; j < row.size() && j < means.size(); ++j) {
    if (std::isnan(row[j])) row[j] = means[j];
  }
}

// ---------------------------------------------------------------- tree

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<int, int>> stack = {{0, 0}};
  int best = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[i].is_leaf()) {
      stack.push_back({nodes[i].left, d + 1});
      stack.push_back({nodes[i].right, d + 1});
    }
  }
  return best;
}

namespace {

struct SplitCandidate {
  int feature = -1;
  double threshold = 0;
  double gain = 0;
  double ratio = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& m, const TreeParams& p) : m_(m), p_(p) {}

  DecisionTree build() {
    std::vector<std::size_t> rows(m_.rows.size());
    std::iota(rows.begin(), rows.end(), 0);
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t>& rows, int depth) {
    TreeNode node;
    for (auto r : rows) ++(is_positive(m_.rows[r].label) ? node.positives : node.negatives);
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(node);

    const auto n = static_cast<int>(rows.size());
    if (node.positives == 0 || node.negatives == 0 || n < 2 * p_.min_leaf || depth >= p_.max_depth) return index;
    const auto split = best_split(rows, node.positives, node.negatives);
    if (split.feature < 0) return index;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (m_.rows[r].values[static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& self = tree_.nodes[static_cast<std::size_t>(index)];
    self.feature = split.feature;
    self.threshold = split.threshold;
    self.left = l;
    self.right = r;
    return index;
  }

  SplitCandidate best_split(const std::vector<std::size_t>& rows, int pos, int neg) const {
    const double n = static_cast<double>(rows.size());
    const double parent_h = entropy2(pos, neg);
    std::vector<SplitCandidate> candidates;
    std::vector<std::size_t> order(rows);
    for (std::size_t f = 0; f < m_.feature_names.size(); ++f) {
      auto value = [&](std::size_t r) { return m_.rows[r].values[f]; };
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return value(a) < value(b); });
      SplitCandidate best;
      int lp = 0, ln = 0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        ++(is_positive(m_.rows[order[i]].label) ? lp : ln);
        const double lo = value(order[i]);
        const double hi = value(order[i + 1]);
        if (!(lo < hi)) continue;
        const int nl = static_cast<int>(i + 1);
        const int nr = static_cast<int>(order.size()) - nl;
        if (nl < p_.min_leaf || nr < p_.min_leaf) continue;
        const double gain = parent_h - (nl / n) * entropy2(lp, ln) - (nr / n) * entropy2(pos - lp, neg - ln);
        if (gain > best.gain + 1e-12) {
          const double split_info = entropy2(nl, nr);
          best = {static_cast<int>(f), lo + (hi - lo) / 2.0, gain, split_info > 0 ? gain / split_info : 0.0};
        }
      }
      if (best.feature >= 0 && best.gain > 1e-12) candidates.push_back(best);
    }
    if (candidates.empty()) return {};
    double avg = 0;
    for (const auto& c : candidates) avg += c.gain;
    avg /= static_cast<double>(candidates.size());
    SplitCandidate chosen;
    for (const auto& c : candidates) {
      if (c.gain + 1e-12 < avg) continue;
      if (chosen.feature < 0 || c.ratio > chosen.ratio + 1e-15) chosen = c;
    }
    return chosen;
  }

  const FeatureMatrix& m_;
  const TreeParams& p_;
  DecisionTree tree_;
};

}  // namespace

DecisionTree train_tree(const FeatureMatrix& matrix, const TreeParams& params) {
  if (params.min_leaf < 1 || params.max_depth < 0) throw ConfigError("tree needs min_leaf >= 1 and max_depth >= 0");
  require_complete(matrix);
  if (matrix.rows.empty()) throw DataError("cannot train a tree on no rows");
  return TreeBuilder(matrix, params).build();
}

double positive_probability(const DecisionTree& tree, std::span<const double> row) {
  if (tree.nodes.empty()) throw InvariantError("empty decision tree");
  const TreeNode* node = &tree.nodes[0];
  while (!node->is_leaf()) {
    const double v = row[static_cast<std::size_t>(node->feature)];
    node = &tree.nodes[static_cast<std::size_t>(v <= node->threshold ? node->left : node->right)];
  }
  return (node->positives + 1.0) / (node->positives + node->negatives + 2.0);
}

// ---------------------------------------------------------------- logistic

namespace {

double log1pexp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Standardized {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
};

Standardized standardize(const FeatureMatrix& m, const std::vector<double>& mean, const std::vector<double>& scale) {
  Standardized s;
  for (const auto& r : m.rows) {
    std::vector<double> z(r.values.size());
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = (r.values[j] - mean[j]) / scale[j];
    s.x.push_back(std::move(z));
    s.y.push_back(is_positive(r.label) ? 1.0 : 0.0);
  }
  return s;
}

// theta = (bias, w...)
double objective(const Standardized& s, const std::vector<double>& theta, double l2) {
  double loss = 0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    double z = theta[0];
    for (std::size_t j = 0; j < s.x[i].size(); ++j) z += theta[j + 1] * s.x[i][j];
    loss += log1pexp(z) - s.y[i] * z;
  }
  loss /= static_cast<double>(s.x.size());
  for (std::size_t j = 1; j < theta.size(); ++j) loss += 0.5 * l2 * theta[j] * theta[j];
  return loss;
}

std::vector<double> gradient(const Standardized& s, const std::vector<double>& theta, double l2,
                             std::vector<std::vector<double>>* hessian) {
  const std::size_t p = theta.size();
  std::vector<double> g(p, 0.0);
  if (hessian) hessian->assign(p, std::vector<double>(p, 0.0));
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    double z = theta[0];
    for (std::size_t j = 0; j < s.x[i].size(); ++j) z += theta[j + 1] * s.x[i][j];
    const double mu = sigmoid(z);
    const double r = mu - s.y[i];
    g[0] += r;
    for (std::size_t j = 0; j + 1 < p; ++j) g[j + 1] += r * s.x[i][j];
    if (hessian) {
      const double w = mu * (1.0 - mu);
      for (std::size_t a = 0; a < p; ++a) {
        const double xa = a == 0 ? 1.0 : s.x[i][a - 1];
        for (std::size_t b = 0; b <= a; ++b) {
          const double xb = b == 0 ? 1.0 : s.x[i][b - 1];
          (*hessian)[a][b] += w * xa * xb;
        }
      }
    }
  }
  const double n = static_cast<double>(s.x.size());
  for (auto& v : g) v /= n;
  for (std::size_t j = 1; j < p; ++j) g[j] += l2 * theta[j];
  if (hessian) {
    auto& h = *hessian;
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b <= a; ++b) {
        h[a][b] /= n;
        h[b][a] = h[a][b];
      }
      if (a > 0) h[a][a] += l2;
    }
  }
  return g;
}

// Solves H x = g by Cholesky, adding diagonal jitter until H factors.
std::vector<double> solve_spd(std::vector<std::vector<double>> h, std::vector<double> g) {
  const std::size_t p = g.size();
  double jitter = 0;
  for (int attempt = 0; attempt < 30; ++attempt) {
    std::vector<std::vector<double>> l(p, std::vector<double>(p, 0.0));
    bool ok = true;
    for (std::size_t i = 0; i < p && ok; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double sum = h[i][j] + (i == j ? jitter : 0.0);
        for (std::size_t k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
        if (i == j) {
          if (!(sum > 0)) {
            ok = false;
            break;
          }
          l[i][i] = std::sqrt(sum);
        } else {
          l[i][j] = sum / l[j][j];
        }
      }
    }
    if (ok) {
      std::vector<double> y(p), x(p);
      for (std::size_t i = 0; i < p; ++i) {
        double sum = g[i];
        for (std::size_t k = 0; k < i; ++k) sum -= l[i][k] * y[k];
        y[i] = sum / l[i][i];
      }
      for (std::size_t i = p; i-- > 0;) {
        double sum = y[i];
        for (std::size_t k = i + 1; k < p; ++k) sum -= l[k][i] * x[k];
        x[i] = sum / l[i][i];
      }
      return x;
    }
    jitter = jitter == 0 ? 1e-12 : jitter * 10;
  }
  throw InvariantError("Hessian could not be factored");
}

}  // namespace

LogisticModel train_logistic(const FeatureMatrix& matrix, const LogisticParams& params) {
  require_complete(matrix);
  if (matrix.rows.empty()) throw DataError("cannot train logistic regression on no rows");
  const std::size_t d = matrix.feature_names.size();
  LogisticModel model;
  model.mean.assign(d, 0.0);
  model.scale.assign(d, 1.0);
  const double n = static_cast<double>(matrix.rows.size());
  for (const auto& r : matrix.rows) {
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += r.values[j] / n;
  }
  for (std::size_t j = 0; j < d; ++j) {
    double ss = 0;
    for (const auto& r : matrix.rows) ss += (r.values[j] - model.mean[j]) * (r.values[j] - model.mean[j]);
    const double sd = std::sqrt(ss / n);
    model.scale[j] = sd > 0 ? sd : 1.0;
  }
  const Standardized s = standardize(matrix, model.mean, model.scale);

  std::vector<double> theta(d + 1, 0.0);
  double current = objective(s, theta, params.l2);
  std::vector<std::vector<double>> hessian;
  for (int it = 0; it < params.max_iter; ++it) {
    model.iterations = it + 1;
    const auto g = gradient(s, theta, params.l2, &hessian);
    const auto step = solve_spd(hessian, g);
    double t = 1.0;
    std::vector<double> candidate(theta.size());
    double value = current;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t j = 0; j < theta.size(); ++j) candidate[j] = theta[j] - t * step[j];
      value = objective(s, candidate, params.l2);
      if (value <= current) break;
      t *= 0.5;
    }
    double delta = 0;
    for (std::size_t j = 0; j < theta.size(); ++j) delta = std::max(delta, std::abs(candidate[j] - theta[j]));
    if (value <= current) {
      theta = candidate;
      current = value;
    }
    if (delta < params.tol) {
      model.converged = true;
      break;
    }
  }
  model.bias = theta[0];
  model.weights.assign(theta.begin() + 1, theta.end());
  return model;
}

std::vector<double> logistic_gradient(const LogisticModel& model, const FeatureMatrix& matrix, double l2) {
  const Standardized s = standardize(matrix, model.mean, model.scale);
  std::vector<double> theta = {model.bias};
  theta.insert(theta.end(), model.weights.begin(), model.weights.end());
  return gradient(s, theta, l2, nullptr);
}

double positive_probability(const LogisticModel& model, std::span<const double> row) {
  double z = model.bias;
  for (std::size_t j = 0; j < model.weights.size(); ++j) {
    z += model.weights[j] * (row[j] - model.mean[j]) / model.scale[j];
  }
  return sigmoid(z);
}

// ---------------------------------------------------------------- naive bayes

NaiveBayesModel train_nb(const FeatureMatrix& matrix, const NaiveBayesParams& params) {
  require_complete(matrix);
  require_both_classes(matrix, "naive Bayes training rows");
  const std::size_t d = matrix.feature_names.size();
  NaiveBayesModel m;
  m.mean_positive.assign(d, 0.0);
  m.mean_negative.assign(d, 0.0);
  m.var_positive.assign(d, 0.0);
  m.var_negative.assign(d, 0.0);
  double np = 0, nn = 0;
  for (const auto& r : matrix.rows) {
    const bool pos = is_positive(r.label);
    (pos ? np : nn) += 1;
    auto& mean = pos ? m.mean_positive : m.mean_negative;
    for (std::size_t j = 0; j < d; ++j) mean[j] += r.values[j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    m.mean_positive[j] /= np;
    m.mean_negative[j] /= nn;
  }
  for (const auto& r : matrix.rows) {
    const bool pos = is_positive(r.label);
    const auto& mean = pos ? m.mean_positive : m.mean_negative;
    auto& var = pos ? m.var_positive : m.var_negative;
    for (std::size_t j = 0; j < d; ++j) var[j] += (r.values[j] - mean[j]) * (r.values[j] - mean[j]);
  }
  for (std::size_t j = 0; j < d; ++j) {
    m.var_positive[j] = std::max(m.var_positive[j] / np, params.variance_floor);
    m.var_negative[j] = std::max(m.var_negative[j] / nn, params.variance_floor);
  }
  m.prior_positive = np / (np + nn);
  m.prior_negative = nn / (np + nn);
  return m;
}

Posterior nb_posterior(const NaiveBayesModel& m, std::span<const double> row) {
  auto log_joint = [&](double prior, const std::vector<double>& mean, const std::vector<double>& var) {
    double lp = std::log(prior);
    for (std::size_t j = 0; j < mean.size(); ++j) {
      const double diff = row[j] - mean[j];
      lp += -0.5 * std::log(2.0 * M_PI * var[j]) - diff * diff / (2.0 * var[j]);
    }
    return lp;
  };
  const double lp = log_joint(m.prior_positive, m.mean_positive, m.var_positive);
  const double ln = log_joint(m.prior_negative, m.mean_negative, m.var_negative);
  Posterior post;
  post.positive = sigmoid(lp - ln);
  post.negative = 1.0 - post.positive;
  return post;
}

double positive_probability(const NaiveBayesModel& model, std::span<const double> row) {
  return nb_posterior(model, row).positive;
}

// ---------------------------------------------------------------- fit/predict

TrainedModel fit(Algorithm algorithm, const FeatureMatrix& matrix, const LearnerParams& params) {
  require_both_classes(matrix, "training rows");
  TrainedModel model;
  model.algorithm = algorithm;
  model.feature_names = matrix.feature_names;
  model.imputer = Imputer::fit(matrix);
  FeatureMatrix filled = matrix;
  for (auto& r : filled.rows) model.imputer.apply(r.values);
  switch (algorithm) {
    case Algorithm::DecisionTree: model.params = train_tree(filled, params.tree); break;
    case Algorithm::LogisticRegression: model.params = train_logistic(filled, params.logistic); break;
    case Algorithm::NaiveBayes: model.params = train_nb(filled, params.nb); break;
  }
  return model;
}

Label decide(double p) { return p >= 0.5 ? Label::Unresolved : Label::Resolved; }

Prediction predict(const TrainedModel& model, std::span<const double> row) {
  if (row.size() != model.feature_names.size()) throw DataError("row width does not match the model's features");
  std::vector<double> filled(row.begin(), row.end());
  model.imputer.apply(filled);
  const double p = std::visit([&](const auto& m) { return positive_probability(m, filled); }, model.params);
  return {decide(p), p};
}

// ---------------------------------------------------------------- persistence

namespace {

void write_vec(std::ostream& out, std::string_view key, const std::vector<double>& v) {
  out << key;
  for (double x : v) out << ' ' << format_double(x);
  out << '\n';
}

std::vector<double> read_vec(const std::string& line, std::string_view key, std::size_t expected) {
  std::istringstream ss(line);
  std::string k;
  ss >> k;
  if (k != key) throw DataError("model file: expected '" + std::string(key) + "'");
  std::vector<double> v;
  std::string tok;
  while (ss >> tok) v.push_back(parse_double(tok));
  if (v.size() != expected) throw DataError("model file: '" + std::string(key) + "' has the wrong length");
  return v;
}

}  // namespace

void save_trained_model(std::ostream& out, const TrainedModel& model) {
  out << "unresolved-model/1\n";
  out << "algorithm " << to_string(model.algorithm) << '\n';
  out << "features";
  for (const auto& n : model.feature_names) out << ' ' << n;
  out << '\n';
  write_vec(out, "imputer", model.imputer.means);
  if (const auto* tree = std::get_if<DecisionTree>(&model.params)) {
    out << "nodes " << tree->nodes.size() << '\n';
    for (const auto& n : tree->nodes) {
      out << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
          << n.positives << ' ' << n.negatives << '\n';
    }
  } else if (const auto* lr = std::get_if<LogisticModel>(&model.params)) {
    write_vec(out, "mean", lr->mean);
    write_vec(out, "scale", lr->scale);
    write_vec(out, "weights", lr->weights);
    out << "bias " << format_double(lr->bias) << '\n';
    out << "converged " << (lr->converged ? 1 : 0) << '\n';
    out << "iterations " << lr->iterations << '\n';
  } else if (const auto* nb = std::get_if<NaiveBayesModel>(&model.params)) {
    out << "priors " << format_double(nb->prior_positive) << ' ' << format_double(nb->prior_negative) << '\n';
    write_vec(out, "mean_positive", nb->mean_positive);
    write_vec(out, "var_positive", nb->var_positive);
    write_vec(out, "mean_negative", nb->mean_negative);
    write_vec(out, "var_negative", nb->var_negative);
  }
  out << "end\n";
}

TrainedModel load_trained_model(std::istream& in) {
  std::string line;
  auto next = [&]() -> std::string {
    if (!std::getline(in, line)) throw DataError("model file: unexpected end of file");
    return line;
  };
  if (next() != "unresolved-model/1") throw DataError("model file: unsupported format");
  TrainedModel model;
  {
    std::istringstream ss(next());
    std::string k, alg;
    ss >> k >> alg;
    if (k != "algorithm") throw DataError("model file: expected 'algorithm'");
    try {
      model.algorithm = parse_algorithm(alg);
    } catch (const ConfigError& e) {
      throw DataError(std::string("model file: ") + e.what());
    }
  }
  {
    std::istringstream ss(next());
    std::string k, name;
    ss >> k;
    if (k != "features") throw DataError("model file: expected 'features'");
    while (ss >> name) model.feature_names.push_back(name);
  }
  const std::size_t d = model.feature_names.size();
  model.imputer.means = read_vec(next(), "imputer", d);
  switch (model.algorithm) {
    case Algorithm::DecisionTree: {
      DecisionTree tree;
      std::istringstream ss(next());
      std::string k;
      std::size_t count = 0;
      if (!(ss >> k >> count) || k != "nodes") throw DataError("model file: expected 'nodes'");
      for (std::size_t i = 0; i < count; ++i) {
        std::istringstream ns(next());
        TreeNode n;
        std::string threshold;
        if (!(ns >> n.feature >> threshold >> n.left >> n.right >> n.positives >> n.negatives)) {
          throw DataError("model file: bad tree node");
        }
        n.threshold = parse_double(threshold);
        const auto limit = static_cast<int>(count);
        if (n.feature >= static_cast<int>(d) ||
            (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= limit || n.right >= limit))) {
          throw DataError("model file: tree node out of range");
        }
        tree.nodes.push_back(n);
      }
      if (tree.nodes.empty()) throw DataError("model file: empty tree");
      model.params = std::move(tree);
      break;
    }
    case Algorithm::LogisticRegression: {
      LogisticModel lr;
      lr.mean = read_vec(next(), "mean", d);
      lr.scale = read_vec(next(), "scale", d);
      lr.weights = read_vec(next(), "weights", d);
      lr.bias = read_vec(next(), "bias", 1)[0];
      lr.converged = read_vec(next(), "converged", 1)[0] != 0.0;
      lr.iterations = static_cast<int>(read_vec(next(), "iterations", 1)[0]);
      model.params = std::move(lr);
      break;
    }
    case Algorithm::NaiveBayes: {
      NaiveBayesModel nb;
      const auto priors = read_vec(next(), "priors", 2);
      nb.prior_positive = priors[0];
      nb.prior_negative = priors[1];
      nb.mean_positive = read_vec(next(), "mean_positive", d);
      nb.var_positive = read_vec(next(), "var_positive", d);
      nb.mean_negative = read_vec(next(), "mean_negative", d);
      nb.var_negative = read_vec(next(), "var_negative", d);
      model.params = std::move(nb);
      break;
    }
  }
  if (next() != "end") throw DataError("model file: expected 'end'");
  return model;
}

// ---------------------------------------------------------------- evaluation

std::vector<int> stratified_folds(std::span<const Label> labels, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (labels.size() < static_cast<std::size_t>(k)) {
    throw DataError("cannot split " + std::to_string(labels.size()) + " rows into " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < labels.size(); ++i) (is_positive(labels[i]) ? positives : negatives).push_back(i);
  Rng rng(seed);
  std::vector<int> fold(labels.size(), -1);
  std::size_t offset = 0;
  for (auto* cls : {&positives, &negatives}) {
    rng.shuffle(std::span<std::size_t>(*cls));
    for (std::size_t i = 0; i < cls->size(); ++i) {
      fold[(*cls)[i]] = static_cast<int>((offset + i) % static_cast<std::size_t>(k));
    }
    offset = (offset + cls->size()) % static_cast<std::size_t>(k);
  }
  return fold;
}

TrainedModel fit_fold(Algorithm algorithm, const FeatureMatrix& matrix, std::span<const int> folds, int fold,
                      const LearnerParams& params) {
  FeatureMatrix train;
  train.feature_names = matrix.feature_names;
  for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
    if (folds[i] != fold) train.rows.push_back(matrix.rows[i]);
  }
  try {
    require_both_classes(train, "training rows");
  } catch (const DataError&) {
    throw DataError("fold " + std::to_string(fold) +
                    ": training rows hold a single class; use a larger dataset or fewer folds");
  }
  return fit(algorithm, train, params);
}

void ConfusionMatrix::add(Label truth, Label predicted) {
  if (is_positive(truth)) {
    ++(is_positive(predicted) ? tp : fn);
  } else {
    ++(is_positive(predicted) ? fp : tn);
  }
}

double ConfusionMatrix::accuracy() const {
  return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
}

std::optional<double> ConfusionMatrix::precision() const {
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> ConfusionMatrix::recall() const {
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

EvaluationRecord cross_validate(Algorithm algorithm, const FeatureMatrix& matrix, int k, std::uint64_t seed,
                                const LearnerParams& params) {
  std::vector<Label> labels;
  for (const auto& r : matrix.rows) labels.push_back(r.label);
  const auto folds = stratified_folds(labels, k, seed);
  EvaluationRecord rec;
  rec.algorithm = algorithm;
  rec.feature_names = matrix.feature_names;
  rec.folds = k;
  rec.seed = seed;
  for (int f = 0; f < k; ++f) {
    const TrainedModel model = fit_fold(algorithm, matrix, folds, f, params);
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
      if (folds[i] != f) continue;
      rec.confusion.add(matrix.rows[i].label, predict(model, matrix.rows[i].values).label);
    }
  }
  if (rec.confusion.total() != static_cast<long>(matrix.rows.size())) {
    throw InvariantError("pooled confusion matrix does not cover the dataset");
  }
  return rec;
}

std::string report_json(const EvaluationReport& report) {
  using nlohmann::json;
  json records = json::array();
  for (const auto& r : report.records) {
    const auto& c = r.confusion;
    auto opt = [](std::optional<double> v) { return v ? json(*v) : json(nullptr); };
    records.push_back({{"algorithm", std::string(to_string(r.algorithm))},
                       {"feature_set", feature_set_name(r.feature_names)},
                       {"features", r.feature_names},
                       {"confusion", {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}}},
                       {"accuracy", c.accuracy()},
                       {"precision_unresolved", opt(c.precision())},
                       {"recall_unresolved", opt(c.recall())},
                       {"folds", r.folds},
                       {"seed", r.seed}});
  }
  json doc = {{"format", "unresolved-evaluation/1"},
              {"positive_class", "Unresolved"},
              {"config",
               {{"folds", report.folds},
                {"seed", report.seed},
                {"tree", {{"min_leaf", report.params.tree.min_leaf}, {"max_depth", report.params.tree.max_depth}}},
                {"logistic",
                 {{"l2", report.params.logistic.l2},
                  {"tol", report.params.logistic.tol},
                  {"max_iter", report.params.logistic.max_iter}}},
                {"nb", {{"variance_floor", report.params.nb.variance_floor}}}}},
              {"records", std::move(records)}};
  return doc.dump(2) + "\n";
}

std::string report_table(const EvaluationReport& report) {
  auto pct = [](std::optional<double> v) {
    if (!v) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", *v * 100.0);
    return std::string(buf);
  };
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-36s %10s %10s %10s\n", "Algorithm", "Metrics", "Accuracy", "Precision",
                "Recall");
  out += line;
  for (const auto& r : report.records) {
    std::string metrics = "{";
    for (std::size_t i = 0; i < r.feature_names.size(); ++i) metrics += (i ? ", " : "") + r.feature_names[i];
    metrics += "}";
    std::snprintf(line, sizeof line, "%-22s %-36s %10s %10s %10s\n", std::string(display_name(r.algorithm)).c_str(),
                  metrics.c_str(), pct(r.confusion.accuracy()).c_str(), pct(r.confusion.precision()).c_str(),
                  pct(r.confusion.recall()).c_str());
    out += line;
  }
  return out;
}

}  // namespace unresolved
