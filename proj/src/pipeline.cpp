#include "unresolved/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "unresolved/content.hpp"
#include "unresolved/dataset_io.hpp"
#include "unresolved/describe.hpp"
#include "unresolved/io.hpp"
#include "unresolved/readability.hpp"
#include "unresolved/user_metrics.hpp"

namespace unresolved {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string>& extended_names() {
  static const std::vector<std::string> names = {
      "tr", "tr_imputed", "fk", "fog", "cli", "smog", "ari", "cr", "ts", "te", "arr", "arr_imputed",
      "lad", "lad_log", "votes", "reputation", "rep_log"};
  return names;
}

// Columns described by the report, in output order.
const std::vector<std::string>& report_metrics() {
  static const std::vector<std::string> names = {"tr", "cr", "ts", "te", "arr", "lad", "lad_log",
                                                 "votes", "reputation", "rep_log"};
  return names;
}

std::ifstream open_input(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + what + " '" + path.string() + "'");
  return in;
}

std::string manifest_name(const RunConfig& config, const fs::path& path) {
  std::error_code ec;
  const auto rel = fs::relative(path, config.workdir, ec);
  if (!ec && !rel.empty() && rel.native().rfind("..", 0) != 0) return rel.generic_string();
  return path.generic_string();
}

// Records the command's config hash and the digests of what it read and wrote.
void update_manifest(const RunConfig& config, const std::string& command, const std::vector<fs::path>& inputs,
                     const std::vector<fs::path>& outputs) {
  using nlohmann::json;
  const fs::path path = config.in_workdir(kManifestFile);
  json doc;
  if (fs::exists(path)) {
    try {
      doc = json::parse(read_file(path));
    } catch (const json::exception&) {
      doc = json::object();
    }
  }
  if (!doc.is_object()) doc = json::object();
  doc["format"] = "unresolved-manifest/1";
  auto digests = [&](const std::vector<fs::path>& paths) {
    json out = json::object();
    for (const auto& p : paths) out[manifest_name(config, p)] = fnv1a_hex(read_file(p));
    return out;
  };
  doc["commands"][command] = {{"config_hash", fnv1a_hex(config.canonical())},
                              {"inputs", digests(inputs)},
                              {"outputs", digests(outputs)}};
  write_file_atomic(path, doc.dump(2) + "\n");
}

std::string serialize(const auto& write, const auto& value) {
  std::ostringstream out;
  write(out, value);
  return out.str();
}

FeatureMatrix read_table(const fs::path& path, const std::string& what) {
  auto in = open_input(path, what);
  return read_feature_csv(in);
}

std::size_t column_index(const FeatureMatrix& table, const std::string& name, const fs::path& source) {
  auto it = std::find(table.feature_names.begin(), table.feature_names.end(), name);
  if (it == table.feature_names.end()) {
    throw DataError("'" + source.string() + "' has no column '" + name + "'");
  }
  return static_cast<std::size_t>(it - table.feature_names.begin());
}

std::vector<FeatureSet> selected_sets(const RunConfig& config) {
  if (config.feature_set) return {*config.feature_set};
  return {FeatureSet::Full, FeatureSet::Reduced};
}

std::vector<Algorithm> selected_algorithms(const RunConfig& config) {
  if (config.algorithm) return {*config.algorithm};
  return {Algorithm::DecisionTree, Algorithm::LogisticRegression, Algorithm::NaiveBayes};
}

double grade_or_nan(const Grade& g) { return g ? *g : kNaN; }

}  // namespace

// ---------------------------------------------------------------- config

void RunConfig::validate() const {
  criteria.validate();
  lda.validate();
  if (folds < 2) throw ConfigError("--folds must be at least 2");
  if (learner.tree.min_leaf < 1 || learner.tree.max_depth < 0) throw ConfigError("invalid tree parameters");
  if (!(learner.logistic.l2 >= 0) || !(learner.logistic.tol > 0) || learner.logistic.max_iter < 1) {
    throw ConfigError("invalid logistic regression parameters");
  }
  if (!(learner.nb.variance_floor > 0)) throw ConfigError("naive Bayes variance floor must be positive");
  synth.validate();
}

fs::path RunConfig::posts_path() const { return posts.empty() ? workdir / "Posts.xml" : posts; }
fs::path RunConfig::users_path() const { return users.empty() ? workdir / "Users.xml" : users; }

std::string RunConfig::canonical() const {
  std::ostringstream out;
  out << "min_age_days=" << criteria.min_age_days << '\n'
      << "min_answers=" << criteria.min_answers << '\n'
      << "analysis_date=" << format_timestamp(criteria.analysis_date) << '\n'
      << "topics=" << lda.topics << '\n'
      << "lda_alpha=" << format_double(lda.doc_prior()) << '\n'
      << "lda_beta=" << format_double(lda.beta) << '\n'
      << "lda_iterations=" << lda.iterations << '\n'
      << "lda_seed=" << lda.seed << '\n'
      << "alpha_mode=" << (alpha_mode == AlphaMode::CorpusMarginal ? "marginal" : "prior") << '\n'
      << "cr_weights=" << (cr_weights ? cr_weights->generic_string() : "builtin") << '\n'
      << "tree=" << learner.tree.min_leaf << ',' << learner.tree.max_depth << '\n'
      << "logistic=" << format_double(learner.logistic.l2) << ',' << format_double(learner.logistic.tol) << ','
      << learner.logistic.max_iter << '\n'
      << "nb_floor=" << format_double(learner.nb.variance_floor) << '\n'
      << "folds=" << folds << '\n'
      << "seed=" << seed << '\n'
      << "feature_set=" << (feature_set ? to_string(*feature_set) : "all") << '\n'
      << "algorithm=" << (algorithm ? to_string(*algorithm) : "all") << '\n'
      << "synth=" << synth.n_questions << ',' << format_double(synth.unresolved_fraction) << ',' << synth.seed
      << '\n';
  return out.str();
}

// ---------------------------------------------------------------- ingest

IngestResult cmd_ingest(const RunConfig& config, std::ostream& log) {
  config.validate();
  const fs::path posts_path = config.posts_path();
  const fs::path users_path = config.users_path();
  PostsResult posts;
  {
    auto in = open_input(posts_path, "posts dump");
    posts = parse_posts(in);
  }
  UsersResult users;
  {
    auto in = open_input(users_path, "users dump");
    users = parse_users(in);
  }
  for (const auto& e : posts.errors) log << "warning: posts row " << e.row_index << ": " << e.message << '\n';
  for (const auto& e : users.errors) log << "warning: users row " << e.row_index << ": " << e.message << '\n';

  LinkResult linked = link_threads(posts.rows, users.rows);
  for (const auto& w : linked.report.warnings) log << "warning: " << w << '\n';
  Dataset dataset = apply_selection(linked.threads, config.criteria);
  const auto& c = dataset.counts;
  log << "considered: " << c.considered << '\n'
      << "retained: " << c.retained << '\n'
      << "  resolved: " << c.resolved << '\n'
      << "  unresolved: " << c.unresolved << '\n'
      << "rejected (too young): " << c.too_young << '\n'
      << "rejected (too few answers): " << c.too_few_answers << '\n'
      << "rejected (no owner profile): " << c.no_owner << '\n';
  if (c.retained == 0) throw DataError("no question satisfies the selection criteria");

  IngestSummary summary;
  summary.post_rows = posts.rows.size();
  summary.post_row_errors = posts.errors.size();
  summary.other_post_types = posts.skipped;
  summary.user_rows = users.rows.size();
  summary.user_row_errors = users.errors.size();
  summary.dangling_answers = linked.report.dangling_answers;
  summary.broken_accepted_refs = linked.report.broken_accepted_refs;
  summary.owners_without_profile = linked.report.owners_without_profile;

  fs::create_directories(config.workdir);
  const fs::path out = config.in_workdir(kDatasetFile);
  std::ostringstream buffer;
  write_dataset(buffer, dataset, summary);
  write_file_atomic(out, buffer.str());
  update_manifest(config, "ingest", {posts_path, users_path}, {out});
  return {c, posts.errors.size(), users.errors.size()};
}

// ---------------------------------------------------------------- featurize

std::size_t cmd_featurize(const RunConfig& config, std::ostream& log) {
  config.validate();
  const fs::path dataset_path = config.in_workdir(kDatasetFile);
  LoadedDataset loaded = [&] {
    auto in = open_input(dataset_path, "dataset");
    return read_dataset(in);
  }();
  const Dataset& dataset = loaded.dataset;
  const Timestamp analysis_date = dataset.criteria.analysis_date;

  CodeScorer scorer = config.cr_weights ? CodeScorer::parse(read_file(*config.cr_weights)) : CodeScorer::defaults();

  const Corpus corpus = build_corpus(dataset);
  const fs::path lda_path = config.in_workdir(kLdaFile);
  std::vector<fs::path> inputs = {dataset_path};
  if (config.cr_weights) inputs.push_back(*config.cr_weights);
  TopicModel model;
  if (config.reuse_lda && fs::exists(lda_path)) {
    auto in = open_input(lda_path, "topic model");
    model = load_model(in);
    if (model.doc_ids != corpus.doc_ids() || model.topics != config.lda.topics) {
      throw DataError("saved topic model does not match the dataset or --topics; rerun without --reuse-lda");
    }
    inputs.push_back(lda_path);
    log << "topic model: reused " << lda_path.string() << '\n';
  } else {
    log << "topic model: " << config.lda.topics << " topics, " << corpus.documents().size() << " documents, "
        << corpus.vocabulary().size() << " words, " << corpus.token_count() << " tokens, " << config.lda.iterations
        << " sweeps\n";
    model = train_lda(corpus, config.lda);
  }
  const std::vector<double> alpha = corpus_alpha(model, config.alpha_mode);
  std::unordered_map<std::string, int> doc_index;
  for (std::size_t d = 0; d < model.doc_ids.size(); ++d) doc_index.emplace(model.doc_ids[d], static_cast<int>(d));
  auto theta_of = [&](const std::string& id) {
    auto it = doc_index.find(id);
    if (it == doc_index.end()) throw InvariantError("topic model lacks document " + id);
    return doc_theta(model, it->second);
  };

  FeatureMatrix features;
  features.feature_names = feature_names(FeatureSet::Full);
  FeatureMatrix extended;
  extended.feature_names = extended_names();

  std::vector<std::optional<double>> trs, arrs;
  for (const auto& thread : dataset.threads) {
    const ContentSegments segments = segment_html(thread.question.body);
    const ReadabilityGrades grades = text_readability(text_stats(segments.prose));
    const CodeFeatureVector code = code_features(segments.code_blocks);
    const double cr = code.empty ? kNaN : code_readability(code, scorer);

    const auto q_theta = theta_of("q" + std::to_string(thread.question.id));
    const auto top = top_topics(q_theta, 5);
    const double te = topic_entropy(q_theta, alpha, top);
    double ts = kNaN;
    if (const PostRow* answer = thread.topic_answer()) {
      ts = topic_similarity(q_theta, theta_of("a" + std::to_string(answer->id)), alpha, top);
    }
    const BehaviourFeatures b = behaviour_features(thread, analysis_date);
    trs.push_back(grades.average);
    arrs.push_back(b.arr);

    features.rows.push_back({thread.question.id,
                             {te, b.arr.value_or(kNaN), b.log_lad, static_cast<double>(b.votes), b.log_reputation},
                             thread.label});
    std::vector<double> ext = {grade_or_nan(grades.average), 0.0};
    for (const auto& g : grades.per_formula) ext.push_back(grade_or_nan(g));
    ext.insert(ext.end(), {cr, ts, te, b.arr.value_or(kNaN), 0.0, static_cast<double>(b.lad_days), b.log_lad,
                           static_cast<double>(b.votes), static_cast<double>(b.reputation), b.log_reputation});
    extended.rows.push_back({thread.question.id, std::move(ext), thread.label});
  }

  // Descriptive table only: fill TR with the dataset median, ARR with the mean.
  std::vector<double> defined_tr;
  for (const auto& t : trs) {
    if (t) defined_tr.push_back(*t);
  }
  std::sort(defined_tr.begin(), defined_tr.end());
  const double tr_fill = quantile_sorted(defined_tr, 0.5);
  const double arr_fill = mean_of_defined(arrs).value_or(kNaN);
  for (std::size_t i = 0; i < extended.rows.size(); ++i) {
    auto& v = extended.rows[i].values;
    const auto tr = impute(trs[i], tr_fill);
    v[0] = tr.value;
    v[1] = tr.imputed ? 1.0 : 0.0;
    const auto arr = impute(arrs[i], arr_fill);
    v[10] = arr.value;
    v[11] = arr.imputed ? 1.0 : 0.0;
  }

  fs::create_directories(config.workdir);
  const fs::path features_path = config.in_workdir(kFeaturesFile);
  const fs::path extended_path = config.in_workdir(kExtendedFile);
  std::vector<fs::path> outputs = {features_path, extended_path};
  if (!(config.reuse_lda && fs::exists(lda_path))) {
    write_file_atomic(lda_path, serialize(save_model, model));
    outputs.push_back(lda_path);
  }
  write_file_atomic(features_path, serialize(write_feature_csv, features));
  write_file_atomic(extended_path, serialize(write_feature_csv, extended));
  update_manifest(config, "featurize", inputs, outputs);

  long missing_arr = 0;
  for (const auto& a : arrs) missing_arr += a ? 0 : 1;
  log << "featurized: " << features.rows.size() << " questions (" << missing_arr
      << " without a rejection history)\n";
  return features.rows.size();
}

// ---------------------------------------------------------------- train / evaluate

std::vector<fs::path> cmd_train(const RunConfig& config, std::ostream& log) {
  config.validate();
  const fs::path features_path = config.features.value_or(config.in_workdir(kFeaturesFile));
  const FeatureMatrix table = read_table(features_path, "feature table");
  std::vector<fs::path> written;
  for (FeatureSet set : selected_sets(config)) {
    const FeatureMatrix matrix = assemble(table, set);
    for (Algorithm algorithm : selected_algorithms(config)) {
      const TrainedModel model = fit(algorithm, matrix, config.learner);
      const fs::path out = config.workdir / ("model_" + std::string(to_string(algorithm)) + "_" +
                                             std::string(to_string(set)) + ".txt");
      write_file_atomic(out, serialize(save_trained_model, model));
      log << "wrote " << out.string() << '\n';
      written.push_back(out);
    }
  }
  update_manifest(config, "train", {features_path}, written);
  return written;
}

EvaluationReport cmd_evaluate(const RunConfig& config, std::ostream& log) {
  config.validate();
  const fs::path features_path = config.features.value_or(config.in_workdir(kFeaturesFile));
  const FeatureMatrix table = read_table(features_path, "feature table");
  if (table.rows.size() < 2 * static_cast<std::size_t>(config.folds)) {
    log << "warning: " << table.rows.size() << " rows for " << config.folds << " folds\n";
  }
  EvaluationReport report;
  report.params = config.learner;
  report.folds = config.folds;
  report.seed = config.seed;
  std::vector<std::pair<FeatureSet, FeatureMatrix>> matrices;
  for (FeatureSet set : selected_sets(config)) matrices.emplace_back(set, assemble(table, set));
  for (Algorithm algorithm : selected_algorithms(config)) {
    for (const auto& [set, matrix] : matrices) {
      report.records.push_back(cross_validate(algorithm, matrix, config.folds, config.seed, config.learner));
    }
  }
  const fs::path json_path = config.in_workdir(kReportJson);
  const fs::path text_path = config.in_workdir(kReportText);
  const std::string table_text = report_table(report);
  write_file_atomic(json_path, report_json(report));
  write_file_atomic(text_path, table_text);
  update_manifest(config, "evaluate", {features_path}, {json_path, text_path});
  log << table_text;
  return report;
}

// ---------------------------------------------------------------- predict

std::vector<PredictionLine> cmd_predict(const RunConfig& config, std::ostream& log) {
  config.validate();
  if (!config.model) throw ConfigError("predict needs --model");
  const TrainedModel model = [&] {
    auto in = open_input(*config.model, "model");
    return load_trained_model(in);
  }();
  if (config.feature_set && feature_names(*config.feature_set) != model.feature_names) {
    throw ConfigError("model was trained on a different feature set than --feature-set " +
                      std::string(to_string(*config.feature_set)));
  }
  const fs::path features_path = config.features.value_or(config.in_workdir(kFeaturesFile));
  const FeatureMatrix table = read_table(features_path, "feature table");
  std::vector<std::size_t> columns;
  for (const auto& name : model.feature_names) columns.push_back(column_index(table, name, features_path));

  std::vector<PredictionLine> lines;
  std::string out = "question_id,label,probability\n";
  std::vector<double> row(columns.size());
  for (const auto& r : table.rows) {
    for (std::size_t j = 0; j < columns.size(); ++j) row[j] = r.values[columns[j]];
    const Prediction p = predict(model, row);
    lines.push_back({r.question_id, p});
    out += std::to_string(r.question_id) + ',' + std::string(to_string(p.label)) + ',' + format_double(p.probability) +
           '\n';
  }
  const fs::path out_path = config.output.value_or(config.in_workdir(kPredictionsFile));
  write_file_atomic(out_path, out);
  update_manifest(config, "predict", {*config.model, features_path}, {out_path});
  log << "predicted: " << lines.size() << " rows -> " << out_path.string() << '\n';
  return lines;
}

// ---------------------------------------------------------------- report

void cmd_report(const RunConfig& config, std::ostream& log) {
  config.validate();
  const fs::path extended_path = config.in_workdir(kExtendedFile);
  const FeatureMatrix table = read_table(extended_path, "extended feature table");
  std::vector<Label> labels;
  for (const auto& r : table.rows) labels.push_back(r.label);
  std::vector<MetricColumn> columns;
  for (const auto& name : report_metrics()) {
    const std::size_t c = column_index(table, name, extended_path);
    MetricColumn column{name, {}};
    for (const auto& r : table.rows) column.values.push_back(r.values[c]);
    columns.push_back(std::move(column));
  }
  const Description d = describe(columns, labels);
  const fs::path summary_path = config.in_workdir(kSummaryFile);
  const fs::path histogram_path = config.in_workdir(kHistogramFile);
  write_file_atomic(summary_path, summary_csv(d));
  write_file_atomic(histogram_path, histogram_csv(d));
  update_manifest(config, "report", {extended_path}, {summary_path, histogram_path});

  char line[160];
  std::snprintf(line, sizeof line, "%-12s %14s %14s\n", "metric", "mean resolved", "mean unresolved");
  log << line;
  for (std::size_t i = 0; i + 1 < d.summaries.size(); i += 2) {
    std::snprintf(line, sizeof line, "%-12s %14.4f %14.4f\n", d.summaries[i].metric.c_str(), d.summaries[i].mean,
                  d.summaries[i + 1].mean);
    log << line;
  }
}

// ---------------------------------------------------------------- synth

SynthDump cmd_synth(const RunConfig& config, std::ostream& log) {
  config.validate();
  SynthParams params = config.synth;
  params.analysis_date = config.criteria.analysis_date;
  params.min_age_days = std::max(params.min_age_days, config.criteria.min_age_days + 1);
  if (params.n_questions < 2 * config.folds) {
    log << "warning: " << params.n_questions << " questions cannot fill " << config.folds
        << " folds with both classes\n";
  }
  SynthDump dump = generate_synthetic(params);

  fs::create_directories(config.workdir);
  const fs::path posts_path = config.posts_path();
  const fs::path users_path = config.users_path();
  const fs::path truth_path = config.in_workdir(kTruthFile);
  write_file_atomic(posts_path, serialize(write_posts_xml, std::span<const PostRow>(dump.posts)));
  write_file_atomic(users_path, serialize(write_users_xml, std::span<const UserRow>(dump.users)));
  std::string truth = "question_id,label\n";
  std::size_t unresolved = 0;
  for (const auto& [id, label] : dump.targets) {
    truth += std::to_string(id) + ',' + std::string(to_string(label)) + '\n';
    unresolved += is_positive(label) ? 1 : 0;
  }
  write_file_atomic(truth_path, truth);
  update_manifest(config, "synth", {}, {posts_path, users_path, truth_path});
  log << "synthetic questions: " << dump.targets.size() << " (" << dump.targets.size() - unresolved
      << " resolved, " << unresolved << " unresolved)\n"
      << "posts: " << dump.posts.size() << ", users: " << dump.users.size() << '\n';
  return dump;
}

}  // namespace unresolved
