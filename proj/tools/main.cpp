// Command-line front end: ingest, featurize, train, evaluate, predict,
// report and synth subcommands sharing one set of flags.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "unresolved/pipeline.hpp"
#include "unresolved/timestamp.hpp"

namespace {

using unresolved::RunConfig;

struct Flags {
  std::string analysis_date = "2015-02-18";
  std::string feature_set = "all";
  std::string algorithm = "all";
  std::string alpha_mode = "marginal";
  std::uint64_t seed = 42;
  double lda_alpha = 0;
};

void add_paths(CLI::App* cmd, RunConfig& config, bool dumps) {
  cmd->add_option("--workdir", config.workdir, "Directory for pipeline files")->capture_default_str();
  if (dumps) {
    cmd->add_option("--posts", config.posts, "Posts.xml path (default <workdir>/Posts.xml)");
    cmd->add_option("--users", config.users, "Users.xml path (default <workdir>/Users.xml)");
  }
}

void add_selection(CLI::App* cmd, RunConfig& config, Flags& flags) {
  cmd->add_option("--min-age-days", config.criteria.min_age_days, "Minimum question age in days")
      ->capture_default_str();
  cmd->add_option("--min-answers", config.criteria.min_answers, "Minimum number of answers")->capture_default_str();
  cmd->add_option("--analysis-date", flags.analysis_date, "Analysis date, YYYY-MM-DD (UTC)")->capture_default_str();
}

void add_seed(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--seed", flags.seed, "Random seed")->capture_default_str();
}

void add_learner(CLI::App* cmd, RunConfig& config, Flags& flags) {
  cmd->add_option("--feature-set", flags.feature_set, "full, reduced or all")
      ->check(CLI::IsMember({"full", "reduced", "all"}))
      ->capture_default_str();
  cmd->add_option("--algorithm", flags.algorithm, "tree, logistic, nb or all")
      ->check(CLI::IsMember({"tree", "logistic", "nb", "all"}))
      ->capture_default_str();
  cmd->add_option("--min-leaf", config.learner.tree.min_leaf, "Tree: minimum rows per leaf")->capture_default_str();
  cmd->add_option("--max-depth", config.learner.tree.max_depth, "Tree: maximum depth")->capture_default_str();
  cmd->add_option("--l2", config.learner.logistic.l2, "Logistic: L2 penalty")->capture_default_str();
}

int run(int argc, char** argv) {
  CLI::App app{"Predict unresolved questions from Stack Exchange data dumps"};
  app.require_subcommand(1);
  RunConfig config;
  Flags flags;

  auto* ingest = app.add_subcommand("ingest", "Parse dumps and select questions into <workdir>/dataset.jsonl");
  add_paths(ingest, config, true);
  add_selection(ingest, config, flags);
  ingest->get_option("--posts")->required();

  auto* featurize = app.add_subcommand("featurize", "Train LDA and write the feature tables");
  add_paths(featurize, config, false);
  add_seed(featurize, flags);
  featurize->add_option("--topics", config.lda.topics, "Number of LDA topics")->capture_default_str();
  featurize->add_option("--lda-iters", config.lda.iterations, "Gibbs sweeps")->capture_default_str();
  featurize->add_option("--lda-alpha", flags.lda_alpha, "Symmetric doc-topic prior (default 50/topics)");
  featurize->add_option("--lda-beta", config.lda.beta, "Symmetric topic-word prior")->capture_default_str();
  featurize->add_option("--alpha-mode", flags.alpha_mode, "Corpus topic weights: marginal or prior")
      ->check(CLI::IsMember({"marginal", "prior"}))
      ->capture_default_str();
  featurize->add_option("--cr-weights", config.cr_weights, "Code readability scorer file");
  featurize->add_flag("--reuse-lda", config.reuse_lda, "Reuse <workdir>/lda_model.txt when present");

  auto* train = app.add_subcommand("train", "Fit models on all rows and save them");
  add_paths(train, config, false);
  add_learner(train, config, flags);
  train->add_option("--features", config.features, "Feature CSV (default <workdir>/features.csv)");

  auto* evaluate = app.add_subcommand("evaluate", "Stratified cross-validation report");
  add_paths(evaluate, config, false);
  add_learner(evaluate, config, flags);
  add_seed(evaluate, flags);
  evaluate->add_option("--folds", config.folds, "Number of folds")->capture_default_str();
  evaluate->add_option("--features", config.features, "Feature CSV (default <workdir>/features.csv)");

  auto* predict = app.add_subcommand("predict", "Apply a saved model to feature rows");
  add_paths(predict, config, false);
  predict->add_option("--model", config.model, "Model file written by train")->required();
  predict->add_option("--features", config.features, "Feature CSV (default <workdir>/features.csv)");
  predict->add_option("--output", config.output, "Output CSV (default <workdir>/predictions.csv)");
  predict->add_option("--feature-set", flags.feature_set, "Expected feature set of the model")
      ->check(CLI::IsMember({"full", "reduced", "all"}));

  auto* report = app.add_subcommand("report", "Per-class descriptive statistics and histograms");
  add_paths(report, config, false);

  auto* synth = app.add_subcommand("synth", "Generate synthetic Posts.xml and Users.xml");
  add_paths(synth, config, true);
  add_seed(synth, flags);
  synth->add_option("--n-questions", config.synth.n_questions, "Number of target questions")->capture_default_str();
  synth->add_option("--unresolved-fraction", config.synth.unresolved_fraction, "Share of unresolved targets")
      ->capture_default_str();
  synth->add_option("--analysis-date", flags.analysis_date, "Analysis date, YYYY-MM-DD (UTC)")->capture_default_str();
  synth->add_option("--folds", config.folds, "Folds planned downstream (for the size warning)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    config.criteria.analysis_date = unresolved::parse_timestamp(flags.analysis_date);
  } catch (const unresolved::DataError& e) {
    std::cerr << "error: --analysis-date: " << e.what() << '\n';
    return 1;
  }
  if (flags.feature_set != "all") config.feature_set = unresolved::parse_feature_set(flags.feature_set);
  if (flags.algorithm != "all") config.algorithm = unresolved::parse_algorithm(flags.algorithm);
  config.alpha_mode = flags.alpha_mode == "prior" ? unresolved::AlphaMode::DirichletPrior
                                                  : unresolved::AlphaMode::CorpusMarginal;
  if (flags.lda_alpha > 0) config.lda.alpha = flags.lda_alpha;
  config.seed = flags.seed;
  config.lda.seed = flags.seed;
  config.synth.seed = flags.seed;

  auto& log = std::cout;
  if (*ingest) unresolved::cmd_ingest(config, log);
  if (*featurize) unresolved::cmd_featurize(config, log);
  if (*train) unresolved::cmd_train(config, log);
  if (*evaluate) unresolved::cmd_evaluate(config, log);
  if (*predict) unresolved::cmd_predict(config, log);
  if (*report) unresolved::cmd_report(config, log);
  if (*synth) unresolved::cmd_synth(config, log);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const unresolved::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const unresolved::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const unresolved::InvariantError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
