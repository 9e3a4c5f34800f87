#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "unresolved/dump.hpp"
#include "unresolved/rng.hpp"

namespace unresolved {

class Corpus {
 public:
  // Appends a document; unseen tokens get the next vocabulary index.
  void add_document(std::string id, std::span<const std::string> tokens);

  std::optional<int> lookup(std::string_view token) const;
  std::size_t token_count() const;

  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<std::vector<int>>& documents() const { return documents_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }

 private:
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<int>> documents_;
  std::vector<std::string> doc_ids_;
};

// One document per selected question ("q<id>") followed by one for its topic
// answer ("a<id>"): the accepted answer when resolved, else the best answer.
// Documents are prose only (code blocks excluded). Throws DataError when the
// dataset is empty or yields no vocabulary.
Corpus build_corpus(const Dataset& dataset);

struct LdaParams {
  int topics = 150;
  std::optional<double> alpha;  // symmetric doc-topic prior; default 50 / topics
  double beta = 0.01;           // symmetric topic-word prior
  int iterations = 1000;
  std::uint64_t seed = 1;

  double doc_prior() const { return alpha.value_or(50.0 / topics); }
  void validate() const;  // throws ConfigError
};

struct TopicModel {
  int topics = 0;
  int vocabulary_size = 0;
  int document_count = 0;
  double hyper_alpha = 0;
  double hyper_beta = 0;
  std::uint64_t seed = 0;
  int iterations = 0;

  std::vector<std::string> vocabulary;
  std::vector<std::string> doc_ids;
  std::vector<int> doc_lengths;   // D
  std::vector<int> doc_topic;     // D x K, row-major by document
  std::vector<int> word_topic;    // V x K, row-major by word
  std::vector<long> topic_totals; // K

  int doc_topic_count(int d, int k) const { return doc_topic[static_cast<std::size_t>(d) * topics + k]; }
  int topic_word_count(int k, int w) const { return word_topic[static_cast<std::size_t>(w) * topics + k]; }
  std::optional<int> find_document(std::string_view id) const;

  bool operator==(const TopicModel&) const = default;
};

// Collapsed Gibbs sampler. Each sweep resamples every token's topic from
//   p(z = k) ∝ (n_dk + alpha) (n_kw + beta) / (n_k + V beta)
// with the token's own assignment removed from the counts.
class GibbsSampler {
 public:
  // Validates parameters and assigns initial topics uniformly at random.
  GibbsSampler(const Corpus& corpus, const LdaParams& params);

  void sweep();
  int sweeps_completed() const { return sweeps_; }
  const TopicModel& model() const { return model_; }

  // Recounts from the assignments and checks every count identity.
  // Throws InvariantError on mismatch.
  void check_invariants() const;

 private:
  const Corpus& corpus_;
  TopicModel model_;
  std::vector<std::vector<int>> assignments_;
  Rng rng_;
  std::vector<double> weights_;
  int sweeps_ = 0;
};

TopicModel train_lda(const Corpus& corpus, const LdaParams& params);

// theta_k = (n_dk + alpha) / (N_d + K alpha)
std::vector<double> doc_theta(const TopicModel& model, int doc);

// How the per-topic corpus weight in the similarity and entropy metrics is
// read: the share of corpus tokens assigned to each topic, or the normalized
// symmetric Dirichlet prior (uniform).
enum class AlphaMode { CorpusMarginal, DirichletPrior };

std::vector<double> corpus_alpha(const TopicModel& model, AlphaMode mode = AlphaMode::CorpusMarginal);

struct TopicWeight {
  int topic = 0;
  double weight = 0;
  bool operator==(const TopicWeight&) const = default;
};

// The n largest entries, descending, ties by ascending topic index.
std::vector<TopicWeight> top_topics(std::span<const double> theta, int n = 5);

// Corpus-weighted cosine between question and answer over the question's top
// topics. Zero when either weighted vector is all zero. Throws
// InvariantError if `top` is empty or indexes outside the vectors.
double topic_similarity(std::span<const double> question_theta, std::span<const double> answer_theta,
                        std::span<const double> alpha, std::span<const TopicWeight> top);

// -sum p ln p over p_i = alpha_i * theta_i on the question's top topics;
// zero products contribute nothing.
double topic_entropy(std::span<const double> question_theta, std::span<const double> alpha,
                     std::span<const TopicWeight> top);

// Text format: header lines (K, V, D, hypers, seed, iterations), the
// vocabulary, document ids with lengths, then sparse "row col count"
// triples for the doc-topic and topic-word matrices.
void save_model(std::ostream& out, const TopicModel& model);
TopicModel load_model(std::istream& in);  // throws DataError

}  // namespace unresolved
