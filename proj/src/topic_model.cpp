#include "unresolved/topic_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "unresolved/content.hpp"
#include "unresolved/io.hpp"

namespace unresolved {

void Corpus::add_document(std::string id, std::span<const std::string> tokens) {
  std::vector<int> doc;
  doc.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto [it, inserted] = index_.try_emplace(t, static_cast<int>(vocabulary_.size()));
    if (inserted) vocabulary_.push_back(t);
    doc.push_back(it->second);
  }
  documents_.push_back(std::move(doc));
  doc_ids_.push_back(std::move(id));
}

std::optional<int> Corpus::lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& d : documents_) n += d.size();
  return n;
}

Corpus build_corpus(const Dataset& dataset) {
  if (dataset.threads.empty()) throw DataError("cannot build a topic corpus from an empty dataset");
  Corpus corpus;
  for (const auto& t : dataset.threads) {
    corpus.add_document("q" + std::to_string(t.question.id),
                        normalize_for_topics(segment_html(t.question.body).prose));
    if (const PostRow* a = t.topic_answer()) {
      corpus.add_document("a" + std::to_string(a->id), normalize_for_topics(segment_html(a->body).prose));
    }
  }
  if (corpus.vocabulary().empty()) throw DataError("topic corpus has an empty vocabulary");
  return corpus;
}

void LdaParams::validate() const {
  if (topics < 1) throw ConfigError("topic count must be >= 1");
  if (iterations < 1) throw ConfigError("LDA iterations must be >= 1");
  if (!(doc_prior() > 0)) throw ConfigError("LDA alpha must be positive");
  if (!(beta > 0)) throw ConfigError("LDA beta must be positive");
}

std::optional<int> TopicModel::find_document(std::string_view id) const {
  for (std::size_t d = 0; d < doc_ids.size(); ++d) {
    if (doc_ids[d] == id) return static_cast<int>(d);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- sampler

GibbsSampler::GibbsSampler(const Corpus& corpus, const LdaParams& params)
    : corpus_(corpus), rng_(params.seed) {
  params.validate();
  const std::size_t tokens = corpus.token_count();
  if (corpus.documents().empty() || tokens == 0) throw DataError("cannot train LDA on an empty corpus");
  if (static_cast<std::size_t>(params.topics) > tokens) {
    throw DataError("topic count " + std::to_string(params.topics) + " exceeds the corpus token count " +
                    std::to_string(tokens));
  }
  const int K = params.topics;
  auto& m = model_;
  m.topics = K;
  m.vocabulary_size = static_cast<int>(corpus.vocabulary().size());
  m.document_count = static_cast<int>(corpus.documents().size());
  m.hyper_alpha = params.doc_prior();
  m.hyper_beta = params.beta;
  m.seed = params.seed;
  m.iterations = 0;
  m.vocabulary = corpus.vocabulary();
  m.doc_ids = corpus.doc_ids();
  m.doc_lengths.resize(m.document_count);
  m.doc_topic.assign(static_cast<std::size_t>(m.document_count) * K, 0);
  m.word_topic.assign(static_cast<std::size_t>(m.vocabulary_size) * K, 0);
  m.topic_totals.assign(K, 0);
  weights_.resize(K);

  assignments_.resize(corpus.documents().size());
  for (std::size_t d = 0; d < corpus.documents().size(); ++d) {
    const auto& doc = corpus.documents()[d];
    m.doc_lengths[d] = static_cast<int>(doc.size());
    auto& z = assignments_[d];
    z.resize(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const int k = static_cast<int>(rng_.below(static_cast<std::uint64_t>(K)));
      z[i] = k;
      ++m.doc_topic[d * K + k];
      ++m.word_topic[static_cast<std::size_t>(doc[i]) * K + k];
      ++m.topic_totals[k];
    }
  }
}

void GibbsSampler::sweep() {
  auto& m = model_;
  const int K = m.topics;
  const double alpha = m.hyper_alpha;
  const double beta = m.hyper_beta;
  const double v_beta = m.vocabulary_size * beta;
  const auto& docs = corpus_.documents();

  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& doc = docs[d];
    auto& z = assignments_[d];
    int* dt = &m.doc_topic[d * K];
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const int w = doc[i];
      int* wt = &m.word_topic[static_cast<std::size_t>(w) * K];
      const int old = z[i];
      --dt[old];
      --wt[old];
      --m.topic_totals[old];

      double total = 0;
      for (int k = 0; k < K; ++k) {
        total += (dt[k] + alpha) * (wt[k] + beta) / (static_cast<double>(m.topic_totals[k]) + v_beta);
        weights_[k] = total;
      }
      const double u = rng_.uniform01() * total;
      int k_new = static_cast<int>(std::upper_bound(weights_.begin(), weights_.end(), u) - weights_.begin());
      if (k_new >= K) k_new = K - 1;

      z[i] = k_new;
      ++dt[k_new];
      ++wt[k_new];
      ++m.topic_totals[k_new];
    }
  }
  ++sweeps_;
  m.iterations = sweeps_;
}

void GibbsSampler::check_invariants() const {
  const auto& m = model_;
  const int K = m.topics;
  std::vector<int> doc_topic(m.doc_topic.size(), 0);
  std::vector<int> word_topic(m.word_topic.size(), 0);
  std::vector<long> totals(K, 0);
  const auto& docs = corpus_.documents();
  for (std::size_t d = 0; d < docs.size(); ++d) {
    long row = 0;
    for (int k = 0; k < K; ++k) {
      if (m.doc_topic[d * K + k] < 0) throw InvariantError("negative doc-topic count");
      row += m.doc_topic[d * K + k];
    }
    if (row != m.doc_lengths[d] || row != static_cast<long>(docs[d].size())) {
      throw InvariantError("doc " + std::to_string(d) + ": topic counts do not sum to its length");
    }
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      const int k = assignments_[d][i];
      ++doc_topic[d * K + k];
      ++word_topic[static_cast<std::size_t>(docs[d][i]) * K + k];
      ++totals[k];
    }
  }
  if (doc_topic != m.doc_topic) throw InvariantError("doc-topic counts disagree with assignments");
  if (word_topic != m.word_topic) throw InvariantError("topic-word counts disagree with assignments");
  if (totals != m.topic_totals) throw InvariantError("topic totals disagree with assignments");
  for (int k = 0; k < K; ++k) {
    long col = 0;
    for (int w = 0; w < m.vocabulary_size; ++w) col += m.topic_word_count(k, w);
    if (col != m.topic_totals[k]) throw InvariantError("topic " + std::to_string(k) + ": word counts do not sum to n_k");
  }
}

TopicModel train_lda(const Corpus& corpus, const LdaParams& params) {
  GibbsSampler sampler(corpus, params);
  for (int it = 0; it < params.iterations; ++it) sampler.sweep();
  return sampler.model();
}

// ---------------------------------------------------------------- estimates

std::vector<double> doc_theta(const TopicModel& model, int doc) {
  if (doc < 0 || doc >= model.document_count) throw InvariantError("document index out of range");
  const int K = model.topics;
  const double denom = model.doc_lengths[doc] + K * model.hyper_alpha;
  std::vector<double> theta(K);
  for (int k = 0; k < K; ++k) theta[k] = (model.doc_topic_count(doc, k) + model.hyper_alpha) / denom;
  return theta;
}

std::vector<double> corpus_alpha(const TopicModel& model, AlphaMode mode) {
  const int K = model.topics;
  std::vector<double> alpha(K, 1.0 / K);
  if (mode == AlphaMode::DirichletPrior) return alpha;
  const long total = std::accumulate(model.topic_totals.begin(), model.topic_totals.end(), 0L);
  if (total == 0) return alpha;
  for (int k = 0; k < K; ++k) alpha[k] = static_cast<double>(model.topic_totals[k]) / static_cast<double>(total);
  return alpha;
}

std::vector<TopicWeight> top_topics(std::span<const double> theta, int n) {
  std::vector<TopicWeight> all;
  all.reserve(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) all.push_back({static_cast<int>(k), theta[k]});
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(std::max(n, 0)), all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    [](const TopicWeight& a, const TopicWeight& b) {
                      return a.weight > b.weight || (a.weight == b.weight && a.topic < b.topic);
                    });
  all.resize(keep);
  return all;
}

namespace {

void check_top(std::span<const TopicWeight> top, std::size_t size) {
  if (top.empty()) throw InvariantError("top-topic set is empty");
  for (const auto& t : top) {
    if (t.topic < 0 || static_cast<std::size_t>(t.topic) >= size) throw InvariantError("top topic index out of range");
  }
}

}  // namespace

double topic_similarity(std::span<const double> question_theta, std::span<const double> answer_theta,
                        std::span<const double> alpha, std::span<const TopicWeight> top) {
  const std::size_t K = alpha.size();
  if (question_theta.size() != K || answer_theta.size() != K) throw InvariantError("topic vector sizes differ");
  check_top(top, K);
  double dot = 0, qq = 0, aa = 0;
  for (const auto& t : top) {
    const double q = alpha[t.topic] * question_theta[t.topic];
    const double a = alpha[t.topic] * answer_theta[t.topic];
    dot += q * a;
    qq += q * q;
    aa += a * a;
  }
  if (qq == 0.0 || aa == 0.0) return 0.0;
  // clamp rounding overshoot so identical vectors give exactly 1
  return std::min(1.0, dot / (std::sqrt(qq) * std::sqrt(aa)));
}

double topic_entropy(std::span<const double> question_theta, std::span<const double> alpha,
                     std::span<const TopicWeight> top) {
  const std::size_t K = alpha.size();
  if (question_theta.size() != K) throw InvariantError("topic vector sizes differ");
  check_top(top, K);
  double h = 0;
  for (const auto& t : top) {
    const double p = alpha[t.topic] * question_theta[t.topic];
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

// ---------------------------------------------------------------- persistence

namespace {
constexpr const char* kModelFormat = "unresolved-lda/1";
}

void save_model(std::ostream& out, const TopicModel& m) {
  const int K = m.topics;
  out << kModelFormat << '\n'
      << "topics " << K << '\n'
      << "vocabulary " << m.vocabulary_size << '\n'
      << "documents " << m.document_count << '\n'
      << "hyper_alpha " << format_double(m.hyper_alpha) << '\n'
      << "hyper_beta " << format_double(m.hyper_beta) << '\n'
      << "seed " << m.seed << '\n'
      << "iterations " << m.iterations << '\n'
      << "vocab\n";
  for (const auto& w : m.vocabulary) out << w << '\n';
  out << "docs\n";
  for (int d = 0; d < m.document_count; ++d) out << m.doc_ids[d] << ' ' << m.doc_lengths[d] << '\n';

  auto nnz = [](const std::vector<int>& v) { return std::count_if(v.begin(), v.end(), [](int c) { return c != 0; }); };
  out << "doc_topic " << nnz(m.doc_topic) << '\n';
  for (int d = 0; d < m.document_count; ++d) {
    for (int k = 0; k < K; ++k) {
      if (const int c = m.doc_topic_count(d, k)) out << d << ' ' << k << ' ' << c << '\n';
    }
  }
  out << "topic_word " << nnz(m.word_topic) << '\n';
  for (int k = 0; k < K; ++k) {
    for (int w = 0; w < m.vocabulary_size; ++w) {
      if (const int c = m.topic_word_count(k, w)) out << k << ' ' << w << ' ' << c << '\n';
    }
  }
  out << "end\n";
}

TopicModel load_model(std::istream& in) {
  auto fail = [](const std::string& what) -> DataError { return DataError("topic model file: " + what); };
  std::string line;
  auto next_line = [&]() -> std::string {
    if (!std::getline(in, line)) throw fail("unexpected end of file");
    return line;
  };
  auto keyed = [&](const std::string& key) -> std::string {
    const std::string l = next_line();
    if (l.rfind(key + " ", 0) != 0) throw fail("expected '" + key + "'");
    return l.substr(key.size() + 1);
  };

  if (next_line() != kModelFormat) throw fail("unsupported format");
  TopicModel m;
  m.topics = static_cast<int>(parse_int(keyed("topics")));
  m.vocabulary_size = static_cast<int>(parse_int(keyed("vocabulary")));
  m.document_count = static_cast<int>(parse_int(keyed("documents")));
  m.hyper_alpha = parse_double(keyed("hyper_alpha"));
  m.hyper_beta = parse_double(keyed("hyper_beta"));
  m.seed = static_cast<std::uint64_t>(std::stoull(keyed("seed")));
  m.iterations = static_cast<int>(parse_int(keyed("iterations")));
  const int K = m.topics;
  if (K < 1 || m.vocabulary_size < 0 || m.document_count < 0) throw fail("bad dimensions");

  if (next_line() != "vocab") throw fail("expected 'vocab'");
  for (int w = 0; w < m.vocabulary_size; ++w) m.vocabulary.push_back(next_line());
  if (next_line() != "docs") throw fail("expected 'docs'");
  for (int d = 0; d < m.document_count; ++d) {
    std::istringstream ss(next_line());
    std::string id;
    int len = -1;
    if (!(ss >> id >> len) || len < 0) throw fail("bad document line");
    m.doc_ids.push_back(id);
    m.doc_lengths.push_back(len);
  }
  m.doc_topic.assign(static_cast<std::size_t>(m.document_count) * K, 0);
  m.word_topic.assign(static_cast<std::size_t>(m.vocabulary_size) * K, 0);
  m.topic_totals.assign(K, 0);

  auto read_triples = [&](const std::string& key, int rows, int cols, auto&& store) {
    const auto n = parse_int(keyed(key));
    for (std::int64_t i = 0; i < n; ++i) {
      std::istringstream ss(next_line());
      long r = -1, c = -1, v = -1;
      if (!(ss >> r >> c >> v) || r < 0 || r >= rows || c < 0 || c >= cols || v <= 0) throw fail("bad " + key + " entry");
      store(static_cast<int>(r), static_cast<int>(c), static_cast<int>(v));
    }
  };
  read_triples("doc_topic", m.document_count, K,
               [&](int d, int k, int v) { m.doc_topic[static_cast<std::size_t>(d) * K + k] = v; });
  read_triples("topic_word", K, m.vocabulary_size, [&](int k, int w, int v) {
    m.word_topic[static_cast<std::size_t>(w) * K + k] = v;
    m.topic_totals[k] += v;
  });
  if (next_line() != "end") throw fail("expected 'end'");

  long doc_total = 0;
  for (int d = 0; d < m.document_count; ++d) {
    long row = 0;
    for (int k = 0; k < K; ++k) row += m.doc_topic_count(d, k);
    if (row != m.doc_lengths[d]) throw fail("document " + m.doc_ids[d] + " counts do not sum to its length");
    doc_total += row;
  }
  if (doc_total != std::accumulate(m.topic_totals.begin(), m.topic_totals.end(), 0L)) {
    throw fail("doc-topic and topic-word totals differ");
  }
  return m;
}

}  // namespace unresolved
