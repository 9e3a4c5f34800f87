#include "unresolved/readability.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "unresolved/common.hpp"
#include "unresolved/io.hpp"

namespace unresolved {

Grade flesch_kincaid(const TextStats& s) {
  if (s.words <= 0 || s.sentences <= 0) return std::nullopt;
  const double w = static_cast<double>(s.words);
  return 0.39 * (w / static_cast<double>(s.sentences)) + 11.8 * (static_cast<double>(s.syllables) / w) - 15.59;
}

Grade gunning_fog(const TextStats& s) {
  if (s.words <= 0 || s.sentences <= 0) return std::nullopt;
  const double w = static_cast<double>(s.words);
  return 0.4 * (w / static_cast<double>(s.sentences) + 100.0 * static_cast<double>(s.complex_words) / w);
}

Grade coleman_liau(const TextStats& s) {
  if (s.words <= 0) return std::nullopt;
  const double w = static_cast<double>(s.words);
  const double letters_per_100 = 100.0 * static_cast<double>(s.letters) / w;
  const double sentences_per_100 = 100.0 * static_cast<double>(s.sentences) / w;
  return 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8;
}

Grade smog(const TextStats& s) {
  if (s.sentences <= 0) return std::nullopt;
  return 1.0430 * std::sqrt(static_cast<double>(s.complex_words) * 30.0 / static_cast<double>(s.sentences)) + 3.1291;
}

Grade ari(const TextStats& s) {
  if (s.words <= 0 || s.sentences <= 0) return std::nullopt;
  const double w = static_cast<double>(s.words);
  return 4.71 * (static_cast<double>(s.chars) / w) + 0.5 * (w / static_cast<double>(s.sentences)) - 21.43;
}

Grade average_grade(std::span<const Grade> grades) {
  double sum = 0;
  int n = 0;
  for (const auto& g : grades) {
    if (g) {
      sum += *g;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

ReadabilityGrades text_readability(const TextStats& stats) {
  ReadabilityGrades r;
  r.per_formula = {flesch_kincaid(stats), gunning_fog(stats), coleman_liau(stats), smog(stats), ari(stats)};
  r.average = average_grade(r.per_formula);
  return r;
}

// ---------------------------------------------------------------- code

namespace {

// Union of C, C++, Java, C#, JavaScript, Python, PHP and Ruby reserved words.
constexpr std::array<std::string_view, 96> kKeywords = {
    "abstract", "and", "as", "assert", "async", "auto", "await", "bool", "boolean", "break",
    "byte", "case", "catch", "char", "class", "const", "continue", "def", "default", "del",
    "delete", "do", "double", "elif", "else", "elsif", "end", "enum", "except", "explicit",
    "export", "extends", "extern", "false", "final", "finally", "float", "fn", "for", "foreach",
    "from", "func", "function", "global", "goto", "if", "implements", "import", "in", "inline",
    "instanceof", "int", "interface", "is", "lambda", "let", "long", "module", "namespace", "new",
    "nil", "none", "not", "null", "nullptr", "or", "package", "pass", "private", "protected",
    "public", "raise", "register", "return", "self", "short", "signed", "sizeof", "static", "struct",
    "super", "switch", "template", "this", "throw", "throws", "true", "try", "typedef", "typename",
    "unless", "unsigned", "using", "var", "void", "while"};

constexpr std::array<std::string_view, 6> kBranching = {"if", "for", "while", "switch", "case", "catch"};

bool is_keyword(std::string_view w) {
  return std::find(kKeywords.begin(), kKeywords.end(), w) != kKeywords.end();
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_comment_line(std::string_view line) {
  if (line.find("//") != line.npos || line.find("/*") != line.npos) return true;
  const auto first = line.find_first_not_of(" \t");
  if (first == line.npos) return false;
  const char c = line[first];
  return c == '#' || c == '*' || line.substr(first, 2) == "--";
}

}  // namespace

const std::array<std::string_view, kCodeFeatureCount>& CodeFeatureVector::names() {
  static constexpr std::array<std::string_view, kCodeFeatureCount> kNames = {
      "avg_line_length",   "max_line_length",     "avg_identifier_length", "identifiers_per_line",
      "keywords_per_line", "numbers_per_line",    "comments_per_line",     "blank_line_fraction",
      "avg_indentation",   "branching_tokens_per_line"};
  return kNames;
}

std::array<double, kCodeFeatureCount> CodeFeatureVector::values() const {
  return {avg_line_length,   max_line_length,  avg_identifier_length, identifiers_per_line,
          keywords_per_line, numbers_per_line, comments_per_line,     blank_line_fraction,
          avg_indentation,   branching_tokens_per_line};
}

CodeFeatureVector code_features(std::span<const std::string> code_blocks) {
  CodeFeatureVector f;
  std::string text;
  for (std::size_t i = 0; i < code_blocks.size(); ++i) {
    if (i > 0 && !text.empty() && text.back() != '\n') text += '\n';
    text += code_blocks[i];
  }
  if (text.empty()) return f;

  std::vector<std::string_view> lines;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    lines.push_back(rest.substr(0, nl));
    if (nl == rest.npos) break;
    rest.remove_prefix(nl + 1);
  }
  if (lines.empty()) return f;

  double total_len = 0, max_len = 0, ident_len = 0, idents = 0, keywords = 0, numbers = 0;
  double comments = 0, blanks = 0, indent = 0, branching = 0;
  for (auto line : lines) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    total_len += static_cast<double>(line.size());
    max_len = std::max(max_len, static_cast<double>(line.size()));
    if (line.find_first_not_of(" \t") == line.npos) {
      ++blanks;
      continue;
    }
    if (is_comment_line(line)) ++comments;
    int width = 0;
    for (char c : line) {
      if (c == ' ') width += 1;
      else if (c == '\t') width += 4;
      else break;
    }
    indent += width;

    std::size_t i = 0;
    while (i < line.size()) {
      if (is_ident_start(line[i])) {
        std::size_t j = i;
        while (j < line.size() && is_ident_char(line[j])) ++j;
        const auto word = line.substr(i, j - i);
        if (is_keyword(word)) {
          ++keywords;
          if (std::find(kBranching.begin(), kBranching.end(), word) != kBranching.end()) ++branching;
        } else {
          ++idents;
          ident_len += static_cast<double>(word.size());
        }
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(line[i]))) {
        std::size_t j = i;
        while (j < line.size() && (is_ident_char(line[j]) || line[j] == '.')) ++j;
        ++numbers;
        i = j;
      } else {
        ++i;
      }
    }
  }
  const double n = static_cast<double>(lines.size());
  const double non_blank = n - blanks;
  f.empty = false;
  f.avg_line_length = total_len / n;
  f.max_line_length = max_len;
  f.avg_identifier_length = idents > 0 ? ident_len / idents : 0.0;
  f.identifiers_per_line = idents / n;
  f.keywords_per_line = keywords / n;
  f.numbers_per_line = numbers / n;
  f.comments_per_line = comments / n;
  f.blank_line_fraction = blanks / n;
  f.avg_indentation = non_blank > 0 ? indent / non_blank : 0.0;
  f.branching_tokens_per_line = branching / n;
  return f;
}

CodeScorer CodeScorer::defaults() {
  // Means and scales are rough magnitudes for short Q&A snippets. Signs follow
  // the usual findings: long lines and dense tokens read worse; blank lines,
  // comments and consistent indentation read better.
  CodeScorer s;
  s.bias = 0.0;
  s.mean = {35.0, 80.0, 6.0, 3.0, 0.8, 0.5, 0.1, 0.1, 4.0, 0.2};
  s.scale = {15.0, 40.0, 3.0, 2.0, 0.6, 0.5, 0.15, 0.1, 3.0, 0.2};
  s.weight = {-0.8, -0.6, -0.1, -0.5, -0.1, -0.3, 0.3, 0.4, 0.3, -0.3};
  return s;
}

CodeScorer CodeScorer::parse(std::string_view text) {
  const auto& names = CodeFeatureVector::names();
  std::map<std::string, double> values;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != line.npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == line.npos) continue;
    const auto eq = line.find('=');
    if (eq == line.npos) throw ConfigError("scorer config line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == s.npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    double v;
    try {
      v = parse_double(value);
    } catch (const DataError&) {
      throw ConfigError("scorer config line " + std::to_string(lineno) + ": bad number '" + value + "'");
    }
    if (!values.emplace(key, v).second) throw ConfigError("scorer config: duplicate key '" + key + "'");
  }

  CodeScorer s;
  auto take = [&](const std::string& key) {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("scorer config: missing key '" + key + "'");
    const double v = it->second;
    values.erase(it);
    return v;
  };
  s.bias = take("bias");
  for (auto name : names) {
    s.mean.push_back(take(std::string(name) + ".mean"));
    s.scale.push_back(take(std::string(name) + ".scale"));
    s.weight.push_back(take(std::string(name) + ".weight"));
  }
  if (!values.empty()) throw ConfigError("scorer config: unknown key '" + values.begin()->first + "'");
  for (double sc : s.scale) {
    if (!(sc > 0)) throw ConfigError("scorer config: scales must be positive");
  }
  return s;
}

std::string CodeScorer::serialize() const {
  std::string out = "# code readability scorer: sigmoid(bias + sum weight*(x-mean)/scale)\n";
  out += "bias=" + format_double(bias) + "\n";
  const auto& names = CodeFeatureVector::names();
  for (std::size_t i = 0; i < names.size() && i < weight.size(); ++i) {
    const std::string n(names[i]);
    out += n + ".mean=" + format_double(mean[i]) + "\n";
    out += n + ".scale=" + format_double(scale[i]) + "\n";
    out += n + ".weight=" + format_double(weight[i]) + "\n";
  }
  return out;
}

double code_readability(const CodeFeatureVector& features, const CodeScorer& scorer) {
  const auto x = features.values();
  if (scorer.weight.size() != x.size() || scorer.mean.size() != x.size() || scorer.scale.size() != x.size()) {
    throw ConfigError("code scorer has " + std::to_string(scorer.weight.size()) + " weights for " +
                      std::to_string(x.size()) + " features");
  }
  double logit = scorer.bias;
  for (std::size_t i = 0; i < x.size(); ++i) {
    logit += scorer.weight[i] * (x[i] - scorer.mean[i]) / scorer.scale[i];
  }
  if (std::isnan(logit)) throw ConfigError("code scorer produced NaN");
  logit = std::clamp(logit, -35.0, 35.0);
  return 1.0 / (1.0 + std::exp(-logit));
}

}  // namespace unresolved
