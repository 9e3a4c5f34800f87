#include "unresolved/content.hpp"

#include <algorithm>
#include <array>
#include <cstdint>

namespace unresolved {

namespace {

bool is_ascii_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_wordish(unsigned char c) { return is_ascii_alpha(c) || is_digit(c) || c >= 0x80; }
char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += static_cast<char>(c);
    }
  }
  return out;
}

bool is_block_tag(std::string_view name) {
  static constexpr std::array<std::string_view, 20> kBlock = {
      "p", "div", "br", "li", "ul", "ol", "h1", "h2", "h3", "h4",
      "h5", "h6", "blockquote", "tr", "td", "th", "table", "hr", "dd", "dt"};
  return std::find(kBlock.begin(), kBlock.end(), name) != kBlock.end();
}

struct Tag {
  std::string name;
  bool closing = false;
};

// `text` starts just after '<' and ends just before '>'.
Tag parse_tag(std::string_view text) {
  Tag tag;
  std::size_t i = 0;
  while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
  if (i < text.size() && text[i] == '/') {
    tag.closing = true;
    ++i;
  }
  while (i < text.size() && (is_ascii_alpha(static_cast<unsigned char>(text[i])) ||
                             is_digit(static_cast<unsigned char>(text[i])))) {
    tag.name += lower(text[i]);
    ++i;
  }
  return tag;
}

constexpr std::array<std::string_view, 127> kStopwords = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your",
    "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
    "herself", "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what",
    "which", "who", "whom", "this", "that", "these", "those", "am", "is", "are",
    "was", "were", "be", "been", "being", "have", "has", "had", "having", "do",
    "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
    "because", "as", "until", "while", "of", "at", "by", "for", "with", "about",
    "against", "between", "into", "through", "during", "before", "after", "above", "below", "to",
    "from", "up", "down", "in", "out", "on", "off", "over", "under", "again",
    "further", "then", "once", "here", "there", "when", "where", "why", "how", "all",
    "any", "both", "each", "few", "more", "most", "other", "some", "such", "no",
    "nor", "not", "only", "own", "same", "so", "than", "too", "very", "s",
    "t", "can", "will", "just", "don", "should", "now"};

}  // namespace

std::string decode_html_entities(std::string_view text) {
  struct Named {
    std::string_view name;
    std::uint32_t cp;
  };
  static constexpr std::array<Named, 14> kNamed = {{{"lt", '<'},
                                                   {"gt", '>'},
                                                   {"amp", '&'},
                                                   {"quot", '"'},
                                                   {"apos", '\''},
                                                   {"nbsp", ' '},
                                                   {"ndash", 0x2013},
                                                   {"mdash", 0x2014},
                                                   {"lsquo", 0x2018},
                                                   {"rsquo", 0x2019},
                                                   {"ldquo", 0x201C},
                                                   {"rdquo", 0x201D},
                                                   {"hellip", 0x2026},
                                                   {"copy", 0xA9}}};
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out += text[i++];
      continue;
    }
    const auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += text[i++];
      continue;
    }
    const std::string_view ref = text.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (ref.size() >= 2 && ref[0] == '#') {
      std::uint32_t cp = 0;
      const bool hex = ref[1] == 'x' || ref[1] == 'X';
      std::size_t j = hex ? 2 : 1;
      bool ok = j < ref.size();
      for (; j < ref.size() && ok; ++j) {
        const char c = lower(ref[j]);
        int digit;
        if (is_digit(c)) digit = c - '0';
        else if (hex && c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(digit);
        if (cp > 0x10FFFF) ok = false;
      }
      if (ok && cp != 0) {
        append_utf8(out, cp);
        decoded = true;
      }
    } else {
      for (const auto& named : kNamed) {
        if (named.name == ref) {
          append_utf8(out, named.cp);
          decoded = true;
          break;
        }
      }
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out += text[i++];
    }
  }
  return out;
}

std::string encode_html_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

ContentSegments segment_html(std::string_view body) {
  ContentSegments seg;
  std::string prose_raw;
  std::string code_raw;
  int pre_depth = 0;
  bool in_inline_code = false;

  auto flush_inline_code = [&] {
    std::string code = decode_html_entities(code_raw);
    if (code.find('\n') != std::string::npos) {
      seg.code_blocks.push_back(std::move(code));
    } else {
      // single-line spans read as words; keep them as raw text so the
      // final decode pass handles them with the surrounding prose
      prose_raw += code_raw;
    }
    code_raw.clear();
    in_inline_code = false;
  };

  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '<') {
      if (body.substr(i, 4) == "<!--") {
        const auto end = body.find("-->", i + 4);
        i = end == std::string_view::npos ? body.size() : end + 3;
        continue;
      }
      const auto close = body.find('>', i + 1);
      if (close == std::string_view::npos) {
        // unterminated tag: treat the rest as text
        (pre_depth > 0 || in_inline_code ? code_raw : prose_raw) += body.substr(i);
        break;
      }
      const Tag tag = parse_tag(body.substr(i + 1, close - i - 1));
      i = close + 1;
      if (tag.name.empty()) continue;

      if (tag.name == "pre") {
        if (!tag.closing) {
          if (in_inline_code) flush_inline_code();
          ++pre_depth;
        } else if (pre_depth > 0 && --pre_depth == 0) {
          seg.code_blocks.push_back(decode_html_entities(code_raw));
          code_raw.clear();
          prose_raw += '\n';
        }
        continue;
      }
      if (pre_depth > 0) continue;  // any other markup inside <pre> is dropped
      if (tag.name == "code") {
        if (!tag.closing && !in_inline_code) {
          in_inline_code = true;
        } else if (tag.closing && in_inline_code) {
          flush_inline_code();
        }
        continue;
      }
      if (in_inline_code) continue;
      if (is_block_tag(tag.name)) prose_raw += '\n';
      continue;
    }
    const auto next = body.find('<', i);
    const auto chunk = body.substr(i, next == std::string_view::npos ? body.npos : next - i);
    (pre_depth > 0 || in_inline_code ? code_raw : prose_raw) += chunk;
    i = next == std::string_view::npos ? body.size() : next;
  }
  if (pre_depth > 0) {
    seg.code_blocks.push_back(decode_html_entities(code_raw));
  } else if (in_inline_code) {
    flush_inline_code();
  }
  seg.prose = collapse_whitespace(decode_html_entities(prose_raw));
  return seg;
}

std::vector<std::string> split_sentences(std::string_view prose) {
  static constexpr std::array<std::string_view, 4> kAbbrev = {"e.g.", "i.e.", "etc.", "vs."};
  std::vector<std::string> out;
  auto emit = [&](std::string_view piece) {
    std::string s = collapse_whitespace(piece);
    if (!s.empty()) out.push_back(std::move(s));
  };

  std::size_t start = 0;
  for (std::size_t i = 0; i < prose.size(); ++i) {
    const char c = prose[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 < prose.size() && !is_space(static_cast<unsigned char>(prose[i + 1]))) continue;
    if (c == '.') {
      std::size_t w = i;
      while (w > start && !is_space(static_cast<unsigned char>(prose[w - 1]))) --w;
      while (w < i && !is_ascii_alpha(static_cast<unsigned char>(prose[w]))) ++w;
      const std::string word = to_lower(prose.substr(w, i - w + 1));
      if (std::find(kAbbrev.begin(), kAbbrev.end(), word) != kAbbrev.end()) continue;
    }
    emit(prose.substr(start, i + 1 - start));
    start = i + 1;
  }
  if (start < prose.size()) emit(prose.substr(start));
  return out;
}

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (!is_wordish(c) && c != '\'') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && (is_wordish(static_cast<unsigned char>(text[j])) || text[j] == '\'')) ++j;
    std::string_view run = text.substr(i, j - i);
    while (!run.empty() && run.front() == '\'') run.remove_prefix(1);
    while (!run.empty() && run.back() == '\'') run.remove_suffix(1);
    if (!run.empty()) words.emplace_back(run);
    i = j;
  }
  return words;
}

// Count maximal groups of a,e,i,o,u,y. A terminal "e" after a consonant
// other than "l" is treated as silent and removes one group, unless that
// would leave none. Tokens without letters count as one syllable.
int count_syllables(std::string_view word) {
  auto is_vowel = [](char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
  };
  const std::string w = to_lower(word);
  int groups = 0;
  bool in_group = false;
  bool has_letter = false;
  for (char c : w) {
    has_letter = has_letter || is_ascii_alpha(static_cast<unsigned char>(c));
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  if (!has_letter) return 1;
  if (w.size() >= 2 && w.back() == 'e') {
    const char prev = w[w.size() - 2];
    if (is_ascii_alpha(static_cast<unsigned char>(prev)) && !is_vowel(prev) && prev != 'l' && groups > 1) {
      --groups;
    }
  }
  return std::max(groups, 1);
}

TextStats text_stats(std::string_view prose) {
  TextStats stats;
  stats.sentences = static_cast<long>(split_sentences(prose).size());
  for (const auto& word : tokenize_words(prose)) {
    ++stats.words;
    const int syl = count_syllables(word);
    stats.syllables += syl;
    if (syl >= 3) ++stats.complex_words;
    for (unsigned char c : word) {
      if (is_ascii_alpha(c) || c >= 0xC0) ++stats.letters;  // UTF-8 lead bytes count once
      else if (is_digit(c)) ++stats.chars;
    }
  }
  stats.chars += stats.letters;
  return stats;
}

std::vector<std::string> normalize_for_topics(std::string_view prose) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < prose.size()) {
    if (!is_wordish(static_cast<unsigned char>(prose[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    bool all_digits = true;
    while (j < prose.size() && is_wordish(static_cast<unsigned char>(prose[j]))) {
      all_digits = all_digits && is_digit(static_cast<unsigned char>(prose[j]));
      ++j;
    }
    std::string token = to_lower(prose.substr(i, j - i));
    i = j;
    if (token.size() < 2 || all_digits || is_stopword(token)) continue;
    tokens.push_back(std::move(token));
  }
  return tokens;
}

std::span<const std::string_view> stopwords() { return kStopwords; }

bool is_stopword(std::string_view lowercase_word) {
  return std::find(kStopwords.begin(), kStopwords.end(), lowercase_word) != kStopwords.end();
}

}  // namespace unresolved
