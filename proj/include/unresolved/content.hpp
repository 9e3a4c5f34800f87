#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace unresolved {

struct ContentSegments {
  std::vector<std::string> code_blocks;
  std::string prose;  // tags stripped, entities decoded, whitespace collapsed
};

// Forgiving tag scanner; never fails. Code goes to code_blocks when it sits
// in a <pre> element or in a <code> span that spans more than one line;
// single-line <code> spans stay in the prose as ordinary words.
ContentSegments segment_html(std::string_view body);

// Named (&lt; &gt; &amp; &quot; &apos; &nbsp; ...) and numeric references.
// Unknown references are left as written.
std::string decode_html_entities(std::string_view text);
std::string encode_html_text(std::string_view text);

// Splits on . ! ? followed by whitespace or end of text. A period that ends
// one of "e.g." "i.e." "etc." "vs." does not terminate a sentence.
std::vector<std::string> split_sentences(std::string_view prose);

// Maximal runs of letters, digits and apostrophes, with leading and trailing
// apostrophes trimmed. Bytes >= 0x80 count as letters.
std::vector<std::string> tokenize_words(std::string_view text);

// Vowel-group heuristic, see content.cpp. Always >= 1.
int count_syllables(std::string_view word);

struct TextStats {
  long sentences = 0;
  long words = 0;
  long syllables = 0;
  long complex_words = 0;  // >= 3 syllables
  long letters = 0;
  long chars = 0;  // letters + digits
  bool operator==(const TextStats&) const = default;
};

TextStats text_stats(std::string_view prose);

// Lowercase, split on anything that is not a letter or digit, drop tokens
// shorter than two characters, stopwords and pure numbers.
std::vector<std::string> normalize_for_topics(std::string_view prose);

// The shipped English stopword list (127 entries, also in resources/stopwords.txt).
std::span<const std::string_view> stopwords();
bool is_stopword(std::string_view lowercase_word);

}  // namespace unresolved
