#include "propgraph/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace propgraph {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

constexpr std::string_view kStopwords[] = {
    "a",     "about", "after", "all",   "also",  "an",     "and",   "any",   "are",   "as",
    "at",    "be",    "been",  "before", "being", "both",  "but",   "by",    "can",   "could",
    "did",   "do",    "does",  "during", "each",  "for",   "from",  "had",   "has",   "have",
    "he",    "her",   "his",   "how",   "however", "if",   "in",    "into",  "is",    "it",
    "its",   "many",  "may",   "more",  "most",  "much",   "not",   "of",    "on",    "one",
    "only",  "or",    "other", "our",   "over",  "she",    "should", "so",   "some",  "such",
    "than",  "that",  "the",   "their", "them",  "then",   "there", "these", "they",  "this",
    "those", "through", "to",  "under", "until", "upon",   "very",  "was",   "we",    "were",
    "what",  "when",  "where", "which", "while", "who",    "whom",  "whose", "why",   "will",
    "with",  "within", "would", "yes",  "you",   "your",
};

}  // namespace

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

std::size_t estimate_tokens(std::string_view text) {
  // integer arithmetic keeps the estimate exact: ceil(words * 13 / 10)
  const std::size_t w = word_count(text);
  return (w * 13 + 9) / 10;
}

TokenCounter default_token_counter() { return [](std::string_view t) { return estimate_tokens(t); }; }

std::string truncate_to_tokens(std::string_view text, std::size_t max_tokens) {
  if (estimate_tokens(text) <= max_tokens) return std::string(text);
  // largest w with ceil(1.3 w) <= max_tokens
  const std::size_t max_words = (max_tokens * 10) / 13;
  std::size_t words = 0;
  std::size_t i = 0;
  std::size_t end = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size()) break;
    if (words == max_words) break;
    while (i < text.size() && !is_space(text[i])) ++i;
    end = i;
    ++words;
  }
  return std::string(text.substr(0, end));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto nl = s.find('\n', start);
    const auto end = nl == std::string_view::npos ? s.size() : nl;
    std::string line(s.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(std::move(line));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

bool is_stopword(std::string_view lower_word) {
  return std::find(std::begin(kStopwords), std::end(kStopwords), lower_word) != std::end(kStopwords);
}

std::vector<std::string> content_words(std::string_view text) {
  std::vector<std::string> out;
  std::string word;
  const auto flush = [&] {
    if (word.size() >= 3 && !is_stopword(word) &&
        std::find(out.begin(), out.end(), word) == out.end()) {
      out.push_back(word);
    }
    word.clear();
  };
  for (char c : text) {
    if (is_alnum(c)) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<SentenceSpan> split_sentences(std::string_view text) {
  std::vector<SentenceSpan> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i >= n) break;
    const std::size_t begin = i;
    std::size_t end = n;
    for (std::size_t j = i; j < n; ++j) {
      const char c = text[j];
      if ((c == '.' || c == '!' || c == '?') && (j + 1 == n || is_space(text[j + 1]))) {
        end = j + 1;
        break;
      }
    }
    std::size_t e = end;
    while (e > begin && is_space(text[e - 1])) --e;
    out.push_back({begin, e});
    i = end;
  }
  return out;
}

}  // namespace propgraph
