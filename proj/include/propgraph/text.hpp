#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace propgraph {

/// Token estimator: whitespace-separated words times 1.3, rounded up.
std::size_t estimate_tokens(std::string_view text);
std::size_t word_count(std::string_view text);

/// Pluggable token counter; defaults to estimate_tokens.
using TokenCounter = std::function<std::size_t(std::string_view)>;
TokenCounter default_token_counter();

/// Keeps the longest prefix of whole words whose estimate fits `max_tokens`.
std::string truncate_to_tokens(std::string_view text, std::size_t max_tokens);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);

/// Lowercased alphanumeric words of length >= 3 that are not stopwords, in order
/// of first appearance, deduplicated.
std::vector<std::string> content_words(std::string_view text);
bool is_stopword(std::string_view lower_word);

struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Splits on '.', '!' or '?' followed by whitespace (or end of text). Spans
/// exclude surrounding whitespace.
std::vector<SentenceSpan> split_sentences(std::string_view text);

}  // namespace propgraph
