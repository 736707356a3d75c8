#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "propdet/corpus.hpp"

namespace propdet {

struct Token {
  std::string surface;     // UTF-8
  std::size_t start = 0;   // code-point offset, inclusive
  std::size_t end = 0;     // exclusive
  bool operator==(const Token&) const = default;
};

struct TaggedSequence {
  std::string article_id;
  std::vector<Token> tokens;
  std::vector<int> labels;  // 0/1, parallel to tokens
};

// Splits at '\n' and pairs every line with its absolute code-point start.
// Rejoining the pieces with '\n' reproduces the text exactly; empty lines
// are kept as empty pieces.
std::vector<std::pair<std::string, std::size_t>> split_sequences(
    const Article& article);

// Deterministic word/punctuation splitter. Maximal runs of word characters
// (ASCII alphanumerics, '_', and non-ASCII characters outside the common
// whitespace and punctuation ranges) form one token; every punctuation
// character is its own token; whitespace separates. Offsets are absolute
// code-point positions, shifted by base_offset.
std::vector<Token> tokenize(std::string_view text, std::size_t base_offset = 0);

// labels[i] = 1 iff token i overlaps any span by at least one character.
std::vector<int> project_spans(const std::vector<Token>& tokens,
                               const std::vector<PropagandaSpan>& spans);

// Each maximal run of 1-labeled tokens becomes one span from the run's
// first token start to its last token end (interior gaps included).
// Throws ValidationError when the lengths differ.
std::vector<PropagandaSpan> decode_spans(std::string_view article_id,
                                         const std::vector<Token>& tokens,
                                         const std::vector<int>& labels);

// One TaggedSequence per non-empty-token line of the article, labeled from
// the spans that carry this article's id.
std::vector<TaggedSequence> make_tagged_sequences(
    const Article& article, const std::vector<PropagandaSpan>& spans);

}  // namespace propdet
