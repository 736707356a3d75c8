#include "propdet/tokenization.hpp"

#include <algorithm>

#include "propdet/text.hpp"

namespace propdet {

namespace {

bool is_space_cp(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r':
    case 0x0B: case 0x0C: case 0x85: case 0xA0:
    case 0x1680: case 0x2028: case 0x2029: case 0x202F:
    case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_word_cp(char32_t c) {
  if (c < 0x80) {
    return c == '_' || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
           (c >= 'A' && c <= 'Z');
  }
  if (is_space_cp(c)) return false;
  if (c >= 0xA1 && c <= 0xBF) return false;      // Latin-1 punctuation
  if (c >= 0x2010 && c <= 0x2043) return false;  // general punctuation
  return true;
}

}  // namespace

std::vector<std::pair<std::string, std::size_t>> split_sequences(
    const Article& article) {
  std::vector<std::pair<std::string, std::size_t>> lines;
  const std::u32string text = decode_utf8(article.text);
  if (text.empty()) return lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == U'\n') {
      lines.emplace_back(
          encode_utf8(std::u32string_view(text).substr(start, i - start)),
          start);
      start = i + 1;
    }
  }
  return lines;
}

std::vector<Token> tokenize(std::string_view text, std::size_t base_offset) {
  std::vector<Token> tokens;
  const std::u32string cps = decode_utf8(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    if (is_space_cp(cps[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (is_word_cp(cps[i])) {
      while (i < cps.size() && is_word_cp(cps[i])) ++i;
    } else {
      ++i;  // one punctuation character per token
    }
    Token t;
    t.surface =
        encode_utf8(std::u32string_view(cps).substr(start, i - start));
    t.start = base_offset + start;
    t.end = base_offset + i;
    tokens.push_back(std::move(t));
  }
  return tokens;
}

std::vector<int> project_spans(const std::vector<Token>& tokens,
                               const std::vector<PropagandaSpan>& spans) {
  std::vector<int> labels(tokens.size(), 0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& s : spans) {
      if (std::max(tokens[i].start, s.begin) <
          std::min(tokens[i].end, s.end)) {
        labels[i] = 1;
        break;
      }
    }
  }
  return labels;
}

std::vector<PropagandaSpan> decode_spans(std::string_view article_id,
                                         const std::vector<Token>& tokens,
                                         const std::vector<int>& labels) {
  if (tokens.size() != labels.size()) {
    throw ValidationError("decode_spans: " + std::to_string(tokens.size()) +
                          " tokens but " + std::to_string(labels.size()) +
                          " labels");
  }
  std::vector<PropagandaSpan> spans;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (labels[i] != 1) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < tokens.size() && labels[j + 1] == 1) ++j;
    spans.push_back(PropagandaSpan{std::string(article_id), tokens[i].start,
                                   tokens[j].end});
    i = j + 1;
  }
  return spans;
}

std::vector<TaggedSequence> make_tagged_sequences(
    const Article& article, const std::vector<PropagandaSpan>& spans) {
  std::vector<PropagandaSpan> own;
  for (const auto& s : spans) {
    if (s.article_id == article.id) own.push_back(s);
  }
  std::vector<TaggedSequence> sequences;
  for (const auto& [line, start] : split_sequences(article)) {
    TaggedSequence seq;
    seq.article_id = article.id;
    seq.tokens = tokenize(line, start);
    if (seq.tokens.empty()) continue;
    seq.labels = project_spans(seq.tokens, own);
    sequences.push_back(std::move(seq));
  }
  return sequences;
}

}  // namespace propdet
