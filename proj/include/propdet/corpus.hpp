#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace propdet {

// Malformed input data (label lines, vector files, article encoding).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid data that violates a cross-record contract
// (out-of-range span, unknown article, misaligned prediction file).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Article {
  std::string id;    // decimal digits
  std::string text;  // UTF-8; spans index it by code point
};

// Half-open character interval [begin, end) on one article.
struct PropagandaSpan {
  std::string article_id;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const PropagandaSpan&) const = default;
};

inline constexpr int kTechniqueCount = 14;

enum class Technique : int {
  AppealToAuthority = 0,
  AppealToFearPrejudice,
  BandwagonReductioAdHitlerum,
  BlackAndWhiteFallacy,
  CausalOversimplification,
  Doubt,
  ExaggerationMinimisation,
  FlagWaving,
  LoadedLanguage,
  NameCallingLabeling,
  Repetition,
  Slogans,
  ThoughtTerminatingCliches,
  WhataboutismStrawMenRedHerring,
};

std::string_view technique_name(Technique t);
const std::array<Technique, kTechniqueCount>& all_techniques();
// Case-insensitive; returns nullopt for strings outside the taxonomy.
std::optional<Technique> parse_technique(std::string_view name);

struct TechniqueSpan {
  PropagandaSpan span;
  Technique technique = Technique::AppealToAuthority;
  bool operator==(const TechniqueSpan&) const = default;
};

struct LabelDistribution {
  std::array<std::size_t, kTechniqueCount> counts{};
  std::size_t total() const;
  std::size_t& operator[](Technique t) {
    return counts[static_cast<int>(t)];
  }
  std::size_t operator[](Technique t) const {
    return counts[static_cast<int>(t)];
  }
};

// Reads one `article{ID}.txt`; the text is kept byte-for-byte.
Article load_article(const std::filesystem::path& path);
// All article{ID}.txt files of a directory, keyed by id.
std::map<std::string, Article> load_article_dir(
    const std::filesystem::path& dir);

// TSV `id \t begin \t end [\t ...ignored]`; empty lines skipped. When
// line_numbers is given it receives the 1-based source line of each span.
std::vector<PropagandaSpan> parse_si_labels(
    std::istream& in, std::vector<std::size_t>* line_numbers = nullptr);

// TSV `id \t technique \t begin \t end [\t ...ignored]`.
std::vector<TechniqueSpan> parse_tc_labels(
    std::istream& in, std::vector<std::size_t>* line_numbers = nullptr);

std::vector<PropagandaSpan> load_si_file(const std::filesystem::path& path);
std::vector<TechniqueSpan> load_tc_file(const std::filesystem::path& path);

std::string write_predictions(const std::vector<PropagandaSpan>& spans);
std::string write_predictions(const std::vector<TechniqueSpan>& spans);

// Checks every span against its article: known id, end within the text.
// line_numbers (parallel to spans) improves error positions when given.
void validate_spans(const std::map<std::string, Article>& articles,
                    const std::vector<PropagandaSpan>& spans,
                    const std::vector<std::size_t>* line_numbers = nullptr);
void validate_spans(const std::map<std::string, Article>& articles,
                    const std::vector<TechniqueSpan>& spans,
                    const std::vector<std::size_t>* line_numbers = nullptr);

LabelDistribution label_distribution(const std::vector<TechniqueSpan>& spans);

}  // namespace propdet
