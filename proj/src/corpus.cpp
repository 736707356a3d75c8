#include "propdet/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "propdet/text.hpp"

namespace propdet {

namespace {

const std::array<std::string_view, kTechniqueCount> kTechniqueNames = {
    "Appeal_to_Authority",
    "Appeal_to_fear-prejudice",
    "Bandwagon,Reductio_ad_hitlerum",
    "Black-and-White_Fallacy",
    "Causal_Oversimplification",
    "Doubt",
    "Exaggeration,Minimisation",
    "Flag-Waving",
    "Loaded_Language",
    "Name_Calling,Labeling",
    "Repetition",
    "Slogans",
    "Thought-terminating_Cliches",
    "Whataboutism,Straw_Men,Red_Herring",
};

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::size_t parse_offset(std::string_view field, const char* name,
                         std::size_t line_no) {
  std::size_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(std::string("non-integer ") + name + " \"" +
                     std::string(field) + "\" at line " +
                     std::to_string(line_no));
  }
  return value;
}

// Strips one trailing '\r' so CRLF files parse like LF files.
std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::string_view technique_name(Technique t) {
  return kTechniqueNames[static_cast<int>(t)];
}

const std::array<Technique, kTechniqueCount>& all_techniques() {
  static const std::array<Technique, kTechniqueCount> all = [] {
    std::array<Technique, kTechniqueCount> a{};
    for (int i = 0; i < kTechniqueCount; ++i) a[i] = static_cast<Technique>(i);
    return a;
  }();
  return all;
}

std::optional<Technique> parse_technique(std::string_view name) {
  static const std::unordered_map<std::string, Technique> index = [] {
    std::unordered_map<std::string, Technique> m;
    for (Technique t : all_techniques()) {
      m.emplace(ascii_lower(technique_name(t)), t);
    }
    return m;
  }();
  const auto it = index.find(ascii_lower(name));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::size_t LabelDistribution::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

Article load_article(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  std::string id;
  if (name.starts_with("article") && name.ends_with(".txt")) {
    id = name.substr(7, name.size() - 7 - 4);
  }
  if (id.empty() ||
      !std::all_of(id.begin(), id.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    throw ValidationError("article filename \"" + name +
                          "\" has no decimal id (expected article{ID}.txt)");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open article file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  try {
    decode_utf8(text);  // validate only; bytes are kept untouched
  } catch (const Utf8Error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return Article{std::move(id), std::move(text)};
}

std::map<std::string, Article> load_article_dir(
    const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ValidationError("not a directory: " + dir.string());
  }
  std::map<std::string, Article> articles;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (!name.starts_with("article") || !name.ends_with(".txt")) continue;
    Article a = load_article(entry.path());
    articles.emplace(a.id, std::move(a));
  }
  return articles;
}

std::vector<PropagandaSpan> parse_si_labels(
    std::istream& in, std::vector<std::size_t>* line_numbers) {
  std::vector<PropagandaSpan> spans;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = chomp(raw);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 3) {
      throw ParseError("expected at least 3 tab-separated fields at line " +
                       std::to_string(line_no));
    }
    if (fields[0].empty()) {
      throw ParseError("empty article id at line " + std::to_string(line_no));
    }
    PropagandaSpan s;
    s.article_id = std::string(fields[0]);
    s.begin = parse_offset(fields[1], "begin offset", line_no);
    s.end = parse_offset(fields[2], "end offset", line_no);
    if (s.begin >= s.end) {
      throw ParseError("begin >= end at line " + std::to_string(line_no));
    }
    spans.push_back(std::move(s));
    if (line_numbers) line_numbers->push_back(line_no);
  }
  return spans;
}

std::vector<TechniqueSpan> parse_tc_labels(
    std::istream& in, std::vector<std::size_t>* line_numbers) {
  std::vector<TechniqueSpan> spans;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = chomp(raw);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 4) {
      throw ParseError("expected at least 4 tab-separated fields at line " +
                       std::to_string(line_no));
    }
    if (fields[0].empty()) {
      throw ParseError("empty article id at line " + std::to_string(line_no));
    }
    const auto technique = parse_technique(fields[1]);
    if (!technique) {
      throw ParseError("unknown technique \"" + std::string(fields[1]) +
                       "\" at line " + std::to_string(line_no));
    }
    TechniqueSpan s;
    s.span.article_id = std::string(fields[0]);
    s.span.begin = parse_offset(fields[2], "begin offset", line_no);
    s.span.end = parse_offset(fields[3], "end offset", line_no);
    if (s.span.begin >= s.span.end) {
      throw ParseError("begin >= end at line " + std::to_string(line_no));
    }
    s.technique = *technique;
    spans.push_back(std::move(s));
    if (line_numbers) line_numbers->push_back(line_no);
  }
  return spans;
}

std::vector<PropagandaSpan> load_si_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return parse_si_labels(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<TechniqueSpan> load_tc_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return parse_tc_labels(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string write_predictions(const std::vector<PropagandaSpan>& spans) {
  std::string out;
  for (const auto& s : spans) {
    out += s.article_id;
    out += '\t';
    out += std::to_string(s.begin);
    out += '\t';
    out += std::to_string(s.end);
    out += '\n';
  }
  return out;
}

std::string write_predictions(const std::vector<TechniqueSpan>& spans) {
  std::string out;
  for (const auto& s : spans) {
    out += s.span.article_id;
    out += '\t';
    out += technique_name(s.technique);
    out += '\t';
    out += std::to_string(s.span.begin);
    out += '\t';
    out += std::to_string(s.span.end);
    out += '\n';
  }
  return out;
}

namespace {

void validate_span_list(const std::map<std::string, Article>& articles,
                        const std::vector<PropagandaSpan>& spans,
                        const std::vector<std::size_t>* line_numbers) {
  std::unordered_map<std::string, std::size_t> lengths;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& s = spans[i];
    const std::string where =
        line_numbers && i < line_numbers->size()
            ? "line " + std::to_string((*line_numbers)[i])
            : "record " + std::to_string(i + 1);
    const auto art = articles.find(s.article_id);
    if (art == articles.end()) {
      throw ValidationError("unknown article id \"" + s.article_id + "\" at " +
                            where);
    }
    auto len = lengths.find(s.article_id);
    if (len == lengths.end()) {
      len = lengths.emplace(s.article_id, codepoint_length(art->second.text))
                .first;
    }
    if (s.end > len->second) {
      throw ValidationError(
          "article " + s.article_id + ": span [" + std::to_string(s.begin) +
          ", " + std::to_string(s.end) + ") exceeds text length " +
          std::to_string(len->second) + " at " + where);
    }
  }
}

}  // namespace

void validate_spans(const std::map<std::string, Article>& articles,
                    const std::vector<PropagandaSpan>& spans,
                    const std::vector<std::size_t>* line_numbers) {
  validate_span_list(articles, spans, line_numbers);
}

void validate_spans(const std::map<std::string, Article>& articles,
                    const std::vector<TechniqueSpan>& spans,
                    const std::vector<std::size_t>* line_numbers) {
  std::vector<PropagandaSpan> plain;
  plain.reserve(spans.size());
  for (const auto& s : spans) plain.push_back(s.span);
  validate_span_list(articles, plain, line_numbers);
}

LabelDistribution label_distribution(const std::vector<TechniqueSpan>& spans) {
  LabelDistribution dist;
  for (const auto& s : spans) ++dist[s.technique];
  return dist;
}

}  // namespace propdet
