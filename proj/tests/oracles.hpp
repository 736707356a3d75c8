#pragma once

// Brute-force oracles and random-instance generators used by the unit and
// acceptance suites. Everything recomputes expectations from first
// principles, independent of the library code paths it checks.

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "propdet/corpus.hpp"
#include "propdet/metrics.hpp"
#include "propdet/nn.hpp"
#include "propdet/tokenization.hpp"

namespace oracle {

using propdet::ConfusionCounts;
using propdet::PropagandaSpan;
using propdet::Rng;
using propdet::TechniqueSpan;
using propdet::Token;

// Token label by per-character membership test.
inline std::vector<int> project_brute(
    const std::vector<Token>& tokens,
    const std::vector<PropagandaSpan>& spans) {
  std::vector<int> labels(tokens.size(), 0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t pos = tokens[i].start; pos < tokens[i].end; ++pos) {
      for (const auto& s : spans) {
        if (pos >= s.begin && pos < s.end) labels[i] = 1;
      }
    }
  }
  return labels;
}

// Maximal all-ones intervals by O(n^2) enumeration.
inline std::vector<PropagandaSpan> decode_brute(
    const std::string& id, const std::vector<Token>& tokens,
    const std::vector<int>& labels) {
  std::vector<PropagandaSpan> out;
  const std::size_t n = tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      bool all_ones = true;
      for (std::size_t k = i; k <= j; ++k) {
        if (labels[k] != 1) { all_ones = false; break; }
      }
      if (!all_ones) continue;
      const bool left_maximal = i == 0 || labels[i - 1] != 1;
      const bool right_maximal = j + 1 == n || labels[j + 1] != 1;
      if (left_maximal && right_maximal) {
        out.push_back(PropagandaSpan{id, tokens[i].start, tokens[j].end});
      }
    }
  }
  return out;
}

// Literal character sets over (article, position) pairs.
inline ConfusionCounts si_counts_brute(
    const std::vector<PropagandaSpan>& gold,
    const std::vector<PropagandaSpan>& pred) {
  std::set<std::pair<std::string, std::size_t>> g, p;
  for (const auto& s : gold) {
    for (std::size_t c = s.begin; c < s.end; ++c) g.insert({s.article_id, c});
  }
  for (const auto& s : pred) {
    for (std::size_t c = s.begin; c < s.end; ++c) p.insert({s.article_id, c});
  }
  ConfusionCounts out;
  for (const auto& c : p) {
    if (g.count(c)) ++out.tp;
  }
  out.fp = static_cast<long long>(p.size()) - out.tp;
  out.fn = static_cast<long long>(g.size()) - out.tp;
  return out;
}

struct PrfBrute {
  double precision, recall, f1;
  double accuracy = 0;
  bool has_accuracy = false;
};

inline PrfBrute prf_brute(const ConfusionCounts& c) {
  PrfBrute r{};
  const long double tp = c.tp, fp = c.fp, fn = c.fn;
  r.precision =
      tp + fp > 0 ? static_cast<double>(tp / (tp + fp)) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp / (tp + fn)) : 0.0;
  const long double pr = static_cast<long double>(r.precision) + r.recall;
  r.f1 = pr > 0 ? static_cast<double>(2.0L * r.precision * r.recall / pr)
                : 0.0;
  if (c.tn.has_value()) {
    r.has_accuracy = true;
    const long double total = tp + fp + fn + *c.tn;
    r.accuracy =
        total > 0 ? static_cast<double>((tp + *c.tn) / total) : 0.0;
  }
  return r;
}

struct TcBrute {
  double accuracy = 0;
  double micro_f1 = 0;
  std::map<int, double> class_f1;  // class index -> F1
  double macro_present = 0;
  double macro_all = 0;
};

// Per-class confusion by explicit loops over aligned (gold, pred) labels.
inline TcBrute tc_brute(const std::vector<int>& gold,
                        const std::vector<int>& pred, int n_classes) {
  TcBrute out;
  long long matches = 0;
  long long tp_sum = 0, fp_sum = 0, fn_sum = 0;
  int present = 0;
  for (int k = 0; k < n_classes; ++k) {
    long long tp = 0, fp = 0, fn = 0, gold_k = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (gold[i] == k) ++gold_k;
      if (gold[i] == k && pred[i] == k) ++tp;
      if (gold[i] != k && pred[i] == k) ++fp;
      if (gold[i] == k && pred[i] != k) ++fn;
    }
    const double p = tp + fp > 0 ? double(tp) / double(tp + fp) : 0;
    const double r = tp + fn > 0 ? double(tp) / double(tp + fn) : 0;
    const double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0;
    out.class_f1[k] = f1;
    out.macro_all += f1;
    if (gold_k > 0) { out.macro_present += f1; ++present; }
    tp_sum += tp; fp_sum += fp; fn_sum += fn;
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == pred[i]) ++matches;
  }
  out.accuracy = gold.empty() ? 0 : double(matches) / double(gold.size());
  const double micro_p =
      tp_sum + fp_sum > 0 ? double(tp_sum) / double(tp_sum + fp_sum) : 0;
  const double micro_r =
      tp_sum + fn_sum > 0 ? double(tp_sum) / double(tp_sum + fn_sum) : 0;
  out.micro_f1 =
      micro_p + micro_r > 0 ? 2 * micro_p * micro_r / (micro_p + micro_r) : 0;
  out.macro_all /= n_classes;
  if (present > 0) out.macro_present /= present;
  return out;
}

// ---- random instance generators ----

// Sorted non-overlapping tokens along a random cursor walk.
inline std::vector<Token> random_tokens(Rng& rng, std::size_t max_tokens = 20) {
  std::vector<Token> tokens;
  const std::size_t n = rng.index(max_tokens + 1);
  std::size_t cursor = rng.index(4);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = 1 + rng.index(4);
    Token t;
    t.start = cursor;
    t.end = cursor + len;
    t.surface = std::string(len, static_cast<char>('a' + rng.index(26)));
    tokens.push_back(t);
    cursor = t.end + rng.index(4);
  }
  return tokens;
}

inline std::vector<PropagandaSpan> random_spans(Rng& rng,
                                                const std::string& id,
                                                std::size_t limit,
                                                std::size_t max_spans = 6) {
  std::vector<PropagandaSpan> spans;
  if (limit < 2) return spans;
  const std::size_t n = rng.index(max_spans + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t begin = rng.index(limit - 1);
    const std::size_t end = begin + 1 + rng.index(limit - begin - 1 + 1);
    spans.push_back(PropagandaSpan{id, begin, std::min(end, limit)});
  }
  return spans;
}

// Random code points across several scripts (1- to 4-byte encodings).
inline std::u32string random_unicode(Rng& rng, std::size_t max_len = 40) {
  static const std::pair<char32_t, char32_t> ranges[] = {
      {0x20, 0x7E},      // ASCII
      {0xA1, 0xFF},      // Latin-1
      {0x391, 0x3C9},    // Greek
      {0x4E00, 0x4E80},  // CJK
      {0x2010, 0x2027},  // punctuation
      {0x1F600, 0x1F640},  // emoji (4-byte)
      {0x9, 0xA},        // tab/newline
  };
  std::u32string out;
  const std::size_t n = rng.index(max_len + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [lo, hi] = ranges[rng.index(std::size(ranges))];
    out.push_back(lo + static_cast<char32_t>(
                           rng.index(static_cast<std::size_t>(hi - lo + 1))));
  }
  return out;
}

}  // namespace oracle
