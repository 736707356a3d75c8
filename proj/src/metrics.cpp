#include "propdet/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>

namespace propdet {

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  if (denom <= 0) return 0;
  return 2.0 * precision * recall / denom;
}

PrfResult prf(const ConfusionCounts& c) {
  PrfResult r;
  const double tp = static_cast<double>(c.tp);
  r.precision = (c.tp + c.fp) > 0 ? tp / static_cast<double>(c.tp + c.fp) : 0;
  r.recall = (c.tp + c.fn) > 0 ? tp / static_cast<double>(c.tp + c.fn) : 0;
  r.f1 = f1_score(r.precision, r.recall);
  if (c.tn.has_value()) {
    const long long total = c.tp + c.fp + c.fn + *c.tn;
    r.accuracy = total > 0
                     ? static_cast<double>(c.tp + *c.tn) /
                           static_cast<double>(total)
                     : 0;
  }
  return r;
}

namespace {

using Interval = std::pair<std::size_t, std::size_t>;

// Sorted union of half-open intervals.
std::vector<Interval> merge_intervals(std::vector<Interval> v) {
  std::sort(v.begin(), v.end());
  std::vector<Interval> merged;
  for (const auto& iv : v) {
    if (!merged.empty() && iv.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, iv.second);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

long long covered(const std::vector<Interval>& v) {
  long long n = 0;
  for (const auto& iv : v) n += static_cast<long long>(iv.second - iv.first);
  return n;
}

long long intersection(const std::vector<Interval>& a,
                       const std::vector<Interval>& b) {
  long long n = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const std::size_t lo = std::max(a[i].first, b[j].first);
    const std::size_t hi = std::min(a[i].second, b[j].second);
    if (lo < hi) n += static_cast<long long>(hi - lo);
    if (a[i].second < b[j].second) ++i; else ++j;
  }
  return n;
}

}  // namespace

ScoreReport score_si(const std::vector<PropagandaSpan>& gold,
                     const std::vector<PropagandaSpan>& pred) {
  std::unordered_map<std::string, std::vector<Interval>> gold_by, pred_by;
  for (const auto& s : gold) gold_by[s.article_id].emplace_back(s.begin, s.end);
  for (const auto& s : pred) pred_by[s.article_id].emplace_back(s.begin, s.end);

  ScoreReport report;
  auto score_article = [&](const std::string& id) {
    const auto g = merge_intervals(gold_by.count(id) ? gold_by[id]
                                                     : std::vector<Interval>{});
    const auto p = merge_intervals(pred_by.count(id) ? pred_by[id]
                                                     : std::vector<Interval>{});
    const long long both = intersection(g, p);
    report.totals.tp += both;
    report.totals.fp += covered(p) - both;
    report.totals.fn += covered(g) - both;
  };
  for (const auto& [id, _] : gold_by) score_article(id);
  for (const auto& [id, _] : pred_by) {
    if (!gold_by.count(id)) score_article(id);
  }

  const PrfResult r = prf(report.totals);
  report.precision = r.precision;
  report.recall = r.recall;
  report.f1 = r.f1;
  return report;
}

ScoreReport score_tc(const std::vector<TechniqueSpan>& gold,
                     const std::vector<TechniqueSpan>& pred) {
  if (gold.size() != pred.size()) {
    throw ValidationError("score_tc: " + std::to_string(gold.size()) +
                          " gold records vs " + std::to_string(pred.size()) +
                          " predictions");
  }
  // Stable sort by span key; duplicates keep their input pairing.
  auto key_order = [](const std::vector<TechniqueSpan>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       const auto& x = v[a].span;
                       const auto& y = v[b].span;
                       return std::tie(x.article_id, x.begin, x.end) <
                              std::tie(y.article_id, y.begin, y.end);
                     });
    return order;
  };
  const auto gold_order = key_order(gold);
  const auto pred_order = key_order(pred);

  ScoreReport report;
  for (Technique t : all_techniques()) report.per_class[t] = ClassScore{};
  long long matches = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& g = gold[gold_order[i]];
    const auto& p = pred[pred_order[i]];
    if (g.span != p.span) {
      throw ValidationError(
          "score_tc: prediction for article " + p.span.article_id + " [" +
          std::to_string(p.span.begin) + ", " + std::to_string(p.span.end) +
          ") has no gold counterpart");
    }
    if (g.technique == p.technique) {
      ++matches;
      ++report.per_class[g.technique].counts.tp;
    } else {
      ++report.per_class[g.technique].counts.fn;
      ++report.per_class[p.technique].counts.fp;
    }
  }

  double macro_present = 0, macro_all = 0;
  int present = 0;
  for (auto& [t, cs] : report.per_class) {
    const PrfResult r = prf(cs.counts);
    cs.precision = r.precision;
    cs.recall = r.recall;
    cs.f1 = r.f1;
    report.totals.tp += cs.counts.tp;
    report.totals.fp += cs.counts.fp;
    report.totals.fn += cs.counts.fn;
    macro_all += cs.f1;
    if (cs.counts.tp + cs.counts.fn > 0) {
      macro_present += cs.f1;
      ++present;
    }
  }
  const PrfResult micro = prf(report.totals);
  report.precision = micro.precision;
  report.recall = micro.recall;
  report.f1 = micro.f1;
  report.accuracy = gold.empty() ? 0.0
                                 : static_cast<double>(matches) /
                                       static_cast<double>(gold.size());
  report.macro_f1 = present > 0 ? macro_present / present : 0.0;
  report.macro_f1_all = macro_all / kTechniqueCount;
  return report;
}

}  // namespace propdet
