#pragma once

#include <map>
#include <optional>
#include <vector>

#include "propdet/corpus.hpp"

namespace propdet {

struct ConfusionCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  // Span scoring has no true-negative universe, so tn stays unset there.
  std::optional<long long> tn;
};

struct PrfResult {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::optional<double> accuracy;  // only when tn is defined
};

// Harmonic mean; 0 when precision + recall == 0.
double f1_score(double precision, double recall);

// Zero denominators yield 0, never an error.
PrfResult prf(const ConfusionCounts& counts);

struct ClassScore {
  ConfusionCounts counts;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct ScoreReport {
  ConfusionCounts totals;           // pooled over articles / classes
  double precision = 0;             // from pooled counts (micro)
  double recall = 0;
  double f1 = 0;
  std::optional<double> accuracy;   // label-level scoring only
  std::map<Technique, ClassScore> per_class;  // empty for span scoring
  std::optional<double> macro_f1;       // mean F1 over classes present in gold
  std::optional<double> macro_f1_all;   // mean F1 over all 14 classes
};

// Character-set overlap per article: tp = |pred ∩ gold|, fp = |pred \ gold|,
// fn = |gold \ pred|, summed over articles. Overlaps within one side are
// unioned first, so the score is invariant under reordering and under
// splitting a span into adjacent pieces.
ScoreReport score_si(const std::vector<PropagandaSpan>& gold,
                     const std::vector<PropagandaSpan>& pred);

// Aligns gold and pred by (article_id, begin, end) and scores labels:
// per-class confusion counts, micro-F1 over pooled counts, macro-F1 as the
// unweighted mean of per-class F1, accuracy as the exact-match fraction.
// Throws ValidationError when the two sides do not align 1:1.
ScoreReport score_tc(const std::vector<TechniqueSpan>& gold,
                     const std::vector<TechniqueSpan>& pred);

}  // namespace propdet
