#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crowdprop/corpus.hpp"
#include "crowdprop/crowdtruth.hpp"
#include "crowdprop/relations.hpp"

namespace crowdprop {

/// One joined (sentence, relation) pair: the external prediction against the
/// crowd's srs.
struct ScoredPair {
  std::string sentence_id;
  std::size_t relation = 0;  // index into the 16 named relations
  double predicted = 0.0;
  double gold_srs = 0.0;
};

struct PrPoint {
  double threshold = 0.0;  // predicted-score cut, pairs with score >= cut are positive
  double precision = 0.0;
  double recall = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // descending threshold, recall non-decreasing
  double auc = 0.0;
  std::size_t gold_positives = 0;
  std::size_t pair_count = 0;
};

/// Micro precision/recall at every distinct predicted-score cut, gold labels
/// binarized at gold_threshold (srs >= threshold is positive). AUC is the
/// trapezoid over the recall axis, extended to recall 0 at the precision of
/// the highest cut. Errors when there is no gold positive (AUC undefined) or
/// a (sentence, relation) pair repeats.
PrCurve pr_curve(const std::vector<ScoredPair>& pairs, double gold_threshold);

/// Per sentence, cosine between the predicted 16-vector and the gold srs
/// 16-vector (srs used as-is, no thresholding); 0 when either side is all
/// zero. Every sentence must carry all `relation_count` relations.
std::map<std::string, double> cosine_eval(const std::vector<ScoredPair>& pairs,
                                          std::size_t relation_count);

/// Per relation, the fraction of DS-positive crowd sentences whose srs falls
/// below the threshold. Relations without DS positives are undefined.
std::vector<std::optional<double>> false_positive_ratio(
    const std::vector<CorpusSentence>& crowd_corpus,
    const QualityScores& quality, const RelationInventory& inventory,
    double gold_threshold);

/// Per-sentence score vectors keyed by sentence id, 16 values in inventory
/// order, as read from a predictions/gold JSONL file.
using ScoreFile = std::map<std::string, std::vector<double>>;

/// JSON Lines, one {"id", "scores": {relation: value}} object per line.
/// Requires every named relation per sentence and values within [0,1].
ScoreFile read_score_file(const std::string& path, const RelationInventory& inventory);

/// Joins predictions with gold scores into the pair universe. The id sets
/// must match exactly; mismatches raise an error listing the first orphans.
std::vector<ScoredPair> join_scored_pairs(const ScoreFile& predictions,
                                          const ScoreFile& gold,
                                          const RelationInventory& inventory);

struct EvalReport {
  PrCurve pr;
  std::map<std::string, double> cosine_per_sentence;
  std::size_t sentences = 0;
  double gold_threshold = 0.5;
};

std::string eval_report_to_json(const EvalReport& report);
std::string pr_curve_to_csv(const PrCurve& curve);                 // threshold,precision,recall
std::string cosine_eval_to_csv(const std::map<std::string, double>& cosines);  // sentence_id,cosine

std::string fp_ratio_to_json(const std::vector<std::optional<double>>& ratios,
                             const RelationInventory& inventory,
                             double gold_threshold);
std::string fp_ratio_to_csv(const std::vector<std::optional<double>>& ratios,
                            const RelationInventory& inventory);  // relation,fp_ratio

}  // namespace crowdprop
