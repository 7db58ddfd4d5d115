#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crowdprop/corpus.hpp"
#include "crowdprop/crowdtruth.hpp"
#include "crowdprop/embeddings.hpp"
#include "crowdprop/relations.hpp"

namespace crowdprop {

/// Crowd-labeled sentence vectors, unit-normalized and packed column-major so
/// one query is a single matrix-vector product. Entries are held in ascending
/// id order, which makes the tie-break (smallest id wins) a strict-greater
/// scan. Exact search only; every query sees every entry.
class LabeledIndex {
 public:
  /// Rejects empty vectors and duplicate ids; sorts by id.
  static LabeledIndex build(std::vector<SentenceVector> vectors);

  std::size_t size() const { return ids_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }

  /// Index and raw cosine of the most similar entry.
  std::pair<std::size_t, double> nearest(std::span<const double> query) const;

 private:
  LabeledIndex() = default;

  std::size_t dimension_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> columns_;  // dimension_ x size, column per sentence
};

/// Most similar labeled sentence by raw cosine; ties go to the
/// lexicographically smallest sentence id.
std::pair<std::string, double> nearest_labeled(const SentenceVector& query,
                                               const LabeledIndex& labeled);

struct PropagationResult {
  std::string id;
  std::string neighbor;          // empty when propagated == false
  double similarity = 0.0;       // raw cosine
  double clamped_similarity = 0.0;  // value used in the blend
  std::vector<double> scores;    // 16 values, inventory order
  bool propagated = false;
};

/// Blends the binary DS labels with the neighbor's srs values:
///   score(r) = (DS(r) + c * srs(r)) / (1 + c)
/// for every named relation, with c the (already clamped) similarity.
std::vector<double> blend_scores(const std::vector<std::uint8_t>& ds_labels,
                                 std::span<const double> neighbor_srs,
                                 double similarity);

/// Applies the blend to one sentence and records both similarity values.
PropagationResult propagate_sentence(const CorpusSentence& sentence,
                                     const std::string& neighbor_id,
                                     std::span<const double> neighbor_srs,
                                     double raw_similarity,
                                     bool clamp_similarity);

struct PropagationConfig {
  SpanPolicy span_policy = SpanPolicy::kBetweenTerms;
  bool clamp_similarity = true;  // Eq. 1 uses max(0, cosine) when on
  unsigned threads = 1;
};

struct PropagationReport {
  std::size_t total = 0;
  std::size_t propagated = 0;
  std::size_t unpropagated = 0;
  std::size_t whole_sentence_fallbacks = 0;
  std::size_t labeled_total = 0;
  std::size_t labeled_skipped_empty = 0;
  /// Raw-cosine counts over 20 uniform bins spanning [-1, 1].
  std::array<std::uint64_t, 20> similarity_histogram{};
};

struct PropagationOutput {
  std::vector<PropagationResult> results;  // DS corpus order
  PropagationReport report;
};

/// Relabels every DS sentence against the crowd set: sentence vectors from
/// the span policy (between-terms falls back to the whole sentence before a
/// sentence counts as unpropagatable), nearest crowd neighbor by cosine, then
/// the similarity-weighted blend. Unpropagatable sentences keep their DS
/// labels verbatim. Results come back in input order and are byte-stable for
/// any thread count.
PropagationOutput propagate_corpus(const std::vector<CorpusSentence>& ds_corpus,
                                   const std::vector<CorpusSentence>& crowd_corpus,
                                   const QualityScores& crowd_quality,
                                   const RelationInventory& inventory,
                                   const EmbeddingTable& table,
                                   const PropagationConfig& config = {});

/// One JSONL line: {"id","neighbor","sim","sim_clamped","scores","propagated"}.
std::string propagation_result_to_json(const PropagationResult& result,
                                       const RelationInventory& inventory);

std::string propagation_results_to_jsonl(const std::vector<PropagationResult>& results,
                                         const RelationInventory& inventory);

std::string propagation_report_to_json(const PropagationReport& report);

void write_propagation_results(const std::vector<PropagationResult>& results,
                               const RelationInventory& inventory,
                               const std::string& path);

void write_propagation_report(const PropagationReport& report, const std::string& path);

}  // namespace crowdprop
