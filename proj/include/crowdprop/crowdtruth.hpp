#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "crowdprop/annotations.hpp"
#include "crowdprop/relations.hpp"

namespace crowdprop {

/// Whether relation quality multiplies each worker's vote inside the
/// sentence-relation score. Off keeps the plain worker-quality ratio.
enum class SrsRelationWeighting { kOff, kPerChoice };

struct FixedPointConfig {
  double tolerance = 1e-6;
  int max_iterations = 100;
  SrsRelationWeighting srs_relation_weighting = SrsRelationWeighting::kOff;
};

/// Converged disagreement metrics for one annotation matrix. Every score is
/// in [0,1]. srs rows follow inventory order, `none` included as the last
/// component; downstream consumers that work on the 16 named relations drop
/// that component themselves.
struct QualityScores {
  std::map<std::string, double> worker_quality;
  std::map<std::string, double> sentence_quality;
  std::vector<double> relation_quality;            // inventory order
  std::map<std::string, std::vector<double>> srs;  // sentence -> inventory order
  int iterations = 0;
  bool converged = false;
  /// Degenerate-case warnings (lone workers etc.); not serialized.
  std::vector<std::string> notes;

  double srs_value(const std::string& sentence_id, std::size_t relation) const;
};

/// Runs the mutually weighted fixed point:
///   sentence_quality(s) = mean over worker pairs on s of their choice-vector
///                         cosine, weighted by both workers' quality;
///   worker_quality(w)   = mean over shared sentences of cos(vector of w,
///                         quality-weighted sum of the other workers'
///                         vectors), weighted by sentence quality;
///   relation_quality(r) = mean over worker pairs that involve r of
///                         both-picked agreement, weighted by worker quality.
/// All updates read the previous iteration (Jacobi), starting from all-ones,
/// until the largest score change drops below config.tolerance or
/// config.max_iterations is hit (converged=false, not an error).
/// Zero-total-weight means fall back to the unweighted mean; scores with no
/// evidence at all (single-worker sentences, lone workers, never-picked
/// relations) are defined as 1.
QualityScores compute_quality_scores(const AnnotationMatrix& matrix,
                                     const RelationInventory& inventory,
                                     const FixedPointConfig& config = {});

/// Quality-weighted fraction of the sentence's workers that picked the
/// relation. Returns 0 when every worker on the sentence has quality 0.
double sentence_relation_score(const AnnotationMatrix& matrix,
                               const QualityScores& quality,
                               const std::string& sentence_id,
                               std::size_t relation,
                               SrsRelationWeighting weighting = SrsRelationWeighting::kOff);

/// Plain fraction of workers that picked each relation, no weighting.
/// Debug-only companion output.
std::map<std::string, std::vector<double>> unweighted_srs(const AnnotationMatrix& matrix,
                                                          const RelationInventory& inventory);

/// JSON document with worker_quality, sentence_quality, relation_quality,
/// srs maps plus iterations/converged. Numbers carry 17 significant digits
/// so a round trip restores bit-identical values.
std::string quality_scores_to_json(
    const QualityScores& quality, const RelationInventory& inventory,
    const std::map<std::string, std::vector<double>>* debug_unweighted_srs = nullptr);

void write_quality_scores(const QualityScores& quality,
                          const RelationInventory& inventory,
                          const std::string& path);

QualityScores read_quality_scores(const std::string& path,
                                  const RelationInventory& inventory);

}  // namespace crowdprop
