#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crowdprop/relations.hpp"

namespace crowdprop {

/// One worker's judgment of one sentence, encoded as a binary choice vector
/// over the inventory. At least one component is set; `none` is exclusive.
struct WorkerVector {
  std::string worker_id;
  std::string sentence_id;
  std::vector<std::uint8_t> choices;

  std::size_t choice_count() const;
  bool picked(std::size_t relation) const { return choices[relation] != 0; }

  bool operator==(const WorkerVector& other) const = default;
};

/// Encodes a list of relation identifiers as a binary choice vector.
/// Rejects empty lists and `none` combined with a named relation.
std::vector<std::uint8_t> encode_choices(const std::vector<std::string>& raw_choices,
                                         const RelationInventory& inventory);

/// Validated, immutable crowd judgment matrix. Rows are kept sorted by
/// (sentence_id, worker_id) so iteration order never depends on input order.
class AnnotationMatrix {
 public:
  static AnnotationMatrix from_rows(std::vector<WorkerVector> rows,
                                    const RelationInventory& inventory);

  const std::vector<WorkerVector>& rows() const { return rows_; }
  /// sentence_id -> row indices, workers in ascending id order.
  const std::map<std::string, std::vector<std::size_t>>& by_sentence() const {
    return sentence_index_;
  }
  /// worker_id -> row indices, sentences in ascending id order.
  const std::map<std::string, std::vector<std::size_t>>& by_worker() const {
    return worker_index_;
  }
  std::size_t row_count() const { return rows_.size(); }
  std::size_t sentence_count() const { return sentence_index_.size(); }
  std::size_t worker_count() const { return worker_index_.size(); }

  bool operator==(const AnnotationMatrix& other) const {
    return rows_ == other.rows_;
  }

 private:
  AnnotationMatrix() = default;

  std::vector<WorkerVector> rows_;
  std::map<std::string, std::vector<std::size_t>> sentence_index_;
  std::map<std::string, std::vector<std::size_t>> worker_index_;
};

/// Reads the annotation CSV (header `worker_id,sentence_id,choices`, choices
/// `|`-separated). Malformed lines are reported with their line number.
AnnotationMatrix parse_annotations(const std::string& path,
                                   const RelationInventory& inventory);

/// Canonical CSV form; parse_annotations(annotations_to_csv(m)) == m.
std::string annotations_to_csv(const AnnotationMatrix& matrix,
                               const RelationInventory& inventory);

void write_annotations(const AnnotationMatrix& matrix,
                       const RelationInventory& inventory,
                       const std::string& path);

}  // namespace crowdprop
