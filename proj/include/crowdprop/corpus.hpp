#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "crowdprop/relations.hpp"

namespace crowdprop {

/// Inclusive token-index range of one highlighted term.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const TokenSpan& other) const = default;
};

/// One pre-tokenized corpus sentence with its candidate term pair and the
/// distant-supervision seed labels. `scores` is empty until a propagation or
/// gold-score pass fills it (16 values, inventory order, `none` excluded).
struct CorpusSentence {
  std::string id;
  std::vector<std::string> tokens;
  TokenSpan term1;
  TokenSpan term2;
  std::vector<std::uint8_t> ds_labels;  // 16 named relations, inventory order
  std::vector<double> scores;           // empty or 16 values

  bool has_scores() const { return !scores.empty(); }
  bool ds_positive(std::size_t relation) const { return ds_labels[relation] != 0; }
};

struct CorpusReadOptions {
  /// Require at least one positive DS label per sentence (DS corpora).
  bool require_ds_label = false;
};

/// Reads a JSON Lines corpus: one object per line with fields `id`, `tokens`,
/// `term1`, `term2` (inclusive index pairs), `ds_labels` (relation names) and
/// optional `scores` (relation name -> value). Spans must lie within the
/// token range and must not overlap; `none` is not a valid corpus label.
std::vector<CorpusSentence> read_corpus(const std::string& path,
                                        const RelationInventory& inventory,
                                        const CorpusReadOptions& options = {});

/// Same schema, parsed from an in-memory string (used by tests and tools).
std::vector<CorpusSentence> parse_corpus(const std::string& jsonl,
                                         const RelationInventory& inventory,
                                         const CorpusReadOptions& options = {},
                                         const std::string& source_name = "<memory>");

}  // namespace crowdprop
