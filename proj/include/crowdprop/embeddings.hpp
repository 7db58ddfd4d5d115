#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "crowdprop/corpus.hpp"

namespace crowdprop {

enum class EmbeddingFormat { kText, kBinary };

struct EmbeddingLoadStats {
  std::size_t declared_count = 0;    // from the file header
  std::size_t parsed_count = 0;      // entries read from the file
  std::size_t retained_count = 0;    // kept after the vocabulary filter
  std::size_t duplicates_skipped = 0;  // repeated tokens, first one wins
};

/// token -> dense float vector of a fixed dimension; immutable after load
/// and safe to share across threads.
class EmbeddingTable {
 public:
  static EmbeddingTable from_pairs(
      std::size_t dimension,
      const std::vector<std::pair<std::string, std::vector<float>>>& entries);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return tokens_.size(); }
  const EmbeddingLoadStats& stats() const { return stats_; }

  std::optional<std::span<const float>> find(std::string_view token) const;
  /// Exact-match lookup first, ASCII-lowercase fallback second.
  std::optional<std::span<const float>> lookup(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

 private:
  friend struct EmbeddingTableLoader;
  EmbeddingTable() = default;
  void insert(std::string token, const float* values);

  std::size_t dimension_ = 0;
  std::vector<std::string> tokens_;
  std::vector<float> data_;  // row-major, tokens_.size() x dimension_
  std::unordered_map<std::string, std::size_t> index_;
  EmbeddingLoadStats stats_;
};

/// Streaming loader for the common vector formats: text (header line
/// "<count> <dim>", then "token v1 .. vdim" per line) and the companion
/// binary layout (same ASCII header, then token + raw little-endian float32
/// values per entry). With a vocabulary filter, peak memory is proportional
/// to the retained vocabulary, not the file.
EmbeddingTable load_embeddings(const std::string& path, EmbeddingFormat format,
                               const std::unordered_set<std::string>* vocabulary_filter = nullptr);

/// ".bin" means binary, everything else text.
EmbeddingFormat guess_embedding_format(const std::string& path);

enum class SpanPolicy { kBetweenTerms, kWholeSentence };

/// Mean of word vectors over the chosen token span. `empty` is true exactly
/// when no in-vocabulary token contributed (all-zero vector).
struct SentenceVector {
  std::string sentence_id;
  std::vector<double> values;
  std::size_t in_vocab_count = 0;
  bool empty = true;
};

/// Arithmetic mean of the in-vocabulary token vectors, either over the
/// tokens strictly between the two term spans (default) or over the whole
/// sentence. Out-of-vocabulary tokens are skipped. No fallback happens here:
/// an exhausted span yields empty=true and the caller decides (propagation
/// retries with the whole sentence before giving up).
SentenceVector sentence_vector(const CorpusSentence& sentence,
                               const EmbeddingTable& table, SpanPolicy policy);

/// dot(a,b) / sqrt(dot(a,a) * dot(b,b)); 0 if either norm is 0.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace crowdprop
