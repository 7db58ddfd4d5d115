#include "crowdprop/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/Dense>

#include "crowdprop/errors.hpp"
#include "crowdprop/json_writer.hpp"
#include "crowdprop/parallel.hpp"

namespace crowdprop {

namespace {

// Sentences are relabeled in fixed-size blocks; block boundaries are
// independent of the thread count so output bytes never change with it.
constexpr std::size_t kBlockSize = 256;

double vector_norm(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

}  // namespace

LabeledIndex LabeledIndex::build(std::vector<SentenceVector> vectors) {
  if (vectors.empty()) {
    throw ValidationError("labeled index needs at least one sentence vector");
  }
  std::sort(vectors.begin(), vectors.end(),
            [](const SentenceVector& a, const SentenceVector& b) {
              return a.sentence_id < b.sentence_id;
            });

  LabeledIndex index;
  index.dimension_ = vectors.front().values.size();
  index.ids_.reserve(vectors.size());
  index.columns_.resize(index.dimension_ * vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const SentenceVector& v = vectors[i];
    if (v.empty) {
      throw ValidationError("labeled sentence '" + v.sentence_id +
                            "' has an empty vector");
    }
    if (v.values.size() != index.dimension_) {
      throw ValidationError("labeled sentence '" + v.sentence_id +
                            "' has mismatched dimension");
    }
    if (i > 0 && v.sentence_id == index.ids_.back()) {
      throw ValidationError("duplicate labeled sentence id '" + v.sentence_id + "'");
    }
    const double norm = vector_norm(v.values);
    double* column = index.columns_.data() + i * index.dimension_;
    for (std::size_t d = 0; d < index.dimension_; ++d) {
      column[d] = v.values[d] / norm;
    }
    index.ids_.push_back(v.sentence_id);
  }
  return index;
}

std::pair<std::size_t, double> LabeledIndex::nearest(std::span<const double> query) const {
  if (query.size() != dimension_) {
    throw ValidationError("query dimension " + std::to_string(query.size()) +
                          " does not match index dimension " +
                          std::to_string(dimension_));
  }
  const double norm = vector_norm(query);
  if (norm == 0.0) {
    throw ValidationError("cannot search with an all-zero query vector");
  }

  Eigen::VectorXd unit(static_cast<Eigen::Index>(dimension_));
  for (std::size_t d = 0; d < dimension_; ++d) unit[static_cast<Eigen::Index>(d)] = query[d] / norm;

  Eigen::Map<const Eigen::MatrixXd> columns(
      columns_.data(), static_cast<Eigen::Index>(dimension_),
      static_cast<Eigen::Index>(ids_.size()));
  const Eigen::VectorXd sims = columns.transpose() * unit;

  // Entries are id-sorted, so the strict > keeps the smallest id on ties.
  std::size_t best = 0;
  double best_sim = sims[0];
  for (std::size_t i = 1; i < ids_.size(); ++i) {
    const double s = sims[static_cast<Eigen::Index>(i)];
    if (s > best_sim) {
      best_sim = s;
      best = i;
    }
  }
  return {best, best_sim};
}

std::pair<std::string, double> nearest_labeled(const SentenceVector& query,
                                               const LabeledIndex& labeled) {
  if (query.empty) {
    throw ValidationError("cannot search with an empty sentence vector");
  }
  const auto [index, similarity] = labeled.nearest(query.values);
  return {labeled.id(index), similarity};
}

std::vector<double> blend_scores(const std::vector<std::uint8_t>& ds_labels,
                                 std::span<const double> neighbor_srs,
                                 double similarity) {
  if (ds_labels.size() != neighbor_srs.size()) {
    throw ValidationError("ds label and srs vector sizes differ");
  }
  std::vector<double> scores(ds_labels.size());
  for (std::size_t r = 0; r < ds_labels.size(); ++r) {
    const double ds = ds_labels[r] ? 1.0 : 0.0;
    scores[r] = (ds + similarity * neighbor_srs[r]) / (1.0 + similarity);
  }
  return scores;
}

PropagationResult propagate_sentence(const CorpusSentence& sentence,
                                     const std::string& neighbor_id,
                                     std::span<const double> neighbor_srs,
                                     double raw_similarity,
                                     bool clamp_similarity) {
  PropagationResult result;
  result.id = sentence.id;
  result.neighbor = neighbor_id;
  result.similarity = raw_similarity;
  result.clamped_similarity =
      clamp_similarity ? std::max(0.0, raw_similarity) : raw_similarity;
  result.scores = blend_scores(sentence.ds_labels, neighbor_srs,
                               result.clamped_similarity);
  result.propagated = true;
  return result;
}

namespace {

PropagationResult unpropagated_result(const CorpusSentence& sentence) {
  PropagationResult result;
  result.id = sentence.id;
  result.propagated = false;
  result.scores.reserve(sentence.ds_labels.size());
  for (std::uint8_t label : sentence.ds_labels) {
    result.scores.push_back(label ? 1.0 : 0.0);
  }
  return result;
}

std::size_t histogram_bin(double similarity) {
  // 20 uniform bins over [-1, 1]; the top edge belongs to the last bin.
  const double shifted = (similarity + 1.0) / 2.0 * 20.0;
  const auto bin = static_cast<std::ptrdiff_t>(shifted);
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(bin, 0, 19));
}

}  // namespace

PropagationOutput propagate_corpus(const std::vector<CorpusSentence>& ds_corpus,
                                   const std::vector<CorpusSentence>& crowd_corpus,
                                   const QualityScores& crowd_quality,
                                   const RelationInventory& inventory,
                                   const EmbeddingTable& table,
                                   const PropagationConfig& config) {
  if (crowd_corpus.empty()) {
    throw ValidationError("crowd corpus is empty");
  }

  PropagationOutput output;
  output.report.total = ds_corpus.size();
  output.report.labeled_total = crowd_corpus.size();

  // srs rows for the 16 named relations, aligned with the labeled index.
  const std::size_t named = inventory.named_count();
  std::vector<SentenceVector> labeled_vectors;
  std::vector<std::vector<double>> labeled_srs;
  {
    std::vector<std::pair<SentenceVector, std::vector<double>>> entries;
    for (const CorpusSentence& sentence : crowd_corpus) {
      auto it = crowd_quality.srs.find(sentence.id);
      if (it == crowd_quality.srs.end()) {
        throw ValidationError("crowd sentence '" + sentence.id +
                              "' has no srs entry in the quality scores");
      }
      if (it->second.size() != inventory.size()) {
        throw ValidationError("srs for '" + sentence.id +
                              "' does not match the relation inventory");
      }
      SentenceVector vec = sentence_vector(sentence, table, config.span_policy);
      if (vec.empty && config.span_policy == SpanPolicy::kBetweenTerms) {
        vec = sentence_vector(sentence, table, SpanPolicy::kWholeSentence);
      }
      if (vec.empty) {
        output.report.labeled_skipped_empty += 1;
        continue;
      }
      entries.emplace_back(std::move(vec),
                           std::vector<double>(it->second.begin(),
                                               it->second.begin() + static_cast<std::ptrdiff_t>(named)));
    }
    if (entries.empty()) {
      throw ValidationError(
          "no crowd sentence has an in-vocabulary sentence vector; nothing to index");
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return a.first.sentence_id < b.first.sentence_id;
    });
    labeled_vectors.reserve(entries.size());
    labeled_srs.reserve(entries.size());
    for (auto& [vec, srs] : entries) {
      labeled_vectors.push_back(std::move(vec));
      labeled_srs.push_back(std::move(srs));
    }
  }
  const LabeledIndex index = LabeledIndex::build(std::move(labeled_vectors));

  output.results.resize(ds_corpus.size());
  std::vector<std::uint8_t> fell_back(ds_corpus.size(), 0);

  parallel_for_blocks(
      ds_corpus.size(), config.threads, kBlockSize,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const CorpusSentence& sentence = ds_corpus[i];
          SentenceVector vec = sentence_vector(sentence, table, config.span_policy);
          if (vec.empty && config.span_policy == SpanPolicy::kBetweenTerms) {
            vec = sentence_vector(sentence, table, SpanPolicy::kWholeSentence);
            if (!vec.empty) fell_back[i] = 1;
          }
          if (vec.empty) {
            output.results[i] = unpropagated_result(sentence);
            continue;
          }
          const auto [neighbor, similarity] = index.nearest(vec.values);
          output.results[i] =
              propagate_sentence(sentence, index.id(neighbor), labeled_srs[neighbor],
                                 similarity, config.clamp_similarity);
        }
      });

  for (std::size_t i = 0; i < output.results.size(); ++i) {
    const PropagationResult& result = output.results[i];
    if (result.propagated) {
      output.report.propagated += 1;
      output.report.similarity_histogram[histogram_bin(result.similarity)] += 1;
      if (fell_back[i]) output.report.whole_sentence_fallbacks += 1;
    } else {
      output.report.unpropagated += 1;
    }
  }
  return output;
}

std::string propagation_result_to_json(const PropagationResult& result,
                                       const RelationInventory& inventory) {
  JsonWriter json;
  json.begin_object();
  json.key("id").value(result.id);
  if (result.propagated) {
    json.key("neighbor").value(result.neighbor);
    json.key("sim").value(result.similarity);
    json.key("sim_clamped").value(result.clamped_similarity);
  } else {
    json.key("neighbor").null();
    json.key("sim").null();
    json.key("sim_clamped").null();
  }
  json.key("scores").begin_object();
  for (std::size_t r = 0; r < result.scores.size(); ++r) {
    json.key(inventory.name(r)).value(result.scores[r]);
  }
  json.end_object();
  json.key("propagated").value(result.propagated);
  json.end_object();
  return json.take();
}

std::string propagation_results_to_jsonl(const std::vector<PropagationResult>& results,
                                         const RelationInventory& inventory) {
  std::string out;
  for (const PropagationResult& result : results) {
    out += propagation_result_to_json(result, inventory);
    out += '\n';
  }
  return out;
}

std::string propagation_report_to_json(const PropagationReport& report) {
  JsonWriter json;
  json.begin_object();
  json.key("total").value(report.total);
  json.key("propagated").value(report.propagated);
  json.key("unpropagated").value(report.unpropagated);
  json.key("whole_sentence_fallbacks").value(report.whole_sentence_fallbacks);
  json.key("labeled_total").value(report.labeled_total);
  json.key("labeled_skipped_empty").value(report.labeled_skipped_empty);
  json.key("similarity_histogram").begin_object();
  json.key("lo").value(-1.0);
  json.key("hi").value(1.0);
  json.key("bins").begin_array();
  for (std::uint64_t count : report.similarity_histogram) json.value(count);
  json.end_array();
  json.end_object();
  json.end_object();
  std::string out = json.take();
  out += '\n';
  return out;
}

void write_propagation_results(const std::vector<PropagationResult>& results,
                               const RelationInventory& inventory,
                               const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  for (const PropagationResult& result : results) {
    out << propagation_result_to_json(result, inventory) << '\n';
  }
  if (!out) throw IoError("failed writing propagation output: " + path);
}

void write_propagation_report(const PropagationReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << propagation_report_to_json(report);
  if (!out) throw IoError("failed writing propagation report: " + path);
}

}  // namespace crowdprop
