#include "crowdprop/crowdtruth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crowdprop/errors.hpp"
#include "crowdprop/json_writer.hpp"

namespace crowdprop {

namespace {

// Cosine of two binary choice vectors: shared picks over the geometric mean
// of the pick counts. Computed as sqrt of the product so that identical
// vectors give exactly 1.0.
double binary_cosine(const std::vector<std::uint8_t>& a, std::size_t count_a,
                     const std::vector<std::uint8_t>& b, std::size_t count_b) {
  std::size_t common = 0;
  for (std::size_t i = 0; i < a.size(); ++i) common += a[i] & b[i];
  if (common == 0) return 0.0;
  return static_cast<double>(common) /
         std::sqrt(static_cast<double>(count_a * count_b));
}

// Cosine between a binary vector and a real-valued aggregate; 0 when the
// aggregate is all zero.
double mixed_cosine(const std::vector<std::uint8_t>& a, std::size_t count_a,
                    const std::vector<double>& b) {
  double dot = 0.0;
  double norm_b_sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i]) dot += b[i];
    norm_b_sq += b[i] * b[i];
  }
  if (norm_b_sq == 0.0) return 0.0;
  const double denom = std::sqrt(static_cast<double>(count_a) * norm_b_sq);
  if (denom == 0.0) return 0.0;
  return dot / denom;
}

// Weighted mean with an unweighted fallback when every weight is zero.
struct MeanAccumulator {
  double weighted_sum = 0.0;
  double weight_total = 0.0;
  double plain_sum = 0.0;
  std::size_t count = 0;

  void add(double value, double weight) {
    weighted_sum += weight * value;
    weight_total += weight;
    plain_sum += value;
    ++count;
  }
  bool empty() const { return count == 0; }
  double mean(double no_evidence_value) const {
    if (count == 0) return no_evidence_value;
    if (weight_total > 0.0) return weighted_sum / weight_total;
    return plain_sum / static_cast<double>(count);
  }
};

struct Workspace {
  // Map ids to dense indices, both in ascending id order.
  std::vector<std::string> sentence_ids;
  std::vector<std::string> worker_ids;
  std::vector<std::vector<std::size_t>> sentence_rows;  // row indices per sentence
  std::vector<std::vector<std::size_t>> worker_rows;    // row indices per worker
  std::vector<std::size_t> row_worker;                  // row -> dense worker index
  std::vector<std::size_t> row_sentence;                // row -> dense sentence index
  std::vector<std::size_t> row_count;                   // row -> number of picks
};

Workspace build_workspace(const AnnotationMatrix& matrix) {
  Workspace ws;
  ws.row_worker.resize(matrix.row_count());
  ws.row_sentence.resize(matrix.row_count());
  ws.row_count.resize(matrix.row_count());
  for (const auto& [sentence_id, rows] : matrix.by_sentence()) {
    ws.sentence_ids.push_back(sentence_id);
    ws.sentence_rows.push_back(rows);
    for (std::size_t r : rows) ws.row_sentence[r] = ws.sentence_ids.size() - 1;
  }
  for (const auto& [worker_id, rows] : matrix.by_worker()) {
    ws.worker_ids.push_back(worker_id);
    ws.worker_rows.push_back(rows);
    for (std::size_t r : rows) ws.row_worker[r] = ws.worker_ids.size() - 1;
  }
  for (std::size_t r = 0; r < matrix.row_count(); ++r) {
    ws.row_count[r] = matrix.rows()[r].choice_count();
  }
  return ws;
}

}  // namespace

double QualityScores::srs_value(const std::string& sentence_id,
                                std::size_t relation) const {
  auto it = srs.find(sentence_id);
  if (it == srs.end()) {
    throw ValidationError("unknown sentence id '" + sentence_id + "'");
  }
  return it->second.at(relation);
}

QualityScores compute_quality_scores(const AnnotationMatrix& matrix,
                                     const RelationInventory& inventory,
                                     const FixedPointConfig& config) {
  if (matrix.row_count() == 0) {
    throw ValidationError("annotation matrix is empty");
  }
  if (!(config.tolerance > 0.0)) {
    throw ValidationError("fixed-point tolerance must be positive");
  }
  if (config.max_iterations < 1) {
    throw ValidationError("max_iterations must be at least 1");
  }

  const Workspace ws = build_workspace(matrix);
  const std::vector<WorkerVector>& rows = matrix.rows();
  const std::size_t n_sentences = ws.sentence_ids.size();
  const std::size_t n_workers = ws.worker_ids.size();
  const std::size_t n_relations = inventory.size();

  std::vector<double> wq(n_workers, 1.0);
  std::vector<double> sq(n_sentences, 1.0);
  std::vector<double> rq(n_relations, 1.0);

  QualityScores result;

  // Workers that never share a sentence keep quality 1 by definition.
  std::vector<bool> worker_shares(n_workers, false);
  for (std::size_t s = 0; s < n_sentences; ++s) {
    if (ws.sentence_rows[s].size() < 2) continue;
    for (std::size_t r : ws.sentence_rows[s]) worker_shares[ws.row_worker[r]] = true;
  }
  for (std::size_t w = 0; w < n_workers; ++w) {
    if (!worker_shares[w]) {
      result.notes.push_back("worker '" + ws.worker_ids[w] +
                             "' shares no sentence with another worker; "
                             "worker_quality fixed at 1");
    }
  }

  std::vector<double> next_wq(n_workers), next_sq(n_sentences), next_rq(n_relations);
  std::vector<double> aggregate(n_relations);

  int iteration = 0;
  bool converged = false;
  while (iteration < config.max_iterations) {
    ++iteration;
    double max_change = 0.0;

    // (a) sentence quality: mean pairwise choice-vector cosine, each pair
    // weighted by both workers' quality.
    // (c) relation quality: over the same pairs, both-picked agreement for
    // every relation at least one of the two picked.
    std::vector<MeanAccumulator> relation_acc(n_relations);
    for (std::size_t s = 0; s < n_sentences; ++s) {
      const auto& sentence_rows = ws.sentence_rows[s];
      if (sentence_rows.size() < 2) {
        next_sq[s] = 1.0;  // single worker: no disagreement evidence
        continue;
      }
      MeanAccumulator acc;
      for (std::size_t i = 0; i < sentence_rows.size(); ++i) {
        const std::size_t ri = sentence_rows[i];
        for (std::size_t j = i + 1; j < sentence_rows.size(); ++j) {
          const std::size_t rj = sentence_rows[j];
          const double weight = wq[ws.row_worker[ri]] * wq[ws.row_worker[rj]];
          const double c = binary_cosine(rows[ri].choices, ws.row_count[ri],
                                         rows[rj].choices, ws.row_count[rj]);
          acc.add(c, weight);
          for (std::size_t rel = 0; rel < n_relations; ++rel) {
            const bool a = rows[ri].picked(rel);
            const bool b = rows[rj].picked(rel);
            if (a || b) relation_acc[rel].add((a && b) ? 1.0 : 0.0, weight);
          }
        }
      }
      next_sq[s] = acc.mean(1.0);
    }
    for (std::size_t rel = 0; rel < n_relations; ++rel) {
      next_rq[rel] = relation_acc[rel].mean(1.0);
    }

    // (b) worker quality: cosine against the quality-weighted sum of the
    // other workers' vectors, per shared sentence, weighted by sentence
    // quality. Reads the previous iteration's values throughout.
    for (std::size_t w = 0; w < n_workers; ++w) {
      MeanAccumulator acc;
      for (std::size_t rw : ws.worker_rows[w]) {
        const std::size_t s = ws.row_sentence[rw];
        const auto& sentence_rows = ws.sentence_rows[s];
        if (sentence_rows.size() < 2) continue;
        std::fill(aggregate.begin(), aggregate.end(), 0.0);
        for (std::size_t other : sentence_rows) {
          if (other == rw) continue;
          const double weight = wq[ws.row_worker[other]];
          const auto& choices = rows[other].choices;
          for (std::size_t rel = 0; rel < n_relations; ++rel) {
            if (choices[rel]) aggregate[rel] += weight;
          }
        }
        const double c = mixed_cosine(rows[rw].choices, ws.row_count[rw], aggregate);
        acc.add(c, sq[s]);
      }
      next_wq[w] = acc.mean(1.0);
    }

    for (std::size_t s = 0; s < n_sentences; ++s) {
      max_change = std::max(max_change, std::fabs(next_sq[s] - sq[s]));
    }
    for (std::size_t w = 0; w < n_workers; ++w) {
      max_change = std::max(max_change, std::fabs(next_wq[w] - wq[w]));
    }
    for (std::size_t rel = 0; rel < n_relations; ++rel) {
      max_change = std::max(max_change, std::fabs(next_rq[rel] - rq[rel]));
    }

    sq = next_sq;
    wq = next_wq;
    rq = next_rq;

    if (max_change < config.tolerance) {
      converged = true;
      break;
    }
  }

  result.iterations = iteration;
  result.converged = converged;
  for (std::size_t w = 0; w < n_workers; ++w) {
    result.worker_quality[ws.worker_ids[w]] = wq[w];
  }
  for (std::size_t s = 0; s < n_sentences; ++s) {
    result.sentence_quality[ws.sentence_ids[s]] = sq[s];
  }
  result.relation_quality = rq;

  // srs from the converged worker qualities; one pass per sentence so the
  // numerator and denominator accumulate in the same order.
  for (std::size_t s = 0; s < n_sentences; ++s) {
    std::vector<double>& srs_row =
        result.srs.emplace(ws.sentence_ids[s], std::vector<double>(n_relations, 0.0))
            .first->second;
    for (std::size_t rel = 0; rel < n_relations; ++rel) {
      double num = 0.0;
      double den = 0.0;
      for (std::size_t r : ws.sentence_rows[s]) {
        const double quality = wq[ws.row_worker[r]];
        den += quality;
        if (rows[r].picked(rel)) num += quality;
      }
      double value = den > 0.0 ? num / den : 0.0;
      if (config.srs_relation_weighting == SrsRelationWeighting::kPerChoice) {
        value *= rq[rel];
      }
      srs_row[rel] = value;
    }
  }

  return result;
}

double sentence_relation_score(const AnnotationMatrix& matrix,
                               const QualityScores& quality,
                               const std::string& sentence_id,
                               std::size_t relation,
                               SrsRelationWeighting weighting) {
  auto it = matrix.by_sentence().find(sentence_id);
  if (it == matrix.by_sentence().end()) {
    throw ValidationError("unknown sentence id '" + sentence_id + "'");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t r : it->second) {
    const WorkerVector& row = matrix.rows()[r];
    const double wq = quality.worker_quality.at(row.worker_id);
    den += wq;
    if (row.picked(relation)) num += wq;
  }
  double value = den > 0.0 ? num / den : 0.0;
  if (weighting == SrsRelationWeighting::kPerChoice) {
    value *= quality.relation_quality.at(relation);
  }
  return value;
}

std::map<std::string, std::vector<double>> unweighted_srs(
    const AnnotationMatrix& matrix, const RelationInventory& inventory) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [sentence_id, row_indices] : matrix.by_sentence()) {
    std::vector<double> ratios(inventory.size(), 0.0);
    for (std::size_t rel = 0; rel < inventory.size(); ++rel) {
      std::size_t picked = 0;
      for (std::size_t r : row_indices) {
        if (matrix.rows()[r].picked(rel)) ++picked;
      }
      ratios[rel] = static_cast<double>(picked) / static_cast<double>(row_indices.size());
    }
    out.emplace(sentence_id, std::move(ratios));
  }
  return out;
}

namespace {

void write_srs_map(JsonWriter& json,
                   const std::map<std::string, std::vector<double>>& srs,
                   const RelationInventory& inventory) {
  json.begin_object();
  for (const auto& [sentence_id, values] : srs) {
    json.key(sentence_id).begin_object();
    for (std::size_t rel = 0; rel < values.size(); ++rel) {
      json.key(inventory.name(rel)).value(values[rel]);
    }
    json.end_object();
  }
  json.end_object();
}

}  // namespace

std::string quality_scores_to_json(
    const QualityScores& quality, const RelationInventory& inventory,
    const std::map<std::string, std::vector<double>>* debug_unweighted_srs) {
  JsonWriter json;
  json.begin_object();
  json.key("worker_quality").begin_object();
  for (const auto& [id, value] : quality.worker_quality) json.key(id).value(value);
  json.end_object();
  json.key("sentence_quality").begin_object();
  for (const auto& [id, value] : quality.sentence_quality) json.key(id).value(value);
  json.end_object();
  json.key("relation_quality").begin_object();
  for (std::size_t rel = 0; rel < quality.relation_quality.size(); ++rel) {
    json.key(inventory.name(rel)).value(quality.relation_quality[rel]);
  }
  json.end_object();
  json.key("srs");
  write_srs_map(json, quality.srs, inventory);
  if (debug_unweighted_srs != nullptr) {
    json.key("srs_unweighted");
    write_srs_map(json, *debug_unweighted_srs, inventory);
  }
  json.key("iterations").value(quality.iterations);
  json.key("converged").value(quality.converged);
  json.end_object();
  std::string out = json.take();
  out += '\n';
  return out;
}

void write_quality_scores(const QualityScores& quality,
                          const RelationInventory& inventory,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << quality_scores_to_json(quality, inventory);
  if (!out) throw IoError("failed writing quality file: " + path);
}

QualityScores read_quality_scores(const std::string& path,
                                  const RelationInventory& inventory) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open quality file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }

  QualityScores quality;
  try {
    for (const auto& [id, value] : doc.at("worker_quality").items()) {
      quality.worker_quality[id] = value.get<double>();
    }
    for (const auto& [id, value] : doc.at("sentence_quality").items()) {
      quality.sentence_quality[id] = value.get<double>();
    }
    const auto& rq = doc.at("relation_quality");
    if (rq.size() != inventory.size()) {
      throw ValidationError(path + ": relation_quality lists " +
                            std::to_string(rq.size()) + " relations, inventory has " +
                            std::to_string(inventory.size()));
    }
    quality.relation_quality.assign(inventory.size(), 0.0);
    for (const auto& [name, value] : rq.items()) {
      const auto rel = inventory.index_of(name);
      if (!rel) {
        throw ValidationError(path + ": relation '" + name + "' not in inventory");
      }
      quality.relation_quality[*rel] = value.get<double>();
    }
    for (const auto& [sentence_id, srs_row] : doc.at("srs").items()) {
      std::vector<double> values(inventory.size(), 0.0);
      if (srs_row.size() != inventory.size()) {
        throw ValidationError(path + ": srs for '" + sentence_id + "' lists " +
                              std::to_string(srs_row.size()) +
                              " relations, inventory has " +
                              std::to_string(inventory.size()));
      }
      for (const auto& [name, value] : srs_row.items()) {
        const auto rel = inventory.index_of(name);
        if (!rel) {
          throw ValidationError(path + ": relation '" + name + "' not in inventory");
        }
        values[*rel] = value.get<double>();
      }
      quality.srs.emplace(sentence_id, std::move(values));
    }
    quality.iterations = doc.at("iterations").get<int>();
    quality.converged = doc.at("converged").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": malformed quality document: " + e.what());
  }
  return quality;
}

}  // namespace crowdprop
