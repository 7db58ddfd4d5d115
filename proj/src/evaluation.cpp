#include "crowdprop/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "crowdprop/errors.hpp"
#include "crowdprop/json_writer.hpp"

namespace crowdprop {

PrCurve pr_curve(const std::vector<ScoredPair>& pairs, double gold_threshold) {
  if (pairs.empty()) {
    throw ValidationError("pr_curve: no scored pairs");
  }
  if (!(gold_threshold > 0.0 && gold_threshold < 1.0)) {
    throw ValidationError("gold threshold must lie strictly between 0 and 1");
  }

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pairs[a].predicted > pairs[b].predicted;
  });

  {
    std::set<std::pair<std::string, std::size_t>> seen;
    for (const ScoredPair& pair : pairs) {
      if (!seen.emplace(pair.sentence_id, pair.relation).second) {
        throw ValidationError("duplicate (sentence, relation) pair: (" +
                              pair.sentence_id + ", " +
                              std::to_string(pair.relation) + ")");
      }
    }
  }

  std::size_t gold_positives = 0;
  for (const ScoredPair& pair : pairs) {
    if (pair.gold_srs >= gold_threshold) ++gold_positives;
  }
  if (gold_positives == 0) {
    throw ValidationError("no gold positives at threshold " +
                          JsonWriter::format_double(gold_threshold) +
                          "; AUC is undefined");
  }

  PrCurve curve;
  curve.gold_positives = gold_positives;
  curve.pair_count = pairs.size();

  // One point per distinct predicted score; pairs sharing a score enter the
  // positive set together (cut semantics: predicted >= threshold).
  std::size_t tp = 0;
  std::size_t taken = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double cut = pairs[order[i]].predicted;
    while (i < order.size() && pairs[order[i]].predicted == cut) {
      if (pairs[order[i]].gold_srs >= gold_threshold) ++tp;
      ++taken;
      ++i;
    }
    PrPoint point;
    point.threshold = cut;
    point.precision = static_cast<double>(tp) / static_cast<double>(taken);
    point.recall = static_cast<double>(tp) / static_cast<double>(gold_positives);
    curve.points.push_back(point);
  }

  // Trapezoid over the recall axis, extended to recall 0 at the precision of
  // the highest cut.
  double auc = 0.0;
  double prev_recall = 0.0;
  double prev_precision = curve.points.front().precision;
  for (const PrPoint& point : curve.points) {
    auc += (point.recall - prev_recall) * (point.precision + prev_precision) / 2.0;
    prev_recall = point.recall;
    prev_precision = point.precision;
  }
  curve.auc = auc;
  return curve;
}

std::map<std::string, double> cosine_eval(const std::vector<ScoredPair>& pairs,
                                          std::size_t relation_count) {
  struct SentenceVectors {
    std::vector<double> predicted;
    std::vector<double> gold;
    std::vector<bool> present;
  };
  std::map<std::string, SentenceVectors> grouped;
  for (const ScoredPair& pair : pairs) {
    if (pair.relation >= relation_count) {
      throw ValidationError("relation index " + std::to_string(pair.relation) +
                            " out of range");
    }
    auto [it, inserted] = grouped.try_emplace(pair.sentence_id);
    if (inserted) {
      it->second.predicted.assign(relation_count, 0.0);
      it->second.gold.assign(relation_count, 0.0);
      it->second.present.assign(relation_count, false);
    }
    it->second.predicted[pair.relation] = pair.predicted;
    it->second.gold[pair.relation] = pair.gold_srs;
    it->second.present[pair.relation] = true;
  }

  std::map<std::string, double> cosines;
  for (const auto& [sentence_id, vectors] : grouped) {
    for (std::size_t r = 0; r < relation_count; ++r) {
      if (!vectors.present[r]) {
        throw ValidationError("sentence '" + sentence_id + "' is missing relation " +
                              std::to_string(r) + " in the scored pairs");
      }
    }
    double dot = 0.0;
    double norm_p = 0.0;
    double norm_g = 0.0;
    for (std::size_t r = 0; r < relation_count; ++r) {
      dot += vectors.predicted[r] * vectors.gold[r];
      norm_p += vectors.predicted[r] * vectors.predicted[r];
      norm_g += vectors.gold[r] * vectors.gold[r];
    }
    const double cosine =
        (norm_p == 0.0 || norm_g == 0.0) ? 0.0 : dot / std::sqrt(norm_p * norm_g);
    cosines.emplace(sentence_id, cosine);
  }
  return cosines;
}

std::vector<std::optional<double>> false_positive_ratio(
    const std::vector<CorpusSentence>& crowd_corpus,
    const QualityScores& quality, const RelationInventory& inventory,
    double gold_threshold) {
  if (!(gold_threshold > 0.0 && gold_threshold < 1.0)) {
    throw ValidationError("gold threshold must lie strictly between 0 and 1");
  }
  const std::size_t named = inventory.named_count();
  std::vector<std::size_t> ds_positive(named, 0);
  std::vector<std::size_t> below_threshold(named, 0);
  for (const CorpusSentence& sentence : crowd_corpus) {
    bool any = false;
    for (std::uint8_t label : sentence.ds_labels) any = any || label != 0;
    if (!any) {
      throw ValidationError("crowd sentence '" + sentence.id +
                            "' has no DS seed label; cannot compute fp ratios");
    }
    auto it = quality.srs.find(sentence.id);
    if (it == quality.srs.end()) {
      throw ValidationError("crowd sentence '" + sentence.id +
                            "' has no srs entry in the quality scores");
    }
    for (std::size_t r = 0; r < named; ++r) {
      if (!sentence.ds_positive(r)) continue;
      ds_positive[r] += 1;
      if (it->second[r] < gold_threshold) below_threshold[r] += 1;
    }
  }

  std::vector<std::optional<double>> ratios(named);
  for (std::size_t r = 0; r < named; ++r) {
    if (ds_positive[r] == 0) continue;  // undefined: no DS positives
    ratios[r] = static_cast<double>(below_threshold[r]) /
                static_cast<double>(ds_positive[r]);
  }
  return ratios;
}

ScoreFile read_score_file(const std::string& path, const RelationInventory& inventory) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open score file: " + path);

  ScoreFile scores;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string context = path + ":" + std::to_string(line_number);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(context + ": invalid JSON: " + e.what());
    }
    std::string id;
    try {
      id = doc.at("id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(context + ": " + e.what());
    }
    if (scores.count(id)) {
      throw ValidationError(context + ": duplicate sentence id '" + id + "'");
    }
    if (!doc.contains("scores") || !doc.at("scores").is_object()) {
      throw ValidationError(context + ": missing scores object");
    }
    std::vector<double> values(inventory.named_count(), 0.0);
    std::vector<bool> present(inventory.named_count(), false);
    for (const auto& [name, value] : doc.at("scores").items()) {
      const auto rel = inventory.index_of(name);
      if (!rel || *rel == inventory.none_index()) {
        throw ValidationError(context + ": '" + name + "' is not a scoreable relation");
      }
      const double v = value.get<double>();
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError(context + ": score for '" + name +
                              "' outside [0,1]: " + JsonWriter::format_double(v));
      }
      values[*rel] = v;
      present[*rel] = true;
    }
    for (std::size_t r = 0; r < inventory.named_count(); ++r) {
      if (!present[r]) {
        throw ValidationError(context + ": sentence '" + id +
                              "' is missing a score for '" + inventory.name(r) + "'");
      }
    }
    scores.emplace(std::move(id), std::move(values));
  }
  if (scores.empty()) {
    throw ValidationError(path + ": no score records");
  }
  return scores;
}

std::vector<ScoredPair> join_scored_pairs(const ScoreFile& predictions,
                                          const ScoreFile& gold,
                                          const RelationInventory& inventory) {
  std::vector<std::string> orphans;
  for (const auto& [id, _] : predictions) {
    if (!gold.count(id)) orphans.push_back(id + " (predictions only)");
  }
  for (const auto& [id, _] : gold) {
    if (!predictions.count(id)) orphans.push_back(id + " (gold only)");
  }
  if (!orphans.empty()) {
    std::string message = "prediction/gold sentence ids do not match; " +
                          std::to_string(orphans.size()) + " orphans:";
    const std::size_t shown = std::min<std::size_t>(orphans.size(), 10);
    for (std::size_t i = 0; i < shown; ++i) message += "\n  " + orphans[i];
    throw ValidationError(message);
  }

  std::vector<ScoredPair> pairs;
  pairs.reserve(predictions.size() * inventory.named_count());
  for (const auto& [id, predicted] : predictions) {
    const std::vector<double>& gold_row = gold.at(id);
    for (std::size_t r = 0; r < inventory.named_count(); ++r) {
      pairs.push_back(ScoredPair{id, r, predicted[r], gold_row[r]});
    }
  }
  return pairs;
}

std::string eval_report_to_json(const EvalReport& report) {
  JsonWriter json;
  json.begin_object();
  json.key("pairs").value(report.pr.pair_count);
  json.key("sentences").value(report.sentences);
  json.key("gold_threshold").value(report.gold_threshold);
  json.key("gold_positives").value(report.pr.gold_positives);
  json.key("auc").value(report.pr.auc);
  json.key("pr_curve").begin_array();
  for (const PrPoint& point : report.pr.points) {
    json.begin_object();
    json.key("threshold").value(point.threshold);
    json.key("precision").value(point.precision);
    json.key("recall").value(point.recall);
    json.end_object();
  }
  json.end_array();
  json.key("cosine_per_sentence").begin_object();
  for (const auto& [id, cosine] : report.cosine_per_sentence) {
    json.key(id).value(cosine);
  }
  json.end_object();
  json.end_object();
  std::string out = json.take();
  out += '\n';
  return out;
}

std::string pr_curve_to_csv(const PrCurve& curve) {
  std::string out = "threshold,precision,recall\n";
  for (const PrPoint& point : curve.points) {
    out += JsonWriter::format_double(point.threshold);
    out += ',';
    out += JsonWriter::format_double(point.precision);
    out += ',';
    out += JsonWriter::format_double(point.recall);
    out += '\n';
  }
  return out;
}

std::string cosine_eval_to_csv(const std::map<std::string, double>& cosines) {
  std::string out = "sentence_id,cosine\n";
  for (const auto& [id, cosine] : cosines) {
    out += id;
    out += ',';
    out += JsonWriter::format_double(cosine);
    out += '\n';
  }
  return out;
}

std::string fp_ratio_to_json(const std::vector<std::optional<double>>& ratios,
                             const RelationInventory& inventory,
                             double gold_threshold) {
  JsonWriter json;
  json.begin_object();
  json.key("gold_threshold").value(gold_threshold);
  json.key("fp_ratio").begin_object();
  for (std::size_t r = 0; r < ratios.size(); ++r) {
    json.key(inventory.name(r));
    if (ratios[r]) {
      json.value(*ratios[r]);
    } else {
      json.null();
    }
  }
  json.end_object();
  json.end_object();
  std::string out = json.take();
  out += '\n';
  return out;
}

std::string fp_ratio_to_csv(const std::vector<std::optional<double>>& ratios,
                            const RelationInventory& inventory) {
  std::string out = "relation,fp_ratio\n";
  for (std::size_t r = 0; r < ratios.size(); ++r) {
    out += inventory.name(r);
    out += ',';
    if (ratios[r]) out += JsonWriter::format_double(*ratios[r]);
    out += '\n';
  }
  return out;
}

}  // namespace crowdprop
