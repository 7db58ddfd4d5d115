#include "crowdprop/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "crowdprop/errors.hpp"

namespace crowdprop {

namespace {

TokenSpan parse_span(const nlohmann::json& value, std::size_t token_count,
                     const std::string& context, const char* field) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number_unsigned() ||
      !value[1].is_number_unsigned()) {
    throw ValidationError(context + ": " + field +
                          " must be a [begin, end] pair of token indices");
  }
  TokenSpan span{value[0].get<std::size_t>(), value[1].get<std::size_t>()};
  if (span.begin > span.end || span.end >= token_count) {
    throw ValidationError(context + ": " + field + " [" + std::to_string(span.begin) +
                          ", " + std::to_string(span.end) +
                          "] outside token range of size " + std::to_string(token_count));
  }
  return span;
}

bool spans_overlap(const TokenSpan& a, const TokenSpan& b) {
  return !(a.end < b.begin || b.end < a.begin);
}

CorpusSentence parse_sentence(const nlohmann::json& doc,
                              const RelationInventory& inventory,
                              const CorpusReadOptions& options,
                              const std::string& context) {
  CorpusSentence sentence;
  if (!doc.is_object()) throw ValidationError(context + ": expected a JSON object");
  try {
    sentence.id = doc.at("id").get<std::string>();
    sentence.tokens = doc.at("tokens").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(context + ": " + e.what());
  }
  if (sentence.id.empty()) throw ValidationError(context + ": empty sentence id");
  if (sentence.tokens.empty()) throw ValidationError(context + ": empty token list");

  if (!doc.contains("term1") || !doc.contains("term2")) {
    throw ValidationError(context + ": term1 and term2 spans are required");
  }
  sentence.term1 = parse_span(doc.at("term1"), sentence.tokens.size(), context, "term1");
  sentence.term2 = parse_span(doc.at("term2"), sentence.tokens.size(), context, "term2");
  if (spans_overlap(sentence.term1, sentence.term2)) {
    throw ValidationError(context + ": term spans overlap");
  }

  sentence.ds_labels.assign(inventory.named_count(), 0);
  if (doc.contains("ds_labels")) {
    const auto& labels = doc.at("ds_labels");
    if (!labels.is_array()) {
      throw ValidationError(context + ": ds_labels must be a list of relation names");
    }
    for (const auto& entry : labels) {
      const std::string name = entry.get<std::string>();
      const auto rel = inventory.index_of(name);
      if (!rel || *rel == inventory.none_index()) {
        throw ValidationError(context + ": '" + name + "' is not a valid corpus label");
      }
      if (sentence.ds_labels[*rel]) {
        throw ValidationError(context + ": duplicate ds label '" + name + "'");
      }
      sentence.ds_labels[*rel] = 1;
    }
  }
  if (options.require_ds_label) {
    bool any = false;
    for (std::uint8_t l : sentence.ds_labels) any = any || l != 0;
    if (!any) {
      throw ValidationError(context + ": DS corpus sentence has no positive ds label");
    }
  }

  if (doc.contains("scores")) {
    const auto& scores = doc.at("scores");
    if (!scores.is_object()) {
      throw ValidationError(context + ": scores must map relation names to values");
    }
    sentence.scores.assign(inventory.named_count(), 0.0);
    for (const auto& [name, value] : scores.items()) {
      const auto rel = inventory.index_of(name);
      if (!rel || *rel == inventory.none_index()) {
        throw ValidationError(context + ": '" + name + "' is not a valid score relation");
      }
      sentence.scores[*rel] = value.get<double>();
    }
  }
  return sentence;
}

std::vector<CorpusSentence> parse_lines(std::istream& in,
                                        const RelationInventory& inventory,
                                        const CorpusReadOptions& options,
                                        const std::string& source_name) {
  std::vector<CorpusSentence> corpus;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string context = source_name + ":" + std::to_string(line_number);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(context + ": invalid JSON: " + e.what());
    }
    CorpusSentence sentence = parse_sentence(doc, inventory, options, context);
    if (!seen_ids.insert(sentence.id).second) {
      throw ValidationError(context + ": duplicate sentence id '" + sentence.id + "'");
    }
    corpus.push_back(std::move(sentence));
  }
  return corpus;
}

}  // namespace

std::vector<CorpusSentence> read_corpus(const std::string& path,
                                        const RelationInventory& inventory,
                                        const CorpusReadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path);
  return parse_lines(in, inventory, options, path);
}

std::vector<CorpusSentence> parse_corpus(const std::string& jsonl,
                                         const RelationInventory& inventory,
                                         const CorpusReadOptions& options,
                                         const std::string& source_name) {
  std::istringstream in(jsonl);
  return parse_lines(in, inventory, options, source_name);
}

}  // namespace crowdprop
