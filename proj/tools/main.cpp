// crowdprop: batch pipeline that aggregates crowd relation annotations into
// continuous sentence-relation scores, propagates them onto a distant
// supervised corpus through embedding-space nearest neighbors, and evaluates
// corpora and prediction files.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "crowdprop/annotations.hpp"
#include "crowdprop/corpus.hpp"
#include "crowdprop/crowdtruth.hpp"
#include "crowdprop/embeddings.hpp"
#include "crowdprop/errors.hpp"
#include "crowdprop/evaluation.hpp"
#include "crowdprop/json_writer.hpp"
#include "crowdprop/propagation.hpp"
#include "crowdprop/relations.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw crowdprop::IoError("cannot open output file: " + path);
  out << content;
  if (!out) throw crowdprop::IoError("failed writing output file: " + path);
}

std::string ascii_lower(const std::string& token) {
  std::string out = token;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Tokens plus their lowercase forms, so the filtered table still serves the
// lowercase-fallback lookup.
std::unordered_set<std::string> corpus_vocabulary(
    const std::vector<const std::vector<crowdprop::CorpusSentence>*>& corpora) {
  std::unordered_set<std::string> vocabulary;
  for (const auto* corpus : corpora) {
    for (const auto& sentence : *corpus) {
      for (const auto& token : sentence.tokens) {
        vocabulary.insert(token);
        vocabulary.insert(ascii_lower(token));
      }
    }
  }
  return vocabulary;
}

std::function<std::string(const std::string&)> open_interval_check(const char* name) {
  return [name](const std::string& text) -> std::string {
    try {
      const double v = std::stod(text);
      if (v > 0.0 && v < 1.0) return {};
    } catch (...) {
    }
    return std::string(name) + " must lie strictly between 0 and 1";
  };
}

crowdprop::EmbeddingFormat resolve_format(const std::string& flag, const std::string& path) {
  if (flag == "text") return crowdprop::EmbeddingFormat::kText;
  if (flag == "binary") return crowdprop::EmbeddingFormat::kBinary;
  return crowdprop::guess_embedding_format(path);
}

struct AggregateArgs {
  std::string annotations;
  std::string inventory;
  std::string output;
  std::string srs_jsonl;
  double tolerance = 1e-6;
  int max_iterations = 100;
  std::string srs_weighting = "off";
  bool debug_unweighted = false;
};

int run_aggregate(const AggregateArgs& args) {
  const auto inventory = crowdprop::RelationInventory::from_file(args.inventory);
  const auto matrix = crowdprop::parse_annotations(args.annotations, inventory);

  crowdprop::FixedPointConfig config;
  config.tolerance = args.tolerance;
  config.max_iterations = args.max_iterations;
  config.srs_relation_weighting = args.srs_weighting == "per_choice"
                                      ? crowdprop::SrsRelationWeighting::kPerChoice
                                      : crowdprop::SrsRelationWeighting::kOff;

  const auto quality = crowdprop::compute_quality_scores(matrix, inventory, config);
  for (const auto& note : quality.notes) std::cerr << "warning: " << note << "\n";
  if (!quality.converged) {
    std::cerr << "warning: fixed point did not converge within "
              << args.max_iterations << " iterations\n";
  }

  if (args.debug_unweighted) {
    const auto plain = crowdprop::unweighted_srs(matrix, inventory);
    write_text_file(args.output,
                    crowdprop::quality_scores_to_json(quality, inventory, &plain));
  } else {
    crowdprop::write_quality_scores(quality, inventory, args.output);
  }

  if (!args.srs_jsonl.empty()) {
    // Score-file form of the srs (named relations only), usable as the gold
    // side of `evaluate`.
    std::string jsonl;
    for (const auto& [sentence_id, row] : quality.srs) {
      crowdprop::JsonWriter json;
      json.begin_object();
      json.key("id").value(sentence_id);
      json.key("scores").begin_object();
      for (std::size_t r = 0; r < inventory.named_count(); ++r) {
        json.key(inventory.name(r)).value(row[r]);
      }
      json.end_object();
      json.end_object();
      jsonl += json.take();
      jsonl += '\n';
    }
    write_text_file(args.srs_jsonl, jsonl);
  }

  std::cout << "aggregated " << matrix.row_count() << " judgments: "
            << matrix.worker_count() << " workers, " << matrix.sentence_count()
            << " sentences, " << quality.iterations << " iterations, "
            << (quality.converged ? "converged" : "not converged") << "\n";
  return kExitOk;
}

struct PropagateArgs {
  std::string inventory;
  std::string embeddings;
  std::string format = "auto";
  std::string crowd;
  std::string quality;
  std::string ds;
  std::string output;
  std::string report;
  std::string span_policy = "between_terms";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  bool no_clamp = false;
};

int run_propagate(const PropagateArgs& args) {
  const auto inventory = crowdprop::RelationInventory::from_file(args.inventory);
  const auto crowd = crowdprop::read_corpus(args.crowd, inventory);
  crowdprop::CorpusReadOptions ds_options;
  ds_options.require_ds_label = true;
  const auto ds = crowdprop::read_corpus(args.ds, inventory, ds_options);
  const auto quality = crowdprop::read_quality_scores(args.quality, inventory);

  const auto vocabulary = corpus_vocabulary({&crowd, &ds});
  const auto table = crowdprop::load_embeddings(
      args.embeddings, resolve_format(args.format, args.embeddings), &vocabulary);
  std::cerr << "loaded " << table.size() << " of " << table.stats().parsed_count
            << " vectors (dimension " << table.dimension() << ")\n";

  crowdprop::PropagationConfig config;
  config.span_policy = args.span_policy == "whole_sentence"
                           ? crowdprop::SpanPolicy::kWholeSentence
                           : crowdprop::SpanPolicy::kBetweenTerms;
  config.clamp_similarity = !args.no_clamp;
  config.threads = args.threads;

  const auto output =
      crowdprop::propagate_corpus(ds, crowd, quality, inventory, table, config);
  crowdprop::write_propagation_results(output.results, inventory, args.output);
  if (!args.report.empty()) {
    crowdprop::write_propagation_report(output.report, args.report);
  }

  std::cout << "propagated " << output.report.propagated << "/" << output.report.total
            << " sentences (" << output.report.unpropagated << " kept DS labels, "
            << output.report.whole_sentence_fallbacks << " whole-sentence fallbacks, "
            << output.report.labeled_skipped_empty << " crowd sentences unindexable)\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string predictions;
  std::string gold;
  std::string inventory;
  std::string report;
  std::string pr_csv;
  std::string cosine_csv;
  double gold_threshold = 0.5;
};

int run_evaluate(const EvaluateArgs& args) {
  const auto inventory = crowdprop::RelationInventory::from_file(args.inventory);
  const auto predictions = crowdprop::read_score_file(args.predictions, inventory);
  const auto gold = crowdprop::read_score_file(args.gold, inventory);
  const auto pairs = crowdprop::join_scored_pairs(predictions, gold, inventory);

  crowdprop::EvalReport report;
  report.gold_threshold = args.gold_threshold;
  report.sentences = predictions.size();
  report.pr = crowdprop::pr_curve(pairs, args.gold_threshold);
  report.cosine_per_sentence = crowdprop::cosine_eval(pairs, inventory.named_count());

  write_text_file(args.report, crowdprop::eval_report_to_json(report));
  if (!args.pr_csv.empty()) {
    write_text_file(args.pr_csv, crowdprop::pr_curve_to_csv(report.pr));
  }
  if (!args.cosine_csv.empty()) {
    write_text_file(args.cosine_csv,
                    crowdprop::cosine_eval_to_csv(report.cosine_per_sentence));
  }

  std::cout << "evaluated " << report.pr.pair_count << " pairs over "
            << report.sentences << " sentences: AUC "
            << crowdprop::JsonWriter::format_double(report.pr.auc) << "\n";
  return kExitOk;
}

struct FpRatioArgs {
  std::string corpus;
  std::string quality;
  std::string inventory;
  std::string output;
  std::string csv;
  double gold_threshold = 0.5;
};

int run_fp_ratio(const FpRatioArgs& args) {
  const auto inventory = crowdprop::RelationInventory::from_file(args.inventory);
  crowdprop::CorpusReadOptions options;
  options.require_ds_label = true;
  const auto corpus = crowdprop::read_corpus(args.corpus, inventory, options);
  const auto quality = crowdprop::read_quality_scores(args.quality, inventory);

  const auto ratios =
      crowdprop::false_positive_ratio(corpus, quality, inventory, args.gold_threshold);
  write_text_file(args.output,
                  crowdprop::fp_ratio_to_json(ratios, inventory, args.gold_threshold));
  if (!args.csv.empty()) {
    write_text_file(args.csv, crowdprop::fp_ratio_to_csv(ratios, inventory));
  }

  std::size_t defined = 0;
  for (const auto& r : ratios) defined += r.has_value() ? 1 : 0;
  std::cout << "fp-ratio over " << corpus.size() << " sentences: " << defined << "/"
            << ratios.size() << " relations have DS positives\n";
  return kExitOk;
}

struct EmbedStatsArgs {
  std::string embeddings;
  std::string format = "auto";
  std::vector<std::string> corpora;
  std::string inventory;
  std::string output;
};

int run_embed_stats(const EmbedStatsArgs& args) {
  std::vector<std::vector<crowdprop::CorpusSentence>> corpora;
  if (!args.corpora.empty()) {
    if (args.inventory.empty()) {
      throw crowdprop::ValidationError("--inventory is required when --corpus is given");
    }
    const auto inventory = crowdprop::RelationInventory::from_file(args.inventory);
    for (const auto& path : args.corpora) {
      corpora.push_back(crowdprop::read_corpus(path, inventory));
    }
  }

  std::unordered_set<std::string> vocabulary;
  if (!corpora.empty()) {
    std::vector<const std::vector<crowdprop::CorpusSentence>*> refs;
    for (const auto& corpus : corpora) refs.push_back(&corpus);
    vocabulary = corpus_vocabulary(refs);
  }
  const auto table = crowdprop::load_embeddings(
      args.embeddings, resolve_format(args.format, args.embeddings),
      corpora.empty() ? nullptr : &vocabulary);

  crowdprop::JsonWriter json;
  json.begin_object();
  json.key("embeddings").begin_object();
  json.key("path").value(args.embeddings);
  json.key("dimension").value(table.dimension());
  json.key("declared_count").value(table.stats().declared_count);
  json.key("parsed_count").value(table.stats().parsed_count);
  json.key("retained_count").value(table.stats().retained_count);
  json.key("duplicates_skipped").value(table.stats().duplicates_skipped);
  json.end_object();
  json.key("corpora").begin_array();
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    std::unordered_map<std::string, std::size_t> counts;
    std::size_t token_total = 0;
    for (const auto& sentence : corpora[i]) {
      for (const auto& token : sentence.tokens) {
        counts[token] += 1;
        token_total += 1;
      }
    }
    std::size_t covered = 0;
    std::vector<std::pair<std::string, std::size_t>> oov;
    for (const auto& [token, count] : counts) {
      if (table.lookup(token)) {
        covered += 1;
      } else {
        oov.emplace_back(token, count);
      }
    }
    std::sort(oov.begin(), oov.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });

    json.begin_object();
    json.key("path").value(args.corpora[i]);
    json.key("sentences").value(corpora[i].size());
    json.key("tokens").value(token_total);
    json.key("unique_tokens").value(counts.size());
    json.key("covered_unique").value(covered);
    json.key("coverage").value(counts.empty()
                                   ? 0.0
                                   : static_cast<double>(covered) /
                                         static_cast<double>(counts.size()));
    json.key("oov_examples").begin_array();
    for (std::size_t k = 0; k < oov.size() && k < 10; ++k) json.value(oov[k].first);
    json.end_array();
    json.end_object();
  }
  json.end_array();
  json.end_object();
  std::string content = json.take();
  content += '\n';
  write_text_file(args.output, content);

  std::cout << "embed-stats: retained " << table.stats().retained_count << " of "
            << table.stats().parsed_count << " vectors\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disagreement-aware crowd annotation aggregation, semantic label "
               "propagation, and evaluation over JSONL corpora"};
  app.require_subcommand(1);
  app.set_config("--config")->description("INI config file; command-line flags win");

  AggregateArgs aggregate;
  auto* cmd_aggregate = app.add_subcommand(
      "aggregate", "Compute worker/sentence/relation quality and srs from crowd judgments");
  cmd_aggregate->add_option("--annotations", aggregate.annotations,
                            "Annotation CSV (worker_id,sentence_id,choices)")->required();
  cmd_aggregate->add_option("--inventory", aggregate.inventory,
                            "Relation inventory file, one identifier per line, 'none' last")->required();
  cmd_aggregate->add_option("--output", aggregate.output, "Quality-scores JSON output")->required();
  cmd_aggregate->add_option("--srs-jsonl", aggregate.srs_jsonl,
                            "Also write per-sentence srs as a score JSONL file");
  cmd_aggregate->add_option("--tolerance", aggregate.tolerance,
                            "Fixed-point convergence tolerance")
      ->check(CLI::PositiveNumber)->capture_default_str();
  cmd_aggregate->add_option("--max-iterations", aggregate.max_iterations,
                            "Fixed-point iteration cap")
      ->check(CLI::PositiveNumber)->capture_default_str();
  cmd_aggregate->add_option("--srs-relation-weighting", aggregate.srs_weighting,
                            "off: plain worker-quality ratio; per_choice: multiply by relation quality")
      ->check(CLI::IsMember({"off", "per_choice"}))->capture_default_str();
  cmd_aggregate->add_flag("--debug-unweighted-srs", aggregate.debug_unweighted,
                          "Include the unweighted pick fractions in the output");

  PropagateArgs propagate;
  auto* cmd_propagate = app.add_subcommand(
      "propagate", "Blend crowd srs into a DS corpus via nearest labeled sentences");
  cmd_propagate->add_option("--inventory", propagate.inventory, "Relation inventory file")->required();
  cmd_propagate->add_option("--embeddings", propagate.embeddings, "Word vector file")->required();
  cmd_propagate->add_option("--embedding-format", propagate.format,
                            "Vector file format (auto: by extension)")
      ->check(CLI::IsMember({"auto", "text", "binary"}))->capture_default_str();
  cmd_propagate->add_option("--crowd", propagate.crowd, "Crowd-annotated corpus JSONL")->required();
  cmd_propagate->add_option("--quality", propagate.quality,
                            "Quality-scores JSON from `aggregate`")->required();
  cmd_propagate->add_option("--ds", propagate.ds, "DS corpus JSONL")->required();
  cmd_propagate->add_option("--output", propagate.output, "Relabeled corpus JSONL output")->required();
  cmd_propagate->add_option("--report", propagate.report, "Run report JSON output");
  cmd_propagate->add_option("--span-policy", propagate.span_policy,
                            "Sentence-vector token span")
      ->check(CLI::IsMember({"between_terms", "whole_sentence"}))->capture_default_str();
  cmd_propagate->add_option("--threads", propagate.threads, "Worker thread count")
      ->check(CLI::PositiveNumber)->capture_default_str();
  cmd_propagate->add_flag("--no-sim-clamp", propagate.no_clamp,
                          "Use raw (possibly negative) cosine in the blend");

  EvaluateArgs evaluate;
  auto* cmd_evaluate = app.add_subcommand(
      "evaluate", "Micro P/R curve, AUC, and per-sentence cosine against gold srs");
  cmd_evaluate->add_option("--predictions", evaluate.predictions,
                           "Prediction JSONL ({id, scores})")->required();
  cmd_evaluate->add_option("--gold", evaluate.gold,
                           "Gold srs JSONL (same schema; see aggregate --srs-jsonl)")->required();
  cmd_evaluate->add_option("--inventory", evaluate.inventory, "Relation inventory file")->required();
  cmd_evaluate->add_option("--report", evaluate.report, "Evaluation report JSON output")->required();
  cmd_evaluate->add_option("--pr-csv", evaluate.pr_csv, "P/R curve CSV output");
  cmd_evaluate->add_option("--cosine-csv", evaluate.cosine_csv,
                           "Per-sentence cosine CSV output");
  cmd_evaluate->add_option("--gold-threshold", evaluate.gold_threshold,
                           "srs binarization threshold")
      ->check(open_interval_check("--gold-threshold"))->capture_default_str();

  FpRatioArgs fp_ratio;
  auto* cmd_fp = app.add_subcommand(
      "fp-ratio", "Per-relation DS false-positive ratio on a crowd corpus");
  cmd_fp->add_option("--corpus", fp_ratio.corpus, "Crowd corpus JSONL with DS seed labels")->required();
  cmd_fp->add_option("--quality", fp_ratio.quality, "Quality-scores JSON")->required();
  cmd_fp->add_option("--inventory", fp_ratio.inventory, "Relation inventory file")->required();
  cmd_fp->add_option("--output", fp_ratio.output, "fp-ratio JSON output")->required();
  cmd_fp->add_option("--csv", fp_ratio.csv, "fp-ratio CSV output");
  cmd_fp->add_option("--gold-threshold", fp_ratio.gold_threshold,
                     "srs threshold below which a DS positive counts as false")
      ->check(open_interval_check("--gold-threshold"))->capture_default_str();

  EmbedStatsArgs embed_stats;
  auto* cmd_stats = app.add_subcommand(
      "embed-stats", "Vector file statistics and corpus vocabulary coverage");
  cmd_stats->add_option("--embeddings", embed_stats.embeddings, "Word vector file")->required();
  cmd_stats->add_option("--embedding-format", embed_stats.format,
                        "Vector file format (auto: by extension)")
      ->check(CLI::IsMember({"auto", "text", "binary"}))->capture_default_str();
  cmd_stats->add_option("--corpus", embed_stats.corpora,
                        "Corpus JSONL to measure coverage for (repeatable)");
  cmd_stats->add_option("--inventory", embed_stats.inventory,
                        "Relation inventory file (required with --corpus)");
  cmd_stats->add_option("--output", embed_stats.output, "Statistics JSON output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (cmd_aggregate->parsed()) return run_aggregate(aggregate);
    if (cmd_propagate->parsed()) return run_propagate(propagate);
    if (cmd_evaluate->parsed()) return run_evaluate(evaluate);
    if (cmd_fp->parsed()) return run_fp_ratio(fp_ratio);
    if (cmd_stats->parsed()) return run_embed_stats(embed_stats);
  } catch (const crowdprop::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const crowdprop::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
