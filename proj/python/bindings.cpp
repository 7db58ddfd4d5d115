#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "crowdprop/annotations.hpp"
#include "crowdprop/crowdtruth.hpp"
#include "crowdprop/embeddings.hpp"
#include "crowdprop/errors.hpp"
#include "crowdprop/evaluation.hpp"
#include "crowdprop/propagation.hpp"
#include "crowdprop/relations.hpp"

namespace py = pybind11;
using namespace crowdprop;

namespace {

SrsRelationWeighting parse_weighting(const std::string& mode) {
  if (mode == "off") return SrsRelationWeighting::kOff;
  if (mode == "per_choice") return SrsRelationWeighting::kPerChoice;
  throw ValidationError("srs_relation_weighting must be 'off' or 'per_choice'");
}

py::dict quality_to_dict(const QualityScores& quality, const RelationInventory& inventory) {
  py::dict out;
  out["worker_quality"] = quality.worker_quality;
  out["sentence_quality"] = quality.sentence_quality;
  py::dict rq;
  for (std::size_t r = 0; r < quality.relation_quality.size(); ++r) {
    rq[py::str(inventory.name(r))] = quality.relation_quality[r];
  }
  out["relation_quality"] = rq;
  py::dict srs;
  for (const auto& [sentence_id, row] : quality.srs) {
    py::dict per_relation;
    for (std::size_t r = 0; r < row.size(); ++r) {
      per_relation[py::str(inventory.name(r))] = row[r];
    }
    srs[py::str(sentence_id)] = per_relation;
  }
  out["srs"] = srs;
  out["iterations"] = quality.iterations;
  out["converged"] = quality.converged;
  out["notes"] = quality.notes;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Crowd annotation aggregation, semantic label propagation, and "
            "evaluation primitives";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<RelationInventory>(m, "RelationInventory")
      .def_static("from_file", &RelationInventory::from_file, py::arg("path"))
      .def_static("from_names",
                  [](const std::vector<std::string>& names) {
                    return RelationInventory::from_names(names);
                  },
                  py::arg("names"))
      .def_property_readonly("names", &RelationInventory::names)
      .def("index_of",
           [](const RelationInventory& self, const std::string& token) -> py::object {
             const auto index = self.index_of(token);
             if (!index) return py::none();
             return py::int_(*index);
           },
           py::arg("token"))
      .def("__len__", &RelationInventory::size);

  py::class_<AnnotationMatrix>(m, "AnnotationMatrix")
      .def_property_readonly("row_count", &AnnotationMatrix::row_count)
      .def_property_readonly("sentence_count", &AnnotationMatrix::sentence_count)
      .def_property_readonly("worker_count", &AnnotationMatrix::worker_count);

  m.def("parse_annotations", &parse_annotations, py::arg("path"), py::arg("inventory"));
  m.def("encode_choices",
        [](const std::vector<std::string>& choices, const RelationInventory& inventory) {
          const auto encoded = encode_choices(choices, inventory);
          return std::vector<int>(encoded.begin(), encoded.end());
        },
        py::arg("choices"), py::arg("inventory"));

  m.def("compute_quality_scores",
        [](const AnnotationMatrix& matrix, const RelationInventory& inventory,
           double tolerance, int max_iterations, const std::string& srs_relation_weighting) {
          FixedPointConfig config;
          config.tolerance = tolerance;
          config.max_iterations = max_iterations;
          config.srs_relation_weighting = parse_weighting(srs_relation_weighting);
          return quality_to_dict(compute_quality_scores(matrix, inventory, config),
                                 inventory);
        },
        py::arg("matrix"), py::arg("inventory"), py::arg("tolerance") = 1e-6,
        py::arg("max_iterations") = 100, py::arg("srs_relation_weighting") = "off");

  m.def("cosine_similarity",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          return cosine_similarity(a, b);
        },
        py::arg("a"), py::arg("b"));

  m.def("propagate_score",
        [](int ds_label, double similarity, double srs) {
          const std::vector<std::uint8_t> ds{ds_label ? std::uint8_t{1} : std::uint8_t{0}};
          const std::vector<double> neighbor{srs};
          return blend_scores(ds, neighbor, similarity)[0];
        },
        py::arg("ds_label"), py::arg("similarity"), py::arg("srs"),
        "Similarity-weighted blend of one DS label with a neighbor srs value");

  m.def("nearest_labeled",
        [](const std::vector<double>& query,
           const std::map<std::string, std::vector<double>>& labeled) {
          std::vector<SentenceVector> vectors;
          for (const auto& [id, values] : labeled) {
            SentenceVector v;
            v.sentence_id = id;
            v.values = values;
            v.in_vocab_count = 1;
            v.empty = false;
            vectors.push_back(std::move(v));
          }
          const auto index = LabeledIndex::build(std::move(vectors));
          const auto [i, similarity] = index.nearest(query);
          return py::make_tuple(index.id(i), similarity);
        },
        py::arg("query"), py::arg("labeled"),
        "Exact nearest neighbor by cosine over a {id: vector} map");

  m.def("pr_curve",
        [](const std::vector<std::pair<double, double>>& pairs, double gold_threshold) {
          std::vector<ScoredPair> scored;
          scored.reserve(pairs.size());
          for (std::size_t i = 0; i < pairs.size(); ++i) {
            scored.push_back(
                ScoredPair{"p" + std::to_string(i), 0, pairs[i].first, pairs[i].second});
          }
          const auto curve = crowdprop::pr_curve(scored, gold_threshold);
          py::list points;
          for (const auto& point : curve.points) {
            points.append(py::make_tuple(point.threshold, point.precision, point.recall));
          }
          return py::make_tuple(points, curve.auc);
        },
        py::arg("pairs"), py::arg("gold_threshold") = 0.5,
        "Micro P/R curve and AUC over (predicted, gold_srs) pairs");

  py::class_<EmbeddingTable>(m, "EmbeddingTable")
      .def_static("from_pairs", &EmbeddingTable::from_pairs, py::arg("dimension"),
                  py::arg("entries"))
      .def_property_readonly("dimension", &EmbeddingTable::dimension)
      .def("__len__", &EmbeddingTable::size)
      .def("__contains__",
           [](const EmbeddingTable& self, const std::string& token) {
             return self.contains(token);
           })
      .def("lookup",
           [](const EmbeddingTable& self, const std::string& token) -> py::object {
             const auto vec = self.lookup(token);
             if (!vec) return py::none();
             return py::cast(std::vector<float>(vec->begin(), vec->end()));
           },
           py::arg("token"));

  m.def("load_embeddings",
        [](const std::string& path, const std::string& format) {
          EmbeddingFormat f = format == "binary" ? EmbeddingFormat::kBinary
                              : format == "text" ? EmbeddingFormat::kText
                                                 : guess_embedding_format(path);
          return load_embeddings(path, f);
        },
        py::arg("path"), py::arg("format") = "auto");

  m.attr("__version__") =
#ifdef CROWDPROP_VERSION
      CROWDPROP_VERSION;
#else
      "dev";
#endif
}
