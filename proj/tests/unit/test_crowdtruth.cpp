#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "crowdprop/crowdtruth.hpp"
#include "crowdprop/errors.hpp"
#include "helpers.hpp"

using namespace crowdprop;
using crowdprop::testing::make_matrix;
using crowdprop::testing::RawRow;
using crowdprop::testing::test_inventory;

namespace {

// Random matrix with the given shape; every sentence gets >= 2 workers.
AnnotationMatrix random_matrix(std::mt19937& rng, int workers, int sentences,
                               const RelationInventory& inventory) {
  std::uniform_int_distribution<int> worker_count(2, std::min(workers, 8));
  std::uniform_int_distribution<int> pick_count(1, 3);
  std::uniform_int_distribution<std::size_t> pick_rel(0, inventory.named_count() - 1);
  std::bernoulli_distribution pick_none(0.15);

  std::vector<RawRow> raw;
  for (int s = 0; s < sentences; ++s) {
    std::vector<int> ids(workers);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    const int n = worker_count(rng);
    for (int k = 0; k < n; ++k) {
      RawRow row;
      row.worker = "w" + std::to_string(ids[k]);
      row.sentence = "s" + std::to_string(s);
      if (pick_none(rng)) {
        row.choices = {"none"};
      } else {
        const int picks = pick_count(rng);
        for (int p = 0; p < picks; ++p) {
          const auto name = inventory.name(pick_rel(rng));
          if (std::find(row.choices.begin(), row.choices.end(), name) ==
              row.choices.end()) {
            row.choices.push_back(name);
          }
        }
      }
      raw.push_back(std::move(row));
    }
  }
  return make_matrix(raw, inventory);
}

}  // namespace

TEST_CASE("perfect agreement yields exactly 1.0 everywhere") {
  const auto inventory = test_inventory();
  const auto matrix = make_matrix(
      {
          {"w1", "s1", {"place_of_birth"}},
          {"w2", "s1", {"place_of_birth"}},
          {"w3", "s1", {"place_of_birth"}},
          {"w1", "s2", {"origin", "places_of_residence"}},
          {"w2", "s2", {"origin", "places_of_residence"}},
          {"w3", "s2", {"origin", "places_of_residence"}},
      },
      inventory);
  const auto quality = compute_quality_scores(matrix, inventory);
  CHECK(quality.converged);
  for (const auto& [id, value] : quality.worker_quality) {
    INFO("worker ", id);
    CHECK(value == 1.0);
  }
  for (const auto& [id, value] : quality.sentence_quality) {
    INFO("sentence ", id);
    CHECK(value == 1.0);
  }
  CHECK(quality.srs_value("s1", inventory.index_of("place_of_birth").value()) == 1.0);
  CHECK(quality.srs_value("s2", inventory.index_of("origin").value()) == 1.0);
  CHECK(quality.srs_value("s1", inventory.index_of("title").value()) == 0.0);
}

TEST_CASE("orthogonal two-worker sentence has quality exactly 0.0") {
  const auto inventory = test_inventory();
  const auto matrix = make_matrix(
      {
          {"w1", "s1", {"origin"}},
          {"w2", "s1", {"title"}},
      },
      inventory);
  const auto quality = compute_quality_scores(matrix, inventory);
  CHECK(quality.sentence_quality.at("s1") == 0.0);
  CHECK(quality.converged);
}

TEST_CASE("first-iteration sentence quality is the plain mean of pair cosines") {
  // Pairwise cosines {1, 0.5, 0.5}: two identical single-pick vectors plus a
  // four-pick vector sharing one relation -> mean 2/3 under uniform weights.
  const auto inventory = test_inventory();
  const auto matrix = make_matrix(
      {
          {"w1", "s1", {"origin"}},
          {"w2", "s1", {"origin"}},
          {"w3", "s1", {"origin", "title", "spouse", "education"}},
      },
      inventory);
  FixedPointConfig config;
  config.max_iterations = 1;
  const auto quality = compute_quality_scores(matrix, inventory, config);
  CHECK(quality.iterations == 1);
  CHECK(quality.sentence_quality.at("s1") ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("srs reduces to the plain ratio for symmetric matrices") {
  // Rotationally symmetric: every worker has the same role, so the fixed
  // point gives them equal quality and the weights cancel.
  const auto inventory = test_inventory();
  const auto matrix = make_matrix(
      {
          {"w1", "s1", {"origin", "title"}},
          {"w2", "s1", {"title", "spouse"}},
          {"w3", "s1", {"spouse", "origin"}},
      },
      inventory);
  const auto quality = compute_quality_scores(matrix, inventory);
  CHECK(quality.converged);

  const auto q1 = quality.worker_quality.at("w1");
  CHECK(quality.worker_quality.at("w2") == doctest::Approx(q1).epsilon(1e-12));
  CHECK(quality.worker_quality.at("w3") == doctest::Approx(q1).epsilon(1e-12));

  // Each relation was picked by 2 of the 3 workers.
  for (const char* rel : {"origin", "title", "spouse"}) {
    CHECK(quality.srs_value("s1", inventory.index_of(rel).value()) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  }
  CHECK(quality.srs_value("s1", inventory.index_of("charges").value()) == 0.0);
}

TEST_CASE("srs examples: unanimous and absent relations") {
  const auto inventory = test_inventory();
  std::vector<RawRow> raw;
  for (int w = 0; w < 15; ++w) {
    raw.push_back({"w" + std::to_string(w), "s1", {"charges"}});
  }
  const auto matrix = make_matrix(raw, inventory);
  const auto quality = compute_quality_scores(matrix, inventory);
  CHECK(quality.srs_value("s1", inventory.index_of("charges").value()) == 1.0);
  CHECK(quality.srs_value("s1", inventory.index_of("origin").value()) == 0.0);
}

TEST_CASE("sentence_relation_score matches the stored srs and validates ids") {
  const auto inventory = test_inventory();
  const auto matrix = make_matrix(
      {
          {"w1", "s1", {"origin", "title"}},
          {"w2", "s1", {"title", "spouse"}},
          {"w3", "s1", {"spouse", "origin"}},
      },
      inventory);
  const auto quality = compute_quality_scores(matrix, inventory);
  for (std::size_t rel = 0; rel < inventory.size(); ++rel) {
    CHECK(sentence_relation_score(matrix, quality, "s1", rel) ==
          quality.srs_value("s1", rel));
  }
  CHECK_THROWS_AS(sentence_relation_score(matrix, quality, "nope", 0), ValidationError);
}

TEST_CASE("per-choice relation weighting changes srs on disagreeing sentences") {
  const auto inventory = test_inventory();
  const auto matrix = make_matrix(
      {
          {"w1", "s1", {"origin", "title"}},
          {"w2", "s1", {"title", "spouse"}},
          {"w3", "s1", {"spouse", "origin"}},
      },
      inventory);
  FixedPointConfig per_choice;
  per_choice.srs_relation_weighting = SrsRelationWeighting::kPerChoice;
  const auto base = compute_quality_scores(matrix, inventory);
  const auto weighted = compute_quality_scores(matrix, inventory, per_choice);
  const auto origin = inventory.index_of("origin").value();
  CHECK(base.srs_value("s1", origin) > weighted.srs_value("s1", origin));
  CHECK(weighted.srs_value("s1", origin) ==
        doctest::Approx(base.srs_value("s1", origin) *
                        weighted.relation_quality[origin])
            .epsilon(1e-12));
}

TEST_CASE("degenerate cases: single-worker sentences and lone workers") {
  const auto inventory = test_inventory();
  const auto matrix = make_matrix(
      {
          {"w1", "s1", {"origin"}},
          {"w2", "s1", {"origin"}},
          {"w_alone", "s_solo", {"title"}},
      },
      inventory);
  const auto quality = compute_quality_scores(matrix, inventory);
  CHECK(quality.sentence_quality.at("s_solo") == 1.0);
  CHECK(quality.worker_quality.at("w_alone") == 1.0);
  bool warned = false;
  for (const auto& note : quality.notes) {
    if (note.find("w_alone") != std::string::npos) warned = true;
  }
  CHECK(warned);
}

TEST_CASE("every score stays within [0,1] at every iteration") {
  const auto inventory = test_inventory();
  std::mt19937 rng(99);
  const auto matrix = random_matrix(rng, 8, 12, inventory);
  for (int iters = 1; iters <= 10; ++iters) {
    FixedPointConfig config;
    config.max_iterations = iters;
    const auto quality = compute_quality_scores(matrix, inventory, config);
    for (const auto& [id, v] : quality.worker_quality) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    for (const auto& [id, v] : quality.sentence_quality) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    for (double v : quality.relation_quality) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    for (const auto& [id, row] : quality.srs) {
      for (double v : row) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
}

TEST_CASE("identical input produces bit-identical scores") {
  const auto inventory = test_inventory();
  std::mt19937 rng(1234);
  const auto matrix = random_matrix(rng, 10, 15, inventory);
  const auto a = compute_quality_scores(matrix, inventory);
  const auto b = compute_quality_scores(matrix, inventory);
  CHECK(a.worker_quality == b.worker_quality);
  CHECK(a.sentence_quality == b.sentence_quality);
  CHECK(a.relation_quality == b.relation_quality);
  CHECK(a.srs == b.srs);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("worker relabeling and row reordering leave scores unchanged") {
  const auto inventory = test_inventory();
  const std::vector<RawRow> raw = {
      {"w1", "s1", {"origin"}},          {"w2", "s1", {"origin", "title"}},
      {"w3", "s1", {"none"}},            {"w1", "s2", {"spouse"}},
      {"w3", "s2", {"spouse", "title"}}, {"w2", "s2", {"charges"}},
  };
  const auto base = compute_quality_scores(make_matrix(raw, inventory), inventory);

  std::vector<RawRow> relabeled = raw;
  for (auto& row : relabeled) {
    if (row.worker == "w1") row.worker = "zz_worker";
  }
  std::reverse(relabeled.begin(), relabeled.end());
  const auto other = compute_quality_scores(make_matrix(relabeled, inventory), inventory);

  CHECK(other.worker_quality.at("zz_worker") ==
        doctest::Approx(base.worker_quality.at("w1")).epsilon(1e-12));
  for (const auto& [id, value] : base.sentence_quality) {
    CHECK(other.sentence_quality.at(id) == doctest::Approx(value).epsilon(1e-12));
  }
  for (const auto& [id, row] : base.srs) {
    for (std::size_t rel = 0; rel < row.size(); ++rel) {
      CHECK(other.srs.at(id)[rel] == doctest::Approx(row[rel]).epsilon(1e-12));
    }
  }
}

TEST_CASE("random matrices converge within the default budget") {
  const auto inventory = test_inventory();
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const auto matrix = random_matrix(rng, 12, 20, inventory);
    const auto quality = compute_quality_scores(matrix, inventory);
    INFO("trial ", trial, " iterations ", quality.iterations);
    CHECK(quality.converged);
    CHECK(quality.iterations <= 100);
  }
}

TEST_CASE("config validation") {
  const auto inventory = test_inventory();
  const auto matrix = make_matrix({{"w1", "s1", {"origin"}}}, inventory);
  FixedPointConfig bad;
  bad.tolerance = 0.0;
  CHECK_THROWS_AS(compute_quality_scores(matrix, inventory, bad), ValidationError);
  bad = FixedPointConfig{};
  bad.max_iterations = 0;
  CHECK_THROWS_AS(compute_quality_scores(matrix, inventory, bad), ValidationError);
}

TEST_CASE("quality scores round-trip through JSON bit-exactly") {
  const auto inventory = test_inventory();
  std::mt19937 rng(77);
  const auto matrix = random_matrix(rng, 6, 8, inventory);
  const auto quality = compute_quality_scores(matrix, inventory);

  const auto path = std::filesystem::temp_directory_path() / "cp_quality_roundtrip.json";
  write_quality_scores(quality, inventory, path.string());
  const auto reread = read_quality_scores(path.string(), inventory);

  CHECK(reread.worker_quality == quality.worker_quality);
  CHECK(reread.sentence_quality == quality.sentence_quality);
  CHECK(reread.relation_quality == quality.relation_quality);
  CHECK(reread.srs == quality.srs);
  CHECK(reread.iterations == quality.iterations);
  CHECK(reread.converged == quality.converged);
  std::filesystem::remove(path);
}

TEST_CASE("unweighted srs is the plain pick fraction") {
  const auto inventory = test_inventory();
  const auto matrix = make_matrix(
      {
          {"w1", "s1", {"origin"}},
          {"w2", "s1", {"origin"}},
          {"w3", "s1", {"title"}},
      },
      inventory);
  const auto ratios = unweighted_srs(matrix, inventory);
  CHECK(ratios.at("s1")[inventory.index_of("origin").value()] ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(ratios.at("s1")[inventory.index_of("title").value()] ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}
