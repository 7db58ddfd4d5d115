#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "crowdprop/annotations.hpp"
#include "crowdprop/errors.hpp"
#include "helpers.hpp"

using namespace crowdprop;
using crowdprop::testing::make_matrix;
using crowdprop::testing::test_inventory;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("inventory requires 16 relations plus trailing none") {
  CHECK_NOTHROW(test_inventory());
  CHECK_THROWS_AS(RelationInventory::from_names({"a", "none"}), ValidationError);

  auto names = test_inventory().names();
  std::swap(names[0], names.back());  // none no longer last
  CHECK_THROWS_AS(RelationInventory::from_names(names), ValidationError);

  names = test_inventory().names();
  names[1] = names[0];  // duplicate
  CHECK_THROWS_AS(RelationInventory::from_names(names), ValidationError);
}

TEST_CASE("inventory lookups") {
  const auto inventory = test_inventory();
  CHECK(inventory.size() == 17);
  CHECK(inventory.named_count() == 16);
  CHECK(inventory.none_index() == 16);
  CHECK(inventory.index_of("origin").value() == 10);
  CHECK(!inventory.index_of("born_in").has_value());
}

TEST_CASE("encode_choices produces binary vectors") {
  const auto inventory = test_inventory();

  SUBCASE("single relation") {
    const auto choices = encode_choices({"place_of_birth"}, inventory);
    CHECK(choices[inventory.index_of("place_of_birth").value()] == 1);
    std::size_t total = 0;
    for (auto c : choices) total += c;
    CHECK(total == 1);
  }
  SUBCASE("none alone is fine") {
    const auto choices = encode_choices({"none"}, inventory);
    CHECK(choices[inventory.none_index()] == 1);
    std::size_t total = 0;
    for (auto c : choices) total += c;
    CHECK(total == 1);
  }
  SUBCASE("none combined with a relation is rejected") {
    CHECK_THROWS_AS(encode_choices({"none", "origin"}, inventory), ValidationError);
  }
  SUBCASE("empty list is rejected") {
    CHECK_THROWS_AS(encode_choices({}, inventory), ValidationError);
  }
  SUBCASE("unknown relation is rejected") {
    CHECK_THROWS_WITH_AS(encode_choices({"born_in"}, inventory),
                         doctest::Contains("born_in"), ValidationError);
  }
  SUBCASE("multiple relations are allowed") {
    const auto choices = encode_choices({"origin", "places_of_residence"}, inventory);
    std::size_t total = 0;
    for (auto c : choices) total += c;
    CHECK(total == 2);
  }
}

TEST_CASE("parse_annotations reads a valid file") {
  const auto inventory = test_inventory();
  const auto path = write_temp("cp_ann_valid.csv",
                               "worker_id,sentence_id,choices\n"
                               "w1,s1,place_of_birth\n"
                               "w2,s1,place_of_birth|places_of_residence\n"
                               "w1,s2,none\n");
  const auto matrix = parse_annotations(path.string(), inventory);
  CHECK(matrix.row_count() == 3);
  CHECK(matrix.sentence_count() == 2);
  CHECK(matrix.worker_count() == 2);
  CHECK(matrix.by_sentence().at("s1").size() == 2);
  std::filesystem::remove(path);
}

TEST_CASE("parse_annotations error cases carry the line number") {
  const auto inventory = test_inventory();

  SUBCASE("unknown relation") {
    const auto path = write_temp("cp_ann_unknown.csv",
                                 "worker_id,sentence_id,choices\n"
                                 "w1,s1,place_of_birth\n"
                                 "w2,s1,born_in\n");
    CHECK_THROWS_WITH_AS(parse_annotations(path.string(), inventory),
                         doctest::Contains(":3"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_annotations(path.string(), inventory),
                         doctest::Contains("born_in"), ValidationError);
    std::filesystem::remove(path);
  }
  SUBCASE("duplicate worker/sentence pair") {
    const auto path = write_temp("cp_ann_dup.csv",
                                 "worker_id,sentence_id,choices\n"
                                 "w1,s1,origin\n"
                                 "w1,s1,title\n");
    CHECK_THROWS_WITH_AS(parse_annotations(path.string(), inventory),
                         doctest::Contains("duplicate"), ValidationError);
    std::filesystem::remove(path);
  }
  SUBCASE("malformed field count") {
    const auto path = write_temp("cp_ann_fields.csv",
                                 "worker_id,sentence_id,choices\n"
                                 "w1,s1\n");
    CHECK_THROWS_WITH_AS(parse_annotations(path.string(), inventory),
                         doctest::Contains(":2"), ValidationError);
    std::filesystem::remove(path);
  }
  SUBCASE("missing file is an io error") {
    CHECK_THROWS_AS(parse_annotations("/nonexistent/ann.csv", inventory), IoError);
  }
  SUBCASE("bad header") {
    const auto path = write_temp("cp_ann_header.csv", "a,b,c\nw1,s1,origin\n");
    CHECK_THROWS_AS(parse_annotations(path.string(), inventory), ValidationError);
    std::filesystem::remove(path);
  }
}

TEST_CASE("matrix round-trips through CSV bit-exactly") {
  const auto inventory = test_inventory();
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pick_count(1, 3);
  std::uniform_int_distribution<std::size_t> pick_rel(0, inventory.named_count() - 1);
  std::bernoulli_distribution pick_none(0.2);

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<crowdprop::testing::RawRow> raw;
    const int workers = 2 + trial % 5;
    const int sentences = 1 + trial % 4;
    for (int w = 0; w < workers; ++w) {
      for (int s = 0; s < sentences; ++s) {
        crowdprop::testing::RawRow row;
        row.worker = "w" + std::to_string(w);
        row.sentence = "s" + std::to_string(s);
        if (pick_none(rng)) {
          row.choices = {"none"};
        } else {
          const int n = pick_count(rng);
          for (int k = 0; k < n; ++k) {
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
    const auto matrix = make_matrix(raw, inventory);
    const auto path = write_temp("cp_ann_roundtrip.csv",
                                 annotations_to_csv(matrix, inventory));
    const auto reparsed = parse_annotations(path.string(), inventory);
    CHECK(matrix == reparsed);
    CHECK(annotations_to_csv(reparsed, inventory) == annotations_to_csv(matrix, inventory));
    std::filesystem::remove(path);
  }
}

TEST_CASE("row invariants hold for every matrix row") {
  const auto inventory = test_inventory();
  const auto matrix = make_matrix(
      {
          {"w1", "s1", {"origin"}},
          {"w2", "s1", {"none"}},
          {"w3", "s1", {"origin", "places_of_residence"}},
      },
      inventory);
  for (const auto& row : matrix.rows()) {
    CHECK(row.choice_count() >= 1);
    if (row.picked(inventory.none_index())) CHECK(row.choice_count() == 1);
  }
}
