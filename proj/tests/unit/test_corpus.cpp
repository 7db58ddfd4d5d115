#include <doctest.h>

#include "crowdprop/corpus.hpp"
#include "crowdprop/errors.hpp"
#include "helpers.hpp"

using namespace crowdprop;
using crowdprop::testing::test_inventory;

TEST_CASE("parse_corpus reads well-formed JSONL") {
  const auto inventory = test_inventory();
  const std::string jsonl =
      R"({"id":"d1","tokens":["John","was","born","in","Paris"],"term1":[0,0],"term2":[4,4],"ds_labels":["place_of_birth"]})"
      "\n"
      R"({"id":"d2","tokens":["Acme","hired","Jane"],"term1":[2,2],"term2":[0,0],"ds_labels":["employee_of"],"scores":{"employee_of":0.75}})"
      "\n";
  const auto corpus = parse_corpus(jsonl, inventory);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].id == "d1");
  CHECK(corpus[0].tokens.size() == 5);
  CHECK(corpus[0].ds_positive(inventory.index_of("place_of_birth").value()));
  CHECK(!corpus[0].has_scores());
  CHECK(corpus[1].term1 == TokenSpan{2, 2});
  REQUIRE(corpus[1].has_scores());
  CHECK(corpus[1].scores[inventory.index_of("employee_of").value()] == 0.75);
}

TEST_CASE("corpus validation errors") {
  const auto inventory = test_inventory();

  SUBCASE("span out of bounds") {
    const std::string jsonl =
        R"({"id":"d1","tokens":["a","b"],"term1":[0,0],"term2":[1,5],"ds_labels":["origin"]})" "\n";
    CHECK_THROWS_WITH_AS(parse_corpus(jsonl, inventory),
                         doctest::Contains("term2"), ValidationError);
  }
  SUBCASE("overlapping spans") {
    const std::string jsonl =
        R"({"id":"d1","tokens":["a","b","c"],"term1":[0,1],"term2":[1,2],"ds_labels":["origin"]})" "\n";
    CHECK_THROWS_WITH_AS(parse_corpus(jsonl, inventory),
                         doctest::Contains("overlap"), ValidationError);
  }
  SUBCASE("unknown relation label") {
    const std::string jsonl =
        R"({"id":"d1","tokens":["a","b","c"],"term1":[0,0],"term2":[2,2],"ds_labels":["nope"]})" "\n";
    CHECK_THROWS_WITH_AS(parse_corpus(jsonl, inventory),
                         doctest::Contains("nope"), ValidationError);
  }
  SUBCASE("none is not a corpus label") {
    const std::string jsonl =
        R"({"id":"d1","tokens":["a","b","c"],"term1":[0,0],"term2":[2,2],"ds_labels":["none"]})" "\n";
    CHECK_THROWS_AS(parse_corpus(jsonl, inventory), ValidationError);
  }
  SUBCASE("duplicate sentence id") {
    const std::string jsonl =
        R"({"id":"d1","tokens":["a","b","c"],"term1":[0,0],"term2":[2,2],"ds_labels":["origin"]})" "\n"
        R"({"id":"d1","tokens":["a","b","c"],"term1":[0,0],"term2":[2,2],"ds_labels":["origin"]})" "\n";
    CHECK_THROWS_WITH_AS(parse_corpus(jsonl, inventory),
                         doctest::Contains("duplicate"), ValidationError);
  }
  SUBCASE("DS corpora require a positive label") {
    const std::string jsonl =
        R"({"id":"d1","tokens":["a","b","c"],"term1":[0,0],"term2":[2,2]})" "\n";
    CorpusReadOptions options;
    options.require_ds_label = true;
    CHECK_THROWS_AS(parse_corpus(jsonl, inventory, options), ValidationError);
    CHECK_NOTHROW(parse_corpus(jsonl, inventory));  // crowd corpora may omit DS labels
  }
  SUBCASE("line numbers in messages") {
    const std::string jsonl =
        R"({"id":"d1","tokens":["a","b","c"],"term1":[0,0],"term2":[2,2],"ds_labels":["origin"]})" "\n"
        "{bad json\n";
    CHECK_THROWS_WITH_AS(parse_corpus(jsonl, inventory), doctest::Contains(":2"),
                         ValidationError);
  }
  SUBCASE("missing file is an io error") {
    CHECK_THROWS_AS(read_corpus("/nonexistent/c.jsonl", inventory), IoError);
  }
}
