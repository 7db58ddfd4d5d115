#pragma once

#include <string>
#include <vector>

#include "crowdprop/annotations.hpp"
#include "crowdprop/relations.hpp"

namespace crowdprop::testing {

/// 16 open-domain relation names plus the `none` sentinel, the shape every
/// corpus run uses.
inline RelationInventory test_inventory() {
  return RelationInventory::from_names({
      "alternate_names_person", "alternate_names_org", "cause_of_death",
      "charges", "children", "date_of_birth", "date_of_death", "education",
      "employee_of", "founded_by", "origin", "place_of_birth",
      "place_of_death", "places_of_residence", "spouse", "title", "none"});
}

struct RawRow {
  std::string worker;
  std::string sentence;
  std::vector<std::string> choices;  // relation names
};

inline AnnotationMatrix make_matrix(const std::vector<RawRow>& raw,
                                    const RelationInventory& inventory) {
  std::vector<WorkerVector> rows;
  rows.reserve(raw.size());
  for (const RawRow& r : raw) {
    rows.push_back(WorkerVector{r.worker, r.sentence, encode_choices(r.choices, inventory)});
  }
  return AnnotationMatrix::from_rows(std::move(rows), inventory);
}

}  // namespace crowdprop::testing
