#include "crowdprop/relations.hpp"

#include <fstream>

#include "crowdprop/errors.hpp"

namespace crowdprop {

namespace {

bool valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    // The identifier must survive the CSV and `|`-list formats untouched.
    if (c == ',' || c == '|' || c == '"' || c == '\n' || c == '\r' ||
        c == ' ' || c == '\t')
      return false;
  }
  return true;
}

}  // namespace

RelationInventory RelationInventory::from_names(std::vector<std::string> names) {
  if (names.size() != kComponents) {
    throw ValidationError("relation inventory must list " +
                          std::to_string(kNamedCount) + " relations plus '" +
                          std::string(kNoneLabel) + "', got " +
                          std::to_string(names.size()) + " entries");
  }
  if (names.back() != kNoneLabel) {
    throw ValidationError("relation inventory must end with '" +
                          std::string(kNoneLabel) + "', got '" + names.back() +
                          "'");
  }
  RelationInventory inventory;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& name = names[i];
    if (!valid_identifier(name)) {
      throw ValidationError("invalid relation identifier '" + name + "'");
    }
    if (i + 1 < names.size() && name == kNoneLabel) {
      throw ValidationError("'" + std::string(kNoneLabel) +
                            "' may only appear as the final inventory entry");
    }
    if (!inventory.index_.emplace(name, i).second) {
      throw ValidationError("duplicate relation identifier '" + name + "'");
    }
  }
  inventory.names_ = std::move(names);
  return inventory;
}

RelationInventory RelationInventory::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open relation inventory file: " + path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    names.push_back(line);
  }
  return from_names(std::move(names));
}

std::optional<std::size_t> RelationInventory::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace crowdprop
