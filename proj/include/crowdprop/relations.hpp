#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace crowdprop {

/// Fixed, ordered relation inventory: 16 named relations plus the `none`
/// sentinel in the last slot. All choice and score vectors index against it,
/// so the ordering must not change within a corpus run.
class RelationInventory {
 public:
  static constexpr std::string_view kNoneLabel = "none";
  static constexpr std::size_t kNamedCount = 16;
  static constexpr std::size_t kComponents = 17;

  /// Validates and adopts the given ordering; `none` must be last.
  static RelationInventory from_names(std::vector<std::string> names);

  /// One identifier per line, order-significant, `none` on the final line.
  static RelationInventory from_file(const std::string& path);

  std::size_t size() const { return names_.size(); }
  std::size_t named_count() const { return names_.size() - 1; }
  std::size_t none_index() const { return names_.size() - 1; }
  const std::string& name(std::size_t index) const { return names_[index]; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view token) const;

  bool operator==(const RelationInventory& other) const {
    return names_ == other.names_;
  }

 private:
  RelationInventory() = default;

  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace crowdprop
