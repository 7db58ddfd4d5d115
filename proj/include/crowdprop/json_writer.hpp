#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace crowdprop {

/// Streaming JSON writer with a fixed number format (17 significant digits)
/// so identical values always serialize to identical bytes.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();

  JsonWriter& key(std::string_view name);

  JsonWriter& value(double v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& null();

  const std::string& str() const { return out_; }
  std::string take() { return std::move(out_); }

  static std::string escape(std::string_view s);
  static std::string format_double(double v);

 private:
  void separate();

  std::string out_;
  // One entry per open container: whether the next element needs a comma.
  std::vector<bool> need_comma_;
  bool pending_key_ = false;
};

}  // namespace crowdprop
