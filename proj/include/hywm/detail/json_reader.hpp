#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hywm/errors.hpp"

namespace hywm::detail {

using json = nlohmann::json;

/// Read-only cursor over a JSON value that remembers where it is, so every
/// schema failure names the offending field.
class JsonReader {
 public:
  JsonReader(const json& value, std::string path) : value_(&value), path_(std::move(path)) {}

  const json& raw() const noexcept { return *value_; }
  const std::string& path() const noexcept { return path_; }

  [[noreturn]] void fail(const std::string& what) const { throw SchemaError(path_, what); }

  /// Requires an object whose keys are all in `allowed`.
  const JsonReader& expect_object(std::initializer_list<std::string_view> allowed) const {
    if (!value_->is_object()) fail("expected an object");
    for (const auto& [key, _] : value_->items()) {
      bool known = false;
      for (auto a : allowed) known = known || a == key;
      if (!known) JsonReader(*value_, path_ + "." + key).fail("unknown key '" + key + "'");
    }
    return *this;
  }

  const JsonReader& expect_array() const {
    if (!value_->is_array()) fail("expected an array");
    return *this;
  }

  bool has(std::string_view key) const { return value_->is_object() && value_->contains(key); }

  JsonReader at(std::string_view key) const {
    if (!value_->is_object()) fail("expected an object");
    auto it = value_->find(key);
    if (it == value_->end()) fail("missing required field '" + std::string(key) + "'");
    return JsonReader(*it, path_ + "." + std::string(key));
  }

  std::optional<JsonReader> find(std::string_view key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  JsonReader at(std::size_t index) const {
    expect_array();
    if (index >= value_->size()) fail("index " + std::to_string(index) + " out of range");
    return JsonReader((*value_)[index], path_ + "[" + std::to_string(index) + "]");
  }

  std::size_t size() const {
    expect_array();
    return value_->size();
  }

  std::string as_string() const {
    if (!value_->is_string()) fail("expected a string");
    return value_->get<std::string>();
  }

  std::string as_identifier() const {
    auto s = as_string();
    if (s.empty()) fail("identifier must be non-empty");
    return s;
  }

  double as_number() const {
    if (!value_->is_number()) fail("expected a number");
    return value_->get<double>();
  }

  std::int64_t as_integer() const {
    if (!value_->is_number_integer()) fail("expected an integer");
    return value_->get<std::int64_t>();
  }

  std::uint64_t as_unsigned() const {
    const auto v = as_integer();
    if (v < 0) fail("expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }

  bool as_bool() const {
    if (!value_->is_boolean()) fail("expected a boolean");
    return value_->get<bool>();
  }

 private:
  const json* value_;
  std::string path_;
};

/// Loads a JSON document; failures report the file path.
inline json load_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw SchemaError(file.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(file.string(), std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace hywm::detail
