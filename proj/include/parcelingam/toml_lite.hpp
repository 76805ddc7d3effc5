#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "parcelingam/errors.hpp"

namespace parcelingam::toml {

/// Minimal TOML reader/writer covering the subset this project emits:
/// [section] headers, key = value pairs, strings, integers, floats,
/// booleans, and (nested, possibly heterogeneous) arrays. Comments and
/// blank lines are skipped. Not a general TOML implementation.

struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<std::int64_t, double, bool, std::string, Array> data;

  bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
  bool is_float() const { return std::holds_alternative<double>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }

  std::int64_t as_int() const;
  double as_float() const;  // accepts integers
  bool as_bool() const;
  const std::string& as_string() const;
  const Array& as_array() const;
};

/// Section name ("" for the root table) -> key -> value.
using Document = std::map<std::string, std::map<std::string, Value>>;

Document parse(const std::string& text);

std::string serialize(const Document& doc,
                      const std::vector<std::string>& section_order = {});

std::string escape_string(const std::string& s);

}  // namespace parcelingam::toml
