// Copyright 2026
// See LICENSE.txt
//
// Minimal TOML subset sufficient for experiment configs: [tables],
// [[arrays of tables]], and key = value lines with strings, numbers,
// booleans, and single-line arrays of those.

#pragma once
#include <map>
#include <string>
#include <vector>

namespace bsens::toml {

struct Value {
  enum class Type { number, boolean, string, array };
  Type type = Type::number;
  double num = 0.0;
  bool b = false;
  std::string str;
  std::vector<Value> arr;

  bool is_number() const { return type == Type::number; }
  bool is_bool() const { return type == Type::boolean; }
  bool is_string() const { return type == Type::string; }
  bool is_array() const { return type == Type::array; }
};

struct Table {
  std::map<std::string, Value> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  const Value* find(const std::string& key) const {
    auto it = values.find(key);
    return it == values.end() ? nullptr : &it->second;
  }
};

struct Document {
  Table root;
  std::map<std::string, Table> tables;
  std::map<std::string, std::vector<Table>> table_arrays;

  bool has_table(const std::string& name) const { return tables.count(name) != 0; }
};

// Both throw bsens::DomainError with a line number on malformed input.
Document parse_file(const std::string& path);
Document parse_string(const std::string& text);

}  // namespace bsens::toml
