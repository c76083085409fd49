// Copyright 2026
// See LICENSE.txt

#include "bsens/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "bsens/errors.hpp"

namespace bsens::toml {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw DomainError("config.toml", "line " + std::to_string(line) + ": " + msg);
}

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// removes a trailing comment that is not inside a string literal
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    else if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

Value parse_scalar(const std::string& raw, int line) {
  const std::string t = strip(raw);
  if (t.empty()) fail(line, "empty value");
  Value v;
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"') fail(line, "unterminated string");
    v.type = Value::Type::string;
    v.str = t.substr(1, t.size() - 2);
    return v;
  }
  if (t == "true" || t == "false") {
    v.type = Value::Type::boolean;
    v.b = (t == "true");
    return v;
  }
  try {
    std::size_t pos = 0;
    v.num = std::stod(t, &pos);
    if (pos != t.size()) fail(line, "trailing characters after number '" + t + "'");
    v.type = Value::Type::number;
    return v;
  } catch (const DomainError&) {
    throw;
  } catch (const std::exception&) {
    fail(line, "unparseable value '" + t + "'");
  }
}

Value parse_value(const std::string& raw, int line) {
  const std::string t = strip(raw);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') fail(line, "unterminated array (arrays must be one line)");
    Value v;
    v.type = Value::Type::array;
    std::string inner = t.substr(1, t.size() - 2);
    std::string cur;
    bool in_str = false;
    for (char c : inner) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        if (!strip(cur).empty()) v.arr.push_back(parse_scalar(cur, line));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!strip(cur).empty()) v.arr.push_back(parse_scalar(cur, line));
    return v;
  }
  return parse_scalar(t, line);
}

}  // namespace

Document parse_string(const std::string& text) {
  Document doc;
  Table* current = &doc.root;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = strip(strip_comment(line));
    if (t.empty()) continue;

    if (t.size() >= 4 && t.substr(0, 2) == "[[" && t.substr(t.size() - 2) == "]]") {
      const std::string name = strip(t.substr(2, t.size() - 4));
      if (name.empty()) fail(lineno, "empty table-array name");
      doc.table_arrays[name].emplace_back();
      current = &doc.table_arrays[name].back();
      continue;
    }
    if (t.front() == '[' && t.back() == ']') {
      const std::string name = strip(t.substr(1, t.size() - 2));
      if (name.empty()) fail(lineno, "empty table name");
      current = &doc.tables[name];
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    const std::string key = strip(t.substr(0, eq));
    if (key.empty()) fail(lineno, "empty key");
    for (char c : key)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
        fail(lineno, "invalid key '" + key + "'");
    if (current->has(key)) fail(lineno, "duplicate key '" + key + "'");
    current->values[key] = parse_value(t.substr(eq + 1), lineno);
  }
  return doc;
}

Document parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("config.toml", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

}  // namespace bsens::toml
