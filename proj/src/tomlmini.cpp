#include "tbnn/tomlmini.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "tbnn/errors.hpp"

namespace tbnn {

namespace {

struct Cursor {
  const std::string& s;
  size_t pos = 0;
  int line;

  bool done() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }
  void skip_ws() {
    while (!done() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("toml line " + std::to_string(line) + ": " + msg);
  }
};

TomlValue parse_scalar(Cursor& c);

TomlValue parse_value(Cursor& c) {
  c.skip_ws();
  if (c.done()) c.fail("missing value");
  if (c.peek() == '[') {
    ++c.pos;
    TomlValue v;
    v.kind = TomlValue::Kind::array;
    c.skip_ws();
    if (!c.done() && c.peek() == ']') {
      ++c.pos;
      return v;
    }
    while (true) {
      v.array.push_back(parse_scalar(c));
      c.skip_ws();
      if (c.done()) c.fail("unterminated array");
      if (c.peek() == ',') {
        ++c.pos;
        c.skip_ws();
        continue;
      }
      if (c.peek() == ']') {
        ++c.pos;
        return v;
      }
      c.fail("expected ',' or ']' in array");
    }
  }
  return parse_scalar(c);
}

TomlValue parse_scalar(Cursor& c) {
  c.skip_ws();
  if (c.done()) c.fail("missing value");
  TomlValue v;
  char ch = c.peek();
  if (ch == '"') {
    ++c.pos;
    v.kind = TomlValue::Kind::string;
    while (!c.done() && c.peek() != '"') {
      v.str.push_back(c.peek());
      ++c.pos;
    }
    if (c.done()) c.fail("unterminated string");
    ++c.pos;
    return v;
  }
  if (std::isalpha(static_cast<unsigned char>(ch))) {
    std::string word;
    while (!c.done() && std::isalpha(static_cast<unsigned char>(c.peek()))) {
      word.push_back(c.peek());
      ++c.pos;
    }
    if (word == "true" || word == "false") {
      v.kind = TomlValue::Kind::boolean;
      v.boolean = (word == "true");
      return v;
    }
    c.fail("unexpected token '" + word + "'");
  }
  std::string num;
  bool saw_float_char = false;
  while (!c.done() && (std::isdigit(static_cast<unsigned char>(c.peek())) ||
                       c.peek() == '+' || c.peek() == '-' || c.peek() == '.' ||
                       c.peek() == 'e' || c.peek() == 'E' || c.peek() == '_')) {
    char d = c.peek();
    if (d == '.' || d == 'e' || d == 'E') saw_float_char = true;
    if (d != '_') num.push_back(d);
    ++c.pos;
  }
  if (num.empty()) c.fail("expected a value");
  char* end = nullptr;
  v.num = std::strtod(num.c_str(), &end);
  if (end != num.c_str() + num.size()) c.fail("bad number '" + num + "'");
  v.kind = TomlValue::Kind::number;
  v.is_integer = !saw_float_char;
  return v;
}

}  // namespace

TomlTable TomlTable::parse_string(const std::string& text) {
  TomlTable t;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    // strip comment (respecting quoted strings)
    std::string line;
    bool quoted = false;
    for (char ch : raw) {
      if (ch == '"') quoted = !quoted;
      if (ch == '#' && !quoted) break;
      if (ch == '\r') continue;
      line.push_back(ch);
    }
    Cursor c{line, 0, lineno};
    c.skip_ws();
    if (c.done()) continue;
    if (c.peek() == '[') c.fail("tables/sections are not supported");
    std::string key;
    while (!c.done() &&
           (std::isalnum(static_cast<unsigned char>(c.peek())) ||
            c.peek() == '_' || c.peek() == '-')) {
      key.push_back(c.peek());
      ++c.pos;
    }
    if (key.empty()) c.fail("expected a key");
    c.skip_ws();
    if (c.done() || c.peek() != '=') c.fail("expected '=' after key");
    ++c.pos;
    TomlValue v = parse_value(c);
    c.skip_ws();
    if (!c.done()) c.fail("trailing characters after value");
    if (t.values_.count(key)) c.fail("duplicate key '" + key + "'");
    t.values_[key] = std::move(v);
  }
  return t;
}

TomlTable TomlTable::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

std::vector<std::string> TomlTable::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : values_) out.push_back(k);
  return out;
}

const TomlValue& TomlTable::require(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

double TomlTable::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::number)
    throw ConfigError("config key '" + key + "' must be a number");
  return v.num;
}

long long TomlTable::get_int(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::number || !v.is_integer)
    throw ConfigError("config key '" + key + "' must be an integer");
  return static_cast<long long>(v.num);
}

std::string TomlTable::get_string(const std::string& key,
                                  const std::string& fallback) const {
  if (!has(key)) return fallback;
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::string)
    throw ConfigError("config key '" + key + "' must be a string");
  return v.str;
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::boolean)
    throw ConfigError("config key '" + key + "' must be a boolean");
  return v.boolean;
}

std::vector<double> TomlTable::get_double_array(const std::string& key) const {
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::array)
    throw ConfigError("config key '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& e : v.array) {
    if (e.kind != TomlValue::Kind::number)
      throw ConfigError("config key '" + key + "' must hold numbers");
    out.push_back(e.num);
  }
  return out;
}

std::vector<long long> TomlTable::get_int_array(const std::string& key) const {
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::array)
    throw ConfigError("config key '" + key + "' must be an array");
  std::vector<long long> out;
  for (const auto& e : v.array) {
    if (e.kind != TomlValue::Kind::number || !e.is_integer)
      throw ConfigError("config key '" + key + "' must hold integers");
    out.push_back(static_cast<long long>(e.num));
  }
  return out;
}

std::vector<std::string> TomlTable::get_string_array(
    const std::string& key) const {
  const TomlValue& v = require(key);
  if (v.kind != TomlValue::Kind::array)
    throw ConfigError("config key '" + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : v.array) {
    if (e.kind != TomlValue::Kind::string)
      throw ConfigError("config key '" + key + "' must hold strings");
    out.push_back(e.str);
  }
  return out;
}

}  // namespace tbnn
