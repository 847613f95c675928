#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tbnn {

// Flat TOML subset: `key = value` lines, # comments, values are integers,
// floats, booleans, "strings", or one-level arrays of those. Enough for the
// experiment configs; unknown syntax raises ConfigError with a line number.
struct TomlValue {
  enum class Kind { number, string, boolean, array } kind = Kind::number;
  double num = 0;
  bool is_integer = false;
  std::string str;
  bool boolean = false;
  std::vector<TomlValue> array;
};

class TomlTable {
 public:
  static TomlTable parse_file(const std::filesystem::path& path);
  static TomlTable parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::vector<std::string> keys() const;

  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_array(const std::string& key) const;
  std::vector<long long> get_int_array(const std::string& key) const;
  std::vector<std::string> get_string_array(const std::string& key) const;

 private:
  const TomlValue& require(const std::string& key) const;
  std::map<std::string, TomlValue> values_;
};

}  // namespace tbnn
