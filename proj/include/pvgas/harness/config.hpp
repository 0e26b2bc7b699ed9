#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

/// Flat `key = value` configuration files checked against a typed schema.
namespace pvgas::harness {

enum class ValueType { kInt, kReal, kIntList, kRealList, kString };

struct KeySpec {
  std::string name;
  ValueType type;
  std::string default_value;
  std::string help;
};

using Schema = std::vector<KeySpec>;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  /// Lines `key = value`; `#` starts a comment; lists are comma separated.
  /// Unknown keys, duplicate keys and malformed values raise ConfigError.
  static Config parse(const std::string& text, const Schema& schema);
  static Config defaults(const Schema& schema);

  std::int64_t integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;  // integer >= 0
  double real(const std::string& key) const;
  std::vector<std::int64_t> integers(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  const std::string& string(const std::string& key) const;

  /// Sorted `key = value` lines including defaults; parsing it back gives the same config.
  std::string canonical() const;
  const std::map<std::string, std::string>& values() const { return raw_; }

 private:
  const KeySpec& spec(const std::string& key) const;

  Schema schema_;
  std::map<std::string, std::string> raw_;
};

}  // namespace pvgas::harness
