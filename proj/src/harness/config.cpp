#include "pvgas/harness/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <sstream>

namespace pvgas::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE) throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
  return x;
}

double parse_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE) throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  return x;
}

void check_value(const KeySpec& k, const std::string& v) {
  switch (k.type) {
    case ValueType::kInt:
      parse_int(k.name, v);
      break;
    case ValueType::kReal:
      parse_double(k.name, v);
      break;
    case ValueType::kIntList:
      for (const auto& s : split_list(v))
        if (s.empty()) throw ConfigError("key '" + k.name + "': empty list item");
        else parse_int(k.name, s);
      break;
    case ValueType::kRealList:
      for (const auto& s : split_list(v))
        if (s.empty()) throw ConfigError("key '" + k.name + "': empty list item");
        else parse_double(k.name, s);
      break;
    case ValueType::kString:
      break;
  }
}

}  // namespace

Config Config::defaults(const Schema& schema) {
  Config c;
  c.schema_ = schema;
  for (const auto& k : schema) c.raw_[k.name] = k.default_value;
  return c;
}

Config Config::parse(const std::string& text, const Schema& schema) {
  Config c = defaults(schema);
  std::map<std::string, int> seen;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto it = std::find_if(schema.begin(), schema.end(), [&](const KeySpec& k) { return k.name == key; });
    if (it == schema.end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (seen[key]++) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    check_value(*it, value);
    c.raw_[key] = value;
  }
  return c;
}

const KeySpec& Config::spec(const std::string& key) const {
  const auto it = std::find_if(schema_.begin(), schema_.end(), [&](const KeySpec& k) { return k.name == key; });
  if (it == schema_.end()) throw ConfigError("key '" + key + "' is not part of the schema");
  return *it;
}

std::int64_t Config::integer(const std::string& key) const {
  spec(key);
  return parse_int(key, raw_.at(key));
}

std::size_t Config::count(const std::string& key) const {
  const auto v = integer(key);
  if (v < 0) throw ConfigError("key '" + key + "' must be nonnegative");
  return static_cast<std::size_t>(v);
}

double Config::real(const std::string& key) const {
  spec(key);
  return parse_double(key, raw_.at(key));
}

std::vector<std::int64_t> Config::integers(const std::string& key) const {
  spec(key);
  std::vector<std::int64_t> out;
  for (const auto& s : split_list(raw_.at(key))) out.push_back(parse_int(key, s));
  return out;
}

std::vector<double> Config::reals(const std::string& key) const {
  spec(key);
  std::vector<double> out;
  for (const auto& s : split_list(raw_.at(key))) out.push_back(parse_double(key, s));
  return out;
}

const std::string& Config::string(const std::string& key) const {
  spec(key);
  return raw_.at(key);
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : raw_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace pvgas::harness
