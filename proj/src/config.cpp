#include "wavepatch/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace wavepatch {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
                    c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size())
      throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': '" + text +
                                "' is not a number");
  }
}

std::string format_double(double value) {
  std::ostringstream out;
  out << std::setprecision(17) << value;
  return out.str();
}

}  // namespace

ConfigMap ConfigMap::parse_text(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key))
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": bad key '" + key + "'");
    if (value.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty value for '" + key + "'");
    if (map.has(key))
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": duplicate key '" + key + "'");
    map.order_.push_back(key);
    map.values_.push_back(value);
  }
  return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_text(buffer.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

bool ConfigMap::has(const std::string& key) const {
  return std::find(order_.begin(), order_.end(), key) != order_.end();
}

const std::string& ConfigMap::raw(const std::string& key) const {
  const auto it = std::find(order_.begin(), order_.end(), key);
  if (it == order_.end())
    throw std::out_of_range("missing config key '" + key + "'");
  return values_[static_cast<std::size_t>(it - order_.begin())];
}

std::string ConfigMap::get_string(const std::string& key) const {
  return raw(key);
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double ConfigMap::get_double(const std::string& key) const {
  return parse_double(key, raw(key));
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int ConfigMap::get_int(const std::string& key) const {
  const double v = get_double(key);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw std::invalid_argument("config key '" + key +
                                "': expected an integer");
  return i;
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool ConfigMap::get_bool(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw std::invalid_argument("config key '" + key +
                              "': expected true or false");
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}

std::vector<double> ConfigMap::get_list(const std::string& key) const {
  std::istringstream in(raw(key));
  std::vector<double> values;
  std::string token;
  while (in >> token) values.push_back(parse_double(key, token));
  if (values.empty())
    throw std::invalid_argument("config key '" + key + "': empty list");
  return values;
}

std::vector<double> ConfigMap::get_list(
    const std::string& key, const std::vector<double>& fallback) const {
  return has(key) ? get_list(key) : fallback;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  if (!valid_key(key))
    throw std::invalid_argument("ConfigMap::set: bad key '" + key + "'");
  const std::string v = trim(value);
  if (v.empty() || v.find('\n') != std::string::npos ||
      v.find('#') != std::string::npos)
    throw std::invalid_argument("ConfigMap::set: bad value for '" + key +
                                "'");
  const auto it = std::find(order_.begin(), order_.end(), key);
  if (it == order_.end()) {
    order_.push_back(key);
    values_.push_back(v);
  } else {
    values_[static_cast<std::size_t>(it - order_.begin())] = v;
  }
}

void ConfigMap::set_double(const std::string& key, double value) {
  set(key, format_double(value));
}

void ConfigMap::set_int(const std::string& key, long long value) {
  set(key, std::to_string(value));
}

void ConfigMap::set_bool(const std::string& key, bool value) {
  set(key, value ? "true" : "false");
}

void ConfigMap::set_list(const std::string& key,
                         const std::vector<double>& values) {
  if (values.empty())
    throw std::invalid_argument("ConfigMap::set_list: empty list for '" +
                                key + "'");
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ' ';
    out << format_double(values[i]);
  }
  set(key, out.str());
}

void ConfigMap::require_known(
    const std::vector<std::string>& allowed) const {
  std::string offenders;
  for (const std::string& key : order_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      if (!offenders.empty()) offenders += ", ";
      offenders += key;
    }
  }
  if (!offenders.empty())
    throw std::invalid_argument("unknown config keys: " + offenders);
}

std::string ConfigMap::serialize() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < order_.size(); ++i)
    out << order_[i] << " = " << values_[i] << '\n';
  return out.str();
}

void ConfigMap::write_atomic(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << serialize();
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace wavepatch
