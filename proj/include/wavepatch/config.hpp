/// @file config.hpp
/// Flat key/value configuration text: one "key = value" per line, '#' starts
/// a comment, keys are dotted lowercase words.  The same format serves as
/// input configuration and as the run manifest, so a manifest can be parsed
/// back with the same code that reads configs.

#pragma once

#include <string>
#include <vector>

namespace wavepatch {

class ConfigMap {
 public:
  /// Parses configuration text.  Malformed lines, empty values, bad keys,
  /// and duplicate keys all throw std::invalid_argument naming the line.
  static ConfigMap parse_text(const std::string& text);
  /// Reads and parses a file; missing or unreadable files throw
  /// std::runtime_error.
  static ConfigMap parse_file(const std::string& path);

  bool has(const std::string& key) const;
  /// Keys in first-seen order.
  const std::vector<std::string>& keys() const { return order_; }
  std::size_t size() const { return order_.size(); }

  /// Typed getters; the no-fallback forms throw std::invalid_argument when
  /// the key is missing, and all forms throw when the value does not parse
  /// as the requested type.
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Space-separated list of numbers, at least one entry.
  std::vector<double> get_list(const std::string& key) const;
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& fallback) const;

  /// Insert or overwrite, preserving first-seen order.
  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, long long value);
  void set_bool(const std::string& key, bool value);
  void set_list(const std::string& key, const std::vector<double>& values);

  /// Rejects any key not in `allowed`; the error lists every offender.
  void require_known(const std::vector<std::string>& allowed) const;

  /// "key = value" lines in first-seen order.
  std::string serialize() const;
  /// Serializes to path via a sibling temp file and an atomic rename.
  void write_atomic(const std::string& path) const;

 private:
  const std::string& raw(const std::string& key) const;

  std::vector<std::string> order_;
  std::vector<std::string> values_;
};

}  // namespace wavepatch
