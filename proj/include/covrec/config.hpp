#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace covrec {

// Flat `key = value` configuration with `#` comments. Parsing is strict:
// duplicate keys and malformed lines are errors up front, and reject_unknown()
// turns any key nobody consumed into an error naming it, so typos in config
// files cannot silently fall back to defaults.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text);

  bool has(const std::string& key) const;

  // Getters mark the key consumed; the default is returned when absent.
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);

  // Throws listing every key that was parsed but never consumed.
  void reject_unknown() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::string raw(const std::string& key);

  std::map<std::string, std::string> kv_;
  std::set<std::string> consumed_;
};

// "32,64,128" -> {32,64,128}; throws on empty items or non-numeric text
std::vector<double> parse_number_list(const std::string& text);

// shortest representation that round-trips a double (printf %.17g)
std::string format_g17(double v);

// Column-checked CSV emission; all floating point at 17 significant digits.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& columns);
  void comment(const std::string& text);  // "# ..." line, ignored by readers

  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(double v);
  CsvWriter& cell(int v);
  CsvWriter& cell(std::uint64_t v);
  void end_row();

  void row(const std::vector<double>& values);

 private:
  std::ostream& out_;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
};

}  // namespace covrec
