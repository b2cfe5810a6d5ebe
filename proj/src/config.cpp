#include "covrec/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "covrec/errors.hpp"

namespace covrec {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return from_string(text.str());
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected `key = value`, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    if (!cfg.kv_.emplace(key, value).second)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
  }
  return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
  return kv_.count(key) != 0;
}

std::string KeyValueConfig::raw(const std::string& key) {
  consumed_.insert(key);
  return kv_.at(key);
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) {
  consumed_.insert(key);
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) {
  if (!has(key)) {
    consumed_.insert(key);
    return fallback;
  }
  const std::string v = raw(key);
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (errno != 0 || end != v.c_str() + v.size() || v.empty())
    throw ConfigError("config: key '" + key + "' is not a number: '" + v + "'");
  return x;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) {
  if (!has(key)) {
    consumed_.insert(key);
    return fallback;
  }
  const std::string v = raw(key);
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (errno != 0 || end != v.c_str() + v.size() || v.empty() ||
      x < -2147483648LL || x > 2147483647LL)
    throw ConfigError("config: key '" + key + "' is not an int: '" + v + "'");
  return static_cast<int>(x);
}

std::uint64_t KeyValueConfig::get_uint64(const std::string& key,
                                         std::uint64_t fallback) {
  if (!has(key)) {
    consumed_.insert(key);
    return fallback;
  }
  const std::string v = raw(key);
  char* end = nullptr;
  errno = 0;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 0);
  if (errno != 0 || end != v.c_str() + v.size() || v.empty() ||
      v.find('-') != std::string::npos)
    throw ConfigError("config: key '" + key +
                      "' is not an unsigned integer: '" + v + "'");
  return static_cast<std::uint64_t>(x);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) {
  if (!has(key)) {
    consumed_.insert(key);
    return fallback;
  }
  std::string v = raw(key);
  for (auto& ch : v) ch = static_cast<char>(std::tolower(ch));
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config: key '" + key + "' is not a boolean: '" + v + "'");
}

void KeyValueConfig::reject_unknown() const {
  std::string unknown;
  for (const auto& [key, value] : kv_) {
    (void)value;
    if (!consumed_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty())
    throw ConfigError("config: unknown keys: " + unknown);
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("number list: empty item in '" + text + "'");
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(item.c_str(), &end);
    if (errno != 0 || end != item.c_str() + item.size())
      throw ConfigError("number list: '" + item + "' is not a number");
    out.push_back(x);
  }
  if (out.empty()) throw ConfigError("number list: no values in '" + text + "'");
  return out;
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  if (columns.empty()) throw ConfigError("csv: empty header");
  columns_ = columns.size();
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << '\n'; }

CsvWriter& CsvWriter::cell(const std::string& v) {
  out_ << (in_row_ ? "," : "") << v;
  ++in_row_;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_g17(v)); }

CsvWriter& CsvWriter::cell(int v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(std::uint64_t v) { return cell(std::to_string(v)); }

void CsvWriter::end_row() {
  if (columns_ != 0 && in_row_ != columns_)
    throw InvariantError("csv: row has " + std::to_string(in_row_) +
                         " cells, header has " + std::to_string(columns_));
  out_ << '\n';
  in_row_ = 0;
}

void CsvWriter::row(const std::vector<double>& values) {
  for (const double v : values) cell(v);
  end_row();
}

}  // namespace covrec
