//
// SPDX-License-Identifier: Apache-2.0
//

#ifndef POLISH_CONFIG_H_
#define POLISH_CONFIG_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace polish {

// Flat "key = value" file. '#' starts a comment; later keys override earlier
// ones. Values are kept as written.
class Config {
public:
  static Config parse(std::istream &is);
  static Config parse(const std::string &text);
  static Config load(const std::filesystem::path &path);

  std::optional<std::string> get(const std::string &key) const;
  std::string get_or(const std::string &key, const std::string &fallback) const;
  double get_double(const std::string &key, double fallback) const;
  long get_long(const std::string &key, long fallback) const;

  void set(const std::string &key, const std::string &value);
  // Keys of other take precedence.
  void merge(const Config &other);

  const std::map<std::string, std::string> &entries() const { return entries_; }
  // One "key = value" line per entry, sorted by key.
  void write(std::ostream &os, const std::string &prefix = "") const;

private:
  std::map<std::string, std::string> entries_;
};

}  // namespace polish

#endif  // POLISH_CONFIG_H_
