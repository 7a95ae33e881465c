//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/config.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "polish/error.h"

namespace polish {

namespace {
  std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
      return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
}  // namespace

Config Config::parse(std::istream &is) {
  Config c;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw Error("config line " + std::to_string(number) + ": empty key");
    c.entries_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::parse(const std::string &text) {
  std::istringstream is(text);
  return parse(is);
}

Config Config::load(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is)
    throw IoError("cannot open config " + path.string());
  return parse(is);
}

std::optional<std::string> Config::get(const std::string &key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end())
    return std::nullopt;
  return it->second;
}

std::string Config::get_or(const std::string &key,
                           const std::string &fallback) const {
  return get(key).value_or(fallback);
}

double Config::get_double(const std::string &key, double fallback) const {
  const auto v = get(key);
  if (!v)
    return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used == v->size())
      return d;
  } catch (const std::exception &) {
  }
  throw Error("config " + key + ": not a number: " + *v);
}

long Config::get_long(const std::string &key, long fallback) const {
  const auto v = get(key);
  if (!v)
    return fallback;
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size())
    throw Error("config " + key + ": not an integer: " + *v);
  return out;
}

void Config::set(const std::string &key, const std::string &value) {
  entries_[key] = value;
}

void Config::merge(const Config &other) {
  for (const auto &[k, v]: other.entries_)
    entries_[k] = v;
}

void Config::write(std::ostream &os, const std::string &prefix) const {
  for (const auto &[k, v]: entries_)
    os << prefix << k << " = " << v << '\n';
}

}  // namespace polish
