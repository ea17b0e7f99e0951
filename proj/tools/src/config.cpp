#include "app/config.hpp"

#include "app/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace app {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_as(const std::string& key, const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("setting " + key + ": cannot parse '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Settings Settings::parse(std::istream& in, const std::string& source) {
  Settings s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || trim(t.substr(0, eq)).empty()) {
      throw InputError(source + ":" + std::to_string(line_no) + ": expected key=value");
    }
    s.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return s;
}

Settings Settings::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  return parse(in, path.string());
}

void Settings::set(const std::string& key, const std::string& value) { values_[key] = value; }

void Settings::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

bool Settings::has(const std::string& key) const { return values_.contains(key); }

const std::string* Settings::find(const std::string& key) const {
  read_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

void Settings::record_default(const std::string& key, const std::string& value) const {
  defaults_.emplace(key, value);
}

std::string Settings::get(const std::string& key, const std::string& fallback) const {
  if (const auto* v = find(key)) return *v;
  record_default(key, fallback);
  return fallback;
}

double Settings::get_double(const std::string& key, double fallback) const {
  if (const auto* v = find(key)) return parse_as<double>(key, *v);
  record_default(key, format_double(fallback));
  return fallback;
}

std::int64_t Settings::get_int(const std::string& key, std::int64_t fallback) const {
  if (const auto* v = find(key)) return parse_as<std::int64_t>(key, *v);
  record_default(key, std::to_string(fallback));
  return fallback;
}

std::uint64_t Settings::get_uint(const std::string& key, std::uint64_t fallback) const {
  if (const auto* v = find(key)) return parse_as<std::uint64_t>(key, *v);
  record_default(key, std::to_string(fallback));
  return fallback;
}

bool Settings::get_bool(const std::string& key, bool fallback) const {
  if (const auto* v = find(key)) {
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw std::invalid_argument("setting " + key + ": expected a boolean, got '" + *v + "'");
  }
  record_default(key, fallback ? "true" : "false");
  return fallback;
}

std::vector<double> Settings::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  if (const auto* v = find(key)) {
    std::vector<double> out;
    for (const auto& item : split_list(*v)) out.push_back(parse_as<double>(key, item));
    if (out.empty()) throw std::invalid_argument("setting " + key + ": empty list");
    return out;
  }
  std::string text;
  for (double d : fallback) text += (text.empty() ? "" : ",") + format_double(d);
  record_default(key, text);
  return fallback;
}

std::vector<std::int64_t> Settings::get_ints(const std::string& key,
                                             const std::vector<std::int64_t>& fallback) const {
  if (const auto* v = find(key)) {
    std::vector<std::int64_t> out;
    const auto colon = v->find(':');
    if (colon != std::string::npos) {
      const auto a = parse_as<std::int64_t>(key, trim(v->substr(0, colon)));
      const auto b = parse_as<std::int64_t>(key, trim(v->substr(colon + 1)));
      if (b < a) throw std::invalid_argument("setting " + key + ": empty range");
      for (auto i = a; i <= b; ++i) out.push_back(i);
      return out;
    }
    for (const auto& item : split_list(*v)) out.push_back(parse_as<std::int64_t>(key, item));
    if (out.empty()) throw std::invalid_argument("setting " + key + ": empty list");
    return out;
  }
  std::string text;
  for (auto i : fallback) text += (text.empty() ? "" : ",") + std::to_string(i);
  record_default(key, text);
  return fallback;
}

std::vector<std::string> Settings::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!read_.contains(k)) out.push_back(k);
  }
  return out;
}

void Settings::echo(std::ostream& out) const {
  std::map<std::string, std::string> all = defaults_;
  for (const auto& [k, v] : values_) all[k] = v;
  for (const auto& [k, v] : all) out << k << '=' << v << '\n';
}

}  // namespace app
