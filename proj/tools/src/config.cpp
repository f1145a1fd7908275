#include "carnot/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "carnot/expr.hpp"
#include "carnot/rational.hpp"

namespace carnot::cli {

namespace {

enum class Kind { Word, Words, Number, Numbers, Integer, Bool, Expression, Bracket, Path };

struct KeySpec {
  const char* name;
  Kind kind;
  bool repeatable = false;
};

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys{
      {"group", Kind::Word},
      {"group.layers", Kind::Numbers},
      {"group.bracket", Kind::Bracket, true},
      {"manifold", Kind::Word},
      {"manifold.parameters", Kind::Words},
      {"manifold.domain", Kind::Numbers},
      {"manifold.coordinates", Kind::Word},
      {"manifold.component", Kind::Expression, true},
      {"point", Kind::Numbers},
      {"grid", Kind::Integer},
      {"grid.step", Kind::Number},
      {"tolerance", Kind::Number},
      {"epsilons", Kind::Numbers},
      {"calibration.samples", Kind::Integer},
      {"region", Kind::Numbers},
      {"method", Kind::Word},
      {"nodes", Kind::Integer},
      {"radii", Kind::Numbers},
      {"R", Kind::Number},
      {"n", Kind::Integer},
      {"samples", Kind::Integer},
      {"strata", Kind::Integer},
      {"theta.samples", Kind::Integer},
      {"span", Kind::Numbers, true},
      {"lambda", Kind::Numbers},
      {"t_max", Kind::Number},
      {"steps", Kind::Integer},
      {"t_values", Kind::Numbers},
      {"refine", Kind::Bool},
      {"seed", Kind::Integer},
      {"output", Kind::Path},
      {"format", Kind::Word},
  };
  return keys;
}

const KeySpec* find_spec(const std::string& key) {
  for (const auto& s : schema())
    if (key == s.name) return &s;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  return s.substr(begin, s.find_last_not_of(" \t\r") - begin + 1);
}

std::vector<std::string> split(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double parse_double(const std::string& key, const std::string& token) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v))
    throw ConfigError("'" + key + "' expects numbers, got '" + token + "'");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::int64_t parse_integer(const std::string& key, const std::string& token) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ConfigError("'" + key + "' expects an integer, got '" + token + "'");
  return v;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
  return out;
}

std::string normalize(const KeySpec& spec, const std::string& raw) {
  const std::string key = spec.name;
  const std::vector<std::string> tokens = split(raw);
  if (tokens.empty()) throw ConfigError("'" + key + "' has no value");
  switch (spec.kind) {
    case Kind::Word:
      if (tokens.size() != 1) throw ConfigError("'" + key + "' expects a single word");
      return tokens[0];
    case Kind::Words:
      return join(tokens);
    case Kind::Path:
      return trim(raw);
    case Kind::Number:
      if (tokens.size() != 1) throw ConfigError("'" + key + "' expects a single number");
      return format_double(parse_double(key, tokens[0]));
    case Kind::Numbers: {
      std::vector<std::string> out;
      for (const auto& t : tokens) out.push_back(format_double(parse_double(key, t)));
      return join(out);
    }
    case Kind::Integer:
      if (tokens.size() != 1) throw ConfigError("'" + key + "' expects a single integer");
      return std::to_string(parse_integer(key, tokens[0]));
    case Kind::Bool:
      if (tokens.size() != 1 || (tokens[0] != "true" && tokens[0] != "false"))
        throw ConfigError("'" + key + "' expects true or false");
      return tokens[0];
    case Kind::Expression:
      try {
        return print_expr(parse_expr(raw));
      } catch (const Error& e) {
        throw ConfigError("'" + key + "': " + e.what());
      }
    case Kind::Bracket: {
      if (tokens.size() != 4) throw ConfigError("'" + key + "' expects 'i j k coefficient'");
      std::vector<std::string> out;
      for (int i = 0; i < 3; ++i) {
        const std::int64_t v = parse_integer(key, tokens[static_cast<std::size_t>(i)]);
        if (v < 1) throw ConfigError("'" + key + "' indices are 1-based");
        out.push_back(std::to_string(v));
      }
      Rational c;
      try {
        c = Rational(tokens[3]);
        c.canonicalize();
      } catch (const std::exception&) {
        throw ConfigError("'" + key + "' coefficient must be an integer or fraction, got '" + tokens[3] + "'");
      }
      out.push_back(c.get_str());
      return join(out);
    }
  }
  return raw;
}

const KeySpec& spec_for(const std::string& key) {
  const KeySpec* spec = find_spec(key);
  if (!spec) throw ConfigError("unknown key '" + key + "'");
  return *spec;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& s : schema()) out.emplace_back(s.name);
    return out;
  }();
  return keys;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    try {
      const KeySpec& spec = spec_for(key);
      if (spec.repeatable) c.add(key, line.substr(eq + 1));
      else if (c.has(key)) throw ConfigError("'" + key + "' given twice");
      else c.set(key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + std::string(e.what()).substr(8));
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& spec : schema())
    for (const auto& [key, value] : entries_)
      if (key == spec.name) out += key + " = " + value + "\n";
  return out;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_text())));
  return buf;
}

bool RunConfig::has(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec& spec = spec_for(key);
  if (spec.repeatable) throw ConfigError("'" + key + "' is repeatable; use add");
  const std::string v = normalize(spec, value);
  for (auto& e : entries_)
    if (e.first == key) {
      e.second = v;
      return;
    }
  entries_.emplace_back(key, v);
}

void RunConfig::add(const std::string& key, const std::string& value) {
  const KeySpec& spec = spec_for(key);
  if (!spec.repeatable) throw ConfigError("'" + key + "' is not repeatable");
  entries_.emplace_back(key, normalize(spec, value));
}

std::string RunConfig::text(const std::string& key) const {
  spec_for(key);
  for (const auto& e : entries_)
    if (e.first == key) return e.second;
  throw ConfigError("missing key '" + key + "'");
}

std::string RunConfig::text_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

std::vector<std::string> RunConfig::all(const std::string& key) const {
  spec_for(key);
  std::vector<std::string> out;
  for (const auto& e : entries_)
    if (e.first == key) out.push_back(e.second);
  return out;
}

double RunConfig::number(const std::string& key) const { return parse_double(key, text(key)); }

double RunConfig::number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

std::int64_t RunConfig::integer(const std::string& key) const { return parse_integer(key, text(key)); }

std::int64_t RunConfig::integer_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& t : split(text(key))) out.push_back(parse_double(key, t));
  return out;
}

std::optional<std::vector<double>> RunConfig::numbers_if(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return numbers(key);
}

std::vector<std::string> RunConfig::words(const std::string& key) const { return split(text(key)); }

bool RunConfig::flag_or(const std::string& key, bool fallback) const { return has(key) ? text(key) == "true" : fallback; }

}  // namespace carnot::cli
