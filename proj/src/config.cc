#include "dzo/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dzo {
namespace {

std::string Where(int line, std::string_view key) {
  std::string s = "line " + std::to_string(line);
  if (!key.empty()) s += ", key '" + std::string(key) + "'";
  return s;
}

class ValueParser {
 public:
  ValueParser(std::string_view text, int line) : text_(text), line_(line) {}

  ConfigValue ParseTop(std::string_view key) {
    key_ = key;
    SkipSpace();
    ConfigValue v = ParseValue();
    SkipSpace();
    if (pos_ != text_.size()) Fail("unexpected trailing characters '" +
                                  std::string(text_.substr(pos_)) + "'");
    return v;
  }

 private:
  [[noreturn]] void Fail(const std::string& msg) const {
    throw ConfigError(Where(line_, key_) + ": " + msg);
  }

  void SkipSpace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  ConfigValue ParseValue() {
    if (pos_ >= text_.size()) Fail("missing value");
    const char c = text_[pos_];
    ConfigValue v;
    v.line = line_;
    if (c == '[') {
      ++pos_;
      ConfigArray items;
      SkipSpace();
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        v.data = std::move(items);
        return v;
      }
      while (true) {
        SkipSpace();
        items.push_back(ParseValue());
        SkipSpace();
        if (pos_ >= text_.size()) Fail("unterminated array");
        if (text_[pos_] == ',') {
          ++pos_;
          SkipSpace();
          // Allow a trailing comma.
          if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            break;
          }
          continue;
        }
        if (text_[pos_] == ']') {
          ++pos_;
          break;
        }
        Fail("expected ',' or ']' in array");
      }
      v.data = std::move(items);
      return v;
    }
    if (c == '"') {
      ++pos_;
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
        s.push_back(text_[pos_++]);
      }
      if (pos_ >= text_.size()) Fail("unterminated string");
      ++pos_;
      v.data = std::move(s);
      return v;
    }
    // Bare token: bool or number.
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    const std::string_view tok = text_.substr(start, pos_ - start);
    if (tok == "true" || tok == "false") {
      v.data = (tok == "true");
      return v;
    }
    double d = 0.0;
    std::string buf(tok);
    char* end = nullptr;
    d = std::strtod(buf.c_str(), &end);
    if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(d))
      Fail("cannot parse value '" + buf + "' (strings must be quoted)");
    v.data = d;
    return v;
  }

  std::string_view text_;
  int line_;
  std::string_view key_;
  std::size_t pos_ = 0;
};

std::string StripComment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (!in_string && line[i] == '#') return line.substr(0, i);
  }
  return line;
}

std::string Trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

int BracketBalance(const std::string& s) {
  int depth = 0;
  bool in_string = false;
  for (char c : s) {
    if (c == '"') in_string = !in_string;
    if (in_string) continue;
    if (c == '[') ++depth;
    if (c == ']') --depth;
  }
  return depth;
}

}  // namespace

double ConfigValue::AsDouble(std::string_view key) const {
  if (!is_number()) throw ConfigError(Where(line, key) + ": expected a number");
  return std::get<double>(data);
}

long long ConfigValue::AsInt(std::string_view key) const {
  const double d = AsDouble(key);
  if (d != std::floor(d) || std::fabs(d) > 9.007199254740992e15)
    throw ConfigError(Where(line, key) + ": expected an integer, got " + FormatNumber(d));
  return static_cast<long long>(d);
}

bool ConfigValue::AsBool(std::string_view key) const {
  if (!is_bool()) throw ConfigError(Where(line, key) + ": expected true or false");
  return std::get<bool>(data);
}

const std::string& ConfigValue::AsString(std::string_view key) const {
  if (!is_string()) throw ConfigError(Where(line, key) + ": expected a quoted string");
  return std::get<std::string>(data);
}

const ConfigArray& ConfigValue::AsArray(std::string_view key) const {
  if (!is_array()) throw ConfigError(Where(line, key) + ": expected an array");
  return std::get<ConfigArray>(data);
}

std::vector<double> ConfigValue::AsDoubleList(std::string_view key) const {
  std::vector<double> out;
  for (const auto& v : AsArray(key)) out.push_back(v.AsDouble(key));
  return out;
}

std::vector<long long> ConfigValue::AsIntList(std::string_view key) const {
  std::vector<long long> out;
  for (const auto& v : AsArray(key)) out.push_back(v.AsInt(key));
  return out;
}

std::vector<std::string> ConfigValue::AsStringList(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& v : AsArray(key)) out.push_back(v.AsString(key));
  return out;
}

Eigen::MatrixXd ConfigValue::AsMatrix(std::string_view key) const {
  const auto& rows = AsArray(key);
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  const std::size_t cols = rows.front().AsArray(key).size();
  Eigen::MatrixXd m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = rows[r].AsDoubleList(key);
    if (row.size() != cols)
      throw ConfigError(Where(rows[r].line, key) + ": ragged matrix row " + std::to_string(r));
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
  }
  return m;
}

void ConfigSection::Set(const std::string& key, ConfigValue value) {
  if (values_.count(key))
    throw ConfigError(Where(value.line, key) + ": duplicate key in [" + name_ + "]");
  values_.emplace(key, std::move(value));
}

const ConfigValue& ConfigSection::Get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("line " + std::to_string(line_) + ": [" + name_ + "] is missing key '" +
                      key + "'");
  return it->second;
}

std::optional<double> ConfigSection::OptDouble(const std::string& key) const {
  if (!Has(key)) return std::nullopt;
  return Get(key).AsDouble(key);
}

std::optional<long long> ConfigSection::OptInt(const std::string& key) const {
  if (!Has(key)) return std::nullopt;
  return Get(key).AsInt(key);
}

std::optional<bool> ConfigSection::OptBool(const std::string& key) const {
  if (!Has(key)) return std::nullopt;
  return Get(key).AsBool(key);
}

std::optional<std::string> ConfigSection::OptString(const std::string& key) const {
  if (!Has(key)) return std::nullopt;
  return Get(key).AsString(key);
}

double ConfigSection::DoubleOr(const std::string& key, double fallback) const {
  return OptDouble(key).value_or(fallback);
}

long long ConfigSection::IntOr(const std::string& key, long long fallback) const {
  return OptInt(key).value_or(fallback);
}

void ConfigSection::RequireKnownKeys(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (!allowed.count(key))
      throw ConfigError(Where(value.line, key) + ": unknown key in [" + name_ + "]");
  }
}

ConfigDocument ConfigDocument::Parse(std::string_view text) {
  ConfigDocument doc;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  ConfigSection* current = nullptr;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = Trim(StripComment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string::npos) {
      if (line.back() != ']') throw ConfigError(Where(line_no, "") + ": malformed section header");
      const std::string name = Trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError(Where(line_no, "") + ": empty section name");
      if (doc.sections_.count(name))
        throw ConfigError(Where(line_no, "") + ": duplicate section [" + name + "]");
      current = &doc.sections_.emplace(name, ConfigSection(name, line_no)).first->second;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(Where(line_no, "") + ": expected 'key = value'");
    const std::string key = Trim(line.substr(0, eq));
    std::string value_text = Trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(Where(line_no, "") + ": empty key");
    if (!current) throw ConfigError(Where(line_no, key) + ": key outside of any [section]");
    const int start_line = line_no;
    // Arrays may span several lines.
    while (BracketBalance(value_text) > 0 && std::getline(in, raw)) {
      ++line_no;
      value_text += " " + Trim(StripComment(raw));
    }
    if (BracketBalance(value_text) != 0)
      throw ConfigError(Where(start_line, key) + ": unbalanced brackets");
    ValueParser parser(value_text, start_line);
    current->Set(key, parser.ParseTop(key));
  }
  return doc;
}

ConfigDocument ConfigDocument::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

const ConfigSection& ConfigDocument::Section(const std::string& name) const {
  auto it = sections_.find(name);
  if (it == sections_.end()) throw ConfigError("missing section [" + name + "]");
  return it->second;
}

ConfigSection& ConfigDocument::MutableSection(const std::string& name) {
  auto it = sections_.find(name);
  if (it == sections_.end()) it = sections_.emplace(name, ConfigSection(name, 0)).first;
  return it->second;
}

void ConfigDocument::RequireKnownSections(const std::set<std::string>& allowed) const {
  for (const auto& [name, section] : sections_) {
    if (!allowed.count(name))
      throw ConfigError("line " + std::to_string(section.line()) + ": unknown section [" + name +
                        "]");
  }
}

std::string FormatNumber(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace dzo
