#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace dzo {

// Parse or schema failure in a config document. The message already carries
// the line number and key when known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigValue;
using ConfigArray = std::vector<ConfigValue>;

// A scalar, string, bool, or (possibly nested) array value.
struct ConfigValue {
  std::variant<bool, double, std::string, ConfigArray> data;
  int line = 0;

  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_array() const { return std::holds_alternative<ConfigArray>(data); }

  double AsDouble(std::string_view key) const;
  long long AsInt(std::string_view key) const;
  bool AsBool(std::string_view key) const;
  const std::string& AsString(std::string_view key) const;
  const ConfigArray& AsArray(std::string_view key) const;
  std::vector<double> AsDoubleList(std::string_view key) const;
  std::vector<long long> AsIntList(std::string_view key) const;
  std::vector<std::string> AsStringList(std::string_view key) const;
  Eigen::MatrixXd AsMatrix(std::string_view key) const;
};

// One `[name]` block. Keys keep their source line for diagnostics; readers
// mark keys consumed so leftovers can be reported as unknown.
class ConfigSection {
 public:
  ConfigSection() = default;
  ConfigSection(std::string name, int line) : name_(std::move(name)), line_(line) {}

  const std::string& name() const { return name_; }
  int line() const { return line_; }

  void Set(const std::string& key, ConfigValue value);
  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  const ConfigValue& Get(const std::string& key) const;
  const std::map<std::string, ConfigValue>& values() const { return values_; }

  std::optional<double> OptDouble(const std::string& key) const;
  std::optional<long long> OptInt(const std::string& key) const;
  std::optional<bool> OptBool(const std::string& key) const;
  std::optional<std::string> OptString(const std::string& key) const;
  double DoubleOr(const std::string& key, double fallback) const;
  long long IntOr(const std::string& key, long long fallback) const;

  // Throws ConfigError naming the first key not in `allowed`.
  void RequireKnownKeys(const std::set<std::string>& allowed) const;

 private:
  std::string name_;
  int line_ = 0;
  std::map<std::string, ConfigValue> values_;
};

class ConfigDocument {
 public:
  static ConfigDocument Parse(std::string_view text);
  static ConfigDocument Load(const std::string& path);

  bool Has(const std::string& section) const { return sections_.count(section) > 0; }
  const ConfigSection& Section(const std::string& name) const;
  ConfigSection& MutableSection(const std::string& name);
  const std::map<std::string, ConfigSection>& sections() const { return sections_; }

  void RequireKnownSections(const std::set<std::string>& allowed) const;

 private:
  std::map<std::string, ConfigSection> sections_;
};

// Formats a double so that parsing it back gives the same value.
std::string FormatNumber(double v);

}  // namespace dzo
