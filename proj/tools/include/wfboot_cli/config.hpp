#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "wfboot/errors.hpp"
#include "wfboot/experiment.hpp"

namespace wfboot::cli {

/// Configuration problem tied to a specific key.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string key, const std::string& why)
      : ValidationError(key + ": " + why), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Flat "section.key" -> raw value map read from an INI-style file.
///
///   # comment
///   [dgp]
///   alphas = 1.0, 0.8
///
/// Keys outside any section are rejected. Later assignments win.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_config_text(std::string_view text);
KeyValues load_config_file(const std::string& path);

/// Applies "section.key=value" overrides.
void apply_overrides(KeyValues& kv, const std::vector<std::string>& overrides);

/// One design cell of a simulation grid (a figure panel).
struct PanelSpec {
  std::string label;
  DgpConfig dgp;
};

/// Fully resolved simulation request: shared experiment settings plus one
/// or more design cells. Without a [grid] section there is a single cell
/// taken from [dgp].
struct SimulationPlan {
  ExperimentConfig experiment;
  std::vector<PanelSpec> panels;
};

/// Resolves and validates a configuration; throws ConfigError naming the
/// offending key.
SimulationPlan resolve_plan(const KeyValues& kv);

/// Canonical key/value form of a resolved plan, independent of the key
/// order or formatting of the source file.
KeyValues canonical_entries(const SimulationPlan& plan);

/// Hex SHA-256 of the canonical entries.
std::string config_digest(const SimulationPlan& plan);

std::string panel_label(const DgpConfig& dgp);

// Value parsers shared with the command layer.
double parse_double(std::string_view text, const std::string& key);
long long parse_int(std::string_view text, const std::string& key);
std::vector<double> parse_list(std::string_view text, const std::string& key);
std::vector<PanelSize> parse_sizes(std::string_view text, const std::string& key);
std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

}  // namespace wfboot::cli
