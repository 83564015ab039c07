// Flat key/value config files: UTF-8, one `key = value` per line, `#`
// comments. Keys are exactly the SystemParams and OperatingPoint field
// names; anything else is a hard error so a typo cannot silently fall back
// to a default.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lsmimo/params.hpp"

namespace lsmimo {

// Parsed-but-unresolved document: key order preserved for error reporting.
struct ConfigDoc {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string origin;
};

// Resolved configuration on top of built-in defaults.
struct ConfigFile {
  SystemParams sys;
  std::optional<OperatingPoint> op; // present iff the operating keys appear
};

// Syntax and key checking. Throws std::invalid_argument for malformed lines,
// unknown keys, duplicate keys, or a document with no recognized key at all
// (an empty config is always a mistake).
ConfigDoc parse_config_text(const std::string& text, const std::string& origin);

ConfigDoc load_config(const std::string& path);

// One CLI `--set key=value`; replaces an earlier value for the same key.
void add_override(ConfigDoc& doc, const std::string& key_equals_value);

// Overlay entries onto defaults and validate. The four operating keys
// (antennas, multiplexing, diversity, nulling) must appear together or not
// at all; numeric parses must consume the whole token.
ConfigFile resolve(const ConfigDoc& doc);

// Render a complete config document; `comment` (may be multi-line) is
// emitted as a leading `#` block. Scenario presets use it to record every
// choice the preset made beyond the baseline tables.
std::string serialize_config(const ConfigFile& cfg, const std::string& comment);

} // namespace lsmimo
