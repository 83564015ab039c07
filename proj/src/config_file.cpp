#include "lsmimo/config_file.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lsmimo {

namespace {

constexpr std::array<const char*, 9> kSystemKeys = {
    "bs_density",        "bandwidth_hz",     "max_power_dbm",
    "noise_psd_dbm_hz",  "noise_figure_db",  "snr_gap_db",
    "pathloss_exponent", "reference_distance_m", "users_per_cell"};
constexpr std::array<const char*, 4> kOperatingKeys = {
    "antennas", "multiplexing", "diversity", "nulling"};

bool known_key(const std::string& key) {
  auto match = [&key](const char* k) { return key == k; };
  return std::any_of(kSystemKeys.begin(), kSystemKeys.end(), match) ||
         std::any_of(kOperatingKeys.begin(), kOperatingKeys.end(), match);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_at(const std::string& origin, int line,
                          const std::string& what) {
  std::ostringstream msg;
  msg << origin;
  if (line > 0) {
    msg << ":" << line;
  }
  msg << ": " << what;
  throw std::invalid_argument(msg.str());
}

double parse_real(const std::string& origin, const std::string& key,
                  const std::string& value) {
  std::size_t used = 0;
  double parsed = 0.0;
  try {
    parsed = std::stod(value, &used);
  } catch (const std::exception&) {
    fail_at(origin, 0, "value for '" + key + "' is not a number: '" + value + "'");
  }
  if (used != value.size() || !std::isfinite(parsed)) {
    fail_at(origin, 0, "value for '" + key + "' is not a finite number: '" + value + "'");
  }
  return parsed;
}

int parse_int(const std::string& origin, const std::string& key,
              const std::string& value) {
  std::size_t used = 0;
  long parsed = 0;
  try {
    parsed = std::stol(value, &used);
  } catch (const std::exception&) {
    fail_at(origin, 0, "value for '" + key + "' is not an integer: '" + value + "'");
  }
  if (used != value.size()) {
    fail_at(origin, 0, "value for '" + key + "' is not an integer: '" + value + "'");
  }
  if (parsed < -1000000 || parsed > 1000000) {
    fail_at(origin, 0, "value for '" + key + "' is out of range: '" + value + "'");
  }
  return static_cast<int>(parsed);
}

} // namespace

ConfigDoc parse_config_text(const std::string& text, const std::string& origin) {
  ConfigDoc doc;
  doc.origin = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail_at(origin, lineno, "expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      fail_at(origin, lineno, "expected 'key = value', got '" + line + "'");
    }
    if (!known_key(key)) {
      fail_at(origin, lineno, "unknown key '" + key + "'");
    }
    for (const auto& [prev, ignored] : doc.entries) {
      (void)ignored;
      if (prev == key) {
        fail_at(origin, lineno, "duplicate key '" + key + "'");
      }
    }
    doc.entries.emplace_back(key, value);
  }
  if (doc.entries.empty()) {
    fail_at(origin, 0, "config contains no recognized keys");
  }
  return doc;
}

ConfigDoc load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void add_override(ConfigDoc& doc, const std::string& key_equals_value) {
  const auto eq = key_equals_value.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("override must be key=value, got '" +
                                key_equals_value + "'");
  }
  const std::string key = trim(key_equals_value.substr(0, eq));
  const std::string value = trim(key_equals_value.substr(eq + 1));
  if (key.empty() || value.empty() || !known_key(key)) {
    throw std::invalid_argument("override references unknown key '" + key + "'");
  }
  for (auto& [k, v] : doc.entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  doc.entries.emplace_back(key, value);
}

ConfigFile resolve(const ConfigDoc& doc) {
  ConfigFile cfg;
  OperatingPoint op;
  int op_keys_seen = 0;
  for (const auto& [key, value] : doc.entries) {
    if (key == "bs_density") cfg.sys.bs_density = parse_real(doc.origin, key, value);
    else if (key == "bandwidth_hz") cfg.sys.bandwidth_hz = parse_real(doc.origin, key, value);
    else if (key == "max_power_dbm") cfg.sys.max_power_dbm = parse_real(doc.origin, key, value);
    else if (key == "noise_psd_dbm_hz") cfg.sys.noise_psd_dbm_hz = parse_real(doc.origin, key, value);
    else if (key == "noise_figure_db") cfg.sys.noise_figure_db = parse_real(doc.origin, key, value);
    else if (key == "snr_gap_db") cfg.sys.snr_gap_db = parse_real(doc.origin, key, value);
    else if (key == "pathloss_exponent") cfg.sys.pathloss_exponent = parse_real(doc.origin, key, value);
    else if (key == "reference_distance_m") cfg.sys.reference_distance_m = parse_real(doc.origin, key, value);
    else if (key == "users_per_cell") cfg.sys.users_per_cell = parse_int(doc.origin, key, value);
    else if (key == "antennas") { op.antennas = parse_int(doc.origin, key, value); ++op_keys_seen; }
    else if (key == "multiplexing") { op.multiplexing = parse_int(doc.origin, key, value); ++op_keys_seen; }
    else if (key == "diversity") { op.diversity = parse_int(doc.origin, key, value); ++op_keys_seen; }
    else if (key == "nulling") { op.nulling = parse_int(doc.origin, key, value); ++op_keys_seen; }
  }
  validate(cfg.sys);
  if (op_keys_seen == 4) {
    validate(op, cfg.sys);
    cfg.op = op;
  } else if (op_keys_seen != 0) {
    fail_at(doc.origin, 0,
            "operating-point keys (antennas, multiplexing, diversity, "
            "nulling) must appear together");
  }
  return cfg;
}

std::string serialize_config(const ConfigFile& cfg, const std::string& comment) {
  std::ostringstream out;
  out.precision(17);
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string line;
    while (std::getline(lines, line)) {
      out << "# " << line << "\n";
    }
  }
  out << "bs_density = " << cfg.sys.bs_density << "\n"
      << "bandwidth_hz = " << cfg.sys.bandwidth_hz << "\n"
      << "max_power_dbm = " << cfg.sys.max_power_dbm << "\n"
      << "noise_psd_dbm_hz = " << cfg.sys.noise_psd_dbm_hz << "\n"
      << "noise_figure_db = " << cfg.sys.noise_figure_db << "\n"
      << "snr_gap_db = " << cfg.sys.snr_gap_db << "\n"
      << "pathloss_exponent = " << cfg.sys.pathloss_exponent << "\n"
      << "reference_distance_m = " << cfg.sys.reference_distance_m << "\n"
      << "users_per_cell = " << cfg.sys.users_per_cell << "\n";
  if (cfg.op) {
    out << "antennas = " << cfg.op->antennas << "\n"
        << "multiplexing = " << cfg.op->multiplexing << "\n"
        << "diversity = " << cfg.op->diversity << "\n"
        << "nulling = " << cfg.op->nulling << "\n";
  }
  return out.str();
}

} // namespace lsmimo
