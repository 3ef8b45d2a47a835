#include "cfris/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cfris {
namespace {

const std::vector<Vec3> kDefaultAps = {
    {-30.0, -30.0, 3.0}, {-30.0, 30.0, 3.0}, {30.0, -30.0, 3.0}, {30.0, 30.0, 3.0}};
const std::vector<Vec3> kDefaultRis = {{-20.0, 50.0, 10.0}, {20.0, 50.0, 10.0}};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse '" + value + "' as a number");
  }
}

long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": cannot parse '" + value + "' as an integer");
  }
}

Vec3 parse_vec3(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  Vec3 v;
  if (!(in >> v.x >> v.y >> v.z)) {
    throw ConfigError(key + ": expected three coordinates, got '" + value + "'");
  }
  std::string rest;
  if (in >> rest) throw ConfigError(key + ": trailing content '" + rest + "'");
  return v;
}

// Position lists use ';' between points: "x y z ; x y z ; ..."
std::vector<Vec3> parse_vec3_list(const std::string& key, const std::string& value) {
  std::vector<Vec3> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ';')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_vec3(key, item));
  }
  if (out.empty()) throw ConfigError(key + ": empty position list");
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::istringstream in(value);
  std::string tok;
  while (in >> tok) out.push_back(static_cast<int>(parse_int(key, tok)));
  return out;
}

}  // namespace

IqiLevel iqi_level_from_string(const std::string& text) {
  if (text == "ideal" || text == "0") return IqiLevel::ideal;
  if (text == "1" || text == "level1") return IqiLevel::level1;
  if (text == "2" || text == "level2") return IqiLevel::level2;
  if (text == "3" || text == "level3") return IqiLevel::level3;
  throw ConfigError("iqi level: expected one of ideal|1|2|3, got '" + text + "'");
}

const char* to_string(IqiLevel level) {
  switch (level) {
    case IqiLevel::ideal: return "ideal";
    case IqiLevel::level1: return "level1";
    case IqiLevel::level2: return "level2";
    case IqiLevel::level3: return "level3";
  }
  return "?";
}

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double ScenarioConfig::power_mw() const { return std::pow(10.0, power_dbm / 10.0); }

double ScenarioConfig::noise_power_mw() const {
  if (noise_mw.has_value()) return *noise_mw;
  // Thermal noise over one subcarrier of width spacing_hz, plus noise figure.
  const double dbm = -174.0 + 10.0 * std::log10(spacing_hz) + noise_figure_db;
  return std::pow(10.0, dbm / 10.0);
}

std::vector<Vec3> ScenarioConfig::resolved_ap_positions() const {
  if (!ap_positions.empty()) return ap_positions;
  return {kDefaultAps.begin(), kDefaultAps.begin() + num_aps};
}

std::vector<Vec3> ScenarioConfig::resolved_ris_positions() const {
  if (!ris_positions.empty()) return ris_positions;
  return {kDefaultRis.begin(), kDefaultRis.begin() + num_ris};
}

void ScenarioConfig::validate() const {
  if (num_subcarriers < 2 || num_subcarriers % 2 != 0) {
    throw ConfigError("system.subcarriers: S must be even and >= 2");
  }
  if (num_aps < 1) throw ConfigError("system.aps: C must be >= 1");
  if (num_ues < 1) throw ConfigError("system.ues: K must be >= 1");
  if (num_ris < 1) throw ConfigError("system.ris: Q must be >= 1");
  if (elements_per_ris < 1) throw ConfigError("system.elements_per_ris: M must be >= 1");
  if (tx_antennas < 1) throw ConfigError("system.tx_antennas: N_t must be >= 1");
  if (rx_antennas < 1) throw ConfigError("system.rx_antennas: N_r must be >= 1");
  const int b = streams();
  if (b < 1 || b > std::min(tx_antennas, num_aps * rx_antennas)) {
    throw ConfigError("system.streams: b_k must satisfy 1 <= b_k <= min(N_t, C*N_r)");
  }
  if (power_mw() <= 0.0) throw ConfigError("power.budget_dbm: p must be > 0");
  if (noise_power_mw() <= 0.0) throw ConfigError("power.noise_mw: noise power must be > 0");
  if (spacing_hz <= 0.0) throw ConfigError("channel.spacing_hz: subcarrier spacing must be > 0");
  if (carrier_ghz <= 0.0) throw ConfigError("channel.carrier_ghz: carrier frequency must be > 0");
  if (num_taps < 1) throw ConfigError("channel.taps: T must be >= 1");
  if (paths_per_tap < 0) throw ConfigError("channel.paths_per_tap: P must be >= 0");
  if (rician_factor < 0.0 || direct_rician_factor < 0.0) {
    throw ConfigError("channel.rician: Rician factor must be >= 0");
  }
  if (ue_radius < 0.0) throw ConfigError("geometry.ue_radius: radius must be >= 0");
  if (ap_positions.empty() && num_aps > static_cast<int>(kDefaultAps.size())) {
    throw ConfigError("geometry.ap: explicit AP positions required for C > 4");
  }
  if (!ap_positions.empty() && static_cast<int>(ap_positions.size()) != num_aps) {
    throw ConfigError("geometry.ap: position count must equal system.aps");
  }
  if (num_ris > 0 && ris_positions.empty() && num_ris > static_cast<int>(kDefaultRis.size())) {
    throw ConfigError("geometry.ris: explicit RIS positions required for Q > 2");
  }
  if (!ris_positions.empty() && static_cast<int>(ris_positions.size()) != num_ris) {
    throw ConfigError("geometry.ris: position count must equal system.ris");
  }
  if (!ue_subcarriers.empty()) {
    if (static_cast<int>(ue_subcarriers.size()) != num_ues) {
      throw ConfigError("alloc: per-UE subcarrier lists must cover all UEs");
    }
    const SubcarrierPlan plan{num_subcarriers};
    for (const auto& list : ue_subcarriers) {
      for (int s : list) {
        if (!plan.valid_index(s)) {
          throw ConfigError("alloc: subcarrier index " + std::to_string(s) +
                            " outside {-S/2..-1, 1..S/2}");
        }
      }
    }
  }
}

int SubcarrierPlan::slot_of_index(int s) const {
  if (!valid_index(s)) {
    throw std::out_of_range("subcarrier index " + std::to_string(s) + " invalid for S=" +
                            std::to_string(S));
  }
  return s < 0 ? s + S / 2 : S / 2 + s - 1;
}

int SubcarrierPlan::index_of_slot(int slot) const {
  if (slot < 0 || slot >= S) throw std::out_of_range("subcarrier slot out of range");
  return slot < S / 2 ? slot - S / 2 : slot - S / 2 + 1;
}

int SubcarrierPlan::dft_bin(int s) const {
  if (!valid_index(s)) {
    throw std::out_of_range("subcarrier index " + std::to_string(s) + " invalid for S=" +
                            std::to_string(S));
  }
  return s > 0 ? s : S + s;
}

AllocationMap AllocationMap::full(const ScenarioConfig& cfg) {
  return from_sets(cfg.num_ues, cfg.num_subcarriers, {});
}

AllocationMap AllocationMap::from_config(const ScenarioConfig& cfg) {
  return from_sets(cfg.num_ues, cfg.num_subcarriers, cfg.ue_subcarriers);
}

AllocationMap AllocationMap::from_sets(int num_ues, int num_subcarriers,
                                       const std::vector<std::vector<int>>& per_ue) {
  AllocationMap map;
  map.plan_ = SubcarrierPlan{num_subcarriers};
  map.per_ue_.resize(num_ues);
  map.per_slot_.resize(num_subcarriers);

  std::vector<int> all;
  for (int slot = 0; slot < num_subcarriers; ++slot) all.push_back(map.plan_.index_of_slot(slot));
  std::sort(all.begin(), all.end());

  for (int k = 0; k < num_ues; ++k) {
    std::vector<int> list = (per_ue.empty() || per_ue[k].empty()) ? all : per_ue[k];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    for (int s : list) map.per_slot_[map.plan_.slot_of_index(s)].push_back(k);
    map.per_ue_[k] = std::move(list);
  }
  return map;
}

bool AllocationMap::serves(int k, int s) const {
  const auto& list = per_ue_[k];
  return std::binary_search(list.begin(), list.end(), s);
}

namespace {

void apply_key(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "system.aps") cfg.num_aps = static_cast<int>(parse_int(key, value));
  else if (key == "system.ues") cfg.num_ues = static_cast<int>(parse_int(key, value));
  else if (key == "system.ris") cfg.num_ris = static_cast<int>(parse_int(key, value));
  else if (key == "system.elements_per_ris") cfg.elements_per_ris = static_cast<int>(parse_int(key, value));
  else if (key == "system.subcarriers") cfg.num_subcarriers = static_cast<int>(parse_int(key, value));
  else if (key == "system.tx_antennas") cfg.tx_antennas = static_cast<int>(parse_int(key, value));
  else if (key == "system.rx_antennas") cfg.rx_antennas = static_cast<int>(parse_int(key, value));
  else if (key == "system.streams") cfg.streams_per_ue = static_cast<int>(parse_int(key, value));
  else if (key == "power.budget_dbm") cfg.power_dbm = parse_double(key, value);
  else if (key == "power.noise_figure_db") cfg.noise_figure_db = parse_double(key, value);
  else if (key == "power.noise_mw") cfg.noise_mw = parse_double(key, value);
  else if (key == "channel.carrier_ghz") cfg.carrier_ghz = parse_double(key, value);
  else if (key == "channel.spacing_hz") cfg.spacing_hz = parse_double(key, value);
  else if (key == "channel.bandwidth_hz") cfg.bandwidth_hz = parse_double(key, value);
  else if (key == "channel.rician") cfg.rician_factor = parse_double(key, value);
  else if (key == "channel.rician_direct") cfg.direct_rician_factor = parse_double(key, value);
  else if (key == "channel.taps") cfg.num_taps = static_cast<int>(parse_int(key, value));
  else if (key == "channel.paths_per_tap") cfg.paths_per_tap = static_cast<int>(parse_int(key, value));
  else if (key == "channel.angle_spread_deg") cfg.angle_spread_deg = parse_double(key, value);
  else if (key == "channel.iqi_level") cfg.iqi_level = iqi_level_from_string(value);
  else if (key == "geometry.ap") cfg.ap_positions = parse_vec3_list(key, value);
  else if (key == "geometry.ris") cfg.ris_positions = parse_vec3_list(key, value);
  else if (key == "geometry.ue_center") cfg.ue_center = parse_vec3(key, value);
  else if (key == "geometry.ue_radius") cfg.ue_radius = parse_double(key, value);
  else if (key == "run.seed") cfg.rng_seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key.rfind("alloc.ue", 0) == 0) {
    const int k = static_cast<int>(parse_int(key, key.substr(8)));
    if (k < 1) throw ConfigError(key + ": UE ids are 1-based");
    if (static_cast<int>(cfg.ue_subcarriers.size()) < k) cfg.ue_subcarriers.resize(k);
    cfg.ue_subcarriers[k - 1] = parse_int_list(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

void apply_override(ScenarioConfig& cfg, const std::string& dotted_key, const std::string& value) {
  apply_key(cfg, trim(dotted_key), trim(value));
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key outside a [section]");
    }
    apply_key(cfg, section + "." + key, value);
  }
  // If [alloc] named only some UEs, pad the rest with "all subcarriers".
  if (!cfg.ue_subcarriers.empty() &&
      static_cast<int>(cfg.ue_subcarriers.size()) < cfg.num_ues) {
    cfg.ue_subcarriers.resize(cfg.num_ues);
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace cfris
