#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfris {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class IqiLevel { ideal = 0, level1 = 1, level2 = 2, level3 = 3 };

IqiLevel iqi_level_from_string(const std::string& text);
const char* to_string(IqiLevel level);

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};
double distance(const Vec3& a, const Vec3& b);

// Complete description of one experiment. Linear powers are in milliwatt
// throughout the code base (dBm-friendly); see docs/config.md.
// Immutable once validated; safe to share across concurrent realizations.
struct ScenarioConfig {
  // dimensions
  int num_aps = 2;            // C
  int num_ues = 4;            // K
  int num_ris = 2;            // Q
  int elements_per_ris = 16;  // M
  int num_subcarriers = 4;    // S, even; indices {-S/2..-1, 1..S/2}
  int tx_antennas = 2;        // N_t per UE
  int rx_antennas = 4;        // N_r per AP
  int streams_per_ue = 0;     // b_k; 0 means min(N_t, 2)

  // power and noise
  double power_dbm = 0.0;              // per UE per subcarrier budget
  double noise_figure_db = 7.0;        // used by the thermal-noise default
  std::optional<double> noise_mw;      // explicit override

  // radio and multipath model
  double carrier_ghz = 28.0;
  double spacing_hz = 15e3;
  double bandwidth_hz = 180e3;
  double rician_factor = 10.0;         // RIS-segment links
  double direct_rician_factor = 10.0;  // UE->AP links
  int num_taps = 4;                    // T
  int paths_per_tap = 4;               // P_l
  double angle_spread_deg = 10.0;      // NLOS spread around the LOS angle
  IqiLevel iqi_level = IqiLevel::level3;

  // geometry, meters; empty position lists fall back to the default layout
  std::vector<Vec3> ap_positions;
  std::vector<Vec3> ris_positions;
  Vec3 ue_center{0.0, 350.0, 1.5};
  double ue_radius = 30.0;

  // optional per-UE subcarrier restriction (signed indices); empty = all
  std::vector<std::vector<int>> ue_subcarriers;

  std::uint64_t rng_seed = 0;

  int streams() const { return streams_per_ue > 0 ? streams_per_ue : std::min(tx_antennas, 2); }
  int total_rx() const { return num_aps * rx_antennas; }
  int total_ris_elements() const { return num_ris * elements_per_ris; }
  double power_mw() const;
  double noise_power_mw() const;
  std::vector<Vec3> resolved_ap_positions() const;
  std::vector<Vec3> resolved_ris_positions() const;

  // Throws ConfigError naming the offending field and constraint.
  void validate() const;
};

// Signed subcarrier bookkeeping: slot t in [0, S) maps to index
// (-S/2, ..., -1, 1, ..., S/2); s and -s form an image pair.
struct SubcarrierPlan {
  int S = 0;

  bool valid_index(int s) const { return s != 0 && s >= -S / 2 && s <= S / 2; }
  static int mirror(int s) { return -s; }
  int slot_of_index(int s) const;
  int index_of_slot(int slot) const;
  // DFT bin n(s) in [0, S): n = s for s > 0, n = S + s for s < 0. The
  // frequency response itself is evaluated at the signed index; the bin is
  // the diagnostic alias (both give the same complex exponential).
  int dft_bin(int s) const;
};

// Per-UE subcarrier sets and, dually, per-subcarrier UE sets.
class AllocationMap {
 public:
  static AllocationMap full(const ScenarioConfig& cfg);
  // `per_ue` holds signed indices; empty inner list means all subcarriers.
  static AllocationMap from_sets(int num_ues, int num_subcarriers,
                                 const std::vector<std::vector<int>>& per_ue);
  static AllocationMap from_config(const ScenarioConfig& cfg);

  const SubcarrierPlan& plan() const { return plan_; }
  int num_ues() const { return static_cast<int>(per_ue_.size()); }
  const std::vector<int>& subcarriers_of(int k) const { return per_ue_[k]; }
  const std::vector<int>& ues_on(int s) const { return per_slot_[plan_.slot_of_index(s)]; }
  bool serves(int k, int s) const;

 private:
  SubcarrierPlan plan_;
  std::vector<std::vector<int>> per_ue_;    // signed indices, ascending
  std::vector<std::vector<int>> per_slot_;  // UE ids, ascending
};

ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text);
// `dotted_key` is "section.key" as in the config file, e.g. "system.ues".
void apply_override(ScenarioConfig& cfg, const std::string& dotted_key, const std::string& value);

}  // namespace cfris
