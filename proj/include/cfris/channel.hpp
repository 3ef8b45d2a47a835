#pragma once

#include <cstdint>
#include <vector>

#include "cfris/linalg.hpp"
#include "cfris/parallel.hpp"
#include "cfris/rng.hpp"
#include "cfris/scenario.hpp"

namespace cfris {

// Half-wavelength uniform linear array steering vector,
// element i = exp(i_unit * pi * i * sin(angle)).
CVec ula_response(double angle_rad, int n);

// Steering phases along one planar-array axis for a given directional cosine.
CVec upa_axis_response(double directional_cosine, int n);

// Half-wavelength uniform planar array response, Kronecker product of the
// horizontal axis (cosine sin(az)*cos(el)) and vertical axis (cosine sin(el)).
CVec upa_response(double azimuth_rad, double elevation_rad, int mx, int my);

// Squarest factorization m = mx * my with mx >= my.
std::pair<int, int> squarest_factors(int m);

inline constexpr double kShadowSigmaLosDb = 5.8;
inline constexpr double kShadowSigmaNlosDb = 8.0;

// 22 log10(d) + 28 + 20 log10(f) + shadow, d in meters, f in GHz.
double path_loss_db(double d_m, double f_ghz, double shadow_db);

enum class ArrayKind { ula, upa };
struct ArraySpec {
  ArrayKind kind = ArrayKind::ula;
  int n = 1;        // total elements
  int nx = 1, ny = 1;  // upa factorization
  static ArraySpec make_ula(int n) { return {ArrayKind::ula, n, n, 1}; }
  static ArraySpec make_upa(int m);
};

struct PathGeom {
  double aod_az = 0.0, aod_el = 0.0;  // departure
  double aoa_az = 0.0, aoa_el = 0.0;  // arrival
};

// One propagation path: complex weight (large-scale gain folded in) at an
// integer tap delay, with its departure/arrival angles.
struct PathComponent {
  int delay = 0;
  cxd weight{0.0, 0.0};
  PathGeom geom;
};

// Multipath description of one link. The line-of-sight component sits at
// delay zero; NLOS paths occupy taps 0..T-1, paths_per_tap each.
struct TapSet {
  ArraySpec tx, rx;
  PathComponent los;
  std::vector<PathComponent> nlos;
};

CVec steering(const ArraySpec& spec, double az, double el);

// LOS weight sqrt(kappa/(kappa+1)) * sqrt(g_los); NLOS path weights
// sqrt(g_path/(kappa+1)) * h with h ~ CN(0,1). NLOS angles are the LOS angles
// plus U[-spread, spread] perturbations. Draw order per link stream: LOS
// shadowing, then per (tap, path): shadowing, h, then the four angle offsets.
TapSet gen_link_taps(const Vec3& tx_pos, const ArraySpec& tx, const Vec3& rx_pos,
                     const ArraySpec& rx, double kappa, const ScenarioConfig& cfg, Rng rng);

// Frequency response at signed subcarrier index s (or raw DFT bin):
// sum of path outer products weighted by exp(-i 2 pi delay s / S); the LOS
// term is constant across subcarriers.
CMat freq_response(const TapSet& taps, int s, int S);
CMat freq_response_bin(const TapSet& taps, int bin, int S);

// Per-subcarrier stacked channels:
//   g(s):    (C*N_r) x (Q*M), RIS -> APs
//   h(s, k): (Q*M) x N_t,     UE k -> RISs
//   r(s, k): (C*N_r) x N_t,   UE k -> APs direct
struct ChannelSet {
  SubcarrierPlan plan;
  int num_ues = 0;
  std::vector<CMat> G;                 // [S]
  std::vector<std::vector<CMat>> H;    // [S][K]
  std::vector<std::vector<CMat>> R;    // [S][K]

  const CMat& g(int s) const { return G[plan.slot_of_index(s)]; }
  const CMat& h(int s, int k) const { return H[plan.slot_of_index(s)][k]; }
  const CMat& r(int s, int k) const { return R[plan.slot_of_index(s)][k]; }
};

std::vector<Vec3> drop_ues(const ScenarioConfig& cfg, std::uint64_t realization);

// Generates every link for one Monte Carlo realization and stacks the
// per-subcarrier matrices. Deterministic in (cfg.rng_seed, realization).
ChannelSet assemble_channels(const ScenarioConfig& cfg, std::uint64_t realization,
                             Exec exec = Exec::serial);

}  // namespace cfris
