#include "cfris/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace cfris {
namespace {

struct LinkAngles {
  double aod_az, aod_el, aoa_az, aoa_el;
};

LinkAngles los_angles(const Vec3& tx, const Vec3& rx) {
  const double dx = rx.x - tx.x, dy = rx.y - tx.y, dz = rx.z - tx.z;
  const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
  LinkAngles a;
  a.aod_az = std::atan2(dy, dx);
  a.aod_el = std::asin(dz / d);
  a.aoa_az = std::atan2(-dy, -dx);
  a.aoa_el = std::asin(-dz / d);
  return a;
}

}  // namespace

CVec ula_response(double angle_rad, int n) {
  return upa_axis_response(std::sin(angle_rad), n);
}

CVec upa_axis_response(double directional_cosine, int n) {
  CVec v(n);
  for (int i = 0; i < n; ++i) {
    v(i) = std::exp(kImag * (kPi * static_cast<double>(i) * directional_cosine));
  }
  return v;
}

CVec upa_response(double azimuth_rad, double elevation_rad, int mx, int my) {
  const CVec ax = upa_axis_response(std::sin(azimuth_rad) * std::cos(elevation_rad), mx);
  const CVec ay = upa_axis_response(std::sin(elevation_rad), my);
  CVec out(mx * my);
  for (int i = 0; i < mx; ++i) {
    out.segment(i * my, my) = ax(i) * ay;
  }
  return out;
}

std::pair<int, int> squarest_factors(int m) {
  int lo = static_cast<int>(std::sqrt(static_cast<double>(m)));
  while (lo > 1 && m % lo != 0) --lo;
  return {m / lo, lo};
}

ArraySpec ArraySpec::make_upa(int m) {
  const auto [mx, my] = squarest_factors(m);
  return {ArrayKind::upa, m, mx, my};
}

double path_loss_db(double d_m, double f_ghz, double shadow_db) {
  if (d_m <= 0.0) throw std::invalid_argument("path_loss_db: distance must be > 0");
  return 22.0 * std::log10(d_m) + 28.0 + 20.0 * std::log10(f_ghz) + shadow_db;
}

CVec steering(const ArraySpec& spec, double az, double el) {
  if (spec.kind == ArrayKind::ula) return ula_response(az, spec.n);
  return upa_response(az, el, spec.nx, spec.ny);
}

TapSet gen_link_taps(const Vec3& tx_pos, const ArraySpec& tx, const Vec3& rx_pos,
                     const ArraySpec& rx, double kappa, const ScenarioConfig& cfg, Rng rng) {
  const double d = distance(tx_pos, rx_pos);
  if (d <= 0.0) throw std::invalid_argument("gen_link_taps: endpoints coincide");
  const LinkAngles los = los_angles(tx_pos, rx_pos);
  const double spread = deg2rad(cfg.angle_spread_deg);

  TapSet taps;
  taps.tx = tx;
  taps.rx = rx;

  const double los_shadow = rng.normal() * kShadowSigmaLosDb;
  const double g_los = std::pow(10.0, -path_loss_db(d, cfg.carrier_ghz, los_shadow) / 10.0);
  taps.los.delay = 0;
  taps.los.weight = std::sqrt(kappa / (kappa + 1.0)) * std::sqrt(g_los);
  taps.los.geom = {los.aod_az, los.aod_el, los.aoa_az, los.aoa_el};

  taps.nlos.reserve(static_cast<std::size_t>(cfg.num_taps) * cfg.paths_per_tap);
  for (int l = 0; l < cfg.num_taps; ++l) {
    for (int p = 0; p < cfg.paths_per_tap; ++p) {
      const double shadow = rng.normal() * kShadowSigmaNlosDb;
      const double g = std::pow(10.0, -path_loss_db(d, cfg.carrier_ghz, shadow) / 10.0);
      const cxd h = rng.cnormal();
      PathComponent path;
      path.delay = l;
      path.weight = std::sqrt(g / (kappa + 1.0)) * h;
      path.geom.aod_az = los.aod_az + rng.uniform(-spread, spread);
      path.geom.aod_el = los.aod_el + rng.uniform(-spread, spread);
      path.geom.aoa_az = los.aoa_az + rng.uniform(-spread, spread);
      path.geom.aoa_el = los.aoa_el + rng.uniform(-spread, spread);
      taps.nlos.push_back(path);
    }
  }
  return taps;
}

namespace {

CMat response_with_phase(const TapSet& taps, double phase_per_delay) {
  CMat out = CMat::Zero(taps.rx.n, taps.tx.n);
  auto add_path = [&](const PathComponent& path) {
    if (path.weight == cxd{0.0, 0.0}) return;
    const CVec ar = steering(taps.rx, path.geom.aoa_az, path.geom.aoa_el);
    const CVec at = steering(taps.tx, path.geom.aod_az, path.geom.aod_el);
    const cxd coeff = path.weight * std::exp(-kImag * (phase_per_delay * path.delay));
    out.noalias() += coeff * (ar * at.adjoint());
  };
  add_path(taps.los);
  for (const auto& path : taps.nlos) add_path(path);
  return out;
}

}  // namespace

CMat freq_response(const TapSet& taps, int s, int S) {
  return response_with_phase(taps, 2.0 * kPi * static_cast<double>(s) / S);
}

CMat freq_response_bin(const TapSet& taps, int bin, int S) {
  return response_with_phase(taps, 2.0 * kPi * static_cast<double>(bin) / S);
}

std::vector<Vec3> drop_ues(const ScenarioConfig& cfg, std::uint64_t realization) {
  const Rng root = Rng::from_seed(cfg.rng_seed).child(streams::kRealization, realization);
  std::vector<Vec3> out(cfg.num_ues);
  for (int k = 0; k < cfg.num_ues; ++k) {
    Rng rng = root.child(streams::kUeDrop, static_cast<std::uint64_t>(k));
    const double radius = cfg.ue_radius * std::sqrt(rng.uniform());
    const double ang = rng.uniform(0.0, 2.0 * kPi);
    out[k] = {cfg.ue_center.x + radius * std::cos(ang),
              cfg.ue_center.y + radius * std::sin(ang), cfg.ue_center.z};
  }
  return out;
}

ChannelSet assemble_channels(const ScenarioConfig& cfg, std::uint64_t realization, Exec exec) {
  cfg.validate();
  const int C = cfg.num_aps, K = cfg.num_ues, Q = cfg.num_ris;
  const int M = cfg.elements_per_ris, S = cfg.num_subcarriers;
  const int nt = cfg.tx_antennas, nr = cfg.rx_antennas;

  const Rng root = Rng::from_seed(cfg.rng_seed).child(streams::kRealization, realization);
  const auto ue_pos = drop_ues(cfg, realization);
  const auto ap_pos = cfg.resolved_ap_positions();
  const auto ris_pos = cfg.resolved_ris_positions();
  const ArraySpec ue_arr = ArraySpec::make_ula(nt);
  const ArraySpec ap_arr = ArraySpec::make_ula(nr);
  const ArraySpec ris_arr = ArraySpec::make_upa(M);

  std::vector<TapSet> ue_ris(static_cast<std::size_t>(Q) * K);   // [j*K + k]
  std::vector<TapSet> ris_ap(static_cast<std::size_t>(C) * Q);   // [c*Q + j]
  std::vector<TapSet> ue_ap(static_cast<std::size_t>(C) * K);    // [c*K + k]
  const std::int64_t n_links = static_cast<std::int64_t>(ue_ris.size() + ris_ap.size() + ue_ap.size());
  parallel_for(exec, n_links, [&](std::int64_t idx) {
    if (idx < static_cast<std::int64_t>(ue_ris.size())) {
      const int j = static_cast<int>(idx) / K, k = static_cast<int>(idx) % K;
      ue_ris[idx] = gen_link_taps(ue_pos[k], ue_arr, ris_pos[j], ris_arr, cfg.rician_factor,
                                  cfg, root.child(streams::kLinkUeRis, static_cast<std::uint64_t>(idx)));
      return;
    }
    std::int64_t rem = idx - static_cast<std::int64_t>(ue_ris.size());
    if (rem < static_cast<std::int64_t>(ris_ap.size())) {
      const int c = static_cast<int>(rem) / Q, j = static_cast<int>(rem) % Q;
      ris_ap[rem] = gen_link_taps(ris_pos[j], ris_arr, ap_pos[c], ap_arr, cfg.rician_factor,
                                  cfg, root.child(streams::kLinkRisAp, static_cast<std::uint64_t>(rem)));
      return;
    }
    rem -= static_cast<std::int64_t>(ris_ap.size());
    const int c = static_cast<int>(rem) / K, k = static_cast<int>(rem) % K;
    ue_ap[rem] = gen_link_taps(ue_pos[k], ue_arr, ap_pos[c], ap_arr, cfg.direct_rician_factor,
                               cfg, root.child(streams::kLinkUeAp, static_cast<std::uint64_t>(rem)));
  });

  ChannelSet set;
  set.plan = SubcarrierPlan{S};
  set.num_ues = K;
  set.G.resize(S);
  set.H.assign(S, std::vector<CMat>(K));
  set.R.assign(S, std::vector<CMat>(K));
  parallel_for(exec, S, [&](std::int64_t slot) {
    const int s = set.plan.index_of_slot(static_cast<int>(slot));
    CMat g = CMat::Zero(C * nr, Q * M);
    for (int c = 0; c < C; ++c) {
      for (int j = 0; j < Q; ++j) {
        g.block(c * nr, j * M, nr, M) = freq_response(ris_ap[c * Q + j], s, S);
      }
    }
    set.G[slot] = std::move(g);
    for (int k = 0; k < K; ++k) {
      CMat h = CMat::Zero(Q * M, nt);
      for (int j = 0; j < Q; ++j) {
        h.block(j * M, 0, M, nt) = freq_response(ue_ris[j * K + k], s, S);
      }
      set.H[slot][k] = std::move(h);
      CMat r = CMat::Zero(C * nr, nt);
      for (int c = 0; c < C; ++c) {
        r.block(c * nr, 0, nr, nt) = freq_response(ue_ap[c * K + k], s, S);
      }
      set.R[slot][k] = std::move(r);
    }
  });
  return set;
}

}  // namespace cfris
