#include <cmath>

#include "cfris/rng.hpp"
#include "cfris/scenario.hpp"
#include "doctest.h"

using namespace cfris;

namespace {

const char* kSampleConfig = R"(
# paper-scale dimensions
[system]
aps = 4
ues = 4
ris = 2
elements_per_ris = 64
subcarriers = 12
tx_antennas = 2
rx_antennas = 16

[power]
budget_dbm = 0

[channel]
iqi_level = 3
carrier_ghz = 28
spacing_hz = 15000

[run]
seed = 123
)";

}  // namespace

TEST_CASE("parse a full config") {
  const ScenarioConfig cfg = parse_config(kSampleConfig);
  CHECK(cfg.num_aps == 4);
  CHECK(cfg.num_subcarriers == 12);
  CHECK(cfg.elements_per_ris == 64);
  CHECK(cfg.rx_antennas == 16);
  CHECK(cfg.iqi_level == IqiLevel::level3);
  CHECK(cfg.rng_seed == 123);
  CHECK(cfg.streams() == 2);
  CHECK(cfg.total_rx() == 64);
  CHECK(cfg.total_ris_elements() == 128);
}

TEST_CASE("rejects odd or degenerate subcarrier counts") {
  ScenarioConfig cfg;
  cfg.num_subcarriers = 0;
  CHECK_THROWS_WITH_AS(cfg.validate(), "system.subcarriers: S must be even and >= 2",
                       ConfigError);
  cfg.num_subcarriers = 5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("seed defaults to zero when omitted") {
  const ScenarioConfig cfg = parse_config("[system]\nues = 2\n");
  CHECK(cfg.rng_seed == 0);
}

TEST_CASE("unknown keys and malformed values are reported") {
  CHECK_THROWS_AS(parse_config("[system]\nfoo = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[system]\nues = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("ues = 1\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("stream count invariant") {
  ScenarioConfig cfg;
  cfg.streams_per_ue = 5;  // > min(N_t, C*N_r)
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("thermal noise default") {
  ScenarioConfig cfg;
  cfg.spacing_hz = 15e3;
  cfg.noise_figure_db = 7.0;
  const double dbm = -174.0 + 10.0 * std::log10(15e3) + 7.0;
  CHECK(cfg.noise_power_mw() == doctest::Approx(std::pow(10.0, dbm / 10.0)).epsilon(1e-12));
  cfg.noise_mw = 0.5;
  CHECK(cfg.noise_power_mw() == 0.5);
}

TEST_CASE("subcarrier plan slots, mirrors, and bins") {
  const SubcarrierPlan plan{12};
  CHECK(plan.slot_of_index(-6) == 0);
  CHECK(plan.slot_of_index(-1) == 5);
  CHECK(plan.slot_of_index(1) == 6);
  CHECK(plan.slot_of_index(6) == 11);
  for (int slot = 0; slot < 12; ++slot) {
    const int s = plan.index_of_slot(slot);
    CHECK(plan.valid_index(s));
    CHECK(plan.slot_of_index(s) == slot);
    CHECK(plan.mirror(plan.mirror(s)) == s);
  }
  CHECK(plan.dft_bin(1) == 1);
  CHECK(plan.dft_bin(-1) == 11);
  CHECK(plan.dft_bin(-6) == 6);
  CHECK(!plan.valid_index(0));
  CHECK_THROWS(plan.slot_of_index(0));
}

TEST_CASE("full allocation covers every pair") {
  ScenarioConfig cfg;
  cfg.num_ues = 2;
  cfg.num_subcarriers = 4;
  const AllocationMap map = AllocationMap::full(cfg);
  CHECK(map.subcarriers_of(0) == std::vector<int>{-2, -1, 1, 2});
  CHECK(map.subcarriers_of(1) == std::vector<int>{-2, -1, 1, 2});
  for (int s : {-2, -1, 1, 2}) CHECK(map.ues_on(s) == std::vector<int>{0, 1});

  ScenarioConfig single;
  single.num_ues = 1;
  single.num_subcarriers = 2;
  const AllocationMap one = AllocationMap::full(single);
  CHECK(one.ues_on(-1) == std::vector<int>{0});
  CHECK(one.ues_on(1) == std::vector<int>{0});
}

TEST_CASE("restricted allocation keeps the dual views consistent") {
  // Brute-force duality check over random restrictions.
  Rng rng = Rng::from_seed(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 4, S = 6;
    const SubcarrierPlan plan{S};
    std::vector<std::vector<int>> per_ue(K);
    for (int k = 0; k < K; ++k) {
      for (int slot = 0; slot < S; ++slot) {
        if (rng.uniform() < 0.5) per_ue[k].push_back(plan.index_of_slot(slot));
      }
      if (per_ue[k].empty()) per_ue[k].push_back(1);
    }
    const AllocationMap map = AllocationMap::from_sets(K, S, per_ue);
    for (int k = 0; k < K; ++k) {
      for (int slot = 0; slot < S; ++slot) {
        const int s = plan.index_of_slot(slot);
        const auto& ues = map.ues_on(s);
        const bool in_ks = std::find(ues.begin(), ues.end(), k) != ues.end();
        CHECK(in_ks == map.serves(k, s));
      }
    }
  }
}

TEST_CASE("per-UE allocation from config") {
  const ScenarioConfig cfg = parse_config(
      "[system]\nues = 2\nsubcarriers = 4\n[alloc]\nue1 = -2 1\n");
  const AllocationMap map = AllocationMap::from_config(cfg);
  CHECK(map.subcarriers_of(0) == std::vector<int>{-2, 1});
  CHECK(map.subcarriers_of(1) == std::vector<int>{-2, -1, 1, 2});  // unnamed: all
  CHECK(map.ues_on(-1) == std::vector<int>{1});
}

TEST_CASE("cli-style overrides") {
  ScenarioConfig cfg;
  apply_override(cfg, "system.ues", "8");
  apply_override(cfg, "power.budget_dbm", "-10");
  CHECK(cfg.num_ues == 8);
  CHECK(cfg.power_dbm == -10.0);
  CHECK_THROWS_AS(apply_override(cfg, "nope.key", "1"), ConfigError);
}

TEST_CASE("geometry defaults and validation") {
  ScenarioConfig cfg;
  cfg.num_aps = 2;
  CHECK(cfg.resolved_ap_positions().size() == 2);
  CHECK(cfg.resolved_ris_positions().size() == 2);
  cfg.num_aps = 5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);  // no explicit positions for C > 4
  const ScenarioConfig geo = parse_config(
      "[system]\naps = 1\n[geometry]\nap = 0 0 10\nue_center = 5 5 1.5\n");
  CHECK(geo.resolved_ap_positions()[0].z == 10.0);
  CHECK(distance({0, 0, 0}, {3, 4, 0}) == doctest::Approx(5.0));
}
