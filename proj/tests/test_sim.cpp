#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "marq/sim/motion.hpp"
#include "marq/sim/world.hpp"

using namespace marq;
using namespace marq::sim;

namespace {

SimSettings base_settings() {
  SimSettings s;
  s.env_side = 150.0;
  s.tx_rx_distance = 10.0;
  s.seed = 42;
  return s;
}

/// O(N^2) overlap check over all alive molecules.
bool any_overlap(const World& w) {
  for (std::size_t i = 0; i < w.molecules.size(); ++i) {
    if (!w.molecules[i].alive) continue;
    for (std::size_t k = i + 1; k < w.molecules.size(); ++k) {
      if (!w.molecules[k].alive) continue;
      const double min_d = w.molecules[i].radius + w.molecules[k].radius;
      if (distance2(w.molecules[i].pos, w.molecules[k].pos) < min_d * min_d - 1e-12) return true;
    }
  }
  return false;
}

bool all_inside(const World& w) {
  for (const Molecule& m : w.molecules)
    if (m.alive && !w.box.contains_sphere(m.pos, m.radius)) return false;
  return true;
}

}  // namespace

TEST_CASE("settings validation rejects bad geometry") {
  SimSettings s = base_settings();
  CHECK_NOTHROW(s.validate());
  s.tx_rx_distance = 146.0;  // 146 + 2.5 + 2.5 >= 150
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = base_settings();
  s.duplicates = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = base_settings();
  s.diffusion_coeff = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("init_world with no noise holds only Tx and Rx") {
  SimSettings s = base_settings();
  s.noise_count = 0;
  const World w = init_world(s);
  CHECK(w.molecules.empty());
  CHECK(w.mobile_ids.empty());
  CHECK(w.tx_center == Vec3{-5.0, 0.0, 0.0});
  CHECK(w.rx_center == Vec3{+5.0, 0.0, 0.0});
  CHECK_FALSE(w.microtubule.has_value());
}

TEST_CASE("init_world is deterministic given the seed") {
  SimSettings s = base_settings();
  s.noise_count = 500;
  const World a = init_world(s);
  const World b = init_world(s);
  REQUIRE(a.molecules.size() == b.molecules.size());
  for (std::size_t i = 0; i < a.molecules.size(); ++i)
    CHECK(a.molecules[i].pos == b.molecules[i].pos);

  s.seed = 43;
  const World c = init_world(s);
  bool all_equal = true;
  for (std::size_t i = 0; i < a.molecules.size(); ++i)
    if (!(a.molecules[i].pos == c.molecules[i].pos)) all_equal = false;
  CHECK_FALSE(all_equal);
}

TEST_CASE("init_world places noise without overlaps, inside the box") {
  SimSettings s = base_settings();
  s.noise_count = 150;
  const World w = init_world(s);
  REQUIRE(w.molecules.size() == 150);
  CHECK_FALSE(any_overlap(w));
  CHECK(all_inside(w));
  for (const Molecule& m : w.molecules) {
    CHECK(m.state == Motion::Stationary);
    CHECK_FALSE(w.overlaps_tx(m.pos, m.radius));
    CHECK_FALSE(w.overlaps_rx(m.pos, m.radius));
  }
}

TEST_CASE("init_world handles the full 1e5 noise load", "[slow]") {
  SimSettings s = base_settings();
  s.noise_count = 100000;
  const World w = init_world(s);
  REQUIRE(w.molecules.size() == 100000);
  // Grid-based pairwise check: cells are wide enough that any overlapping
  // pair shares a 27-cell neighborhood.
  bool overlap = false;
  for (const Molecule& m : w.molecules) {
    w.grid.for_each_neighbor(m.pos, [&](std::int32_t id) {
      if (id == m.id || overlap) return;
      const Molecule& o = w.mol(id);
      const double min_d = m.radius + o.radius;
      if (distance2(m.pos, o.pos) < min_d * min_d - 1e-12) overlap = true;
    });
  }
  CHECK_FALSE(overlap);
}

TEST_CASE("init_world reports placement failure when the box cannot fit the noise") {
  SimSettings s = base_settings();
  s.env_side = 12.0;
  s.tx_rx_distance = 5.0;
  s.noise_count = 2000;
  CHECK_THROWS_AS(init_world(s), PlacementError);
}

TEST_CASE("microtubule corridor stays clear of noise for directional transport") {
  SimSettings s = base_settings();
  s.transport = Transport::Directional;
  s.noise_count = 2000;
  const World w = init_world(s);
  REQUIRE(w.microtubule.has_value());
  const Microtubule& mt = *w.microtubule;
  const double clearance = mt.capture_radius + s.mol_radius() + s.noise_radius();
  for (const Molecule& m : w.molecules)
    CHECK(distance_to_segment(mt.tx_end, mt.rx_end, m.pos) >= clearance);
}

TEST_CASE("grid neighbor query is a superset of brute-force overlap candidates") {
  SimSettings s = base_settings();
  s.noise_count = 200;
  World w = init_world(s);
  Rng rng(7);
  std::uniform_real_distribution<double> jitter(-1.5, 1.5);
  for (const Molecule& probe : w.molecules) {
    const Vec3 p = probe.pos + Vec3{jitter(rng), jitter(rng), jitter(rng)};
    const double r = 1.2;
    // brute force: all molecules overlapping a sphere (p, r)
    std::vector<std::int32_t> brute;
    for (const Molecule& m : w.molecules)
      if (m.alive && distance2(p, m.pos) < (m.radius + r) * (m.radius + r)) brute.push_back(m.id);
    std::vector<std::int32_t> from_grid;
    w.grid.for_each_neighbor(p, [&](std::int32_t id) { from_grid.push_back(id); });
    for (std::int32_t id : brute)
      CHECK(std::find(from_grid.begin(), from_grid.end(), id) != from_grid.end());
  }
}

TEST_CASE("diffusive displacement std matches sqrt(2 D dt)") {
  // D=0.5, dt=0.1 -> per-axis std sqrt(0.1) ~= 0.3162
  SimSettings s = base_settings();
  CHECK(std::sqrt(2.0 * s.diffusion_coeff * s.dt) == Catch::Approx(0.31622776601).epsilon(1e-9));
}

TEST_CASE("empty-world Brownian variance converges to 2 D dt per step") {
  SimSettings s = base_settings();
  s.env_side = 1000.0;  // boundaries far away
  s.noise_count = 0;
  World w = init_world(s);
  Molecule probe;
  probe.kind = MolKind::Info;
  probe.state = Motion::Diffusing;
  probe.radius = s.mol_radius();
  probe.pos = {200.0, 200.0, 200.0};  // far from Tx/Rx
  const std::int32_t id = detail::add_molecule(w, probe);

  Rng rng(123);
  const int kSamples = 10000;
  std::vector<double> dx, dy, dz;
  for (int i = 0; i < kSamples; ++i) {
    const Vec3 before = w.mol(id).pos;
    diffusive_step(w, w.mol(id), rng);
    const Vec3 d = w.mol(id).pos - before;
    dx.push_back(d.x);
    dy.push_back(d.y);
    dz.push_back(d.z);
  }
  const double expected = 2.0 * s.diffusion_coeff * s.dt;
  CHECK(variance(dx) == Catch::Approx(expected).epsilon(0.05));
  CHECK(variance(dy) == Catch::Approx(expected).epsilon(0.05));
  CHECK(variance(dz) == Catch::Approx(expected).epsilon(0.05));
}

TEST_CASE("molecule stays in place when every proposal exits the box") {
  SimSettings s = base_settings();
  s.env_side = 1.002;  // barely larger than the molecule
  s.tx_rx_distance = 0.0005;
  s.tx_diameter = 1e-4;
  s.rx_diameter = 1e-4;
  World w = init_world(s);
  Molecule probe;
  probe.kind = MolKind::Info;
  probe.state = Motion::Diffusing;
  probe.radius = 0.5;
  probe.pos = {0.0, 0.0, 0.0005};
  const std::int32_t id = detail::add_molecule(w, probe);
  Rng rng(5);
  for (int i = 0; i < 20; ++i) diffusive_step(w, w.mol(id), rng);
  CHECK(w.mol(id).pos == Vec3{0.0, 0.0, 0.0005});
}

TEST_CASE("directional step advances velocity*dt along the microtubule") {
  SimSettings s = base_settings();
  s.transport = Transport::Directional;
  s.noise_count = 0;
  s.motor_travel_fixed = true;
  s.motor_travel_mean = 1000.0;  // never detaches by budget in this test
  World w = init_world(s);
  Rng rng(9);
  release_burst(w, MolKind::Info, 0, rng);
  REQUIRE_FALSE(w.mobile_ids.empty());
  Molecule& m = w.mol(w.mobile_ids[0]);
  REQUIRE(m.state == Motion::OnMicrotubule);
  const Vec3 before = m.pos;
  directional_step(w, m, rng);
  CHECK(m.pos.x == Catch::Approx(before.x + s.motor_velocity * s.dt).margin(1e-12));
  CHECK(m.pos.y == before.y);
  CHECK(m.pos.z == before.z);
  CHECK(m.remaining == Catch::Approx(1000.0 - 0.1).margin(1e-12));
}

TEST_CASE("motor travel budgets are exponential with the configured mean") {
  SimSettings s = base_settings();
  s.motor_travel_mean = 4.0;
  Rng rng(77);
  const int kDraws = 100000;
  double sum = 0.0;
  for (int i = 0; i < kDraws; ++i) sum += detail::draw_travel_budget(s, rng);
  CHECK(sum / kDraws == Catch::Approx(4.0).epsilon(0.02));
}

TEST_CASE("collision on the microtubule detaches the molecule in place") {
  SimSettings s = base_settings();
  s.transport = Transport::Directional;
  s.noise_count = 0;
  s.motor_travel_fixed = true;
  s.motor_travel_mean = 1000.0;
  World w = init_world(s);
  Rng rng(11);
  // Block the path: a noise molecule sitting on the segment ahead.
  Molecule blocker;
  blocker.kind = MolKind::Noise;
  blocker.state = Motion::Stationary;
  blocker.radius = s.noise_radius();
  blocker.pos = {w.microtubule->tx_end.x + 1.5, 0.0, 0.0};
  detail::add_molecule(w, blocker);

  Molecule rider;
  rider.kind = MolKind::Info;
  rider.state = Motion::OnMicrotubule;
  rider.remaining = 1000.0;
  rider.dir = +1;
  rider.radius = s.mol_radius();
  rider.pos = {w.microtubule->tx_end.x + 0.45, 0.0, 0.0};  // next step collides
  const std::int32_t id = detail::add_molecule(w, rider);

  const Vec3 before = w.mol(id).pos;
  directional_step(w, w.mol(id), rng);
  CHECK(w.mol(id).state == Motion::Diffusing);
  CHECK(w.mol(id).pos == before);
}

TEST_CASE("budget exhaustion detaches after the final advance") {
  SimSettings s = base_settings();
  s.transport = Transport::Directional;
  s.noise_count = 0;
  World w = init_world(s);
  Rng rng(13);
  Molecule rider;
  rider.kind = MolKind::Info;
  rider.state = Motion::OnMicrotubule;
  rider.remaining = 0.04;  // less than one step's advance
  rider.dir = +1;
  rider.radius = s.mol_radius();
  rider.pos = {0.0, 0.0, 0.0};
  const std::int32_t id = detail::add_molecule(w, rider);
  directional_step(w, w.mol(id), rng);
  CHECK(w.mol(id).state == Motion::Diffusing);
  CHECK(w.mol(id).pos.x == Catch::Approx(0.04).margin(1e-12));
}

TEST_CASE("reattachment snaps to the segment within capture range") {
  SimSettings s = base_settings();
  s.transport = Transport::Directional;
  s.noise_count = 0;
  World w = init_world(s);
  Rng rng(17);
  const Microtubule& mt = *w.microtubule;

  SECTION("exactly on the segment attaches") {
    Molecule m;
    m.kind = MolKind::Info;
    m.state = Motion::Diffusing;
    m.radius = s.mol_radius();
    m.pos = {0.0, 0.0, 0.0};
    const std::int32_t id = detail::add_molecule(w, m);
    try_reattach(w, w.mol(id), rng);
    CHECK(w.mol(id).state == Motion::OnMicrotubule);
    CHECK(w.mol(id).dir == +1);
    CHECK(w.mol(id).remaining > 0.0);
  }

  SECTION("ack molecules head for the Tx endpoint") {
    Molecule m;
    m.kind = MolKind::Ack;
    m.state = Motion::Diffusing;
    m.radius = s.mol_radius();
    m.pos = {0.0, 0.0, 0.0};
    const std::int32_t id = detail::add_molecule(w, m);
    try_reattach(w, w.mol(id), rng);
    CHECK(w.mol(id).state == Motion::OnMicrotubule);
    CHECK(w.mol(id).dir == -1);
  }

  SECTION("out of capture range stays diffusing") {
    Molecule m;
    m.kind = MolKind::Info;
    m.state = Motion::Diffusing;
    m.radius = s.mol_radius();
    m.pos = {0.0, 0.0, mt.capture_radius + s.mol_radius() + 0.01};
    const std::int32_t id = detail::add_molecule(w, m);
    try_reattach(w, w.mol(id), rng);
    CHECK(w.mol(id).state == Motion::Diffusing);
    CHECK(w.mol(id).pos == Vec3{0.0, 0.0, mt.capture_radius + s.mol_radius() + 0.01});
  }
}

TEST_CASE("hybrid transport keeps Ack molecules off the microtubule") {
  SimSettings s = base_settings();
  s.transport = Transport::Hybrid;
  CHECK(may_attach(s, MolKind::Info));
  CHECK_FALSE(may_attach(s, MolKind::Ack));
  CHECK_FALSE(may_attach(s, MolKind::Noise));

  s.noise_count = 0;
  World w = init_world(s);
  Rng rng(19);
  Molecule ack;
  ack.kind = MolKind::Ack;
  ack.state = Motion::Diffusing;
  ack.radius = s.mol_radius();
  ack.pos = {0.0, 0.0, 0.0};  // right on the segment
  detail::add_molecule(w, ack);
  step_molecules(w, rng);
  CHECK(w.mol(w.mobile_ids[0]).state == Motion::Diffusing);
}

TEST_CASE("arrival detection uses contact distance and removes molecules") {
  SimSettings s = base_settings();
  s.noise_count = 0;
  World w = init_world(s);
  const double contact = s.rx_radius() + s.mol_radius();

  SECTION("info just inside contact range arrives at Rx") {
    Molecule m;
    m.kind = MolKind::Info;
    m.state = Motion::Diffusing;
    m.radius = s.mol_radius();
    m.pos = w.rx_center + Vec3{-(contact - 1e-9), 0.0, 0.0};
    detail::add_molecule(w, m);
    const auto arrivals = detect_arrivals(w);
    REQUIRE(arrivals.size() == 1);
    CHECK(arrivals[0].kind == MolKind::Info);
    CHECK(w.mobile_ids.empty());
  }

  SECTION("ack touching Rx does not arrive anywhere") {
    Molecule m;
    m.kind = MolKind::Ack;
    m.state = Motion::Diffusing;
    m.radius = s.mol_radius();
    m.pos = w.rx_center + Vec3{-(contact - 1e-9), 0.0, 0.0};
    detail::add_molecule(w, m);
    CHECK(detect_arrivals(w).empty());
    CHECK(w.mobile_ids.size() == 1);
  }

  SECTION("simultaneous arrivals are reported in id order") {
    for (int i = 0; i < 2; ++i) {
      Molecule m;
      m.kind = MolKind::Info;
      m.copy_id = i;
      m.state = Motion::Diffusing;
      m.radius = s.mol_radius();
      m.pos = w.rx_center + Vec3{(i == 0 ? -1.0 : 1.0) * (contact - 1e-9), 0.0, 0.0};
      detail::add_molecule(w, m);
    }
    const auto arrivals = detect_arrivals(w);
    REQUIRE(arrivals.size() == 2);
    CHECK(arrivals[0].molecule_id < arrivals[1].molecule_id);
  }
}

TEST_CASE("diffusive release keeps bursts on the emitter surface without overlap") {
  SimSettings s = base_settings();
  s.noise_count = 50;
  World w = init_world(s);
  Rng rng(23);
  const int released = release_burst(w, MolKind::Info, 0, rng);
  CHECK(released == s.duplicates);
  CHECK_FALSE(any_overlap(w));
  for (std::int32_t id : w.mobile_ids) {
    const Molecule& m = w.mol(id);
    CHECK(distance(m.pos, w.tx_center) ==
          Catch::Approx(s.tx_radius() + s.mol_radius()).margin(1e-9));
    CHECK(m.state == Motion::Diffusing);
  }
}

TEST_CASE("directional bursts queue at the endpoint and enter one at a time") {
  SimSettings s = base_settings();
  s.transport = Transport::Directional;
  s.tx_rx_distance = 40.0;  // room for all ten riders
  s.noise_count = 0;
  s.motor_travel_fixed = true;
  s.motor_travel_mean = 1000.0;
  World w = init_world(s);
  Rng rng(29);
  const int placed_now = release_burst(w, MolKind::Info, 0, rng);
  CHECK(placed_now == 1);  // only the entry spot is free at release time
  CHECK(w.pending_tx_riders.size() == static_cast<std::size_t>(s.duplicates - 1));

  for (int step = 0; step < 200; ++step) step_molecules(w, rng);
  CHECK(w.pending_tx_riders.empty());
  CHECK_FALSE(any_overlap(w));
  int riding = 0;
  for (std::int32_t id : w.mobile_ids)
    if (w.mol(id).state == Motion::OnMicrotubule) ++riding;
  CHECK(riding == s.duplicates);
  CHECK(w.info_released == s.duplicates);
}

TEST_CASE("no overlap and in-bounds invariants hold across a busy run") {
  SimSettings s = base_settings();
  s.transport = Transport::Hybrid;
  s.noise_count = 60;
  s.env_side = 30.0;
  s.seed = 31;
  World w = init_world(s);
  Rng rng(derive_seed(s.seed, "run"));
  release_burst(w, MolKind::Info, 0, rng);
  release_burst(w, MolKind::Ack, 0, rng);
  for (int step = 0; step < 400; ++step) {
    step_molecules(w, rng);
    if (step % 40 == 0) {
      CHECK_FALSE(any_overlap(w));
      CHECK(all_inside(w));
    }
    detect_arrivals(w);
  }
  CHECK_FALSE(any_overlap(w));
  CHECK(all_inside(w));
}

TEST_CASE("world snapshot lists bodies, microtubule and molecules") {
  SimSettings s = base_settings();
  s.transport = Transport::Directional;
  s.noise_count = 3;
  World w = init_world(s);
  const nlohmann::json j = world_snapshot(w, 7, 0.7);
  CHECK(j.at("step") == 7);
  CHECK(j.at("molecules").size() == 3);
  CHECK(j.contains("microtubule"));
  CHECK(j.at("tx").at("radius") == 2.5);
}
