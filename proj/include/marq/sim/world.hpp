#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "marq/common.hpp"
#include "marq/sim/geometry.hpp"
#include "marq/sim/grid.hpp"
#include "marq/sim/settings.hpp"

namespace marq::sim {

enum class MolKind : std::uint8_t { Info, Ack, Noise };

enum class Motion : std::uint8_t { Diffusing, OnMicrotubule, Stationary };

inline std::string to_string(MolKind k) {
  switch (k) {
    case MolKind::Info: return "info";
    case MolKind::Ack: return "ack";
    case MolKind::Noise: return "noise";
  }
  return "noise";
}

inline std::string to_string(Motion m) {
  switch (m) {
    case Motion::Diffusing: return "diffusing";
    case Motion::OnMicrotubule: return "on_microtubule";
    case Motion::Stationary: return "stationary";
  }
  return "stationary";
}

struct Molecule {
  std::int32_t id = 0;
  MolKind kind = MolKind::Noise;
  std::int32_t msg_id = 0;
  std::int32_t copy_id = 0;
  Vec3 pos;
  Motion state = Motion::Stationary;
  double remaining = 0.0;  // travel budget left while OnMicrotubule, um
  std::int8_t dir = 0;     // +1 toward Rx endpoint, -1 toward Tx endpoint
  double radius = 0.5;
  bool alive = true;
};

/// Straight segment between the Tx and Rx sphere surfaces along the Tx->Rx axis.
struct Microtubule {
  Vec3 tx_end;
  Vec3 rx_end;
  double capture_radius = 0.1;  // slack around the segment; molecule radius is added on top

  Vec3 axis_unit() const {
    Vec3 d = rx_end - tx_end;
    const double n = d.norm();
    return n > 0.0 ? d * (1.0 / n) : Vec3{1.0, 0.0, 0.0};
  }

  double length() const { return distance(tx_end, rx_end); }
};

struct Arrival {
  std::int32_t molecule_id = 0;
  MolKind kind = MolKind::Info;
  std::int32_t msg_id = 0;
};

/// A molecule waiting to enter the microtubule at its endpoint. Motors attach
/// one at a time: the next rider enters as soon as the entry point is clear.
struct PendingRider {
  MolKind kind = MolKind::Info;
  std::int32_t msg_id = 0;
  std::int32_t copy_id = 0;
};

struct World {
  SimSettings settings;
  EnvBox box;
  Vec3 tx_center;
  Vec3 rx_center;
  std::optional<Microtubule> microtubule;
  std::vector<Molecule> molecules;        // index == id; never reused
  std::vector<std::int32_t> mobile_ids;   // alive Info/Ack molecules, ascending id
  SpatialGrid grid;
  std::deque<PendingRider> pending_tx_riders;  // waiting at the Tx-side endpoint
  std::deque<PendingRider> pending_rx_riders;  // waiting at the Rx-side endpoint
  std::int64_t info_released = 0;
  std::int64_t ack_released = 0;
  std::int64_t release_failures = 0;      // copies skipped because no free spot was found

  const Molecule& mol(std::int32_t id) const { return molecules[static_cast<std::size_t>(id)]; }
  Molecule& mol(std::int32_t id) { return molecules[static_cast<std::size_t>(id)]; }

  bool overlaps_tx(const Vec3& p, double r) const {
    return distance2(p, tx_center) < sq(settings.tx_radius() + r);
  }
  bool overlaps_rx(const Vec3& p, double r) const {
    return distance2(p, rx_center) < sq(settings.rx_radius() + r);
  }

  /// True when a sphere (p, r) overlaps any alive molecule other than exclude_id.
  bool overlaps_molecule(const Vec3& p, double r, std::int32_t exclude_id = -1) const {
    bool hit = false;
    grid.for_each_neighbor(p, [&](std::int32_t id) {
      if (hit || id == exclude_id) return;
      const Molecule& m = molecules[static_cast<std::size_t>(id)];
      if (m.alive && distance2(p, m.pos) < sq(m.radius + r)) hit = true;
    });
    return hit;
  }

  static double sq(double v) { return v * v; }
};

namespace detail {

inline Vec3 uniform_unit_vector(Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
    const double n = v.norm();
    if (n > 1e-12) return v * (1.0 / n);
  }
}

inline double draw_travel_budget(const SimSettings& s, Rng& rng) {
  if (s.motor_travel_fixed) return s.motor_travel_mean;
  std::exponential_distribution<double> exp_dist(1.0 / s.motor_travel_mean);
  return exp_dist(rng);
}

inline std::int32_t add_molecule(World& w, Molecule m) {
  m.id = static_cast<std::int32_t>(w.molecules.size());
  w.grid.insert(m.id, m.pos);
  if (m.kind != MolKind::Noise) w.mobile_ids.push_back(m.id);
  w.molecules.push_back(m);
  return m.id;
}

}  // namespace detail

/// Builds the world: Tx and Rx spheres on the x-axis, the microtubule for
/// directional/hybrid transports, and noise molecules placed by rejection
/// sampling so that nothing overlaps. Deterministic given settings.seed.
inline World init_world(const SimSettings& settings) {
  settings.validate();
  World w;
  w.settings = settings;
  w.box = EnvBox{settings.env_side};
  const double half_d = 0.5 * settings.tx_rx_distance;
  w.tx_center = {-half_d, 0.0, 0.0};
  w.rx_center = {+half_d, 0.0, 0.0};

  const double max_diam = std::max(settings.mol_diameter, settings.noise_diameter);
  w.grid = SpatialGrid(settings.env_side, 2.0 * max_diam);

  if (settings.transport != Transport::Diffusive) {
    Microtubule mt;
    mt.tx_end = w.tx_center + Vec3{settings.tx_radius(), 0.0, 0.0};
    mt.rx_end = w.rx_center - Vec3{settings.rx_radius(), 0.0, 0.0};
    w.microtubule = mt;
  }

  Rng rng(derive_seed(settings.seed, "world-init"));
  std::uniform_real_distribution<double> coord(-0.5 * settings.env_side, 0.5 * settings.env_side);
  const double nr = settings.noise_radius();
  constexpr int kTriesPerMolecule = 1000;
  for (std::int64_t i = 0; i < settings.noise_count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kTriesPerMolecule && !placed; ++attempt) {
      Vec3 p{coord(rng), coord(rng), coord(rng)};
      if (!w.box.contains_sphere(p, nr)) continue;
      if (w.overlaps_tx(p, nr) || w.overlaps_rx(p, nr)) continue;
      if (w.overlaps_molecule(p, nr)) continue;
      if (w.microtubule) {
        // Keep the capture corridor clear so travel is not blocked from the start.
        const double clearance = w.microtubule->capture_radius + settings.mol_radius() + nr;
        if (distance_to_segment(w.microtubule->tx_end, w.microtubule->rx_end, p) < clearance) continue;
      }
      Molecule m;
      m.kind = MolKind::Noise;
      m.pos = p;
      m.state = Motion::Stationary;
      m.radius = nr;
      detail::add_molecule(w, m);
      placed = true;
    }
    if (!placed)
      throw PlacementError("could not place noise molecule " + std::to_string(i) + " after " +
                           std::to_string(kTriesPerMolecule) + " tries");
  }
  return w;
}

/// Moves queued riders onto the microtubule while the entry point is clear.
/// At most one rider fits per endpoint at a time (the entry is occupied until
/// the previous rider has advanced a full diameter). Returns placements made.
inline int inject_pending_riders(World& w, Rng& rng) {
  if (!w.microtubule) return 0;
  const SimSettings& s = w.settings;
  const Microtubule& mt = *w.microtubule;
  const double mr = s.mol_radius();
  int placed = 0;
  for (int side = 0; side < 2; ++side) {
    const bool from_tx = (side == 0);
    auto& queue = from_tx ? w.pending_tx_riders : w.pending_rx_riders;
    const Vec3 start = from_tx ? mt.tx_end : mt.rx_end;
    const Vec3 u = mt.axis_unit() * (from_tx ? 1.0 : -1.0);
    const Vec3 entry = start + u * mr;  // clear of the emitter body
    while (!queue.empty()) {
      // Entry needs a hair of slack beyond contact distance: riders admitted
      // at an exact-touch gap would brush the molecule ahead as float error
      // accumulates along the tube.
      if (!w.box.contains_sphere(entry, mr) || w.overlaps_molecule(entry, mr + 1e-6)) break;
      const Vec3 other_center = from_tx ? w.rx_center : w.tx_center;
      const double other_r = from_tx ? s.rx_radius() : s.tx_radius();
      if (distance2(entry, other_center) < World::sq(other_r + mr)) break;
      const PendingRider rider = queue.front();
      queue.pop_front();
      Molecule m;
      m.kind = rider.kind;
      m.msg_id = rider.msg_id;
      m.copy_id = rider.copy_id;
      m.radius = mr;
      m.pos = entry;
      m.state = Motion::OnMicrotubule;
      m.remaining = detail::draw_travel_budget(s, rng);
      m.dir = from_tx ? +1 : -1;
      detail::add_molecule(w, m);
      (rider.kind == MolKind::Info ? w.info_released : w.ack_released) += 1;
      ++placed;
    }
  }
  return placed;
}

/// Releases one burst of `duplicates` copies of an Info or Ack molecule.
/// Diffusive copies start on the emitter surface at random directions;
/// directional copies queue at the microtubule endpoint and enter one at a
/// time as the entry clears. Diffusive copies that cannot be placed after the
/// retry budget are skipped and counted in release_failures. Returns the
/// number of copies placed into the world immediately.
inline int release_burst(World& w, MolKind kind, std::int32_t msg_id, Rng& rng) {
  const SimSettings& s = w.settings;
  const bool from_tx = (kind == MolKind::Info);
  const Vec3 center = from_tx ? w.tx_center : w.rx_center;
  const double body_r = from_tx ? s.tx_radius() : s.rx_radius();
  const Vec3 other_center = from_tx ? w.rx_center : w.tx_center;
  const double other_r = from_tx ? s.rx_radius() : s.tx_radius();
  const double mr = s.mol_radius();

  const bool rides_microtubule =
      w.microtubule && (s.transport == Transport::Directional ||
                        (s.transport == Transport::Hybrid && kind == MolKind::Info));

  if (rides_microtubule) {
    auto& queue = from_tx ? w.pending_tx_riders : w.pending_rx_riders;
    for (std::int64_t copy = 0; copy < s.duplicates; ++copy)
      queue.push_back({kind, msg_id, static_cast<std::int32_t>(copy)});
    return inject_pending_riders(w, rng);  // the first copy enters now if it can
  }

  int released = 0;
  for (std::int64_t copy = 0; copy < s.duplicates; ++copy) {
    Molecule m;
    m.kind = kind;
    m.msg_id = msg_id;
    m.copy_id = static_cast<std::int32_t>(copy);
    m.radius = mr;
    bool placed = false;
    constexpr int kTries = 100;
    for (int attempt = 0; attempt < kTries && !placed; ++attempt) {
      const Vec3 p = center + detail::uniform_unit_vector(rng) * (body_r + mr);
      if (!w.box.contains_sphere(p, mr)) continue;
      if (distance2(p, other_center) < World::sq(other_r + mr)) continue;
      if (w.overlaps_molecule(p, mr)) continue;
      m.pos = p;
      m.state = Motion::Diffusing;
      detail::add_molecule(w, m);
      placed = true;
    }
    if (placed) {
      ++released;
      (from_tx ? w.info_released : w.ack_released) += 1;
    } else {
      ++w.release_failures;
    }
  }
  return released;
}

inline void remove_molecule(World& w, std::int32_t id) {
  Molecule& m = w.mol(id);
  if (!m.alive) return;
  m.alive = false;
  w.grid.erase(id, m.pos);
  auto it = std::find(w.mobile_ids.begin(), w.mobile_ids.end(), id);
  if (it != w.mobile_ids.end()) w.mobile_ids.erase(it);
}

/// Reports and removes every Info molecule in contact with the Rx and every
/// Ack molecule in contact with the Tx, ordered by molecule id.
inline std::vector<Arrival> detect_arrivals(World& w) {
  std::vector<Arrival> arrivals;
  for (std::int32_t id : w.mobile_ids) {
    const Molecule& m = w.mol(id);
    if (!m.alive) continue;
    const bool arrived =
        (m.kind == MolKind::Info &&
         distance2(m.pos, w.rx_center) <= World::sq(w.settings.rx_radius() + m.radius)) ||
        (m.kind == MolKind::Ack &&
         distance2(m.pos, w.tx_center) <= World::sq(w.settings.tx_radius() + m.radius));
    if (arrived) arrivals.push_back({m.id, m.kind, m.msg_id});
  }
  for (const Arrival& a : arrivals) remove_molecule(w, a.molecule_id);
  return arrivals;
}

/// Debug snapshot of the full world state.
inline nlohmann::json world_snapshot(const World& w, std::int64_t step, double time) {
  nlohmann::json mols = nlohmann::json::array();
  for (const Molecule& m : w.molecules) {
    if (!m.alive) continue;
    mols.push_back({{"id", m.id},
                    {"kind", to_string(m.kind)},
                    {"msg_id", m.msg_id},
                    {"copy_id", m.copy_id},
                    {"position", {m.pos.x, m.pos.y, m.pos.z}},
                    {"state", to_string(m.state)},
                    {"remaining", m.remaining},
                    {"dir", m.dir},
                    {"radius", m.radius}});
  }
  nlohmann::json j{{"step", step},
                   {"time", time},
                   {"env_side", w.settings.env_side},
                   {"tx", {{"center", {w.tx_center.x, w.tx_center.y, w.tx_center.z}}, {"radius", w.settings.tx_radius()}}},
                   {"rx", {{"center", {w.rx_center.x, w.rx_center.y, w.rx_center.z}}, {"radius", w.settings.rx_radius()}}},
                   {"molecules", std::move(mols)}};
  if (w.microtubule) {
    const Microtubule& mt = *w.microtubule;
    j["microtubule"] = {{"tx_end", {mt.tx_end.x, mt.tx_end.y, mt.tx_end.z}},
                        {"rx_end", {mt.rx_end.x, mt.rx_end.y, mt.rx_end.z}},
                        {"capture_radius", mt.capture_radius}};
  }
  return j;
}

}  // namespace marq::sim
