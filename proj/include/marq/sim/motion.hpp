#pragma once

#include <cmath>
#include <random>

#include "marq/sim/world.hpp"

namespace marq::sim {

namespace detail {

/// A proposed position is admissible when the molecule body stays inside the
/// box, overlaps no other molecule, and overlaps no Tx/Rx body except the one
/// it is addressed to (contact with the target is an arrival, not a collision).
inline bool position_admissible(const World& w, const Molecule& m, const Vec3& p) {
  if (!w.box.contains_sphere(p, m.radius)) return false;
  if (m.kind != MolKind::Ack && w.overlaps_tx(p, m.radius)) return false;
  if (m.kind != MolKind::Info && w.overlaps_rx(p, m.radius)) return false;
  return !w.overlaps_molecule(p, m.radius, m.id);
}

}  // namespace detail

/// One Brownian step: per-axis Gaussian displacement with variance 2*D*dt.
/// Inadmissible proposals are redrawn up to 10 times; if all fail the molecule
/// stays in place (no rebound, no interpenetration).
inline void diffusive_step(World& w, Molecule& m, Rng& rng) {
  const double sigma = std::sqrt(2.0 * w.settings.diffusion_coeff * w.settings.dt);
  constexpr int kMaxDraws = 10;
  for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
    std::normal_distribution<double> gauss(0.0, sigma);
    const Vec3 p = m.pos + Vec3{gauss(rng), gauss(rng), gauss(rng)};
    if (detail::position_admissible(w, m, p)) {
      w.grid.move(m.id, m.pos, p);
      m.pos = p;
      return;
    }
  }
}

/// One motor step along the microtubule: advance motor_velocity*dt toward the
/// destination endpoint, bounded by the remaining travel budget. A collision
/// detaches the molecule in place; an exhausted budget detaches it after the
/// final advance.
inline void directional_step(World& w, Molecule& m, Rng& /*rng*/) {
  const Microtubule& mt = *w.microtubule;
  const Vec3 u = mt.axis_unit() * static_cast<double>(m.dir);
  const Vec3 dest = m.dir > 0 ? mt.rx_end : mt.tx_end;
  const double to_end = std::max(0.0, (dest - m.pos).dot(u));
  const double advance = std::min({w.settings.motor_velocity * w.settings.dt, m.remaining, to_end});
  const Vec3 p = m.pos + u * advance;
  if (!detail::position_admissible(w, m, p)) {
    m.state = Motion::Diffusing;  // blocked: diffuse away from the collision
    m.remaining = 0.0;
    m.dir = 0;
    return;
  }
  w.grid.move(m.id, m.pos, p);
  m.pos = p;
  m.remaining -= advance;
  if (m.remaining <= 1e-12 || to_end - advance <= 1e-12) {
    m.state = Motion::Diffusing;  // budget spent or segment end reached
    m.remaining = 0.0;
    m.dir = 0;
  }
}

/// A diffusing molecule within capture range of the segment snaps onto the
/// nearest segment point with a fresh travel budget. The caller is responsible
/// for transport eligibility (directional: all carriers; hybrid: Info only).
inline void try_reattach(World& w, Molecule& m, Rng& rng) {
  if (m.state != Motion::Diffusing || !w.microtubule) return;
  const Microtubule& mt = *w.microtubule;
  const Vec3 snapped = closest_point_on_segment(mt.tx_end, mt.rx_end, m.pos);
  if (distance(m.pos, snapped) > mt.capture_radius + m.radius) return;
  if (!(snapped == m.pos) && !detail::position_admissible(w, m, snapped)) return;
  w.grid.move(m.id, m.pos, snapped);
  m.pos = snapped;
  m.state = Motion::OnMicrotubule;
  m.remaining = detail::draw_travel_budget(w.settings, rng);
  m.dir = (m.kind == MolKind::Info) ? +1 : -1;
}

/// Whether this molecule kind may ride the microtubule under the settings.
inline bool may_attach(const SimSettings& s, MolKind kind) {
  if (kind == MolKind::Noise) return false;
  if (s.transport == Transport::Directional) return true;
  if (s.transport == Transport::Hybrid) return kind == MolKind::Info;
  return false;
}

/// Advances every mobile molecule by one time step, in ascending id order.
/// Queued riders enter the microtubule first, then everything moves.
inline void step_molecules(World& w, Rng& rng) {
  inject_pending_riders(w, rng);
  for (std::size_t i = 0; i < w.mobile_ids.size(); ++i) {
    Molecule& m = w.mol(w.mobile_ids[i]);
    if (!m.alive) continue;
    if (m.state == Motion::OnMicrotubule) {
      directional_step(w, m, rng);
    } else if (m.state == Motion::Diffusing) {
      diffusive_step(w, m, rng);
      if (may_attach(w.settings, m.kind)) try_reattach(w, m, rng);
    }
  }
}

}  // namespace marq::sim
