// Runs a small directional ensemble and prints the RTT statistics.

#include <iostream>

#include "marq/arq/simulation.hpp"

int main() {
  marq::sim::SimSettings settings;
  settings.transport = marq::sim::Transport::Directional;
  settings.tx_rx_distance = 10.0;
  settings.noise_count = 50;
  settings.rto = 30.0;
  settings.seed = 7;

  const auto stats = marq::arq::run_ensemble(settings, 50);
  std::cout << "delivered " << stats.delivered << "/" << stats.runs << "\n";
  if (stats.median_rtt)
    std::cout << "median RTT " << *stats.median_rtt << " s (q1 " << *stats.q1 << ", q3 "
              << *stats.q3 << ")\n";
  return stats.valid ? 0 : 1;
}
