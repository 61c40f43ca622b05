#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "marq/common.hpp"

namespace marq::arq {

/// What the medium reports after one time step.
struct StepEvents {
  int info_at_rx = 0;  // Info copies that reached the Rx in this step
  int ack_at_tx = 0;   // Ack copies that reached the Tx in this step
};

/// Abstract medium the protocol runs over. The physics channel implements it
/// with the particle simulation; tests implement it with scripted deliveries.
class Channel {
 public:
  virtual ~Channel() = default;
  /// Release a burst of n Info copies at step `step` (burst 0 is the initial send).
  virtual void release_info(std::int64_t step, int burst) = 0;
  /// Release a burst of n Ack copies at step `step`.
  virtual void release_ack(std::int64_t step, int burst) = 0;
  /// Advance the medium by one time step and report arrivals at the new time.
  virtual StepEvents step(std::int64_t step) = 0;
};

struct ArqParams {
  double rto = 60.0;
  std::int64_t max_retx = 5;
  double dt = 0.1;

  std::int64_t rto_steps() const {
    const auto steps = static_cast<std::int64_t>(std::llround(rto / dt));
    if (steps < 1) throw ConfigError("rto must be at least one time step");
    return steps;
  }
};

enum class TxPhase { AwaitingAck, Done, Failed };

struct TxState {
  TxPhase phase = TxPhase::AwaitingAck;
  std::int64_t retx_used = 0;
  std::int64_t rto_deadline_step = 0;
  std::optional<double> rtt;
};

struct RxState {
  std::set<std::int32_t> acked_msgs;
  std::optional<std::int64_t> ack_rto_deadline_step;
  std::int64_t ack_retx_used = 0;
};

/// Round-trip outcome of a single message transmission.
struct SimOutcome {
  bool delivered = false;
  double rtt = 0.0;           // first Ack arrival time when delivered, else censoring time
  std::int64_t retransmissions = 0;
  std::optional<double> info_arrival_time;   // first Info arrival at the Rx
  std::vector<double> info_burst_times;      // t=0 plus each retransmission
  std::vector<double> ack_burst_times;
};

/// Runs one SW-ARQ message exchange over the channel.
///
/// The Tx releases a burst at t=0 and retransmits whenever RTO elapses without
/// an Ack, up to max_retx times; the run fails once the final RTO expires.
/// The Rx acknowledges the first Info arrival, ignores duplicates, and
/// re-releases its Ack burst every RTO while the exchange is still open
/// (bounded by the same retransmission cap). Arrivals are processed before
/// timers, so an Ack landing exactly at a deadline step suppresses that
/// retransmission. All timing is step-exact: events happen at integer
/// multiples of dt and RTO must be a whole number of steps.
inline SimOutcome run_message(Channel& channel, const ArqParams& params) {
  const std::int64_t rto_steps = params.rto_steps();
  const double dt = params.dt;

  TxState tx;
  RxState rx;
  SimOutcome out;
  constexpr std::int32_t kMsgId = 0;

  channel.release_info(0, 0);
  out.info_burst_times.push_back(0.0);
  tx.rto_deadline_step = rto_steps;

  for (std::int64_t step = 1;; ++step) {
    const double t = static_cast<double>(step) * dt;
    const StepEvents ev = channel.step(step);

    if (ev.info_at_rx > 0 && !rx.acked_msgs.contains(kMsgId)) {
      rx.acked_msgs.insert(kMsgId);
      channel.release_ack(step, 0);
      out.ack_burst_times.push_back(t);
      out.info_arrival_time = t;
      rx.ack_rto_deadline_step = step + rto_steps;
    }
    if (ev.ack_at_tx > 0) {
      tx.phase = TxPhase::Done;
      tx.rtt = t;
      out.delivered = true;
      out.rtt = t;
      break;
    }

    if (step >= tx.rto_deadline_step) {
      // The Tx cannot see the Rx state; its timer fires whether or not the
      // Info burst made it, and the exchange is censored once the final RTO
      // after the last permitted retransmission expires.
      if (tx.retx_used < params.max_retx) {
        ++tx.retx_used;
        channel.release_info(step, static_cast<int>(tx.retx_used));
        out.info_burst_times.push_back(t);
        tx.rto_deadline_step = step + rto_steps;
      } else {
        tx.phase = TxPhase::Failed;
        out.delivered = false;
        out.rtt = t;  // censored at termination time
        break;
      }
    }

    if (rx.ack_rto_deadline_step && step >= *rx.ack_rto_deadline_step) {
      if (rx.ack_retx_used < params.max_retx) {
        ++rx.ack_retx_used;
        channel.release_ack(step, static_cast<int>(rx.ack_retx_used));
        out.ack_burst_times.push_back(t);
        rx.ack_rto_deadline_step = step + rto_steps;
      } else {
        rx.ack_rto_deadline_step.reset();
      }
    }
  }

  out.retransmissions = tx.retx_used;
  return out;
}

}  // namespace marq::arq
