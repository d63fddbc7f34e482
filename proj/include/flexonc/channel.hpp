#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "flexonc/topology.hpp"

namespace flexonc {

struct ChannelParams
{
  double data_rate = 1e6;            // bits/s
  double bit_error_rate = 0.0;
  double range = 250.0;              // meters
  std::size_t ack_bytes = 14;
  std::size_t frame_overhead = 24;   // MAC header + FCS, bytes
  std::size_t coded_partner_bytes = 2;
  std::size_t second_next_hop_bytes = 4;
  double sifs = 10e-6;               // gap before each acknowledgment slot
  double guard = 50e-6;
  double access_delay = 360e-6;      // DIFS plus mean backoff before a data frame
  bool ack_loss = true;              // BER applies to ACK/NACK frames

  void validate() const;
  /// Airtime of one ACK/NACK plus its inter-frame gap.
  double ack_slot() const;
};

/// (1 - BER)^(8 * bytes), evaluated in the log domain.
double frame_success_probability(const ChannelParams& params, std::size_t frame_bytes);

/// Time on air for a frame carrying `payload_bytes` plus the per-frame overhead.
double airtime(const ChannelParams& params, std::size_t payload_bytes);

struct Reception
{
  std::uint64_t frame = 0;
  NodeId receiver;
  bool delivered = false;
};

/// Per-node loss streams derived from one run seed. Draw order is fixed by receiver index, so a
/// replay with the same seed yields identical receptions.
class LossStreams
{
public:
  LossStreams(std::uint64_t seed, std::size_t nodes);

  bool draw(NodeId receiver, double success_probability);

private:
  std::vector<std::mt19937_64> streams_;
};

/// One Reception per neighbour of `sender`, in ascending NodeId order.
std::vector<Reception> broadcast(const Topology& topology, const ChannelParams& params,
                                 NodeId sender, std::uint64_t frame, std::size_t frame_bytes,
                                 LossStreams& rng);

} // namespace flexonc
