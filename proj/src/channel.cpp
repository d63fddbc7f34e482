#include "flexonc/channel.hpp"

#include <cmath>

namespace flexonc {

void
ChannelParams::validate()
const
{
  if (!(data_rate > 0.0))
  {
    throw ConfigError{"channel.data_rate", "must be positive"};
  }
  if (!(bit_error_rate >= 0.0 && bit_error_rate < 1.0))
  {
    throw ConfigError{"channel.ber", "must lie in [0, 1)"};
  }
  if (!(range > 0.0))
  {
    throw ConfigError{"channel.range", "must be positive"};
  }
  if (sifs < 0.0 || guard < 0.0 || access_delay < 0.0)
  {
    throw ConfigError{"channel", "timing parameters must be non-negative"};
  }
}

double
ChannelParams::ack_slot()
const
{
  return airtime(*this, ack_bytes) + sifs;
}

double
frame_success_probability(const ChannelParams& params, std::size_t frame_bytes)
{
  if (params.bit_error_rate == 0.0)
  {
    return 1.0;
  }
  const auto bits = 8.0 * static_cast<double>(frame_bytes);
  return std::exp(bits * std::log1p(-params.bit_error_rate));
}

double
airtime(const ChannelParams& params, std::size_t payload_bytes)
{
  return 8.0 * static_cast<double>(payload_bytes + params.frame_overhead) / params.data_rate;
}

/*------------------------------------------------------------------------------------------------*/

LossStreams::LossStreams(std::uint64_t seed, std::size_t nodes)
{
  streams_.reserve(nodes);
  for (std::size_t i = 0; i < nodes; ++i)
  {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), 0x5eedu};
    streams_.emplace_back(seq);
  }
}

bool
LossStreams::draw(NodeId receiver, double success_probability)
{
  if (success_probability >= 1.0)
  {
    return true;
  }
  auto& gen = streams_.at(receiver.index);
  return std::generate_canonical<double, 53>(gen) < success_probability;
}

std::vector<Reception>
broadcast(const Topology& topology, const ChannelParams& params, NodeId sender,
          std::uint64_t frame, std::size_t frame_bytes, LossStreams& rng)
{
  const auto p = frame_success_probability(params, frame_bytes);
  std::vector<Reception> out;
  for (auto n : topology.neighbors(sender))
  {
    out.push_back({frame, n, rng.draw(n, p)});
  }
  return out;
}

} // namespace flexonc
