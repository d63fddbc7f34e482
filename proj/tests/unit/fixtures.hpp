#pragma once

#include "flexonc/sim.hpp"

namespace fixtures {

using namespace flexonc;

inline NodeId
N(std::uint32_t i)
{
  return NodeId{i};
}

//   N5  N6  N7
// N0  N1  N2  N3  N4
inline Topology
eight_node()
{
  return Topology::from_positions({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {1, 1}, {2, 1}, {3, 1}},
                                  150.0, 250.0);
}

// 3x4 grid, row-major, 150 m spacing.
inline Topology
twelve_node()
{
  std::vector<Position> pos;
  for (int r = 0; r < 3; ++r)
  {
    for (int c = 0; c < 4; ++c)
    {
      pos.push_back({static_cast<double>(c), static_cast<double>(r)});
    }
  }
  return Topology::from_positions(pos, 150.0, 250.0);
}

inline std::vector<NodeId>
path(std::initializer_list<std::uint32_t> ids)
{
  std::vector<NodeId> out;
  for (auto i : ids)
  {
    out.push_back(NodeId{i});
  }
  return out;
}

inline CbrSource
flow(std::uint32_t s, std::uint32_t d, std::vector<NodeId> route = {}, double ia = 0.1,
     double duration = 20.0)
{
  CbrSource f;
  f.flow = {NodeId{s}, NodeId{d}, 0};
  f.inter_arrival = ia;
  f.duration = duration;
  f.route = std::move(route);
  return f;
}

inline NativePacket
packet(std::uint32_t src, std::uint32_t dst, std::uint64_t seq, std::uint32_t ph, std::uint32_t nh)
{
  NativePacket p;
  p.id = {{NodeId{src}, NodeId{dst}, 0}, seq};
  p.previous_hop = NodeId{ph};
  p.next_hop = NodeId{nh};
  p.payload_bytes = 1000;
  return p;
}

/// Opposing flows N0 <-> N4 along the bottom row of the 8-node layout.
inline RunConfig
eight_node_config(SchemeKind scheme, double ber, std::uint64_t seed = 1, double duration = 20.0)
{
  RunConfig c;
  c.scenario = "8node-test";
  c.topology = eight_node();
  c.flows = {flow(0, 4, path({0, 1, 2, 3, 4}), 0.07, duration),
             flow(4, 0, path({4, 3, 2, 1, 0}), 0.07, duration)};
  c.scheme = scheme;
  c.channel.bit_error_rate = ber;
  c.seed = seed;
  c.duration = duration + 10.0;
  return c;
}

} // namespace fixtures
