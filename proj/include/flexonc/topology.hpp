#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "flexonc/types.hpp"

namespace flexonc {

/*------------------------------------------------------------------------------------------------*/

struct Position
{
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Position&) const = default;
};

/// Static node placement and symmetric, irreflexive adjacency.
class Topology
{
public:
  Topology() = default;

  /// Nodes at `grid_positions` (in grid units, scaled by `spacing` meters). Two nodes are
  /// adjacent when their euclidean distance is within `range` meters.
  static Topology from_positions(std::vector<Position> grid_positions, double spacing,
                                 double range);

  /// Explicit neighbour lists; made symmetric. Positions default to a single row.
  static Topology from_adjacency(const std::vector<std::vector<std::uint32_t>>& neighbors);

  std::size_t size() const noexcept { return neighbors_.size(); }
  bool contains(NodeId n) const noexcept { return n.valid() && n.index < size(); }
  const std::vector<NodeId>& neighbors(NodeId n) const;
  bool adjacent(NodeId a, NodeId b) const noexcept;
  Position position(NodeId n) const { return positions_.at(n.index); }
  double spacing() const noexcept { return spacing_; }
  std::vector<NodeId> nodes() const;

private:
  void add_edge(std::uint32_t a, std::uint32_t b);

  std::vector<Position> positions_;
  double spacing_ = 1.0;
  std::vector<std::vector<NodeId>> neighbors_;
  std::vector<std::vector<bool>> matrix_;
};

/// rows x cols grid, node i at row i / cols and column i % cols. Adjacent iff row and column
/// offsets are each at most 1 and not both 0.
Topology build_grid(int rows, int cols, double spacing);

/// Hop distance of every node to `destination`; unreachable nodes get `unreachable_distance`.
inline constexpr unsigned unreachable_distance = ~0u;
std::vector<unsigned> hop_distances(const Topology& topology, NodeId destination);

/*------------------------------------------------------------------------------------------------*/

struct ForwardingTable
{
  NodeId owner;
  std::map<NodeId, NodeId> entries;

  /// Throws LookupError for the owner itself or unknown destinations.
  NodeId next_hop(NodeId destination) const;
  bool has_route(NodeId destination) const noexcept { return entries.contains(destination); }
};

using Routes = std::vector<ForwardingTable>;

enum class TieBreak { lowest_index, highest_index };

struct PinnedRoute
{
  FlowId flow;
  std::vector<NodeId> path;
};

/// Minimum-hop forwarding entries toward every flow destination, for every node that can
/// reach it. Pinned paths override the computed entries along their nodes.
Routes compute_routes(const Topology& topology, const std::vector<FlowId>& flows, TieBreak tie_break,
                      const std::vector<PinnedRoute>& pinned = {});

/// Follows `routes` from `from` to `destination`.
std::vector<NodeId> trace_route(const Routes& routes, NodeId from, NodeId destination);

/*------------------------------------------------------------------------------------------------*/

/// What a node knows about routing: its own table plus a replica of each neighbour's table.
class RoutingView
{
public:
  RoutingView(NodeId owner, const Topology& topology, const Routes& routes);

  NodeId owner() const noexcept { return owner_; }
  const Topology& topology() const noexcept { return *topology_; }
  const ForwardingTable& own() const noexcept { return own_; }
  const ForwardingTable& neighbor(NodeId n) const;
  const std::map<NodeId, ForwardingTable>& neighbor_tables() const noexcept { return neighbors_; }

private:
  NodeId owner_;
  const Topology* topology_;
  ForwardingTable own_;
  std::map<NodeId, ForwardingTable> neighbors_;
};

/// Next hop from `intended` toward `destination`, read from the replicated neighbour table.
NodeId second_next_hop(const RoutingView& view, NodeId intended, NodeId destination);

/// Nodes adjacent to the sender, the partner's next hop and that next hop's own next hop.
std::set<NodeId> eligible_forwarders(const RoutingView& view, NodeId sender,
                                     NodeId partner_next_hop, NodeId partner_destination);

} // namespace flexonc
