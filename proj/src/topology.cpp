#include "flexonc/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace flexonc {

/*------------------------------------------------------------------------------------------------*/

Topology
Topology::from_positions(std::vector<Position> grid_positions, double spacing, double range)
{
  if (!(spacing > 0.0))
  {
    throw ConfigError{"topology.spacing", "must be positive"};
  }
  Topology t;
  t.spacing_ = spacing;
  t.positions_ = std::move(grid_positions);
  const auto n = t.positions_.size();
  t.neighbors_.assign(n, {});
  t.matrix_.assign(n, std::vector<bool>(n, false));
  for (std::uint32_t a = 0; a < n; ++a)
  {
    for (std::uint32_t b = a + 1; b < n; ++b)
    {
      const auto dx = (t.positions_[a].x - t.positions_[b].x) * spacing;
      const auto dy = (t.positions_[a].y - t.positions_[b].y) * spacing;
      if (std::hypot(dx, dy) <= range + 1e-9)
      {
        t.add_edge(a, b);
      }
    }
  }
  return t;
}

Topology
Topology::from_adjacency(const std::vector<std::vector<std::uint32_t>>& neighbors)
{
  Topology t;
  const auto n = neighbors.size();
  t.neighbors_.assign(n, {});
  t.matrix_.assign(n, std::vector<bool>(n, false));
  for (std::uint32_t i = 0; i < n; ++i)
  {
    t.positions_.push_back({static_cast<double>(i), 0.0});
  }
  for (std::uint32_t a = 0; a < n; ++a)
  {
    for (auto b : neighbors[a])
    {
      if (b >= n)
      {
        throw ConfigError{"topology.adjacency", "neighbour index " + std::to_string(b) +
                                                  " out of range"};
      }
      if (b == a)
      {
        throw ConfigError{"topology.adjacency", "self loop at node " + std::to_string(a)};
      }
      if (!t.matrix_[a][b])
      {
        t.add_edge(a, b);
      }
    }
  }
  return t;
}

void
Topology::add_edge(std::uint32_t a, std::uint32_t b)
{
  matrix_[a][b] = matrix_[b][a] = true;
  auto insert_sorted = [](std::vector<NodeId>& v, NodeId x)
  {
    v.insert(std::upper_bound(v.begin(), v.end(), x), x);
  };
  insert_sorted(neighbors_[a], NodeId{b});
  insert_sorted(neighbors_[b], NodeId{a});
}

const std::vector<NodeId>&
Topology::neighbors(NodeId n)
const
{
  if (!contains(n))
  {
    throw LookupError{"unknown node " + to_string(n)};
  }
  return neighbors_[n.index];
}

bool
Topology::adjacent(NodeId a, NodeId b)
const noexcept
{
  return contains(a) && contains(b) && matrix_[a.index][b.index];
}

std::vector<NodeId>
Topology::nodes()
const
{
  std::vector<NodeId> v;
  for (std::uint32_t i = 0; i < size(); ++i)
  {
    v.emplace_back(i);
  }
  return v;
}

Topology
build_grid(int rows, int cols, double spacing)
{
  if (rows < 1 || cols < 1)
  {
    throw ConfigError{"topology.grid", "rows and cols must be at least 1"};
  }
  std::vector<Position> positions;
  for (int r = 0; r < rows; ++r)
  {
    for (int c = 0; c < cols; ++c)
    {
      positions.push_back({static_cast<double>(c), static_cast<double>(r)});
    }
  }
  // Any range in [sqrt(2), 2) grid units yields Chebyshev-1 adjacency.
  return Topology::from_positions(std::move(positions), spacing, 1.5 * spacing);
}

std::vector<unsigned>
hop_distances(const Topology& topology, NodeId destination)
{
  std::vector<unsigned> dist(topology.size(), unreachable_distance);
  if (!topology.contains(destination))
  {
    throw LookupError{"unknown destination " + to_string(destination)};
  }
  std::deque<NodeId> frontier{destination};
  dist[destination.index] = 0;
  while (!frontier.empty())
  {
    const auto u = frontier.front();
    frontier.pop_front();
    for (auto v : topology.neighbors(u))
    {
      if (dist[v.index] == unreachable_distance)
      {
        dist[v.index] = dist[u.index] + 1;
        frontier.push_back(v);
      }
    }
  }
  return dist;
}

/*------------------------------------------------------------------------------------------------*/

NodeId
ForwardingTable::next_hop(NodeId destination)
const
{
  if (destination == owner)
  {
    throw LookupError{to_string(owner) + " is the destination itself"};
  }
  const auto it = entries.find(destination);
  if (it == entries.end())
  {
    throw LookupError{to_string(owner) + " has no route to " + to_string(destination)};
  }
  return it->second;
}

Routes
compute_routes(const Topology& topology, const std::vector<FlowId>& flows, TieBreak tie_break,
               const std::vector<PinnedRoute>& pinned)
{
  Routes routes(topology.size());
  for (std::uint32_t i = 0; i < topology.size(); ++i)
  {
    routes[i].owner = NodeId{i};
  }

  std::set<NodeId> destinations;
  for (const auto& f : flows)
  {
    if (!topology.contains(f.source) || !topology.contains(f.destination))
    {
      throw ConfigError{"flows", "flow endpoint outside topology"};
    }
    if (f.source == f.destination)
    {
      throw ConfigError{"flows", "source equals destination at " + to_string(f.source)};
    }
    destinations.insert(f.destination);
  }

  for (auto dest : destinations)
  {
    const auto dist = hop_distances(topology, dest);
    for (std::uint32_t u = 0; u < topology.size(); ++u)
    {
      if (u == dest.index || dist[u] == unreachable_distance)
      {
        continue;
      }
      const auto& nbrs = topology.neighbors(NodeId{u});
      std::optional<NodeId> choice;
      for (auto v : nbrs)
      {
        if (dist[v.index] + 1 == dist[u])
        {
          if (!choice || tie_break == TieBreak::highest_index)
          {
            choice = v;
          }
        }
      }
      routes[u].entries[dest] = *choice;
    }
  }

  // Pinned paths; two pins disagreeing at the same node is a configuration error.
  std::map<std::pair<NodeId, NodeId>, NodeId> pinned_hops;
  for (const auto& pin : pinned)
  {
    const auto& path = pin.path;
    if (path.size() < 2 || path.front() != pin.flow.source || path.back() != pin.flow.destination)
    {
      throw ConfigError{"flows.route", "pinned route must run from source to destination"};
    }
    std::set<NodeId> seen;
    for (std::size_t i = 0; i < path.size(); ++i)
    {
      if (!topology.contains(path[i]) || !seen.insert(path[i]).second)
      {
        throw ConfigError{"flows.route", "pinned route has unknown or repeated node"};
      }
      if (i + 1 < path.size())
      {
        if (!topology.adjacent(path[i], path[i + 1]))
        {
          throw ConfigError{"flows.route", to_string(path[i]) + " and " + to_string(path[i + 1]) +
                                             " are not adjacent"};
        }
        const auto key = std::make_pair(path[i], pin.flow.destination);
        const auto [it, fresh] = pinned_hops.emplace(key, path[i + 1]);
        if (!fresh && it->second != path[i + 1])
        {
          throw ConfigError{"flows.route", "conflicting pinned routes at " + to_string(path[i])};
        }
        routes[path[i].index].entries[pin.flow.destination] = path[i + 1];
      }
    }
  }

  for (const auto& f : flows)
  {
    if (!routes[f.source.index].has_route(f.destination))
    {
      throw ConfigError{"flows", to_string(f.destination) + " unreachable from " +
                                   to_string(f.source)};
    }
  }
  // Loop check from every node that has an entry.
  for (auto dest : destinations)
  {
    for (std::uint32_t u = 0; u < topology.size(); ++u)
    {
      if (u != dest.index && routes[u].has_route(dest))
      {
        trace_route(routes, NodeId{u}, dest);
      }
    }
  }
  return routes;
}

std::vector<NodeId>
trace_route(const Routes& routes, NodeId from, NodeId destination)
{
  std::vector<NodeId> path{from};
  auto at = from;
  while (at != destination)
  {
    if (path.size() > routes.size())
    {
      throw ConfigError{"flows.route", "routing loop toward " + to_string(destination)};
    }
    at = routes.at(at.index).next_hop(destination);
    path.push_back(at);
  }
  return path;
}

/*------------------------------------------------------------------------------------------------*/

RoutingView::RoutingView(NodeId owner, const Topology& topology, const Routes& routes)
  : owner_{owner}
  , topology_{&topology}
  , own_{routes.at(owner.index)}
{
  for (auto n : topology.neighbors(owner))
  {
    neighbors_.emplace(n, routes.at(n.index));
  }
}

const ForwardingTable&
RoutingView::neighbor(NodeId n)
const
{
  const auto it = neighbors_.find(n);
  if (it == neighbors_.end())
  {
    throw LookupError{to_string(n) + " is not a neighbour of " + to_string(owner_)};
  }
  return it->second;
}

NodeId
second_next_hop(const RoutingView& view, NodeId intended, NodeId destination)
{
  return view.neighbor(intended).next_hop(destination);
}

std::set<NodeId>
eligible_forwarders(const RoutingView& view, NodeId sender, NodeId partner_next_hop,
                    NodeId partner_destination)
{
  std::set<NodeId> eligible;
  if (partner_next_hop == partner_destination)
  {
    return eligible;
  }
  const auto& topo = view.topology();
  const auto second = second_next_hop(view, partner_next_hop, partner_destination);
  for (auto n : topo.neighbors(sender))
  {
    if (n != partner_next_hop && topo.adjacent(n, partner_next_hop) && topo.adjacent(n, second))
    {
      eligible.insert(n);
    }
  }
  return eligible;
}

} // namespace flexonc
