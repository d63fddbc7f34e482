#include <doctest.h>

#include <queue>
#include <random>

#include "fixtures.hpp"

using namespace flexonc;
using fixtures::N;
using fixtures::path;

namespace {

Routes
eight_node_routes(TieBreak tb = TieBreak::lowest_index)
{
  const auto t = fixtures::eight_node();
  return compute_routes(t, {{N(0), N(4), 0}, {N(4), N(0), 0}}, tb);
}

std::vector<unsigned>
bfs(const Topology& t, NodeId from)
{
  std::vector<unsigned> d(t.size(), unreachable_distance);
  std::queue<NodeId> q;
  d[from.index] = 0;
  q.push(from);
  while (!q.empty())
  {
    const auto u = q.front();
    q.pop();
    for (auto v : t.neighbors(u))
    {
      if (d[v.index] == unreachable_distance)
      {
        d[v.index] = d[u.index] + 1;
        q.push(v);
      }
    }
  }
  return d;
}

} // namespace

TEST_CASE("eight-node layout adjacency")
{
  const auto t = fixtures::eight_node();
  CHECK(t.size() == 8);
  CHECK(t.neighbors(N(1)) == path({0, 2, 5, 6}));
  CHECK(t.neighbors(N(6)) == path({1, 2, 3, 5, 7}));
  CHECK_FALSE(t.adjacent(N(0), N(2)));
  CHECK_FALSE(t.adjacent(N(3), N(3)));
}

TEST_CASE("build_grid uses king-move adjacency")
{
  const auto g = build_grid(2, 4, 150.0);
  CHECK(g.size() == 8);
  CHECK(g.neighbors(N(0)) == path({1, 4, 5}));
  CHECK(g.neighbors(N(1)) == path({0, 2, 4, 5, 6}));
  CHECK_THROWS_AS(build_grid(0, 4, 150.0), ConfigError);
  CHECK_THROWS_AS(build_grid(3, -1, 150.0), ConfigError);
}

TEST_CASE("minimum-hop routes with lowest-index tie break")
{
  const auto r = eight_node_routes();
  CHECK(r[0].next_hop(N(4)) == N(1));
  CHECK(trace_route(r, N(0), N(4)) == path({0, 1, 2, 3, 4}));
  CHECK(trace_route(r, N(4), N(0)) == path({4, 3, 2, 1, 0}));
  CHECK(r[5].next_hop(N(4)) == N(2));
  CHECK_THROWS_AS(r[4].next_hop(N(4)), LookupError);
  CHECK_THROWS_AS(r[0].next_hop(N(7)), LookupError);
}

TEST_CASE("highest-index tie break prefers the upper row")
{
  const auto r = eight_node_routes(TieBreak::highest_index);
  CHECK(r[0].next_hop(N(4)) == N(5));
  CHECK(trace_route(r, N(0), N(4)).size() == 5);
}

TEST_CASE("pinned routes override computed entries")
{
  const auto t = fixtures::twelve_node();
  const FlowId f{N(0), N(7), 0};
  const auto r = compute_routes(t, {f}, TieBreak::lowest_index, {{f, path({0, 5, 6, 7})}});
  CHECK(trace_route(r, N(0), N(7)) == path({0, 5, 6, 7}));
}

TEST_CASE("unreachable destination is a configuration error")
{
  const auto t = Topology::from_adjacency({{1}, {0}, {}});
  CHECK_THROWS_AS(compute_routes(t, {{N(0), N(2), 0}}, TieBreak::lowest_index), ConfigError);
}

TEST_CASE("second next hop and eligible forwarders")
{
  const auto t = fixtures::eight_node();
  const auto r = eight_node_routes();

  const RoutingView v6{N(6), t, r};
  CHECK(second_next_hop(v6, N(2), N(4)) == N(3));
  CHECK(second_next_hop(v6, N(3), N(4)) == N(4));

  const RoutingView v0{N(0), t, r};
  CHECK_THROWS_AS(second_next_hop(v0, N(6), N(4)), LookupError);

  const RoutingView v1{N(1), t, r};
  CHECK(eligible_forwarders(v1, N(1), N(2), N(4)) == std::set<NodeId>{N(6)});

  const RoutingView v2{N(2), t, r};
  auto both = eligible_forwarders(v2, N(2), N(3), N(4));
  CHECK(both == std::set<NodeId>{N(7)});
  const auto other = eligible_forwarders(v2, N(2), N(1), N(0));
  CHECK(other == std::set<NodeId>{N(5)});
}

TEST_CASE("routes are loop-free and minimum-hop on random grids")
{
  std::mt19937_64 rng{2024};
  for (int trial = 0; trial < 60; ++trial)
  {
    const int rows = 1 + static_cast<int>(rng() % 7);
    const int cols = 1 + static_cast<int>(rng() % 7);
    const auto grid = build_grid(rows, cols, 150.0);
    std::vector<std::vector<std::uint32_t>> adj(grid.size());
    for (auto u : grid.nodes())
    {
      for (auto v : grid.neighbors(u))
      {
        if (u < v && rng() % 4 != 0)
        {
          adj[u.index].push_back(v.index);
        }
      }
    }
    const auto t = Topology::from_adjacency(adj);
    const NodeId dest{static_cast<std::uint32_t>(rng() % t.size())};
    const auto dist = bfs(t, dest);
    std::vector<FlowId> flows;
    for (auto n : t.nodes())
    {
      if (n != dest && dist[n.index] != unreachable_distance)
      {
        flows.push_back({n, dest, 0});
      }
    }
    const auto tb = trial % 2 ? TieBreak::highest_index : TieBreak::lowest_index;
    const auto r = compute_routes(t, flows, tb);
    CHECK(hop_distances(t, dest) == dist);
    for (const auto& f : flows)
    {
      const auto p = trace_route(r, f.source, dest);
      REQUIRE(p.size() == dist[f.source.index] + 1);
      std::set<NodeId> seen(p.begin(), p.end());
      CHECK(seen.size() == p.size());
      for (std::size_t i = 0; i + 1 < p.size(); ++i)
      {
        CHECK(t.adjacent(p[i], p[i + 1]));
        CHECK(dist[p[i + 1].index] + 1 == dist[p[i].index]);
      }
    }
  }
}

TEST_CASE("eligible forwarders are common neighbours of sender, next hop and second next hop")
{
  std::mt19937_64 rng{7};
  for (int trial = 0; trial < 40; ++trial)
  {
    const int rows = 2 + static_cast<int>(rng() % 6);
    const int cols = 2 + static_cast<int>(rng() % 6);
    const auto t = build_grid(rows, cols, 150.0);
    const NodeId dest{static_cast<std::uint32_t>(rng() % t.size())};
    std::vector<FlowId> flows;
    for (auto n : t.nodes())
    {
      if (n != dest)
      {
        flows.push_back({n, dest, 0});
      }
    }
    const auto r = compute_routes(t, flows, TieBreak::lowest_index);
    for (auto sender : t.nodes())
    {
      if (sender == dest)
      {
        continue;
      }
      const auto nh = r[sender.index].next_hop(dest);
      if (nh == dest)
      {
        continue;
      }
      const RoutingView v{sender, t, r};
      const auto snh = second_next_hop(v, nh, dest);
      CHECK(snh == r[nh.index].next_hop(dest));
      for (auto e : eligible_forwarders(v, sender, nh, dest))
      {
        CHECK(t.adjacent(e, sender));
        CHECK(t.adjacent(e, nh));
        CHECK(t.adjacent(e, snh));
      }
    }
  }
}
