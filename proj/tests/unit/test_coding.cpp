#include <doctest.h>

#include <random>

#include "fixtures.hpp"

using namespace flexonc;
using fixtures::N;
using fixtures::packet;

namespace {

NativePacket
decoded(NativePacket p, std::uint32_t coder)
{
  p.decoded_native = true;
  p.origin_coded_previous_hop = N(coder);
  return p;
}

QueuedPacket
queued(const NativePacket& p)
{
  QueuedPacket q;
  q.packet = p;
  return q;
}

Topology
xtopo()
{
  return Topology::from_positions({{0, 1}, {1, 0}, {1, 1}, {2, 1}, {1, 2}}, 150.0, 250.0);
}

Topology
cross()
{
  return Topology::from_positions({{1, 1}, {1, 0}, {2, 1}, {1, 2}, {0, 1}}, 150.0, 250.0);
}

} // namespace

TEST_CASE("common coding conditions on the 12-node grid")
{
  const auto t = fixtures::twelve_node();
  // At N6: P1 of flow N0->N7 (from N5 to N7), P2 of flow N7->N9 (from N7 to N9).
  const auto p1 = packet(0, 7, 1, 5, 7);
  const auto p2 = packet(7, 9, 1, 7, 9);
  CHECK(common_conditions_ok(p1, p2, t));
  CHECK(common_conditions_ok(p2, p1, t));

  // Relay exchange: each next hop is the other's previous hop.
  CHECK(common_conditions_ok(packet(0, 2, 1, 0, 2), packet(2, 0, 1, 2, 0), build_grid(1, 3, 150.0)));

  // N3 is two columns away from N5.
  CHECK_FALSE(common_conditions_ok(p1, packet(7, 3, 1, 7, 3), t));

  CHECK_THROWS_AS(common_conditions_ok(p1, packet(9, 7, 1, 9, 7), t), PreconditionError);
}

TEST_CASE("RecodingRule requires the partner's next hop to be the decoded packet's coder")
{
  const auto t = fixtures::twelve_node();
  const auto p1 = decoded(packet(0, 7, 1, 5, 7), 5);
  CHECK_FALSE(recoding_rule_ok(p1, packet(7, 9, 1, 7, 9), t));
  CHECK(recoding_rule_ok(p1, packet(7, 0, 1, 7, 5), t));
  CHECK_THROWS_AS(recoding_rule_ok(packet(0, 7, 1, 5, 7), packet(7, 9, 1, 7, 9), t),
                  PreconditionError);

  // Alternate layout where N9 is the coder's neighbour but not the coder itself.
  const auto p1alt = decoded(packet(0, 7, 1, 5, 7), 10);
  CHECK_FALSE(recoding_rule_ok(p1alt, packet(7, 9, 1, 7, 9), t));
}

TEST_CASE("RecodingRule implies the common conditions")
{
  std::mt19937_64 rng{99};
  std::size_t recoded = 0;
  for (int i = 0; i < 10000; ++i)
  {
    const int rows = 2 + static_cast<int>(rng() % 4);
    const int cols = 2 + static_cast<int>(rng() % 4);
    const auto t = build_grid(rows, cols, 150.0);
    const auto nodes = static_cast<std::uint32_t>(t.size());
    auto pick_neighbor = [&](std::uint32_t n)
    {
      const auto& nb = t.neighbors(N(n));
      return nb[rng() % nb.size()].index;
    };
    const auto coder = static_cast<std::uint32_t>(rng() % nodes);
    const auto here = pick_neighbor(coder);
    const auto nh1 = pick_neighbor(here);
    const auto ph2 = pick_neighbor(here);
    auto nh2 = pick_neighbor(here);
    if (nh1 == nh2)
    {
      continue;
    }
    if (rng() % 3 == 0)
    {
      nh2 = coder;
    }
    if (nh1 == nh2)
    {
      continue;
    }
    const auto p1 = decoded(packet(0, 1, i, coder, nh1), coder);
    const auto p2 = packet(2, 3, i, ph2, nh2);
    if (recoding_rule_ok(p1, p2, t))
    {
      ++recoded;
      CHECK(common_conditions_ok(p1, p2, t));
    }
  }
  CHECK(recoded > 100);
}

TEST_CASE("can_encode tags decoded natives as suspect until the switch activates")
{
  const auto t = fixtures::twelve_node();
  const auto p1 = decoded(packet(0, 7, 1, 5, 7), 5);
  const auto p2 = packet(7, 9, 1, 7, 9);

  const auto common = can_encode(p1, p2, nullptr, t);
  CHECK(common.ok);
  CHECK(common.first_suspect);
  CHECK_FALSE(common.second_suspect);

  SwitchState sw{{.nack_threshold = 5}};
  const auto inactive = can_encode(p1, p2, &sw, t);
  CHECK(inactive.ok);
  CHECK(inactive.first_suspect);

  for (int i = 0; i < 6; ++i)
  {
    sw.on_nack(p1.id.flow);
  }
  CHECK_FALSE(can_encode(p1, p2, &sw, t).ok);

  const auto plain = can_encode(packet(0, 7, 1, 5, 7), p2, &sw, t);
  CHECK(plain.ok);
  CHECK_FALSE(plain.first_suspect);
  CHECK_FALSE(plain.second_suspect);
}

TEST_CASE("SwitchState activates on the NACK after the threshold")
{
  SwitchState sw{{.nack_threshold = 5}};
  const FlowId f{N(0), N(7), 0};
  const FlowId g{N(7), N(9), 0};
  for (int i = 0; i < 5; ++i)
  {
    CHECK_FALSE(sw.on_nack(f));
  }
  CHECK_FALSE(sw.recoding_active(f));
  CHECK(sw.on_nack(f));
  CHECK(sw.recoding_active(f));
  CHECK_FALSE(sw.on_nack(f));
  CHECK_FALSE(sw.recoding_active(g));
  CHECK(sw.nack_count(f) == 7);
}

TEST_CASE("SwitchState timer expiry and new flows revert to the common conditions")
{
  SwitchState sw{{.nack_threshold = 0, .alpha = 3.0, .ewma_weight = 0.25}};
  const FlowId f{N(0), N(7), 0};
  const FlowId g{N(7), N(9), 0};

  CHECK_FALSE(sw.on_packet_arrival(f, 0.0).has_value());
  for (int i = 1; i <= 50; ++i)
  {
    sw.on_packet_arrival(f, 0.1 * i);
  }
  REQUIRE(sw.miat(f).has_value());
  CHECK(*sw.miat(f) == doctest::Approx(0.1));
  CHECK(*sw.timer_deadline(f) == doctest::Approx(5.0 + 0.3));

  sw.on_nack(f);
  CHECK(sw.recoding_active(f));
  CHECK_FALSE(sw.on_timer(f, 5.2));
  CHECK(sw.recoding_active(f));

  sw.on_packet_arrival(g, 5.25);
  CHECK_FALSE(sw.recoding_active(f));
  CHECK(sw.nack_count(f) == 0);

  sw.on_nack(f);
  CHECK(sw.recoding_active(f));
  CHECK(sw.on_timer(f, 5.31));
  CHECK_FALSE(sw.recoding_active(f));
  CHECK_FALSE(sw.miat(f).has_value());
}

TEST_CASE("select_coding_set on the X topology and the cross topology")
{
  SwitchState sw;
  {
    const auto t = xtopo();
    TxQueues q;
    const auto head = packet(0, 3, 1, 0, 3);
    q.q1.push_back(queued(head));
    q.q1.push_back(queued(packet(1, 4, 1, 1, 4)));
    const auto set = select_coding_set(q, head, sw, t, {});
    CHECK(set.size() == 2);
  }
  {
    const auto t = cross();
    TxQueues q;
    const auto head = packet(1, 3, 1, 1, 3);
    q.q1.push_back(queued(head));
    q.q1.push_back(queued(packet(3, 1, 1, 3, 1)));
    q.q1.push_back(queued(packet(2, 4, 1, 2, 4)));
    q.q1.push_back(queued(packet(4, 2, 1, 4, 2)));
    q.q1.push_back(queued(packet(3, 1, 2, 3, 1)));
    const auto set = select_coding_set(q, head, sw, t, {});
    REQUIRE(set.size() == 4);
    std::set<NodeId> hops;
    for (const auto& p : set)
    {
      hops.insert(p.next_hop);
    }
    CHECK(hops.size() == 4);

    CodingPolicy two;
    two.max_partners = 2;
    CHECK(select_coding_set(q, head, sw, t, two).size() == 2);
  }
  {
    const auto t = xtopo();
    TxQueues q;
    const auto head = packet(0, 3, 1, 0, 3);
    q.q1.push_back(queued(head));
    CHECK(select_coding_set(q, head, sw, t, {}).size() == 1);
  }
}

TEST_CASE("select_coding_set skips Q2 when overheard scanning is off")
{
  SwitchState sw;
  const auto t = xtopo();
  TxQueues q;
  const auto head = packet(0, 3, 1, 0, 3);
  q.q1.push_back(queued(head));
  q.q2.push_back(queued(packet(1, 4, 1, 1, 4)));
  CHECK(select_coding_set(q, head, sw, t, {}).size() == 2);
  CHECK(select_coding_set(q, head, sw, t, {.scan_overheard = false}).size() == 1);
}

TEST_CASE("coding buffer peels coded entries and evicts old ones")
{
  CodingBuffer b{2.0, 200};
  const auto a = packet(0, 4, 1, 0, 1);
  const auto c = packet(4, 0, 1, 2, 1);
  const auto d = packet(4, 0, 2, 2, 1);

  CodedPacket ac;
  ac.header.partners = {{a.id, N(1)}, {c.id, N(3)}};
  CodedPacket cd;
  cd.header.partners = {{c.id, N(1)}, {d.id, N(3)}};

  b.add_coded(cd, 0.0);
  b.add_coded(ac, 0.1);
  CHECK(b.known(0.2).empty());
  b.add_native(a, 0.5);
  const auto k = b.known(0.6);
  CHECK(k == std::set<PacketId>{a.id, c.id, d.id});
  CHECK(b.native(a.id).has_value());
  CHECK_FALSE(b.native(c.id).has_value());

  CHECK(b.known(2.3) == std::set<PacketId>{a.id});
  CHECK(b.known(3.0).empty());
  CHECK(b.size() == 0);

  CodingBuffer small{10.0, 2};
  small.add_native(a, 0.0);
  small.add_native(c, 0.0);
  small.add_native(d, 0.0);
  CHECK(small.known(0.0) == std::set<PacketId>{c.id, d.id});
}

TEST_CASE("TxQueues erase removes every copy")
{
  TxQueues q;
  const auto a = packet(0, 4, 1, 0, 1);
  q.q1.push_back(queued(a));
  q.q2.push_back(queued(a));
  q.q1.push_back(queued(packet(0, 4, 2, 0, 1)));
  CHECK(q.contains(a.id));
  CHECK(q.erase(a.id) == 2);
  CHECK_FALSE(q.contains(a.id));
  CHECK_FALSE(q.empty());
}
