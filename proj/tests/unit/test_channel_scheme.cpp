#include <doctest.h>

#include "fixtures.hpp"

using namespace flexonc;
using fixtures::N;
using fixtures::packet;
using fixtures::path;

TEST_CASE("frame success probability")
{
  ChannelParams c;
  CHECK(frame_success_probability(c, 1000) == 1.0);
  c.bit_error_rate = 2e-6;
  CHECK(frame_success_probability(c, 1000) == doctest::Approx(0.98412730430922713).epsilon(1e-12));
  c.bit_error_rate = 5e-5;
  CHECK(frame_success_probability(c, 1000) == doctest::Approx(0.67031334264524867).epsilon(1e-12));
  CHECK(frame_success_probability(c, 0) == 1.0);

  double prev = 1.0;
  for (std::size_t b = 100; b <= 3000; b += 100)
  {
    const auto s = frame_success_probability(c, b);
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("airtime")
{
  ChannelParams c;
  CHECK(airtime(c, 1000) == doctest::Approx(8.192e-3));
  CHECK(airtime(c, c.ack_bytes) == doctest::Approx(0.304e-3));
  CHECK(c.ack_slot() == doctest::Approx(0.314e-3));
  c.frame_overhead = 0;
  CHECK(airtime(c, 125) == doctest::Approx(1.0e-3));
}

TEST_CASE("channel parameter validation")
{
  ChannelParams c;
  CHECK_NOTHROW(c.validate());
  c.bit_error_rate = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.bit_error_rate = -1e-6;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.data_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("loss streams replay and stay independent across receivers")
{
  LossStreams a{42, 3};
  LossStreams b{42, 3};
  for (int i = 0; i < 1000; ++i)
  {
    CHECK(a.draw(N(i % 3), 0.5) == b.draw(N(i % 3), 0.5));
  }

  LossStreams s{7, 2};
  const double p = 0.7;
  const int n = 200000;
  int both = 0;
  int first = 0;
  int second = 0;
  for (int i = 0; i < n; ++i)
  {
    const bool x = s.draw(N(0), p);
    const bool y = s.draw(N(1), p);
    first += x;
    second += y;
    both += x && y;
  }
  CHECK(first / double(n) == doctest::Approx(p).epsilon(0.01));
  CHECK(second / double(n) == doctest::Approx(p).epsilon(0.01));
  CHECK(both / double(n) == doctest::Approx(p * p).epsilon(0.01));
}

TEST_CASE("broadcast reaches each neighbour once in ascending order")
{
  const auto t = fixtures::eight_node();
  ChannelParams c;
  LossStreams rng{1, t.size()};
  const auto rx = broadcast(t, c, N(6), 17, 1000, rng);
  REQUIRE(rx.size() == 5);
  std::vector<NodeId> who;
  for (const auto& r : rx)
  {
    CHECK(r.frame == 17);
    CHECK(r.delivered);
    who.push_back(r.receiver);
  }
  CHECK(who == path({1, 2, 3, 5, 7}));
}

TEST_CASE("scheme names round-trip")
{
  for (auto s : all_schemes)
  {
    CHECK(parse_scheme(to_string(s)) == s);
  }
  CHECK(to_string(SchemeKind::flexonc_sr) == "flexonc-sr");
  CHECK_THROWS_AS(parse_scheme("flexonc_sr"), ConfigError);
}

TEST_CASE("acknowledgment slots and sender window")
{
  ChannelParams c;
  const auto slot = c.ack_slot();
  CHECK(ack_slot_offset(c, 1) == doctest::Approx(c.sifs));
  CHECK(ack_slot_offset(c, 3) == doctest::Approx(c.sifs + 2 * slot));
  CHECK(sender_window(c, 2, 2) == doctest::Approx(4 * slot + c.guard));
  CHECK(sender_window(c, 1, 0) == doctest::Approx(slot + c.guard));
  CHECK(sender_window(c, 3, 0) == doctest::Approx(3 * slot + c.guard));
  CHECK_THROWS_AS(sender_window(c, 0, 0), PreconditionError);

  // The last backup ACK ends before the sender gives up.
  for (std::size_t n = 1; n <= 4; ++n)
  {
    for (std::size_t e = 0; e <= 4; ++e)
    {
      const auto last_end = ack_slot_offset(c, n + e) + airtime(c, c.ack_bytes);
      CHECK(last_end < sender_window(c, n, e));
    }
  }
}

TEST_CASE("coded frame bitmap is the union of eligible forwarders minus next hops")
{
  const auto t = fixtures::eight_node();
  const auto r = compute_routes(t, {{N(0), N(4), 0}, {N(4), N(0), 0}}, TieBreak::lowest_index);
  const RoutingView v2{N(2), t, r};
  const auto a = packet(0, 4, 1, 1, 3);
  const auto b = packet(4, 0, 1, 3, 1);
  const auto c = build_coded_frame(N(2), {a, b}, v2);
  CHECK(c.header.eligible_nodes() == path({5, 7}));
  CHECK(c.header.partner_count() == 2);
  CHECK(c.payload_ids() == std::set<PacketId>{a.id, b.id});
  CHECK(rank_of(N(5), c.header, b.id) == 2);
  CHECK(rank_of(N(7), c.header, b.id) == 3);

  const auto bare = build_coded_frame(N(2), {a, b}, v2, false);
  CHECK(bare.header.eligible_nodes().empty());

  const RoutingView v1{N(1), t, r};
  const auto c1 = build_coded_frame(N(1), {packet(0, 4, 2, 0, 2), packet(4, 0, 2, 2, 0)}, v1);
  CHECK(c1.header.eligible_nodes() == path({6}));

  CHECK_THROWS_AS(build_coded_frame(N(2), {a}, v2), PreconditionError);
}

TEST_CASE("frame sizes per scheme")
{
  ChannelParams c;
  CHECK(native_frame_bytes(c, SchemeKind::bend, 1000) == 1004);
  CHECK(native_frame_bytes(c, SchemeKind::flexonc, 1000) == 1000);
  CHECK(native_frame_bytes(c, SchemeKind::cope, 1000) == 1000);

  CodedPacket p;
  p.payload_bytes = 1000;
  p.header.partners.resize(2);
  p.header.eligible.assign(12, false);
  CHECK(coded_frame_bytes(c, SchemeKind::cope, p) == 1004);
  CHECK(coded_frame_bytes(c, SchemeKind::flexonc, p) == 1006);
  CHECK(coded_frame_bytes(c, SchemeKind::flexonc_sr, p) == 1006);
}

TEST_CASE("ACK cache evicts the oldest entry")
{
  AckCache cache{2};
  const PacketId a{{N(0), N(4), 0}, 1};
  const PacketId b{{N(0), N(4), 0}, 2};
  const PacketId d{{N(0), N(4), 0}, 3};
  cache.add(a, N(1));
  cache.add(b, N(2));
  CHECK(cache.contains(a, N(1)));
  CHECK_FALSE(cache.contains(a, N(2)));
  cache.add(d, N(3));
  CHECK(cache.size() == 2);
  CHECK_FALSE(cache.contains(a));
  CHECK(cache.contains(b));
  CHECK(cache.contains(d, N(3)));
}
