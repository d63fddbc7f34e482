#include <doctest.h>

#include "fixtures.hpp"

using namespace flexonc;
using fixtures::N;

namespace {

PacketId
pid(std::uint64_t seq)
{
  return {{N(0), N(9), 0}, seq};
}

CodedPacket
coded(std::size_t n)
{
  CodedPacket c;
  c.sender = N(20);
  for (std::size_t i = 0; i < n; ++i)
  {
    c.header.partners.push_back({pid(i), N(static_cast<std::uint32_t>(i))});
  }
  return c;
}

} // namespace

TEST_CASE("xor_decode recovers the single unknown partner")
{
  const auto c = coded(2);
  CHECK(xor_decode(c, {pid(0)}) == pid(1));
  CHECK(xor_decode(c, {pid(1)}) == pid(0));
  CHECK_FALSE(xor_decode(c, {}).has_value());
  CHECK_FALSE(xor_decode(c, {pid(0), pid(1)}).has_value());
}

TEST_CASE("xor_decode over every subset of known partners")
{
  for (std::size_t n = 2; n <= max_coding_partners; ++n)
  {
    const auto c = coded(n);
    for (unsigned mask = 0; mask < (1u << n); ++mask)
    {
      std::set<PacketId> known{pid(100)};
      std::vector<std::size_t> missing;
      for (std::size_t i = 0; i < n; ++i)
      {
        if (mask & (1u << i))
        {
          known.insert(pid(i));
        }
        else
        {
          missing.push_back(i);
        }
      }
      const auto r = xor_decode(c, known);
      if (missing.size() == 1)
      {
        REQUIRE(r.has_value());
        CHECK(*r == pid(missing.front()));
      }
      else
      {
        CHECK_FALSE(r.has_value());
      }
    }
  }
}

TEST_CASE("rank_of orders the intended forwarder first, then bitmap nodes ascending")
{
  CodedHeader h;
  h.partners = {{pid(0), N(2)}, {pid(1), N(5)}};
  h.eligible.assign(8, false);
  h.eligible[3] = true;
  h.eligible[7] = true;

  CHECK(rank_of(N(2), h, pid(0)) == 1);
  CHECK(rank_of(N(5), h, pid(1)) == 1);
  CHECK(rank_of(N(3), h, pid(1)) == 2);
  CHECK(rank_of(N(7), h, pid(1)) == 3);
  CHECK_THROWS_AS(rank_of(N(4), h, pid(1)), PreconditionError);
  CHECK_THROWS_AS(rank_of(N(2), h, pid(9)), PreconditionError);

  h.eligible.assign(8, false);
  h.eligible[6] = true;
  CHECK(rank_of(N(6), h, pid(0)) == 2);
}

TEST_CASE("rank_of assigns distinct ranks 2..k+1 to the bitmap")
{
  CodedHeader h;
  h.partners = {{pid(0), N(1)}, {pid(1), N(2)}};
  h.eligible = {false, false, false, true, false, true, true, false, true};
  std::set<unsigned> ranks;
  for (auto n : h.eligible_nodes())
  {
    ranks.insert(rank_of(n, h, pid(0)));
  }
  CHECK(ranks == std::set<unsigned>{2, 3, 4, 5});
}

TEST_CASE("coded packet validation")
{
  auto c = coded(2);
  for (const auto& p : c.header.partners)
  {
    NativePacket n;
    n.id = p.id;
    n.next_hop = p.next_hop;
    c.natives.push_back(n);
  }
  CHECK_NOTHROW(c.validate());

  auto dup = c;
  dup.header.partners[1].next_hop = dup.header.partners[0].next_hop;
  dup.natives[1].next_hop = dup.natives[0].next_hop;
  CHECK_THROWS_AS(dup.validate(), PreconditionError);

  auto single = coded(1);
  CHECK_THROWS_AS(single.validate(), PreconditionError);
}

TEST_CASE("decoded natives report the coded transmitter as previous hop")
{
  auto p = fixtures::packet(0, 7, 1, 5, 7);
  CHECK(p.coding_previous_hop() == N(5));
  p.decoded_native = true;
  p.origin_coded_previous_hop = N(6);
  CHECK(p.coding_previous_hop() == N(6));
}
