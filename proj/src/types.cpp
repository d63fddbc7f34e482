#include "flexonc/types.hpp"

#include <algorithm>

namespace flexonc {

std::string
to_string(NodeId n)
{
  return n.valid() ? "N" + std::to_string(n.index) : "N?";
}

std::string
to_string(const PacketId& id)
{
  return to_string(id.flow.source) + ">" + to_string(id.flow.destination) + "#" +
         std::to_string(id.flow.number) + ":" + std::to_string(id.sequence);
}

/*------------------------------------------------------------------------------------------------*/

std::vector<NodeId>
CodedHeader::eligible_nodes()
const
{
  std::vector<NodeId> nodes;
  for (std::uint32_t i = 0; i < eligible.size(); ++i)
  {
    if (eligible[i])
    {
      nodes.emplace_back(i);
    }
  }
  return nodes;
}

std::optional<std::size_t>
CodedHeader::next_hop_position(NodeId n)
const noexcept
{
  for (std::size_t i = 0; i < partners.size(); ++i)
  {
    if (partners[i].next_hop == n)
    {
      return i;
    }
  }
  return std::nullopt;
}

std::set<PacketId>
CodedPacket::payload_ids()
const
{
  std::set<PacketId> ids;
  for (const auto& p : natives)
  {
    ids.insert(p.id);
  }
  return ids;
}

void
CodedPacket::validate()
const
{
  if (header.partners.size() < 2)
  {
    throw PreconditionError{"coded packet needs at least two partners"};
  }
  if (header.partners.size() > max_coding_partners)
  {
    throw PreconditionError{"coded packet exceeds the partner cap"};
  }
  if (natives.size() != header.partners.size())
  {
    throw PreconditionError{"payload does not match header partner list"};
  }
  std::set<NodeId> hops;
  for (std::size_t i = 0; i < natives.size(); ++i)
  {
    if (natives[i].id != header.partners[i].id)
    {
      throw PreconditionError{"payload order differs from header"};
    }
    const auto nh = header.partners[i].next_hop;
    if (nh.valid() && !hops.insert(nh).second)
    {
      throw PreconditionError{"partner next hops must be distinct"};
    }
    if (nh.valid() && header.is_eligible(nh))
    {
      throw PreconditionError{"bitmap names a partner next hop"};
    }
  }
}

/*------------------------------------------------------------------------------------------------*/

std::optional<PacketId>
xor_decode(const CodedPacket& coded, const std::set<PacketId>& known)
{
  std::optional<PacketId> missing;
  for (const auto& p : coded.header.partners)
  {
    if (known.contains(p.id))
    {
      continue;
    }
    if (missing)
    {
      return std::nullopt;
    }
    missing = p.id;
  }
  return missing;
}

unsigned
rank_of(NodeId receiver, const CodedHeader& header, const PacketId& decoded_partner)
{
  const auto it = std::find_if(header.partners.begin(), header.partners.end(),
                               [&](const CodedPartner& p){ return p.id == decoded_partner; });
  if (it == header.partners.end())
  {
    throw PreconditionError{"partner " + to_string(decoded_partner) + " not in header"};
  }
  if (receiver == it->next_hop)
  {
    return 1;
  }
  if (!header.is_eligible(receiver))
  {
    throw PreconditionError{to_string(receiver) + " is not in the eligible bitmap"};
  }
  // Bitmap nodes are already in ascending index order.
  unsigned rank = 2;
  for (std::uint32_t i = 0; i < receiver.index; ++i)
  {
    if (header.eligible[i])
    {
      ++rank;
    }
  }
  return rank;
}

} // namespace flexonc
