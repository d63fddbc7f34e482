#include "flexonc/scheme.hpp"

#include <algorithm>

namespace flexonc {

std::string
to_string(SchemeKind s)
{
  switch (s)
  {
    case SchemeKind::noncoding:  return "noncoding";
    case SchemeKind::cope:       return "cope";
    case SchemeKind::bend:       return "bend";
    case SchemeKind::core:       return "core";
    case SchemeKind::flexonc:    return "flexonc";
    case SchemeKind::flexonc_sr: return "flexonc-sr";
  }
  return "?";
}

SchemeKind
parse_scheme(const std::string& name)
{
  for (auto s : all_schemes)
  {
    if (to_string(s) == name)
    {
      return s;
    }
  }
  throw ConfigError{"scheme", "unknown scheme '" + name + "'"};
}

void
CoreParams::validate()
const
{
  if (scan_depth < 1)
  {
    throw ConfigError{"core.scan_depth", "must be at least 1"};
  }
  if (native_delay < 0.0 || timer_slot <= 0.0 || gain_weight < 0.0)
  {
    throw ConfigError{"core", "delays must be non-negative and the timer slot positive"};
  }
}

void
SchemeParams::validate()
const
{
  if (ack_cache < 1)
  {
    throw ConfigError{"params.ack_cache", "must be at least 1"};
  }
  if (queue_capacity < 1)
  {
    throw ConfigError{"params.queue_capacity", "must be at least 1"};
  }
  if (buffer_retention <= 0.0 || buffer_capacity < 1)
  {
    throw ConfigError{"params.buffer_retention", "buffer retention and capacity must be positive"};
  }
  SwitchState{switch_rule};
  core.validate();
}

/*------------------------------------------------------------------------------------------------*/

AckCache::AckCache(std::size_t capacity)
  : capacity_{capacity}
{}

void
AckCache::add(const PacketId& id, NodeId sender)
{
  entries_.emplace_back(id, sender);
  while (entries_.size() > capacity_)
  {
    entries_.pop_front();
  }
}

bool
AckCache::contains(const PacketId& id, NodeId sender)
const
{
  return std::find(entries_.begin(), entries_.end(), std::make_pair(id, sender)) != entries_.end();
}

bool
AckCache::contains(const PacketId& id)
const
{
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e){ return e.first == id; });
}

/*------------------------------------------------------------------------------------------------*/

double
sender_window(const ChannelParams& params, std::size_t partners, std::size_t eligible)
{
  if (partners < 1)
  {
    throw PreconditionError{"sender window needs at least one partner"};
  }
  return static_cast<double>(partners + eligible) * params.ack_slot() + params.guard;
}

double
ack_slot_offset(const ChannelParams& params, std::size_t slot)
{
  return params.sifs + static_cast<double>(slot - 1) * params.ack_slot();
}

CodedPacket
build_coded_frame(NodeId sender, const std::vector<NativePacket>& partners,
                  const RoutingView& view, bool with_bitmap)
{
  if (partners.size() < 2)
  {
    throw PreconditionError{"a coded frame needs at least two partners"};
  }
  CodedPacket c;
  c.sender = sender;
  c.header.eligible.assign(view.topology().size(), false);
  for (const auto& p : partners)
  {
    c.header.partners.push_back({p.id, p.next_hop});
    c.natives.push_back(p);
    c.payload_bytes = std::max(c.payload_bytes, p.payload_bytes);
  }
  if (with_bitmap)
  {
    for (const auto& p : partners)
    {
      for (auto n : eligible_forwarders(view, sender, p.next_hop, p.id.flow.destination))
      {
        c.header.eligible[n.index] = true;
      }
    }
    for (const auto& p : partners)
    {
      c.header.eligible[p.next_hop.index] = false;
    }
  }
  c.validate();
  return c;
}

std::size_t
native_frame_bytes(const ChannelParams& params, SchemeKind scheme, std::size_t payload)
{
  return payload + (scheme == SchemeKind::bend ? params.second_next_hop_bytes : 0);
}

std::size_t
coded_frame_bytes(const ChannelParams& params, SchemeKind scheme, const CodedPacket& packet)
{
  auto bytes = packet.payload_bytes + packet.header.partner_count() * params.coded_partner_bytes;
  if (scheme == SchemeKind::flexonc || scheme == SchemeKind::flexonc_sr)
  {
    bytes += (packet.header.eligible.size() + 7) / 8;
  }
  return bytes;
}

} // namespace flexonc
