#include "flexonc/coding.hpp"

#include <algorithm>

namespace flexonc {

/*------------------------------------------------------------------------------------------------*/

CodingBuffer::CodingBuffer(double retention, std::size_t capacity)
  : retention_{retention}
  , capacity_{capacity}
{}

void
CodingBuffer::push(Entry e)
{
  entries_.push_back(std::move(e));
  while (entries_.size() > capacity_)
  {
    const auto& old = entries_.front();
    if (old.ids.size() == 1)
    {
      natives_.erase(old.ids.front());
    }
    entries_.pop_front();
  }
}

void
CodingBuffer::add_native(const NativePacket& packet, double now)
{
  evict(now);
  if (natives_.contains(packet.id))
  {
    return;
  }
  natives_.emplace(packet.id, packet);
  push({{packet.id}, now});
}

void
CodingBuffer::add_coded(const CodedPacket& packet, double now)
{
  evict(now);
  Entry e{{}, now};
  for (const auto& p : packet.header.partners)
  {
    e.ids.push_back(p.id);
  }
  push(std::move(e));
}

void
CodingBuffer::evict(double now)
{
  while (!entries_.empty() && entries_.front().time < now - retention_)
  {
    const auto& old = entries_.front();
    if (old.ids.size() == 1)
    {
      natives_.erase(old.ids.front());
    }
    entries_.pop_front();
  }
}

std::set<PacketId>
CodingBuffer::known(double now)
{
  evict(now);
  std::set<PacketId> known;
  for (const auto& [id, _] : natives_)
  {
    known.insert(id);
  }
  bool progress = true;
  while (progress)
  {
    progress = false;
    for (const auto& e : entries_)
    {
      if (e.ids.size() < 2)
      {
        continue;
      }
      const PacketId* missing = nullptr;
      std::size_t n_missing = 0;
      for (const auto& id : e.ids)
      {
        if (!known.contains(id))
        {
          missing = &id;
          ++n_missing;
        }
      }
      if (n_missing == 1)
      {
        known.insert(*missing);
        progress = true;
      }
    }
  }
  return known;
}

std::optional<NativePacket>
CodingBuffer::native(const PacketId& id)
const
{
  const auto it = natives_.find(id);
  if (it == natives_.end())
  {
    return std::nullopt;
  }
  return it->second;
}

/*------------------------------------------------------------------------------------------------*/

bool
TxQueues::contains(const PacketId& id)
const
{
  auto match = [&](const QueuedPacket& q){ return q.packet.id == id; };
  if (std::any_of(q1.begin(), q1.end(), match) || std::any_of(q2.begin(), q2.end(), match))
  {
    return true;
  }
  return std::any_of(mixing.begin(), mixing.end(), [&](const RetryFrame& r)
  {
    return std::any_of(r.partners.begin(), r.partners.end(), match);
  });
}

std::size_t
TxQueues::erase(const PacketId& id)
{
  auto match = [&](const QueuedPacket& q){ return q.packet.id == id; };
  std::size_t removed = std::erase_if(q1, match) + std::erase_if(q2, match);
  // A retry frame that loses a partner is no longer the identical frame; its remaining
  // partners go back to Q1 at the front.
  for (auto it = mixing.begin(); it != mixing.end();)
  {
    if (std::none_of(it->partners.begin(), it->partners.end(), match))
    {
      ++it;
      continue;
    }
    ++removed;
    std::vector<QueuedPacket> rest;
    for (auto& p : it->partners)
    {
      if (!match(p))
      {
        rest.push_back(std::move(p));
      }
    }
    it = mixing.erase(it);
    for (auto r = rest.rbegin(); r != rest.rend(); ++r)
    {
      if (r->origin == QueueOrigin::intended)
      {
        q1.push_front(std::move(*r));
      }
      else
      {
        q2.push_front(std::move(*r));
      }
    }
  }
  return removed;
}

/*------------------------------------------------------------------------------------------------*/

SwitchState::SwitchState(SwitchConfig config)
  : config_{config}
{
  if (!(config_.alpha > 1.0))
  {
    throw ConfigError{"params.alpha", "must exceed 1"};
  }
  if (!(config_.ewma_weight > 0.0 && config_.ewma_weight <= 1.0))
  {
    throw ConfigError{"params.ewma_weight", "must lie in (0, 1]"};
  }
}

bool
SwitchState::recoding_active(const FlowId& f)
const
{
  const auto it = flows_.find(f);
  return it != flows_.end() && it->second.recoding;
}

unsigned
SwitchState::nack_count(const FlowId& f)
const
{
  const auto it = flows_.find(f);
  return it == flows_.end() ? 0 : it->second.nacks;
}

std::optional<double>
SwitchState::miat(const FlowId& f)
const
{
  const auto it = flows_.find(f);
  return it == flows_.end() ? std::nullopt : it->second.miat;
}

std::optional<double>
SwitchState::timer_deadline(const FlowId& f)
const
{
  const auto it = flows_.find(f);
  return it == flows_.end() ? std::nullopt : it->second.deadline;
}

bool
SwitchState::on_nack(const FlowId& suspect_flow)
{
  auto& s = flows_[suspect_flow];
  ++s.nacks;
  if (!s.recoding && s.nacks > config_.nack_threshold)
  {
    s.recoding = true;
    return true;
  }
  return false;
}

void
SwitchState::reset_all()
{
  for (auto& [_, s] : flows_)
  {
    s.nacks = 0;
    s.recoding = false;
  }
}

std::optional<double>
SwitchState::on_packet_arrival(const FlowId& f, double now)
{
  if (heard_.insert(f).second)
  {
    reset_all();
  }
  auto& s = flows_[f];
  if (s.last_arrival)
  {
    const auto gap = now - *s.last_arrival;
    s.miat = s.miat ? (1.0 - config_.ewma_weight) * *s.miat + config_.ewma_weight * gap : gap;
  }
  else if (config_.initial_miat > 0.0)
  {
    s.miat = config_.initial_miat;
  }
  s.last_arrival = now;
  if (s.miat && *s.miat > 0.0)
  {
    s.deadline = now + config_.alpha * *s.miat;
  }
  return s.deadline;
}

bool
SwitchState::on_timer(const FlowId& f, double now)
{
  const auto it = flows_.find(f);
  if (it == flows_.end() || !it->second.deadline || *it->second.deadline > now)
  {
    return false;
  }
  reset_all();
  heard_.erase(f);
  flows_.erase(it);
  return true;
}

/*------------------------------------------------------------------------------------------------*/

namespace {

bool
in_neighbourhood(NodeId hop, NodeId center, const Topology& topology)
{
  return hop == center || topology.adjacent(hop, center);
}

void
require_distinct(const NativePacket& p1, const NativePacket& p2)
{
  if (p1.next_hop == p2.next_hop)
  {
    throw PreconditionError{"coding pair shares next hop " + to_string(p1.next_hop)};
  }
}

} // namespace

bool
common_conditions_ok(const NativePacket& p1, const NativePacket& p2, const Topology& topology)
{
  require_distinct(p1, p2);
  return in_neighbourhood(p1.next_hop, p2.coding_previous_hop(), topology) &&
         in_neighbourhood(p2.next_hop, p1.coding_previous_hop(), topology);
}

bool
recoding_rule_ok(const NativePacket& p1, const NativePacket& p2, const Topology& topology)
{
  if (!p1.decoded_native)
  {
    throw PreconditionError{"RecodingRule applies to decoded natives only"};
  }
  require_distinct(p1, p2);
  return in_neighbourhood(p1.next_hop, p2.coding_previous_hop(), topology) &&
         p2.next_hop == p1.coding_previous_hop();
}

EncodeDecision
can_encode(const NativePacket& p1, const NativePacket& p2, const SwitchState* switch_state,
           const Topology& topology)
{
  require_distinct(p1, p2);
  // Whether `other`'s next hop can be trusted to hold `self`.
  auto direction = [&](const NativePacket& self, const NativePacket& other, bool& suspect)
  {
    const auto ph = self.coding_previous_hop();
    if (self.decoded_native && switch_state && switch_state->recoding_active(self.id.flow))
    {
      return other.next_hop == ph;
    }
    if (!in_neighbourhood(other.next_hop, ph, topology))
    {
      return false;
    }
    suspect = self.decoded_native && other.next_hop != ph;
    return true;
  };

  EncodeDecision d;
  bool s1 = false;
  bool s2 = false;
  d.ok = direction(p1, p2, s1) && direction(p2, p1, s2);
  if (d.ok)
  {
    d.first_suspect = s1;
    d.second_suspect = s2;
  }
  return d;
}

std::vector<NativePacket>
select_coding_set(const TxQueues& queues, const NativePacket& head, const SwitchState& switch_state,
                  const Topology& topology, const CodingPolicy& policy)
{
  std::vector<NativePacket> set{head};
  const auto* sw = policy.switch_rule ? &switch_state : nullptr;

  auto consider = [&](const NativePacket& candidate)
  {
    if (set.size() >= policy.max_partners || candidate.id == head.id)
    {
      return;
    }
    std::vector<EncodeDecision> decisions;
    for (const auto& member : set)
    {
      if (member.next_hop == candidate.next_hop || member.id == candidate.id)
      {
        return;
      }
      const auto d = can_encode(member, candidate, sw, topology);
      if (!d.ok)
      {
        return;
      }
      decisions.push_back(d);
    }
    for (std::size_t i = 0; i < set.size(); ++i)
    {
      set[i].suspect = set[i].suspect || decisions[i].first_suspect;
    }
    auto added = candidate;
    added.suspect = std::any_of(decisions.begin(), decisions.end(),
                                [](const EncodeDecision& d){ return d.second_suspect; });
    set.push_back(std::move(added));
  };

  for (const auto& q : queues.q1)
  {
    consider(q.packet);
  }
  if (policy.scan_overheard)
  {
    for (const auto& q : queues.q2)
    {
      consider(q.packet);
    }
  }
  return set;
}

} // namespace flexonc
