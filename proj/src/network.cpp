#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "flexonc/sim.hpp"

namespace flexonc {

namespace {

enum class EventKind : std::uint8_t
{
  generate,
  tx_end,
  ack_tx,
  backup_fire,
  sender_timeout,
  channel_release,
  flow_timer,
  core_duty,
  core_wake,
};

struct Event
{
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::generate;
  std::uint32_t node = 0;
  std::uint64_t ref = 0;
  PacketId id;
  AckKind ack = AckKind::ack;
};

struct EventLater
{
  bool operator()(const Event& a, const Event& b) const noexcept
  {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

struct Frame
{
  std::uint64_t id = 0;
  NodeId sender;
  bool coded = false;
  NativePacket native;
  NodeId second_next_hop;
  CodedPacket packet;
  std::size_t bytes = 0;
  double end = 0.0;
  bool intended_acked = false;
  bool backup_fired = false;
  // CORE bookkeeping: ids some forwarder picked up, and whether a routing next hop did.
  std::set<PacketId> progressed;
  bool intended_progress = false;
};

enum class Status { awaiting, acked, nacked };

struct Pending
{
  std::uint64_t frame = 0;
  bool coded = false;
  std::vector<QueuedPacket> partners;
  std::vector<Status> status;
  bool feedback = false;

  bool holds(const PacketId& id) const
  {
    return std::any_of(partners.begin(), partners.end(),
                       [&](const QueuedPacket& q){ return q.packet.id == id; });
  }
};

struct Duty
{
  std::uint64_t frame = 0;
  NativePacket packet;
  NodeId intended;
  NodeId coder;
  unsigned rank = 0;
};

struct CoreDuty
{
  std::uint64_t token = 0;
  NativePacket packet;
};

struct Node
{
  Node(NodeId id, const Topology& topology, const Routes& routes, const SchemeParams& params)
    : id{id}
    , view{id, topology, routes}
    , buffer{params.buffer_retention, params.buffer_capacity}
    , sw{params.switch_rule}
    , acks{params.ack_cache}
  {}

  NodeId id;
  RoutingView view;
  TxQueues queues;
  CodingBuffer buffer;
  SwitchState sw;
  AckCache acks;
  std::optional<Pending> pending;
  std::map<PacketId, Duty> duties;
  std::map<PacketId, CoreDuty> core_duties;
  std::unordered_set<PacketId> core_forwarded;
  std::unordered_set<PacketId> seen;
  std::set<std::pair<PacketId, NodeId>> mac_seen;
  bool requested = false;
  double wake_at = -1.0;
};

struct PacketState
{
  double birth = 0.0;
  bool delivered = false;
  bool loss = false;
};

/*------------------------------------------------------------------------------------------------*/

class Engine
{
public:
  explicit Engine(const RunConfig& config);
  MetricsRecord run();

private:
  // Scheduling.
  void at(double time, EventKind kind, std::uint32_t node, std::uint64_t ref = 0,
          PacketId id = {}, AckKind ack = AckKind::ack);
  void trace(const Event& e);
  void dispatch(const Event& e);

  // Channel access.
  void request(Node& n);
  void try_grant();
  bool has_work(Node& n);
  bool compose(Node& n);
  bool compose_core(Node& n);
  void transmit(Node& n, Frame frame, std::vector<QueuedPacket> partners);
  void release_channel();

  // Handlers.
  void on_generate(std::size_t flow);
  void on_tx_end(std::uint64_t frame_id);
  void on_sender_timeout(Node& n, std::uint64_t frame_id);
  void on_backup_fire(Node& n, const PacketId& id, std::uint64_t frame_id);
  void on_flow_timer(Node& n, std::size_t flow);
  void on_core_duty(Node& n, const PacketId& id, std::uint64_t token);

  void receive_native(Node& n, const Frame& f);
  void receive_coded(Node& n, Frame& f);
  void receive_core(Node& n, Frame& f);
  void send_ack(Node& n, std::uint64_t frame_id, const PacketId& id, AckKind kind);
  void hear_ack(Node& n, const Acknowledgment& ack, std::uint64_t frame_id);

  // Packet bookkeeping.
  void note_arrival(Node& n, const PacketId& id);
  void accept(Node& n, NativePacket p, NodeId transmitter, bool front);
  void deliver(const PacketId& id);
  bool enqueue(Node& n, QueuedPacket q, bool front);
  void drop_on_ack(Node& n, const PacketId& id, NodeId ack_sender);
  void drop_on_overhear(Node& n, const PacketId& id, NodeId next_hop);
  void expire_overheard(Node& n);
  void lose(const PacketId& id) { packets_.at(id).loss = true; }
  void retry_or_drop(Node& n, QueuedPacket q);
  bool held(const PacketId& id) const;
  bool any_recoding(const Node& n) const;
  std::size_t flow_index(const FlowId& f) const { return flow_index_.at(f); }
  unsigned distance(NodeId from, NodeId dest) const { return dist_.at(dest)[from.index]; }

  const RunConfig& cfg_;
  Routes routes_;
  std::vector<Node> nodes_;
  std::map<FlowId, std::size_t> flow_index_;
  std::vector<std::uint64_t> next_seq_;
  std::map<NodeId, std::vector<unsigned>> dist_;
  LossStreams rng_;
  std::unordered_map<PacketId, PacketState> packets_;
  std::vector<PacketId> generated_;
  std::map<std::uint64_t, Frame> frames_;

  std::priority_queue<Event, std::vector<Event>, EventLater> events_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  std::uint64_t hash_ = 0xcbf29ce484222325ull;

  std::set<std::pair<double, std::uint32_t>> requests_;
  bool channel_busy_ = false;
  std::uint64_t next_frame_ = 1;
  std::uint64_t next_token_ = 1;

  bool acked_;
  bool coding_;
  bool helpers_;
  bool backups_;
  bool switch_rule_;
  bool core_;

  MetricsRecord m_;
};

Engine::Engine(const RunConfig& config)
  : cfg_{config}
  , routes_{config.routes()}
  , rng_{config.seed, config.topology.size()}
{
  const auto s = cfg_.scheme;
  core_ = s == SchemeKind::core;
  acked_ = !core_;
  coding_ = s != SchemeKind::noncoding;
  helpers_ = s == SchemeKind::bend || s == SchemeKind::flexonc || s == SchemeKind::flexonc_sr;
  backups_ = s == SchemeKind::flexonc || s == SchemeKind::flexonc_sr;
  switch_rule_ = s == SchemeKind::flexonc_sr;

  for (auto n : cfg_.topology.nodes())
  {
    nodes_.emplace_back(n, cfg_.topology, routes_, cfg_.params);
  }
  m_.scenario = cfg_.scenario;
  m_.scheme = s;
  m_.seed = cfg_.seed;
  m_.duration = cfg_.duration;
  m_.nodes.assign(nodes_.size(), {});
  for (std::size_t i = 0; i < cfg_.flows.size(); ++i)
  {
    const auto& f = cfg_.flows[i];
    flow_index_[f.flow] = i;
    FlowMetrics fm;
    fm.flow = f.flow;
    fm.payload_bytes = f.payload;
    fm.active_duration = f.duration;
    m_.flows.push_back(fm);
    if (!dist_.contains(f.flow.destination))
    {
      dist_[f.flow.destination] = hop_distances(cfg_.topology, f.flow.destination);
    }
  }
  next_seq_.assign(cfg_.flows.size(), 0);
}

/*------------------------------------------------------------------------------------------------*/

void
Engine::at(double time, EventKind kind, std::uint32_t node, std::uint64_t ref, PacketId id,
           AckKind ack)
{
  if (time < now_)
  {
    throw std::logic_error{"event scheduled into the past"};
  }
  events_.push({time, seq_++, kind, node, ref, id, ack});
}

void
Engine::trace(const Event& e)
{
  auto mix = [this](std::uint64_t v)
  {
    for (int i = 0; i < 8; ++i)
    {
      hash_ ^= (v >> (8 * i)) & 0xffu;
      hash_ *= 0x100000001b3ull;
    }
  };
  mix(std::bit_cast<std::uint64_t>(e.time));
  mix(static_cast<std::uint64_t>(e.kind));
  mix(e.node);
  mix(e.ref);
  mix(e.id.sequence);
  mix(e.id.flow.source.index);
}

MetricsRecord
Engine::run()
{
  for (std::size_t i = 0; i < cfg_.flows.size(); ++i)
  {
    const auto& f = cfg_.flows[i];
    const auto t = f.start + 1e-3 * static_cast<double>(i);
    if (f.duration > 0.0 && t <= cfg_.duration)
    {
      at(t, EventKind::generate, f.flow.source.index, i);
    }
  }
  while (!events_.empty() && events_.top().time <= cfg_.duration)
  {
    const auto e = events_.top();
    events_.pop();
    now_ = e.time;
    ++m_.events;
    trace(e);
    dispatch(e);
  }

  for (const auto& id : generated_)
  {
    const auto& st = packets_.at(id);
    if (st.delivered)
    {
      continue;
    }
    auto& fm = m_.flows[flow_index(id.flow)];
    if (held(id))
    {
      ++fm.in_flight;
    }
    else if (st.loss)
    {
      ++fm.dropped;
    }
    else
    {
      ++m_.vanished;
    }
  }
  m_.trace_hash = hash_;
  return std::move(m_);
}

void
Engine::dispatch(const Event& e)
{
  auto& n = nodes_[e.node];
  switch (e.kind)
  {
    case EventKind::generate:        on_generate(e.ref); break;
    case EventKind::tx_end:          on_tx_end(e.ref); break;
    case EventKind::ack_tx:          send_ack(n, e.ref, e.id, e.ack); break;
    case EventKind::backup_fire:     on_backup_fire(n, e.id, e.ref); break;
    case EventKind::sender_timeout:  on_sender_timeout(n, e.ref); break;
    case EventKind::channel_release: release_channel(); break;
    case EventKind::flow_timer:      on_flow_timer(n, e.ref); break;
    case EventKind::core_duty:       on_core_duty(n, e.id, e.ref); break;
    case EventKind::core_wake:
      n.wake_at = -1.0;
      request(n);
      break;
  }
}

/*------------------------------------------------------------------------------------------------*/

void
Engine::request(Node& n)
{
  if (n.requested || n.pending || !has_work(n))
  {
    return;
  }
  n.requested = true;
  requests_.emplace(now_, n.id.index);
  try_grant();
}

void
Engine::try_grant()
{
  while (!channel_busy_ && !requests_.empty())
  {
    const auto [_, idx] = *requests_.begin();
    requests_.erase(requests_.begin());
    auto& n = nodes_[idx];
    n.requested = false;
    if (core_ ? compose_core(n) : compose(n))
    {
      return;
    }
  }
}

void
Engine::release_channel()
{
  channel_busy_ = false;
  try_grant();
}

void
Engine::expire_overheard(Node& n)
{
  const auto limit = now_ - cfg_.params.buffer_retention;
  std::erase_if(n.queues.q2, [&](const QueuedPacket& q){ return q.enqueued_at < limit; });
}

bool
Engine::has_work(Node& n)
{
  if (!n.queues.mixing.empty() || !n.queues.q1.empty())
  {
    return true;
  }
  if (!helpers_)
  {
    return false;
  }
  expire_overheard(n);
  for (const auto& q : n.queues.q2)
  {
    const auto set = select_coding_set(n.queues, q.packet, n.sw, cfg_.topology,
                                       {true, switch_rule_, max_coding_partners});
    if (set.size() >= 2)
    {
      return true;
    }
  }
  return false;
}

bool
Engine::compose(Node& n)
{
  auto& qs = n.queues;
  Frame f;
  f.sender = n.id;
  std::vector<QueuedPacket> partners;

  if (!qs.mixing.empty())
  {
    auto retry = std::move(qs.mixing.front());
    qs.mixing.pop_front();
    f.coded = true;
    f.packet = std::move(retry.frame);
    partners = std::move(retry.partners);
    transmit(n, std::move(f), std::move(partners));
    return true;
  }

  expire_overheard(n);
  const CodingPolicy policy{helpers_, switch_rule_, max_coding_partners};
  std::vector<NativePacket> set;
  if (!qs.q1.empty())
  {
    set = coding_ ? select_coding_set(qs, qs.q1.front().packet, n.sw, cfg_.topology, policy)
                  : std::vector<NativePacket>{qs.q1.front().packet};
  }
  else if (helpers_)
  {
    for (const auto& q : qs.q2)
    {
      auto candidate = select_coding_set(qs, q.packet, n.sw, cfg_.topology, policy);
      if (candidate.size() >= 2)
      {
        set = std::move(candidate);
        break;
      }
    }
  }
  if (set.empty())
  {
    return false;
  }

  // Pull the selected packets out of their queues, keeping attempt counts.
  for (const auto& p : set)
  {
    auto take = [&](std::deque<QueuedPacket>& q)
    {
      const auto it = std::find_if(q.begin(), q.end(),
                                   [&](const QueuedPacket& e){ return e.packet.id == p.id; });
      if (it == q.end())
      {
        return false;
      }
      partners.push_back(std::move(*it));
      partners.back().packet.suspect = p.suspect;
      q.erase(it);
      return true;
    };
    if (!take(qs.q1))
    {
      take(qs.q2);
    }
  }

  if (set.size() >= 2)
  {
    f.coded = true;
    std::vector<NativePacket> natives;
    for (const auto& q : partners)
    {
      natives.push_back(q.packet);
    }
    f.packet = build_coded_frame(n.id, natives, n.view, backups_);
  }
  else
  {
    f.native = partners.front().packet;
    const auto dest = f.native.id.flow.destination;
    if (cfg_.scheme == SchemeKind::bend && f.native.next_hop != dest)
    {
      f.second_next_hop = second_next_hop(n.view, f.native.next_hop, dest);
    }
  }
  transmit(n, std::move(f), std::move(partners));
  return true;
}

bool
Engine::compose_core(Node& n)
{
  auto& q1 = n.queues.q1;
  if (q1.empty())
  {
    return false;
  }
  const auto depth = std::min<std::size_t>(cfg_.params.core.scan_depth, q1.size());
  TxQueues window;
  window.q1.assign(q1.begin(), q1.begin() + static_cast<std::ptrdiff_t>(depth));
  std::vector<NativePacket> best;
  for (std::size_t i = 0; i < depth; ++i)
  {
    auto set = select_coding_set(window, window.q1[i].packet, n.sw, cfg_.topology,
                                 {false, false, max_coding_partners});
    if (set.size() >= 2 && set.size() > best.size())
    {
      best = std::move(set);
    }
  }

  Frame f;
  f.sender = n.id;
  std::vector<QueuedPacket> partners;
  if (best.empty())
  {
    const auto due = q1.front().enqueued_at + cfg_.params.core.native_delay;
    if (now_ < due)
    {
      if (n.wake_at != due)
      {
        n.wake_at = due;
        at(due, EventKind::core_wake, n.id.index);
      }
      return false;
    }
    partners.push_back(std::move(q1.front()));
    q1.pop_front();
    f.native = partners.front().packet;
  }
  else
  {
    for (const auto& p : best)
    {
      const auto it = std::find_if(q1.begin(), q1.end(),
                                   [&](const QueuedPacket& e){ return e.packet.id == p.id; });
      partners.push_back(std::move(*it));
      q1.erase(it);
    }
    std::vector<NativePacket> natives;
    for (const auto& q : partners)
    {
      natives.push_back(q.packet);
    }
    f.coded = true;
    f.packet = build_coded_frame(n.id, natives, n.view, false);
  }
  transmit(n, std::move(f), std::move(partners));
  return true;
}

void
Engine::transmit(Node& n, Frame f, std::vector<QueuedPacket> partners)
{
  f.id = next_frame_++;
  const auto& ch = cfg_.channel;
  const auto payload = f.coded ? coded_frame_bytes(ch, cfg_.scheme, f.packet)
                               : native_frame_bytes(ch, cfg_.scheme, f.native.payload_bytes);
  f.bytes = payload + ch.frame_overhead;

  auto& nm = m_.nodes[n.id.index];
  ++nm.transmissions;
  for (const auto& q : partners)
  {
    if (q.attempts > 0)
    {
      ++m_.flows[flow_index(q.packet.id.flow)].retransmissions;
    }
    n.buffer.add_native(q.packet, now_);
    if (core_)
    {
      n.core_forwarded.insert(q.packet.id);
    }
  }
  if (f.coded)
  {
    ++nm.coding_opportunities;
    nm.coded_partners += partners.size();
    m_.opportunities.push_back({n.id, now_, static_cast<unsigned>(partners.size())});
  }
  if (acked_)
  {
    Pending p;
    p.frame = f.id;
    p.coded = f.coded;
    p.status.assign(partners.size(), Status::awaiting);
    p.partners = std::move(partners);
    n.pending = std::move(p);
  }

  channel_busy_ = true;
  const auto end = now_ + ch.access_delay + airtime(ch, payload);
  at(end, EventKind::tx_end, n.id.index, f.id);
  frames_.emplace(f.id, std::move(f));
}

/*------------------------------------------------------------------------------------------------*/

void
Engine::on_generate(std::size_t i)
{
  const auto& src = cfg_.flows[i];
  auto& n = nodes_[src.flow.source.index];
  NativePacket p;
  p.id = {src.flow, next_seq_[i]++};
  p.previous_hop = no_node;
  p.next_hop = routes_[n.id.index].next_hop(src.flow.destination);
  p.payload_bytes = src.payload;
  p.birth_time = now_;
  packets_[p.id] = {now_, false, false};
  generated_.push_back(p.id);
  ++m_.flows[i].generated;

  note_arrival(n, p.id);
  n.buffer.add_native(p, now_);
  n.mac_seen.emplace(p.id, n.id);
  enqueue(n, {p, 0, now_, QueueOrigin::intended}, false);
  request(n);

  const auto first = src.start + 1e-3 * static_cast<double>(i);
  const auto next = first + src.inter_arrival * static_cast<double>(next_seq_[i]);
  if (next < first + src.duration)
  {
    at(next, EventKind::generate, n.id.index, i);
  }
}

bool
Engine::enqueue(Node& n, QueuedPacket q, bool front)
{
  auto& q1 = n.queues.q1;
  if (front)
  {
    q1.push_front(std::move(q));
    return true;
  }
  if (q1.size() >= cfg_.params.queue_capacity)
  {
    lose(q.packet.id);
    return false;
  }
  q1.push_back(std::move(q));
  return true;
}

void
Engine::note_arrival(Node& n, const PacketId& id)
{
  if (!n.seen.insert(id).second || !switch_rule_)
  {
    return;
  }
  const bool was_active = any_recoding(n);
  const auto deadline = n.sw.on_packet_arrival(id.flow, now_);
  if (was_active && !any_recoding(n))
  {
    m_.switches.push_back({n.id, id.flow, now_, false});
  }
  if (deadline)
  {
    at(*deadline, EventKind::flow_timer, n.id.index, flow_index(id.flow));
  }
}

bool
Engine::any_recoding(const Node& n)
const
{
  return std::any_of(cfg_.flows.begin(), cfg_.flows.end(),
                     [&](const CbrSource& f){ return n.sw.recoding_active(f.flow); });
}

void
Engine::on_flow_timer(Node& n, std::size_t flow)
{
  const bool was_active = any_recoding(n);
  if (n.sw.on_timer(cfg_.flows[flow].flow, now_) && was_active)
  {
    m_.switches.push_back({n.id, cfg_.flows[flow].flow, now_, false});
  }
}

void
Engine::deliver(const PacketId& id)
{
  auto& st = packets_.at(id);
  auto& fm = m_.flows[flow_index(id.flow)];
  if (st.delivered)
  {
    ++fm.duplicates;
    return;
  }
  st.delivered = true;
  ++fm.delivered;
  fm.delay_sum += now_ - st.birth;
}

void
Engine::accept(Node& n, NativePacket p, NodeId transmitter, bool front)
{
  if (!n.mac_seen.emplace(p.id, transmitter).second)
  {
    return;
  }
  const auto dest = p.id.flow.destination;
  if (n.id == dest)
  {
    deliver(p.id);
    return;
  }
  const auto next = routes_[n.id.index].next_hop(dest);
  if (n.acks.contains(p.id, next) || (n.pending && n.pending->holds(p.id)))
  {
    return;
  }
  const bool overheard_copy = std::any_of(n.queues.q2.begin(), n.queues.q2.end(),
                                          [&](const QueuedPacket& q){ return q.packet.id == p.id; });
  if (n.queues.contains(p.id) && !overheard_copy)
  {
    return;
  }
  if (overheard_copy)
  {
    std::erase_if(n.queues.q2, [&](const QueuedPacket& q){ return q.packet.id == p.id; });
  }
  p.previous_hop = transmitter;
  p.next_hop = next;
  p.suspect = false;
  enqueue(n, {p, 0, now_, QueueOrigin::intended}, front);
  request(n);
}

/*------------------------------------------------------------------------------------------------*/

void
Engine::on_tx_end(std::uint64_t frame_id)
{
  auto& f = frames_.at(frame_id);
  f.end = now_;
  auto& sender = nodes_[f.sender.index];
  const auto receptions = broadcast(cfg_.topology, cfg_.channel, f.sender, f.id, f.bytes, rng_);
  for (const auto& r : receptions)
  {
    if (!r.delivered)
    {
      continue;
    }
    auto& n = nodes_[r.receiver.index];
    if (core_)
    {
      receive_core(n, f);
    }
    else if (f.coded)
    {
      receive_coded(n, f);
    }
    else
    {
      receive_native(n, f);
    }
  }

  const auto& ch = cfg_.channel;
  if (acked_)
  {
    const auto partners = f.coded ? f.packet.header.partner_count() : 1;
    const auto eligible = f.coded && backups_ ? f.packet.header.eligible_nodes().size() : 0;
    at(now_ + sender_window(ch, partners, eligible), EventKind::sender_timeout, sender.id.index,
       f.id);
    return;
  }

  // CORE: no feedback. A packet no forwarder picked up is lost in the air.
  std::vector<PacketId> ids;
  if (f.coded)
  {
    for (const auto& p : f.packet.header.partners)
    {
      ids.push_back(p.id);
    }
    ++m_.fate.sent;
    if (f.intended_progress)
    {
      ++m_.fate.by_intended;
    }
    else if (!f.progressed.empty())
    {
      ++m_.fate.by_backup_only;
    }
    else
    {
      ++m_.fate.timed_out_unheard;
    }
  }
  else
  {
    ids.push_back(f.native.id);
  }
  for (const auto& id : ids)
  {
    if (!f.progressed.contains(id))
    {
      lose(id);
    }
  }
  frames_.erase(frame_id);
  at(now_ + ch.guard, EventKind::channel_release, sender.id.index);
  request(sender);
}

void
Engine::drop_on_overhear(Node& n, const PacketId& id, NodeId next_hop)
{
  // Only overheard copies; a custodial copy leaves the node on an ACK.
  if (n.id != next_hop)
  {
    std::erase_if(n.queues.q2, [&](const QueuedPacket& q)
                  { return q.packet.id == id && q.packet.next_hop == next_hop; });
  }
}

void
Engine::receive_native(Node& n, const Frame& f)
{
  auto p = f.native;
  p.previous_hop = f.sender;
  note_arrival(n, p.id);
  n.buffer.add_native(p, now_);
  drop_on_overhear(n, p.id, p.next_hop);

  const auto& ch = cfg_.channel;
  if (n.id == p.next_hop)
  {
    at(f.end + ack_slot_offset(ch, 1) + airtime(ch, ch.ack_bytes), EventKind::ack_tx,
       n.id.index, f.id, p.id, AckKind::ack);
    accept(n, p, f.sender, false);
    return;
  }
  if (!helpers_ || !cfg_.topology.adjacent(n.id, p.next_hop))
  {
    return;
  }
  // BEND reads the second next hop from the header; FlexONC looks it up in the next hop's table.
  auto snh = f.second_next_hop;
  if (cfg_.scheme != SchemeKind::bend && p.next_hop != p.id.flow.destination)
  {
    snh = second_next_hop(n.view, p.next_hop, p.id.flow.destination);
  }
  if (!snh.valid() || n.id == snh || !cfg_.topology.adjacent(n.id, snh))
  {
    return;
  }
  if (n.queues.contains(p.id) || (n.pending && n.pending->holds(p.id)) || n.acks.contains(p.id, snh))
  {
    return;
  }
  if (n.queues.q2.size() >= cfg_.params.queue_capacity)
  {
    return;
  }
  p.next_hop = snh;
  n.queues.q2.push_back({p, 0, now_, QueueOrigin::overheard});
  request(n);
}

void
Engine::receive_coded(Node& n, Frame& f)
{
  const auto& c = f.packet;
  const auto k = c.header.next_hop_position(n.id);
  if (cfg_.scheme == SchemeKind::bend && !k)
  {
    return;
  }
  for (const auto& p : c.header.partners)
  {
    note_arrival(n, p.id);
  }
  const auto known = n.buffer.known(now_);
  const auto decoded = xor_decode(c, known);
  n.buffer.add_coded(c, now_);
  auto obtainable = [&](const PacketId& id){ return known.contains(id) || decoded == id; };
  for (const auto& p : c.natives)
  {
    if (obtainable(p.id))
    {
      auto copy = p;
      copy.previous_hop = f.sender;
      n.buffer.add_native(copy, now_);
    }
  }
  for (const auto& p : c.header.partners)
  {
    drop_on_overhear(n, p.id, p.next_hop);
  }

  const auto& ch = cfg_.channel;
  auto decoded_copy = [&](std::size_t i)
  {
    auto p = c.natives[i];
    p.previous_hop = f.sender;
    p.decoded_native = true;
    p.origin_coded_previous_hop = f.sender;
    p.suspect = false;
    return p;
  };

  if (k)
  {
    const auto& x = c.natives[*k];
    const auto t = f.end + ack_slot_offset(ch, *k + 1) + airtime(ch, ch.ack_bytes);
    if (obtainable(x.id))
    {
      at(t, EventKind::ack_tx, n.id.index, f.id, x.id, AckKind::ack);
      accept(n, decoded_copy(*k), f.sender, false);
    }
    else
    {
      at(t, EventKind::ack_tx, n.id.index, f.id, x.id, AckKind::nack);
      ++m_.nodes[n.id.index].decoding_failures;
      m_.failures.push_back({n.id, f.sender, now_, x.suspect});
    }
    return;
  }

  if (!backups_ || !c.header.is_eligible(n.id))
  {
    return;
  }
  const auto& topo = cfg_.topology;
  for (std::size_t i = 0; i < c.natives.size(); ++i)
  {
    const auto& part = c.header.partners[i];
    const auto dest = part.id.flow.destination;
    if (part.next_hop == dest || !topo.adjacent(n.id, part.next_hop) || !obtainable(part.id))
    {
      continue;
    }
    const auto snh = second_next_hop(n.view, part.next_hop, dest);
    if (!topo.adjacent(n.id, snh) || n.duties.contains(part.id) ||
        n.acks.contains(part.id, part.next_hop) || n.acks.contains(part.id, snh) ||
        n.acks.contains(part.id, dest))
    {
      continue;
    }
    Duty d;
    d.frame = f.id;
    d.packet = decoded_copy(i);
    d.packet.next_hop = snh;
    d.intended = part.next_hop;
    d.coder = f.sender;
    d.rank = rank_of(n.id, c.header, part.id);
    const auto slot = c.header.partner_count() + d.rank - 1;
    at(f.end + ack_slot_offset(ch, slot) + airtime(ch, ch.ack_bytes), EventKind::backup_fire,
       n.id.index, f.id, part.id);
    n.duties.emplace(part.id, std::move(d));
    break;
  }
}

void
Engine::on_backup_fire(Node& n, const PacketId& id, std::uint64_t frame_id)
{
  const auto it = n.duties.find(id);
  if (it == n.duties.end() || it->second.frame != frame_id)
  {
    return;
  }
  auto d = std::move(it->second);
  n.duties.erase(it);
  if (const auto f = frames_.find(frame_id); f != frames_.end())
  {
    f->second.backup_fired = true;
  }
  ++m_.nodes[n.id.index].backup_firings;
  send_ack(n, frame_id, id, AckKind::ack);

  if (!n.mac_seen.emplace(id, d.coder).second)
  {
    return;
  }
  if (n.id == id.flow.destination)
  {
    deliver(id);
    return;
  }
  n.queues.erase(id);
  enqueue(n, {d.packet, 0, now_, QueueOrigin::intended}, true);
  request(n);
}

void
Engine::send_ack(Node& n, std::uint64_t frame_id, const PacketId& id, AckKind kind)
{
  auto& nm = m_.nodes[n.id.index];
  if (kind == AckKind::ack)
  {
    ++nm.acks_sent;
    if (const auto f = frames_.find(frame_id); f != frames_.end())
    {
      const auto& fr = f->second;
      const bool intended = fr.coded ? fr.packet.header.next_hop_position(n.id).has_value()
                                     : fr.native.next_hop == n.id;
      if (intended)
      {
        f->second.intended_acked = true;
      }
    }
  }
  else
  {
    ++nm.nacks_sent;
  }
  const auto& ch = cfg_.channel;
  const auto p = ch.ack_loss ? frame_success_probability(ch, ch.ack_bytes + ch.frame_overhead) : 1.0;
  for (auto r : cfg_.topology.neighbors(n.id))
  {
    if (!rng_.draw(r, p))
    {
      ++m_.lost_ack_events;
      continue;
    }
    hear_ack(nodes_[r.index], {kind, n.id, id}, frame_id);
  }
}

void
Engine::hear_ack(Node& n, const Acknowledgment& ack, std::uint64_t frame_id)
{
  const auto& id = ack.acked;
  if (ack.kind == AckKind::nack)
  {
    if (!n.pending || n.pending->frame != frame_id)
    {
      return;
    }
    auto& pd = *n.pending;
    for (std::size_t i = 0; i < pd.partners.size(); ++i)
    {
      const auto& x = pd.partners[i].packet;
      if (x.id != id || x.next_hop != ack.sender)
      {
        continue;
      }
      pd.feedback = true;
      if (pd.status[i] == Status::awaiting)
      {
        pd.status[i] = Status::nacked;
      }
      ++m_.flows[flow_index(id.flow)].nacks_received;
      if (switch_rule_ && pd.coded)
      {
        for (const auto& y : pd.partners)
        {
          if (y.packet.id != id && y.packet.suspect && n.sw.on_nack(y.packet.id.flow))
          {
            m_.switches.push_back({n.id, y.packet.id.flow, now_, true});
          }
        }
      }
    }
    return;
  }

  n.acks.add(id, ack.sender);

  if (const auto it = n.duties.find(id); it != n.duties.end())
  {
    const auto f = frames_.find(it->second.frame);
    unsigned sender_rank = 0;
    if (f != frames_.end())
    {
      const auto& header = f->second.packet.header;
      if (ack.sender == it->second.intended)
      {
        sender_rank = 1;
      }
      else if (header.is_eligible(ack.sender))
      {
        sender_rank = rank_of(ack.sender, header, id);
      }
    }
    if (sender_rank < it->second.rank)
    {
      n.duties.erase(it);
    }
  }

  if (n.pending)
  {
    auto& pd = *n.pending;
    const auto f = frames_.find(pd.frame);
    for (std::size_t i = 0; i < pd.partners.size(); ++i)
    {
      const auto& x = pd.partners[i].packet;
      if (x.id != id)
      {
        continue;
      }
      const bool backup = pd.coded && f != frames_.end() &&
                          f->second.packet.header.is_eligible(ack.sender);
      if (ack.sender == x.next_hop || ack.sender == id.flow.destination || backup)
      {
        pd.status[i] = Status::acked;
        pd.feedback = true;
      }
    }
  }
  drop_on_ack(n, id, ack.sender);
}

void
Engine::drop_on_ack(Node& n, const PacketId& id, NodeId ack_sender)
{
  const QueuedPacket* copy = nullptr;
  for (const auto* q : {&n.queues.q1, &n.queues.q2})
  {
    for (const auto& e : *q)
    {
      if (e.packet.id == id)
      {
        copy = &e;
      }
    }
  }
  for (const auto& r : n.queues.mixing)
  {
    for (const auto& e : r.partners)
    {
      if (e.packet.id == id)
      {
        copy = &e;
      }
    }
  }
  if (!copy)
  {
    return;
  }
  const auto nh = copy->packet.next_hop;
  const auto dest = id.flow.destination;
  bool drop = ack_sender == nh || ack_sender == dest;
  if (!drop && helpers_ && nh != dest && ack_sender != n.id)
  {
    drop = eligible_forwarders(n.view, n.id, nh, dest).contains(ack_sender);
  }
  if (drop)
  {
    n.queues.erase(id);
  }
}

void
Engine::on_sender_timeout(Node& n, std::uint64_t frame_id)
{
  auto pd = std::move(*n.pending);
  n.pending.reset();
  const auto fit = frames_.find(frame_id);
  if (pd.coded && fit != frames_.end())
  {
    const auto& f = fit->second;
    ++m_.fate.sent;
    if (f.intended_acked)
    {
      ++m_.fate.by_intended;
    }
    else if (f.backup_fired)
    {
      ++m_.fate.by_backup_only;
    }
    else
    {
      ++m_.fate.timed_out_unheard;
    }
  }

  const auto max = cfg_.params.max_retries;
  if (!pd.coded)
  {
    if (pd.status.front() != Status::acked)
    {
      retry_or_drop(n, std::move(pd.partners.front()));
    }
  }
  else if (!pd.feedback)
  {
    bool exhausted = false;
    for (auto& q : pd.partners)
    {
      exhausted = ++q.attempts > max || exhausted;
    }
    if (exhausted)
    {
      for (const auto& q : pd.partners)
      {
        lose(q.packet.id);
      }
    }
    else
    {
      n.queues.mixing.push_back({std::move(fit->second.packet), std::move(pd.partners)});
    }
  }
  else
  {
    for (std::size_t i = pd.partners.size(); i-- > 0;)
    {
      if (pd.status[i] != Status::acked)
      {
        retry_or_drop(n, std::move(pd.partners[i]));
      }
    }
  }

  if (fit != frames_.end())
  {
    frames_.erase(fit);
  }
  channel_busy_ = false;
  request(n);
  try_grant();
}

void
Engine::retry_or_drop(Node& n, QueuedPacket q)
{
  if (++q.attempts > cfg_.params.max_retries)
  {
    lose(q.packet.id);
    return;
  }
  if (q.origin == QueueOrigin::overheard)
  {
    n.queues.q2.push_front(std::move(q));
  }
  else
  {
    n.queues.q1.push_front(std::move(q));
  }
}

/*------------------------------------------------------------------------------------------------*/

void
Engine::receive_core(Node& n, Frame& f)
{
  std::vector<NativePacket> fresh;
  if (f.coded)
  {
    const auto& c = f.packet;
    for (const auto& p : c.header.partners)
    {
      note_arrival(n, p.id);
    }
    const auto known = n.buffer.known(now_);
    const auto decoded = xor_decode(c, known);
    n.buffer.add_coded(c, now_);
    for (const auto& p : c.natives)
    {
      if (known.contains(p.id) || decoded == p.id)
      {
        fresh.push_back(p);
      }
    }
  }
  else
  {
    note_arrival(n, f.native.id);
    fresh.push_back(f.native);
  }

  for (auto p : fresh)
  {
    p.previous_hop = f.sender;
    n.buffer.add_native(p, now_);
    const auto dest = p.id.flow.destination;
    const auto mine = distance(n.id, dest);
    const auto theirs = distance(f.sender, dest);
    if (mine >= theirs)
    {
      // Another forwarder at least as close already sent it.
      n.core_duties.erase(p.id);
      std::erase_if(n.queues.q1, [&](const QueuedPacket& q){ return q.packet.id == p.id; });
      continue;
    }
    f.progressed.insert(p.id);
    if (n.id == p.next_hop)
    {
      f.intended_progress = true;
    }
    if (n.id == dest)
    {
      deliver(p.id);
      continue;
    }
    if (n.core_forwarded.contains(p.id) || n.core_duties.contains(p.id) ||
        n.queues.contains(p.id))
    {
      continue;
    }
    p.next_hop = routes_[n.id.index].next_hop(dest);
    p.decoded_native = f.coded;
    p.origin_coded_previous_hop = f.coded ? std::optional<NodeId>{f.sender} : std::nullopt;
    p.suspect = false;

    const auto& core = cfg_.params.core;
    unsigned score = 0;
    const auto depth = std::min<std::size_t>(core.scan_depth, n.queues.q1.size());
    for (std::size_t i = 0; i < depth; ++i)
    {
      const auto& q = n.queues.q1[i].packet;
      if (q.next_hop != p.next_hop && can_encode(p, q, nullptr, cfg_.topology).ok)
      {
        ++score;
      }
    }
    const auto missing = static_cast<double>(core.scan_depth - std::min(score, core.scan_depth));
    const auto delay = core.timer_slot * (1.0 + core.gain_weight * missing) +
                       1e-6 * static_cast<double>(n.id.index);
    const auto token = next_token_++;
    n.core_duties[p.id] = {token, p};
    at(now_ + delay, EventKind::core_duty, n.id.index, token, p.id);
  }
}

void
Engine::on_core_duty(Node& n, const PacketId& id, std::uint64_t token)
{
  const auto it = n.core_duties.find(id);
  if (it == n.core_duties.end() || it->second.token != token)
  {
    return;
  }
  auto p = std::move(it->second.packet);
  n.core_duties.erase(it);
  enqueue(n, {p, 0, now_, QueueOrigin::intended}, false);
  request(n);
}

bool
Engine::held(const PacketId& id)
const
{
  for (const auto& n : nodes_)
  {
    if (n.queues.contains(id) || n.duties.contains(id) || n.core_duties.contains(id) ||
        (n.pending && n.pending->holds(id)))
    {
      return true;
    }
  }
  return std::any_of(frames_.begin(), frames_.end(), [&](const auto& entry)
  {
    const auto& f = entry.second;
    return f.coded ? f.packet.payload_ids().contains(id) : f.native.id == id;
  });
}

} // namespace

MetricsRecord
run(const RunConfig& config)
{
  config.validate();
  return Engine{config}.run();
}

} // namespace flexonc
