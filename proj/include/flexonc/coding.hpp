#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "flexonc/topology.hpp"
#include "flexonc/types.hpp"

namespace flexonc {

/*------------------------------------------------------------------------------------------------*/

/// Received and overheard packets, kept long enough to decode later coded frames. Coded entries
/// are stored too, so knowledge of one partner can unlock the others.
class CodingBuffer
{
public:
  CodingBuffer(double retention = 2.0, std::size_t capacity = 200);

  void add_native(const NativePacket& packet, double now);
  void add_coded(const CodedPacket& packet, double now);

  /// Drops entries older than the retention period.
  void evict(double now);

  /// Every native id known directly or by peeling stored coded entries.
  std::set<PacketId> known(double now);
  std::optional<NativePacket> native(const PacketId& id) const;

  std::size_t size() const noexcept { return entries_.size(); }
  double retention() const noexcept { return retention_; }

private:
  struct Entry
  {
    std::vector<PacketId> ids;   // one id for natives
    double time = 0.0;
  };

  void push(Entry e);

  double retention_;
  std::size_t capacity_;
  std::deque<Entry> entries_;
  std::map<PacketId, NativePacket> natives_;
};

/*------------------------------------------------------------------------------------------------*/

enum class QueueOrigin { intended, overheard };

struct QueuedPacket
{
  NativePacket packet;
  unsigned attempts = 0;
  double enqueued_at = 0.0;
  QueueOrigin origin = QueueOrigin::intended;
};

/// Coded frame waiting for an identical retransmission.
struct RetryFrame
{
  CodedPacket frame;
  std::vector<QueuedPacket> partners;
};

struct TxQueues
{
  std::deque<QueuedPacket> q1;        // intended natives, including decoded natives
  std::deque<QueuedPacket> q2;        // overheard natives held for mixing
  std::deque<RetryFrame> mixing;      // coded frames awaiting retransmission

  bool contains(const PacketId& id) const;
  /// Removes every queued copy of `id`; returns how many were removed.
  std::size_t erase(const PacketId& id);
  bool empty() const noexcept { return q1.empty() && q2.empty() && mixing.empty(); }
};

/*------------------------------------------------------------------------------------------------*/

struct SwitchConfig
{
  unsigned nack_threshold = 5;
  double alpha = 3.0;
  double ewma_weight = 0.25;
  /// MIAT seed for a flow's first arrival; zero means bootstrap from the first gap.
  double initial_miat = 0.0;
};

/// Per-node, per-flow toggle between the common coding conditions and RecodingRule.
class SwitchState
{
public:
  explicit SwitchState(SwitchConfig config = {});

  bool recoding_active(const FlowId& f) const;
  unsigned nack_count(const FlowId& f) const;
  std::optional<double> miat(const FlowId& f) const;
  std::optional<double> timer_deadline(const FlowId& f) const;
  const SwitchConfig& config() const noexcept { return config_; }

  /// Counts a NACK against the flow of a suspect partner. Returns true when this NACK switched
  /// the flow to RecodingRule.
  bool on_nack(const FlowId& suspect_flow);

  /// Packet of `f` heard at `now`. An unknown flow resets every flow to the common conditions.
  /// Returns the re-armed timer deadline for `f`, if any.
  std::optional<double> on_packet_arrival(const FlowId& f, double now);

  /// Timer of `f` fired at `now`. Ignored unless it matches the armed deadline. On expiry every
  /// flow reverts to the common conditions and `f` is forgotten. Returns true on expiry.
  bool on_timer(const FlowId& f, double now);

  void reset_all();

private:
  struct FlowState
  {
    unsigned nacks = 0;
    bool recoding = false;
    std::optional<double> miat;
    std::optional<double> last_arrival;
    std::optional<double> deadline;
  };

  SwitchConfig config_;
  std::map<FlowId, FlowState> flows_;
  std::set<FlowId> heard_;
};

/*------------------------------------------------------------------------------------------------*/

/// NH(p1) is PH(p2) or its neighbour, and NH(p2) is PH(p1) or its neighbour.
bool common_conditions_ok(const NativePacket& p1, const NativePacket& p2, const Topology& topology);

/// RecodingRule for a decoded native p1: NH(p1) is PH(p2) or its neighbour, and NH(p2) is
/// exactly PH(p1).
bool recoding_rule_ok(const NativePacket& p1, const NativePacket& p2, const Topology& topology);

struct EncodeDecision
{
  bool ok = false;
  bool first_suspect = false;
  bool second_suspect = false;
};

/// Pairwise encoding decision including the SwitchRule. Pass `switch_state == nullptr` to use
/// the common conditions only.
EncodeDecision can_encode(const NativePacket& p1, const NativePacket& p2,
                          const SwitchState* switch_state, const Topology& topology);

struct CodingPolicy
{
  bool scan_overheard = true;   // consider Q2 candidates
  bool switch_rule = false;
  std::size_t max_partners = max_coding_partners;
};

/// Greedy first-fit coding set around `head`, scanning Q1 then Q2 in arrival order. The result
/// starts with `head`; suspect tags are applied to the returned copies.
std::vector<NativePacket> select_coding_set(const TxQueues& queues, const NativePacket& head,
                                            const SwitchState& switch_state,
                                            const Topology& topology, const CodingPolicy& policy);

} // namespace flexonc
