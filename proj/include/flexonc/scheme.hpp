#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "flexonc/channel.hpp"
#include "flexonc/coding.hpp"
#include "flexonc/topology.hpp"

namespace flexonc {

enum class SchemeKind { noncoding, cope, bend, core, flexonc, flexonc_sr };

inline constexpr SchemeKind all_schemes[] = {SchemeKind::noncoding, SchemeKind::cope,
                                             SchemeKind::bend,      SchemeKind::core,
                                             SchemeKind::flexonc,   SchemeKind::flexonc_sr};

std::string to_string(SchemeKind s);
/// Accepts the names produced by to_string; throws ConfigError otherwise.
SchemeKind parse_scheme(const std::string& name);

struct CoreParams
{
  double native_delay = 5e-3;
  unsigned scan_depth = 8;            // K
  double timer_slot = 1e-3;           // forwarding-timer unit per missing coding partner
  double gain_weight = 1.0;

  void validate() const;
};

struct SchemeParams
{
  unsigned max_retries = 4;
  std::size_t ack_cache = 256;
  std::size_t queue_capacity = 50;
  double buffer_retention = 2.0;
  std::size_t buffer_capacity = 200;
  SwitchConfig switch_rule;
  CoreParams core;

  void validate() const;
};

/*------------------------------------------------------------------------------------------------*/

/// Recently heard acknowledgments, oldest evicted first.
class AckCache
{
public:
  explicit AckCache(std::size_t capacity = 256);

  void add(const PacketId& id, NodeId sender);
  bool contains(const PacketId& id, NodeId sender) const;
  bool contains(const PacketId& id) const;
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }

private:
  std::size_t capacity_;
  std::deque<std::pair<PacketId, NodeId>> entries_;
};

/// Time a sender waits after its frame for n partners plus `eligible` backup slots.
double sender_window(const ChannelParams& params, std::size_t partners, std::size_t eligible);

/// Start of acknowledgment slot `slot` (1-based) relative to the end of the data frame.
double ack_slot_offset(const ChannelParams& params, std::size_t slot);

/// Coded frame for `partners` sent by `sender`. The bitmap is the union of the eligible
/// forwarders of every partner, minus the partners' own next hops. Pass `with_bitmap = false`
/// for schemes without backup forwarding.
CodedPacket build_coded_frame(NodeId sender, const std::vector<NativePacket>& partners,
                              const RoutingView& view, bool with_bitmap = true);

/// On-air size of a native or coded frame under `scheme`, excluding the MAC overhead.
std::size_t native_frame_bytes(const ChannelParams& params, SchemeKind scheme,
                               std::size_t payload);
std::size_t coded_frame_bytes(const ChannelParams& params, SchemeKind scheme,
                              const CodedPacket& packet);

} // namespace flexonc
