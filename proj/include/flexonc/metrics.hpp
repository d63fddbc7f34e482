#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "flexonc/scheme.hpp"
#include "flexonc/types.hpp"

namespace flexonc {

struct FlowMetrics
{
  FlowId flow;
  std::size_t payload_bytes = 0;
  double active_duration = 0.0;
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;        // unique ids reaching the sink
  std::uint64_t duplicates = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t nacks_received = 0;
  double delay_sum = 0.0;

  double throughput() const noexcept;
  double mean_delay() const noexcept;
};

struct NodeMetrics
{
  std::uint64_t transmissions = 0;    // data frames
  std::uint64_t decoding_failures = 0;
  std::uint64_t coding_opportunities = 0;
  std::uint64_t coded_partners = 0;
  std::uint64_t backup_firings = 0;
  std::uint64_t acks_sent = 0;
  std::uint64_t nacks_sent = 0;
};

struct FateCounts
{
  std::uint64_t sent = 0;
  std::uint64_t by_intended = 0;
  std::uint64_t by_backup_only = 0;
  std::uint64_t timed_out_unheard = 0;
};

struct CodingOpportunity
{
  NodeId node;
  double time = 0.0;
  unsigned partners = 0;
};

struct DecodingFailure
{
  NodeId node;
  NodeId coder;
  double time = 0.0;
  /// The partner this node was meant to decode was tagged suspect by the coder.
  bool suspect = false;
};

struct SwitchEvent
{
  NodeId node;
  FlowId flow;
  double time = 0.0;
  bool activated = false;             // false: every flow at the node reverted
};

struct MetricsRecord
{
  std::string scenario;
  SchemeKind scheme = SchemeKind::flexonc;
  std::uint64_t seed = 0;
  double duration = 0.0;
  std::vector<FlowMetrics> flows;
  std::vector<NodeMetrics> nodes;
  FateCounts fate;
  std::vector<CodingOpportunity> opportunities;
  std::vector<DecodingFailure> failures;
  std::vector<SwitchEvent> switches;
  std::uint64_t lost_ack_events = 0;
  /// Undelivered ids that are neither held anywhere nor had a loss event. Always 0 unless the
  /// simulator lost track of a packet.
  std::uint64_t vanished = 0;
  std::uint64_t events = 0;
  std::uint64_t trace_hash = 0;

  FlowMetrics total() const;
  NodeMetrics node_total() const;
};

/// Delivered unique payload bits per second over the active duration of the selected flows.
/// An empty subset selects every flow.
double throughput(const MetricsRecord& record, const std::vector<std::size_t>& flows = {});

/// 100 * (Tr(flexonc) - Tr(baseline)) / Tr(baseline); empty when the baseline delivered nothing.
std::optional<double> throughput_gain(const MetricsRecord& flexonc, const MetricsRecord& baseline);

std::uint64_t count_decoding_failures(const MetricsRecord& record, NodeId node);

/*------------------------------------------------------------------------------------------------*/

struct AxisValue
{
  std::string name;
  double value = 0.0;
};

std::vector<std::string> csv_metric_columns();
void write_csv_header(std::ostream& os, const std::vector<std::string>& axes);
void write_csv_row(std::ostream& os, const MetricsRecord& record,
                   const std::vector<AxisValue>& axes);
/// Six significant digits.
std::string format_number(double v);

nlohmann::json to_json(const MetricsRecord& record);

} // namespace flexonc
