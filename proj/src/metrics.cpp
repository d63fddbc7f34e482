#include "flexonc/metrics.hpp"

#include <algorithm>
#include <cstdio>

namespace flexonc {

double
FlowMetrics::throughput()
const noexcept
{
  if (active_duration <= 0.0)
  {
    return 0.0;
  }
  return 8.0 * static_cast<double>(payload_bytes * delivered) / active_duration;
}

double
FlowMetrics::mean_delay()
const noexcept
{
  return delivered == 0 ? 0.0 : delay_sum / static_cast<double>(delivered);
}

FlowMetrics
MetricsRecord::total()
const
{
  FlowMetrics t;
  for (const auto& f : flows)
  {
    t.generated += f.generated;
    t.delivered += f.delivered;
    t.duplicates += f.duplicates;
    t.dropped += f.dropped;
    t.in_flight += f.in_flight;
    t.retransmissions += f.retransmissions;
    t.nacks_received += f.nacks_received;
    t.delay_sum += f.delay_sum;
    t.active_duration = std::max(t.active_duration, f.active_duration);
  }
  return t;
}

NodeMetrics
MetricsRecord::node_total()
const
{
  NodeMetrics t;
  for (const auto& n : nodes)
  {
    t.transmissions += n.transmissions;
    t.decoding_failures += n.decoding_failures;
    t.coding_opportunities += n.coding_opportunities;
    t.coded_partners += n.coded_partners;
    t.backup_firings += n.backup_firings;
    t.acks_sent += n.acks_sent;
    t.nacks_sent += n.nacks_sent;
  }
  return t;
}

double
throughput(const MetricsRecord& record, const std::vector<std::size_t>& subset)
{
  std::vector<std::size_t> chosen = subset;
  if (chosen.empty())
  {
    for (std::size_t i = 0; i < record.flows.size(); ++i)
    {
      chosen.push_back(i);
    }
  }
  double bits = 0.0;
  double span = 0.0;
  for (auto i : chosen)
  {
    const auto& f = record.flows.at(i);
    bits += 8.0 * static_cast<double>(f.payload_bytes * f.delivered);
    span = std::max(span, f.active_duration);
  }
  return span > 0.0 ? bits / span : 0.0;
}

std::optional<double>
throughput_gain(const MetricsRecord& flexonc, const MetricsRecord& baseline)
{
  const auto base = throughput(baseline);
  if (base <= 0.0)
  {
    return std::nullopt;
  }
  return 100.0 * (throughput(flexonc) - base) / base;
}

std::uint64_t
count_decoding_failures(const MetricsRecord& record, NodeId node)
{
  return record.nodes.at(node.index).decoding_failures;
}

/*------------------------------------------------------------------------------------------------*/

std::string
format_number(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::string>
csv_metric_columns()
{
  return {"generated",       "delivered",        "duplicates",       "dropped",
          "in_flight",       "throughput_bps",   "mean_delay_s",     "retransmissions",
          "nacks_received",  "decoding_failures", "coding_opportunities", "coded_partners",
          "backup_firings",  "coded_sent",       "fate_intended",    "fate_backup_only",
          "fate_timed_out",  "lost_ack_events",  "trace_hash"};
}

void
write_csv_header(std::ostream& os, const std::vector<std::string>& axes)
{
  os << "scenario,scheme,seed";
  for (const auto& a : axes)
  {
    os << ',' << a;
  }
  for (const auto& c : csv_metric_columns())
  {
    os << ',' << c;
  }
  os << '\n';
}

void
write_csv_row(std::ostream& os, const MetricsRecord& r, const std::vector<AxisValue>& axes)
{
  const auto t = r.total();
  const auto n = r.node_total();
  os << r.scenario << ',' << to_string(r.scheme) << ',' << r.seed;
  for (const auto& a : axes)
  {
    os << ',' << format_number(a.value);
  }
  os << ',' << t.generated << ',' << t.delivered << ',' << t.duplicates << ',' << t.dropped << ','
     << t.in_flight << ',' << format_number(throughput(r)) << ',' << format_number(t.mean_delay())
     << ',' << t.retransmissions << ',' << t.nacks_received << ',' << n.decoding_failures << ','
     << n.coding_opportunities << ',' << n.coded_partners << ',' << n.backup_firings << ','
     << r.fate.sent << ',' << r.fate.by_intended << ',' << r.fate.by_backup_only << ','
     << r.fate.timed_out_unheard << ',' << r.lost_ack_events << ',' << r.trace_hash << '\n';
}

nlohmann::json
to_json(const MetricsRecord& r)
{
  using nlohmann::json;
  json flows = json::array();
  for (const auto& f : r.flows)
  {
    flows.push_back({{"source", f.flow.source.index},
                     {"destination", f.flow.destination.index},
                     {"number", f.flow.number},
                     {"generated", f.generated},
                     {"delivered", f.delivered},
                     {"duplicates", f.duplicates},
                     {"dropped", f.dropped},
                     {"in_flight", f.in_flight},
                     {"throughput_bps", f.throughput()},
                     {"mean_delay_s", f.mean_delay()},
                     {"retransmissions", f.retransmissions},
                     {"nacks_received", f.nacks_received}});
  }
  json nodes = json::array();
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
  {
    const auto& n = r.nodes[i];
    nodes.push_back({{"node", i},
                     {"transmissions", n.transmissions},
                     {"decoding_failures", n.decoding_failures},
                     {"coding_opportunities", n.coding_opportunities},
                     {"coded_partners", n.coded_partners},
                     {"backup_firings", n.backup_firings},
                     {"acks_sent", n.acks_sent},
                     {"nacks_sent", n.nacks_sent}});
  }
  json switches = json::array();
  for (const auto& s : r.switches)
  {
    switches.push_back({{"node", s.node.index},
                        {"flow_source", s.flow.source.index},
                        {"flow_destination", s.flow.destination.index},
                        {"time", s.time},
                        {"activated", s.activated}});
  }
  return {{"scenario", r.scenario},
          {"scheme", to_string(r.scheme)},
          {"seed", r.seed},
          {"duration", r.duration},
          {"throughput_bps", throughput(r)},
          {"flows", flows},
          {"nodes", nodes},
          {"fate", {{"sent", r.fate.sent},
                    {"by_intended", r.fate.by_intended},
                    {"by_backup_only", r.fate.by_backup_only},
                    {"timed_out_unheard", r.fate.timed_out_unheard}}},
          {"switch_events", switches},
          {"lost_ack_events", r.lost_ack_events},
          {"events", r.events},
          {"trace_hash", r.trace_hash}};
}

} // namespace flexonc
