#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flexonc/channel.hpp"
#include "flexonc/metrics.hpp"
#include "flexonc/scheme.hpp"
#include "flexonc/topology.hpp"

namespace flexonc {

struct CbrSource
{
  FlowId flow;
  double inter_arrival = 0.1;
  std::size_t payload = 1000;
  double start = 0.0;
  double duration = 150.0;
  /// Pinned path from source to destination; empty means minimum-hop routing.
  std::vector<NodeId> route;
};

struct RunConfig
{
  std::string scenario;
  Topology topology;
  std::vector<CbrSource> flows;
  TieBreak tie_break = TieBreak::lowest_index;
  SchemeKind scheme = SchemeKind::flexonc;
  ChannelParams channel;
  SchemeParams params;
  std::uint64_t seed = 1;
  double duration = 160.0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  Routes routes() const;
};

/// Executes one run to completion. Identical configs give identical records.
MetricsRecord run(const RunConfig& config);

/*------------------------------------------------------------------------------------------------*/

struct SweepAxis
{
  std::string name;                    // dotted key, e.g. "channel.ber"
  std::vector<double> values;
};

struct SweepCell
{
  std::vector<AxisValue> axes;
  SchemeKind scheme = SchemeKind::flexonc;
  std::uint64_t seed = 0;
  MetricsRecord record;
};

/// Applies one axis value to a config; the default understands the numeric keys accepted by
/// apply_numeric_override.
using AxisApplier = std::function<void(RunConfig&, const std::string&, double)>;

void apply_numeric_override(RunConfig& config, const std::string& key, double value);

/// Cartesian product of axes x schemes x seeds. Runs may execute on `jobs` threads; results
/// come back in product order regardless.
std::vector<SweepCell> sweep(const RunConfig& base, const std::vector<SweepAxis>& axes,
                             const std::vector<SchemeKind>& schemes,
                             const std::vector<std::uint64_t>& seeds, unsigned jobs = 1,
                             const AxisApplier& apply = apply_numeric_override);

} // namespace flexonc
