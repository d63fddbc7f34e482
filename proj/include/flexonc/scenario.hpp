#pragma once

#include <cstdint>
#include <iterator>
#include <string>
#include <vector>

#include "flexonc/sim.hpp"

namespace flexonc {

struct TopologySpec
{
  enum class Kind { grid, positions, adjacency };

  Kind kind = Kind::grid;
  int rows = 0;
  int cols = 0;
  std::vector<Position> positions;                   // grid units
  std::vector<std::vector<std::uint32_t>> adjacency;
  double spacing = 150.0;                            // meters per grid unit
  double range = 250.0;                              // meters

  Topology build() const;
};

/// A scenario file: one topology and flow set, plus the schemes, seeds and sweep axes to run.
struct Scenario
{
  std::string name;
  std::string description;
  TopologySpec topology;
  TieBreak tie_break = TieBreak::lowest_index;
  std::vector<CbrSource> flows;
  std::vector<SchemeKind> schemes{std::begin(all_schemes), std::end(all_schemes)};
  ChannelParams channel;
  SchemeParams params;
  double duration = 160.0;
  std::vector<std::uint64_t> seeds{1};
  std::vector<SweepAxis> sweep;

  /// The single-run config for `scheme` and `seed`; sweep axes are not applied.
  RunConfig config(SchemeKind scheme, std::uint64_t seed) const;
};

/// `key=value` with a dotted key. Values are YAML scalars or flow sequences.
struct Override
{
  std::string key;
  std::string value;
};

Override parse_override(const std::string& text);

/// Parses YAML text. Unknown keys, wrong types and out-of-range values raise ConfigError
/// naming the dotted field and the line and column of the offending node. Overrides are
/// applied to the document before it is interpreted.
Scenario parse_scenario(const std::string& text, const std::vector<Override>& overrides = {});
Scenario load_scenario_file(const std::string& path, const std::vector<Override>& overrides = {});

/// Canonical YAML for `s`; parsing it back gives an identical scenario.
std::string serialize_scenario(const Scenario& s);

/// FNV-1a of the canonical serialization, as 16 hex digits.
std::string config_hash(const Scenario& s);

struct BuiltinScenario
{
  std::string name;
  std::string text;
};

const std::vector<BuiltinScenario>& builtin_scenarios();

/// A path to an existing file, or the name of a built-in scenario (with or without ".yaml").
Scenario resolve_scenario(const std::string& name_or_path,
                          const std::vector<Override>& overrides = {});

} // namespace flexonc
