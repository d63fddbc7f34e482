#include <doctest.h>

#include "flexonc/scenario.hpp"

using namespace flexonc;

namespace {

const char* minimal = R"(
name: tiny
topology:
  grid: {rows: 1, cols: 3}
flows:
  - {source: 0, destination: 2, inter_arrival: 0.1, duration: 5}
run: {duration: 10, seeds: [1, 2]}
)";

std::string
field_of(const std::string& text, const std::vector<Override>& o = {})
{
  try
  {
    parse_scenario(text, o);
  }
  catch (const ConfigError& e)
  {
    return e.field();
  }
  return "<no error>";
}

std::string
message_of(const std::string& text)
{
  try
  {
    parse_scenario(text);
  }
  catch (const ConfigError& e)
  {
    return e.what();
  }
  return "<no error>";
}

} // namespace

TEST_CASE("minimal scenario")
{
  const auto s = parse_scenario(minimal);
  CHECK(s.name == "tiny");
  CHECK(s.topology.build().size() == 3);
  REQUIRE(s.flows.size() == 1);
  CHECK(s.flows[0].flow.destination == NodeId{2});
  CHECK(s.flows[0].payload == 1000);
  CHECK(s.schemes.size() == 6);
  CHECK(s.seeds == std::vector<std::uint64_t>{1, 2});
  const auto c = s.config(SchemeKind::cope, 2);
  CHECK(c.scheme == SchemeKind::cope);
  CHECK(c.seed == 2);
  CHECK(c.duration == 10.0);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("built-in scenarios parse and round-trip")
{
  std::vector<std::string> names;
  for (const auto& b : builtin_scenarios())
  {
    CAPTURE(b.name);
    names.push_back(b.name);
    const auto s = parse_scenario(b.text);
    const auto text = serialize_scenario(s);
    const auto back = parse_scenario(text);
    CHECK(serialize_scenario(back) == text);
    CHECK(config_hash(back) == config_hash(s));
    CHECK(config_hash(s).size() == 16);
    for (auto scheme : s.schemes)
    {
      CHECK_NOTHROW(s.config(scheme, s.seeds.front()).validate());
    }
  }
  for (const char* n : {"8node", "12node", "12node-alt", "grid5x5-a", "grid5x5-b", "xtopo", "cross"})
  {
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  }
}

TEST_CASE("overrides edit the document before interpretation")
{
  const auto base = parse_scenario(minimal);
  const auto s = parse_scenario(minimal, {parse_override("channel.ber=1e-5"),
                                          parse_override("flows.inter_arrival=0.05"),
                                          parse_override("seed=7"),
                                          parse_override("scheme=flexonc-sr")});
  CHECK(s.channel.bit_error_rate == 1e-5);
  CHECK(s.flows[0].inter_arrival == 0.05);
  CHECK(s.seeds == std::vector<std::uint64_t>{7});
  CHECK(s.schemes == std::vector<SchemeKind>{SchemeKind::flexonc_sr});
  CHECK(config_hash(s) != config_hash(base));

  const auto one = parse_scenario(minimal, {parse_override("flows.0.payload=500")});
  CHECK(one.flows[0].payload == 500);

  CHECK_THROWS_AS(parse_override("no-equals"), ConfigError);
  CHECK(field_of(minimal, {parse_override("channel.bogus=1")}) == "channel.bogus");
  CHECK(field_of(minimal, {parse_override("channel.ber=high")}) == "channel.ber");
}

TEST_CASE("errors name the field and the location")
{
  const std::string unknown = std::string{minimal} + "colour: blue\n";
  CHECK(field_of(unknown) == "colour");
  CHECK(message_of(unknown).find("line") != std::string::npos);

  const char* no_dest = R"(
topology: {grid: {rows: 1, cols: 3}}
flows:
  - {source: 0, inter_arrival: 0.1}
)";
  CHECK(field_of(no_dest) == "flows[0].destination");

  const char* bad_node = R"(
topology: {grid: {rows: 1, cols: 3}}
flows:
  - {source: 0, destination: 9}
)";
  CHECK(field_of(bad_node) == "flows[0].destination");

  const char* bad_scheme = R"(
topology: {grid: {rows: 1, cols: 3}}
flows: [{source: 0, destination: 2}]
schemes: [flexonc, turbo]
)";
  CHECK(field_of(bad_scheme) == "schemes[1]");

  const char* bad_route = R"(
topology: {grid: {rows: 1, cols: 4}}
flows: [{source: 0, destination: 3, route: [0, 2, 3]}]
)";
  CHECK(field_of(bad_route).rfind("flows[0].route", 0) == 0);

  const char* bad_sweep = R"(
topology: {grid: {rows: 1, cols: 3}}
flows: [{source: 0, destination: 2}]
sweep: [{key: channel.colour, values: [1]}]
)";
  CHECK(field_of(bad_sweep).rfind("sweep", 0) == 0);

  CHECK_THROWS_AS(parse_scenario("[1, 2"), ConfigError);
  CHECK_THROWS_AS(resolve_scenario("/nonexistent/scenario.yaml"), ConfigError);
}

TEST_CASE("resolve accepts built-in names with or without extension")
{
  CHECK(resolve_scenario("8node").name == "8node");
  CHECK(resolve_scenario("8node.yaml").name == "8node");
  CHECK(resolve_scenario("12node").sweep.size() == 1);
}
