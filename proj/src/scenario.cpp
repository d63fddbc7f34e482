#include "flexonc/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace flexonc {

Topology
TopologySpec::build()
const
{
  switch (kind)
  {
    case Kind::grid:
    {
      std::vector<Position> pos;
      for (int r = 0; r < rows; ++r)
      {
        for (int c = 0; c < cols; ++c)
        {
          pos.push_back({static_cast<double>(c), static_cast<double>(r)});
        }
      }
      return Topology::from_positions(std::move(pos), spacing, range);
    }
    case Kind::positions:
      return Topology::from_positions(positions, spacing, range);
    case Kind::adjacency:
      return Topology::from_adjacency(adjacency);
  }
  return {};
}

RunConfig
Scenario::config(SchemeKind scheme, std::uint64_t seed)
const
{
  RunConfig c;
  c.scenario = name;
  c.topology = topology.build();
  c.flows = flows;
  c.tie_break = tie_break;
  c.scheme = scheme;
  c.channel = channel;
  c.channel.range = topology.range;
  c.params = params;
  c.seed = seed;
  c.duration = duration;
  return c;
}

/*------------------------------------------------------------------------------------------------*/

namespace {

[[noreturn]] void
fail(const std::string& field, const YAML::Node& n, const std::string& what)
{
  const auto mark = n.Mark();
  if (mark.is_null())
  {
    throw ConfigError{field, what};
  }
  throw ConfigError{field, what + " (line " + std::to_string(mark.line + 1) + ", column " +
                             std::to_string(mark.column + 1) + ")"};
}

/// The message of `e` without its "field: " prefix.
std::string
detail(const ConfigError& e)
{
  const std::string what = e.what();
  const auto prefix = e.field() + ": ";
  return !e.field().empty() && what.starts_with(prefix) ? what.substr(prefix.size()) : what;
}

std::string
join(const std::string& path, const std::string& key)
{
  return path.empty() ? key : path + "." + key;
}

void
expect_map(const YAML::Node& n, const std::string& path, const std::set<std::string>& allowed)
{
  if (!n.IsMap())
  {
    fail(path, n, "expected a mapping");
  }
  for (const auto& kv : n)
  {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key))
    {
      fail(join(path, key), kv.first, "unknown key");
    }
  }
}

double
as_double(const YAML::Node& n, const std::string& path)
{
  if (!n.IsScalar())
  {
    fail(path, n, "expected a number");
  }
  const auto& s = n.Scalar();
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v))
  {
    fail(path, n, "expected a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t
as_count(const YAML::Node& n, const std::string& path)
{
  if (!n.IsScalar())
  {
    fail(path, n, "expected a non-negative integer");
  }
  const auto& s = n.Scalar();
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size())
  {
    fail(path, n, "expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

unsigned
as_unsigned(const YAML::Node& n, const std::string& path)
{
  const auto v = as_count(n, path);
  if (v > std::numeric_limits<unsigned>::max())
  {
    fail(path, n, "value too large");
  }
  return static_cast<unsigned>(v);
}

bool
as_bool(const YAML::Node& n, const std::string& path)
{
  if (n.IsScalar())
  {
    const auto& s = n.Scalar();
    if (s == "true" || s == "1")
    {
      return true;
    }
    if (s == "false" || s == "0")
    {
      return false;
    }
  }
  fail(path, n, "expected true or false");
}

std::string
as_string(const YAML::Node& n, const std::string& path)
{
  if (!n.IsScalar())
  {
    fail(path, n, "expected a string");
  }
  return n.Scalar();
}

double
positive(const YAML::Node& n, const std::string& path)
{
  const auto v = as_double(n, path);
  if (!(v > 0.0))
  {
    fail(path, n, "must be positive");
  }
  return v;
}

double
non_negative(const YAML::Node& n, const std::string& path)
{
  const auto v = as_double(n, path);
  if (v < 0.0)
  {
    fail(path, n, "must be non-negative");
  }
  return v;
}

template<typename F>
void
each(const YAML::Node& n, const std::string& path, F&& f)
{
  if (!n.IsSequence())
  {
    fail(path, n, "expected a sequence");
  }
  for (std::size_t i = 0; i < n.size(); ++i)
  {
    f(n[i], path + "[" + std::to_string(i) + "]");
  }
}

void
read_topology(const YAML::Node& n, TopologySpec& t)
{
  expect_map(n, "topology", {"spacing", "range", "grid", "positions", "adjacency"});
  if (n["spacing"])
  {
    t.spacing = positive(n["spacing"], "topology.spacing");
  }
  if (n["range"])
  {
    t.range = positive(n["range"], "topology.range");
  }
  const int kinds = (n["grid"] ? 1 : 0) + (n["positions"] ? 1 : 0) + (n["adjacency"] ? 1 : 0);
  if (kinds != 1)
  {
    fail("topology", n, "needs exactly one of grid, positions or adjacency");
  }
  if (const auto g = n["grid"])
  {
    expect_map(g, "topology.grid", {"rows", "cols"});
    t.kind = TopologySpec::Kind::grid;
    for (const auto* key : {"rows", "cols"})
    {
      const auto path = std::string{"topology.grid."} + key;
      if (!g[key])
      {
        fail(path, g, "missing");
      }
      const auto v = as_unsigned(g[key], path);
      if (v < 1 || v > 1000)
      {
        fail(path, g[key], "must be between 1 and 1000");
      }
      (std::string{key} == "rows" ? t.rows : t.cols) = static_cast<int>(v);
    }
  }
  else if (const auto p = n["positions"])
  {
    t.kind = TopologySpec::Kind::positions;
    each(p, "topology.positions", [&](const YAML::Node& e, const std::string& path)
    {
      if (!e.IsSequence() || e.size() != 2)
      {
        fail(path, e, "expected [x, y]");
      }
      t.positions.push_back({as_double(e[0], path + "[0]"), as_double(e[1], path + "[1]")});
    });
    if (t.positions.empty())
    {
      fail("topology.positions", p, "no nodes");
    }
  }
  else
  {
    const auto a = n["adjacency"];
    t.kind = TopologySpec::Kind::adjacency;
    each(a, "topology.adjacency", [&](const YAML::Node& e, const std::string& path)
    {
      std::vector<std::uint32_t> row;
      each(e, path, [&](const YAML::Node& v, const std::string& vp)
      {
        row.push_back(as_unsigned(v, vp));
      });
      t.adjacency.push_back(std::move(row));
    });
    if (t.adjacency.empty())
    {
      fail("topology.adjacency", a, "no nodes");
    }
    for (std::size_t i = 0; i < t.adjacency.size(); ++i)
    {
      for (auto b : t.adjacency[i])
      {
        if (b >= t.adjacency.size() || b == i)
        {
          fail("topology.adjacency[" + std::to_string(i) + "]", a[i],
               "neighbour " + std::to_string(b) + " is out of range or the node itself");
        }
      }
    }
  }
}

std::size_t
node_count(const TopologySpec& t)
{
  switch (t.kind)
  {
    case TopologySpec::Kind::grid:      return static_cast<std::size_t>(t.rows * t.cols);
    case TopologySpec::Kind::positions: return t.positions.size();
    case TopologySpec::Kind::adjacency: return t.adjacency.size();
  }
  return 0;
}

NodeId
read_node(const YAML::Node& n, const std::string& path, std::size_t nodes)
{
  const auto v = as_unsigned(n, path);
  if (v >= nodes)
  {
    fail(path, n, "node " + std::to_string(v) + " outside topology of " + std::to_string(nodes) +
                  " nodes");
  }
  return NodeId{v};
}

void
read_flows(const YAML::Node& n, Scenario& s)
{
  const auto nodes = node_count(s.topology);
  each(n, "flows", [&](const YAML::Node& e, const std::string& path)
  {
    expect_map(e, path, {"source", "destination", "number", "inter_arrival", "payload", "start",
                         "duration", "route"});
    for (const auto* key : {"source", "destination"})
    {
      if (!e[key])
      {
        fail(join(path, key), e, "missing");
      }
    }
    CbrSource f;
    f.flow.source = read_node(e["source"], path + ".source", nodes);
    f.flow.destination = read_node(e["destination"], path + ".destination", nodes);
    if (f.flow.source == f.flow.destination)
    {
      fail(path + ".destination", e["destination"], "equals the source");
    }
    if (e["number"])
    {
      f.flow.number = as_unsigned(e["number"], path + ".number");
    }
    else
    {
      f.flow.number = 0;
      for (const auto& g : s.flows)
      {
        if (g.flow.source == f.flow.source && g.flow.destination == f.flow.destination)
        {
          f.flow.number = std::max(f.flow.number, g.flow.number + 1);
        }
      }
    }
    if (e["inter_arrival"])
    {
      f.inter_arrival = positive(e["inter_arrival"], path + ".inter_arrival");
    }
    if (e["payload"])
    {
      f.payload = as_count(e["payload"], path + ".payload");
      if (f.payload < 1)
      {
        fail(path + ".payload", e["payload"], "must be positive");
      }
    }
    if (e["start"])
    {
      f.start = non_negative(e["start"], path + ".start");
    }
    if (e["duration"])
    {
      f.duration = non_negative(e["duration"], path + ".duration");
    }
    if (const auto r = e["route"])
    {
      each(r, path + ".route", [&](const YAML::Node& v, const std::string& vp)
      {
        f.route.push_back(read_node(v, vp, nodes));
      });
      if (f.route.size() < 2 || f.route.front() != f.flow.source ||
          f.route.back() != f.flow.destination)
      {
        fail(path + ".route", r, "must run from the source to the destination");
      }
      const auto topo = s.topology.build();
      for (std::size_t i = 0; i + 1 < f.route.size(); ++i)
      {
        if (!topo.adjacent(f.route[i], f.route[i + 1]))
        {
          fail(path + ".route", r, to_string(f.route[i]) + " and " + to_string(f.route[i + 1]) +
                                   " are not neighbours");
        }
      }
    }
    s.flows.push_back(std::move(f));
  });
}

void
read_channel(const YAML::Node& n, ChannelParams& c)
{
  expect_map(n, "channel", {"ber", "data_rate", "ack_bytes", "frame_overhead",
                            "coded_partner_bytes", "second_next_hop_bytes", "sifs", "guard",
                            "access_delay", "ack_loss"});
  if (n["ber"])                   c.bit_error_rate = as_double(n["ber"], "channel.ber");
  if (n["data_rate"])             c.data_rate = as_double(n["data_rate"], "channel.data_rate");
  if (n["ack_bytes"])             c.ack_bytes = as_count(n["ack_bytes"], "channel.ack_bytes");
  if (n["frame_overhead"])        c.frame_overhead = as_count(n["frame_overhead"], "channel.frame_overhead");
  if (n["coded_partner_bytes"])   c.coded_partner_bytes = as_count(n["coded_partner_bytes"], "channel.coded_partner_bytes");
  if (n["second_next_hop_bytes"]) c.second_next_hop_bytes = as_count(n["second_next_hop_bytes"], "channel.second_next_hop_bytes");
  if (n["sifs"])                  c.sifs = as_double(n["sifs"], "channel.sifs");
  if (n["guard"])                 c.guard = as_double(n["guard"], "channel.guard");
  if (n["access_delay"])          c.access_delay = as_double(n["access_delay"], "channel.access_delay");
  if (n["ack_loss"])              c.ack_loss = as_bool(n["ack_loss"], "channel.ack_loss");
  try
  {
    c.validate();
  }
  catch (const ConfigError& e)
  {
    const auto key = e.field().substr(e.field().rfind('.') + 1);
    fail(e.field(), n[key] ? n[key] : n, detail(e));
  }
}

void
read_params(const YAML::Node& n, SchemeParams& p)
{
  expect_map(n, "params", {"max_retries", "ack_cache", "queue_capacity", "buffer_retention",
                           "buffer_capacity", "nack_threshold", "alpha", "ewma_weight",
                           "initial_miat"});
  if (n["max_retries"])      p.max_retries = as_unsigned(n["max_retries"], "params.max_retries");
  if (n["ack_cache"])        p.ack_cache = as_count(n["ack_cache"], "params.ack_cache");
  if (n["queue_capacity"])   p.queue_capacity = as_count(n["queue_capacity"], "params.queue_capacity");
  if (n["buffer_retention"]) p.buffer_retention = as_double(n["buffer_retention"], "params.buffer_retention");
  if (n["buffer_capacity"])  p.buffer_capacity = as_count(n["buffer_capacity"], "params.buffer_capacity");
  if (n["nack_threshold"])   p.switch_rule.nack_threshold = as_unsigned(n["nack_threshold"], "params.nack_threshold");
  if (n["alpha"])            p.switch_rule.alpha = as_double(n["alpha"], "params.alpha");
  if (n["ewma_weight"])      p.switch_rule.ewma_weight = as_double(n["ewma_weight"], "params.ewma_weight");
  if (n["initial_miat"])     p.switch_rule.initial_miat = as_double(n["initial_miat"], "params.initial_miat");
}

void
read_core(const YAML::Node& n, CoreParams& c)
{
  expect_map(n, "core", {"native_delay", "scan_depth", "timer_slot", "gain_weight"});
  if (n["native_delay"]) c.native_delay = as_double(n["native_delay"], "core.native_delay");
  if (n["scan_depth"])   c.scan_depth = as_unsigned(n["scan_depth"], "core.scan_depth");
  if (n["timer_slot"])   c.timer_slot = as_double(n["timer_slot"], "core.timer_slot");
  if (n["gain_weight"])  c.gain_weight = as_double(n["gain_weight"], "core.gain_weight");
}

std::vector<std::string>
split(const std::string& key)
{
  std::vector<std::string> parts;
  std::string cur;
  for (auto ch : key)
  {
    if (ch == '.')
    {
      parts.push_back(cur);
      cur.clear();
    }
    else
    {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

bool
is_index(const std::string& s)
{
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

void
assign(YAML::Node node, const std::vector<std::string>& parts, std::size_t i,
       const YAML::Node& value, const std::string& key)
{
  if (node.IsSequence())
  {
    if (is_index(parts[i]))
    {
      const auto idx = std::stoul(parts[i]);
      if (idx >= node.size())
      {
        throw ConfigError{key, "index " + parts[i] + " out of range"};
      }
      if (i + 1 == parts.size())
      {
        node[idx] = value;
      }
      else
      {
        assign(node[idx], parts, i + 1, value, key);
      }
      return;
    }
    // A named key below a sequence applies to every element, e.g. flows.inter_arrival.
    for (std::size_t k = 0; k < node.size(); ++k)
    {
      assign(node[k], parts, i, value, key);
    }
    return;
  }
  if (!node.IsMap() && node.IsDefined() && !node.IsNull())
  {
    throw ConfigError{key, "'" + parts[i - 1] + "' is not a mapping"};
  }
  if (i + 1 == parts.size())
  {
    node[parts[i]] = value;
    return;
  }
  auto child = node[parts[i]];
  if (!child)
  {
    child = YAML::Node{YAML::NodeType::Map};
    node[parts[i]] = child;
  }
  assign(node[parts[i]], parts, i + 1, value, key);
}

void
apply_override(YAML::Node& doc, const Override& o)
{
  auto key = o.key;
  auto text = o.value;
  if (key == "seed")
  {
    key = "run.seeds";
    text = "[" + text + "]";
  }
  else if (key == "scheme")
  {
    key = "schemes";
    text = "[" + text + "]";
  }
  else if (key == "duration" || key == "seeds")
  {
    key = "run." + key;
  }
  YAML::Node value;
  try
  {
    value = YAML::Load(text);
  }
  catch (const YAML::Exception& e)
  {
    throw ConfigError{key, "cannot parse value '" + o.value + "': " + e.msg};
  }
  const auto parts = split(key);
  for (const auto& p : parts)
  {
    if (p.empty())
    {
      throw ConfigError{o.key, "empty key component"};
    }
  }
  assign(doc, parts, 0, value, o.key);
}

std::string
number(double v)
{
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

} // namespace

Override
parse_override(const std::string& text)
{
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
  {
    throw ConfigError{"--set", "expected key=value, got '" + text + "'"};
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

Scenario
parse_scenario(const std::string& text, const std::vector<Override>& overrides)
{
  YAML::Node doc;
  try
  {
    doc = YAML::Load(text);
  }
  catch (const YAML::ParserException& e)
  {
    throw ConfigError{"yaml", e.msg + " (line " + std::to_string(e.mark.line + 1) + ", column " +
                                std::to_string(e.mark.column + 1) + ")"};
  }
  if (doc.IsNull())
  {
    doc = YAML::Node{YAML::NodeType::Map};
  }
  if (!doc.IsMap())
  {
    fail("", doc, "a scenario must be a mapping");
  }
  for (const auto& o : overrides)
  {
    apply_override(doc, o);
  }

  expect_map(doc, "", {"name", "description", "topology", "routing", "flows", "schemes",
                       "channel", "params", "core", "run", "sweep"});
  Scenario s;
  if (doc["name"])
  {
    s.name = as_string(doc["name"], "name");
  }
  if (doc["description"])
  {
    s.description = as_string(doc["description"], "description");
  }
  if (!doc["topology"])
  {
    fail("topology", doc, "missing");
  }
  read_topology(doc["topology"], s.topology);
  if (const auto r = doc["routing"])
  {
    expect_map(r, "routing", {"tie_break"});
    if (r["tie_break"])
    {
      const auto t = as_string(r["tie_break"], "routing.tie_break");
      if (t == "lowest_index")
      {
        s.tie_break = TieBreak::lowest_index;
      }
      else if (t == "highest_index")
      {
        s.tie_break = TieBreak::highest_index;
      }
      else
      {
        fail("routing.tie_break", r["tie_break"], "expected lowest_index or highest_index");
      }
    }
  }
  if (!doc["flows"])
  {
    fail("flows", doc, "missing");
  }
  read_flows(doc["flows"], s);
  if (const auto n = doc["schemes"])
  {
    s.schemes.clear();
    auto add = [&](const YAML::Node& e, const std::string& path)
    {
      try
      {
        s.schemes.push_back(parse_scheme(as_string(e, path)));
      }
      catch (const ConfigError& err)
      {
        fail(path, e, detail(err));
      }
    };
    if (n.IsScalar())
    {
      add(n, "schemes");
    }
    else
    {
      each(n, "schemes", add);
    }
    if (s.schemes.empty())
    {
      fail("schemes", n, "needs at least one scheme");
    }
  }
  if (doc["channel"])
  {
    read_channel(doc["channel"], s.channel);
  }
  if (doc["params"])
  {
    read_params(doc["params"], s.params);
  }
  if (doc["core"])
  {
    read_core(doc["core"], s.params.core);
  }
  s.params.validate();
  if (const auto r = doc["run"])
  {
    expect_map(r, "run", {"duration", "seeds"});
    if (r["duration"])
    {
      s.duration = non_negative(r["duration"], "run.duration");
    }
    if (const auto seeds = r["seeds"])
    {
      s.seeds.clear();
      if (seeds.IsScalar())
      {
        s.seeds.push_back(as_count(seeds, "run.seeds"));
      }
      else
      {
        each(seeds, "run.seeds", [&](const YAML::Node& e, const std::string& path)
        {
          s.seeds.push_back(as_count(e, path));
        });
      }
      if (s.seeds.empty())
      {
        fail("run.seeds", seeds, "needs at least one seed");
      }
    }
  }
  RunConfig probe = s.config(s.schemes.front(), s.seeds.front());
  if (const auto sw = doc["sweep"])
  {
    each(sw, "sweep", [&](const YAML::Node& e, const std::string& path)
    {
      expect_map(e, path, {"key", "values"});
      if (!e["key"] || !e["values"])
      {
        fail(path, e, "needs key and values");
      }
      SweepAxis a;
      a.name = as_string(e["key"], path + ".key");
      each(e["values"], path + ".values", [&](const YAML::Node& v, const std::string& vp)
      {
        a.values.push_back(as_double(v, vp));
      });
      if (a.values.empty())
      {
        fail(path + ".values", e["values"], "needs at least one value");
      }
      try
      {
        auto c = probe;
        apply_numeric_override(c, a.name, a.values.front());
      }
      catch (const ConfigError& err)
      {
        fail(path + ".key", e["key"], detail(err));
      }
      s.sweep.push_back(std::move(a));
    });
  }
  probe.validate();
  return s;
}

Scenario
load_scenario_file(const std::string& path, const std::vector<Override>& overrides)
{
  std::ifstream in{path};
  if (!in)
  {
    throw ConfigError{"scenario", "cannot open '" + path + "'"};
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try
  {
    return parse_scenario(buf.str(), overrides);
  }
  catch (const ConfigError& e)
  {
    throw ConfigError{e.field(), path + ": " + detail(e)};
  }
}

std::string
serialize_scenario(const Scenario& s)
{
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << s.name;
  out << YAML::Key << "description" << YAML::Value << YAML::DoubleQuoted << s.description;

  out << YAML::Key << "topology" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "spacing" << YAML::Value << number(s.topology.spacing);
  out << YAML::Key << "range" << YAML::Value << number(s.topology.range);
  switch (s.topology.kind)
  {
    case TopologySpec::Kind::grid:
      out << YAML::Key << "grid" << YAML::Value << YAML::Flow << YAML::BeginMap
          << YAML::Key << "rows" << YAML::Value << s.topology.rows
          << YAML::Key << "cols" << YAML::Value << s.topology.cols << YAML::EndMap;
      break;
    case TopologySpec::Kind::positions:
      out << YAML::Key << "positions" << YAML::Value << YAML::BeginSeq;
      for (const auto& p : s.topology.positions)
      {
        out << YAML::Flow << YAML::BeginSeq << number(p.x) << number(p.y) << YAML::EndSeq;
      }
      out << YAML::EndSeq;
      break;
    case TopologySpec::Kind::adjacency:
      out << YAML::Key << "adjacency" << YAML::Value << YAML::BeginSeq;
      for (const auto& row : s.topology.adjacency)
      {
        out << YAML::Flow << YAML::BeginSeq;
        for (auto b : row)
        {
          out << b;
        }
        out << YAML::EndSeq;
      }
      out << YAML::EndSeq;
      break;
  }
  out << YAML::EndMap;

  out << YAML::Key << "routing" << YAML::Value << YAML::BeginMap << YAML::Key << "tie_break"
      << YAML::Value
      << (s.tie_break == TieBreak::lowest_index ? "lowest_index" : "highest_index")
      << YAML::EndMap;

  out << YAML::Key << "flows" << YAML::Value << YAML::BeginSeq;
  for (const auto& f : s.flows)
  {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "source" << YAML::Value << f.flow.source.index;
    out << YAML::Key << "destination" << YAML::Value << f.flow.destination.index;
    out << YAML::Key << "number" << YAML::Value << f.flow.number;
    out << YAML::Key << "inter_arrival" << YAML::Value << number(f.inter_arrival);
    out << YAML::Key << "payload" << YAML::Value << f.payload;
    out << YAML::Key << "start" << YAML::Value << number(f.start);
    out << YAML::Key << "duration" << YAML::Value << number(f.duration);
    if (!f.route.empty())
    {
      out << YAML::Key << "route" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (auto n : f.route)
      {
        out << n.index;
      }
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "schemes" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto k : s.schemes)
  {
    out << to_string(k);
  }
  out << YAML::EndSeq;

  const auto& c = s.channel;
  out << YAML::Key << "channel" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ber" << YAML::Value << number(c.bit_error_rate);
  out << YAML::Key << "data_rate" << YAML::Value << number(c.data_rate);
  out << YAML::Key << "ack_bytes" << YAML::Value << c.ack_bytes;
  out << YAML::Key << "frame_overhead" << YAML::Value << c.frame_overhead;
  out << YAML::Key << "coded_partner_bytes" << YAML::Value << c.coded_partner_bytes;
  out << YAML::Key << "second_next_hop_bytes" << YAML::Value << c.second_next_hop_bytes;
  out << YAML::Key << "sifs" << YAML::Value << number(c.sifs);
  out << YAML::Key << "guard" << YAML::Value << number(c.guard);
  out << YAML::Key << "access_delay" << YAML::Value << number(c.access_delay);
  out << YAML::Key << "ack_loss" << YAML::Value << (c.ack_loss ? "true" : "false");
  out << YAML::EndMap;

  const auto& p = s.params;
  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "max_retries" << YAML::Value << p.max_retries;
  out << YAML::Key << "ack_cache" << YAML::Value << p.ack_cache;
  out << YAML::Key << "queue_capacity" << YAML::Value << p.queue_capacity;
  out << YAML::Key << "buffer_retention" << YAML::Value << number(p.buffer_retention);
  out << YAML::Key << "buffer_capacity" << YAML::Value << p.buffer_capacity;
  out << YAML::Key << "nack_threshold" << YAML::Value << p.switch_rule.nack_threshold;
  out << YAML::Key << "alpha" << YAML::Value << number(p.switch_rule.alpha);
  out << YAML::Key << "ewma_weight" << YAML::Value << number(p.switch_rule.ewma_weight);
  out << YAML::Key << "initial_miat" << YAML::Value << number(p.switch_rule.initial_miat);
  out << YAML::EndMap;

  out << YAML::Key << "core" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "native_delay" << YAML::Value << number(p.core.native_delay);
  out << YAML::Key << "scan_depth" << YAML::Value << p.core.scan_depth;
  out << YAML::Key << "timer_slot" << YAML::Value << number(p.core.timer_slot);
  out << YAML::Key << "gain_weight" << YAML::Value << number(p.core.gain_weight);
  out << YAML::EndMap;

  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "duration" << YAML::Value << number(s.duration);
  out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto seed : s.seeds)
  {
    out << seed;
  }
  out << YAML::EndSeq << YAML::EndMap;

  if (!s.sweep.empty())
  {
    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginSeq;
    for (const auto& a : s.sweep)
    {
      out << YAML::BeginMap << YAML::Key << "key" << YAML::Value << a.name;
      out << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (auto v : a.values)
      {
        out << number(v);
      }
      out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
  return std::string{out.c_str()} + "\n";
}

std::string
config_hash(const Scenario& s)
{
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : serialize_scenario(s))
  {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario
resolve_scenario(const std::string& name_or_path, const std::vector<Override>& overrides)
{
  if (std::filesystem::is_regular_file(name_or_path))
  {
    return load_scenario_file(name_or_path, overrides);
  }
  auto name = std::filesystem::path{name_or_path}.filename().string();
  if (name.ends_with(".yaml"))
  {
    name.resize(name.size() - 5);
  }
  for (const auto& b : builtin_scenarios())
  {
    if (b.name == name)
    {
      try
      {
        return parse_scenario(b.text, overrides);
      }
      catch (const ConfigError& e)
      {
        throw ConfigError{e.field(), name + ": " + detail(e)};
      }
    }
  }
  std::string known;
  for (const auto& b : builtin_scenarios())
  {
    known += (known.empty() ? "" : ", ") + b.name;
  }
  throw ConfigError{"scenario", "unknown scenario '" + name_or_path + "' (built in: " + known + ")"};
}

} // namespace flexonc
