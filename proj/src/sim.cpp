#include "flexonc/sim.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace flexonc {

void
RunConfig::validate()
const
{
  channel.validate();
  params.validate();
  if (topology.size() == 0)
  {
    throw ConfigError{"topology", "no nodes"};
  }
  if (!(duration >= 0.0))
  {
    throw ConfigError{"duration", "must be non-negative"};
  }
  std::set<FlowId> ids;
  for (std::size_t i = 0; i < flows.size(); ++i)
  {
    const auto& f = flows[i];
    const auto field = "flows[" + std::to_string(i) + "]";
    if (!topology.contains(f.flow.source))
    {
      throw ConfigError{field + ".source", "node outside topology"};
    }
    if (!topology.contains(f.flow.destination))
    {
      throw ConfigError{field + ".destination", "node outside topology"};
    }
    if (!(f.inter_arrival > 0.0))
    {
      throw ConfigError{field + ".inter_arrival", "must be positive"};
    }
    if (f.payload < 1)
    {
      throw ConfigError{field + ".payload", "must be positive"};
    }
    if (f.start < 0.0 || f.duration < 0.0)
    {
      throw ConfigError{field + ".start", "start and duration must be non-negative"};
    }
    if (f.start + f.duration > duration + 1e-9 && duration > 0.0)
    {
      throw ConfigError{"duration", "shorter than the end of " + field};
    }
    if (!ids.insert(f.flow).second)
    {
      throw ConfigError{field, "duplicate flow identifier"};
    }
  }
  routes();
}

Routes
RunConfig::routes()
const
{
  std::vector<FlowId> ids;
  std::vector<PinnedRoute> pins;
  for (const auto& f : flows)
  {
    ids.push_back(f.flow);
    if (!f.route.empty())
    {
      pins.push_back({f.flow, f.route});
    }
  }
  return compute_routes(topology, ids, tie_break, pins);
}

/*------------------------------------------------------------------------------------------------*/

void
apply_numeric_override(RunConfig& c, const std::string& key, double v)
{
  auto count = [&]()
  {
    if (v < 0.0 || v != std::floor(v))
    {
      throw ConfigError{key, "must be a non-negative integer"};
    }
    return static_cast<std::size_t>(v);
  };
  if (key == "channel.ber")                 c.channel.bit_error_rate = v;
  else if (key == "channel.data_rate")      c.channel.data_rate = v;
  else if (key == "channel.ack_loss")       c.channel.ack_loss = v != 0.0;
  else if (key == "channel.guard")          c.channel.guard = v;
  else if (key == "channel.sifs")           c.channel.sifs = v;
  else if (key == "channel.access_delay")   c.channel.access_delay = v;
  else if (key == "flows.inter_arrival")    for (auto& f : c.flows) f.inter_arrival = v;
  else if (key == "flows.payload")          for (auto& f : c.flows) f.payload = count();
  else if (key == "flows.duration")         for (auto& f : c.flows) f.duration = v;
  else if (key == "duration")               c.duration = v;
  else if (key == "seed")                   c.seed = count();
  else if (key == "params.max_retries")     c.params.max_retries = static_cast<unsigned>(count());
  else if (key == "params.queue_capacity")  c.params.queue_capacity = count();
  else if (key == "params.nack_threshold")  c.params.switch_rule.nack_threshold = static_cast<unsigned>(count());
  else if (key == "params.alpha")           c.params.switch_rule.alpha = v;
  else if (key == "params.ewma_weight")     c.params.switch_rule.ewma_weight = v;
  else if (key == "core.native_delay")      c.params.core.native_delay = v;
  else throw ConfigError{key, "not a numeric sweep axis"};
}

std::vector<SweepCell>
sweep(const RunConfig& base, const std::vector<SweepAxis>& axes,
      const std::vector<SchemeKind>& schemes, const std::vector<std::uint64_t>& seeds,
      unsigned jobs, const AxisApplier& apply)
{
  for (const auto& a : axes)
  {
    if (a.values.empty())
    {
      throw ConfigError{"sweep." + a.name, "axis has no values"};
    }
  }
  if (schemes.empty() || seeds.empty())
  {
    throw ConfigError{"sweep", "needs at least one scheme and one seed"};
  }

  // Product order: axes (first varies slowest), then scheme, then seed.
  std::vector<SweepCell> cells;
  std::vector<std::vector<AxisValue>> points{{}};
  for (const auto& a : axes)
  {
    std::vector<std::vector<AxisValue>> next;
    for (const auto& p : points)
    {
      for (auto v : a.values)
      {
        auto q = p;
        q.push_back({a.name, v});
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  std::vector<RunConfig> configs;
  for (const auto& p : points)
  {
    for (auto s : schemes)
    {
      for (auto seed : seeds)
      {
        auto c = base;
        for (const auto& av : p)
        {
          apply(c, av.name, av.value);
        }
        c.scheme = s;
        c.seed = seed;
        configs.push_back(std::move(c));
        cells.push_back({p, s, seed, {}});
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_lock;
  std::exception_ptr error;
  std::string error_key;
  auto worker = [&]()
  {
    for (auto i = next++; i < cells.size(); i = next++)
    {
      try
      {
        cells[i].record = run(configs[i]);
      }
      catch (...)
      {
        std::lock_guard lock{error_lock};
        if (!error)
        {
          error = std::current_exception();
          error_key = to_string(cells[i].scheme) + " seed " + std::to_string(cells[i].seed);
          for (const auto& av : cells[i].axes)
          {
            error_key += " " + av.name + "=" + format_number(av.value);
          }
        }
      }
    }
  };
  const auto threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())));
  if (threads == 1)
  {
    worker();
  }
  else
  {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
    {
      pool.emplace_back(worker);
    }
    for (auto& t : pool)
    {
      t.join();
    }
  }
  if (error)
  {
    try
    {
      std::rethrow_exception(error);
    }
    catch (const ConfigError& e)
    {
      throw ConfigError{e.field(), std::string{e.what()} + " (run " + error_key + ")"};
    }
    catch (const std::exception& e)
    {
      throw std::runtime_error{std::string{e.what()} + " (run " + error_key + ")"};
    }
  }
  return cells;
}

} // namespace flexonc
