#include "flexonc/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <thread>
#include <tuple>

#include "flexonc/types.hpp"

namespace flexonc {

void
DeliveryParams::validate()
const
{
  if (!(p >= 0.0 && p <= 1.0))
  {
    throw ConfigError{"p", "must lie in [0, 1]"};
  }
  if (N < 1 || H < 1 || m < 1)
  {
    throw ConfigError{"N/H/m", "must be at least 1"};
  }
}

namespace {

/// 1 - (1-q)^k, exact for k = 1.
double
at_least_one(double q, unsigned k)
{
  return k == 1 ? q : 1.0 - std::pow(1.0 - q, k);
}

double
ipow(double x, unsigned k)
{
  return std::pow(x, static_cast<double>(k));
}

} // namespace

double
p_forward_native(const DeliveryParams& d)
{
  d.validate();
  return at_least_one(d.p, d.N);
}

double
p_deliver_native(const DeliveryParams& d)
{
  return ipow(p_forward_native(d), d.H - 1) * d.p;
}

double
p_deliver_coded_bend(const DeliveryParams& d)
{
  const auto pm = ipow(d.p, d.m);
  if (d.H < 2)
  {
    return p_forward_native(d);
  }
  // (p^m)^(H-1), evaluated in the same order as the FlexONC form so both agree exactly at N = 1.
  return p_forward_native(d) * ipow(pm, d.H - 2) * pm;
}

double
p_deliver_coded_flexonc(const DeliveryParams& d)
{
  if (d.H < 2)
  {
    throw PreconditionError{"the coded FlexONC model needs H >= 2"};
  }
  const auto pm = ipow(d.p, d.m);
  return p_forward_native(d) * ipow(at_least_one(pm, d.N), d.H - 2) * pm;
}

std::string
to_string(DeliveryModel m)
{
  switch (m)
  {
    case DeliveryModel::native:        return "native";
    case DeliveryModel::bend_coded:    return "bend";
    case DeliveryModel::flexonc_coded: return "flexonc";
  }
  return "?";
}

double
closed_form(const DeliveryParams& d, DeliveryModel model)
{
  switch (model)
  {
    case DeliveryModel::native:        return p_deliver_native(d);
    case DeliveryModel::bend_coded:    return p_deliver_coded_bend(d);
    case DeliveryModel::flexonc_coded: return p_deliver_coded_flexonc(d);
  }
  return 0.0;
}

/*------------------------------------------------------------------------------------------------*/

Estimate
monte_carlo_delivery(const DeliveryParams& d, DeliveryModel model, std::uint64_t trials,
                     std::uint64_t seed)
{
  d.validate();
  if (trials < 1)
  {
    throw ConfigError{"trials", "must be at least 1"};
  }
  if (model == DeliveryModel::flexonc_coded && d.H < 2)
  {
    throw PreconditionError{"the coded FlexONC model needs H >= 2"};
  }
  std::mt19937_64 gen{seed};
  // Integer threshold: u < threshold happens with probability q (exactly 1 for q = 1).
  auto threshold = [](double q)
  {
    return q >= 1.0 ? ~0ull : static_cast<std::uint64_t>(std::ldexp(q, 64));
  };
  const auto link = threshold(d.p);
  auto bernoulli = [&](std::uint64_t t){ return t == ~0ull || gen() < t; };
  auto single_link = [&](){ return bernoulli(link); };
  // One forwarder holding all m partners: m independent link draws.
  auto coded_link = [&]()
  {
    for (unsigned j = 0; j < d.m; ++j)
    {
      if (!single_link())
      {
        return false;
      }
    }
    return true;
  };
  auto any_of_n = [&](auto&& draw)
  {
    // Every forwarder draws; the hop succeeds if at least one did.
    bool ok = false;
    for (unsigned i = 0; i < d.N; ++i)
    {
      ok = draw() || ok;
    }
    return ok;
  };

  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t)
  {
    // The source always sends natively; with a single hop only the destination listens.
    bool ok = d.H == 1 && model == DeliveryModel::native ? single_link() : any_of_n(single_link);
    switch (model)
    {
      case DeliveryModel::native:
        for (unsigned h = 1; ok && h + 1 < d.H; ++h)
        {
          ok = any_of_n(single_link);
        }
        ok = ok && (d.H == 1 || single_link());
        break;
      case DeliveryModel::bend_coded:
        for (unsigned h = 1; ok && h < d.H; ++h)
        {
          ok = coded_link();
        }
        break;
      case DeliveryModel::flexonc_coded:
        for (unsigned h = 1; ok && h + 1 < d.H; ++h)
        {
          ok = any_of_n(coded_link);
        }
        ok = ok && coded_link();
        break;
    }
    hits += ok ? 1 : 0;
  }
  Estimate e;
  e.trials = trials;
  e.mean = static_cast<double>(hits) / static_cast<double>(trials);
  e.stderr_ = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(trials));
  return e;
}

/*------------------------------------------------------------------------------------------------*/

void
GridSpec::validate()
const
{
  if (p.empty() || N.empty() || H.empty() || m.empty())
  {
    throw ConfigError{"grid", "every axis needs at least one value"};
  }
  for (auto v : p)
  {
    if (!(v >= 0.0 && v <= 1.0))
    {
      throw ConfigError{"grid.p", "values must lie in [0, 1]"};
    }
  }
  for (const auto* axis : {&N, &m})
  {
    for (auto v : *axis)
    {
      if (v < 1)
      {
        throw ConfigError{"grid", "N and m must be at least 1"};
      }
    }
  }
  for (auto v : H)
  {
    if (v < 2)
    {
      throw ConfigError{"grid.H", "values must be at least 2"};
    }
  }
}

std::vector<DeliveryParams>
GridSpec::points()
const
{
  validate();
  std::vector<DeliveryParams> out;
  for (auto pv : p)
  {
    for (auto nv : N)
    {
      for (auto hv : H)
      {
        for (auto mv : m)
        {
          out.push_back({pv, nv, hv, mv});
        }
      }
    }
  }
  return out;
}

InequalityReport
verify_inequality(const std::vector<DeliveryParams>& grid, double p0, unsigned dense_steps)
{
  InequalityReport r;
  std::set<std::tuple<unsigned, unsigned, unsigned>> series;
  for (const auto& d : grid)
  {
    if (d.H < 2)
    {
      continue;
    }
    const auto flex = p_deliver_coded_flexonc(d);
    const auto bend = p_deliver_coded_bend(d);
    if (d.p == 1.0 || d.N == 1)
    {
      ++r.equal_checked;
      if (flex != bend)
      {
        r.violations.push_back({d, "expected equality, got FlexONC - BEND = " +
                                     std::to_string(flex - bend)});
      }
    }
    else if (d.p > 0.0 && d.H > 2 && std::pow(d.p, d.m) < 1.0)
    {
      ++r.strict_checked;
      if (!(flex > bend))
      {
        r.violations.push_back({d, "FlexONC does not exceed BEND"});
      }
    }
    if (d.N > 1 && d.H > 2 && d.m >= 2)
    {
      series.emplace(d.N, d.H, d.m);
    }
  }

  for (const auto& [N, H, m] : series)
  {
    ++r.gap_checked;
    double previous = -1.0;
    for (unsigned i = 0; i <= dense_steps; ++i)
    {
      const auto p = std::min(1.0, p0 + (1.0 - p0) * static_cast<double>(i) / dense_steps);
      const DeliveryParams d{p, N, H, m};
      const auto gap = p_deliver_coded_flexonc(d) - p_deliver_coded_bend(d);
      if (i > 0 && gap > previous + 1e-15)
      {
        r.violations.push_back({d, "gap grows as p rises toward 1"});
        break;
      }
      previous = gap;
    }
  }
  return r;
}

std::vector<AgreementRow>
cross_validate(const std::vector<DeliveryParams>& grid, std::uint64_t trials, std::uint64_t seed,
               unsigned jobs)
{
  std::vector<AgreementRow> rows;
  for (const auto& d : grid)
  {
    for (auto model : {DeliveryModel::native, DeliveryModel::bend_coded,
                       DeliveryModel::flexonc_coded})
    {
      rows.push_back({d, model, closed_form(d, model), {}, 0.0});
    }
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]()
  {
    for (auto i = next++; i < rows.size(); i = next++)
    {
      auto& row = rows[i];
      const auto& d = row.params;
      // The native model ignores m, so rows differing only in m share one experiment.
      const auto m = row.model == DeliveryModel::native ? 0u : d.m;
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(std::llround(d.p * 1e6)), d.N, d.H, m,
                        static_cast<std::uint32_t>(row.model)};
      std::uint64_t s[1];
      seq.generate(reinterpret_cast<std::uint32_t*>(s), reinterpret_cast<std::uint32_t*>(s) + 2);
      row.estimate = monte_carlo_delivery(d, row.model, trials, s[0]);
      const auto sigma = std::sqrt(row.exact * (1.0 - row.exact) / static_cast<double>(trials));
      const auto diff = std::abs(row.estimate.mean - row.exact);
      row.z = sigma > 0.0 ? diff / sigma : (diff == 0.0 ? 0.0 : INFINITY);
    }
  };
  const auto threads = std::max(1u, jobs);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t)
  {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& t : pool)
  {
    t.join();
  }
  return rows;
}

} // namespace flexonc
