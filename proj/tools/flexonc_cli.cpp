#include <CLI11.hpp>

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "flexonc/analysis.hpp"
#include "flexonc/scenario.hpp"
#include "flexonc/version.hpp"

namespace fs = std::filesystem;
using namespace flexonc;

namespace {

unsigned
default_jobs()
{
  if (const char* env = std::getenv("FLEXONC_JOBS"))
  {
    try
    {
      const auto v = std::stoul(env);
      if (v >= 1)
      {
        return static_cast<unsigned>(v);
      }
    }
    catch (const std::exception&)
    {
    }
    throw ConfigError{"FLEXONC_JOBS", std::string{"expected a positive integer, got '"} + env + "'"};
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::ofstream
open_output(const fs::path& p)
{
  std::ofstream out{p};
  if (!out)
  {
    throw std::runtime_error{"cannot write '" + p.string() + "'"};
  }
  return out;
}

/*------------------------------------------------------------------------------------------------*/

struct RunOptions
{
  std::string scenario;
  std::vector<std::string> sets;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> schemes;
  std::string out;
  std::string format = "csv";
  unsigned jobs = 0;
  bool no_sweep = false;
};

int
cmd_run(const RunOptions& o)
{
  std::vector<Override> overrides;
  for (const auto& s : o.sets)
  {
    overrides.push_back(parse_override(s));
  }
  auto sc = resolve_scenario(o.scenario, overrides);
  if (!o.seeds.empty())
  {
    sc.seeds = o.seeds;
  }
  if (!o.schemes.empty())
  {
    sc.schemes.clear();
    for (const auto& s : o.schemes)
    {
      sc.schemes.push_back(parse_scheme(s));
    }
  }
  if (o.no_sweep)
  {
    sc.sweep.clear();
  }
  const auto jobs = o.jobs > 0 ? o.jobs : default_jobs();
  const auto cells = sweep(sc.config(sc.schemes.front(), sc.seeds.front()), sc.sweep, sc.schemes,
                           sc.seeds, jobs);

  std::vector<std::string> axis_names;
  for (const auto& a : sc.sweep)
  {
    axis_names.push_back(a.name);
  }
  auto write_csv = [&](std::ostream& os)
  {
    write_csv_header(os, axis_names);
    for (const auto& c : cells)
    {
      write_csv_row(os, c.record, c.axes);
    }
  };
  auto results_json = [&]()
  {
    auto arr = nlohmann::json::array();
    for (const auto& c : cells)
    {
      auto j = to_json(c.record);
      auto axes = nlohmann::json::object();
      for (const auto& a : c.axes)
      {
        axes[a.name] = a.value;
      }
      j["axes"] = axes;
      arr.push_back(std::move(j));
    }
    return arr;
  };

  if (o.out.empty())
  {
    if (o.format == "json")
    {
      std::cout << results_json().dump(2) << '\n';
    }
    else
    {
      write_csv(std::cout);
    }
    return 0;
  }

  fs::create_directories(o.out);
  {
    auto os = open_output(fs::path{o.out} / "metrics.csv");
    write_csv(os);
  }
  {
    auto os = open_output(fs::path{o.out} / "metrics.json");
    os << results_json().dump(2) << '\n';
  }
  nlohmann::json manifest;
  manifest["tool"] = "flexonc";
  manifest["version"] = version;
  manifest["scenario"] = sc.name;
  manifest["config_hash"] = config_hash(sc);
  manifest["config"] = serialize_scenario(sc);
  manifest["seeds"] = sc.seeds;
  manifest["jobs"] = jobs;
  auto runs = nlohmann::json::array();
  for (const auto& c : cells)
  {
    auto axes = nlohmann::json::object();
    for (const auto& a : c.axes)
    {
      axes[a.name] = a.value;
    }
    runs.push_back({{"scheme", to_string(c.scheme)},
                    {"seed", c.seed},
                    {"axes", axes},
                    {"trace_hash", c.record.trace_hash}});
  }
  manifest["runs"] = runs;
  {
    auto os = open_output(fs::path{o.out} / "manifest.json");
    os << manifest.dump(2) << '\n';
  }
  std::cerr << cells.size() << " runs written to " << o.out << '\n';
  return 0;
}

/*------------------------------------------------------------------------------------------------*/

struct AnalyzeOptions
{
  GridSpec grid;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  unsigned jobs = 0;
};

std::string
relation(const DeliveryParams& d)
{
  const auto flex = p_deliver_coded_flexonc(d);
  const auto bend = p_deliver_coded_bend(d);
  if (flex == bend)
  {
    return d.p == 1.0 || d.N == 1 ? "equal-boundary" : "equal";
  }
  return flex > bend ? "greater" : "less";
}

int
cmd_analyze(const AnalyzeOptions& o)
{
  if (o.trials < 1)
  {
    throw ConfigError{"trials", "must be at least 1"};
  }
  const auto points = o.grid.points();
  const auto jobs = o.jobs > 0 ? o.jobs : default_jobs();
  const auto rows = cross_validate(points, o.trials, o.seed, jobs);
  const auto report = verify_inequality(points);

  std::ostringstream csv;
  csv << "p,N,H,m,model,exact,estimate,stderr,z,flexonc_vs_bend\n";
  for (const auto& r : rows)
  {
    const auto& d = r.params;
    csv << format_number(d.p) << ',' << d.N << ',' << d.H << ',' << d.m << ','
        << to_string(r.model) << ',' << format_number(r.exact) << ','
        << format_number(r.estimate.mean) << ',' << format_number(r.estimate.stderr_) << ','
        << format_number(r.z) << ',' << relation(d) << '\n';
  }
  nlohmann::json rep;
  rep["strict_checked"] = report.strict_checked;
  rep["equal_checked"] = report.equal_checked;
  rep["gap_series_checked"] = report.gap_checked;
  auto viol = nlohmann::json::array();
  for (const auto& v : report.violations)
  {
    viol.push_back({{"p", v.params.p}, {"N", v.params.N}, {"H", v.params.H}, {"m", v.params.m},
                    {"what", v.what}});
  }
  rep["violations"] = viol;
  rep["ok"] = report.ok();
  rep["trials"] = o.trials;
  rep["seed"] = o.seed;

  if (!o.out.empty())
  {
    fs::create_directories(o.out);
    auto os = open_output(fs::path{o.out} / "analysis.csv");
    os << csv.str();
    auto js = open_output(fs::path{o.out} / "inequality.json");
    js << rep.dump(2) << '\n';
  }
  else if (o.format == "json")
  {
    nlohmann::json all;
    all["inequality"] = rep;
    auto arr = nlohmann::json::array();
    for (const auto& r : rows)
    {
      arr.push_back({{"p", r.params.p}, {"N", r.params.N}, {"H", r.params.H}, {"m", r.params.m},
                     {"model", to_string(r.model)}, {"exact", r.exact},
                     {"estimate", r.estimate.mean}, {"stderr", r.estimate.stderr_}, {"z", r.z},
                     {"flexonc_vs_bend", relation(r.params)}});
    }
    all["rows"] = arr;
    std::cout << all.dump(2) << '\n';
  }
  else
  {
    std::cout << csv.str();
  }
  std::cerr << "inequality: " << report.strict_checked << " strict, " << report.equal_checked
            << " boundary equalities, " << report.gap_checked << " gap series, "
            << report.violations.size() << " violations\n";
  for (const auto& v : report.violations)
  {
    std::cerr << "  p=" << v.params.p << " N=" << v.params.N << " H=" << v.params.H
              << " m=" << v.params.m << ": " << v.what << '\n';
  }
  return report.ok() ? 0 : 1;
}

int
cmd_list()
{
  for (const auto& b : builtin_scenarios())
  {
    const auto s = parse_scenario(b.text);
    std::cout << b.name << "\t" << s.topology.build().size() << " nodes, " << s.flows.size()
              << " flows\t" << s.description << '\n';
  }
  return 0;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{"FlexONC mesh network simulator"};
  app.set_version_flag("--version", std::string{version});
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "run a scenario file or built-in scenario");
  run_cmd->add_option("scenario", run.scenario, "path or built-in name")->required();
  run_cmd->add_option("--set", run.sets, "dotted override, e.g. channel.ber=1e-5");
  run_cmd->add_option("--seed", run.seeds, "replace the scenario seeds");
  run_cmd->add_option("--scheme", run.schemes, "replace the scenario schemes");
  run_cmd->add_option("--out", run.out, "output directory for CSV, JSON and manifest");
  run_cmd->add_option("--format", run.format, "stdout format without --out")
      ->check(CLI::IsMember({"csv", "json"}));
  run_cmd->add_option("--jobs", run.jobs, "worker threads (default FLEXONC_JOBS or all cores)")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--no-sweep", run.no_sweep, "ignore the scenario sweep axes");

  AnalyzeOptions an;
  auto* an_cmd = app.add_subcommand("analyze", "closed-form vs Monte-Carlo delivery report");
  an_cmd->add_option("--p", an.grid.p, "link success probabilities")->delimiter(',');
  an_cmd->add_option("--N", an.grid.N, "forwarders per hop")->delimiter(',');
  an_cmd->add_option("--H", an.grid.H, "hop counts")->delimiter(',');
  an_cmd->add_option("--m", an.grid.m, "coding partners")->delimiter(',');
  an_cmd->add_option("--trials", an.trials, "Monte-Carlo trials per point and model");
  an_cmd->add_option("--seed", an.seed);
  an_cmd->add_option("--out", an.out, "output directory");
  an_cmd->add_option("--format", an.format)->check(CLI::IsMember({"csv", "json"}));
  an_cmd->add_option("--jobs", an.jobs)->check(CLI::PositiveNumber);

  auto* list_cmd = app.add_subcommand("list", "list built-in scenarios");

  std::string show_name;
  std::vector<std::string> show_sets;
  auto* show_cmd = app.add_subcommand("show", "print a scenario in canonical form");
  show_cmd->add_option("scenario", show_name)->required();
  show_cmd->add_option("--set", show_sets);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::Success& e)
  {
    return app.exit(e);
  }
  catch (const CLI::ParseError& e)
  {
    app.exit(e);
    return 2;
  }

  try
  {
    if (*run_cmd)
    {
      return cmd_run(run);
    }
    if (*an_cmd)
    {
      return cmd_analyze(an);
    }
    if (*list_cmd)
    {
      return cmd_list();
    }
    if (*show_cmd)
    {
      std::vector<Override> overrides;
      for (const auto& s : show_sets)
      {
        overrides.push_back(parse_override(s));
      }
      std::cout << serialize_scenario(resolve_scenario(show_name, overrides));
      return 0;
    }
  }
  catch (const ConfigError& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
