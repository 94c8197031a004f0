#include "iamod/cli.hpp"

#include "iamod/error.hpp"
#include "iamod/instances.hpp"
#include "iamod/lp_mps.hpp"
#include "iamod/pathalloc.hpp"
#include "iamod/planner.hpp"
#include "iamod/report.hpp"
#include "text_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>

namespace iamod {

namespace {

namespace fs = std::filesystem;

struct ScenarioArgs {
  std::string dir;
  std::string network;
  std::string demands;
  std::string params;

  void add_to(CLI::App& app) {
    app.add_option("--scenario", dir, "directory holding network.json, demands.csv and params.txt");
    app.add_option("--network", network, "network file (overrides --scenario)");
    app.add_option("--demands", demands, "demand file (overrides --scenario)");
    app.add_option("--params", params, "parameter file (overrides --scenario)");
  }

  std::string path(const std::string& explicit_path, const char* name) const {
    if (!explicit_path.empty()) return explicit_path;
    if (dir.empty())
      throw Error(ErrorCode::MissingFile, fmt::format("no {} given; pass --scenario DIR or the file option", name));
    return (fs::path(dir) / name).string();
  }
  std::string network_path() const { return path(network, "network.json"); }
  std::string demands_path() const { return path(demands, "demands.csv"); }
  std::string params_path() const { return path(params, "params.txt"); }
};

struct CommonArgs {
  std::string out;
  bool deterministic = false;

  void add_to(CLI::App& app) {
    app.add_option("--out", out, "output directory (default: $IAMOD_OUT_DIR or .)");
    app.add_flag("--deterministic", deterministic, "omit the timestamp from the run manifest");
  }

  fs::path out_dir() const {
    fs::path dir = ".";
    if (!out.empty()) {
      dir = out;
    } else if (const char* env = std::getenv("IAMOD_OUT_DIR"); env && *env) {
      dir = env;
    }
    fs::create_directories(dir);
    return dir;
  }
};

struct LoadedScenario {
  std::shared_ptr<const Scenario> scenario;
  RunManifest manifest;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

LoadedScenario load(const ScenarioArgs& args, const CommonArgs& common) {
  LoadedScenario out;
  const auto net = args.network_path(), dem = args.demands_path(), par = args.params_path();
  out.scenario = std::make_shared<const Scenario>(load_scenario(net, dem, par));
  out.manifest.version = kVersion;
  out.manifest.file_hashes["network"] = sha256_hex(detail::read_file(net));
  out.manifest.file_hashes["demands"] = sha256_hex(detail::read_file(dem));
  const auto params_text = detail::read_file(par);
  out.manifest.file_hashes["params"] = sha256_hex(params_text);
  if (const auto regions = read_params(params_text).regions_file; !regions.empty())
    out.manifest.file_hashes["regions"] =
        sha256_hex(detail::read_file((fs::path(par).parent_path() / regions).string()));
  out.manifest.params = out.scenario->params;
  if (!common.deterministic) out.manifest.timestamp = utc_timestamp();
  return out;
}

void write_output(const fs::path& dir, const std::string& name, std::string_view text, std::ostream& out) {
  detail::write_file((dir / name).string(), text);
  fmt::print(out, "wrote {}\n", (dir / name).string());
}

Objective objective_from(const std::string& text) {
  const auto o = parse_objective(text);
  if (!o) throw CLI::ValidationError("--objective", "expected time or fairness");
  return *o;
}

std::string solution_name(Objective o) { return fmt::format("solution_{}.csv", to_string(o)); }

FlowSolution read_stored_solution(std::shared_ptr<const Scenario> scenario, const std::string& explicit_path,
                                  const fs::path& dir, Objective objective) {
  const auto path = explicit_path.empty() ? (dir / solution_name(objective)).string() : explicit_path;
  if (!fs::exists(path))
    throw Error(ErrorCode::MissingFile,
                fmt::format("solution file '{}' not found; run `solve --objective {}` first", path,
                            to_string(objective)));
  return read_solution_csv(std::move(scenario), detail::read_file(path));
}

std::string allocation_metrics(const AllocationResult& result, const FlowSolution& solution,
                               std::string_view manifest_id) {
  const auto& sc = *solution.scenario;
  std::string out = fmt::format("# iamod-allocation-metrics v1 manifest={}\n", manifest_id);
  out += fmt::format("objective = {}\n", to_string(solution.objective));
  out += fmt::format("path_unfairness = {}\n", path_unfairness_summary(result.per_demand, sc));
  out += fmt::format("flow_unfairness = {}\n", flow_metrics(solution).j_acc);
  out += fmt::format("total_path_objective = {}\n", result.total);
  double residual = 0.0, removed = 0.0;
  std::size_t cycles = 0;
  for (const auto& a : result.per_demand) {
    residual = std::max(residual, a.residual);
    removed += a.removed_time_mass;
    cycles += a.canceled_cycles;
  }
  out += fmt::format("max_reconstruction_residual = {}\n", residual);
  out += fmt::format("canceled_cycles = {}\n", cycles);
  out += fmt::format("removed_cycle_time = {}\n", removed);
  out += fmt::format("failed_demands = {}\n", result.failures.size());
  for (const auto& f : result.failures) out += fmt::format("failure.{} = {}\n", f.demand.value, to_string(f.code));
  return out;
}

AllocationResult allocate(const FlowSolution& solution, const AllocationOptions& options, std::ostream& err) {
  auto result = run_algorithm1(solution, solution.scenario->params.time_threshold, options);
  for (const auto& f : result.failures) fmt::print(err, "warning: demand {}: {}\n", f.demand.value, f.message);
  for (const auto& a : result.per_demand)
    if (a.canceled_cycles > 0)
      fmt::print(err, "warning: demand {}: canceled {} flow cycle(s), {} min per user removed\n",
                 solution.scenario->demands[static_cast<std::size_t>(a.demand)].id.value, a.canceled_cycles,
                 a.removed_time_mass);
  return result;
}

struct SolveArgs {
  std::string objective = "time";
  bool export_mps = false;
  std::string import_path;
  double tol = 1e-9;
  long max_iterations = 1'000'000;
};

void run_solve(const LoadedScenario& ls, const SolveArgs& args, const fs::path& dir, std::ostream& out,
               std::ostream& err) {
  const auto objective = objective_from(args.objective);
  const auto id = ls.manifest.id();
  write_output(dir, "manifest.json", ls.manifest.to_json(), out);

  if (args.export_mps) {
    const auto model = build_model(*ls.scenario, objective);
    lp::MpsOptions mps;
    mps.comment = fmt::format("iamod-model v1 objective={} manifest={}", to_string(objective), id);
    write_output(dir, fmt::format("model_{}.mps", to_string(objective)), export_mps(model, mps), out);
    return;
  }

  FlowSolution solution;
  std::string extra;
  if (!args.import_path.empty()) {
    const auto model = build_model(*ls.scenario, objective);
    const auto imported = import_solution(model, detail::read_file(args.import_path), args.tol);
    solution = solution_from_columns(ls.scenario, objective, imported.solution.x);
    extra = fmt::format("import_max_violation = {}\nimport_feasible = {}\n", imported.solution.max_violation,
                        imported.infeasible ? "false" : "true");
    if (imported.infeasible)
      fmt::print(err, "warning: imported solution violates {} by {}\n", imported.worst_constraint,
                 imported.solution.max_violation);
  } else {
    lp::SimplexOptions<double> options;
    options.feasibility_tol = args.tol;
    options.optimality_tol = args.tol;
    options.max_iterations = args.max_iterations;
    solution = solve(ls.scenario, objective, options);
  }
  write_output(dir, solution_name(objective), write_solution_csv(solution, id), out);
  write_output(dir, fmt::format("metrics_{}.txt", to_string(objective)), write_metrics(solution, id) + extra, out);
  const auto m = flow_metrics(solution);
  fmt::print(out, "{}: travel time {:.4f} min, unfairness {:.4f} min, fleet {:.4f}/{}\n", to_string(objective),
             m.avg_travel_time, m.j_acc, m.fleet_usage, ls.scenario->params.fleet_cap);
}

void run_allocate(const LoadedScenario& ls, Objective objective, const std::string& solution_path,
                  const AllocationOptions& options, const fs::path& dir, std::ostream& out, std::ostream& err) {
  const auto solution = read_stored_solution(ls.scenario, solution_path, dir, objective);
  const auto id = ls.manifest.id();
  const auto result = allocate(solution, options, err);
  const auto name = to_string(objective);
  write_output(dir, "manifest.json", ls.manifest.to_json(), out);
  write_output(dir, fmt::format("allocation_{}.csv", name), write_allocation_csv(result.per_demand, *ls.scenario, id),
               out);
  write_output(dir, fmt::format("paths_{}.csv", name), write_paths_csv(result.per_demand, *ls.scenario, id), out);
  write_output(dir, fmt::format("allocation_metrics_{}.txt", name), allocation_metrics(result, solution, id), out);
  fmt::print(out, "{}: path-level unfairness {:.4f} min\n", name,
             path_unfairness_summary(result.per_demand, *ls.scenario));
}

struct ReportArgs {
  std::string objective = "time";
  bool compare = false;
  double bin_width = 2.0;
  bool svg = false;
};

struct Histograms {
  FlowSolution solution;
  AllocationResult allocation;
  std::vector<ModalShareBin> od;
  std::vector<ModalShareBin> path;
};

Histograms histograms(const LoadedScenario& ls, Objective objective, const fs::path& dir, double width,
                      std::ostream& err) {
  Histograms h{read_stored_solution(ls.scenario, {}, dir, objective), {}, {}, {}};
  h.allocation = allocate(h.solution, {}, err);
  h.od = modal_share_histogram(h.solution, width);
  h.path = modal_share_histogram(h.allocation.per_demand, *ls.scenario, width);
  return h;
}

void run_report(const LoadedScenario& ls, const ReportArgs& args, const fs::path& dir, std::ostream& out,
                std::ostream& err) {
  const auto id = ls.manifest.id();
  write_output(dir, "manifest.json", ls.manifest.to_json(), out);
  auto emit = [&](const std::string& stem, const std::vector<ModalShareBin>& bins) {
    write_output(dir, stem + ".csv", write_histogram_csv(bins, id), out);
    if (args.svg) write_output(dir, stem + ".svg", write_histogram_svg(bins, stem, id), out);
  };

  auto emit_single = [&](Objective objective, const Histograms& h) {
    const auto name = std::string(to_string(objective));
    emit("histogram_" + name + "_od", h.od);
    emit("histogram_" + name + "_path", h.path);
    write_output(dir, "regions_" + name + ".csv", write_region_table_csv(region_unfairness_table(h.solution), id), out);
  };

  if (!args.compare) {
    const auto objective = objective_from(args.objective);
    emit_single(objective, histograms(ls, objective, dir, args.bin_width, err));
    return;
  }

  const auto time = histograms(ls, Objective::MinTime, dir, args.bin_width, err);
  const auto fair = histograms(ls, Objective::MinUnfairness, dir, args.bin_width, err);
  emit_single(Objective::MinTime, time);
  emit_single(Objective::MinUnfairness, fair);
  emit("histogram_diff_od", histogram_difference(fair.od, time.od));
  emit("histogram_diff_path", histogram_difference(fair.path, time.path));

  const auto mt = flow_metrics(time.solution), mf = flow_metrics(fair.solution);
  const double pt = path_unfairness_summary(time.allocation.per_demand, *ls.scenario);
  const double pf = path_unfairness_summary(fair.allocation.per_demand, *ls.scenario);
  std::string table = fmt::format("# iamod-comparison v1 manifest={}\n", id);
  table += "metric,min_time,min_unfairness\n";
  table += fmt::format("travel_time_min,{},{}\n", mt.avg_travel_time, mf.avg_travel_time);
  table += fmt::format("unfairness_od_min,{},{}\n", mt.j_acc, mf.j_acc);
  table += fmt::format("unfairness_path_min,{},{}\n", pt, pf);
  table += fmt::format("fleet_usage,{},{}\n", mt.fleet_usage, mf.fleet_usage);
  write_output(dir, "comparison.csv", table, out);
  fmt::print(out, "{:<22}{:>12}{:>16}\n", "", "min-time", "min-unfairness");
  fmt::print(out, "{:<22}{:>12.4f}{:>16.4f}\n", "travel time [min]", mt.avg_travel_time, mf.avg_travel_time);
  fmt::print(out, "{:<22}{:>12.4f}{:>16.4f}\n", "unfairness o-d [min]", mt.j_acc, mf.j_acc);
  fmt::print(out, "{:<22}{:>12.4f}{:>16.4f}\n", "unfairness path [min]", pt, pf);
}

int exit_code_for(const Error& e) {
  switch (category_of(e.code())) {
    case ErrorCategory::Data: return kExitData;
    case ErrorCategory::Infeasible: return kExitInfeasible;
    case ErrorCategory::Internal: return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Intermodal mobility-on-demand planning: min-time and min-unfairness flows, path allocation, reports",
               "iamod"};
  app.require_subcommand(1);

  ScenarioArgs scenario;
  CommonArgs common;
  SolveArgs solve_args;
  ReportArgs report_args;
  AllocationOptions alloc_options;
  std::string alloc_objective = "time";
  std::string solution_path;
  bool absolute = false;

  auto* validate = app.add_subcommand("validate", "load and check a scenario");
  scenario.add_to(*validate);

  auto* solve_cmd = app.add_subcommand("solve", "solve the min-time or min-unfairness flow problem");
  scenario.add_to(*solve_cmd);
  common.add_to(*solve_cmd);
  solve_cmd->add_option("--objective", solve_args.objective, "time or fairness")->check(CLI::IsMember({"time", "fairness"}));
  solve_cmd->add_flag("--export-mps", solve_args.export_mps, "write the model as fixed-format MPS instead of solving");
  solve_cmd->add_option("--import-solution", solve_args.import_path, "read `name value` lines from an external solver");
  solve_cmd->add_option("--tol", solve_args.tol, "feasibility and optimality tolerance");
  solve_cmd->add_option("--max-iter", solve_args.max_iterations, "simplex iteration limit");

  auto* alloc_cmd = app.add_subcommand("allocate", "decompose a stored solution into paths");
  scenario.add_to(*alloc_cmd);
  common.add_to(*alloc_cmd);
  alloc_cmd->add_option("--objective", alloc_objective, "which stored solution to read")->check(CLI::IsMember({"time", "fairness"}));
  alloc_cmd->add_option("--solution", solution_path, "solution file (default: OUT/solution_<objective>.csv)");
  alloc_cmd->add_option("--support-tol", alloc_options.support_tol, "flow threshold for the support subgraph");
  alloc_cmd->add_option("--path-cap", alloc_options.path_cap, "maximum number of paths per demand");
  alloc_cmd->add_option("--threads", alloc_options.threads, "worker threads");
  alloc_cmd->add_flag("--absolute", absolute, "allocate users/minute instead of per-user fractions");

  auto* report_cmd = app.add_subcommand("report", "histograms, region tables and comparisons");
  scenario.add_to(*report_cmd);
  common.add_to(*report_cmd);
  report_cmd->add_option("--objective", report_args.objective, "time or fairness")->check(CLI::IsMember({"time", "fairness"}));
  report_cmd->add_flag("--compare", report_args.compare, "compare the stored min-time and min-unfairness solutions");
  report_cmd->add_option("--bin-width", report_args.bin_width, "histogram bin width in minutes");
  report_cmd->add_flag("--svg", report_args.svg, "also write SVG charts");

  auto* demo = app.add_subcommand("demo", "write the bundled synthetic city and run the full pipeline");
  common.add_to(*demo);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error: {}\n{}", e.what(), app.help());
    return kExitUsage;
  }

  try {
    if (*validate) {
      const auto ls = load(scenario, common);
      const auto& sc = *ls.scenario;
      fmt::print(out, "ok: {} nodes, {} arcs, {} demands, {} regions, total rate {} users/min\n", sc.graph.num_nodes(),
                 sc.graph.num_arcs(), sc.num_demands(), sc.regions.size(), total_demand_rate(sc));
    } else if (*solve_cmd) {
      run_solve(load(scenario, common), solve_args, common.out_dir(), out, err);
    } else if (*alloc_cmd) {
      alloc_options.scaling = absolute ? FlowScaling::Absolute : FlowScaling::PerUnit;
      run_allocate(load(scenario, common), objective_from(alloc_objective), solution_path, alloc_options,
                   common.out_dir(), out, err);
    } else if (*report_cmd) {
      run_report(load(scenario, common), report_args, common.out_dir(), out, err);
    } else if (*demo) {
      const auto dir = common.out_dir();
      write_scenario_files(demo_scenario(), dir / "scenario");
      scenario.dir = (dir / "scenario").string();
      const auto ls = load(scenario, common);
      for (const auto objective : {Objective::MinTime, Objective::MinUnfairness}) {
        SolveArgs sa;
        sa.objective = std::string(to_string(objective));
        run_solve(ls, sa, dir, out, err);
        run_allocate(ls, objective, {}, {}, dir, out, err);
      }
      ReportArgs ra;
      ra.compare = true;
      ra.svg = true;
      run_report(ls, ra, dir, out, err);
    }
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return exit_code_for(e);
  } catch (const CLI::ValidationError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    fmt::print(err, "internal error: {}\n", e.what());
    return kExitInternal;
  }
  return kExitOk;
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace iamod
