#include "iamod/scenario.hpp"

#include "iamod/error.hpp"
#include "text_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>

namespace iamod {

double Scenario::total_population() const {
  double n = 0.0;
  for (const auto& r : regions) n += r.population;
  return n;
}

Scenario make_scenario(IntermodalGraph graph, std::vector<Demand> demands,
                       std::vector<RegionPopulation> regions, Parameters params) {
  const auto& p = params;
  if (!(p.fleet_cap >= 0.0))
    throw Error(ErrorCode::InvalidParameter, fmt::format("fleet_cap = {}", p.fleet_cap));
  if (!(p.time_threshold > 0.0) || !std::isfinite(p.time_threshold))
    throw Error(ErrorCode::InvalidParameter, fmt::format("t_max_min = {}", p.time_threshold));
  if (!(p.gamma_reb > 0.0) || !std::isfinite(p.gamma_reb))
    throw Error(ErrorCode::InvalidParameter, fmt::format("gamma_reb = {}", p.gamma_reb));
  if (!(p.gamma_time > 0.0) || !std::isfinite(p.gamma_time))
    throw Error(ErrorCode::InvalidParameter, fmt::format("gamma_time = {}", p.gamma_time));

  Scenario s;
  s.params = params;

  std::ranges::sort(regions, {}, &RegionPopulation::id);
  std::map<std::int64_t, std::size_t> region_lookup;
  for (const auto& r : regions) {
    if (!(r.population >= 0.0) || !std::isfinite(r.population))
      throw Error(ErrorCode::InvalidParameter,
                  fmt::format("region {} population {}", r.id.value, r.population));
    if (!region_lookup.emplace(r.id.value, s.regions.size()).second)
      throw Error(ErrorCode::InvalidParameter, fmt::format("duplicate region id {}", r.id.value));
    s.regions.push_back(Region{r.id, r.population, {}});
  }

  std::ranges::sort(demands, {}, &Demand::id);
  for (std::size_t m = 0; m < demands.size(); ++m) {
    const Demand& d = demands[m];
    if (m > 0 && demands[m - 1].id == d.id)
      throw Error(ErrorCode::InvalidDemand, fmt::format("duplicate demand id {}", d.id.value));
    if (!(d.rate > 0.0) || !std::isfinite(d.rate))
      throw Error(ErrorCode::DemandRateNonPositive,
                  fmt::format("demand {} has rate {}", d.id.value, d.rate));
    const auto o = graph.node_index(d.origin);
    const auto t = graph.node_index(d.destination);
    if (!o || !t)
      throw Error(ErrorCode::UnknownNode, fmt::format("demand {} references node {}", d.id.value,
                                                      (!o ? d.origin : d.destination).value));
    if (graph.node(*o).layer != Layer::Origin || graph.node(*t).layer != Layer::Destination)
      throw Error(ErrorCode::InvalidDemand,
                  fmt::format("demand {} must run from an origin node to a destination node",
                              d.id.value));
    if (*o == *t)
      throw Error(ErrorCode::InvalidDemand, fmt::format("demand {} has origin = destination", d.id.value));
    const auto r = region_lookup.find(d.region.value);
    if (r == region_lookup.end())
      throw Error(ErrorCode::RegionlessDemand,
                  fmt::format("demand {} names unknown region {}", d.id.value, d.region.value));
    s.origin_index.push_back(*o);
    s.destination_index.push_back(*t);
    s.region_index.push_back(r->second);
    s.regions[r->second].demands.push_back(d.id);
  }

  s.graph = std::move(graph);
  s.demands = std::move(demands);
  return s;
}

double total_demand_rate(const Scenario& scenario) {
  return std::accumulate(scenario.demands.begin(), scenario.demands.end(), 0.0,
                         [](double acc, const Demand& d) { return acc + d.rate; });
}

std::optional<RateUnit> parse_rate_unit(std::string_view text) {
  if (text == "users/minute" || text == "users/min") return RateUnit::UsersPerMinute;
  if (text == "users/hour" || text == "users/h") return RateUnit::UsersPerHour;
  return std::nullopt;
}

std::vector<Demand> read_demands_csv(std::string_view text) {
  const auto rows = detail::lines(text);
  std::vector<Demand> out;
  bool header_seen = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto line = detail::trim(rows[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = detail::split(line, ',');
    if (!header_seen) {
      const std::vector<std::string> expected = {"demand_id", "region_id", "origin_node",
                                                 "dest_node", "rate", "rate_unit"};
      if (cols != expected)
        throw Error(ErrorCode::ParseError,
                    "demand file header must be demand_id,region_id,origin_node,dest_node,rate,rate_unit");
      header_seen = true;
      continue;
    }
    const auto where = fmt::format("demand file line {}", i + 1);
    if (cols.size() < 5 || cols.size() > 6)
      throw Error(ErrorCode::ParseError, where + ": expected 6 columns");
    if (cols.size() == 5 || cols[5].empty())
      throw Error(ErrorCode::UnitTagMissing, where);
    const auto unit = parse_rate_unit(cols[5]);
    if (!unit) throw Error(ErrorCode::ParseError, where + ": unknown rate unit '" + cols[5] + "'");
    Demand d;
    d.id = DemandId{detail::parse_int(cols[0], where)};
    d.region = RegionId{detail::parse_int(cols[1], where)};
    d.origin = NodeId{detail::parse_int(cols[2], where)};
    d.destination = NodeId{detail::parse_int(cols[3], where)};
    d.rate = detail::parse_double(cols[4], where);
    if (*unit == RateUnit::UsersPerHour) d.rate /= 60.0;
    out.push_back(d);
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, "demand file has no header");
  return out;
}

std::vector<RegionPopulation> read_regions_csv(std::string_view text) {
  std::vector<RegionPopulation> out;
  bool header_seen = false;
  const auto rows = detail::lines(text);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto line = detail::trim(rows[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto cols = detail::split(line, ',');
    if (!header_seen) {
      if (cols != std::vector<std::string>{"region_id", "population"})
        throw Error(ErrorCode::ParseError, "region table header must be region_id,population");
      header_seen = true;
      continue;
    }
    const auto where = fmt::format("region table line {}", i + 1);
    if (cols.size() != 2) throw Error(ErrorCode::ParseError, where + ": expected 2 columns");
    out.push_back({RegionId{detail::parse_int(cols[0], where)}, detail::parse_double(cols[1], where)});
  }
  return out;
}

ParamsFile read_params(std::string_view text) {
  ParamsFile out;
  const auto rows = detail::lines(text);
  std::size_t table_start = rows.size();
  bool has_cap = false, has_threshold = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto line = detail::trim(rows[i]);
    if (line.empty() || line.front() == '#') continue;
    if (line.starts_with("region_id")) {
      table_start = i;
      break;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::ParseError, fmt::format("params line {}: expected key = value", i + 1));
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    const auto where = fmt::format("params key '{}'", key);
    if (key == "fleet_cap") {
      out.params.fleet_cap = detail::parse_double(value, where);
      has_cap = true;
    } else if (key == "t_max_min") {
      out.params.time_threshold = detail::parse_double(value, where);
      has_threshold = true;
    } else if (key == "gamma_reb") {
      out.params.gamma_reb = detail::parse_double(value, where);
    } else if (key == "gamma_time") {
      out.params.gamma_time = detail::parse_double(value, where);
    } else if (key == "regions_file") {
      out.regions_file = std::string(value);
    } else {
      throw Error(ErrorCode::ParseError, fmt::format("params line {}: unknown key '{}'", i + 1, key));
    }
  }
  if (!has_cap || !has_threshold)
    throw Error(ErrorCode::InvalidParameter, "params must set fleet_cap and t_max_min");
  if (table_start < rows.size()) {
    std::string rest;
    for (std::size_t i = table_start; i < rows.size(); ++i) {
      rest += rows[i];
      rest += '\n';
    }
    out.regions = read_regions_csv(rest);
  }
  return out;
}

Scenario load_scenario(const std::string& network_path, const std::string& demand_path,
                       const std::string& params_path) {
  auto graph = load_network(network_path);
  auto demands = read_demands_csv(detail::read_file(demand_path));
  auto params = read_params(detail::read_file(params_path));
  if (!params.regions_file.empty()) {
    const auto sibling =
        std::filesystem::path(params_path).parent_path() / params.regions_file;
    auto extra = read_regions_csv(detail::read_file(sibling.string()));
    params.regions.insert(params.regions.end(), extra.begin(), extra.end());
  }
  return make_scenario(std::move(graph), std::move(demands), std::move(params.regions),
                       params.params);
}

std::string write_demands_csv(const Scenario& scenario) {
  std::string out = "demand_id,region_id,origin_node,dest_node,rate,rate_unit\n";
  for (const auto& d : scenario.demands)
    out += fmt::format("{},{},{},{},{},users/minute\n", d.id.value, d.region.value, d.origin.value,
                       d.destination.value, d.rate);
  return out;
}

std::string write_params(const Scenario& scenario) {
  const auto& p = scenario.params;
  std::string out = fmt::format("fleet_cap = {}\nt_max_min = {}\ngamma_reb = {}\ngamma_time = {}\n\n",
                                p.fleet_cap, p.time_threshold, p.gamma_reb, p.gamma_time);
  out += "region_id,population\n";
  for (const auto& r : scenario.regions) out += fmt::format("{},{}\n", r.id.value, r.population);
  return out;
}

}  // namespace iamod
