#pragma once

#include "iamod/network.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace iamod {

using DemandId = StrongId<struct DemandTag>;
using RegionId = StrongId<struct RegionTag>;

/// One origin-destination pair; rate in users/minute.
struct Demand {
  DemandId id;
  RegionId region;
  NodeId origin;
  NodeId destination;
  double rate = 0.0;
};

struct Region {
  RegionId id;
  double population = 0.0;
  std::vector<DemandId> demands;  // ascending
};

struct Parameters {
  double fleet_cap = 0.0;        // vehicles
  double time_threshold = 20.0;  // minutes
  double gamma_reb = 1e-3;
  double gamma_time = 1e-3;
};

struct RegionPopulation {
  RegionId id;
  double population = 0.0;
};

/// Graph, demands, regions and run parameters. Demands and regions are sorted
/// by id; a demand's position is its commodity index in the flow LPs.
struct Scenario {
  IntermodalGraph graph;
  std::vector<Demand> demands;
  std::vector<Region> regions;
  Parameters params;

  // Dense lookups, parallel to `demands`.
  std::vector<std::size_t> origin_index;
  std::vector<std::size_t> destination_index;
  std::vector<std::size_t> region_index;

  std::size_t num_demands() const { return demands.size(); }
  double total_population() const;
};

/// Validates and cross-links the parts of a scenario.
Scenario make_scenario(IntermodalGraph graph, std::vector<Demand> demands,
                       std::vector<RegionPopulation> regions, Parameters params);

/// Sum of all demand rates, users/minute.
double total_demand_rate(const Scenario& scenario);

enum class RateUnit { UsersPerMinute, UsersPerHour };
std::optional<RateUnit> parse_rate_unit(std::string_view text);

std::vector<Demand> read_demands_csv(std::string_view text);

struct ParamsFile {
  Parameters params;
  std::vector<RegionPopulation> regions;
  std::string regions_file;  // optional sibling table, as written in the file
};

ParamsFile read_params(std::string_view text);
std::vector<RegionPopulation> read_regions_csv(std::string_view text);

Scenario load_scenario(const std::string& network_path, const std::string& demand_path,
                       const std::string& params_path);

std::string write_demands_csv(const Scenario& scenario);
std::string write_params(const Scenario& scenario);

}  // namespace iamod
