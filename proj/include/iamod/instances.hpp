#pragma once

#include "iamod/scenario.hpp"

#include <filesystem>

namespace iamod {

/// Synthetic 4x4 grid city with walk, bike, car and transit layers, four
/// regions and twelve demands. The fleet cap binds: short trips that save the
/// most time per vehicle compete with long trips that need cars to stay under
/// the threshold.
Scenario demo_scenario();

/// Two demands in two equally populated regions sharing a 20-vehicle fleet.
/// Either demand alone would use the whole fleet.
Scenario competing_demand_scenario();

/// One demand with a 15-minute car path and a 25-minute walk path; the fleet
/// only allows half of the users into cars, so the flow averages exactly 20.
Scenario diamond_gap_scenario();

/// Multiplies every demand rate and the fleet cap by `factor`.
Scenario scaled(const Scenario& scenario, double factor);

/// Writes network.json, demands.csv and params.txt into `dir`.
void write_scenario_files(const Scenario& scenario, const std::filesystem::path& dir);

}  // namespace iamod
