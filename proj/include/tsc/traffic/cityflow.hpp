#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "tsc/traffic/network.hpp"
#include "tsc/traffic/simulation.hpp"

namespace tsc::traffic {

struct CityflowRoadnet {
  std::shared_ptr<const RoadNetwork> network;
  std::vector<std::string> warnings;  // unsupported fields that were ignored
};

struct CityflowFlow {
  std::vector<ScheduledVehicle> schedule;
  std::vector<std::string> warnings;
};

/// Reads a CityFlow roadnet. Virtual intersections become the network
/// boundary; approach sides are assigned from road geometry (y axis north).
/// Schema violations throw ValidationError naming the JSON path.
CityflowRoadnet parse_cityflow_roadnet(const nlohmann::json& doc);
CityflowRoadnet load_cityflow_roadnet(const std::string& path);

/// Expands CityFlow flow entries (one vehicle every `interval` seconds from
/// `startTime` to `endTime`, inclusive) into a schedule on `net`.
CityflowFlow parse_cityflow_flow(const nlohmann::json& doc, const RoadNetwork& net);
CityflowFlow load_cityflow_flow(const std::string& path, const RoadNetwork& net);

}  // namespace tsc::traffic
