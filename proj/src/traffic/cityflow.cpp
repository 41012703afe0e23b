#include "tsc/traffic/cityflow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "tsc/error.hpp"

namespace tsc::traffic {
namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ValidationError("cityflow schema: missing '" + std::string(key) + "' at " + path);
  }
  return obj.at(key);
}

double number(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) throw ValidationError("cityflow schema: " + path + "/" + key + " must be a number");
  return v.get<double>();
}

std::string text(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw ValidationError("cityflow schema: " + path + "/" + key + " must be a string");
  return v.get<std::string>();
}

const json& array(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_array()) throw ValidationError("cityflow schema: " + path + "/" + key + " must be an array");
  return v;
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

Point point(const json& obj, const std::string& path) {
  return {number(obj, "x", path), number(obj, "y", path)};
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// Counter-clockwise side order starting at East, matching angle 0, 90, 180, 270.
constexpr std::array<Approach, 4> kCcwSides = {Approach::East, Approach::North, Approach::West, Approach::South};

double angle_diff(double a, double b) {
  double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
  return std::min(d, 2.0 * std::numbers::pi - d);
}

// Assigns the four roads around one intersection to sides by angle, keeping
// their cyclic order and choosing the rotation closest to the compass.
std::vector<Approach> assign_sides(const std::vector<double>& angles) {
  std::vector<int> order(angles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return angles[a] < angles[b]; });
  double best = 1e300;
  int best_rot = 0;
  for (int rot = 0; rot < 4; ++rot) {
    double cost = 0.0;
    for (int k = 0; k < 4; ++k) {
      cost += angle_diff(angles[order[k]], (k + rot) % 4 * std::numbers::pi / 2.0);
    }
    if (cost < best - 1e-12) {
      best = cost;
      best_rot = rot;
    }
  }
  std::vector<Approach> out(angles.size());
  for (int k = 0; k < 4; ++k) out[order[k]] = kCcwSides[(k + best_rot) % 4];
  return out;
}

double heading(Point from, Point to) {
  double a = std::atan2(to.y - from.y, to.x - from.x);
  if (a < 0) a += 2.0 * std::numbers::pi;
  return a;
}

struct RoadInfo {
  std::string id;
  std::vector<Point> points;
  std::vector<double> lane_speeds;
  std::string start;
  std::string end;
};

}  // namespace

CityflowRoadnet parse_cityflow_roadnet(const json& doc) {
  CityflowRoadnet result;
  const json& inters = array(doc, "intersections", "$");
  const json& roads_json = array(doc, "roads", "$");
  for (const auto& [key, _] : doc.items()) {
    if (key != "intersections" && key != "roads") result.warnings.push_back("ignored top-level field '" + key + "'");
  }

  NetworkBuilder builder;
  std::unordered_map<std::string, int> node_index;
  std::unordered_map<std::string, Point> node_point;
  std::vector<std::pair<std::size_t, std::string>> real_nodes;
  for (std::size_t i = 0; i < inters.size(); ++i) {
    const std::string path = "$.intersections[" + std::to_string(i) + "]";
    const json& node = inters[i];
    const std::string id = text(node, "id", path);
    const Point p = point(require(node, "point", path), path + ".point");
    node_point[id] = p;
    bool is_virtual = node.contains("virtual") ? node.at("virtual").get<bool>() : false;
    if (!node.contains("virtual") && (!node.contains("roadLinks") || node.at("roadLinks").empty())) is_virtual = true;
    if (!is_virtual) {
      node_index[id] = builder.add_intersection(id, p.x, p.y);
      real_nodes.emplace_back(i, id);
    }
  }

  std::vector<RoadInfo> roads;
  roads.reserve(roads_json.size());
  bool lane_links_warned = false;
  for (std::size_t r = 0; r < roads_json.size(); ++r) {
    const std::string path = "$.roads[" + std::to_string(r) + "]";
    const json& road = roads_json[r];
    RoadInfo info;
    info.id = text(road, "id", path);
    const json& pts = array(road, "points", path);
    if (pts.size() < 2) throw ValidationError("cityflow schema: " + path + ".points needs at least 2 points");
    for (std::size_t k = 0; k < pts.size(); ++k) info.points.push_back(point(pts[k], path + ".points[" + std::to_string(k) + "]"));
    const json& lanes = array(road, "lanes", path);
    for (std::size_t k = 0; k < lanes.size(); ++k) {
      info.lane_speeds.push_back(number(lanes[k], "maxSpeed", path + ".lanes[" + std::to_string(k) + "]"));
    }
    if (info.lane_speeds.empty()) throw ValidationError("cityflow schema: " + path + ".lanes is empty");
    info.start = text(road, "startIntersection", path);
    info.end = text(road, "endIntersection", path);
    for (const std::string& end : {info.start, info.end}) {
      if (!node_point.count(end)) {
        throw ValidationError("cityflow schema: " + path + " references unknown intersection '" + end + "'");
      }
    }
    roads.push_back(std::move(info));
  }

  // Side assignment per real intersection, separately for arriving and leaving roads.
  std::unordered_map<std::string, Approach> side_at_end, side_at_start;
  for (const auto& [_, id] : real_nodes) {
    const Point c = node_point[id];
    std::vector<int> in, out;
    std::vector<double> in_angles, out_angles;
    for (int r = 0; r < static_cast<int>(roads.size()); ++r) {
      const RoadInfo& road = roads[r];
      if (road.end == id) {
        in.push_back(r);
        in_angles.push_back(heading(c, road.points[road.points.size() - 2]));
      }
      if (road.start == id) {
        out.push_back(r);
        out_angles.push_back(heading(c, road.points[1]));
      }
    }
    if (in.size() != 4 || out.size() != 4) {
      throw ValidationError("intersection " + id + ": " + std::to_string(in.size()) + " incoming and " +
                            std::to_string(out.size()) + " outgoing roads (heterogeneous layout unsupported)");
    }
    const auto in_sides = assign_sides(in_angles);
    const auto out_sides = assign_sides(out_angles);
    for (int k = 0; k < 4; ++k) {
      side_at_end[roads[in[k]].id] = in_sides[k];
      side_at_start[roads[out[k]].id] = out_sides[k];
    }
  }

  std::unordered_map<std::string, int> link_of_road;
  for (std::size_t r = 0; r < roads.size(); ++r) {
    const RoadInfo& road = roads[r];
    const bool from_real = node_index.count(road.start) > 0;
    const bool to_real = node_index.count(road.end) > 0;
    if (!from_real && !to_real) {
      result.warnings.push_back("road " + road.id + " connects two virtual intersections; skipped");
      continue;
    }
    const int from = from_real ? node_index[road.start] : kBoundary;
    const int to = to_real ? node_index[road.end] : kBoundary;
    const Approach s_from = from_real ? side_at_start[road.id] : side_at_end[road.id];
    const Approach s_to = to_real ? side_at_end[road.id] : side_at_start[road.id];
    double length = 0.0;
    for (std::size_t k = 1; k < road.points.size(); ++k) {
      length += std::hypot(road.points[k].x - road.points[k - 1].x, road.points[k].y - road.points[k - 1].y);
    }
    const double vmax = *std::max_element(road.lane_speeds.begin(), road.lane_speeds.end());
    const int link = builder.add_link(road.id, from, to, s_from, s_to, length, vmax,
                                      static_cast<int>(road.lane_speeds.size()));
    for (std::size_t k = 0; k < road.lane_speeds.size(); ++k) {
      builder.set_lane_speed(link, static_cast<int>(k), road.lane_speeds[k]);
    }
    link_of_road[road.id] = link;
  }

  // Signal plans are kept as raw phases and matched to the standard set.
  for (const auto& [i, id] : real_nodes) {
    const json& node = inters[i];
    const std::string path = "$.intersections[" + std::to_string(i) + "]";
    const json& links = node.contains("roadLinks") ? node.at("roadLinks") : json::array();
    for (std::size_t k = 0; k < links.size(); ++k) {
      if (links[k].contains("laneLinks") && !lane_links_warned) {
        result.warnings.push_back("roadLinks[].laneLinks ignored: lanes are chosen by turn");
        lane_links_warned = true;
      }
    }
    if (!node.contains("trafficLight")) continue;
    const json& light = node.at("trafficLight");
    if (!light.contains("lightphases")) continue;
    const json& phases = array(light, "lightphases", path + ".trafficLight");
    for (std::size_t p = 0; p < phases.size(); ++p) {
      const std::string ppath = path + ".trafficLight.lightphases[" + std::to_string(p) + "]";
      RawLightPhase raw;
      raw.time = phases[p].contains("time") ? number(phases[p], "time", ppath) : 0.0;
      GreenMask mask = kRightTurnMask;
      for (const auto& idx : array(phases[p], "availableRoadLinks", ppath)) {
        const int li = idx.get<int>();
        if (li < 0 || li >= static_cast<int>(links.size())) {
          throw ValidationError("cityflow schema: " + ppath + ".availableRoadLinks index " + std::to_string(li) +
                                " out of range");
        }
        raw.available_road_links.push_back(li);
        const std::string rl_path = path + ".roadLinks[" + std::to_string(li) + "]";
        const std::string start_road = text(links[li], "startRoad", rl_path);
        const std::string type = text(links[li], "type", rl_path);
        auto side = side_at_end.find(start_road);
        if (side == side_at_end.end()) continue;
        const Turn turn = type == "turn_left" ? Turn::Left : type == "go_straight" ? Turn::Straight : Turn::Right;
        mask |= static_cast<GreenMask>(1u << slot_of(side->second, turn));
      }
      for (const Phase& std_phase : standard_phases()) {
        if (std_phase.green == mask) raw.canonical = std_phase.id;
      }
      builder.add_raw_phase(node_index[id], std::move(raw));
    }
  }

  result.network = builder.build();
  return result;
}

CityflowRoadnet load_cityflow_roadnet(const std::string& path) {
  return parse_cityflow_roadnet(read_file(path));
}

CityflowFlow parse_cityflow_flow(const json& doc, const RoadNetwork& net) {
  if (!doc.is_array()) throw ValidationError("cityflow schema: flow file root must be an array");
  CityflowFlow result;
  std::set<std::string> ignored;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = "$[" + std::to_string(i) + "]";
    const json& entry = doc[i];
    IdmParams idm;
    if (entry.contains("vehicle")) {
      const json& veh = entry.at("vehicle");
      const std::string vpath = path + ".vehicle";
      if (veh.contains("length")) idm.length = number(veh, "length", vpath);
      if (veh.contains("usualPosAcc")) idm.a_max = number(veh, "usualPosAcc", vpath);
      if (veh.contains("usualNegAcc")) idm.b = number(veh, "usualNegAcc", vpath);
      if (veh.contains("minGap")) idm.s0 = number(veh, "minGap", vpath);
      if (veh.contains("maxSpeed")) idm.v0 = number(veh, "maxSpeed", vpath);
      if (veh.contains("headwayTime")) idm.T = number(veh, "headwayTime", vpath);
      for (const auto& [key, _] : veh.items()) {
        if (key != "length" && key != "usualPosAcc" && key != "usualNegAcc" && key != "minGap" &&
            key != "maxSpeed" && key != "headwayTime") {
          ignored.insert("vehicle." + key);
        }
      }
      try {
        idm.validate();
      } catch (const ValidationError& e) {
        throw ValidationError(vpath + ": " + e.what());
      }
    }
    std::vector<int> route;
    const json& roads = array(entry, "route", path);
    for (std::size_t k = 0; k < roads.size(); ++k) {
      if (!roads[k].is_string()) throw ValidationError("cityflow schema: " + path + ".route[" + std::to_string(k) + "] must be a string");
      const int link = net.link_index(roads[k].get<std::string>());
      if (link < 0) {
        throw ValidationError("cityflow flow: " + path + ".route[" + std::to_string(k) + "] unknown road '" +
                              roads[k].get<std::string>() + "'");
      }
      route.push_back(link);
    }
    try {
      net.validate_route(route);
    } catch (const ValidationError& e) {
      throw ValidationError("cityflow flow: " + path + ".route: " + e.what());
    }
    const double start = number(entry, "startTime", path);
    const double end = entry.contains("endTime") ? number(entry, "endTime", path) : start;
    const double interval = entry.contains("interval") ? number(entry, "interval", path) : 1.0;
    if (end < start) throw ValidationError("cityflow flow: " + path + " endTime precedes startTime");
    long count = 1;
    if (end > start) {
      if (!(interval > 0.0)) throw ValidationError("cityflow flow: " + path + ".interval must be positive");
      count = static_cast<long>(std::floor((end - start) / interval + 1e-9)) + 1;
    }
    for (long n = 0; n < count; ++n) {
      result.schedule.push_back({route, start + static_cast<double>(n) * interval, idm});
    }
  }
  for (const auto& key : ignored) result.warnings.push_back("ignored flow field '" + key + "'");
  return result;
}

CityflowFlow load_cityflow_flow(const std::string& path, const RoadNetwork& net) {
  return parse_cityflow_flow(read_file(path), net);
}

}  // namespace tsc::traffic
