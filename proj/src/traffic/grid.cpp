#include "tsc/traffic/grid.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tsc/error.hpp"

namespace tsc::traffic {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("grid spec line " + std::to_string(line) + ": '" + key +
                          "' expects a number, got '" + value + "'");
  }
}

// Offsets from (r, c) toward a side, with row 0 in the north.
int row_step(Approach side) {
  return side == Approach::North ? -1 : side == Approach::South ? 1 : 0;
}
int col_step(Approach side) {
  return side == Approach::West ? -1 : side == Approach::East ? 1 : 0;
}

}  // namespace

GridSpec parse_grid_spec(std::istream& in) {
  GridSpec spec;
  const std::map<std::string, std::function<void(double)>> setters = {
      {"rows", [&](double v) { spec.rows = static_cast<int>(v); }},
      {"cols", [&](double v) { spec.cols = static_cast<int>(v); }},
      {"link_length", [&](double v) { spec.link_length = v; }},
      {"speed_limit", [&](double v) { spec.speed_limit = v; }},
      {"phase_duration", [&](double v) { spec.phase_duration = v; }},
      {"yellow_duration", [&](double v) { spec.yellow_duration = v; }},
      {"idm.v0", [&](double v) { spec.idm.v0 = v; }},
      {"idm.a_max", [&](double v) { spec.idm.a_max = v; }},
      {"idm.b", [&](double v) { spec.idm.b = v; }},
      {"idm.s0", [&](double v) { spec.idm.s0 = v; }},
      {"idm.T", [&](double v) { spec.idm.T = v; }},
      {"idm.delta", [&](double v) { spec.idm.delta = v; }},
      {"idm.length", [&](double v) { spec.idm.length = v; }},
  };
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("grid spec line " + std::to_string(line) + ": expected key = value");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) {
      throw ValidationError("grid spec line " + std::to_string(line) + ": unknown key '" + key + "'");
    }
    it->second(parse_double(key, value, line));
  }
  return spec;
}

GridSpec load_grid_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open grid spec " + path);
  return parse_grid_spec(in);
}

std::string format_grid_spec(const GridSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  out << "rows = " << spec.rows << "\ncols = " << spec.cols << "\nlink_length = " << spec.link_length
      << "\nspeed_limit = " << spec.speed_limit << "\nphase_duration = " << spec.phase_duration
      << "\nyellow_duration = " << spec.yellow_duration << "\nidm.v0 = " << spec.idm.v0
      << "\nidm.a_max = " << spec.idm.a_max << "\nidm.b = " << spec.idm.b << "\nidm.s0 = " << spec.idm.s0
      << "\nidm.T = " << spec.idm.T << "\nidm.delta = " << spec.idm.delta
      << "\nidm.length = " << spec.idm.length << "\n";
  return out.str();
}

std::shared_ptr<const RoadNetwork> load_network(const GridSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) {
    throw ValidationError("grid spec needs rows >= 1 and cols >= 1, got " + std::to_string(spec.rows) +
                          "x" + std::to_string(spec.cols));
  }
  if (!(spec.link_length > 0.0)) throw ValidationError("grid spec link_length must be positive");
  if (!(spec.speed_limit > 0.0)) throw ValidationError("grid spec speed_limit must be positive");
  if (!(spec.phase_duration > 0.0) || !(spec.yellow_duration >= 0.0) ||
      spec.yellow_duration > spec.phase_duration) {
    throw ValidationError("grid spec needs 0 <= yellow_duration <= phase_duration");
  }
  spec.idm.validate();

  NetworkBuilder builder;
  auto node_id = [&](int r, int c) { return r * spec.cols + c; };
  auto inside = [&](int r, int c) { return r >= 0 && r < spec.rows && c >= 0 && c < spec.cols; };
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      builder.add_intersection("intersection_" + std::to_string(r) + "_" + std::to_string(c),
                               c * spec.link_length, -r * spec.link_length);
    }
  }
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const std::string rc = std::to_string(r) + "_" + std::to_string(c);
      for (Approach side : kAllApproaches) {
        const int nr = r + row_step(side);
        const int nc = c + col_step(side);
        const std::string tag(approach_name(side));
        if (inside(nr, nc)) {
          builder.add_link("road_" + rc + "_" + tag, node_id(r, c), node_id(nr, nc), side, opposite(side),
                           spec.link_length, spec.speed_limit);
        } else {
          builder.add_link("road_" + rc + "_" + tag, node_id(r, c), kBoundary, side, side,
                           spec.link_length, spec.speed_limit);
          builder.add_link("entry_" + rc + "_" + tag, kBoundary, node_id(r, c), side, side,
                           spec.link_length, spec.speed_limit);
        }
      }
    }
  }
  return builder.build();
}

}  // namespace tsc::traffic
