#include "tsc/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <cstdlib>
#include <exception>
#include <set>
#include <sstream>
#include <thread>

#include "tsc/error.hpp"
#include "tsc/napo/policy.hpp"
#include "tsc/traffic/cityflow.hpp"

namespace tsc::harness {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + "." + key + ": wrong type");
  }
}

traffic::IdmParams idm_from_json(const json& j, traffic::IdmParams p, const std::string& where) {
  reject_unknown(j, {"v0", "a_max", "b", "s0", "T", "delta", "length"}, where);
  p.v0 = get_or(j, "v0", p.v0, where);
  p.a_max = get_or(j, "a_max", p.a_max, where);
  p.b = get_or(j, "b", p.b, where);
  p.s0 = get_or(j, "s0", p.s0, where);
  p.T = get_or(j, "T", p.T, where);
  p.delta = get_or(j, "delta", p.delta, where);
  p.length = get_or(j, "length", p.length, where);
  p.validate();
  return p;
}

json to_json(const traffic::IdmParams& p) {
  return {{"v0", p.v0}, {"a_max", p.a_max}, {"b", p.b}, {"s0", p.s0}, {"T", p.T}, {"delta", p.delta},
          {"length", p.length}};
}

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty() || base.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).string();
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

json mean_std(const std::vector<double>& v) { return {{"mean", mean_of(v)}, {"std", std_of(v)}}; }

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw ValidationError("cannot write " + tmp.string());
    os << text;
  }
  fs::rename(tmp, path);
}

const char* kCurveColumns[] = {"episode",       "avg_travel_time", "mean_queue",  "queue_std",  "mean_speed",
                               "mean_reward",   "vehicles",        "policy_loss", "value_loss", "entropy",
                               "actor_prediction_loss", "critic_prediction_loss"};

std::string csv_row(const json& row) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < std::size(kCurveColumns); ++i) {
    if (i) os << ',';
    const auto& v = row.at(kCurveColumns[i]);
    if (v.is_number_integer()) {
      os << v.get<long>();
    } else {
      os << v.get<double>();
    }
  }
  return os.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> lines;
  std::ifstream is(path);
  for (std::string line; std::getline(is, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string version_tag() { return TSC_VERSION_TAG; }

void ExperimentConfig::validate() const {
  if (!(decision_interval > 0.0) || !(episode_length > 0.0)) {
    throw ValidationError("episode length and decision interval must be positive");
  }
  const double ratio = episode_length / decision_interval;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw ValidationError("decision interval must divide the episode length");
  }
  if (episodes < 0) throw ValidationError("episodes must be non-negative");
  if (checkpoint_every < 0) throw ValidationError("checkpoint_every must be non-negative");
  if (seeds.empty()) throw ValidationError("at least one evaluation seed is required");
  if (spawn_jitter < 0.0) throw ValidationError("spawn jitter must be non-negative");
  for (double s : noise_sigmas) {
    if (!(s >= 0.0)) throw ValidationError("noise sigmas must be non-negative");
  }
  for (const auto& s : ablation_states) encoding::parse_state_kind(s);
  fixed_time.validate(decision_interval);
  train.validate();
}

ExperimentConfig experiment_from_json(const json& j) {
  const std::string w = "config";
  reject_unknown(j, {"network", "flow", "base_dir", "controller", "state", "fixed_time", "train", "episodes",
                     "checkpoint_every", "train_demand_seed", "seeds", "noise_sigmas", "ablation_states",
                     "ablation_seeds", "episode_length", "decision_interval", "spawn_jitter"},
                 w);
  ExperimentConfig c;
  c.base_dir = get_or<std::string>(j, "base_dir", "", w);
  if (j.contains("network")) {
    const json& n = j.at("network");
    reject_unknown(n, {"grid", "roadnet"}, w + ".network");
    if (n.contains("grid") == n.contains("roadnet")) {
      throw ValidationError("config.network: give exactly one of 'grid' or 'roadnet'");
    }
    if (n.contains("roadnet")) {
      c.roadnet = get_or<std::string>(n, "roadnet", "", w + ".network");
    } else {
      const json& g = n.at("grid");
      const std::string gw = w + ".network.grid";
      reject_unknown(g, {"rows", "cols", "link_length", "speed_limit", "phase_duration", "yellow_duration", "idm"},
                     gw);
      c.grid.rows = get_or(g, "rows", c.grid.rows, gw);
      c.grid.cols = get_or(g, "cols", c.grid.cols, gw);
      c.grid.link_length = get_or(g, "link_length", c.grid.link_length, gw);
      c.grid.speed_limit = get_or(g, "speed_limit", c.grid.speed_limit, gw);
      c.grid.phase_duration = get_or(g, "phase_duration", c.grid.phase_duration, gw);
      c.grid.yellow_duration = get_or(g, "yellow_duration", c.grid.yellow_duration, gw);
      if (g.contains("idm")) c.grid.idm = idm_from_json(g.at("idm"), c.grid.idm, gw + ".idm");
    }
  }
  if (j.contains("flow")) {
    const json& f = j.at("flow");
    reject_unknown(f, {"synthetic", "file"}, w + ".flow");
    if (f.contains("synthetic") == f.contains("file")) {
      throw ValidationError("config.flow: give exactly one of 'synthetic' or 'file'");
    }
    if (f.contains("file")) {
      c.flow = get_or<std::string>(f, "file", "", w + ".flow");
    } else {
      const json& s = f.at("synthetic");
      const std::string sw = w + ".flow.synthetic";
      reject_unknown(s, {"vehicles_per_hour", "horizon", "turn_probs", "idm"}, sw);
      c.demand.vehicles_per_hour = get_or(s, "vehicles_per_hour", c.demand.vehicles_per_hour, sw);
      c.demand.horizon = get_or(s, "horizon", c.demand.horizon, sw);
      c.demand.turn_probs = get_or(s, "turn_probs", c.demand.turn_probs, sw);
      if (s.contains("idm")) c.demand.idm = idm_from_json(s.at("idm"), c.demand.idm, sw + ".idm");
    }
  }
  c.controller = get_or(j, "controller", c.controller, w);
  c.state = encoding::parse_state_kind(get_or<std::string>(j, "state", encoding::to_string(c.state), w));
  if (j.contains("fixed_time")) {
    const json& f = j.at("fixed_time");
    reject_unknown(f, {"phases", "splits"}, w + ".fixed_time");
    c.fixed_time.phases = get_or(f, "phases", c.fixed_time.phases, w + ".fixed_time");
    c.fixed_time.splits = get_or(f, "splits", c.fixed_time.splits, w + ".fixed_time");
  }
  if (j.contains("train")) c.train = napo::train_config_from_json(j.at("train"));
  c.episodes = get_or(j, "episodes", c.episodes, w);
  c.checkpoint_every = get_or(j, "checkpoint_every", c.checkpoint_every, w);
  c.train_demand_seed = get_or(j, "train_demand_seed", c.train_demand_seed, w);
  c.seeds = get_or(j, "seeds", c.seeds, w);
  c.noise_sigmas = get_or(j, "noise_sigmas", c.noise_sigmas, w);
  c.ablation_states = get_or(j, "ablation_states", c.ablation_states, w);
  c.ablation_seeds = get_or(j, "ablation_seeds", c.ablation_seeds, w);
  c.episode_length = get_or(j, "episode_length", c.episode_length, w);
  c.decision_interval = get_or(j, "decision_interval", c.decision_interval, w);
  c.spawn_jitter = get_or(j, "spawn_jitter", c.spawn_jitter, w);
  c.validate();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  if (c.roadnet.empty()) {
    j["network"]["grid"] = {{"rows", c.grid.rows},
                            {"cols", c.grid.cols},
                            {"link_length", c.grid.link_length},
                            {"speed_limit", c.grid.speed_limit},
                            {"phase_duration", c.grid.phase_duration},
                            {"yellow_duration", c.grid.yellow_duration},
                            {"idm", to_json(c.grid.idm)}};
  } else {
    j["network"]["roadnet"] = c.roadnet;
  }
  if (c.flow.empty()) {
    j["flow"]["synthetic"] = {{"vehicles_per_hour", c.demand.vehicles_per_hour},
                              {"horizon", c.demand.horizon},
                              {"turn_probs", c.demand.turn_probs},
                              {"idm", to_json(c.demand.idm)}};
  } else {
    j["flow"]["file"] = c.flow;
  }
  if (!c.base_dir.empty()) j["base_dir"] = c.base_dir;
  j["controller"] = c.controller;
  j["state"] = encoding::to_string(c.state);
  j["fixed_time"] = {{"phases", c.fixed_time.phases}, {"splits", c.fixed_time.splits}};
  j["train"] = napo::to_json(c.train);
  j["episodes"] = c.episodes;
  j["checkpoint_every"] = c.checkpoint_every;
  j["train_demand_seed"] = c.train_demand_seed;
  j["seeds"] = c.seeds;
  j["noise_sigmas"] = c.noise_sigmas;
  j["ablation_states"] = c.ablation_states;
  j["ablation_seeds"] = c.ablation_seeds;
  j["episode_length"] = c.episode_length;
  j["decision_interval"] = c.decision_interval;
  j["spawn_jitter"] = c.spawn_jitter;
  return j;
}

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.roadnet.empty()) {
    traffic::GridSpec g = config_.grid;
    g.phase_duration = config_.decision_interval;
    network_ = traffic::load_network(g);
  } else {
    auto rn = traffic::load_cityflow_roadnet(resolve(config_.base_dir, config_.roadnet));
    network_ = rn.network;
    warnings_ = rn.warnings;
  }
  if (!config_.flow.empty()) {
    auto fl = traffic::load_cityflow_flow(resolve(config_.base_dir, config_.flow), *network_);
    file_flow_ = std::move(fl.schedule);
    warnings_.insert(warnings_.end(), fl.warnings.begin(), fl.warnings.end());
  }
}

encoding::EnvConfig Experiment::env_config(double noise_sigma) const {
  encoding::EnvConfig e;
  e.kind = config_.state;
  e.noise_sigma = noise_sigma;
  e.episode_length = config_.episode_length;
  e.sim.decision_interval = config_.decision_interval;
  e.sim.horizon = config_.episode_length;
  e.sim.spawn_jitter = config_.spawn_jitter;
  if (config_.roadnet.empty()) e.sim.yellow_duration = config_.grid.yellow_duration;
  e.encoding.phase_duration = config_.decision_interval;
  return e;
}

std::vector<traffic::ScheduledVehicle> Experiment::demand(std::uint64_t seed) const {
  if (!config_.flow.empty()) return file_flow_;
  traffic::DemandSpec spec = config_.demand;
  spec.horizon = std::min(spec.horizon, config_.episode_length);
  return traffic::synthetic_demand(*network_, spec, seed);
}

napo::DemandFn Experiment::training_demand() const {
  return [this](int episode) { return demand(config_.train_demand_seed + static_cast<std::uint64_t>(episode)); };
}

std::unique_ptr<control::Controller> Experiment::make_controller(const std::string& kind,
                                                                 const std::string& checkpoint) const {
  if (kind == "napo") {
    if (checkpoint.empty()) throw ValidationError("the napo controller needs a checkpoint");
    const napo::Checkpoint ck = napo::read_checkpoint(checkpoint);
    const auto info = ck.header.value("experiment", json::object());
    if (info.contains("state") && info.at("state").get<std::string>() != encoding::to_string(config_.state)) {
      throw ValidationError("checkpoint was trained on " + info.at("state").get<std::string>() +
                            " states but the config asks for " + encoding::to_string(config_.state));
    }
    return std::make_unique<napo::PolicyController>(napo::load_actor(ck), true);
  }
  if (kind == "fixed-time" || kind == "fixed") return std::make_unique<control::FixedTimeController>(config_.fixed_time);
  return control::make_controller(kind);
}

namespace {

EpisodeMetrics eval_episode(const Experiment& exp, control::Controller& controller, std::uint64_t seed,
                            double noise_sigma) {
  encoding::EnvConfig ec = exp.env_config(noise_sigma);
  ec.sim.seed = seed;
  encoding::Environment env(exp.network(), ec);
  env.reset(exp.demand(seed), seed);
  controller.reset(seed);
  MetricsAccumulator acc;
  while (!env.done()) {
    const auto decision = controller.decide(env);
    const auto rewards = env.step(decision.phases);
    acc.observe(env, rewards);
  }
  return acc.finish(env);
}

json summarize(const Experiment& exp, const std::string& name, double noise_sigma,
               const std::vector<EpisodeMetrics>& results) {
  const auto& cfg = exp.config();
  json episodes = json::array();
  std::vector<double> tt, queue, speed, qstd, reward;
  std::vector<std::vector<double>> per_node;
  long vehicles = 0;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const EpisodeMetrics& m = results[k];
    json row = to_json(m);
    row["seed"] = cfg.seeds[k];
    episodes.push_back(row);
    tt.push_back(m.avg_travel_time);
    queue.push_back(m.mean_queue);
    speed.push_back(m.mean_speed);
    qstd.push_back(m.queue_std);
    reward.push_back(m.mean_reward);
    vehicles += m.vehicles;
    per_node.resize(m.intersection_travel_time.size());
    for (std::size_t i = 0; i < per_node.size(); ++i) per_node[i].push_back(m.intersection_travel_time[i]);
  }
  json nodes = json::array();
  for (std::size_t i = 0; i < per_node.size(); ++i) {
    nodes.push_back({{"intersection", exp.network()->intersection(static_cast<int>(i)).name},
                     {"mean", mean_of(per_node[i])},
                     {"std", std_of(per_node[i])}});
  }
  return {{"controller", name},
          {"noise_sigma", noise_sigma},
          {"empty", vehicles == 0},
          {"vehicles", vehicles},
          {"summary",
           {{"avg_travel_time", mean_std(tt)},
            {"mean_queue", mean_std(queue)},
            {"mean_speed", mean_std(speed)},
            {"queue_std", mean_std(qstd)},
            {"mean_reward", mean_std(reward)}}},
          {"intersections", nodes},
          {"episodes", episodes},
          {"seeds", cfg.seeds},
          {"config", to_json(cfg)},
          {"version", version_tag()}};
}

}  // namespace

int worker_count() {
  const char* v = std::getenv("TSC_WORKERS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw ValidationError("TSC_WORKERS must be a positive integer");
  return static_cast<int>(std::min<long>(n, 256));
}

json run_eval(const Experiment& exp, control::Controller& controller, double noise_sigma) {
  std::vector<EpisodeMetrics> results;
  for (std::uint64_t seed : exp.config().seeds) results.push_back(eval_episode(exp, controller, seed, noise_sigma));
  return summarize(exp, controller.name(), noise_sigma, results);
}

json run_eval(const Experiment& exp, const std::string& controller, const std::string& checkpoint,
              double noise_sigma) {
  const auto& seeds = exp.config().seeds;
  const int workers = std::min<int>(worker_count(), static_cast<int>(seeds.size()));
  std::vector<std::unique_ptr<control::Controller>> controllers;
  for (int w = 0; w < workers; ++w) controllers.push_back(exp.make_controller(controller, checkpoint));
  std::vector<EpisodeMetrics> results(seeds.size());
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto work = [&](int w) {
    try {
      for (std::size_t k = static_cast<std::size_t>(w); k < seeds.size(); k += static_cast<std::size_t>(workers)) {
        results[k] = eval_episode(exp, *controllers[static_cast<std::size_t>(w)], seeds[k], noise_sigma);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  json out = summarize(exp, controllers.front()->name(), noise_sigma, results);
  if (!checkpoint.empty()) out["checkpoint"] = checkpoint;
  return out;
}

json run_train(const Experiment& exp, const std::string& out_dir, bool resume, const Progress& progress) {
  const auto& cfg = exp.config();
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  napo::Trainer trainer(exp.network(), exp.env_config(), cfg.train, exp.training_demand());
  trainer.set_experiment_info(
      {{"state", encoding::to_string(cfg.state)}, {"config", to_json(cfg)}, {"version", version_tag()}});
  trainer.set_fault_snapshot_path((dir / "fault.ckpt").string());
  const fs::path latest = dir / "checkpoint.ckpt";
  const fs::path curves_jsonl = dir / "curves.jsonl";
  const fs::path curves_csv = dir / "curves.csv";

  std::vector<std::string> rows;
  if (resume && fs::exists(latest)) {
    trainer.restore(napo::read_checkpoint(latest.string()));
    rows = read_lines(curves_jsonl);
    if (static_cast<int>(rows.size()) < trainer.episodes_done()) {
      throw ValidationError("curve log is shorter than the checkpoint's episode count");
    }
    rows.resize(static_cast<std::size_t>(trainer.episodes_done()));
  }
  {
    std::string jsonl, csv;
    for (const auto& r : rows) jsonl += r + "\n";
    csv += [] {
      std::string h;
      for (std::size_t i = 0; i < std::size(kCurveColumns); ++i) h += (i ? "," : "") + std::string(kCurveColumns[i]);
      return h + "\n";
    }();
    for (const auto& r : rows) csv += csv_row(json::parse(r)) + "\n";
    write_text(curves_jsonl, jsonl);
    write_text(curves_csv, csv);
  }
  std::ofstream jsonl(curves_jsonl, std::ios::app);
  std::ofstream csv(curves_csv, std::ios::app);
  while (trainer.episodes_done() < cfg.episodes) {
    const json row = napo::to_json(trainer.train_episode());
    jsonl << row.dump() << '\n' << std::flush;
    csv << csv_row(row) << '\n' << std::flush;
    if (progress) progress(row);
    const int done = trainer.episodes_done();
    if (done == cfg.episodes || (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0)) {
      trainer.save(latest.string());
      if (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0) {
        char name[32];
        std::snprintf(name, sizeof(name), "ckpt_%06d.ckpt", done);
        trainer.save((dir / name).string());
      }
    }
  }
  if (!fs::exists(latest)) trainer.save(latest.string());
  jsonl.close();
  std::vector<double> curve_queue, curve_tt;
  for (const auto& line : read_lines(curves_jsonl)) {
    const json row = json::parse(line);
    curve_queue.push_back(row.at("mean_queue").get<double>());
    curve_tt.push_back(row.at("avg_travel_time").get<double>());
  }
  json summary = {{"episodes", trainer.episodes_done()},
                  {"training_mean_queue", mean_of(curve_queue)},
                  {"training_avg_travel_time", mean_of(curve_tt)},
                  {"checkpoint", latest.string()},
                  {"curves", curves_jsonl.string()},
                  {"config", to_json(cfg)},
                  {"version", version_tag()}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  return summary;
}

json run_noise_sweep(const Experiment& exp, const std::string& checkpoint) {
  const auto& cfg = exp.config();
  if (cfg.state != encoding::StateKind::QDSE) {
    throw ValidationError("noise sweeps need the QDSE state (noise is defined on the front-mover distance)");
  }
  std::vector<double> sigmas = cfg.noise_sigmas;
  if (std::find(sigmas.begin(), sigmas.end(), 0.0) == sigmas.end()) sigmas.insert(sigmas.begin(), 0.0);
  json rows = json::array();
  double clean = 0.0;
  std::vector<double> clean_eps;
  for (double sigma : sigmas) {
    const json r = run_eval(exp, "napo", checkpoint, sigma);
    const double tt = r.at("summary").at("avg_travel_time").at("mean").get<double>();
    if (sigma == 0.0) clean = tt;
    rows.push_back({{"sigma", sigma},
                    {"avg_travel_time", r.at("summary").at("avg_travel_time")},
                    {"mean_queue", r.at("summary").at("mean_queue")}});
  }
  for (auto& r : rows) {
    const double tt = r.at("avg_travel_time").at("mean").get<double>();
    r["degradation_pct"] = clean > 0.0 ? (tt - clean) / clean * 100.0 : 0.0;
  }
  return {{"checkpoint", checkpoint}, {"rows", rows}, {"seeds", cfg.seeds}, {"config", to_json(cfg)},
          {"version", version_tag()}};
}

json run_ablation(const Experiment& exp, const std::string& out_dir, const Progress& progress) {
  const auto& base = exp.config();
  json table = json::array();
  for (const auto& state : base.ablation_states) {
    std::vector<double> queue, tt, curve_queue;
    json runs = json::array();
    for (std::uint64_t seed : base.ablation_seeds) {
      ExperimentConfig c = base;
      c.state = encoding::parse_state_kind(state);
      c.train.seed = seed;
      Experiment e(c);
      const fs::path dir = fs::path(out_dir) / (state + "_seed" + std::to_string(seed));
      const json summary = run_train(e, dir.string(), true, progress);
      const json ev = run_eval(e, "napo", summary.at("checkpoint").get<std::string>());
      curve_queue.push_back(summary.at("training_mean_queue").get<double>());
      queue.push_back(ev.at("summary").at("mean_queue").at("mean").get<double>());
      tt.push_back(ev.at("summary").at("avg_travel_time").at("mean").get<double>());
      runs.push_back({{"seed", seed},
                      {"dir", dir.string()},
                      {"training_mean_queue", summary.at("training_mean_queue")},
                      {"eval", ev.at("summary")}});
    }
    table.push_back({{"state", state},
                     {"training_mean_queue", mean_std(curve_queue)},
                     {"mean_queue", mean_std(queue)},
                     {"avg_travel_time", mean_std(tt)},
                     {"runs", runs}});
  }
  return {{"table", table}, {"episodes", base.episodes}, {"config", to_json(base)}, {"version", version_tag()}};
}

json ingest_check(const std::string& roadnet, const std::vector<std::string>& flows) {
  const auto rn = traffic::load_cityflow_roadnet(roadnet);
  json out = {{"roadnet", roadnet},
              {"intersections", rn.network->num_intersections()},
              {"links", rn.network->links().size()},
              {"warnings", rn.warnings},
              {"flows", json::array()}};
  for (const auto& f : flows) {
    const auto fl = traffic::load_cityflow_flow(f, *rn.network);
    out["flows"].push_back({{"file", f}, {"vehicles", fl.schedule.size()}, {"warnings", fl.warnings}});
  }
  return out;
}

}  // namespace tsc::harness
