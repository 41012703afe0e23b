// tsc: train, evaluate and compare traffic signal controllers.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tsc/tsc.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(tsc_status s) {
  if (s != TSC_OK) throw CliError(tsc_last_error());
}

json take(char* s) {
  std::unique_ptr<char, void (*)(char*)> guard(s, tsc_free_string);
  return json::parse(s);
}

using ExpPtr = std::unique_ptr<tsc_experiment, void (*)(tsc_experiment*)>;

// Reads the config file, applies command-line overrides and builds the experiment.
ExpPtr load(const std::string& path, const std::vector<std::uint64_t>& seeds, int episodes, long train_seed) {
  std::ifstream is(path);
  if (!is) throw CliError("cannot open config " + path);
  json cfg;
  try {
    cfg = json::parse(is);
  } catch (const json::exception& e) {
    throw CliError(path + ": " + e.what());
  }
  if (!cfg.contains("base_dir")) cfg["base_dir"] = fs::absolute(path).parent_path().string();
  if (!seeds.empty()) cfg["seeds"] = seeds;
  if (episodes >= 0) cfg["episodes"] = episodes;
  if (train_seed >= 0) cfg["train"]["seed"] = train_seed;
  tsc_experiment* exp = nullptr;
  check(tsc_experiment_from_json(cfg.dump().c_str(), &exp));
  return ExpPtr(exp, tsc_experiment_destroy);
}

void write_file(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw CliError("cannot write " + path);
  os << text;
}

std::string fmt(const json& ms) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f +- %.2f", ms.at("mean").get<double>(), ms.at("std").get<double>());
  return buf;
}

const char* kSummaryCols[] = {"avg_travel_time", "mean_queue", "mean_speed", "queue_std"};

std::string eval_table(const std::vector<json>& evals, bool csv) {
  std::string out;
  char buf[256];
  if (csv) {
    out = "controller,noise_sigma,vehicles";
    for (auto c : kSummaryCols) out += std::string(",") + c + "_mean," + c + "_std";
    out += "\n";
    for (const auto& e : evals) {
      std::snprintf(buf, sizeof(buf), "%s,%g,%ld", e.at("controller").get<std::string>().c_str(),
                    e.at("noise_sigma").get<double>(), e.at("vehicles").get<long>());
      out += buf;
      for (auto c : kSummaryCols) {
        std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", e.at("summary").at(c).at("mean").get<double>(),
                      e.at("summary").at(c).at("std").get<double>());
        out += buf;
      }
      out += "\n";
    }
    return out;
  }
  std::snprintf(buf, sizeof(buf), "%-14s %-20s %-18s %-16s %-16s\n", "controller", "travel time (s)", "queue (veh)",
                "speed (m/s)", "queue std");
  out += buf;
  for (const auto& e : evals) {
    const auto& s = e.at("summary");
    std::snprintf(buf, sizeof(buf), "%-14s %-20s %-18s %-16s %-16s%s\n", e.at("controller").get<std::string>().c_str(),
                  fmt(s.at("avg_travel_time")).c_str(), fmt(s.at("mean_queue")).c_str(),
                  fmt(s.at("mean_speed")).c_str(), fmt(s.at("queue_std")).c_str(),
                  e.at("empty").get<bool>() ? "  (no vehicles)" : "");
    out += buf;
  }
  return out;
}

void report_evals(const std::vector<json>& evals, const std::string& out_dir) {
  std::cout << eval_table(evals, false);
  if (out_dir.empty()) return;
  json all = json::array();
  for (const auto& e : evals) all.push_back(e);
  write_file((fs::path(out_dir) / "eval.json").string(), all.dump(2) + "\n");
  write_file((fs::path(out_dir) / "eval.csv").string(), eval_table(evals, true));
  write_file((fs::path(out_dir) / "eval.txt").string(), eval_table(evals, false));
}

void progress_line(const char* row, void*) {
  const json r = json::parse(row);
  std::fprintf(stderr, "episode %4d  travel %.1f s  queue %.2f  reward %.4f  value loss %.4f  entropy %.3f\n",
               r.at("episode").get<int>(), r.at("avg_travel_time").get<double>(), r.at("mean_queue").get<double>(),
               r.at("mean_reward").get<double>(), r.at("value_loss").get<double>(), r.at("entropy").get<double>());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic signal control experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tsc_version());

  std::string config, out, checkpoint, roadnet, dataset_dir;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> controllers, flows;
  int episodes = -1;
  long train_seed = -1;
  double noise = 0.0;
  bool resume = false, quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--seeds", seeds, "Evaluation seeds (overrides config)")->delimiter(',');
  };

  auto* train = app.add_subcommand("train", "Train a NAPO policy");
  add_common(train);
  train->add_option("-o,--out", out, "Output directory")->required();
  train->add_option("--episodes", episodes, "Training episodes (overrides config)")->check(CLI::NonNegativeNumber);
  train->add_option("--train-seed", train_seed, "Training seed (overrides config)")->check(CLI::NonNegativeNumber);
  train->add_flag("--resume", resume, "Continue from <out>/checkpoint.ckpt");
  train->add_flag("-q,--quiet", quiet, "No per-episode progress");

  auto* eval = app.add_subcommand("eval", "Evaluate a trained policy");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "Policy checkpoint")->required();
  eval->add_option("--noise", noise, "Sensor noise sigma on front-mover distance (m)")->check(CLI::NonNegativeNumber);
  eval->add_option("-o,--out", out, "Directory for eval.json / eval.csv / eval.txt");

  auto* baseline = app.add_subcommand("baseline", "Evaluate classical controllers");
  add_common(baseline);
  baseline->add_option("--controller", controllers, "fixed-time, max-pressure, advanced-mp, random")
      ->delimiter(',')
      ->default_val(std::vector<std::string>{"fixed-time", "max-pressure", "advanced-mp", "random"});
  baseline->add_option("-o,--out", out, "Directory for eval.json / eval.csv / eval.txt");

  auto* ablate = app.add_subcommand("ablate-state", "Train and compare state representations");
  add_common(ablate);
  ablate->add_option("-o,--out", out, "Output directory")->required();
  ablate->add_option("--episodes", episodes, "Training episodes per run")->check(CLI::NonNegativeNumber);
  ablate->add_flag("-q,--quiet", quiet, "No per-episode progress");

  auto* sweep = app.add_subcommand("noise-sweep", "Evaluate a policy under sensor noise");
  add_common(sweep);
  sweep->add_option("--checkpoint", checkpoint, "Policy checkpoint")->required();
  sweep->add_option("-o,--out", out, "Directory for noise.json / noise.csv");

  auto* ingest = app.add_subcommand("ingest-check", "Load CityFlow files and report counts");
  ingest->add_option("--roadnet", roadnet, "Roadnet JSON")->check(CLI::ExistingFile);
  ingest->add_option("--flow", flows, "Flow JSON (repeatable)")->check(CLI::ExistingFile);
  ingest->add_option("--dir", dataset_dir, "Directory holding one roadnet*.json and flow files")
      ->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      auto exp = load(config, seeds, episodes, train_seed);
      char* s = nullptr;
      check(tsc_run_train(exp.get(), out.c_str(), resume ? 1 : 0, quiet ? nullptr : progress_line, nullptr, &s));
      const json summary = take(s);
      std::cout << "trained " << summary.at("episodes").get<int>() << " episodes, checkpoint "
                << summary.at("checkpoint").get<std::string>() << "\n";
    } else if (*eval) {
      auto exp = load(config, seeds, -1, -1);
      char* s = nullptr;
      check(tsc_run_eval(exp.get(), "napo", checkpoint.c_str(), noise, &s));
      report_evals({take(s)}, out);
    } else if (*baseline) {
      auto exp = load(config, seeds, -1, -1);
      std::vector<json> evals;
      for (const auto& c : controllers) {
        char* s = nullptr;
        check(tsc_run_eval(exp.get(), c.c_str(), nullptr, 0.0, &s));
        evals.push_back(take(s));
      }
      report_evals(evals, out);
    } else if (*ablate) {
      auto exp = load(config, seeds, episodes, -1);
      char* s = nullptr;
      check(tsc_run_ablation(exp.get(), out.c_str(), quiet ? nullptr : progress_line, nullptr, &s));
      const json r = take(s);
      std::string txt = "state   training queue       eval queue (veh)     eval travel time (s)\n";
      std::string csv =
          "state,training_mean_queue_mean,training_mean_queue_std,mean_queue_mean,mean_queue_std,"
          "avg_travel_time_mean,avg_travel_time_std\n";
      for (const auto& row : r.at("table")) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-7s %-20s %-20s %-20s\n", row.at("state").get<std::string>().c_str(),
                      fmt(row.at("training_mean_queue")).c_str(), fmt(row.at("mean_queue")).c_str(),
                      fmt(row.at("avg_travel_time")).c_str());
        txt += buf;
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", row.at("state").get<std::string>().c_str(),
                      row.at("training_mean_queue").at("mean").get<double>(),
                      row.at("training_mean_queue").at("std").get<double>(),
                      row.at("mean_queue").at("mean").get<double>(), row.at("mean_queue").at("std").get<double>(),
                      row.at("avg_travel_time").at("mean").get<double>(),
                      row.at("avg_travel_time").at("std").get<double>());
        csv += buf;
      }
      std::cout << txt;
      write_file((fs::path(out) / "ablation.json").string(), r.dump(2) + "\n");
      write_file((fs::path(out) / "ablation.csv").string(), csv);
      write_file((fs::path(out) / "ablation.txt").string(), txt);
    } else if (*sweep) {
      auto exp = load(config, seeds, -1, -1);
      char* s = nullptr;
      check(tsc_run_noise_sweep(exp.get(), checkpoint.c_str(), &s));
      const json r = take(s);
      std::string txt = "sigma (m)  travel time (s)      degradation (%)\n";
      std::string csv = "sigma,avg_travel_time_mean,avg_travel_time_std,degradation_pct\n";
      for (const auto& row : r.at("rows")) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-10g %-20s %+.2f\n", row.at("sigma").get<double>(),
                      fmt(row.at("avg_travel_time")).c_str(), row.at("degradation_pct").get<double>());
        txt += buf;
        std::snprintf(buf, sizeof(buf), "%g,%.6f,%.6f,%.6f\n", row.at("sigma").get<double>(),
                      row.at("avg_travel_time").at("mean").get<double>(),
                      row.at("avg_travel_time").at("std").get<double>(), row.at("degradation_pct").get<double>());
        csv += buf;
      }
      std::cout << txt;
      if (!out.empty()) {
        write_file((fs::path(out) / "noise.json").string(), r.dump(2) + "\n");
        write_file((fs::path(out) / "noise.csv").string(), csv);
        write_file((fs::path(out) / "noise.txt").string(), txt);
      }
    } else if (*ingest) {
      if (!dataset_dir.empty()) {
        for (const auto& e : fs::directory_iterator(dataset_dir)) {
          const auto name = e.path().filename().string();
          if (e.path().extension() != ".json") continue;
          if (name.find("roadnet") != std::string::npos) {
            roadnet = e.path().string();
          } else {
            flows.push_back(e.path().string());
          }
        }
        std::sort(flows.begin(), flows.end());
      }
      if (roadnet.empty()) throw CliError("no roadnet given (use --roadnet or --dir)");
      std::vector<const char*> ptrs;
      for (const auto& f : flows) ptrs.push_back(f.c_str());
      char* s = nullptr;
      check(tsc_ingest_check(roadnet.c_str(), ptrs.data(), ptrs.size(), &s));
      const json r = take(s);
      std::cout << r.at("roadnet").get<std::string>() << ": " << r.at("intersections").get<int>()
                << " intersections\n";
      for (const auto& f : r.at("flows")) {
        std::cout << "  " << f.at("file").get<std::string>() << ": " << f.at("vehicles").get<long>()
                  << " vehicles\n";
        for (const auto& w : f.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";
      }
      for (const auto& w : r.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
