#include "tsc/tsc.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "tsc/error.hpp"
#include "tsc/harness/experiment.hpp"

struct tsc_experiment {
  tsc::harness::Experiment exp;
};

struct tsc_env {
  tsc::encoding::Environment env;
  tsc::harness::MetricsAccumulator metrics;
};

namespace {

thread_local std::string g_last_error;

tsc_status fail(tsc_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename F>
tsc_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return TSC_OK;
  } catch (const tsc::TrainingFault& e) {
    std::string msg = e.what();
    if (!e.snapshot().empty()) msg += " (snapshot: " + e.snapshot() + ")";
    return fail(TSC_ERR_TRAINING_FAULT, msg);
  } catch (const tsc::ValidationError& e) {
    return fail(TSC_ERR_VALIDATION, e.what());
  } catch (const tsc::DomainError& e) {
    return fail(TSC_ERR_DOMAIN, e.what());
  } catch (const tsc::ShapeError& e) {
    return fail(TSC_ERR_SHAPE, e.what());
  } catch (const tsc::DataCorruption& e) {
    return fail(TSC_ERR_DATA_CORRUPTION, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(TSC_ERR_VALIDATION, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(TSC_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(TSC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TSC_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

tsc::harness::Progress wrap(tsc_progress_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](const nlohmann::json& row) { fn(row.dump().c_str(), user); };
}

}  // namespace

extern "C" {

const char* tsc_last_error(void) { return g_last_error.c_str(); }
const char* tsc_version(void) { return TSC_VERSION_TAG; }
void tsc_free_string(char* s) { std::free(s); }

tsc_status tsc_experiment_from_json(const char* config_json, tsc_experiment** out) {
  if (!config_json || !out) return fail(TSC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto cfg = tsc::harness::experiment_from_json(nlohmann::json::parse(config_json));
    *out = new tsc_experiment{tsc::harness::Experiment(std::move(cfg))};
  });
}

tsc_status tsc_experiment_from_file(const char* path, tsc_experiment** out) {
  if (!path || !out) return fail(TSC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    std::ifstream is(path);
    if (!is) throw std::filesystem::filesystem_error("cannot open config", path, std::make_error_code(std::errc::no_such_file_or_directory));
    nlohmann::json j = nlohmann::json::parse(is);
    if (!j.contains("base_dir")) {
      j["base_dir"] = std::filesystem::absolute(path).parent_path().string();
    }
    *out = new tsc_experiment{tsc::harness::Experiment(tsc::harness::experiment_from_json(j))};
  });
}

void tsc_experiment_destroy(tsc_experiment* exp) { delete exp; }

tsc_status tsc_experiment_config(const tsc_experiment* exp, char** out_json) {
  if (!exp || !out_json) return fail(TSC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out_json = dup(tsc::harness::to_json(exp->exp.config()).dump(2)); });
}

tsc_status tsc_run_eval(const tsc_experiment* exp, const char* controller, const char* checkpoint,
                        double noise_sigma, char** out_json) {
  if (!exp || !controller || !out_json) return fail(TSC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out_json = dup(tsc::harness::run_eval(exp->exp, controller, checkpoint ? checkpoint : "", noise_sigma).dump(2));
  });
}

tsc_status tsc_run_train(const tsc_experiment* exp, const char* out_dir, int resume, tsc_progress_fn progress,
                         void* user, char** out_json) {
  if (!exp || !out_dir || !out_json) return fail(TSC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out_json = dup(tsc::harness::run_train(exp->exp, out_dir, resume != 0, wrap(progress, user)).dump(2));
  });
}

tsc_status tsc_run_noise_sweep(const tsc_experiment* exp, const char* checkpoint, char** out_json) {
  if (!exp || !checkpoint || !out_json) return fail(TSC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out_json = dup(tsc::harness::run_noise_sweep(exp->exp, checkpoint).dump(2)); });
}

tsc_status tsc_run_ablation(const tsc_experiment* exp, const char* out_dir, tsc_progress_fn progress, void* user,
                            char** out_json) {
  if (!exp || !out_dir || !out_json) return fail(TSC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out_json = dup(tsc::harness::run_ablation(exp->exp, out_dir, wrap(progress, user)).dump(2));
  });
}

tsc_status tsc_ingest_check(const char* roadnet, const char* const* flows, size_t num_flows, char** out_json) {
  if (!roadnet || !out_json || (num_flows && !flows)) return fail(TSC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::vector<std::string> fl;
    for (size_t i = 0; i < num_flows; ++i) {
      if (!flows[i]) throw tsc::ValidationError("null flow path");
      fl.emplace_back(flows[i]);
    }
    *out_json = dup(tsc::harness::ingest_check(roadnet, fl).dump(2));
  });
}

tsc_status tsc_env_create(const tsc_experiment* exp, uint64_t seed, double noise_sigma, tsc_env** out) {
  if (!exp || !out) return fail(TSC_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto ec = exp->exp.env_config(noise_sigma);
    ec.sim.seed = seed;
    auto* h = new tsc_env{tsc::encoding::Environment(exp->exp.network(), ec), {}};
    try {
      h->env.reset(exp->exp.demand(seed), seed);
    } catch (...) {
      delete h;
      throw;
    }
    *out = h;
  });
}

void tsc_env_destroy(tsc_env* env) { delete env; }
int tsc_env_num_agents(const tsc_env* env) { return env ? env->env.num_agents() : -1; }
int tsc_env_state_dim(const tsc_env* env) { return env ? env->env.state_dim() : -1; }
int tsc_env_done(const tsc_env* env) { return env ? (env->env.done() ? 1 : 0) : -1; }

tsc_status tsc_env_state(const tsc_env* env, int agent, double* out, size_t len) {
  if (!env || !out) return fail(TSC_ERR_INVALID_ARGUMENT, "null argument");
  if (agent < 0 || agent >= env->env.num_agents()) return fail(TSC_ERR_INVALID_ARGUMENT, "agent out of range");
  const auto& ego = env->env.observations()[static_cast<size_t>(agent)].ego;
  if (len != ego.size()) return fail(TSC_ERR_INVALID_ARGUMENT, "buffer length must equal state_dim");
  std::memcpy(out, ego.data(), ego.size() * sizeof(double));
  return TSC_OK;
}

tsc_status tsc_env_step(tsc_env* env, const int* phases, size_t num_agents, double* rewards) {
  if (!env || !phases) return fail(TSC_ERR_INVALID_ARGUMENT, "null argument");
  if (num_agents != static_cast<size_t>(env->env.num_agents())) {
    return fail(TSC_ERR_INVALID_ARGUMENT, "one phase per agent required");
  }
  if (env->env.done()) return fail(TSC_ERR_DOMAIN, "episode already finished");
  return guarded([&] {
    const auto r = env->env.step(std::span<const int>(phases, num_agents));
    env->metrics.observe(env->env, r);
    if (rewards) std::memcpy(rewards, r.data(), r.size() * sizeof(double));
  });
}

tsc_status tsc_env_metrics(const tsc_env* env, char** out_json) {
  if (!env || !out_json) return fail(TSC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out_json = dup(tsc::harness::to_json(env->metrics.finish(env->env)).dump(2)); });
}

}  // extern "C"
