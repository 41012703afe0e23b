#include "tsc/napo/trainer.hpp"

#include <cmath>
#include <sstream>

#include "tsc/error.hpp"
#include "tsc/napo/losses.hpp"

namespace tsc::napo {

void TrainConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in (0, 1]");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in (0, 1]");
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ValidationError("clip epsilon must lie in (0, 1)");
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if (batch_size < 1) throw ValidationError("batch size must be positive");
  if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) throw ValidationError("learning rates must be positive");
  if (entropy_weight < 0.0 || prediction_weight < 0.0 || value_weight < 0.0) {
    throw ValidationError("loss weights must be non-negative");
  }
  if (!(max_grad_norm > 0.0)) throw ValidationError("gradient clip must be positive");
  if (!(reward_scale > 0.0)) throw ValidationError("reward scale must be positive");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"gamma", c.gamma},
          {"lambda", c.lambda},
          {"clip_eps", c.clip_eps},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr_actor", c.lr_actor},
          {"lr_critic", c.lr_critic},
          {"entropy_weight", c.entropy_weight},
          {"prediction_weight", c.prediction_weight},
          {"value_weight", c.value_weight},
          {"max_grad_norm", c.max_grad_norm},
          {"reward_scale", c.reward_scale},
          {"hidden", c.hidden},
          {"heads", c.heads},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  static const char* known[] = {"gamma",          "lambda",           "clip_eps",     "epochs",        "batch_size",
                                "lr_actor",       "lr_critic",        "entropy_weight", "prediction_weight",
                                "value_weight",   "max_grad_norm",    "reward_scale", "hidden",        "heads",
                                "seed"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ValidationError("train config: unknown key '" + key + "'");
    }
  }
  c.gamma = j.value("gamma", c.gamma);
  c.lambda = j.value("lambda", c.lambda);
  c.clip_eps = j.value("clip_eps", c.clip_eps);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr_actor = j.value("lr_actor", c.lr_actor);
  c.lr_critic = j.value("lr_critic", c.lr_critic);
  c.entropy_weight = j.value("entropy_weight", c.entropy_weight);
  c.prediction_weight = j.value("prediction_weight", c.prediction_weight);
  c.value_weight = j.value("value_weight", c.value_weight);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  c.reward_scale = j.value("reward_scale", c.reward_scale);
  c.hidden = j.value("hidden", c.hidden);
  c.heads = j.value("heads", c.heads);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

nlohmann::json to_json(const EpisodeLog& log) {
  nlohmann::json j = harness::to_json(log.metrics);
  j["episode"] = log.episode;
  j["policy_loss"] = log.stats.policy_loss;
  j["value_loss"] = log.stats.value_loss;
  j["actor_prediction_loss"] = log.stats.actor_prediction_loss;
  j["critic_prediction_loss"] = log.stats.critic_prediction_loss;
  j["entropy"] = log.stats.entropy;
  j["actor_grad_norm"] = log.stats.actor_grad_norm;
  j["critic_grad_norm"] = log.stats.critic_grad_norm;
  j["updates"] = log.stats.updates;
  return j;
}

nlohmann::json to_json(const NetworkConfig& c) {
  return {{"block_input_dim", c.block_input_dim}, {"num_agents", c.num_agents}, {"hidden", c.hidden},
          {"heads", c.heads}, {"num_phases", c.num_phases}, {"queue_dim", c.queue_dim}};
}

NetworkConfig network_config_from_json(const nlohmann::json& j) {
  NetworkConfig c;
  c.block_input_dim = j.at("block_input_dim").get<int>();
  c.num_agents = j.at("num_agents").get<int>();
  c.hidden = j.at("hidden").get<int>();
  c.heads = j.at("heads").get<int>();
  c.num_phases = j.at("num_phases").get<int>();
  c.queue_dim = j.at("queue_dim").get<int>();
  c.validate();
  return c;
}

int sample_action(const Eigen::Ref<const Eigen::RowVectorXd>& probs, std::mt19937_64& rng) {
  if (!probs.allFinite() || std::abs(probs.sum() - 1.0) > 1e-6) {
    throw TrainingFault("policy produced an invalid distribution");
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double draw = u(rng);
  double acc = 0.0;
  for (long a = 0; a < probs.size(); ++a) {
    acc += probs(a);
    if (draw < acc) return static_cast<int>(a);
  }
  // Rounding left the draw past the last bucket: take the last positive entry.
  for (long a = probs.size() - 1; a >= 0; --a) {
    if (probs(a) > 0.0) return static_cast<int>(a);
  }
  return 0;
}

Trainer::Trainer(std::shared_ptr<const traffic::RoadNetwork> network, encoding::EnvConfig env_config,
                 TrainConfig config, DemandFn demand)
    : network_(network), config_(config), demand_(std::move(demand)), env_(network, env_config) {
  config_.validate();
  if (!demand_) throw ValidationError("trainer needs a demand source");
  net_config_.num_agents = env_.num_agents();
  net_config_.block_input_dim = env_.state_dim() + env_.num_agents() + encoding::kBlocks;
  net_config_.hidden = config_.hidden;
  net_config_.heads = config_.heads;
  std::mt19937_64 init(config_.seed);
  actor_ = std::make_unique<ActorNetwork>(net_config_, init);
  critic_ = std::make_unique<CriticNetwork>(net_config_, init);
  actor_opt_ = std::make_unique<nn::Adam>(actor_->params(), nn::AdamConfig{config_.lr_actor});
  critic_opt_ = std::make_unique<nn::Adam>(critic_->params(), nn::AdamConfig{config_.lr_critic});
  rng_.seed(config_.seed ^ 0x5851f42d4c957f2dULL);
}

Trainer::Decision Trainer::decide(const Tensor& actor_hidden, const Tensor& critic_hidden) {
  nn::NoGradGuard no_grad;
  Decision d;
  const auto& obs = env_.observations();
  d.input = make_step_input(obs);
  d.actor_hidden_in = actor_hidden;
  d.critic_hidden_in = critic_hidden;
  const ActorOutput a = actor_->forward(d.input, actor_hidden);
  const Mat& lp = a.log_probs.value();
  const long n = lp.rows();
  d.actions.resize(static_cast<std::size_t>(n));
  d.log_probs.resize(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const Eigen::RowVectorXd p = lp.row(i).array().exp();
    if (!p.allFinite()) fault("non-finite policy output at episode " + std::to_string(episode_));
    d.actions[i] = sample_action(p, rng_);
    d.log_probs[i] = lp(i, d.actions[i]);
  }
  set_neighbor_actions(d.input, obs, d.actions);
  const CriticOutput c = critic_->forward(d.input, critic_hidden);
  d.values.assign(c.value.value().data(), c.value.value().data() + n);
  for (double v : d.values) {
    if (!std::isfinite(v)) fault("non-finite value estimate at episode " + std::to_string(episode_));
  }
  d.actor_hidden_out = a.hidden;
  d.critic_hidden_out = c.hidden;
  return d;
}

EpisodeLog Trainer::train_episode() {
  env_.reset(demand_(episode_), config_.seed * 1000003ULL + static_cast<std::uint64_t>(episode_));
  const long agents = env_.num_agents();
  const long chunk = std::max<long>(1, config_.batch_size / agents);
  harness::MetricsAccumulator metrics;
  EpisodeLog log;
  log.episode = episode_;

  Decision current = decide(actor_->initial_hidden(agents), critic_->initial_hidden(agents));
  std::vector<StepRecord> steps;
  while (!env_.done()) {
    steps.clear();
    while (static_cast<long>(steps.size()) < chunk && !env_.done()) {
      StepRecord rec;
      const std::vector<double> raw = env_.step(current.actions);
      metrics.observe(env_, raw);
      rec.rewards = raw;
      for (double& r : rec.rewards) r *= config_.reward_scale;
      const auto targets = env_.queue_targets();
      rec.queue_targets.resize(agents, traffic::kTrackedLanes);
      for (long i = 0; i < agents; ++i) {
        for (int k = 0; k < traffic::kTrackedLanes; ++k) rec.queue_targets(i, k) = targets[i][k];
      }
      Decision next;
      const bool more = !env_.done();
      if (more) next = decide(current.actor_hidden_out, current.critic_hidden_out);
      rec.decision = std::move(current);
      steps.push_back(std::move(rec));
      if (more) current = std::move(next);
    }
    std::vector<double> bootstrap(static_cast<std::size_t>(agents), 0.0);
    if (!env_.done()) bootstrap = current.values;
    update(steps, bootstrap, log.stats);
  }
  if (log.stats.updates > 0) {
    const double n = log.stats.updates;
    log.stats.policy_loss /= n;
    log.stats.value_loss /= n;
    log.stats.actor_prediction_loss /= n;
    log.stats.critic_prediction_loss /= n;
    log.stats.entropy /= n;
    log.stats.actor_grad_norm /= n;
    log.stats.critic_grad_norm /= n;
  }
  log.metrics = metrics.finish(env_);
  ++episode_;
  return log;
}

void Trainer::update(const std::vector<StepRecord>& steps, const std::vector<double>& bootstrap, UpdateStats& stats) {
  const long T = static_cast<long>(steps.size());
  const long agents = static_cast<long>(bootstrap.size());
  const long rows = T * agents;
  std::vector<double> advantages(static_cast<std::size_t>(rows));
  std::vector<double> targets(static_cast<std::size_t>(rows));
  for (long i = 0; i < agents; ++i) {
    std::vector<double> r(static_cast<std::size_t>(T)), v(static_cast<std::size_t>(T + 1));
    for (long t = 0; t < T; ++t) {
      r[t] = steps[t].rewards[i];
      v[t] = steps[t].decision.values[i];
    }
    v[T] = bootstrap[i];
    const auto adv = compute_gae(r, v, config_.gamma, config_.lambda);
    const auto td = td_targets(r, v, config_.gamma);
    for (long t = 0; t < T; ++t) {
      advantages[t * agents + i] = adv[t];
      targets[t * agents + i] = td[t];
    }
  }
  advantages = normalize(std::move(advantages));

  std::vector<SequenceInput> inputs;
  inputs.reserve(static_cast<std::size_t>(T));
  std::vector<long> actions(static_cast<std::size_t>(rows));
  std::vector<double> old_log_probs(static_cast<std::size_t>(rows));
  Mat queue_targets(rows, traffic::kTrackedLanes);
  Mat value_targets(rows, 1);
  for (long t = 0; t < T; ++t) {
    inputs.push_back(steps[t].decision.input);
    queue_targets.middleRows(t * agents, agents) = steps[t].queue_targets;
    for (long i = 0; i < agents; ++i) {
      actions[t * agents + i] = steps[t].decision.actions[i];
      old_log_probs[t * agents + i] = steps[t].decision.log_probs[i];
      value_targets(t * agents + i, 0) = targets[t * agents + i];
    }
  }
  const SequenceInput batch = concat_steps(inputs);
  const Tensor actor_h0 = steps.front().decision.actor_hidden_in.detach();
  const Tensor critic_h0 = steps.front().decision.critic_hidden_in.detach();

  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    actor_->params().zero_grad();
    critic_->params().zero_grad();
    const ActorOutput a = actor_->forward(batch, actor_h0);
    const CriticOutput c = critic_->forward(batch, critic_h0);
    const Tensor policy = ppo_policy_loss(a.log_probs, old_log_probs, actions, advantages, config_.clip_eps);
    const Tensor entropy = entropy_loss(a.log_probs);
    const Tensor actor_pred = mse_loss(a.queue_pred, queue_targets);
    const Tensor actor_loss = nn::add(nn::add(policy, nn::scale(entropy, config_.entropy_weight)),
                                      nn::scale(actor_pred, config_.prediction_weight));
    const Tensor value = mse_loss(c.value, value_targets);
    const Tensor critic_pred = mse_loss(c.queue_pred, queue_targets);
    const Tensor critic_loss =
        nn::add(nn::scale(value, config_.value_weight), nn::scale(critic_pred, config_.prediction_weight));
    if (!std::isfinite(actor_loss.item()) || !std::isfinite(critic_loss.item())) {
      fault("non-finite loss at episode " + std::to_string(episode_));
    }
    actor_loss.backward();
    critic_loss.backward();
    const double actor_norm = actor_->params().clip_grad_norm(config_.max_grad_norm);
    const double critic_norm = critic_->params().clip_grad_norm(config_.max_grad_norm);
    try {
      actor_opt_->step(actor_->params());
      critic_opt_->step(critic_->params());
    } catch (const TrainingFault& e) {
      fault(std::string(e.what()) + " at episode " + std::to_string(episode_));
    }
    stats.policy_loss += policy.item();
    stats.value_loss += value.item();
    stats.actor_prediction_loss += actor_pred.item();
    stats.critic_prediction_loss += critic_pred.item();
    stats.entropy -= entropy.item();
    stats.actor_grad_norm += actor_norm;
    stats.critic_grad_norm += critic_norm;
    ++stats.updates;
  }
}

void Trainer::fault(const std::string& what) {
  std::string snapshot;
  if (!fault_path_.empty()) {
    save(fault_path_);
    snapshot = fault_path_;
  }
  throw TrainingFault(what, snapshot);
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ck;
  std::ostringstream rng_state;
  rng_state << rng_;
  ck.header = {{"kind", "napo-trainer"},
               {"network", to_json(net_config_)},
               {"train", to_json(config_)},
               {"episode", episode_},
               {"rng", rng_state.str()},
               {"adam_steps", {actor_opt_->state().step, critic_opt_->state().step}},
               {"experiment", experiment_}};
  auto add_set = [&](const std::string& prefix, const nn::ParameterSet& ps, const nn::AdamState& st) {
    for (const auto& [name, t] : ps.entries()) ck.arrays.emplace_back(prefix + "/" + name, t.value());
    for (std::size_t i = 0; i < ps.size(); ++i) {
      ck.arrays.emplace_back(prefix + ".adam_m/" + ps.entries()[i].first, st.m[i]);
      ck.arrays.emplace_back(prefix + ".adam_v/" + ps.entries()[i].first, st.v[i]);
    }
  };
  add_set("actor", actor_->params(), actor_opt_->state());
  add_set("critic", critic_->params(), critic_opt_->state());
  return ck;
}

void Trainer::save(const std::string& path) const { write_checkpoint(path, checkpoint()); }

void load_parameters(nn::ParameterSet& params, const Checkpoint& ckpt, const std::string& prefix) {
  for (const auto& [name, t] : params.entries()) {
    const Mat& m = ckpt.array(prefix + "/" + name);
    if (m.rows() != t.rows() || m.cols() != t.cols()) {
      throw ValidationError("checkpoint array '" + prefix + "/" + name + "' has the wrong shape");
    }
    t.node()->value = m;
  }
}

void Trainer::restore(const Checkpoint& ckpt) {
  if (ckpt.header.value("kind", "") != "napo-trainer") throw ValidationError("not a trainer checkpoint");
  if (ckpt.header.at("network") != to_json(net_config_)) {
    throw ValidationError("checkpoint network does not match this environment");
  }
  if (ckpt.header.at("train") != to_json(config_)) throw ValidationError("checkpoint training config differs");
  auto restore_set = [&](const std::string& prefix, nn::ParameterSet& ps, nn::AdamState& st, std::int64_t step) {
    load_parameters(ps, ckpt, prefix);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      st.m[i] = ckpt.array(prefix + ".adam_m/" + ps.entries()[i].first);
      st.v[i] = ckpt.array(prefix + ".adam_v/" + ps.entries()[i].first);
    }
    st.step = step;
  };
  const auto steps = ckpt.header.at("adam_steps");
  restore_set("actor", actor_->params(), actor_opt_->state(), steps.at(0).get<std::int64_t>());
  restore_set("critic", critic_->params(), critic_opt_->state(), steps.at(1).get<std::int64_t>());
  std::istringstream rng_state(ckpt.header.at("rng").get<std::string>());
  rng_state >> rng_;
  episode_ = ckpt.header.at("episode").get<int>();
  experiment_ = ckpt.header.value("experiment", nlohmann::json::object());
}

std::shared_ptr<ActorNetwork> load_actor(const Checkpoint& ckpt) {
  const NetworkConfig cfg = network_config_from_json(ckpt.header.at("network"));
  std::mt19937_64 unused(0);
  auto actor = std::make_shared<ActorNetwork>(cfg, unused);
  load_parameters(actor->params(), ckpt, "actor");
  return actor;
}

}  // namespace tsc::napo
