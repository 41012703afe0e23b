#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "gradcheck.hpp"
#include "napo_fixtures.hpp"
#include "tsc/error.hpp"
#include "tsc/napo/losses.hpp"
#include "tsc/napo/policy.hpp"
#include "tsc/napo/trainer.hpp"

using namespace tsc;
using namespace tsc::napo;
using tsc::testing::gradcheck;

namespace {

// Direct double sum: A_t = sum_{l >= 0} (gamma lambda)^l delta_{t+l}.
std::vector<double> gae_oracle(const std::vector<double>& r, const std::vector<double>& v, double g, double l) {
  const std::size_t T = r.size();
  std::vector<double> out(T, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double w = 1.0;
    for (std::size_t k = t; k < T; ++k) {
      out[t] += w * (r[k] + g * v[k + 1] - v[k]);
      w *= g * l;
    }
  }
  return out;
}

bool same(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

std::vector<Mat> grads(const nn::ParameterSet& ps) {
  std::vector<Mat> out;
  for (const auto& [_, t] : ps.entries()) out.push_back(t.grad().size() ? t.grad() : Mat::Zero(t.rows(), t.cols()));
  return out;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tsc_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Gae, LambdaZeroIsOneStepTd) {
  std::vector<double> r{1.0, -2.0, 0.5}, v{0.3, 0.1, -0.4, 0.9};
  auto a = compute_gae(r, v, 0.9, 0.0);
  for (int t = 0; t < 3; ++t) EXPECT_DOUBLE_EQ(a[t], r[t] + 0.9 * v[t + 1] - v[t]);
}

TEST(Gae, TelescopingUnitRewards) {
  auto a = compute_gae({1, 1, 1}, {0, 0, 0, 0}, 1.0, 1.0);
  EXPECT_EQ(a, (std::vector<double>{3, 2, 1}));
}

TEST(Gae, MatchesDirectSumOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5), p(0.01, 1.0);
  std::uniform_int_distribution<int> len(1, 60);
  for (int trial = 0; trial < 500; ++trial) {
    const int T = len(rng);
    std::vector<double> r(T), v(T + 1);
    for (double& x : r) x = u(rng);
    for (double& x : v) x = u(rng);
    const double g = p(rng), l = p(rng);
    const auto fast = compute_gae(r, v, g, l);
    const auto slow = gae_oracle(r, v, g, l);
    for (int t = 0; t < T; ++t) ASSERT_NEAR(fast[t], slow[t], 1e-12);
  }
}

TEST(Gae, ScalesLinearlyWithRewards) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> r(20), v(21);
    for (double& x : r) x = u(rng);
    for (double& x : v) x = u(rng);
    const double c = 1.0 + std::abs(u(rng));
    auto rs = r, vs = v;
    for (double& x : rs) x *= c;
    for (double& x : vs) x *= c;
    const auto a = compute_gae(r, v, 0.98, 0.98), b = compute_gae(rs, vs, 0.98, 0.98);
    for (int t = 0; t < 20; ++t) EXPECT_NEAR(b[t], c * a[t], 1e-10);
  }
}

TEST(Gae, RejectsMissingBootstrap) { EXPECT_THROW(compute_gae({1, 2}, {0, 0}, 0.9, 0.9), ShapeError); }

TEST(Losses, PolicyLossAtOldPolicyIsMinusMeanAdvantage) {
  Mat lp = Mat::Random(5, 8);
  Tensor log_probs = nn::log_softmax_rows(Tensor::parameter(lp));
  std::vector<long> act{0, 3, 7, 2, 2};
  std::vector<double> old(5), adv{1.0, -2.0, 0.5, 3.0, -1.0};
  for (int i = 0; i < 5; ++i) old[i] = log_probs.value()(i, act[i]);
  EXPECT_NEAR(ppo_policy_loss(log_probs, old, act, adv, 0.2).item(), -0.3, 1e-15);
}

TEST(Losses, RatioTwoIsClippedAtOnePointTwo) {
  Mat lp(1, 2);
  lp << std::log(0.5), std::log(0.5);
  std::vector<double> old{std::log(0.25)};
  EXPECT_NEAR(ppo_policy_loss(Tensor::parameter(lp), old, {0}, {1.0}, 0.2).item(), -1.2, 1e-14);
}

TEST(Losses, ClippedSamplesCarryNoGradient) {
  // Sample 0: ratio 2 with positive advantage (clipped); sample 1: inside the band.
  Mat lp(2, 2);
  lp << std::log(0.5), std::log(0.5), std::log(0.5), std::log(0.5);
  std::vector<double> old{std::log(0.25), std::log(0.5)};
  std::vector<long> act{0, 0};
  std::vector<double> adv{1.0, 1.0};
  auto f = [&](const std::vector<Tensor>& v) { return ppo_policy_loss(v[0], old, act, adv, 0.2); };
  Tensor x = Tensor::parameter(lp);
  f({x}).backward();
  EXPECT_EQ(x.grad().row(0).norm(), 0.0);
  EXPECT_GT(x.grad().row(1).norm(), 0.0);
  // Finite differences agree, including the flat region.
  EXPECT_LT(gradcheck(f, {Tensor::parameter(lp)}), 1e-8);
}

TEST(Losses, ZeroOldProbabilityIsDataCorruption) {
  Tensor lp = nn::log_softmax_rows(Tensor::parameter(Mat::Zero(1, 8)));
  EXPECT_THROW(ppo_policy_loss(lp, {-std::numeric_limits<double>::infinity()}, {0}, {1.0}, 0.2), DataCorruption);
}

TEST(Losses, UniformPolicyEntropyTerm) {
  Tensor lp = nn::log_softmax_rows(Tensor::constant(Mat::Zero(3, 8)));
  EXPECT_NEAR(entropy_loss(lp).item(), -std::log(8.0), 1e-15);
}

TEST(Losses, PerfectPredictionsHaveZeroError) {
  Mat x = Mat::Random(4, 24);
  EXPECT_EQ(mse_loss(Tensor::constant(x), x).item(), 0.0);
  EXPECT_THROW(mse_loss(Tensor::constant(x), Mat::Zero(4, 23)), ShapeError);
}

TEST(Losses, NormalizeAdvantages) {
  auto n = normalize({1.0, 2.0, 3.0, 6.0});
  double mean = 0, sq = 0;
  for (double v : n) mean += v / 4;
  for (double v : n) sq += (v - mean) * (v - mean) / 4;
  EXPECT_NEAR(mean, 0.0, 1e-15);
  EXPECT_NEAR(sq, 1.0, 1e-12);
  EXPECT_EQ(normalize({4.0}), std::vector<double>{0.0});
}

TEST(Networks, IsolatedAgentUsesEgoPathOnly) {
  auto le = tsc::testing::live_env(1, 1, 30);
  std::mt19937_64 rng(1);
  NetworkConfig cfg = tsc::testing::small_config(*le.env);
  ActorNetwork actor(cfg, rng);
  CriticNetwork critic(cfg, rng);
  SequenceInput in = make_step_input(le.env->observations());
  set_neighbor_actions(in, le.env->observations(), {3});
  auto a1 = actor.forward(in, actor.initial_hidden(1));
  auto c1 = critic.forward(in, critic.initial_hidden(1));
  EXPECT_EQ(a1.alpha.norm(), 0.0);
  EXPECT_EQ(c1.beta.norm(), 0.0);
  // Key/value weights are inert without neighbors.
  for (auto& [name, t] : actor.params().entries()) {
    if (name.find(".key.") != std::string::npos || name.find(".value.") != std::string::npos) t.mutable_value().setRandom();
  }
  for (auto& [name, t] : critic.params().entries()) {
    if (name.find(".key.") != std::string::npos || name.find(".value.") != std::string::npos ||
        name.find("action_embed") != std::string::npos) {
      t.mutable_value().setRandom();
    }
  }
  EXPECT_TRUE(same(actor.forward(in, actor.initial_hidden(1)).log_probs.value(), a1.log_probs.value()));
  EXPECT_TRUE(same(critic.forward(in, critic.initial_hidden(1)).value.value(), c1.value.value()));
}

TEST(Networks, DuplicatedNeighborBlocksGiveUniformAttention) {
  auto le = tsc::testing::live_env(3, 3, 20);
  std::mt19937_64 rng(2);
  NetworkConfig cfg = tsc::testing::small_config(*le.env);
  ActorNetwork actor(cfg, rng);
  SequenceInput in = make_step_input(le.env->observations());
  in.mask.setOnes();
  for (long r = 0; r < in.rows(); ++r) {
    for (int k = 2; k < 5; ++k) in.blocks.row(r * 5 + k) = in.blocks.row(r * 5 + 1);
  }
  auto out = actor.forward(in, actor.initial_hidden(in.agents));
  for (long i = 0; i < out.alpha.size(); ++i) EXPECT_NEAR(out.alpha.data()[i], 0.25, 1e-15);
}

TEST(Networks, SameSeedSameOutputs) {
  auto le = tsc::testing::live_env(2, 2, 30);
  auto run = [&] {
    std::mt19937_64 rng(42);
    NetworkConfig cfg = tsc::testing::small_config(*le.env, 128, 8);
    ActorNetwork actor(cfg, rng);
    CriticNetwork critic(cfg, rng);
    SequenceInput in = make_step_input(le.env->observations());
    set_neighbor_actions(in, le.env->observations(), {1, 2, 3, 4});
    return std::make_pair(Mat(actor.forward(in, actor.initial_hidden(4)).log_probs.value()),
                          Mat(critic.forward(in, critic.initial_hidden(4)).value.value()));
  };
  auto a = run(), b = run();
  EXPECT_TRUE(same(a.first, b.first));
  EXPECT_TRUE(same(a.second, b.second));
  EXPECT_NEAR(a.first.array().exp().rowwise().sum().minCoeff(), 1.0, 1e-12);
}

TEST(Networks, SequenceForwardMatchesStepByStep) {
  auto le = tsc::testing::live_env(2, 2, 10);
  std::mt19937_64 rng(3);
  NetworkConfig cfg = tsc::testing::small_config(*le.env);
  ActorNetwork actor(cfg, rng);
  CriticNetwork critic(cfg, rng);
  std::vector<SequenceInput> steps;
  Tensor ha = actor.initial_hidden(4), hc = critic.initial_hidden(4);
  std::vector<Mat> lp, val;
  for (int t = 0; t < 6; ++t) {
    SequenceInput in = make_step_input(le.env->observations());
    auto acts = tsc::testing::random_actions(4, rng);
    set_neighbor_actions(in, le.env->observations(), acts);
    auto a = actor.forward(in, ha);
    auto c = critic.forward(in, hc);
    ha = a.hidden;
    hc = c.hidden;
    lp.push_back(a.log_probs.value());
    val.push_back(c.value.value());
    steps.push_back(in);
    le.env->step(acts);
  }
  SequenceInput all = concat_steps(steps);
  auto a = actor.forward(all, actor.initial_hidden(4));
  auto c = critic.forward(all, critic.initial_hidden(4));
  for (int t = 0; t < 6; ++t) {
    EXPECT_TRUE(a.log_probs.value().middleRows(t * 4, 4).isApprox(lp[t], 1e-12));
    EXPECT_TRUE(c.value.value().middleRows(t * 4, 4).isApprox(val[t], 1e-12));
  }
  EXPECT_TRUE(a.hidden.value().isApprox(ha.value(), 1e-12));
}

TEST(Networks, CriticReactsToNeighborActions) {
  auto le = tsc::testing::live_env(2, 2, 30);
  const auto& obs = le.env->observations();
  int changed = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    CriticNetwork critic(tsc::testing::small_config(*le.env), rng);
    auto acts = tsc::testing::random_actions(4, rng);
    SequenceInput in = make_step_input(obs);
    set_neighbor_actions(in, obs, acts);
    const double v0 = critic.forward(in, critic.initial_hidden(4)).value.value()(0, 0);
    const int nb = obs[0].neighbor_ids[obs[0].mask[0] ? 0 : obs[0].mask[1] ? 1 : obs[0].mask[2] ? 2 : 3];
    acts[nb] = (acts[nb] + 1) % traffic::kNumPhases;
    set_neighbor_actions(in, obs, acts);
    if (critic.forward(in, critic.initial_hidden(4)).value.value()(0, 0) != v0) ++changed;
  }
  EXPECT_GE(changed, 99);
}

TEST(Networks, CriticNeverSeesEgoAction) {
  auto le = tsc::testing::live_env(2, 2, 30);
  const auto& obs = le.env->observations();
  std::mt19937_64 rng(9);
  CriticNetwork critic(tsc::testing::small_config(*le.env), rng);
  std::vector<int> acts{1, 2, 3, 4};
  SequenceInput in = make_step_input(obs);
  set_neighbor_actions(in, obs, acts);
  const Mat v = critic.forward(in, critic.initial_hidden(4)).value.value();
  // Neighbor blocks of agent 0 come from other agents only.
  for (int k = 0; k < 4; ++k) {
    if (obs[0].mask[k]) {
      EXPECT_NE(obs[0].neighbor_ids[k], 0);
    }
  }
  for (int a = 0; a < traffic::kNumPhases; ++a) {
    acts[0] = a;
    SequenceInput again = make_step_input(obs);
    set_neighbor_actions(again, obs, acts);
    EXPECT_EQ(critic.forward(again, critic.initial_hidden(4)).value.value()(0, 0), v(0, 0));
  }
}

TEST(Networks, QueueHeadsDoNotFeedDecisions) {
  auto le = tsc::testing::live_env(2, 2, 30);
  std::mt19937_64 rng(4);
  ActorNetwork actor(tsc::testing::small_config(*le.env), rng);
  SequenceInput in = make_step_input(le.env->observations());
  const Mat before = actor.forward(in, actor.initial_hidden(4)).log_probs.value();
  for (auto& [name, t] : actor.params().entries()) {
    if (name.rfind("actor.queue", 0) == 0) t.mutable_value().setRandom();
  }
  EXPECT_TRUE(same(actor.forward(in, actor.initial_hidden(4)).log_probs.value(), before));
  // The decision path does consume the attention aggregate.
  for (auto& [name, t] : actor.params().entries()) {
    if (name == "actor.spatial.value.weight") t.mutable_value() *= 2.0;
  }
  EXPECT_FALSE(same(actor.forward(in, actor.initial_hidden(4)).log_probs.value(), before));
}

TEST(Networks, PermutingAbsentBlocksLeavesValueUnchanged) {
  auto le = tsc::testing::live_env(2, 2, 30);
  const auto& obs = le.env->observations();
  std::mt19937_64 rng(5);
  CriticNetwork critic(tsc::testing::small_config(*le.env), rng);
  SequenceInput in = make_step_input(obs);
  set_neighbor_actions(in, obs, {0, 1, 2, 3});
  const Mat v = critic.forward(in, critic.initial_hidden(4)).value.value();
  // Corner agent 0 lacks N and W: swap those two (zero) block rows.
  ASSERT_FALSE(obs[0].mask[0]);
  ASSERT_FALSE(obs[0].mask[3]);
  in.blocks.row(1).swap(in.blocks.row(4));
  in.neighbor_actions.row(0).swap(in.neighbor_actions.row(3));
  EXPECT_TRUE(same(critic.forward(in, critic.initial_hidden(4)).value.value(), v));
}

TEST(Networks, ShapeErrors) {
  auto le = tsc::testing::live_env(2, 2, 2);
  std::mt19937_64 rng(6);
  NetworkConfig cfg = tsc::testing::small_config(*le.env);
  ActorNetwork actor(cfg, rng);
  CriticNetwork critic(cfg, rng);
  SequenceInput in = make_step_input(le.env->observations());
  EXPECT_THROW(actor.forward(in, actor.initial_hidden(3)), ShapeError);
  EXPECT_THROW(critic.forward(in, critic.initial_hidden(4)), ShapeError);  // no action blocks
  in.blocks.conservativeResize(in.blocks.rows(), in.blocks.cols() - 1);
  EXPECT_THROW(actor.forward(in, actor.initial_hidden(4)), ShapeError);
  cfg.heads = 5;
  EXPECT_THROW(ActorNetwork(cfg, rng), ValidationError);
}

namespace {

struct LossBatch {
  SequenceInput input;
  std::vector<long> actions;
  std::vector<double> old_log_probs, advantages;
  Mat queue_targets, value_targets;
};

LossBatch random_batch(encoding::Environment& env, int steps, std::mt19937_64& rng) {
  LossBatch b;
  std::vector<SequenceInput> ins;
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> lp(-3.0, -0.5);
  const int agents = env.num_agents();
  for (int t = 0; t < steps; ++t) {
    auto acts = tsc::testing::random_actions(agents, rng);
    SequenceInput in = make_step_input(env.observations());
    set_neighbor_actions(in, env.observations(), acts);
    ins.push_back(in);
    for (int a : acts) {
      b.actions.push_back(a);
      b.old_log_probs.push_back(lp(rng));
      b.advantages.push_back(n(rng));
    }
    env.step(acts);
  }
  b.input = concat_steps(ins);
  b.queue_targets = Mat::Random(b.input.rows(), traffic::kTrackedLanes).cwiseAbs();
  b.value_targets = Mat::Random(b.input.rows(), 1);
  return b;
}

}  // namespace

TEST(EndToEndGradient, ActorLoss) {
  auto le = tsc::testing::live_env(2, 2, 20);
  std::mt19937_64 rng(21);
  ActorNetwork actor(tsc::testing::small_config(*le.env, 8, 2), rng);
  LossBatch b = random_batch(*le.env, 3, rng);
  std::vector<Tensor> params;
  for (const auto& [_, t] : actor.params().entries()) params.push_back(t);
  auto loss = [&](const std::vector<Tensor>&) {
    auto out = actor.forward(b.input, actor.initial_hidden(4));
    return nn::add(nn::add(ppo_policy_loss(out.log_probs, b.old_log_probs, b.actions, b.advantages, 0.2),
                           nn::scale(entropy_loss(out.log_probs), 0.01)),
                   nn::scale(mse_loss(out.queue_pred, b.queue_targets), 0.005));
  };
  EXPECT_LT(gradcheck(loss, params), 1e-4);
}

TEST(EndToEndGradient, CriticLoss) {
  auto le = tsc::testing::live_env(2, 2, 20);
  std::mt19937_64 rng(22);
  CriticNetwork critic(tsc::testing::small_config(*le.env, 8, 2), rng);
  LossBatch b = random_batch(*le.env, 3, rng);
  std::vector<Tensor> params;
  for (const auto& [_, t] : critic.params().entries()) params.push_back(t);
  auto loss = [&](const std::vector<Tensor>&) {
    auto out = critic.forward(b.input, critic.initial_hidden(4));
    return nn::add(nn::scale(mse_loss(out.value, b.value_targets), 0.5),
                   nn::scale(mse_loss(out.queue_pred, b.queue_targets), 0.005));
  };
  EXPECT_LT(gradcheck(loss, params), 1e-4);
}

TEST(MaskSoundness, AbsentNeighborPerturbationIsInvisible) {
  auto le = tsc::testing::live_env(3, 3, 25);
  const auto& obs = le.env->observations();
  std::mt19937_64 rng(31);
  NetworkConfig cfg = tsc::testing::small_config(*le.env, 32, 4);
  ActorNetwork actor(cfg, rng);
  CriticNetwork critic(cfg, rng);
  std::vector<int> acts = tsc::testing::random_actions(9, rng);
  SequenceInput base = make_step_input(obs);
  set_neighbor_actions(base, obs, acts);

  auto run = [&](const SequenceInput& in) {
    actor.params().zero_grad();
    critic.params().zero_grad();
    auto a = actor.forward(in, actor.initial_hidden(9));
    auto c = critic.forward(in, critic.initial_hidden(9));
    tsc::testing::project(a.log_probs, 1).backward();
    tsc::testing::project(c.value, 2).backward();
    return std::make_tuple(Mat(a.log_probs.value()), Mat(c.value.value()), grads(actor.params()),
                           grads(critic.params()));
  };
  const auto [lp0, v0, ga0, gc0] = run(base);

  for (int trial = 0; trial < 5; ++trial) {
    SequenceInput noisy = base;
    for (long i = 0; i < 9; ++i) {
      for (int k = 0; k < 4; ++k) {
        if (obs[i].mask[k]) continue;
        noisy.blocks.row(i * 5 + 1 + k) = tsc::testing::random_mat(1, cfg.block_input_dim, rng, -50, 50);
        noisy.neighbor_actions.row(i * 4 + k) = tsc::testing::random_mat(1, kActionFeatureDim, rng, -50, 50);
      }
    }
    const auto [lp1, v1, ga1, gc1] = run(noisy);
    EXPECT_TRUE(same(lp0, lp1));
    EXPECT_TRUE(same(v0, v1));
    for (std::size_t p = 0; p < ga0.size(); ++p) EXPECT_TRUE(same(ga0[p], ga1[p])) << actor.params().entries()[p].first;
    for (std::size_t p = 0; p < gc0.size(); ++p) EXPECT_TRUE(same(gc0[p], gc1[p])) << critic.params().entries()[p].first;
  }

  // Observation-level perturbation never reaches the network input.
  auto perturbed = obs;
  for (auto& o : perturbed) {
    for (int k = 0; k < 4; ++k) {
      if (!o.mask[k]) std::fill(o.neighbors[k].begin(), o.neighbors[k].end(), 7.0);
    }
  }
  EXPECT_TRUE(same(make_step_input(perturbed).blocks, make_step_input(obs).blocks));
}

namespace {

struct TinySetup {
  std::shared_ptr<const traffic::RoadNetwork> net = tsc::testing::make_grid(2, 2);
  encoding::EnvConfig env;
  TrainConfig train;
  DemandFn demand;

  TinySetup() {
    env.episode_length = 100.0;
    train.batch_size = 40;
    train.epochs = 2;
    train.hidden = 16;
    train.heads = 4;
    train.seed = 77;
    demand = [net = net](int ep) {
      traffic::DemandSpec ds;
      ds.vehicles_per_hour = 500;
      ds.horizon = 100;
      return traffic::synthetic_demand(*net, ds, 300 + ep);
    };
  }
  Trainer make() const { return Trainer(net, env, train, demand); }
};

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST(Trainer, SameSeedSameTraceAndCheckpoint) {
  TinySetup s;
  Trainer a = s.make(), b = s.make();
  for (int e = 0; e < 3; ++e) EXPECT_EQ(to_json(a.train_episode()).dump(), to_json(b.train_episode()).dump());
  const auto pa = temp_path("det_a.ckpt"), pb = temp_path("det_b.ckpt");
  a.save(pa);
  b.save(pb);
  EXPECT_EQ(file_bytes(pa), file_bytes(pb));
  std::filesystem::remove(pa);
  std::filesystem::remove(pb);
}

TEST(Trainer, ResumeContinuesBitIdentically) {
  TinySetup s;
  Trainer straight = s.make();
  std::vector<std::string> expected;
  for (int e = 0; e < 4; ++e) expected.push_back(to_json(straight.train_episode()).dump());

  Trainer first = s.make();
  first.train_episode();
  first.train_episode();
  const auto path = temp_path("resume.ckpt");
  first.save(path);
  Trainer resumed = s.make();
  resumed.restore(read_checkpoint(path));
  EXPECT_EQ(resumed.episodes_done(), 2);
  EXPECT_EQ(to_json(resumed.train_episode()).dump(), expected[2]);
  EXPECT_EQ(to_json(resumed.train_episode()).dump(), expected[3]);
  std::filesystem::remove(path);
}

TEST(Trainer, RestoreRejectsMismatchedConfig) {
  TinySetup s;
  Trainer t = s.make();
  Checkpoint ck = t.checkpoint();
  s.train.lr_actor = 1e-3;
  Trainer other = s.make();
  EXPECT_THROW(other.restore(ck), ValidationError);
}

TEST(Trainer, NonFiniteParametersHaltWithSnapshot) {
  TinySetup s;
  Trainer t = s.make();
  const auto path = temp_path("fault.ckpt");
  t.set_fault_snapshot_path(path);
  t.actor().params().entries()[0].second.mutable_value()(0, 0) = std::nan("");
  try {
    t.train_episode();
    FAIL() << "expected a training fault";
  } catch (const TrainingFault& e) {
    EXPECT_EQ(e.snapshot(), path.string());
    EXPECT_TRUE(std::filesystem::exists(path));
  }
  std::filesystem::remove(path);
}

TEST(Trainer, ConfigValidation) {
  TrainConfig c;
  c.gamma = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.clip_eps = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_THROW(train_config_from_json({{"gama", 0.9}}), ValidationError);
  EXPECT_EQ(to_json(train_config_from_json(to_json(TrainConfig{}))), to_json(TrainConfig{}));
}

TEST(Trainer, GammaZeroValuesTrackImmediateReward) {
  TinySetup s;
  s.train.gamma = 0.0 + 1e-9;
  s.train.lambda = 1.0;
  s.train.epochs = 4;
  s.train.lr_critic = 3e-3;
  Trainer t = s.make();
  double last = 0, first = 0;
  for (int e = 0; e < 12; ++e) {
    auto log = t.train_episode();
    if (e == 0) first = log.stats.value_loss;
    last = log.stats.value_loss;
  }
  // Value error against r (targets r + ~0 V') ends below the zero predictor's.
  double zero_pred = 0.0;
  {
    auto env = encoding::Environment(s.net, s.env);
    env.reset(s.demand(99), 1);
    std::mt19937_64 rng(1);
    int n = 0;
    while (!env.done()) {
      for (double r : env.step(tsc::testing::random_actions(4, rng))) {
        zero_pred += std::pow(r * s.train.reward_scale, 2);
        ++n;
      }
    }
    zero_pred /= n;
  }
  EXPECT_LT(last, zero_pred);
  EXPECT_LT(last, first);
}

TEST(Checkpoint, RoundTripAndCorruption) {
  Checkpoint ck;
  ck.header = {{"kind", "test"}, {"n", 3}};
  ck.arrays.emplace_back("a", Mat::Random(3, 4));
  ck.arrays.emplace_back("b", Mat::Random(1, 1));
  const auto path = temp_path("rt.ckpt");
  write_checkpoint(path, ck);
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  Checkpoint back = read_checkpoint(path);
  EXPECT_EQ(back.header, ck.header);
  EXPECT_TRUE(same(back.array("a"), ck.array("a")));
  EXPECT_THROW(back.array("zz"), ValidationError);

  std::string bytes = file_bytes(path);
  bytes[bytes.size() - 20] ^= 0x1;
  std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes;
  EXPECT_THROW(read_checkpoint(path), ValidationError);
  std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes.substr(0, 30);
  EXPECT_THROW(read_checkpoint(path), ValidationError);
  std::filesystem::remove(path);
  EXPECT_THROW(read_checkpoint(path), ValidationError);
}

TEST(Policy, GreedyIsDeterministicAndRejectsNaN) {
  TinySetup s;
  Trainer t = s.make();
  auto actor = load_actor(t.checkpoint());
  encoding::Environment env(s.net, s.env);
  auto run = [&](PolicyController& pc) {
    env.reset(s.demand(0), 1);
    pc.reset(5);
    std::vector<int> trace;
    while (!env.done()) {
      auto d = pc.decide(env);
      trace.insert(trace.end(), d.phases.begin(), d.phases.end());
      env.step(d.phases);
    }
    return trace;
  };
  PolicyController g1(actor, true), g2(actor, true);
  EXPECT_EQ(run(g1), run(g2));
  PolicyController sampled(actor, false);
  EXPECT_EQ(run(sampled).size(), run(g1).size());

  auto broken = load_actor(t.checkpoint());
  broken->params().entries().back().second.mutable_value().setConstant(std::nan(""));
  // The queue head is not on the decision path; break the policy head instead.
  for (auto& [name, p] : broken->params().entries()) {
    if (name == "actor.policy.bias") p.mutable_value().setConstant(std::nan(""));
  }
  PolicyController bad(broken, true);
  env.reset(s.demand(0), 1);
  EXPECT_THROW(bad.decide(env), TrainingFault);
}
