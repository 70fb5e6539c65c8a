// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "ssbcb/agent.hpp"

namespace ssbcb {
namespace {

std::vector<double> softmax_ref(const std::vector<double>& z, const std::vector<int>& taken) {
  std::vector<double> p(z.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (std::find(taken.begin(), taken.end(), static_cast<int>(i)) != taken.end()) continue;
    total += (p[i] = std::exp(z[i]));
  }
  for (double& v : p) v /= total;
  return p;
}

double sequence_log_prob(const std::vector<double>& z, const std::vector<int>& beams) {
  std::vector<int> taken;
  double lp = 0.0;
  for (int b : beams) {
    lp += std::log(softmax_ref(z, taken)[static_cast<std::size_t>(b)]);
    taken.push_back(b);
  }
  return lp;
}

double sequence_entropy(const std::vector<double>& z, const std::vector<int>& beams) {
  std::vector<int> taken;
  double h = 0.0;
  for (int b : beams) {
    for (double p : softmax_ref(z, taken))
      if (p > 0.0) h -= p * std::log(p);
    taken.push_back(b);
  }
  return h;
}

TEST(Selection, FullCodebookIsPermutation) {
  CounterRng rng(1, "test/select");
  const std::vector<double> z{0.3, -1.0, 2.0, 0.0, 0.5, 0.7};
  const auto a = select_from_logits(z, 6, DecodeMode::kSample, &rng);
  EXPECT_EQ(std::set<int>(a.beams.begin(), a.beams.end()).size(), 6u);
  EXPECT_NEAR(a.stepwise_logprobs.back(), 0.0, 1e-12);
  EXPECT_THROW(select_from_logits(z, 7, DecodeMode::kGreedy, nullptr), std::invalid_argument);
  EXPECT_THROW(select_from_logits(z, 2, DecodeMode::kSample, nullptr), std::invalid_argument);
}

TEST(Selection, GreedyTakesLogitsInDescendingOrder) {
  const std::vector<double> z{0.3, -1.0, 2.0, 0.0, 0.5, 0.7};
  const auto a = select_from_logits(z, 4, DecodeMode::kGreedy, nullptr);
  EXPECT_EQ(a.beams, (std::vector<int>{2, 5, 4, 0}));
  EXPECT_NEAR(a.total_logprob, sequence_log_prob(z, a.beams), 1e-12);
}

TEST(Selection, DominantLogitIsAlwaysFirst) {
  std::vector<double> z(20, 0.0);
  z[13] = 50.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    CounterRng rng(seed, "test/select");
    EXPECT_EQ(select_from_logits(z, 3, DecodeMode::kSample, &rng).beams[0], 13);
  }
}

TEST(Selection, SamplingFollowsInverseCdf) {
  const std::vector<double> z{0.0, std::log(2.0), std::log(3.0), -0.4, 1.1};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CounterRng rng(seed, "test/trace");
    CounterRng replay(seed, "test/trace");
    const auto a = select_from_logits(z, 3, DecodeMode::kSample, &rng);
    std::vector<int> taken;
    for (int step = 0; step < 3; ++step) {
      const auto p = softmax_ref(z, taken);
      const double u = replay.uniform();
      double cum = 0.0;
      int pick = -1;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        pick = static_cast<int>(i);
        cum += p[i];
        if (u < cum) break;
      }
      ASSERT_EQ(a.beams[static_cast<std::size_t>(step)], pick);
      EXPECT_NEAR(a.stepwise_logprobs[static_cast<std::size_t>(step)], std::log(p[static_cast<std::size_t>(pick)]), 1e-12);
      taken.push_back(pick);
    }
  }
}

TEST(Selection, EmpiricalFirstPickFrequencies) {
  const std::vector<double> z{0.0, std::log(2.0), std::log(3.0)};
  std::vector<int> counts(3, 0);
  const int draws = 12000;
  for (int i = 0; i < draws; ++i) {
    CounterRng rng(static_cast<std::uint64_t>(i), "test/freq");
    ++counts[static_cast<std::size_t>(select_from_logits(z, 1, DecodeMode::kSample, &rng).beams[0])];
  }
  for (int k = 0; k < 3; ++k) {
    const double p = (k + 1) / 6.0;
    EXPECT_NEAR(counts[static_cast<std::size_t>(k)] / double(draws), p, 4.0 * std::sqrt(p * (1 - p) / draws));
  }
}

TEST(Selection, ActorSamplesAreDistinctAndValid) {
  const nn::DenseNet actor = nn::DenseNet::create(8, {16}, 30, 3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CounterRng rng(seed, "test/actor");
    std::vector<double> obs(8);
    for (double& v : obs) v = rng.uniform();
    const auto a = select_codebook(actor, obs, 10, DecodeMode::kSample, &rng);
    EXPECT_EQ(std::set<int>(a.beams.begin(), a.beams.end()).size(), 10u);
    for (int b : a.beams) EXPECT_TRUE(b >= 0 && b < 30);
  }
  EXPECT_THROW(select_codebook(actor, std::vector<double>(7, 0.0), 3, DecodeMode::kGreedy), std::invalid_argument);
}

TEST(SequenceGradients, MatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng rng(seed, "test/chain");
    std::vector<double> z(7);
    for (double& v : z) v = rng.normal(0.0, 1.5);
    const auto a = select_from_logits(z, 4, DecodeMode::kSample, &rng);
    const auto g = sequence_gradients(z, a.beams);
    const double h = 1e-6;
    for (std::size_t i = 0; i < z.size(); ++i) {
      auto up = z, down = z;
      up[i] += h;
      down[i] -= h;
      EXPECT_NEAR(g.log_prob[i], (sequence_log_prob(up, a.beams) - sequence_log_prob(down, a.beams)) / (2 * h), 1e-7);
      EXPECT_NEAR(g.entropy[i], (sequence_entropy(up, a.beams) - sequence_entropy(down, a.beams)) / (2 * h), 1e-7);
    }
  }
}

TEST(Advantages, StandardizedThenClamped) {
  const std::vector<double> raw{1.0, 2.0, 3.0, 4.0, 10.0};
  const auto a = standardize_advantages(raw, 5.0);
  double mean = 0.0, sq = 0.0;
  for (double v : a) mean += v;
  mean /= 5.0;
  for (double v : a) sq += (v - mean) * (v - mean);
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(sq / 5.0), 1.0, 1e-12);

  std::vector<double> outlier(100, 0.0);
  outlier[0] = 1000.0;
  EXPECT_DOUBLE_EQ(standardize_advantages(outlier, 5.0)[0], 5.0);
  EXPECT_DOUBLE_EQ(standardize_advantages(outlier, 2.0)[0], 2.0);
  for (double v : standardize_advantages(std::vector<double>(4, 3.5), 5.0)) EXPECT_EQ(v, 0.0);
}

struct Bandit {
  nn::DenseNet actor = nn::DenseNet::create(2, {16}, 4, 0);
  nn::DenseNet critic = nn::DenseNet::create(2, {8}, 1, 0);
  nn::AdamState as = nn::AdamState::for_net(actor, 1e-2);
  nn::AdamState cs = nn::AdamState::for_net(critic, 1e-2);
};

TEST(Reinforce, LearnsSingleArmBandit) {
  // One beam is worth covering, the rest are worthless.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Bandit b;
    b.actor = nn::DenseNet::create(2, {16}, 4, seed);
    b.as = nn::AdamState::for_net(b.actor, 1e-2);
    TrainConfig cfg;
    const std::vector<double> obs{0.5, 0.25};
    CounterRng rng(seed, "test/bandit");
    for (int it = 0; it < 500; ++it) {
      std::vector<EpisodeSample> batch;
      for (int k = 0; k < 16; ++k) {
        EpisodeSample s;
        s.observation = obs;
        s.action = select_codebook(b.actor, obs, 1, DecodeMode::kSample, &rng);
        s.loss = s.action.beams[0] == 2 ? -10.0 : 0.0;
        batch.push_back(std::move(s));
      }
      reinforce_update(b.actor, b.critic, b.as, b.cs, batch, cfg, 10.0);
    }
    const auto p = nn::softmax_masked(nn::forward(b.actor, obs));
    EXPECT_GT(p[2], 0.95) << "seed " << seed;
  }
}

TEST(Reinforce, ConstantLossLeavesActorUnchanged) {
  Bandit b;
  const nn::DenseNet before = b.actor;
  TrainConfig cfg;
  CounterRng rng(1, "test/zero");
  std::vector<EpisodeSample> batch;
  for (int k = 0; k < 8; ++k) {
    EpisodeSample s;
    s.observation = {0.1, 0.2};
    s.action = select_codebook(b.actor, s.observation, 2, DecodeMode::kSample, &rng);
    s.loss = -3.0;
    batch.push_back(std::move(s));
  }
  const auto d = reinforce_update(b.actor, b.critic, b.as, b.cs, batch, cfg, 10.0);
  EXPECT_EQ(d.actor_grad_norm, 0.0);
  EXPECT_TRUE(b.actor == before);
  EXPECT_DOUBLE_EQ(d.mean_loss, -3.0);
}

TEST(Reinforce, CriticRegressesScaledLoss) {
  Bandit b;
  TrainConfig cfg;
  CounterRng rng(2, "test/critic");
  const std::vector<double> obs{0.3, 0.7};
  double last = 0.0;
  for (int it = 0; it < 600; ++it) {
    std::vector<EpisodeSample> batch;
    for (int k = 0; k < 4; ++k) {
      EpisodeSample s;
      s.observation = obs;
      s.action = select_codebook(b.actor, obs, 1, DecodeMode::kSample, &rng);
      s.loss = -40.0;
      batch.push_back(std::move(s));
    }
    last = reinforce_update(b.actor, b.critic, b.as, b.cs, batch, cfg, 100.0).critic_loss;
    if (it == 599) EXPECT_NEAR(batch[0].baseline, -40.0, 1.0);
  }
  EXPECT_NEAR(nn::forward(b.critic, obs)[0], -0.4, 1e-2);
  EXPECT_LT(last, 1e-4);
}

TEST(Reinforce, RejectsBadBatches) {
  Bandit b;
  TrainConfig cfg;
  std::vector<EpisodeSample> empty;
  EXPECT_THROW(reinforce_update(b.actor, b.critic, b.as, b.cs, empty, cfg, 1.0), std::invalid_argument);
  std::vector<EpisodeSample> nan(1);
  nan[0].observation = {0.0, 0.0};
  nan[0].action.beams = {0};
  nan[0].loss = NAN;
  EXPECT_THROW(reinforce_update(b.actor, b.critic, b.as, b.cs, nan, cfg, 1.0), NumericError);
}

TEST(Deploy, IdenticalObservationsGiveIdenticalCodebooks) {
  const nn::DenseNet actor = nn::DenseNet::create(6, {12}, 20, 5);
  Observation o;
  o.counts = {1, 2, 3, 0, 0, 4};
  o.normalized = {0.1, 0.2, 0.3, 0.0, 0.0, 0.4};
  std::vector<Observation> obs(3, o);
  for (int s = 0; s < 3; ++s) obs[static_cast<std::size_t>(s)].sector = s;
  const Deployment d = act_deploy(actor, obs, 5);
  ASSERT_EQ(d.codebooks.size(), 3u);
  EXPECT_EQ(d.codebooks[0].beam_indices, d.codebooks[1].beam_indices);
  EXPECT_EQ(d.codebooks[1].beam_indices, d.codebooks[2].beam_indices);
  for (const auto& cb : d.codebooks) EXPECT_NO_THROW(cb.validate(20, 5));
}

TEST(Manifest, CompatibilityChecks) {
  AgentManifest m;
  m.pool_hash = 0xabc;
  m.n = 24;
  m.m = 144;
  m.tau_dbm = -66.55;
  EXPECT_NO_THROW(m.check_compatible(0xabc, 24, 144, -66.55));
  EXPECT_THROW(m.check_compatible(0xabd, 24, 144, -66.55), IncompatibleError);
  EXPECT_THROW(m.check_compatible(0xabc, 12, 144, -66.55), IncompatibleError);
  EXPECT_THROW(m.check_compatible(0xabc, 24, 144, -70.0), IncompatibleError);
}

TEST(Manifest, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "ssbcb_agent_test";
  std::filesystem::remove_all(dir);
  AgentBundle a;
  a.actor = nn::DenseNet::create(4, {8}, 10, 1);
  a.critic = nn::DenseNet::create(4, {8}, 1, 2);
  a.actor_state = nn::AdamState::for_net(a.actor, 1e-3);
  a.critic_state = nn::AdamState::for_net(a.critic, 1e-3);
  a.manifest.pool_hash = 0x0123456789abcdefULL;
  a.manifest.n = 3;
  a.manifest.m = 10;
  a.manifest.tau_dbm = -66.55;
  a.manifest.reward_scale = 500.0;
  a.manifest.iterations_done = 42;
  a.manifest.env_seed_end = 42 * 36;
  save_agent(dir, a);
  const AgentBundle b = load_agent(dir);
  EXPECT_EQ(b.manifest.pool_hash, a.manifest.pool_hash);
  EXPECT_EQ(b.manifest.iterations_done, 42);
  EXPECT_EQ(b.manifest.env_seed_end, 42u * 36u);
  EXPECT_DOUBLE_EQ(b.manifest.tau_dbm, -66.55);
  const std::vector<double> obs{0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(select_codebook(a.actor, obs, 3, DecodeMode::kGreedy).beams,
            select_codebook(b.actor, obs, 3, DecodeMode::kGreedy).beams);
  std::filesystem::remove(dir / "critic.nnw");
  EXPECT_THROW(load_agent(dir), IncompatibleError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace ssbcb
