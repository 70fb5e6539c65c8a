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

#pragma once

// Episode rollouts and the training loop.
//
// An episode draws a fresh deployment (unless the environment pins one),
// sweeps each expert codebook on all sectors to build the observations,
// lets the shared actor pick one codebook per sector, then runs the joint
// cell search and credits each sector with the UEs it serves.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssbcb/agent.hpp"
#include "ssbcb/beams.hpp"
#include "ssbcb/cellsearch.hpp"
#include "ssbcb/propagation.hpp"
#include "ssbcb/scenario.hpp"
#include "ssbcb/util.hpp"

namespace ssbcb {

struct Environment {
  SiteLayout layout;
  ScenarioConfig scenario;
  RadioConfig radio;
  BeamPool pool;
  std::vector<Codebook> experts;
  int n = 24;
  std::optional<GainMatrix> fixed_gains;  // pins every episode to one world

  double tau() const { return radio.detection_threshold_dbm; }
  int m() const { return pool.size(); }
  int observation_dim() const {
    int d = 0;
    for (const auto& cb : experts) d += static_cast<int>(cb.size());
    return d;
  }
  double reward_scale() const {
    return fixed_gains ? std::max(1, fixed_gains->num_ues) : std::max(1, scenario.num_ues);
  }
};

// Seeds of the scenario and channel draws for environment instance `env_seed`.
inline ScenarioConfig instance_scenario(const Environment& env, std::uint64_t env_seed) {
  ScenarioConfig c = env.scenario;
  c.seed = derive_seed(env_seed, label_of("instance/scenario"));
  return c;
}

inline RadioConfig instance_radio(const Environment& env, std::uint64_t env_seed) {
  RadioConfig r = env.radio;
  r.seed = derive_seed(env_seed, label_of("instance/channel"));
  return r;
}

inline Scenario instance_deployment(const Environment& env, std::uint64_t env_seed) {
  return generate_scenario(instance_scenario(env, env_seed), env.layout);
}

inline GainMatrix instance_gains(const Environment& env, std::uint64_t env_seed, int threads = 1) {
  if (env.fixed_gains) return *env.fixed_gains;
  const Scenario sc = instance_deployment(env, env_seed);
  return build_gain_matrix(sc, env.pool, instance_radio(env, env_seed), threads);
}

struct EpisodeResult {
  std::vector<EpisodeSample> samples;  // one per sector
  std::vector<int> sector_rewards;
  int coverage = 0;
  int cell_searches = 0;
};

inline EpisodeResult run_episode_on(const GainMatrix& gains, const Environment& env, const nn::DenseNet& actor,
                                    DecodeMode mode, std::uint64_t sample_seed) {
  EpisodeResult r;
  const ExpertSweep sweep = sweep_experts(gains, env.experts, env.tau());
  r.cell_searches = static_cast<int>(env.experts.size());
  Deployment dep;
  for (int s = 0; s < gains.num_sectors; ++s) {
    EpisodeSample sample;
    sample.sector = s;
    sample.observation = sweep.observations[static_cast<std::size_t>(s)].normalized;
    CounterRng rng(sample_seed, static_cast<std::uint64_t>(s));
    sample.action = select_codebook(actor, sample.observation, env.n, mode, &rng);
    dep.codebooks.push_back({sample.action.beams, "neural"});
    r.samples.push_back(std::move(sample));
  }
  ++r.cell_searches;
  const auto assoc = associate(gains, dep, env.tau());
  r.sector_rewards = per_sector_coverage(assoc, gains.num_sectors);
  r.coverage = assoc.covered_count;
  for (auto& s : r.samples) s.loss = -static_cast<double>(r.sector_rewards[static_cast<std::size_t>(s.sector)]);
  return r;
}

inline EpisodeResult run_episode(const Environment& env, std::uint64_t env_seed, const nn::DenseNet& actor,
                                 DecodeMode mode, std::uint64_t sample_seed) {
  return run_episode_on(instance_gains(env, env_seed), env, actor, mode, sample_seed);
}

struct TrainLogRow {
  int iteration = 0;
  double mean_reward = 0.0;  // UEs served per sector sample
  double mean_advantage_abs = 0.0;
  double actor_grad_norm = 0.0;
};

struct TrainResult {
  AgentBundle agent;
  std::vector<TrainLogRow> log;
  int iterations_run = 0;
};

inline AgentBundle make_agent(const Environment& env, const TrainConfig& cfg) {
  AgentBundle a;
  a.actor = nn::DenseNet::create(env.observation_dim(), cfg.actor_hidden, env.m(), derive_seed(cfg.seed, label_of("actor")));
  a.critic = nn::DenseNet::create(env.observation_dim(), cfg.critic_hidden, 1, derive_seed(cfg.seed, label_of("critic")));
  a.actor_state = nn::AdamState::for_net(a.actor, cfg.actor_learning_rate);
  a.critic_state = nn::AdamState::for_net(a.critic, cfg.critic_learning_rate);
  a.manifest.pool_hash = pool_hash(env.pool);
  a.manifest.n = env.n;
  a.manifest.m = env.m();
  a.manifest.tau_dbm = env.tau();
  a.manifest.reward_scale = env.reward_scale();
  a.manifest.train_seed = cfg.seed;
  a.manifest.env_seed_begin = cfg.env_seed_offset;
  a.manifest.env_seed_end = cfg.env_seed_offset;
  return a;
}

struct TrainHooks {
  std::function<void(const TrainLogRow&)> on_iteration;
  std::function<void(const AgentBundle&)> on_checkpoint;
  int threads = 1;
};

// Training environment ids for iteration `it`, episode k:
//   env_seed_offset + it * K + k.
// Stops at cfg.iterations or, with a positive window W, at the first
// multiple of W (>= 2W) where the mean reward over the last W iterations
// beats the previous W by less than convergence_tolerance (relative).
inline TrainResult train(const Environment& env, const TrainConfig& cfg, AgentBundle agent,
                         const TrainHooks& hooks = {}) {
  cfg.validate();
  TrainResult out;
  const auto K = static_cast<std::size_t>(cfg.batch_size);
  const double scale = agent.manifest.reward_scale;
  std::vector<double> rewards;
  for (int it = agent.manifest.iterations_done; it < cfg.iterations && !agent.manifest.converged; ++it) {
    std::vector<EpisodeResult> episodes(K);
    parallel_for(K, hooks.threads, [&](std::size_t k) {
      const std::uint64_t idx = static_cast<std::uint64_t>(it) * K + k;
      episodes[k] = run_episode(env, cfg.env_seed_offset + idx, agent.actor, DecodeMode::kSample,
                                derive_seed(cfg.seed, label_of("train/sampling") + idx));
    });
    std::vector<EpisodeSample> batch;
    for (auto& e : episodes)
      for (auto& s : e.samples) batch.push_back(std::move(s));
    const UpdateDiagnostics d =
        reinforce_update(agent.actor, agent.critic, agent.actor_state, agent.critic_state, batch, cfg, scale);

    TrainLogRow row{it, -d.mean_loss, d.mean_abs_advantage, d.actor_grad_norm};
    out.log.push_back(row);
    rewards.push_back(row.mean_reward);
    ++out.iterations_run;
    agent.manifest.iterations_done = it + 1;
    agent.manifest.env_seed_end = cfg.env_seed_offset + static_cast<std::uint64_t>(it + 1) * K;
    if (hooks.on_iteration) hooks.on_iteration(row);

    const auto W = static_cast<std::size_t>(std::max(0, cfg.convergence_window));
    if (W > 0 && rewards.size() >= 2 * W && rewards.size() % W == 0) {
      double cur = 0.0, prev = 0.0;
      for (std::size_t i = rewards.size() - W; i < rewards.size(); ++i) cur += rewards[i];
      for (std::size_t i = rewards.size() - 2 * W; i < rewards.size() - W; ++i) prev += rewards[i];
      if (cur - prev < cfg.convergence_tolerance * std::abs(prev)) agent.manifest.converged = true;
    }
    if (hooks.on_checkpoint && cfg.checkpoint_every > 0 && (it + 1) % cfg.checkpoint_every == 0)
      hooks.on_checkpoint(agent);
  }
  out.agent = std::move(agent);
  return out;
}

}  // namespace ssbcb
