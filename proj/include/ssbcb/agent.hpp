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

// Actor-critic codebook policy. The actor maps a sector's observation to
// one logit per pool beam; a codebook is built by drawing n beams one at a
// time from the softmax over beams not yet chosen. The observation is fixed
// within an episode, so every step shares the same logits and only the mask
// changes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssbcb/cellsearch.hpp"
#include "ssbcb/error.hpp"
#include "ssbcb/nn.hpp"
#include "ssbcb/rng.hpp"

namespace ssbcb {

struct ActionSequence {
  std::vector<int> beams;
  std::vector<double> stepwise_logprobs;
  double total_logprob = 0.0;
};

enum class DecodeMode { kSample, kGreedy };

namespace detail {

// log of the masked softmax probability of `index`.
inline double masked_log_prob(std::span<const double> logits, std::span<const std::uint8_t> blocked, int index) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (!blocked[i]) hi = std::max(hi, logits[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (!blocked[i]) total += std::exp(logits[i] - hi);
  return logits[static_cast<std::size_t>(index)] - hi - std::log(total);
}

}  // namespace detail

// Sequential selection without replacement from fixed logits. Sampling
// inverts the CDF with one uniform per step, scanning beams in index order.
inline ActionSequence select_from_logits(std::span<const double> logits, int n, DecodeMode mode, CounterRng* rng) {
  const int m = static_cast<int>(logits.size());
  if (n < 1 || n > m) throw std::invalid_argument("select_codebook: need 1 <= n <= m");
  if (mode == DecodeMode::kSample && rng == nullptr) throw std::invalid_argument("select_codebook: sampling needs a generator");
  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(m), 0);
  ActionSequence a;
  for (int step = 0; step < n; ++step) {
    const auto p = nn::softmax_masked(logits, blocked);
    int pick = -1;
    if (mode == DecodeMode::kGreedy) {
      for (int i = 0; i < m; ++i)
        if (!blocked[static_cast<std::size_t>(i)] && (pick < 0 || p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(pick)])) pick = i;
    } else {
      const double u = rng->uniform();
      double cum = 0.0;
      for (int i = 0; i < m; ++i) {
        if (blocked[static_cast<std::size_t>(i)]) continue;
        pick = i;  // last open index absorbs rounding
        cum += p[static_cast<std::size_t>(i)];
        if (u < cum) break;
      }
    }
    const double lp = detail::masked_log_prob(logits, blocked, pick);
    a.beams.push_back(pick);
    a.stepwise_logprobs.push_back(lp);
    a.total_logprob += lp;
    blocked[static_cast<std::size_t>(pick)] = 1;
  }
  return a;
}

inline ActionSequence select_codebook(const nn::DenseNet& actor, std::span<const double> observation, int n,
                                      DecodeMode mode, CounterRng* rng = nullptr) {
  if (static_cast<int>(observation.size()) != actor.input_dim())
    throw std::invalid_argument("select_codebook: observation length does not match the actor input");
  const auto logits = nn::forward(actor, observation);
  return select_from_logits(logits, n, mode, rng);
}

// d/dlogits of log p(action) and of the summed per-step entropies.
struct SequenceGradients {
  std::vector<double> log_prob;
  std::vector<double> entropy;
};

inline SequenceGradients sequence_gradients(std::span<const double> logits, const std::vector<int>& beams) {
  const std::size_t m = logits.size();
  SequenceGradients g{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  std::vector<std::uint8_t> blocked(m, 0);
  for (int b : beams) {
    const auto p = nn::softmax_masked(logits, blocked);
    double h = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
    for (std::size_t i = 0; i < m; ++i) {
      g.log_prob[i] -= p[i];
      if (p[i] > 0.0) g.entropy[i] -= p[i] * (std::log(p[i]) + h);
    }
    g.log_prob[static_cast<std::size_t>(b)] += 1.0;
    blocked[static_cast<std::size_t>(b)] = 1;
  }
  return g;
}

struct EpisodeSample {
  int sector = 0;
  std::vector<double> observation;  // normalized counts
  ActionSequence action;
  double loss = 0.0;      // negative deployed coverage of the sector
  double baseline = 0.0;  // critic prediction, same units as loss
};

struct TrainConfig {
  int batch_size = 36;  // K episodes per update
  int iterations = 15000;
  double actor_learning_rate = 1e-3;
  double critic_learning_rate = 1e-3;
  double advantage_clamp = 5.0;
  double entropy_bonus = 0.0;
  std::uint64_t seed = 0;
  std::vector<int> actor_hidden{512, 512, 256};
  std::vector<int> critic_hidden{256, 128};
  int convergence_window = 500;         // 0 disables the early stop
  double convergence_tolerance = 1e-3;  // relative improvement between windows
  int checkpoint_every = 500;
  std::uint64_t env_seed_offset = 0;    // first training environment id

  void validate() const {
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch size must be >= 1");
    if (iterations < 0) throw std::invalid_argument("TrainConfig: iterations must be >= 0");
    if (!(advantage_clamp > 0.0)) throw std::invalid_argument("TrainConfig: advantage clamp must be positive");
  }
};

struct UpdateDiagnostics {
  double mean_loss = 0.0;
  double mean_abs_advantage = 0.0;  // before standardization, in loss/reward_scale units
  double actor_grad_norm = 0.0;
  double critic_loss = 0.0;
};

// Standardizes raw advantages across the batch, then clamps to +-clamp.
// A constant batch maps to all zeros.
inline std::vector<double> standardize_advantages(std::span<const double> raw, double clamp) {
  const auto k = static_cast<double>(raw.size());
  double mean = 0.0;
  for (double a : raw) mean += a;
  mean /= k;
  double var = 0.0;
  for (double a : raw) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / k);
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double z = sd > 1e-12 ? (raw[i] - mean) / sd : 0.0;
    out[i] = std::clamp(z, -clamp, clamp);
  }
  return out;
}

// One REINFORCE step for the actor (advantage = loss - critic baseline,
// standardized then clamped) and one mean-squared-error step for the
// critic, which regresses loss / reward_scale. Fills each sample's baseline.
inline UpdateDiagnostics reinforce_update(nn::DenseNet& actor, nn::DenseNet& critic, nn::AdamState& actor_state,
                                          nn::AdamState& critic_state, std::vector<EpisodeSample>& batch,
                                          const TrainConfig& cfg, double reward_scale) {
  if (batch.empty()) throw std::invalid_argument("reinforce_update: empty batch");
  if (!(reward_scale > 0.0)) throw std::invalid_argument("reinforce_update: reward scale must be positive");
  const auto K = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index in = actor.input_dim();
  nn::Matrix x(in, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto& s = batch[static_cast<std::size_t>(k)];
    if (!std::isfinite(s.loss)) throw NumericError("reinforce_update: non-finite loss");
    if (static_cast<Eigen::Index>(s.observation.size()) != in)
      throw std::invalid_argument("reinforce_update: observation length mismatch");
    for (Eigen::Index i = 0; i < in; ++i) x(i, k) = s.observation[static_cast<std::size_t>(i)];
  }

  UpdateDiagnostics d;
  const nn::Tape critic_tape = nn::forward(critic, x);
  std::vector<double> raw(static_cast<std::size_t>(K));
  for (Eigen::Index k = 0; k < K; ++k) {
    auto& s = batch[static_cast<std::size_t>(k)];
    s.baseline = critic_tape.output(0, k) * reward_scale;
    raw[static_cast<std::size_t>(k)] = s.loss / reward_scale - critic_tape.output(0, k);
    d.mean_loss += s.loss;
    d.mean_abs_advantage += std::abs(raw[static_cast<std::size_t>(k)]);
  }
  d.mean_loss /= static_cast<double>(K);
  d.mean_abs_advantage /= static_cast<double>(K);
  const auto adv = standardize_advantages(raw, cfg.advantage_clamp);

  const nn::Tape actor_tape = nn::forward(actor, x);
  nn::Matrix dlogits = nn::Matrix::Zero(actor_tape.output.rows(), K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double* col = actor_tape.output.col(k).data();
    const std::span<const double> logits(col, static_cast<std::size_t>(actor_tape.output.rows()));
    const auto g = sequence_gradients(logits, batch[static_cast<std::size_t>(k)].action.beams);
    const double a = adv[static_cast<std::size_t>(k)] / static_cast<double>(K);
    const double e = cfg.entropy_bonus / static_cast<double>(K);
    for (Eigen::Index i = 0; i < dlogits.rows(); ++i)
      dlogits(i, k) = a * g.log_prob[static_cast<std::size_t>(i)] - e * g.entropy[static_cast<std::size_t>(i)];
  }
  const nn::Gradients actor_grads = nn::backward(actor, actor_tape, dlogits);
  d.actor_grad_norm = std::sqrt(actor_grads.squared_norm());
  if (!std::isfinite(d.actor_grad_norm)) throw NumericError("reinforce_update: non-finite actor gradient");

  nn::Matrix dcritic(1, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double err = critic_tape.output(0, k) - batch[static_cast<std::size_t>(k)].loss / reward_scale;
    d.critic_loss += err * err;
    dcritic(0, k) = 2.0 * err / static_cast<double>(K);
  }
  d.critic_loss /= static_cast<double>(K);
  const nn::Gradients critic_grads = nn::backward(critic, critic_tape, dcritic);

  nn::optimizer_step(actor, actor_grads, actor_state);
  nn::optimizer_step(critic, critic_grads, critic_state);
  return d;
}

// Greedy decode per sector with the shared actor.
inline Deployment act_deploy(const nn::DenseNet& actor, const std::vector<Observation>& observations, int n) {
  Deployment d;
  for (const auto& o : observations) {
    const auto a = select_codebook(actor, o.normalized, n, DecodeMode::kGreedy);
    d.codebooks.push_back({a.beams, "neural"});
  }
  return d;
}

// Everything a trained agent must agree on with the deployment it runs in.
struct AgentManifest {
  std::uint64_t pool_hash = 0;
  int n = 0;
  int m = 0;
  double tau_dbm = 0.0;
  double reward_scale = 1.0;  // observation and reward normalization: UEs per scenario
  int iterations_done = 0;
  std::uint64_t train_seed = 0;
  std::uint64_t env_seed_begin = 0;  // training environments used ids [begin, end)
  std::uint64_t env_seed_end = 0;
  bool converged = false;

  void check_compatible(std::uint64_t other_pool_hash, int other_n, int other_m, double other_tau) const {
    if (other_pool_hash != pool_hash)
      throw IncompatibleError("agent was trained on pool " + hex64(pool_hash) + ", deployment uses " +
                              hex64(other_pool_hash));
    if (other_n != n || other_m != m) throw IncompatibleError("agent codebook dimensions do not match (n, m)");
    if (other_tau != tau_dbm) throw IncompatibleError("agent was trained with a different detection threshold");
  }
};

inline nlohmann::json to_json(const AgentManifest& a) {
  return {{"format", "ssbcb-agent-1"},     {"pool_hash", hex64(a.pool_hash)},     {"n", a.n},
          {"m", a.m},                       {"tau_dbm", a.tau_dbm},                {"reward_scale", a.reward_scale},
          {"iterations_done", a.iterations_done}, {"train_seed", a.train_seed},
          {"env_seed_begin", a.env_seed_begin},   {"env_seed_end", a.env_seed_end}, {"converged", a.converged}};
}

inline AgentManifest manifest_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "ssbcb-agent-1") throw IncompatibleError("unknown agent manifest format");
  AgentManifest a;
  a.pool_hash = std::stoull(j.at("pool_hash").get<std::string>(), nullptr, 16);
  a.n = j.at("n").get<int>();
  a.m = j.at("m").get<int>();
  a.tau_dbm = j.at("tau_dbm").get<double>();
  a.reward_scale = j.at("reward_scale").get<double>();
  a.iterations_done = j.at("iterations_done").get<int>();
  a.train_seed = j.at("train_seed").get<std::uint64_t>();
  a.env_seed_begin = j.at("env_seed_begin").get<std::uint64_t>();
  a.env_seed_end = j.at("env_seed_end").get<std::uint64_t>();
  a.converged = j.value("converged", false);
  return a;
}

struct AgentBundle {
  nn::DenseNet actor;
  nn::DenseNet critic;
  nn::AdamState actor_state;
  nn::AdamState critic_state;
  AgentManifest manifest;
};

// Writes actor.nnw, critic.nnw and manifest.json into `dir`.
inline void save_agent(const std::filesystem::path& dir, const AgentBundle& a) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "actor.nnw", std::ios::binary);
    nn::write_nnw(os, a.actor, &a.actor_state);
  }
  {
    std::ofstream os(dir / "critic.nnw", std::ios::binary);
    nn::write_nnw(os, a.critic, &a.critic_state);
  }
  std::ofstream os(dir / "manifest.json");
  os << to_json(a.manifest).dump(2) << '\n';
  if (!os) throw std::runtime_error("save_agent: failed to write " + dir.string());
}

inline AgentBundle load_agent(const std::filesystem::path& dir) {
  auto read = [&](const char* name) {
    std::ifstream is(dir / name, std::ios::binary);
    if (!is) throw IncompatibleError("load_agent: cannot open " + (dir / name).string());
    return nn::read_nnw(is);
  };
  auto actor = read("actor.nnw");
  auto critic = read("critic.nnw");
  std::ifstream ms(dir / "manifest.json");
  if (!ms) throw IncompatibleError("load_agent: missing manifest.json in " + dir.string());
  AgentBundle a;
  a.manifest = manifest_from_json(nlohmann::json::parse(ms));
  a.actor_state = actor.optimizer ? *actor.optimizer : nn::AdamState::for_net(actor.net, 1e-3);
  a.critic_state = critic.optimizer ? *critic.optimizer : nn::AdamState::for_net(critic.net, 1e-3);
  a.actor = std::move(actor.net);
  a.critic = std::move(critic.net);
  if (a.actor.output_dim() != a.manifest.m) throw IncompatibleError("load_agent: actor output does not match m");
  return a;
}

}  // namespace ssbcb
