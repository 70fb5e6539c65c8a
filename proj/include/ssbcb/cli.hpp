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

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ssbcb/agent.hpp"
#include "ssbcb/config.hpp"
#include "ssbcb/error.hpp"
#include "ssbcb/evaluation.hpp"
#include "ssbcb/trainer.hpp"

namespace ssbcb {

inline constexpr const char* kVersion = "1.0.0";

struct CliOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> set;
  int threads = 1;
  std::string out;
  std::string pool;
  std::string checkpoint;
  bool resume = false;
  std::string methods;
  std::optional<double> isd;
  std::optional<int> instances;
  bool calibrate_tau = false;
  double calibrate_target = 0.414;
  int samples = 1;
};

namespace cli_detail {

namespace fs = std::filesystem;

inline void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + p.string());
}

inline ExperimentConfig load(const CliOptions& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig c = load_config(o.config, o.set);
  if (o.seed) {
    c.scenario.seed = *o.seed;
    c.train.seed = *o.seed;
  }
  if (o.instances) c.eval.instances = *o.instances;
  if (o.isd) c.eval.isd = *o.isd;
  if (!o.methods.empty()) c.eval.methods = o.methods;
  return c;
}

inline Environment environment(const ExperimentConfig& c, const CliOptions& o) {
  Environment env;
  try {
    env = c.environment();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!o.pool.empty()) {
    std::ifstream f(o.pool);
    if (!f) throw ConfigError("cannot open pool file '" + o.pool + "'");
    env.pool = pool_from_json(nlohmann::json::parse(f));
    env.experts = build_expert_codebooks(env.pool, c.codebook_size, c.expert_codebooks);
  }
  return env;
}

inline std::string log_line(const TrainLogRow& r) {
  return std::to_string(r.iteration) + "," + format_double(r.mean_reward) + "," + format_double(r.mean_advantage_abs) +
         "," + format_double(r.actor_grad_norm) + "\n";
}

inline int cmd_gen(const CliOptions& o, std::ostream& out) {
  const ExperimentConfig c = load(o);
  const Environment env = environment(c, o);
  const fs::path dir = o.out.empty() ? fs::path("gen") : fs::path(o.out);
  fs::create_directories(dir);
  write_file(dir / "pool.json", to_json(env.pool).dump(1) + "\n");
  nlohmann::json experts = nlohmann::json::array();
  for (const auto& cb : env.experts) experts.push_back({{"label", cb.label}, {"beams", cb.beam_indices}});
  write_file(dir / "experts.json", experts.dump(1) + "\n");
  out << "pool " << env.pool.size() << " beams hash " << hex64(pool_hash(env.pool)) << '\n';
  for (int i = 0; i < o.samples; ++i) {
    ScenarioConfig sc = c.scenario;
    sc.seed = derive_seed(c.scenario.seed, label_of("gen/sample") + static_cast<std::uint64_t>(i));
    RadioConfig rc = c.radio;
    rc.seed = derive_seed(c.scenario.seed, label_of("gen/channel") + static_cast<std::uint64_t>(i));
    const Scenario scen = generate_scenario(sc, c.layout);
    const GainMatrix gm = build_gain_matrix(scen, env.pool, rc, o.threads);
    const std::string stem = "sample_" + std::to_string(i);
    const std::string sj = to_json(scen).dump(1) + "\n";
    write_file(dir / (stem + ".scenario.json"), sj);
    std::ostringstream gmx;
    write_gmx(gmx, gm);
    write_file(dir / (stem + ".gmx"), gmx.str());
    Fnv1a h;
    h.update(sj);
    out << stem << " scenario " << hex64(h.digest()) << " gains " << hex64(gain_matrix_hash(gm)) << '\n';
  }
  if (o.calibrate_tau) {
    const int count = o.instances.value_or(50);
    std::vector<GainMatrix> gms(static_cast<std::size_t>(count));
    Environment cal = env;
    cal.layout.isd = c.eval.isd;
    parallel_for(gms.size(), o.threads, [&](std::size_t i) {
      gms[i] = instance_gains(cal, derive_seed(c.scenario.seed, label_of("gen/calibration") + i));
    });
    const double tau = calibrate_tau(gms, env.experts.front(), o.calibrate_target);
    out << "calibrated detection_threshold_dbm " << format_double(tau) << " (c1 covers "
        << format_double(o.calibrate_target) << " over " << count << " instances at isd " << format_double(cal.layout.isd)
        << ")\n";
  }
  return 0;
}

inline int cmd_sweep(const CliOptions& o, std::ostream& out) {
  const ExperimentConfig c = load(o);
  const Environment env = environment(c, o);
  const std::uint64_t id = o.seed.value_or(0);
  const GainMatrix gm = instance_gains(env, id, o.threads);
  const ExpertSweep sw = sweep_experts(gm, env.experts, env.tau());
  const fs::path dir = o.out.empty() ? fs::path("sweep") : fs::path(o.out);
  fs::create_directories(dir);
  for (std::size_t e = 0; e < env.experts.size(); ++e) {
    std::ostringstream os;
    write_association_csv(os, sw.associations[e]);
    write_file(dir / (env.experts[e].label + "_association.csv"), os.str());
    out << env.experts[e].label << " covers " << sw.associations[e].covered_count << " of " << gm.num_ues << '\n';
  }
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& ob : sw.observations) obs.push_back({{"sector", ob.sector}, {"counts", ob.counts}});
  write_file(dir / "observations.json", obs.dump(1) + "\n");
  return 0;
}

inline int cmd_train(const CliOptions& o, std::ostream& out) {
  const ExperimentConfig c = load(o);
  const Environment env = environment(c, o);
  const fs::path dir = !o.checkpoint.empty() ? fs::path(o.checkpoint) : o.out.empty() ? fs::path("agent") : fs::path(o.out);
  AgentBundle agent;
  const fs::path log_path = dir / "train_log.csv";
  if (o.resume) {
    agent = load_agent(dir);
    agent.manifest.check_compatible(pool_hash(env.pool), env.n, env.m(), env.tau());
    if (agent.manifest.train_seed != c.train.seed || agent.manifest.env_seed_begin != c.train.env_seed_offset)
      throw IncompatibleError("checkpoint was trained with a different seed or environment range");
  } else {
    agent = make_agent(env, c.train);
    fs::create_directories(dir);
    write_file(log_path, "iteration,mean_reward,mean_advantage_abs,actor_grad_norm\n");
  }
  const int start = agent.manifest.iterations_done;
  std::ofstream log(log_path, std::ios::app | std::ios::binary);
  if (!log) throw std::runtime_error("cannot append to " + log_path.string());
  TrainHooks hooks;
  hooks.threads = o.threads;
  hooks.on_iteration = [&](const TrainLogRow& r) {
    log << log_line(r);
    if ((r.iteration + 1) % 100 == 0) log.flush();
  };
  hooks.on_checkpoint = [&](const AgentBundle& a) {
    log.flush();
    save_agent(dir, a);
  };
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult res = train(env, c.train, std::move(agent), hooks);
  log.flush();
  save_agent(dir, res.agent);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << "trained iterations " << start << ".." << res.agent.manifest.iterations_done << " ("
      << res.iterations_run << " new, " << format_fixed(secs, 1) << " s)"
      << (res.agent.manifest.converged ? ", converged" : "") << '\n';
  if (!res.log.empty()) out << "final mean reward " << format_fixed(res.log.back().mean_reward, 3) << '\n';
  return 0;
}

inline AgentBundle load_checked(const CliOptions& o, const Environment& env) {
  if (o.checkpoint.empty()) throw ConfigError("--checkpoint is required for the neural method");
  AgentBundle a = load_agent(o.checkpoint);
  a.manifest.check_compatible(pool_hash(env.pool), env.n, env.m(), env.tau());
  return a;
}

inline int cmd_select(const CliOptions& o, std::ostream& out) {
  const ExperimentConfig c = load(o);
  const Environment env = environment(c, o);
  const AgentBundle agent = load_checked(o, env);
  const std::uint64_t id = o.seed.value_or(c.eval.seed_begin);
  const GainMatrix gm = instance_gains(env, id, o.threads);
  const ExpertSweep sw = sweep_experts(gm, env.experts, env.tau());
  const Deployment dep = act_deploy(agent.actor, sw.observations, env.n);
  nlohmann::json j;
  j["environment"] = id;
  j["coverage"] = coverage(gm, dep, env.tau());
  j["num_ues"] = gm.num_ues;
  for (const auto& cb : dep.codebooks) j["codebooks"].push_back(cb.beam_indices);
  if (o.out.empty()) out << j.dump(1) << '\n';
  else write_file(o.out, j.dump(1) + "\n");
  return 0;
}

inline void print_summary(const EvaluationReport& rep, std::ostream& out) {
  out << "isd " << format_double(rep.isd) << " m, " << rep.instances.size() << " instances\n";
  out << "method            mean    win%   unique-win%\n";
  for (const auto& st : covered_fraction_stats(rep)) {
    std::string name = st.method;
    name.resize(16, ' ');
    out << name << "  " << format_fixed(st.mean, 4) << "  " << format_fixed(100 * st.win_rate, 1) << "  "
        << format_fixed(100 * st.unique_win_rate, 1) << '\n';
  }
  if (rep.column(Method::kNeural)) {
    if (rep.column(Method::kC1))
      out << "mean improvement vs c1 "
          << format_fixed(relative_improvement_hist(rep, Method::kC1, Method::kNeural, kImprovementBinWidth).mean, 2)
          << "%\n";
    const Rediscovery rd = rediscovery(rep);
    out << "rediscovered " << format_fixed(rd.rediscovered_pct, 2) << "%, newly discovered "
        << format_fixed(rd.newly_pct, 2) << "% of union(c1,c2)\n";
  }
}

inline int cmd_eval(const CliOptions& o, std::ostream& out) {
  const ExperimentConfig c = load(o);
  Environment env = environment(c, o);
  env.layout.isd = c.eval.isd;
  const auto methods = parse_methods(c.eval.methods);
  std::optional<AgentBundle> agent;
  if (std::find(methods.begin(), methods.end(), Method::kNeural) != methods.end() || !o.checkpoint.empty())
    agent = load_checked(o, env);
  EvalOptions opt;
  opt.num_instances = c.eval.instances;
  opt.seed_begin = c.eval.seed_begin;
  opt.threads = o.threads;
  const EvaluationReport rep = evaluate_suite(env, methods, opt, agent ? &*agent : nullptr);
  const fs::path dir = o.out.empty() ? fs::path("report") : fs::path(o.out);
  write_report(dir, rep);
  print_summary(rep, out);
  return 0;
}

inline int cmd_report(const CliOptions& o, std::ostream& out) {
  const fs::path dir = o.out.empty() ? fs::path("report") : fs::path(o.out);
  std::ifstream f(dir / "instances.csv");
  if (!f) throw ConfigError("no instances.csv in " + dir.string());
  const EvaluationReport rep = read_instances_csv(f);
  f.close();
  write_report(dir, rep);
  print_summary(rep, out);
  return 0;
}

}  // namespace cli_detail

// Entry point; `args` excludes the program name. Returns the exit code.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Coverage-driven SSB codebook selection: simulation, training and evaluation"};
  app.require_subcommand(0, 1);
  CliOptions o;
  bool version = false;
  app.add_flag("--version", version, "Print build and file format versions");

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Experiment config file");
    sub->add_option("--seed", o.seed, "Seed override");
    sub->add_option("--set", o.set, "Override a config key: section.key=value");
    sub->add_option("--threads", o.threads, "Worker threads (1 is the determinism reference)")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output file or directory");
    sub->add_option("--pool", o.pool, "Beam pool file written by gen");
  };
  CLI::App* gen = app.add_subcommand("gen", "Build the beam pool and sample scenarios");
  common(gen);
  gen->add_option("--samples", o.samples, "Sample scenarios to write")->check(CLI::NonNegativeNumber);
  gen->add_flag("--calibrate-tau", o.calibrate_tau, "Fit the detection threshold so c1 covers the target fraction");
  gen->add_option("--target", o.calibrate_target, "Target c1 covered fraction for --calibrate-tau");
  gen->add_option("--instances", o.instances, "Calibration instances");
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep the expert codebooks on one instance");
  common(sweep);
  CLI::App* trn = app.add_subcommand("train", "Train the codebook selection agent");
  common(trn);
  trn->add_option("--checkpoint", o.checkpoint, "Checkpoint directory");
  trn->add_flag("--resume", o.resume, "Continue from the checkpoint");
  CLI::App* sel = app.add_subcommand("select", "Select per-sector codebooks with a trained agent");
  common(sel);
  sel->add_option("--checkpoint", o.checkpoint, "Checkpoint directory");
  CLI::App* ev = app.add_subcommand("eval", "Evaluate methods on held-out instances");
  common(ev);
  ev->add_option("--checkpoint", o.checkpoint, "Checkpoint directory");
  ev->add_option("--methods", o.methods, "all, or a comma-separated subset");
  ev->add_option("--isd", o.isd, "Inter-site distance (m)");
  ev->add_option("--instances", o.instances, "Number of instances");
  CLI::App* rep = app.add_subcommand("report", "Regenerate report files from instances.csv");
  rep->add_option("--out", o.out, "Report directory");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return static_cast<int>(ExitCode::kConfig);
  }
  if (version) {
    out << "ssbcb " << kVersion << " (C++" << __cplusplus / 100 % 100 << ", " << __VERSION__ << ")\n"
        << "formats: pool ssbcb-pool-1, agent ssbcb-agent-1, eval ssbcb-eval-1, gains GMX1, weights NNW1\n";
    return 0;
  }
  try {
    if (gen->parsed()) return cli_detail::cmd_gen(o, out);
    if (sweep->parsed()) return cli_detail::cmd_sweep(o, out);
    if (trn->parsed()) return cli_detail::cmd_train(o, out);
    if (sel->parsed()) return cli_detail::cmd_select(o, out);
    if (ev->parsed()) return cli_detail::cmd_eval(o, out);
    if (rep->parsed()) return cli_detail::cmd_report(o, out);
    out << app.help();
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kConfig);
  } catch (const IncompatibleError& e) {
    err << "incompatible: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kIncompatible);
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kNumeric);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kFailure);
  }
}

}  // namespace ssbcb
