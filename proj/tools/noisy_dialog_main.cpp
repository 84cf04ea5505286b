// Command line front end for the noise-robust dialog simulator.
//
//   noisy_dialog run      one configuration, many seeded trials
//   noisy_dialog sweep    the same over a comma separated epsilon list
//   noisy_dialog attack   scripted adversaries with paired reporting
//   noisy_dialog selftest meeting-point invariants at desk scale
//   noisy_dialog vectors  deterministic hash / codec vectors

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "noisydialog/harness.hpp"

namespace {

struct CliFlags {
  double epsilon = 0.01;
  int64_t depth = 4096;
  int64_t states = 1 << 12;
  std::string adversary = "noise_free";
  int trials = 1;
  uint64_t seed = 1;
  std::string mp3 = "on";
  std::string trace;
  std::string ghost_trace;
  std::string out;
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  std::string config;
  std::vector<std::pair<std::string, int>> tuning;  // c_i / c_hash / c_b / c_delta
};

void add_common_flags(CLI::App* cmd, CliFlags& f) {
  cmd->add_option("--epsilon", f.epsilon, "adversarial flip fraction");
  cmd->add_option("--depth", f.depth, "rounds of the underlying protocol");
  cmd->add_option("--states", f.states, "state budget of the protocol");
  cmd->add_option("--adversary", f.adversary,
                  "noise_free | random_flip:p | burst:start:len | greedy_desync | "
                  "figure1_attack | sneaky_attack");
  cmd->add_option("--trials", f.trials, "seeded trials to run");
  cmd->add_option("--seed", f.seed, "base seed; trial t uses seed+t");
  cmd->add_option("--mp3", f.mp3, "on|off: scan the memory-backed third candidate")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--trace", f.trace, "write a per-round channel log CSV here");
  cmd->add_option("--ghost-trace", f.ghost_trace, "write the joint iteration table here");
  cmd->add_option("--out", f.out, "output prefix; writes <out>.csv and <out>.json");
  cmd->add_option("--workers", f.workers, "worker threads for independent trials");
  cmd->add_option("--config", f.config, "flat key-value file applied before flags");
}

// Flat "key value" (or "key=value") lines; '#' starts a comment. Keys not
// recognized are an error so typos do not silently fall back to defaults.
void apply_config_file(const std::string& path, CliFlags& f) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (char& c : line) {
      if (c == '=') c = ' ';
    }
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key)) continue;
    if (!(ls >> value)) {
      throw CLI::ValidationError("--config", path + ":" + std::to_string(lineno) +
                                                  ": missing value for " + key);
    }
    if (key == "epsilon") {
      f.epsilon = std::stod(value);
    } else if (key == "depth") {
      f.depth = std::stoll(value);
    } else if (key == "states" || key == "state_budget") {
      f.states = std::stoll(value);
    } else if (key == "seed") {
      f.seed = std::stoull(value);
    } else if (key == "mp3_enabled") {
      f.mp3 = (value == "1" || value == "true" || value == "on") ? "on" : "off";
    } else if (key == "c_i" || key == "c_hash" || key == "c_b" || key == "c_delta") {
      // Tuning constants keep their RunConfig names.
      f.tuning.emplace_back(key, std::stoi(value));
    } else {
      throw CLI::ValidationError("--config", path + ":" + std::to_string(lineno) +
                                                  ": unknown key " + key);
    }
  }
}

nd::RunConfig to_run_config(const CliFlags& f) {
  nd::RunConfig cfg;
  cfg.epsilon = f.epsilon;
  cfg.depth = f.depth;
  cfg.state_budget = f.states;
  cfg.mp3_enabled = f.mp3 == "on";
  cfg.seed = f.seed;
  for (const auto& [key, value] : f.tuning) {
    if (key == "c_i") cfg.c_i = value;
    if (key == "c_hash") cfg.c_hash = value;
    if (key == "c_b") cfg.c_b = value;
    if (key == "c_delta") cfg.c_delta = value;
  }
  return cfg;
}

void emit_results(const CliFlags& f, const nd::RunConfig& cfg,
                  const std::vector<nd::TrialResult>& results) {
  if (f.out.empty()) {
    nd::write_aggregate_json(std::cout, cfg, f.adversary, results);
    return;
  }
  std::ofstream csv(f.out + ".csv");
  nd::write_trials_csv(csv, results);
  std::ofstream json(f.out + ".json");
  nd::write_aggregate_json(json, cfg, f.adversary, results);
  std::cout << "wrote " << f.out << ".csv and " << f.out << ".json\n";
}

int run_command(const CliFlags& f) {
  nd::RunConfig cfg = to_run_config(f);
  nd::AdversarySpec spec = nd::AdversarySpec::parse(f.adversary);
  nd::ProtocolDag dag = nd::build_random_dag(cfg.depth, cfg.state_budget, cfg.seed * 2 + 1);

  std::vector<nd::TrialResult> results;
  if (f.trials == 1 && (!f.trace.empty() || !f.ghost_trace.empty())) {
    std::ofstream trace_out, ghost_out;
    nd::RunOptions opts;
    opts.adversary = spec;
    if (!f.trace.empty()) {
      trace_out.open(f.trace);
      opts.channel_log = &trace_out;
    }
    if (!f.ghost_trace.empty()) {
      ghost_out.open(f.ghost_trace);
      opts.ghost_trace = &ghost_out;
    }
    results.push_back(nd::run_single(dag, cfg, opts));
  } else {
    results = nd::run_trials(dag, cfg, spec, f.trials, f.workers);
    if (!f.trace.empty() || !f.ghost_trace.empty()) {
      // Side logs always describe the first trial, rerun deterministically.
      std::ofstream trace_out, ghost_out;
      nd::RunOptions opts;
      opts.adversary = spec;
      if (!f.trace.empty()) {
        trace_out.open(f.trace);
        opts.channel_log = &trace_out;
      }
      if (!f.ghost_trace.empty()) {
        ghost_out.open(f.ghost_trace);
        opts.ghost_trace = &ghost_out;
      }
      nd::run_single(dag, cfg, opts);
    }
  }
  emit_results(f, cfg, results);
  int failures = 0;
  for (const auto& r : results) failures += r.success ? 0 : 1;
  std::cout << "success " << (f.trials - failures) << "/" << f.trials << "\n";
  return 0;
}

int sweep_command(const CliFlags& f, const std::string& epsilons) {
  std::istringstream in(epsilons);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    CliFlags step = f;
    step.epsilon = std::stod(tok);
    if (!f.out.empty()) {
      std::ostringstream tag;
      tag << f.out << "_eps" << step.epsilon;
      step.out = tag.str();
    }
    std::cout << "epsilon=" << step.epsilon << "\n";
    int rc = run_command(step);
    if (rc != 0) return rc;
  }
  return 0;
}

int attack_command(const CliFlags& f) {
  nd::RunConfig cfg = to_run_config(f);
  if (f.adversary == "figure1_attack") {
    nd::PairedAttackReport rep = nd::figure1_experiment(cfg, f.trials, f.workers);
    std::cout << "pairs " << rep.pairs << "\n"
              << "successes mp3=on  " << rep.successes_on << "\n"
              << "successes mp3=off " << rep.successes_off << "\n"
              << "max rewind larger with mp3=off " << rep.rewind_larger_off << " (on "
              << rep.rewind_larger_on << ", ties " << rep.rewind_ties << ")\n"
              << "one-sided sign test p " << rep.sign_test_p << "\n";
    if (!f.out.empty()) {
      std::ofstream on_csv(f.out + "_on.csv");
      nd::write_trials_csv(on_csv, rep.on);
      std::ofstream off_csv(f.out + "_off.csv");
      nd::write_trials_csv(off_csv, rep.off);
      std::cout << "wrote " << f.out << "_on.csv and " << f.out << "_off.csv\n";
    }
    return 0;
  }
  return run_command(f);
}

int selftest_command(int walks) {
  std::vector<std::string> failures = nd::selftest_meeting_points(
      int64_t{1} << 12, int64_t{1} << 13, int64_t{1} << 10, 8, walks, 7);
  for (const std::string& msg : failures) std::cout << "FAIL " << msg << "\n";
  std::cout << (failures.empty() ? "selftest ok" : "selftest FAILED") << "\n";
  return failures.empty() ? 0 : 1;
}

int vectors_command(const std::string& out_path) {
  if (out_path.empty()) {
    nd::write_hash_vectors(std::cout);
    return 0;
  }
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot open " << out_path << "\n";
    return 1;
  }
  nd::write_hash_vectors(out);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noise-robust interactive dialog simulator"};
  app.require_subcommand(1);

  CliFlags flags;
  std::string sweep_epsilons = "0.02,0.01,0.005,0.002";
  int selftest_walks = 1000;
  std::string vectors_out;

  CLI::App* run = app.add_subcommand("run", "run one configuration");
  add_common_flags(run, flags);

  CLI::App* sweep = app.add_subcommand("sweep", "run over an epsilon list");
  add_common_flags(sweep, flags);
  sweep->add_option("--epsilons", sweep_epsilons, "comma separated epsilon values");

  CLI::App* attack = app.add_subcommand("attack", "run a scripted adversary");
  add_common_flags(attack, flags);

  CLI::App* selftest = app.add_subcommand("selftest", "meeting-point invariants");
  selftest->add_option("--walks", selftest_walks, "random retention walks");

  CLI::App* vectors = app.add_subcommand("vectors", "print deterministic test vectors");
  vectors->add_option("--out", vectors_out, "write here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!flags.config.empty()) {
      CliFlags from_file = flags;
      apply_config_file(flags.config, from_file);
      // Explicit flags win over the file.
      for (CLI::App* cmd : {run, sweep, attack}) {
        if (!cmd->parsed()) continue;
        if (cmd->count("--epsilon") == 0) flags.epsilon = from_file.epsilon;
        if (cmd->count("--depth") == 0) flags.depth = from_file.depth;
        if (cmd->count("--states") == 0) flags.states = from_file.states;
        if (cmd->count("--seed") == 0) flags.seed = from_file.seed;
        if (cmd->count("--mp3") == 0) flags.mp3 = from_file.mp3;
        flags.tuning = from_file.tuning;
      }
    }
    if (const char* env_seed = std::getenv("NOISY_DIALOG_SEED")) {
      flags.seed = std::stoull(env_seed);
    }

    if (run->parsed()) return run_command(flags);
    if (sweep->parsed()) return sweep_command(flags, sweep_epsilons);
    if (attack->parsed()) return attack_command(flags);
    if (selftest->parsed()) return selftest_command(selftest_walks);
    if (vectors->parsed()) return vectors_command(vectors_out);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
