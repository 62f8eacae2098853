#pragma once

// Run configuration: one JSON document with "synth", "train" and "eval" sections.
// Unknown keys are rejected; every seed is explicit after resolution.

#include "star/cir_io.hpp"
#include "star/training.hpp"

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace star {

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"alpha", c.alpha},
          {"beta", c.beta},
          {"lr", c.lr},
          {"epochs", c.epochs},
          {"window_len", c.hyper.window_len},
          {"sparsity", c.hyper.sparsity},
          {"mu", c.hyper.mu},
          {"past", c.hyper.past},
          {"variant", to_string(c.hyper.variant)},
          {"window_shift", c.window_shift},
          {"p_max", c.p_max},
          {"oversample", c.oversample},
          {"seed", c.seed},
          {"adam_beta1", c.adam.beta1},
          {"adam_beta2", c.adam.beta2},
          {"adam_eps", c.adam.eps},
          {"detach_past", c.detach_past}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  for (const auto& [key, v] : j.items()) {
    if (key == "alpha") c.alpha = v.get<double>();
    else if (key == "beta") c.beta = v.get<double>();
    else if (key == "lr") c.lr = v.get<double>();
    else if (key == "epochs") c.epochs = v.get<int>();
    else if (key == "window_len") c.hyper.window_len = v.get<int>();
    else if (key == "sparsity") c.hyper.sparsity = v.get<int>();
    else if (key == "mu") c.hyper.mu = v.get<double>();
    else if (key == "past") c.hyper.past = v.get<int>();
    else if (key == "variant") c.hyper.variant = parse_variant(v.get<std::string>());
    else if (key == "window_shift") c.window_shift = v.get<int>();
    else if (key == "p_max") c.p_max = v.get<double>();
    else if (key == "oversample") c.oversample = v.get<std::map<std::string, int>>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "adam_beta1") c.adam.beta1 = v.get<double>();
    else if (key == "adam_beta2") c.adam.beta2 = v.get<double>();
    else if (key == "adam_eps") c.adam.eps = v.get<double>();
    else if (key == "detach_past") c.detach_past = v.get<bool>();
    else throw ConfigError("unknown train key: " + key);
  }
}

struct EvalConfig {
  std::vector<double> fractions{0.5, 0.75, 0.9};
  std::vector<std::string> methods{"star", "iht-1", "iht", "omp", "ista"};
  std::uint64_t seed = 11;
  int iht_max_iter = 1000;  // cap for "converged" IHT/ISTA and the ground truth
  double tol = 1e-6;
  double test_fraction = 0.19;
  double val_fraction = 0.01;
  std::uint64_t split_seed = 3;
};

inline nlohmann::json to_json(const EvalConfig& c) {
  return {{"fractions", c.fractions},   {"methods", c.methods},
          {"seed", c.seed},             {"iht_max_iter", c.iht_max_iter},
          {"tol", c.tol},               {"test_fraction", c.test_fraction},
          {"val_fraction", c.val_fraction}, {"split_seed", c.split_seed}};
}

inline void from_json(const nlohmann::json& j, EvalConfig& c) {
  for (const auto& [key, v] : j.items()) {
    if (key == "fractions") c.fractions = v.get<std::vector<double>>();
    else if (key == "methods") c.methods = v.get<std::vector<std::string>>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "iht_max_iter") c.iht_max_iter = v.get<int>();
    else if (key == "tol") c.tol = v.get<double>();
    else if (key == "test_fraction") c.test_fraction = v.get<double>();
    else if (key == "val_fraction") c.val_fraction = v.get<double>();
    else if (key == "split_seed") c.split_seed = v.get<std::uint64_t>();
    else throw ConfigError("unknown eval key: " + key);
  }
}

struct RunConfig {
  SynthConfig synth;
  int n_sequences = 8;
  int n_windows = 100;
  TrainConfig train;
  EvalConfig eval;
};

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json s = to_json(c.synth);
  s["n_sequences"] = c.n_sequences;
  s["n_windows"] = c.n_windows;
  return {{"synth", s}, {"train", to_json(c.train)}, {"eval", to_json(c.eval)}};
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "synth") {
      nlohmann::json rest = v;
      if (rest.contains("n_sequences")) {
        c.n_sequences = rest["n_sequences"].get<int>();
        rest.erase("n_sequences");
      }
      if (rest.contains("n_windows")) {
        c.n_windows = rest["n_windows"].get<int>();
        rest.erase("n_windows");
      }
      from_json(rest, c.synth);
    } else if (key == "train") {
      from_json(v, c.train);
    } else if (key == "eval") {
      from_json(v, c.eval);
    } else {
      throw ConfigError("unknown config section: " + key);
    }
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return run_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad config " + path + ": " + e.what());
  }
}

}  // namespace star
