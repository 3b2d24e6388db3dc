#include "npde/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "npde/presets.hpp"

namespace npde {

void ExperimentConfig::finalize() {
  network.adaptive = network.activation == Activation::AdaptiveSwish;
  network.input_dim = trial.network_input_dim(problem.dim);
}

void ExperimentConfig::validate() const {
  problem.validate();
  network.validate();
  trial.check_compatible(network, problem.dim);
  loss.validate();
  adam.validate();
  if (batch_interior < 1) throw std::invalid_argument("batch_interior < 1");
  if (loss.use_penalty && batch_boundary < 1) {
    throw std::invalid_argument("batch_boundary < 1");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
  if (eval_batch < 1) throw std::invalid_argument("eval_batch must be >= 1");
  if (checkpoint_every < 0) {
    throw std::invalid_argument("checkpoint_every must be >= 0");
  }
  if (trial.kind == TrialKind::BallZeroDirichlet && !problem.is_ball()) {
    throw std::invalid_argument("ball trial requires the ball problem");
  }
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  return {
      {"name", cfg.name},
      {"problem", to_string(cfg.problem)},
      {"method", std::string(to_string(cfg.loss.method))},
      {"trial", to_string(cfg.trial)},
      {"width", cfg.network.width},
      {"blocks", cfg.network.blocks},
      {"activation", std::string(to_string(cfg.network.activation))},
      {"input_dim", cfg.network.input_dim},
      {"lambda", cfg.loss.lambda},
      {"lambda1", cfg.loss.lambda1},
      {"lambda2", cfg.loss.lambda2},
      {"penalty", cfg.loss.use_penalty},
      {"fd_step", cfg.loss.fd_step},
      {"batch_interior", cfg.batch_interior},
      {"batch_boundary", cfg.batch_boundary},
      {"lr", cfg.adam.lr},
      {"beta1", cfg.adam.beta1},
      {"beta2", cfg.adam.beta2},
      {"adam_eps", cfg.adam.eps},
      {"epochs", cfg.epochs},
      {"seed", cfg.seed},
      {"eval_every", cfg.eval_every},
      {"eval_batch", cfg.eval_batch},
      {"checkpoint_every", cfg.checkpoint_every},
      {"out", cfg.out_dir},
      {"deterministic", cfg.deterministic},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& j,
                                  ExperimentConfig base) {
  if (!j.is_object()) throw std::invalid_argument("config must be an object");
  ExperimentConfig cfg =
      j.contains("preset") ? preset(j.at("preset").get<std::string>()) : base;

  static const std::set<std::string> known = {
      "preset", "name", "problem", "method", "trial", "width", "blocks",
      "activation", "input_dim", "lambda", "lambda1", "lambda2", "penalty",
      "fd_step", "batch_interior", "batch_boundary", "lr", "beta1", "beta2",
      "adam_eps", "epochs", "seed", "eval_every", "eval_batch",
      "checkpoint_every", "out", "deterministic"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }

  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) {
      field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    }
  };
  get("name", cfg.name);
  if (j.contains("problem")) {
    cfg.problem = parse_problem(j.at("problem").get<std::string>());
  }
  if (j.contains("method")) {
    cfg.loss.method = parse_method(j.at("method").get<std::string>());
  }
  if (j.contains("trial")) {
    cfg.trial = parse_trial(j.at("trial").get<std::string>());
  }
  if (j.contains("activation")) {
    cfg.network.activation =
        parse_activation(j.at("activation").get<std::string>());
  }
  get("width", cfg.network.width);
  get("blocks", cfg.network.blocks);
  get("lambda", cfg.loss.lambda);
  get("lambda1", cfg.loss.lambda1);
  get("lambda2", cfg.loss.lambda2);
  get("penalty", cfg.loss.use_penalty);
  get("fd_step", cfg.loss.fd_step);
  get("batch_interior", cfg.batch_interior);
  get("batch_boundary", cfg.batch_boundary);
  get("lr", cfg.adam.lr);
  get("beta1", cfg.adam.beta1);
  get("beta2", cfg.adam.beta2);
  get("adam_eps", cfg.adam.eps);
  get("epochs", cfg.epochs);
  get("seed", cfg.seed);
  get("eval_every", cfg.eval_every);
  get("eval_batch", cfg.eval_batch);
  get("checkpoint_every", cfg.checkpoint_every);
  get("out", cfg.out_dir);
  get("deterministic", cfg.deterministic);

  cfg.finalize();
  if (j.contains("input_dim") &&
      j.at("input_dim").get<int>() != cfg.network.input_dim) {
    throw std::invalid_argument("input_dim does not match problem and trial");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  return config_from_json(nlohmann::json::parse(in));
}

}  // namespace npde
