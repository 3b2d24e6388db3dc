#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "npde/losses.hpp"
#include "npde/netcore.hpp"
#include "npde/optim.hpp"
#include "npde/problems.hpp"
#include "npde/trialspace.hpp"

namespace npde {

/// Every knob of one training run.  network.input_dim and network.adaptive
/// are derived from the problem, trial and activation by `finalize()`.
struct ExperimentConfig {
  std::string name;
  ProblemSpec problem;
  TrialFunction trial;
  NetworkConfig network;
  LossConfig loss;
  Eigen::Index batch_interior = 2000;
  Eigen::Index batch_boundary = 400;
  AdamConfig adam;
  std::int64_t epochs = 10000;
  std::uint64_t seed = 1;
  std::int64_t eval_every = 100;
  Eigen::Index eval_batch = 100000;
  std::int64_t checkpoint_every = 1000;
  /// Directory for log, summary and checkpoint; empty writes nothing.
  std::string out_dir;
  /// Leaves wall-clock fields out of the CSV so reruns are byte-identical.
  bool deterministic = false;

  void finalize();
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);

/// Applies the keys of `j` on top of `base`.  Unknown keys are rejected.
/// A "preset" key, when present, replaces `base` with that preset first.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  ExperimentConfig base = {});

ExperimentConfig load_config_file(const std::string& path);

}  // namespace npde
