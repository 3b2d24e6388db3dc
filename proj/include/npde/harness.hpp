#pragma once

// Training loop, run logs and parameter sweeps.
//
// One epoch draws a fresh interior batch and fresh boundary batches, takes
// one Adam step on the total loss and appends one CSV row:
//
//   epoch,total_loss,interior_loss,penalty_loss,penalty2_loss,rel_l2_error,elapsed_s
//
// Penalty columns are empty when the term does not exist, rel_l2_error is
// filled every eval_every epochs and at the final epoch.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "npde/config.hpp"
#include "npde/netcore.hpp"
#include "npde/optim.hpp"

namespace npde {

inline constexpr std::string_view kRunLogHeader =
    "epoch,total_loss,interior_loss,penalty_loss,penalty2_loss,rel_l2_error,"
    "elapsed_s";

/// Runs whose final error exceeds this are reported as not converged.
inline constexpr double kDivergenceThreshold = 0.99;

struct RunRecord {
  std::int64_t epoch = 0;
  double total_loss = 0.0;
  double interior_loss = 0.0;
  std::optional<double> penalty_loss;
  std::optional<double> penalty2_loss;
  std::optional<double> rel_l2_error;
  std::optional<double> elapsed_s;
};

std::string format_record(const RunRecord& record);

struct RunSummary {
  ExperimentConfig config;
  std::size_t param_count = 0;
  std::int64_t epochs_completed = 0;
  std::optional<double> final_error;
  bool converged = false;
  double wall_seconds = 0.0;
  /// Empty unless the run aborted on a numerical failure.
  std::string failure;
  std::optional<RunRecord> last;
  ResNetParams params;
  AdamState adam;
};

nlohmann::json to_json(const RunSummary& summary);

struct RunOptions {
  /// Checkpoint file to continue from.
  std::optional<std::string> resume_from;
  /// Called after every epoch.
  std::function<void(const RunRecord&)> on_record;
};

/// Trains one configuration.  Numerical failures do not throw; they end
/// the run and are reported through `failure` and `converged = false`.
RunSummary run_experiment(const ExperimentConfig& cfg,
                          const RunOptions& options = {});

enum class SweepAxis { Lambda, Batch, BoundaryBatch, Activation, Depth, Width };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);

/// `base` with one knob replaced.  For periodic problems a lambda value
/// sets lambda1 and keeps the lambda2 / lambda1 ratio.
ExperimentConfig apply_axis(ExperimentConfig base, SweepAxis axis,
                            std::string_view value);

struct SweepCell {
  std::string value;
  RunSummary summary;
};

/// One run per value.  Seeds are shared unless `independent_seeds`, which
/// uses seed + index.  Run outputs go to <base.out_dir>/<axis>-<value>.
std::vector<SweepCell> sweep(const ExperimentConfig& base, SweepAxis axis,
                             const std::vector<std::string>& values,
                             bool independent_seeds = false);

/// axis,value,method,rel_l2_error,status  (status "converged" or "-").
void write_sweep_csv(const std::string& path, SweepAxis axis,
                     const std::vector<SweepCell>& cells);

}  // namespace npde
