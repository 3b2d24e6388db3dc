#include "npde/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "npde/checkpoint.hpp"
#include "npde/eval.hpp"
#include "npde/losses.hpp"
#include "npde/rng.hpp"

namespace npde {

namespace {

namespace fs = std::filesystem;

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? number(*v) : std::string();
}

// Keeps the header and every row up to `last_epoch`.
void truncate_log(const fs::path& path, std::int64_t last_epoch) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot reopen run log " + path.string());
  std::vector<std::string> kept;
  std::string line;
  while (std::getline(in, line)) {
    if (kept.empty() || std::stoll(line.substr(0, line.find(','))) <=
                            last_epoch) {
      kept.push_back(line);
    }
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : kept) out << l << '\n';
}

}  // namespace

std::string format_record(const RunRecord& r) {
  std::string row = std::to_string(r.epoch);
  for (const auto& field :
       {std::optional<double>(r.total_loss),
        std::optional<double>(r.interior_loss), r.penalty_loss,
        r.penalty2_loss, r.rel_l2_error, r.elapsed_s}) {
    row += ',';
    row += optional_number(field);
  }
  return row;
}

nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json j = {
      {"config", to_json(s.config)},
      {"param_count", s.param_count},
      {"epochs_completed", s.epochs_completed},
      {"converged", s.converged},
      {"wall_seconds", s.wall_seconds},
  };
  j["final_error"] = s.final_error ? nlohmann::json(*s.final_error)
                                   : nlohmann::json(nullptr);
  if (!s.failure.empty()) j["failure"] = s.failure;
  return j;
}

RunSummary run_experiment(const ExperimentConfig& cfg_in,
                          const RunOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();

  ExperimentConfig cfg = cfg_in;
  cfg.finalize();
  cfg.validate();

  RunSummary summary;
  summary.config = cfg;
  summary.param_count = param_count(cfg.network);
  summary.params = init_params(cfg.network, cfg.seed);
  summary.adam = AdamState(summary.params.size());
  auto& params = summary.params;
  auto& adam = summary.adam;

  std::int64_t first_epoch = 1;
  if (options.resume_from) {
    auto ckpt = read_checkpoint(*options.resume_from);
    if (!(ckpt.params.config() == cfg.network) || !(ckpt.trial == cfg.trial)) {
      throw std::invalid_argument("checkpoint does not match the run config");
    }
    if (!ckpt.adam) throw std::invalid_argument("checkpoint has no adam state");
    params = std::move(ckpt.params);
    adam = std::move(*ckpt.adam);
    first_epoch = ckpt.epoch + 1;
    summary.epochs_completed = ckpt.epoch;
  }

  std::ofstream log;
  fs::path out_dir;
  if (!cfg.out_dir.empty()) {
    out_dir = cfg.out_dir;
    fs::create_directories(out_dir);
    const auto log_path = out_dir / "run_log.csv";
    if (options.resume_from && fs::exists(log_path)) {
      truncate_log(log_path, first_epoch - 1);
      log.open(log_path, std::ios::app);
    } else {
      log.open(log_path, std::ios::trunc);
      log << kRunLogHeader << '\n';
    }
    if (!log) throw std::runtime_error("cannot write " + log_path.string());
  }

  const auto eval_seed = derive_seed(cfg.seed, "eval");
  for (std::int64_t epoch = first_epoch; epoch <= cfg.epochs; ++epoch) {
    RunRecord record;
    record.epoch = epoch;
    try {
      const auto interior = sample_interior(
          cfg.problem, cfg.batch_interior,
          derive_seed(cfg.seed, "interior", static_cast<std::uint64_t>(epoch)));
      std::vector<SampleBatch> boundary;
      if (cfg.loss.use_penalty) {
        boundary = sample_boundary(
            cfg.problem, cfg.batch_boundary,
            derive_seed(cfg.seed, "boundary",
                        static_cast<std::uint64_t>(epoch)));
      }
      const auto step = loss_and_gradient(cfg.loss, cfg.problem, cfg.trial,
                                          params, interior, boundary);
      const auto& loss = step.loss;
      if (!std::isfinite(loss.total)) {
        throw NumericalFailure("total loss is not finite");
      }
      adam_step(adam, params, step.gradient, cfg.adam);

      record.total_loss = loss.total;
      record.interior_loss = loss.interior;
      record.penalty_loss = loss.penalty;
      record.penalty2_loss = loss.penalty2;
      if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
        record.rel_l2_error = relative_l2(cfg.trial, params, cfg.problem,
                                          cfg.eval_batch, eval_seed);
        summary.final_error = record.rel_l2_error;
      }
    } catch (const NumericalFailure& e) {
      summary.failure = "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }
    const double elapsed =
        std::chrono::duration<double>(Clock::now() - started).count();
    if (!cfg.deterministic) record.elapsed_s = elapsed;

    summary.epochs_completed = epoch;
    summary.last = record;
    if (log.is_open()) log << format_record(record) << '\n';
    if (options.on_record) options.on_record(record);

    const bool checkpoint_due =
        (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) ||
        epoch == cfg.epochs;
    if (!out_dir.empty() && checkpoint_due) {
      log.flush();
      write_checkpoint((out_dir / "checkpoint.txt").string(),
                       {params, cfg.trial, epoch, adam});
    }
  }

  summary.wall_seconds =
      std::chrono::duration<double>(Clock::now() - started).count();
  summary.converged = summary.failure.empty() && summary.final_error &&
                      std::isfinite(*summary.final_error) &&
                      *summary.final_error <= kDivergenceThreshold;
  if (!out_dir.empty()) {
    log.close();
    std::ofstream out(out_dir / "summary.json");
    out << to_json(summary).dump(2) << '\n';
  }
  return summary;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Lambda: return "lambda";
    case SweepAxis::Batch: return "batch";
    case SweepAxis::BoundaryBatch: return "boundary-batch";
    case SweepAxis::Activation: return "activation";
    case SweepAxis::Depth: return "depth";
    case SweepAxis::Width: return "width";
  }
  return "?";
}

SweepAxis parse_axis(std::string_view name) {
  for (auto axis : {SweepAxis::Lambda, SweepAxis::Batch,
                    SweepAxis::BoundaryBatch, SweepAxis::Activation,
                    SweepAxis::Depth, SweepAxis::Width}) {
    if (name == to_string(axis)) return axis;
  }
  throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "'");
}

ExperimentConfig apply_axis(ExperimentConfig cfg, SweepAxis axis,
                            std::string_view value) {
  const std::string text(value);
  switch (axis) {
    case SweepAxis::Lambda: {
      const double lambda = std::stod(text);
      if (cfg.problem.bc == BoundaryKind::Periodic) {
        const double ratio =
            cfg.loss.lambda1 > 0.0 ? cfg.loss.lambda2 / cfg.loss.lambda1 : 0.5;
        cfg.loss.lambda1 = lambda;
        cfg.loss.lambda2 = ratio * lambda;
      } else {
        cfg.loss.lambda = lambda;
      }
      break;
    }
    case SweepAxis::Batch: cfg.batch_interior = std::stol(text); break;
    case SweepAxis::BoundaryBatch: cfg.batch_boundary = std::stol(text); break;
    case SweepAxis::Activation:
      cfg.network.activation = parse_activation(text);
      break;
    case SweepAxis::Depth: cfg.network.blocks = std::stoi(text); break;
    case SweepAxis::Width: cfg.network.width = std::stoi(text); break;
  }
  cfg.finalize();
  cfg.validate();
  return cfg;
}

std::vector<SweepCell> sweep(const ExperimentConfig& base, SweepAxis axis,
                             const std::vector<std::string>& values,
                             bool independent_seeds) {
  std::vector<ExperimentConfig> configs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto cfg = apply_axis(base, axis, values[i]);
    if (independent_seeds) cfg.seed = base.seed + i;
    if (!base.out_dir.empty()) {
      cfg.out_dir = (fs::path(base.out_dir) /
                     (std::string(to_string(axis)) + "-" + values[i]))
                        .string();
    }
    configs.push_back(std::move(cfg));
  }
  std::vector<SweepCell> cells;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    cells.push_back({values[i], run_experiment(configs[i])});
  }
  return cells;
}

void write_sweep_csv(const std::string& path, SweepAxis axis,
                     const std::vector<SweepCell>& cells) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "axis,value,method,rel_l2_error,status\n";
  for (const auto& cell : cells) {
    const auto& s = cell.summary;
    out << to_string(axis) << ',' << cell.value << ','
        << to_string(s.config.loss.method) << ','
        << optional_number(s.final_error) << ','
        << (s.converged ? "converged" : "-") << '\n';
  }
}

}  // namespace npde
