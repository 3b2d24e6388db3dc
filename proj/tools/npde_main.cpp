// npde: train, sweep and inspect the benchmark configurations.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "npde/config.hpp"
#include "npde/harness.hpp"
#include "npde/presets.hpp"

namespace {

struct Overrides {
  std::string preset;
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> epochs;
  std::optional<std::string> out;
  bool deterministic = false;
};

void add_common(CLI::App* app, Overrides& o) {
  auto* p = app->add_option("--preset", o.preset, "named configuration");
  auto* c = app->add_option("--config", o.config_file, "JSON config file");
  p->excludes(c);
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("--epochs", o.epochs, "number of training epochs");
  app->add_option("--out", o.out, "output directory");
  app->add_flag("--deterministic", o.deterministic,
                "omit wall-clock columns so reruns are byte-identical");
}

npde::ExperimentConfig resolve(const Overrides& o) {
  if (o.preset.empty() && o.config_file.empty()) {
    throw CLI::ValidationError("one of --preset or --config is required");
  }
  auto cfg = o.preset.empty() ? npde::load_config_file(o.config_file)
                              : npde::preset(o.preset);
  if (o.seed) cfg.seed = *o.seed;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.out) cfg.out_dir = *o.out;
  if (o.deterministic) cfg.deterministic = true;
  cfg.finalize();
  cfg.validate();
  return cfg;
}

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_progress(const npde::RunRecord& r) {
  if (!r.rel_l2_error) return;
  std::fprintf(stderr, "epoch %7lld  loss %.6e  rel_l2 %.4e\n",
               static_cast<long long>(r.epoch), r.total_loss, *r.rel_l2_error);
}

int report(const npde::RunSummary& s) {
  std::cout << npde::to_json(s).dump(2) << '\n';
  return s.failure.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural PDE solver laboratory (DGM / DRM)"};
  app.require_subcommand(1);

  Overrides run_opts;
  std::optional<std::string> resume;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "train one configuration");
  add_common(run, run_opts);
  run->add_option("--resume", resume, "checkpoint to continue from");
  run->add_flag("--quiet", quiet, "no progress output");

  Overrides sweep_opts;
  std::string axis_name;
  std::string values_text;
  bool independent = false;
  auto* sweep = app.add_subcommand("sweep", "one run per value of one knob");
  add_common(sweep, sweep_opts);
  sweep->add_option("--axis", axis_name,
                    "lambda|batch|boundary-batch|activation|depth|width")
      ->required();
  sweep->add_option("--values", values_text, "comma-separated values")
      ->required();
  sweep->add_flag("--independent-seeds", independent, "use seed + index");

  auto* list = app.add_subcommand("list-presets", "print preset names");

  std::string show_name;
  auto* show = app.add_subcommand("show", "print a preset as JSON config");
  show->add_option("name", show_name, "preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = resolve(run_opts);
      npde::RunOptions options;
      options.resume_from = resume;
      if (!quiet) options.on_record = print_progress;
      return report(npde::run_experiment(cfg, options));
    }
    if (*sweep) {
      const auto cfg = resolve(sweep_opts);
      const auto axis = npde::parse_axis(axis_name);
      const auto cells =
          npde::sweep(cfg, axis, split_values(values_text), independent);
      if (!cfg.out_dir.empty()) {
        const auto path = (std::filesystem::path(cfg.out_dir) /
                           ("sweep_" + std::string(npde::to_string(axis)) +
                            ".csv"))
                              .string();
        npde::write_sweep_csv(path, axis, cells);
        std::cerr << "wrote " << path << '\n';
      }
      std::cout << "axis,value,method,rel_l2_error,status\n";
      for (const auto& c : cells) {
        std::cout << npde::to_string(axis) << ',' << c.value << ','
                  << npde::to_string(c.summary.config.loss.method) << ','
                  << (c.summary.final_error ? *c.summary.final_error : NAN)
                  << ',' << (c.summary.converged ? "converged" : "-") << '\n';
      }
      return 0;
    }
    if (*list) {
      for (const auto& p : npde::list_presets()) {
        std::cout << p.name << "\t" << p.description << '\n';
      }
      return 0;
    }
    if (*show) {
      std::cout << npde::to_json(npde::preset(show_name)).dump(2) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
