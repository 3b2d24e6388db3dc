#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "npde/checkpoint.hpp"
#include "npde/config.hpp"
#include "npde/harness.hpp"
#include "npde/presets.hpp"
#include "test_support.hpp"

using namespace npde;
using namespace npde::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "npde_test_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& row) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : row) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

ExperimentConfig tiny(BoundaryKind bc = BoundaryKind::Robin) {
  ExperimentConfig cfg;
  cfg.name = "tiny";
  cfg.problem = ProblemSpec::linear_cosine(2, bc);
  cfg.network.width = 4;
  cfg.network.blocks = 2;
  cfg.loss.lambda = 10.0;
  cfg.loss.lambda1 = 10.0;
  cfg.loss.lambda2 = 5.0;
  cfg.batch_interior = 64;
  cfg.batch_boundary = 32;
  cfg.epochs = 7;
  cfg.eval_every = 3;
  cfg.eval_batch = 500;
  cfg.deterministic = true;
  cfg.finalize();
  return cfg;
}

// Runs the CLI and returns its exit status and stdout.
std::pair<int, std::string> cli(const std::string& args) {
  const char* exe = std::getenv("NPDE_CLI");
  REQUIRE_MESSAGE(exe, "NPDE_CLI must point at the npde binary");
  const auto out = scratch("cli-capture") / "stdout.txt";
  const std::string cmd = std::string(exe) + " " + args + " > " + out.string() +
                          " 2> " + (out.parent_path() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), slurp(out)};
}

}  // namespace

TEST_CASE("run log format") {
  CHECK(kRunLogHeader ==
        "epoch,total_loss,interior_loss,penalty_loss,penalty2_loss,"
        "rel_l2_error,elapsed_s");

  RunRecord r;
  r.epoch = 12;
  r.total_loss = 0.5;
  r.interior_loss = 0.25;
  CHECK(format_record(r) == "12,0.5,0.25,,,,");
  r.penalty_loss = 1.0;
  r.rel_l2_error = 0.125;
  CHECK(format_record(r) == "12,0.5,0.25,1,,0.125,");
  r.penalty2_loss = 2.0;
  r.elapsed_s = 3.5;
  CHECK(format_record(r) == "12,0.5,0.25,1,2,0.125,3.5");

  // full precision survives a text round trip
  r.total_loss = 0.1 + 0.2;
  CHECK(std::stod(fields(format_record(r))[1]) == 0.1 + 0.2);
}

TEST_CASE("one epoch is one row and one step") {
  auto cfg = tiny();
  cfg.epochs = 1;
  cfg.out_dir = scratch("one-epoch").string();
  const auto s = run_experiment(cfg);
  CHECK(s.epochs_completed == 1);
  CHECK(s.adam.step == 1);
  const auto rows = lines(slurp(fs::path(cfg.out_dir) / "run_log.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == kRunLogHeader);
  const auto f = fields(rows[1]);
  REQUIRE(f.size() == 7);
  CHECK(f[0] == "1");
  CHECK_FALSE(f[3].empty());   // Robin penalty
  CHECK(f[4].empty());         // no second penalty
  CHECK_FALSE(f[5].empty());   // final epoch is evaluated
  CHECK(f[6].empty());         // deterministic mode
  CHECK(fs::exists(fs::path(cfg.out_dir) / "summary.json"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "checkpoint.txt"));

  const auto js = nlohmann::json::parse(slurp(fs::path(cfg.out_dir) / "summary.json"));
  CHECK(js.at("param_count") == param_count(cfg.network));
  CHECK(js.at("epochs_completed") == 1);
  CHECK(js.at("final_error").get<double>() == *s.final_error);
  CHECK(js.at("config").at("problem") == to_string(cfg.problem));
  CHECK(js.contains("wall_seconds"));
  CHECK(js.contains("converged"));
}

TEST_CASE("deterministic reruns give identical logs") {
  for (auto bc : {BoundaryKind::Dirichlet, BoundaryKind::Periodic}) {
    auto a = tiny(bc);
    auto b = tiny(bc);
    a.out_dir = scratch("rerun-a").string();
    b.out_dir = scratch("rerun-b").string();
    const auto sa = run_experiment(a);
    const auto sb = run_experiment(b);
    const auto la = slurp(fs::path(a.out_dir) / "run_log.csv");
    CHECK(la == slurp(fs::path(b.out_dir) / "run_log.csv"));
    CHECK(sa.params.flat()[0] == sb.params.flat()[0]);
    CHECK(std::equal(sa.params.flat().begin(), sa.params.flat().end(),
                     sb.params.flat().begin()));

    auto c = tiny(bc);
    c.seed = 2;
    c.out_dir = scratch("rerun-c").string();
    run_experiment(c);
    CHECK(la != slurp(fs::path(c.out_dir) / "run_log.csv"));
  }
}

TEST_CASE("log completeness and column shapes") {
  for (auto bc : {BoundaryKind::Neumann, BoundaryKind::Periodic}) {
    auto cfg = tiny(bc);
    cfg.epochs = 10;
    cfg.deterministic = false;
    std::vector<RunRecord> seen;
    RunOptions opt;
    opt.on_record = [&seen](const RunRecord& r) { seen.push_back(r); };
    const auto s = run_experiment(cfg, opt);
    REQUIRE(seen.size() == 10);
    for (std::size_t i = 0; i < seen.size(); ++i) {
      const auto& r = seen[i];
      CHECK(r.epoch == static_cast<std::int64_t>(i + 1));
      const bool evaluated = r.epoch % 3 == 0 || r.epoch == 10;
      CHECK(r.rel_l2_error.has_value() == evaluated);
      CHECK(r.elapsed_s.has_value());
      CHECK(r.penalty_loss.has_value());
      CHECK(r.penalty2_loss.has_value() == (bc == BoundaryKind::Periodic));
      const double pen = r.penalty_loss.value_or(0.0);
      const double pen2 = r.penalty2_loss.value_or(0.0);
      const double want = bc == BoundaryKind::Periodic
                              ? r.interior_loss + 10.0 * pen + 5.0 * pen2
                              : r.interior_loss + 10.0 * pen;
      CHECK(r.total_loss == doctest::Approx(want).epsilon(1e-13));
    }
    for (std::size_t i = 1; i < seen.size(); ++i) {
      CHECK(*seen[i].elapsed_s >= *seen[i - 1].elapsed_s);
    }
    CHECK(s.final_error == seen.back().rel_l2_error);
  }

  auto exact = preset("table9-nopenalty-dgm");
  exact.epochs = 2;
  exact.eval_batch = 200;
  std::vector<RunRecord> seen;
  RunOptions opt;
  opt.on_record = [&seen](const RunRecord& r) { seen.push_back(r); };
  run_experiment(exact, opt);
  REQUIRE(seen.size() == 2);
  CHECK_FALSE(seen[0].penalty_loss);
  CHECK(seen[0].total_loss == seen[0].interior_loss);
}

TEST_CASE("resume from a checkpoint reproduces the trajectory") {
  auto full = tiny(BoundaryKind::Periodic);
  full.epochs = 9;
  full.checkpoint_every = 3;
  full.out_dir = scratch("resume-full").string();
  const auto want = run_experiment(full);

  auto first = full;
  first.epochs = 4;  // stops between checkpoints; checkpoint at 3 and 4
  first.out_dir = scratch("resume-part").string();
  run_experiment(first);
  const auto ckpt_path = (fs::path(first.out_dir) / "checkpoint.txt").string();
  // rewind to the epoch-3 checkpoint of an identical run
  auto third = full;
  third.epochs = 3;
  third.out_dir = scratch("resume-third").string();
  run_experiment(third);
  fs::copy_file(fs::path(third.out_dir) / "checkpoint.txt", ckpt_path,
                fs::copy_options::overwrite_existing);

  RunOptions opt;
  opt.resume_from = ckpt_path;
  auto rest = full;
  rest.out_dir = first.out_dir;
  const auto got = run_experiment(rest, opt);

  CHECK(got.epochs_completed == 9);
  CHECK(got.adam.step == want.adam.step);
  CHECK(std::equal(got.params.flat().begin(), got.params.flat().end(),
                   want.params.flat().begin()));
  CHECK(got.adam.m == want.adam.m);
  CHECK(got.adam.v == want.adam.v);
  CHECK(got.final_error == want.final_error);
  // the epoch-4 row of the partial run was dropped and rewritten
  CHECK(slurp(fs::path(rest.out_dir) / "run_log.csv") ==
        slurp(fs::path(full.out_dir) / "run_log.csv"));

  auto other = full;
  other.network.width = 5;
  other.finalize();
  CHECK_THROWS_AS(run_experiment(other, opt), std::invalid_argument);
}

TEST_CASE("non-convergence is reported") {
  auto blowup = tiny(BoundaryKind::Dirichlet);
  blowup.epochs = 5;
  blowup.adam.lr = 1e300;
  const auto s = run_experiment(blowup);
  CHECK_FALSE(s.converged);
  CHECK_FALSE(s.failure.empty());
  CHECK(s.failure.rfind("epoch 2", 0) == 0);
  CHECK(s.epochs_completed == 1);

  auto far = tiny(BoundaryKind::Dirichlet);
  far.epochs = 1;
  far.adam.lr = 50.0;
  const auto f = run_experiment(far);
  CHECK(f.failure.empty());
  REQUIRE(f.final_error);
  CHECK(*f.final_error > kDivergenceThreshold);
  CHECK_FALSE(f.converged);

  auto ok = tiny(BoundaryKind::Dirichlet);
  ok.epochs = 1;
  const auto o = run_experiment(ok);
  CHECK(o.converged == (*o.final_error <= kDivergenceThreshold));

  auto sweep_dir = tiny(BoundaryKind::Dirichlet);
  sweep_dir.epochs = 1;
  const auto path = scratch("sweep-csv") / "cells.csv";
  write_sweep_csv(path.string(), SweepAxis::Lambda,
                  {{"1", s}, {"2", f}});
  const auto rows = lines(slurp(path));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "axis,value,method,rel_l2_error,status");
  CHECK(rows[1] == "lambda,1,dgm,,-");
  CHECK(rows[2].substr(rows[2].size() - 2) == ",-");
}

TEST_CASE("presets") {
  const auto robin = preset("fig2-robin-drm");
  CHECK(robin.loss.lambda == 100.0);
  CHECK(robin.loss.method == Method::DRM);
  CHECK(robin.problem == ProblemSpec::linear_cosine(2, BoundaryKind::Robin));
  CHECK(robin.network.width == 4);
  CHECK(robin.network.blocks == 3);
  CHECK(robin.network.activation == Activation::Swish);
  CHECK(robin.batch_interior == 2000);
  CHECK(robin.batch_boundary == 400);
  CHECK(robin.epochs == 10000);

  CHECK(preset("fig3-neumann-dgm").loss.lambda == 1.0);
  CHECK(preset("fig3-dirichlet-dgm").loss.lambda == 100.0);
  CHECK(preset("fig3-robin-drm").loss.lambda == 500.0);
  const auto p3 = preset("fig3-periodic-dgm");
  CHECK(p3.loss.lambda1 == 1.0);
  CHECK(p3.loss.lambda2 == 0.5);
  CHECK(p3.network.width == 8);
  CHECK(p3.epochs == 20000);
  const auto p2 = preset("fig2-periodic-drm");
  CHECK(p2.loss.lambda1 == 10.0);
  CHECK(p2.loss.lambda2 == 5.0);
  CHECK(preset("fig4-periodic-dgm").batch_interior == 4000);
  CHECK(preset("fig4-dirichlet-dgm").batch_interior == 2000);

  const auto nopen = preset("table9-nopenalty-dgm");
  CHECK(nopen.trial.kind == TrialKind::BallZeroDirichlet);
  CHECK_FALSE(nopen.loss.use_penalty);
  CHECK(nopen.problem == ProblemSpec::nonlinear_ball(4));
  CHECK(nopen.batch_interior == 1000);
  const auto pen = preset("table9-penalty-dgm");
  CHECK(pen.trial.kind == TrialKind::Raw);
  CHECK(pen.loss.use_penalty);
  CHECK(pen.loss.lambda == 100.0);
  CHECK(pen.batch_boundary == 800);

  const auto t6 = preset("table6-d2-dgm");
  CHECK(t6.problem == ProblemSpec::nonlinear_ball(2));
  CHECK(t6.batch_interior == 2000);
  CHECK(t6.batch_boundary == 400);

  const auto t8 = preset("table8-d2-drm");
  CHECK(t8.trial.kind == TrialKind::PeriodicEmbed);
  CHECK(t8.trial.harmonics == 3);
  CHECK(t8.problem.kind == ProblemKind::PeriodicCosine2);
  CHECK_FALSE(t8.loss.use_penalty);

  CHECK_THROWS_AS(preset("fig9-nothing"), std::invalid_argument);

  const auto all = list_presets();
  CHECK(all.size() > 40);
  for (const auto& info : all) {
    INFO(info.name);
    const auto cfg = preset(info.name);
    CHECK(cfg.name == info.name);
    CHECK_FALSE(info.description.empty());
    CHECK_NOTHROW(cfg.validate());
  }
}

TEST_CASE("sweeps") {
  auto base = tiny(BoundaryKind::Dirichlet);
  base.epochs = 2;

  const auto lambdas = sweep(base, SweepAxis::Lambda, {"0.1", "1", "10", "100"});
  REQUIRE(lambdas.size() == 4);
  CHECK(lambdas[0].summary.config.loss.lambda == 0.1);
  CHECK(lambdas[3].summary.config.loss.lambda == 100.0);
  for (const auto& c : lambdas) CHECK(c.summary.config.seed == base.seed);

  const auto depths = sweep(base, SweepAxis::Depth, {"2", "3", "4"}, true);
  REQUIRE(depths.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(depths[i].summary.config.network.blocks == i + 2);
    CHECK(depths[i].summary.config.seed == base.seed + i);
    CHECK(depths[i].summary.param_count ==
          param_count(depths[i].summary.config.network));
  }

  CHECK(sweep(base, SweepAxis::Width, {}).empty());

  auto per = tiny(BoundaryKind::Periodic);
  const auto swept = apply_axis(per, SweepAxis::Lambda, "4");
  CHECK(swept.loss.lambda1 == 4.0);
  CHECK(swept.loss.lambda2 == 2.0);
  CHECK(apply_axis(base, SweepAxis::Activation, "adaptive-swish").network.adaptive);
  CHECK(apply_axis(base, SweepAxis::Batch, "123").batch_interior == 123);
  CHECK(apply_axis(base, SweepAxis::BoundaryBatch, "77").batch_boundary == 77);
  CHECK(apply_axis(base, SweepAxis::Width, "9").network.width == 9);
  CHECK_THROWS(apply_axis(base, SweepAxis::Depth, "0"));
  CHECK_THROWS_AS(parse_axis("momentum"), std::invalid_argument);
  for (auto axis : {SweepAxis::Lambda, SweepAxis::Batch, SweepAxis::BoundaryBatch,
                    SweepAxis::Activation, SweepAxis::Depth, SweepAxis::Width}) {
    CHECK(parse_axis(to_string(axis)) == axis);
  }

  auto dir = base;
  dir.out_dir = scratch("sweep-out").string();
  sweep(dir, SweepAxis::Lambda, {"1", "2"});
  CHECK(fs::exists(fs::path(dir.out_dir) / "lambda-1" / "run_log.csv"));
  CHECK(fs::exists(fs::path(dir.out_dir) / "lambda-2" / "summary.json"));
}

TEST_CASE("config json") {
  for (const auto& name : {"fig2-periodic-dgm", "table9-nopenalty-drm",
                           "table8-d4-dgm", "fig3-robin-drm"}) {
    const auto cfg = preset(name);
    const auto j = to_json(cfg);
    CHECK(to_json(config_from_json(j)) == j);
  }

  const auto edited = config_from_json(
      {{"preset", "fig2-dirichlet-dgm"}, {"epochs", 5}, {"lambda", 3.5},
       {"activation", "sin3"}});
  CHECK(edited.epochs == 5);
  CHECK(edited.loss.lambda == 3.5);
  CHECK(edited.network.activation == Activation::SinCubed);
  CHECK(edited.batch_interior == 2000);

  const auto plain = config_from_json(
      {{"problem", to_string(ProblemSpec::nonlinear_ball(3))},
       {"trial", "ball"}, {"penalty", false}, {"activation", "adaptive-swish"}});
  CHECK(plain.problem == ProblemSpec::nonlinear_ball(3));
  CHECK(plain.network.adaptive);
  CHECK(plain.network.input_dim == 3);

  CHECK_THROWS_AS(config_from_json({{"epochz", 5}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"epochs", 0}}), std::invalid_argument);
  CHECK_THROWS(config_from_json({{"preset", "fig2-dirichlet-dgm"}, {"input_dim", 7}}));
  CHECK_THROWS(config_from_json({{"trial", "ball"}}));
  CHECK_THROWS(config_from_json(nlohmann::json::array()));

  const auto file = scratch("config") / "run.json";
  std::ofstream(file) << R"({"preset": "fig2-neumann-drm", "seed": 9})";
  const auto loaded = load_config_file(file.string());
  CHECK(loaded.seed == 9);
  CHECK(loaded.loss.method == Method::DRM);
  CHECK_THROWS(load_config_file((scratch("config") / "missing.json").string()));
}

TEST_CASE("checkpoint files") {
  const auto path = (scratch("ckpt") / "c.txt").string();
  auto cfg = net(3, 5, 2, Activation::AdaptiveSwish);
  auto p = random_params(cfg, 3);
  p.flat()[0] = 0.1 + 0.2;
  p.flat()[1] = -1e-300;
  p.flat()[2] = 1.0 / 3.0;
  AdamState st(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    st.m[i] = std::sin(double(i));
    st.v[i] = std::exp(-double(i));
  }
  st.step = 42;
  const auto trial = TrialFunction::periodic({2.0}, 3);
  write_checkpoint(path, {p, trial, 42, st});
  const auto back = read_checkpoint(path);
  CHECK(back.params.config() == cfg);
  CHECK(std::equal(p.flat().begin(), p.flat().end(), back.params.flat().begin()));
  CHECK(back.trial == trial);
  CHECK(back.epoch == 42);
  REQUIRE(back.adam);
  CHECK(back.adam->m == st.m);
  CHECK(back.adam->v == st.v);
  CHECK(back.adam->step == 42);

  write_checkpoint(path, {p, TrialFunction::raw(), 7, std::nullopt});
  CHECK_FALSE(read_checkpoint(path).adam);
  CHECK(lines(slurp(path)).size() == 2 + p.size());

  std::ofstream(path) << "not a checkpoint\n";
  CHECK_THROWS(read_checkpoint(path));
  write_checkpoint(path, {p, trial, 1, st});
  auto text = slurp(path);
  std::ofstream(path) << text.substr(0, text.size() / 2);
  CHECK_THROWS(read_checkpoint(path));
}

TEST_CASE("command line") {
  auto [status, out] = cli("list-presets");
  CHECK(status == 0);
  CHECK(out.find("fig2-dirichlet-dgm\t") != std::string::npos);
  CHECK(lines(out).size() == list_presets().size());

  std::tie(status, out) = cli("show fig3-neumann-dgm");
  CHECK(status == 0);
  const auto shown = nlohmann::json::parse(out);
  CHECK(shown.at("lambda") == 1.0);
  CHECK(to_json(config_from_json(shown)) == to_json(preset("fig3-neumann-dgm")));

  const auto dir = scratch("cli-run");
  std::tie(status, out) = cli("run --preset fig2-robin-dgm --epochs 3 --seed 5 "
                              "--deterministic --quiet --out " + dir.string());
  CHECK(status == 0);
  const auto summary = nlohmann::json::parse(out);
  CHECK(summary.at("epochs_completed") == 3);
  CHECK(summary.at("config").at("seed") == 5);
  const auto rows = lines(slurp(dir / "run_log.csv"));
  CHECK(rows.size() == 4);

  auto same = preset("fig2-robin-dgm");
  same.epochs = 3;
  same.seed = 5;
  same.deterministic = true;
  same.out_dir = scratch("cli-lib").string();
  run_experiment(same);
  CHECK(slurp(dir / "run_log.csv") ==
        slurp(fs::path(same.out_dir) / "run_log.csv"));

  const auto cfg_file = scratch("cli-config") / "c.json";
  std::ofstream(cfg_file) << R"({"preset": "fig2-dirichlet-drm", "epochs": 2,
                                 "batch_interior": 50, "eval_batch": 100})";
  std::tie(status, out) = cli("run --quiet --config " + cfg_file.string());
  CHECK(status == 0);
  CHECK(nlohmann::json::parse(out).at("epochs_completed") == 2);

  std::tie(status, out) =
      cli("sweep --preset fig2-dirichlet-dgm --epochs 1 --axis width --values 3,5");
  CHECK(status == 0);
  const auto srows = lines(out);
  REQUIRE(srows.size() == 3);
  CHECK(srows[1].rfind("width,3,dgm,", 0) == 0);
  CHECK(srows[2].rfind("width,5,dgm,", 0) == 0);

  CHECK(cli("run --preset nope").first != 0);
  CHECK(cli("run").first != 0);
  CHECK(cli("frobnicate").first != 0);
}
