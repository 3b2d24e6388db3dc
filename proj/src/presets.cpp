#include "npde/presets.hpp"

#include <array>
#include <functional>
#include <map>
#include <stdexcept>

#include "npde/config.hpp"

namespace npde {

namespace {

struct Entry {
  std::string description;
  std::function<ExperimentConfig()> make;
};

constexpr std::array kMethods = {Method::DGM, Method::DRM};
constexpr std::array kCubeBoundaries = {BoundaryKind::Dirichlet,
                                        BoundaryKind::Neumann,
                                        BoundaryKind::Robin,
                                        BoundaryKind::Periodic};

// Per-dimension settings of the cube training-curve experiments.
struct CubeSetup {
  const char* prefix;
  int dim;
  int width;
  Eigen::Index interior;
  Eigen::Index interior_periodic;
  Eigen::Index boundary;
  Eigen::Index boundary_periodic;
  double lambda_dirichlet;
  double lambda_neumann;
  double lambda_robin;
  double lambda1;
  double lambda2;
  std::int64_t epochs;
};

constexpr std::array kCubeSetups = {
    CubeSetup{"fig2", 2, 4, 2000, 2000, 400, 400, 100.0, 100.0, 100.0, 10.0,
              5.0, 10000},
    CubeSetup{"fig3", 4, 8, 2000, 2000, 800, 8000, 100.0, 1.0, 500.0, 1.0, 0.5,
              20000},
    CubeSetup{"fig4", 8, 16, 2000, 4000, 1600, 16000, 100.0, 1.0, 10.0, 1.0,
              0.5, 50000},
    CubeSetup{"fig5", 16, 32, 2000, 2000, 3200, 3200, 100.0, 1.0, 10.0, 10.0,
              5.0, 100000},
};

ExperimentConfig base(std::string name, ProblemSpec problem, Method method,
                      int width, Eigen::Index interior, Eigen::Index boundary,
                      std::int64_t epochs) {
  ExperimentConfig cfg;
  cfg.name = std::move(name);
  cfg.problem = problem;
  cfg.loss.method = method;
  cfg.network.width = width;
  cfg.network.blocks = 3;
  cfg.network.activation = Activation::Swish;
  cfg.batch_interior = interior;
  cfg.batch_boundary = boundary;
  cfg.epochs = epochs;
  return cfg;
}

ExperimentConfig cube(const CubeSetup& s, BoundaryKind bc, Method method,
                      std::string name) {
  const bool periodic = bc == BoundaryKind::Periodic;
  auto cfg = base(std::move(name), ProblemSpec::linear_cosine(s.dim, bc),
                  method, s.width, periodic ? s.interior_periodic : s.interior,
                  periodic ? s.boundary_periodic : s.boundary, s.epochs);
  switch (bc) {
    case BoundaryKind::Dirichlet: cfg.loss.lambda = s.lambda_dirichlet; break;
    case BoundaryKind::Neumann: cfg.loss.lambda = s.lambda_neumann; break;
    case BoundaryKind::Robin: cfg.loss.lambda = s.lambda_robin; break;
    case BoundaryKind::Periodic:
      cfg.loss.lambda1 = s.lambda1;
      cfg.loss.lambda2 = s.lambda2;
      break;
  }
  return cfg;
}

std::string suffix(Method method) { return std::string(to_string(method)); }

const std::map<std::string, Entry, std::less<>>& registry() {
  static const auto entries = [] {
    std::map<std::string, Entry, std::less<>> out;
    auto add = [&out](std::string name, std::string description,
                      std::function<ExperimentConfig(std::string)> make) {
      out.emplace(name, Entry{std::move(description), [make, name] {
                                auto cfg = make(name);
                                cfg.finalize();
                                cfg.validate();
                                return cfg;
                              }});
    };

    for (const auto& s : kCubeSetups) {
      for (auto bc : kCubeBoundaries) {
        for (auto method : kMethods) {
          add(std::string(s.prefix) + "-" + std::string(to_string(bc)) + "-" +
                  suffix(method),
              "linear cosine problem, d=" + std::to_string(s.dim) + ", " +
                  std::string(to_string(bc)) + " penalty, " + suffix(method),
              [s, bc, method](std::string name) {
                return cube(s, bc, method, std::move(name));
              });
        }
      }
    }

    const auto& fig3 = kCubeSetups[1];
    for (auto method : kMethods) {
      add("table3a-robin-" + suffix(method),
          "4D Robin, lambda=100, boundary batch 800 (interior batch sweep base)",
          [fig3, method](std::string name) {
            auto cfg = cube(fig3, BoundaryKind::Robin, method, std::move(name));
            cfg.loss.lambda = 100.0;
            return cfg;
          });
      add("table3b-robin-" + suffix(method),
          "4D Robin, lambda=100, interior batch 500 (boundary batch sweep base)",
          [fig3, method](std::string name) {
            auto cfg = cube(fig3, BoundaryKind::Robin, method, std::move(name));
            cfg.loss.lambda = 100.0;
            cfg.batch_interior = 500;
            return cfg;
          });
      add("table4-neumann-" + suffix(method),
          "4D Neumann, lambda=500 (activation sweep base)",
          [fig3, method](std::string name) {
            auto cfg =
                cube(fig3, BoundaryKind::Neumann, method, std::move(name));
            cfg.loss.lambda = 500.0;
            return cfg;
          });
    }

    struct BallSetup {
      int dim;
      int width;
      Eigen::Index interior;
      Eigen::Index boundary;
      double lambda;
    };
    for (const auto& b : {BallSetup{2, 8, 2000, 400, 50.0},
                          BallSetup{4, 8, 1000, 800, 100.0},
                          BallSetup{8, 16, 1000, 1600, 400.0}}) {
      for (auto method : kMethods) {
        add("table6-d" + std::to_string(b.dim) + "-" + suffix(method),
            "nonlinear ball, d=" + std::to_string(b.dim) + ", penalty " +
                suffix(method),
            [b, method](std::string name) {
              auto cfg = base(std::move(name),
                              ProblemSpec::nonlinear_ball(b.dim), method,
                              b.width, b.interior, b.boundary, 10000);
              cfg.loss.lambda = b.lambda;
              return cfg;
            });
      }
    }

    for (auto method : kMethods) {
      for (bool penalty : {true, false}) {
        add(std::string("table9-") + (penalty ? "penalty-" : "nopenalty-") +
                suffix(method),
            std::string("nonlinear ball, d=4, ") +
                (penalty ? "penalty" : "exact boundary trial (1-|x|) N(x)"),
            [method, penalty](std::string name) {
              auto cfg = base(std::move(name), ProblemSpec::nonlinear_ball(4),
                              method, 8, 1000, 800, 10000);
              cfg.loss.lambda = 100.0;
              if (!penalty) {
                cfg.trial = TrialFunction::ball();
                cfg.loss.use_penalty = false;
              }
              return cfg;
            });
      }
    }

    for (const auto& s : kCubeSetups) {
      for (auto method : kMethods) {
        add("table8-d" + std::to_string(s.dim) + "-" + suffix(method),
            "product-cosine periodic problem, d=" + std::to_string(s.dim) +
                ", periodic embedding k=3, no penalty",
            [s, method](std::string name) {
              auto cfg = base(std::move(name),
                              ProblemSpec::periodic_cosine2(s.dim), method,
                              s.width, s.interior_periodic, s.boundary_periodic,
                              s.epochs);
              cfg.trial = TrialFunction::periodic({2.0}, 3);
              cfg.loss.use_penalty = false;
              return cfg;
            });
      }
    }
    return out;
  }();
  return entries;
}

}  // namespace

ExperimentConfig preset(std::string_view name) {
  const auto& entries = registry();
  const auto it = entries.find(name);
  if (it == entries.end()) {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return it->second.make();
}

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  for (const auto& [name, entry] : registry()) {
    out.push_back({name, entry.description});
  }
  return out;
}

}  // namespace npde
