#include "npde/trialspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace npde {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

Eigen::VectorXd radial_factor(const Eigen::MatrixXd& points) {
  return (1.0 - points.colwise().norm().array()).matrix().transpose();
}

constexpr Eigen::Index kTapeChunk = 256;

}  // namespace

TrialFunction TrialFunction::periodic(std::vector<double> periods,
                                      int harmonics) {
  if (harmonics < 1) throw std::invalid_argument("harmonics must be >= 1");
  if (periods.empty()) throw std::invalid_argument("periods must be given");
  for (double p : periods) {
    if (!(p > 0.0)) throw std::invalid_argument("periods must be positive");
  }
  return {TrialKind::PeriodicEmbed, std::move(periods), harmonics};
}

double TrialFunction::period(int axis) const {
  return periods.size() == 1 ? periods.front()
                             : periods.at(static_cast<std::size_t>(axis));
}

int TrialFunction::network_input_dim(int dim) const {
  return kind == TrialKind::PeriodicEmbed ? 2 * harmonics * dim : dim;
}

void TrialFunction::check_compatible(const NetworkConfig& cfg, int dim) const {
  if (kind == TrialKind::PeriodicEmbed && periods.size() != 1 &&
      periods.size() != static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("periodic trial needs 1 or d periods");
  }
  if (cfg.input_dim != network_input_dim(dim)) {
    throw std::invalid_argument(
        "trial '" + to_string(*this) + "' in dimension " + std::to_string(dim) +
        " needs network input_dim " + std::to_string(network_input_dim(dim)) +
        ", got " + std::to_string(cfg.input_dim));
  }
}

TrialFunction parse_trial(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts[0] == "raw" && parts.size() == 1) return TrialFunction::raw();
  if (parts[0] == "ball" && parts.size() == 1) return TrialFunction::ball();
  if (parts[0] == "periodic") {
    int k = 0;
    std::vector<double> periods{2.0};
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto field = parts[i];
      if (field.starts_with("k=")) {
        k = std::stoi(std::string(field.substr(2)));
      } else if (field.starts_with("p=")) {
        periods.clear();
        for (auto v : split(field.substr(2), ',')) {
          periods.push_back(std::stod(std::string(v)));
        }
      } else {
        throw std::invalid_argument("bad trial field '" + std::string(field) +
                                    "'");
      }
    }
    return TrialFunction::periodic(std::move(periods), k);
  }
  throw std::invalid_argument("unknown trial '" + std::string(text) + "'");
}

std::string to_string(const TrialFunction& trial) {
  switch (trial.kind) {
    case TrialKind::Raw: return "raw";
    case TrialKind::BallZeroDirichlet: return "ball";
    case TrialKind::PeriodicEmbed: {
      std::ostringstream out;
      out.precision(17);
      out << "periodic:k=" << trial.harmonics << ":p=";
      for (std::size_t i = 0; i < trial.periods.size(); ++i) {
        out << (i ? "," : "") << trial.periods[i];
      }
      return out.str();
    }
  }
  return "?";
}

Eigen::VectorXd periodic_embed(std::span<const double> x,
                               std::span<const double> periods, int harmonics) {
  if (periods.size() != x.size()) {
    throw std::invalid_argument("one period per coordinate required");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(2 * harmonics * x.size()));
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(periods[i] > 0.0)) throw std::invalid_argument("period must be > 0");
    const double base = 2.0 * std::numbers::pi * x[i] / periods[i];
    for (int j = 1; j <= harmonics; ++j) {
      out(row++) = std::sin(j * base);
      out(row++) = std::cos(j * base);
    }
  }
  return out;
}

Eigen::MatrixXd network_inputs(const TrialFunction& trial,
                               const Eigen::MatrixXd& points) {
  if (trial.kind != TrialKind::PeriodicEmbed) return points;
  const auto dim = static_cast<int>(points.rows());
  const int k = trial.harmonics;
  Eigen::MatrixXd out(2 * k * dim, points.cols());
  for (int i = 0; i < dim; ++i) {
    const Eigen::ArrayXd base =
        (2.0 * std::numbers::pi / trial.period(i)) * points.row(i).array();
    for (int j = 1; j <= k; ++j) {
      const auto row = 2 * (i * k + j - 1);
      out.row(row) = (j * base).sin().matrix().transpose();
      out.row(row + 1) = (j * base).cos().matrix().transpose();
    }
  }
  return out;
}

Eigen::VectorXd trial_eval_batch(const TrialFunction& trial,
                                 const ResNetParams& params,
                                 const Eigen::MatrixXd& points) {
  trial.check_compatible(params.config(), static_cast<int>(points.rows()));
  Eigen::VectorXd values = forward_batch(params, network_inputs(trial, points));
  if (trial.kind == TrialKind::BallZeroDirichlet) {
    values.array() *= radial_factor(points).array();
  }
  return values;
}

double trial_eval(const TrialFunction& trial, const ResNetParams& params,
                  std::span<const double> x) {
  Eigen::MatrixXd point(static_cast<Eigen::Index>(x.size()), 1);
  std::copy(x.begin(), x.end(), point.data());
  return trial_eval_batch(trial, params, point)(0);
}

SensitivityPoints trial_sensitivity_points(const TrialFunction& trial,
                                           const Eigen::MatrixXd& points,
                                           const Eigen::VectorXd& weights) {
  SensitivityPoints out{network_inputs(trial, points), weights};
  if (trial.kind == TrialKind::BallZeroDirichlet) {
    out.weights.array() *= radial_factor(points).array();
  }
  return out;
}

void accumulate_trial_gradient(const TrialFunction& trial,
                               const ResNetParams& params,
                               const Eigen::MatrixXd& points,
                               const Eigen::VectorXd& weights,
                               GradientBundle& grad) {
  trial.check_compatible(params.config(), static_cast<int>(points.rows()));
  const auto mapped = trial_sensitivity_points(trial, points, weights);
  accumulate_grad_theta(params, mapped.inputs, mapped.weights, grad);
}

TrialTape::TrialTape(const TrialFunction& trial, const ResNetParams& params,
                     const Eigen::MatrixXd& points) {
  trial.check_compatible(params.config(), static_cast<int>(points.rows()));
  const Eigen::MatrixXd inputs = network_inputs(trial, points);
  const Eigen::Index total = inputs.cols();
  values_.resize(total);
  for (Eigen::Index start = 0; start < total; start += kTapeChunk) {
    const Eigen::Index cols = std::min(kTapeChunk, total - start);
    chunks_.emplace_back(params, inputs.middleCols(start, cols));
    values_.segment(start, cols) = chunks_.back().outputs();
  }
  if (trial.kind == TrialKind::BallZeroDirichlet) {
    factor_ = radial_factor(points);
    values_.array() *= factor_.array();
  }
}

void TrialTape::accumulate_gradient(const Eigen::VectorXd& weights,
                                    GradientBundle& grad) const {
  if (weights.size() != values_.size()) {
    throw std::invalid_argument("one weight per taped point required");
  }
  Eigen::Index start = 0;
  for (const auto& chunk : chunks_) {
    const Eigen::Index cols = chunk.outputs().size();
    if (factor_.size() == 0) {
      chunk.accumulate_gradient(weights.segment(start, cols), grad);
    } else {
      chunk.accumulate_gradient(weights.segment(start, cols).cwiseProduct(
                                    factor_.segment(start, cols)),
                                grad);
    }
    start += cols;
  }
}

}  // namespace npde
