#include "npde/losses.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace npde {

namespace {

std::string describe_point(const Eigen::MatrixXd& points, Eigen::Index col) {
  std::ostringstream out;
  out.precision(17);
  out << "(";
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    out << (j ? ", " : "") << points(j, col);
  }
  out << ")";
  return out.str();
}

[[noreturn]] void fail_at(std::string_view what, const Eigen::MatrixXd& points,
                          Eigen::Index col) {
  throw NumericalFailure(std::string(what) + " is not finite at x = " +
                         describe_point(points, col));
}

void check_batch(const ProblemSpec& problem, const SampleBatch& batch) {
  if (batch.dim() != problem.dim) {
    throw std::invalid_argument("batch dimension does not match problem");
  }
  if (batch.size() < 1) throw std::invalid_argument("empty sample batch");
}

void check_step(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd step must be positive");
}

std::span<const double> column(const Eigen::MatrixXd& m, Eigen::Index c) {
  return {m.col(c).data(), static_cast<std::size_t>(m.rows())};
}

// Stencil columns per evaluation chunk.
constexpr Eigen::Index kChunkColumns = 256;

// One Monte-Carlo term, w * sum_i t(x_i), split into a per-point stencil
// and a per-point reduction so that it can be evaluated in chunks.
class Term {
 public:
  virtual ~Term() = default;
  virtual Eigen::Index size() const = 0;
  /// Typical stencil columns per point; sets the chunk length.
  virtual Eigen::Index stride() const = 0;
  virtual Eigen::MatrixXd stencil(Eigen::Index begin, Eigen::Index end) const = 0;
  /// sum of t over [begin, end); weights(k) = d(w * sum) / d values(k).
  virtual double reduce(Eigen::Index begin, Eigen::Index end,
                        const Eigen::VectorXd& values,
                        Eigen::VectorXd& weights) const = 0;

  double w = 0.0;
};

enum class Slot { Interior, Penalty, Penalty2 };

struct PlannedTerm {
  std::unique_ptr<Term> term;
  Slot slot;
};

// Per point: x, x + h e_1, x - h e_1, x + h e_2, ...
class InteriorKernel final : public Term {
 public:
  InteriorKernel(Method method, const ProblemSpec& problem,
                 const SampleBatch& batch, double h)
      : method_(method), problem_(problem), batch_(batch), h_(h),
        forcing_(forcing_batch(problem, batch.points)) {
    w = batch.measure / static_cast<double>(batch.size());
  }
  Eigen::Index size() const override { return batch_.size(); }
  Eigen::Index stride() const override { return 2 * problem_.dim + 1; }

  Eigen::MatrixXd stencil(Eigen::Index begin, Eigen::Index end) const override {
    const int d = problem_.dim;
    const Eigen::Index stride = 2 * d + 1;
    Eigen::MatrixXd out(d, (end - begin) * stride);
    for (Eigen::Index c = begin; c < end; ++c) {
      const Eigen::Index base = (c - begin) * stride;
      out.middleCols(base, stride).colwise() = batch_.points.col(c);
      for (int j = 0; j < d; ++j) {
        out(j, base + 1 + 2 * j) += h_;
        out(j, base + 2 + 2 * j) -= h_;
      }
    }
    return out;
  }

  double reduce(Eigen::Index begin, Eigen::Index end,
                const Eigen::VectorXd& values,
                Eigen::VectorXd& weights) const override {
    const int d = problem_.dim;
    const Eigen::Index stride = 2 * d + 1;
    const double inv_h2 = 1.0 / (h_ * h_);
    double sum = 0.0;
    for (Eigen::Index c = begin; c < end; ++c) {
      const Eigen::Index base = (c - begin) * stride;
      const double center = values(base);
      double term = 0.0;
      if (method_ == Method::DGM) {
        double second = 0.0;
        for (int j = 0; j < d; ++j) {
          second += (values(base + 1 + 2 * j) - center) +
                    (values(base + 2 + 2 * j) - center);
        }
        const double r =
            residual_operator(problem_, center, second * inv_h2, forcing_(c));
        term = r * r;
        const double s = 2.0 * w * r;
        weights(base) = s * (2.0 * d * inv_h2 + residual_du(problem_, center));
        weights.segment(base + 1, 2 * d).setConstant(-s * inv_h2);
      } else {
        double grad_sq = 0.0;
        for (int j = 0; j < d; ++j) {
          const double g = (values(base + 1 + 2 * j) -
                            values(base + 2 + 2 * j)) / (2.0 * h_);
          grad_sq += g * g;
          weights(base + 1 + 2 * j) = w * g / (2.0 * h_);
          weights(base + 2 + 2 * j) = -w * g / (2.0 * h_);
        }
        term = energy_density(problem_, center, grad_sq, forcing_(c));
        weights(base) = w * energy_du(problem_, center, forcing_(c));
      }
      if (!std::isfinite(term)) fail_at("interior loss", batch_.points, c);
      sum += term;
    }
    return sum;
  }

 private:
  Method method_;
  const ProblemSpec& problem_;
  const SampleBatch& batch_;
  double h_;
  Eigen::VectorXd forcing_;
};

class DirichletKernel final : public Term {
 public:
  DirichletKernel(const ProblemSpec& problem, const SampleBatch& batch)
      : problem_(problem), batch_(batch) {
    w = batch.measure / static_cast<double>(batch.size());
  }
  Eigen::Index size() const override { return batch_.size(); }
  Eigen::Index stride() const override { return 1; }

  Eigen::MatrixXd stencil(Eigen::Index begin, Eigen::Index end) const override {
    return batch_.points.middleCols(begin, end - begin);
  }

  double reduce(Eigen::Index begin, Eigen::Index end,
                const Eigen::VectorXd& values,
                Eigen::VectorXd& weights) const override {
    double sum = 0.0;
    for (Eigen::Index c = begin; c < end; ++c) {
      const double mismatch =
          values(c - begin) - boundary_g(problem_, column(batch_.points, c), {});
      if (!std::isfinite(mismatch)) {
        fail_at("Dirichlet mismatch", batch_.points, c);
      }
      sum += mismatch * mismatch;
      weights(c - begin) = 2.0 * w * mismatch;
    }
    return sum;
  }

 private:
  const ProblemSpec& problem_;
  const SampleBatch& batch_;
};

// Neumann: n . grad u - g.  Robin: n . grad u + u - g.  Only coordinates
// with a non-zero normal component get a stencil pair.
class FluxKernel final : public Term {
 public:
  FluxKernel(const ProblemSpec& problem, const SampleBatch& batch, double h)
      : problem_(problem), batch_(batch), h_(h),
        robin_(problem.bc == BoundaryKind::Robin) {
    if (!batch.normals) {
      throw std::invalid_argument("Neumann/Robin penalty needs normals");
    }
    const auto& normals = *batch.normals;
    const Eigen::Index n = batch.size();
    offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (Eigen::Index c = 0; c < n; ++c) {
      Eigen::Index count = robin_ ? 1 : 0;
      for (int j = 0; j < batch.dim(); ++j) {
        count += normals(j, c) != 0.0 ? 2 : 0;
      }
      offsets_[static_cast<std::size_t>(c) + 1] = offset(c) + count;
    }
    w = batch.measure / static_cast<double>(n);
  }
  Eigen::Index size() const override { return batch_.size(); }
  Eigen::Index stride() const override {
    return std::max<Eigen::Index>(1, offsets_.back() / batch_.size());
  }

  Eigen::MatrixXd stencil(Eigen::Index begin, Eigen::Index end) const override {
    const auto& normals = *batch_.normals;
    Eigen::MatrixXd out(batch_.dim(), offset(end) - offset(begin));
    for (Eigen::Index c = begin; c < end; ++c) {
      Eigen::Index col = offset(c) - offset(begin);
      if (robin_) out.col(col++) = batch_.points.col(c);
      for (int j = 0; j < batch_.dim(); ++j) {
        if (normals(j, c) == 0.0) continue;
        out.col(col) = batch_.points.col(c);
        out(j, col++) += h_;
        out.col(col) = batch_.points.col(c);
        out(j, col++) -= h_;
      }
    }
    return out;
  }

  double reduce(Eigen::Index begin, Eigen::Index end,
                const Eigen::VectorXd& values,
                Eigen::VectorXd& weights) const override {
    const auto& normals = *batch_.normals;
    double sum = 0.0;
    for (Eigen::Index c = begin; c < end; ++c) {
      const Eigen::Index first = offset(c) - offset(begin);
      Eigen::Index col = first + (robin_ ? 1 : 0);
      double flux = 0.0;
      for (int j = 0; j < batch_.dim(); ++j) {
        if (normals(j, c) == 0.0) continue;
        flux += normals(j, c) * (values(col) - values(col + 1)) / (2.0 * h_);
        col += 2;
      }
      const double g = boundary_g(problem_, column(batch_.points, c),
                                  column(normals, c));
      const double mismatch = flux + (robin_ ? values(first) : 0.0) - g;
      if (!std::isfinite(mismatch)) fail_at("flux mismatch", batch_.points, c);
      sum += mismatch * mismatch;

      const double s = 2.0 * w * mismatch;
      col = first;
      if (robin_) weights(col++) = s;
      for (int j = 0; j < batch_.dim(); ++j) {
        if (normals(j, c) == 0.0) continue;
        weights(col++) = s * normals(j, c) / (2.0 * h_);
        weights(col++) = -s * normals(j, c) / (2.0 * h_);
      }
    }
    return sum;
  }

 private:
  Eigen::Index offset(Eigen::Index c) const {
    return offsets_[static_cast<std::size_t>(c)];
  }

  const ProblemSpec& problem_;
  const SampleBatch& batch_;
  double h_;
  bool robin_;
  std::vector<Eigen::Index> offsets_;
};

void check_pairs(const SampleBatch& batch) {
  if (!batch.pair_axis || !batch.partners) {
    throw std::invalid_argument("periodic penalty needs paired batches");
  }
}

// u(L) - u(R) across one pair of faces.
class PeriodicValueKernel final : public Term {
 public:
  explicit PeriodicValueKernel(const SampleBatch& batch) : batch_(batch) {
    check_pairs(batch);
    w = batch.measure / static_cast<double>(batch.size());
  }
  Eigen::Index size() const override { return batch_.size(); }
  Eigen::Index stride() const override { return 2; }

  Eigen::MatrixXd stencil(Eigen::Index begin, Eigen::Index end) const override {
    Eigen::MatrixXd out(batch_.dim(), 2 * (end - begin));
    for (Eigen::Index c = begin; c < end; ++c) {
      out.col(2 * (c - begin)) = batch_.points.col(c);
      out.col(2 * (c - begin) + 1) = batch_.partners->col(c);
    }
    return out;
  }

  double reduce(Eigen::Index begin, Eigen::Index end,
                const Eigen::VectorXd& values,
                Eigen::VectorXd& weights) const override {
    double sum = 0.0;
    for (Eigen::Index c = begin; c < end; ++c) {
      const Eigen::Index k = 2 * (c - begin);
      const double gap = values(k) - values(k + 1);
      if (!std::isfinite(gap)) fail_at("periodic mismatch", batch_.points, c);
      sum += gap * gap;
      weights(k) = 2.0 * w * gap;
      weights(k + 1) = -2.0 * w * gap;
    }
    return sum;
  }

 private:
  const SampleBatch& batch_;
};

// Axis-derivative gap by central differences across both faces.
class PeriodicSlopeKernel final : public Term {
 public:
  PeriodicSlopeKernel(const SampleBatch& batch, double h)
      : batch_(batch), h_(h) {
    check_pairs(batch);
    w = batch.measure / static_cast<double>(batch.size());
  }
  Eigen::Index size() const override { return batch_.size(); }
  Eigen::Index stride() const override { return 4; }

  Eigen::MatrixXd stencil(Eigen::Index begin, Eigen::Index end) const override {
    const int axis = *batch_.pair_axis;
    Eigen::MatrixXd out(batch_.dim(), 4 * (end - begin));
    for (Eigen::Index c = begin; c < end; ++c) {
      const Eigen::Index k = 4 * (c - begin);
      out.col(k) = batch_.points.col(c);
      out.col(k + 1) = batch_.points.col(c);
      out.col(k + 2) = batch_.partners->col(c);
      out.col(k + 3) = batch_.partners->col(c);
      out(axis, k) += h_;
      out(axis, k + 1) -= h_;
      out(axis, k + 2) += h_;
      out(axis, k + 3) -= h_;
    }
    return out;
  }

  double reduce(Eigen::Index begin, Eigen::Index end,
                const Eigen::VectorXd& values,
                Eigen::VectorXd& weights) const override {
    double sum = 0.0;
    for (Eigen::Index c = begin; c < end; ++c) {
      const Eigen::Index k = 4 * (c - begin);
      const double gap = ((values(k) - values(k + 1)) -
                          (values(k + 2) - values(k + 3))) / (2.0 * h_);
      if (!std::isfinite(gap)) fail_at("periodic mismatch", batch_.points, c);
      sum += gap * gap;
      const double s = 2.0 * w * gap / (2.0 * h_);
      weights(k) = s;
      weights(k + 1) = -s;
      weights(k + 2) = -s;
      weights(k + 3) = s;
    }
    return sum;
  }

 private:
  const SampleBatch& batch_;
  double h_;
};

std::vector<PlannedTerm> boundary_plan(const ProblemSpec& problem,
                                       std::span<const SampleBatch> batches,
                                       double h) {
  check_step(h);
  if (batches.empty()) throw std::invalid_argument("no boundary batches");
  for (const auto& b : batches) check_batch(problem, b);
  std::vector<PlannedTerm> plan;
  switch (problem.bc) {
    case BoundaryKind::Dirichlet:
      plan.push_back({std::make_unique<DirichletKernel>(problem,
                                                        batches.front()),
                      Slot::Penalty});
      break;
    case BoundaryKind::Neumann:
    case BoundaryKind::Robin:
      plan.push_back(
          {std::make_unique<FluxKernel>(problem, batches.front(), h),
           Slot::Penalty});
      break;
    case BoundaryKind::Periodic:
      for (const auto& batch : batches) {
        plan.push_back({std::make_unique<PeriodicValueKernel>(batch),
                        Slot::Penalty});
        plan.push_back({std::make_unique<PeriodicSlopeKernel>(batch, h),
                        Slot::Penalty2});
      }
      break;
  }
  return plan;
}

std::vector<PlannedTerm> loss_plan(const LossConfig& cfg,
                                   const ProblemSpec& problem,
                                   const SampleBatch& interior,
                                   std::span<const SampleBatch> boundary) {
  cfg.validate();
  check_batch(problem, interior);
  std::vector<PlannedTerm> plan;
  plan.push_back({std::make_unique<InteriorKernel>(cfg.method, problem,
                                                   interior, cfg.fd_step),
                  Slot::Interior});
  if (cfg.use_penalty) {
    for (auto& t : boundary_plan(problem, boundary, cfg.fd_step)) {
      plan.push_back(std::move(t));
    }
  }
  return plan;
}

double slot_factor(const LossConfig& cfg, const ProblemSpec& problem,
                   Slot slot) {
  switch (slot) {
    case Slot::Interior: return 1.0;
    case Slot::Penalty:
      return problem.bc == BoundaryKind::Periodic ? cfg.lambda1 : cfg.lambda;
    case Slot::Penalty2: return cfg.lambda2;
  }
  return 0.0;
}

// Runs one term chunk by chunk.  The sink supplies values for a stencil
// and then receives the weights for that same stencil.
template <class Sink>
double run_term(const Term& term, Sink& sink) {
  const Eigen::Index per_chunk =
      std::max<Eigen::Index>(1, kChunkColumns / term.stride());
  Eigen::VectorXd weights;
  double sum = 0.0;
  for (Eigen::Index begin = 0; begin < term.size(); begin += per_chunk) {
    const Eigen::Index end = std::min(term.size(), begin + per_chunk);
    Eigen::MatrixXd stencil = term.stencil(begin, end);
    const Eigen::VectorXd& values = sink.evaluate(stencil);
    weights.resize(stencil.cols());
    sum += term.reduce(begin, end, values, weights);
    sink.accept(std::move(stencil), weights);
  }
  return term.w * sum;
}

// Collects one sensitivity block per term from a generic field.
class FieldSink {
 public:
  explicit FieldSink(const BatchField& u) : u_(u) {}

  const Eigen::VectorXd& evaluate(const Eigen::MatrixXd& points) {
    values_ = u_(points);
    if (values_.size() != points.cols()) {
      throw std::logic_error("field returned the wrong number of values");
    }
    return values_;
  }
  void accept(Eigen::MatrixXd points, const Eigen::VectorXd& weights) {
    columns_ += points.cols();
    points_.push_back(std::move(points));
    weights_.push_back(weights);
  }
  SensitivityBlock take() {
    SensitivityBlock block{Eigen::MatrixXd(rows(), columns_),
                           Eigen::VectorXd(columns_)};
    Eigen::Index col = 0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const Eigen::Index cols = points_[i].cols();
      block.points.middleCols(col, cols) = points_[i];
      block.weights.segment(col, cols) = weights_[i];
      col += cols;
    }
    points_.clear();
    weights_.clear();
    columns_ = 0;
    return block;
  }

 private:
  Eigen::Index rows() const {
    return points_.empty() ? 0 : points_.front().rows();
  }

  const BatchField& u_;
  Eigen::VectorXd values_;
  std::vector<Eigen::MatrixXd> points_;
  std::vector<Eigen::VectorXd> weights_;
  Eigen::Index columns_ = 0;
};

// Tapes each chunk of a trial function and pushes its weights straight
// into a gradient.
class TapeSink {
 public:
  TapeSink(const TrialFunction& trial, const ResNetParams& params,
           GradientBundle& grad)
      : trial_(trial), params_(params), grad_(grad) {}

  void set_factor(double factor) { factor_ = factor; }

  const Eigen::VectorXd& evaluate(const Eigen::MatrixXd& points) {
    tape_.emplace(trial_, params_, points);
    return tape_->values();
  }
  void accept(Eigen::MatrixXd, const Eigen::VectorXd& weights) {
    if (factor_ == 0.0) return;
    if (factor_ == 1.0) {
      tape_->accumulate_gradient(weights, grad_);
    } else {
      tape_->accumulate_gradient(factor_ * weights, grad_);
    }
  }

 private:
  const TrialFunction& trial_;
  const ResNetParams& params_;
  GradientBundle& grad_;
  double factor_ = 1.0;
  std::optional<TrialTape> tape_;
};

void add_to_slot(LossValue& out, Slot slot, double value) {
  switch (slot) {
    case Slot::Interior: out.interior += value; break;
    case Slot::Penalty: out.penalty = out.penalty.value_or(0.0) + value; break;
    case Slot::Penalty2:
      out.penalty2 = out.penalty2.value_or(0.0) + value;
      break;
  }
}

void finish_total(const LossConfig& cfg, const ProblemSpec& problem,
                  LossValue& out) {
  out.total = out.interior;
  if (!cfg.use_penalty) return;
  if (problem.bc == BoundaryKind::Periodic) {
    out.penalty = out.penalty.value_or(0.0);
    out.penalty2 = out.penalty2.value_or(0.0);
    out.total += cfg.lambda1 * *out.penalty + cfg.lambda2 * *out.penalty2;
  } else {
    out.total += cfg.lambda * out.penalty.value_or(0.0);
  }
}

}  // namespace

std::string_view to_string(Method method) {
  return method == Method::DGM ? "dgm" : "drm";
}

Method parse_method(std::string_view name) {
  if (name == "dgm" || name == "DGM") return Method::DGM;
  if (name == "drm" || name == "DRM") return Method::DRM;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

void LossConfig::validate() const {
  check_step(fd_step);
  if (lambda < 0.0 || lambda1 < 0.0 || lambda2 < 0.0) {
    throw std::invalid_argument("penalty weights must be non-negative");
  }
}

Eigen::VectorXd fd_gradient(const ScalarField& u, std::span<const double> x,
                            double h) {
  check_step(h);
  std::vector<double> probe(x.begin(), x.end());
  Eigen::VectorXd grad(static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const double up = u(probe);
    probe[j] = x[j] - h;
    const double down = u(probe);
    probe[j] = x[j];
    grad(static_cast<Eigen::Index>(j)) = (up - down) / (2.0 * h);
  }
  return grad;
}

double fd_laplacian(const ScalarField& u, std::span<const double> x,
                    double h) {
  check_step(h);
  std::vector<double> probe(x.begin(), x.end());
  const double center = u(probe);
  double sum = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const double up = u(probe);
    probe[j] = x[j] - h;
    const double down = u(probe);
    probe[j] = x[j];
    sum += (up - center) + (down - center);
  }
  return sum / (h * h);
}

InteriorTerm interior_loss(Method method, const ProblemSpec& problem,
                           const BatchField& u, const SampleBatch& batch,
                           double h) {
  check_batch(problem, batch);
  check_step(h);
  const InteriorKernel term(method, problem, batch, h);
  FieldSink sink(u);
  InteriorTerm out;
  out.value = run_term(term, sink);
  out.sensitivities.push_back(sink.take());
  return out;
}

PenaltyTerm boundary_penalty(const ProblemSpec& problem, const BatchField& u,
                             std::span<const SampleBatch> batches, double h) {
  PenaltyTerm out;
  if (problem.bc == BoundaryKind::Periodic) out.penalty2 = 0.0;
  FieldSink sink(u);
  for (const auto& planned : boundary_plan(problem, batches, h)) {
    const double value = run_term(*planned.term, sink);
    if (planned.slot == Slot::Penalty2) {
      *out.penalty2 += value;
      out.sensitivities2.push_back(sink.take());
    } else {
      out.penalty += value;
      out.sensitivities.push_back(sink.take());
    }
  }
  return out;
}

LossValue total_loss(const LossConfig& cfg, const ProblemSpec& problem,
                     const BatchField& u, const SampleBatch& interior,
                     std::span<const SampleBatch> boundary) {
  LossValue out;
  FieldSink sink(u);
  for (const auto& planned : loss_plan(cfg, problem, interior, boundary)) {
    add_to_slot(out, planned.slot, run_term(*planned.term, sink));
    auto block = sink.take();
    const double factor = slot_factor(cfg, problem, planned.slot);
    if (factor == 0.0) continue;
    if (factor != 1.0) block.weights *= factor;
    out.sensitivities.push_back(std::move(block));
  }
  finish_total(cfg, problem, out);
  return out;
}

BatchField trial_field(const TrialFunction& trial, const ResNetParams& params) {
  return [&trial, &params](const Eigen::MatrixXd& points) {
    return trial_eval_batch(trial, params, points);
  };
}

BatchField exact_field(const ProblemSpec& problem) {
  return [problem](const Eigen::MatrixXd& points) {
    return exact_u_batch(problem, points);
  };
}

LossValue total_loss(const LossConfig& cfg, const ProblemSpec& problem,
                     const TrialFunction& trial, const ResNetParams& params,
                     const SampleBatch& interior,
                     std::span<const SampleBatch> boundary) {
  trial.check_compatible(params.config(), problem.dim);
  return total_loss(cfg, problem, trial_field(trial, params), interior,
                    boundary);
}

GradientBundle loss_gradient(const TrialFunction& trial,
                             const ResNetParams& params,
                             const Sensitivities& sensitivities) {
  GradientBundle grad(params.config());
  for (const auto& block : sensitivities) {
    accumulate_trial_gradient(trial, params, block.points, block.weights, grad);
  }
  if (!grad.all_finite()) {
    throw NumericalFailure("loss gradient has non-finite entries");
  }
  return grad;
}

LossAndGradient loss_and_gradient(const LossConfig& cfg,
                                  const ProblemSpec& problem,
                                  const TrialFunction& trial,
                                  const ResNetParams& params,
                                  const SampleBatch& interior,
                                  std::span<const SampleBatch> boundary) {
  trial.check_compatible(params.config(), problem.dim);
  LossAndGradient out{{}, GradientBundle(params.config())};
  TapeSink sink(trial, params, out.gradient);
  for (const auto& planned : loss_plan(cfg, problem, interior, boundary)) {
    sink.set_factor(slot_factor(cfg, problem, planned.slot));
    add_to_slot(out.loss, planned.slot, run_term(*planned.term, sink));
  }
  finish_total(cfg, problem, out.loss);
  if (!out.gradient.all_finite()) {
    throw NumericalFailure("loss gradient has non-finite entries");
  }
  return out;
}

}  // namespace npde
