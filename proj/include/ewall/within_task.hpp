#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ewall/core.hpp"

namespace ewall {

// shared representation g: input space -> feature space
using Representation = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
// task-level predictor h: feature space -> real prediction
using Hypothesis = std::function<double(const Eigen::VectorXd&)>;

Representation identity_representation();

// H = { z -> <theta, z> : ||theta|| <= norm_bound }
struct LinearHypothesisClass {
  int dimension = 1;        // p
  double norm_bound = 1.0;  // B
};

struct FiniteHypothesisClass {
  std::vector<Hypothesis> hypotheses;
  int size() const { return static_cast<int>(hypotheses.size()); }
};

// step for the projected online gradient learner: B / (L * sqrt(2m))
double oga_default_step(double norm_bound, double grad_lipschitz, int sample_size);
// fixed step under a spectral budget Lambda on the per-task Gram matrices:
// B / (L * sqrt(2 m K Lambda))
double oga_lambda_step(double norm_bound, double grad_lipschitz, int sample_size,
                       int dict_size, double lambda_budget);
// zeta_0 when the loss declares exp-concavity, otherwise the bounded-loss
// fallback (2/B) sqrt(2 log|H| / m). Returns 0 for the degenerate |H| = 1
// fallback (log 1 = 0); callers should treat that as a warning.
double ewa_default_rate(const LossFunction& loss, const FiniteHypothesisClass& cls,
                        int sample_size);

// Projected online gradient on a linear class through a fixed representation.
// theta_1 = 0; each round predicts <theta_i, g(x_i)>, then takes a gradient
// step and projects back onto the norm ball. pre_round_thetas[i] is the
// parameter used to predict round i.
struct OgaRun {
  TaskRunRecord record;
  std::vector<Eigen::VectorXd> pre_round_thetas;
};
OgaRun oga_run(const TaskDataset& task, const Representation& rep,
               const LinearHypothesisClass& cls, const LossFunction& loss,
               double step_size);

// Exponentially weighted aggregation over a finite hypothesis class. Each
// round predicts the weight-averaged hypothesis output, then reweights by
// exp(-rate * per-hypothesis loss). Weights are kept in log space. When the
// loss declares a clip bound, hypothesis outputs are clipped before
// aggregation, so the forecast stays inside the range where the loss
// contract (boundedness, exp-concavity) holds.
struct EwaWithinRun {
  TaskRunRecord record;
  std::vector<Eigen::VectorXd> pre_round_weights;  // weights used to predict round i
};
EwaWithinRun ewa_within_run(const TaskDataset& task, const Representation& rep,
                            const FiniteHypothesisClass& cls, const LossFunction& loss,
                            double rate, const Eigen::VectorXd& prior);

// Within-task learner contract consumed by the meta level: a pure function of
// (task, representation). run_traced additionally exposes the hypothesis used
// to predict each round (needed by the online-to-batch strategy); it may be
// left empty by learners that cannot provide it.
struct HypothesisTraceRun {
  TaskRunRecord record;
  std::vector<Hypothesis> pre_round_hypotheses;
};
struct WithinTaskLearner {
  LossFunction loss;
  std::function<TaskRunRecord(const TaskDataset&, const Representation&)> run;
  std::function<HypothesisTraceRun(const TaskDataset&, const Representation&)> run_traced;
};

// OGA learner; when no fixed step is given, each task uses the default step
// for its own sample size.
WithinTaskLearner make_oga_learner(const LinearHypothesisClass& cls, const LossFunction& loss,
                                   double grad_lipschitz,
                                   std::optional<double> fixed_step = std::nullopt);
// EWA learner over a finite class; uniform prior unless one is given.
WithinTaskLearner make_ewa_learner(const FiniteHypothesisClass& cls, const LossFunction& loss,
                                   std::optional<double> fixed_rate = std::nullopt,
                                   std::optional<Eigen::VectorXd> prior = std::nullopt);

}  // namespace ewall
