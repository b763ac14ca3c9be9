#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ewall/core.hpp"
#include "ewall/within_task.hpp"

namespace ewall {

struct FiniteRepresentationSet {
  std::vector<Representation> representations;
  std::vector<std::string> labels;  // optional; defaulted to g1..gK when empty

  int size() const { return static_cast<int>(representations.size()); }
};

// Posterior over a finite representation set, kept as log weights. The
// normalized view is the probability vector actually drawn from.
class RepresentationWeights {
 public:
  static RepresentationWeights from_probabilities(const Eigen::VectorXd& probs);
  static RepresentationWeights from_log_weights(Eigen::VectorXd log_weights);

  const Eigen::VectorXd& log_weights() const { return log_weights_; }
  Eigen::VectorXd probabilities() const;
  int size() const { return static_cast<int>(log_weights_.size()); }

 private:
  Eigen::VectorXd log_weights_;  // kept max-shifted for stability
};

// multiplicative-weights step: new log weight = old log weight - eta * loss
RepresentationWeights posterior_update(const RepresentationWeights& weights,
                                       const Eigen::VectorXd& task_losses, double eta);

struct MetaConfig {
  double eta = 1.0;             // meta learning rate
  double loss_bound = 1.0;      // C, the range of per-task average losses
  Eigen::VectorXd prior;        // pi_1; uniform when empty
  std::uint64_t seed = 0;
};

// Full trace of a lifelong run over a finite representation set.
struct LifelongRunResult {
  std::vector<int> drawn_indices;            // representation drawn per task (-1 when deterministic)
  std::vector<TaskRunRecord> realized;       // record of the run that incurred the losses
  std::vector<Eigen::VectorXd> posteriors;   // posterior after each task's update
  Eigen::MatrixXd task_losses;               // T x K matrix of per-representation average losses
  Eigen::VectorXd expected_losses;           // per task: sum_k pi_t(k) * L_t(g_k), pre-update pi_t
  double average_realized_loss = 0.0;        // (1/T) sum_t realized average loss
};

// Randomized lifelong loop: draw a representation from the current posterior,
// run the within-task learner through it, then reweight every representation
// by its own within-task average loss. All K per-representation runs are
// evaluated each task because the update needs the full loss vector.
LifelongRunResult ewa_ll_run(const std::vector<TaskDataset>& tasks,
                             const FiniteRepresentationSet& reps,
                             const WithinTaskLearner& learner, const MetaConfig& config);

// Deterministic variant for convex losses: each round predicts the
// posterior-weighted average of the per-representation predictions.
LifelongRunResult integrated_ewa_ll_run(const std::vector<TaskDataset>& tasks,
                                        const FiniteRepresentationSet& reps,
                                        const WithinTaskLearner& learner,
                                        const MetaConfig& config);

// mean of N predictions whose representations were sampled i.i.d. from the
// posterior upstream
double mc_integrated_predict(const std::vector<double>& per_rep_predictions);

// comparator oracle contract: best fixed in-hindsight average loss on one
// task through one representation
using ComparatorOracle = std::function<double(const TaskDataset&, const Representation&)>;

// exhaustive enumeration comparator for a finite hypothesis class
ComparatorOracle make_finite_class_comparator(const FiniteHypothesisClass& cls,
                                              const LossFunction& loss);

// realized average loss minus the best representation's averaged per-task
// comparator losses
double compound_regret(const LifelongRunResult& result, const FiniteRepresentationSet& reps,
                       const std::vector<TaskDataset>& tasks,
                       const ComparatorOracle& comparator);

// CSV trace "task,rep_index,weight" of the posterior after each task's update
void write_posterior_csv(const LifelongRunResult& result, const std::string& path);

}  // namespace ewall
