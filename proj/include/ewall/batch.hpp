#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "ewall/core.hpp"
#include "ewall/meta.hpp"
#include "ewall/rng.hpp"
#include "ewall/within_task.hpp"

namespace ewall {

// Task-generating environment: a meta-sampler over task distributions plus a
// per-task observation sampler. Handles returned by the meta-sampler identify
// a task distribution to the observation sampler.
struct Environment {
  std::function<int(Rng&)> sample_task_distribution;
  std::function<Observation(int handle, Rng&)> sample_observation;
  std::uint64_t seed = 0;
};

// draws T tasks of m i.i.d. observations each from the environment's stream
std::vector<TaskDataset> sample_tasks(const Environment& env, int T, int m, int dimension);

struct VcDeltaParams {
  int vc_dim = 1;           // V
  int sample_size = 1;      // m
  double confidence = 0.05; // epsilon
};

// uniform-deviation width 2 sqrt(2 (V log(2 m e / V) + log(4/eps)) / m)
double vc_delta(const VcDeltaParams& params);

// Predictor frozen by the online-to-batch conversion: a representation drawn
// from the lifelong trace and a hypothesis drawn from the within-task trace.
struct LtlPredictor {
  int rep_index = 0;      // index of the chosen representation in the training set
  Representation representation;
  Hypothesis hypothesis;
  int drawn_task = 1;     // uniformly drawn task position (1-based)
  int drawn_round = 1;    // uniformly drawn round position (1-based)

  double predict(const Eigen::VectorXd& x) const { return hypothesis(representation(x)); }
};

// Online-to-batch strategy: run the lifelong loop on the training tasks, pick
// a uniformly random task's drawn representation, run the within-task learner
// on the new task through it, and pick a uniformly random pre-round
// hypothesis. The learner must support hypothesis tracing.
LtlPredictor learning_to_learn(const std::vector<TaskDataset>& training_tasks,
                               const FiniteRepresentationSet& reps,
                               const WithinTaskLearner& learner, const MetaConfig& config,
                               const TaskDataset& new_task, Rng& rng);

struct ErmResult {
  int index = 0;   // hypothesis index, lowest on ties
  double risk = 0.0;
};

// exhaustive empirical risk minimizer under the 0-1 loss
ErmResult erm_zero_one(const TaskDataset& task, const Representation& rep,
                       const FiniteHypothesisClass& cls);

// Trace of a batch-within-online run.
struct EwaTlRunResult {
  std::vector<int> drawn_indices;          // representation drawn per task
  std::vector<int> erm_indices;            // ERM hypothesis under the drawn representation
  std::vector<double> realized_risks;      // empirical risk of the realized choice
  std::vector<Eigen::VectorXd> posteriors; // posterior after each task's update
  Eigen::MatrixXd scores;                  // T x K: empirical risk + delta
  Eigen::MatrixXd empirical_risks;         // T x K: ERM empirical risk per representation
};

// EWA over representations where each task is solved in batch by the 0-1 ERM
// and scored by empirical risk plus the VC confidence width delta(g, m_t,
// eps/T). Updates multiply into the latest posterior.
EwaTlRunResult ewa_tl_run(const std::vector<TaskDataset>& tasks,
                          const FiniteRepresentationSet& reps,
                          const FiniteHypothesisClass& cls, const MetaConfig& config,
                          const VcDeltaParams& vc);

}  // namespace ewall
