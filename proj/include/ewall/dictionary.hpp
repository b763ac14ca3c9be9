#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "ewall/core.hpp"
#include "ewall/rng.hpp"
#include "ewall/within_task.hpp"

namespace ewall {

// d x K matrix whose columns each have unit Euclidean norm. Feature k of the
// representation is the inner product of the input with column k, so the
// representation maps R^d -> R^K.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(Eigen::MatrixXd columns);  // validates unit columns at 1e-12

  int input_dim() const { return static_cast<int>(m_.rows()); }
  int size() const { return static_cast<int>(m_.cols()); }
  const Eigen::MatrixXd& matrix() const { return m_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return m_.transpose() * x; }
  Representation as_representation() const;

  // exact bit pattern of the entries; memoization key
  std::string fingerprint() const;

 private:
  Eigen::MatrixXd m_;
};

struct MhConfig {
  int n_steps = 10;           // Metropolis-Hastings steps per task
  double proposal_std = 0.1;  // std of the entrywise Gaussian proposal noise
  double eta = 1.0;           // meta learning rate in the Gibbs target
  std::uint64_t seed = 0;
};

// K i.i.d. columns uniform on the unit d-sphere (normalized Gaussians)
Dictionary sample_sphere_prior(int d, int K, Rng& rng);

// adds i.i.d. N(0, proposal_std^2) noise to every entry, then renormalizes
// each column to unit norm; a zero-norm column has its noise resampled
Dictionary propose(const Dictionary& current, double proposal_std, Rng& rng);

// min(1, exp(eta * (cum_loss_current - cum_loss_proposal)))
double acceptance_probability(double eta, double cum_loss_current, double cum_loss_proposal);

// Tasks seen so far plus a memo of per-task average losses keyed by the
// dictionary's bit pattern. Evaluating a candidate on the whole history is
// the dominant cost of the sampler; rejected proposals and the standing state
// are served from the memo.
class CumulativeLossCache {
 public:
  void append_task(TaskDataset task);
  int task_count() const { return static_cast<int>(tasks_.size()); }
  const std::vector<TaskDataset>& tasks() const { return tasks_; }

  // sum over stored tasks of the learner's average loss under the candidate
  double cumulative_loss(const Dictionary& candidate, const WithinTaskLearner& learner);
  // memo-free recomputation, for audits
  double recompute_cumulative_loss(const Dictionary& candidate,
                                   const WithinTaskLearner& learner) const;
  // seed the memo with a loss that was already computed elsewhere (e.g. the
  // realized within-task run of the current state)
  void store_known_loss(const Dictionary& candidate, int task_position, double avg_loss);

 private:
  std::vector<TaskDataset> tasks_;
  std::unordered_map<std::string, std::vector<double>> memo_;  // fingerprint -> per-task losses
};

struct ChainState {
  Dictionary current;
  double cumulative_loss = 0.0;  // of `current` over the cache's tasks
  long accept_count = 0;
  long proposal_count = 0;
};

struct ChainDiagnosticsRow {
  int task = 0;  // 1-based
  int mh_step = 0;
  bool accepted = false;
  double cum_loss_current = 0.0;  // after the step
};

// n_steps propose/accept sweeps against the Gibbs target
// pi_t(g) proportional to exp(-eta * sum of past per-task average losses)
ChainState mh_chain(ChainState state, const MhConfig& config, CumulativeLossCache& cache,
                    const WithinTaskLearner& learner, Rng& rng,
                    std::vector<ChainDiagnosticsRow>* diagnostics = nullptr,
                    int task_index = 0);

struct DictionaryRunResult {
  std::vector<TaskRunRecord> realized;     // within-task run through the drawn dictionary
  std::vector<Dictionary> drawn;           // dictionary used at each task
  std::vector<double> acceptance_rates;    // per-task MH acceptance rate
  std::vector<ChainDiagnosticsRow> chain_log;
  double average_realized_loss = 0.0;
};

// Lifelong loop over the continuous dictionary class: the posterior is never
// materialized, a Metropolis-Hastings chain started from the previous draw
// produces each task's dictionary.
DictionaryRunResult ewa_ll_dictionary_run(const std::vector<TaskDataset>& tasks,
                                          const WithinTaskLearner& learner, int dict_size,
                                          const MhConfig& config);

// CSV "task,mh_step,accepted,cum_loss_current"
void write_chain_csv(const std::vector<ChainDiagnosticsRow>& rows, const std::string& path);

}  // namespace ewall
