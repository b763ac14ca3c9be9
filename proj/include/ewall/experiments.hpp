#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ewall/core.hpp"
#include "ewall/dictionary.hpp"
#include "ewall/within_task.hpp"

namespace ewall {

// Synthetic regression study: tasks share a hidden dictionary, labels are
// noisy linear functions of the dictionary features.
struct SyntheticConfig {
  int K = 2;
  int d = 5;
  int T = 150;
  int m = 100;
  double noise_std = 0.1;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  std::vector<TaskDataset> tasks;
  Dictionary truth;
  std::vector<Eigen::VectorXd> thetas;  // per-task regression vector in feature space
};

// Draw order under the seed: dictionary columns first, then per task the
// regression vector (K coordinates uniform on [-1,1]), then per round the
// input coordinates (d uniform on [-1,1]) and the Gaussian label noise.
SyntheticData generate_synthetic(const SyntheticConfig& config);

// Per-round losses of the lifelong learner and of the oracle baseline, plus
// per-task chain statistics. The cumulative columns are running sums over the
// whole round sequence. acceptance/fingerprint are sidecar fields carried by
// the plot metadata, not by the result CSV.
struct ExperimentTrace {
  std::vector<int> task;    // 1-based
  std::vector<int> round;   // 1-based within task
  std::vector<double> loss_ewall;
  std::vector<double> cumloss_ewall;
  std::vector<double> loss_oracle;
  std::vector<double> cumloss_oracle;
  std::vector<double> mh_acceptance_rates;  // per task; empty when not applicable
  std::string truth_fingerprint;            // hex hash of the generating dictionary

  std::size_t rows() const { return task.size(); }
};

// Baseline that knows the true dictionary and relearns the regression vector
// within each task by projected online gradient with a fixed step (the
// parameter restarts at zero on every task boundary). Fills the oracle
// columns of a trace.
ExperimentTrace run_oracle(const std::vector<TaskDataset>& tasks, const Dictionary& truth,
                           const LossFunction& loss, double step,
                           std::optional<double> norm_bound = std::nullopt);

struct Figure2Options {
  int n_mh = 10;
  // smaller proposals than the sampler-wide default: the chain then needs
  // visibly more steps when it only gets one per task, which is the regime
  // the single-step variant is meant to exhibit
  double proposal_std = 0.04;
  std::optional<double> eta;          // default: dictionary rate at the empirical loss scale
  std::optional<double> within_step;  // default: the oracle step
  double oracle_step = 0.1;
  std::optional<std::uint64_t> mh_seed;  // default: data seed + 1
};

struct Figure2Result {
  ExperimentTrace trace;
  double eta = 0.0;
  double within_step = 0.0;
  double oracle_step = 0.0;
  double label_clip = 0.0;  // B_y used by the squared loss
  Dictionary truth;
  std::vector<ChainDiagnosticsRow> chain_log;
};

// Generates the synthetic data, runs the dictionary lifelong learner and the
// oracle on the same tasks, and merges their traces.
Figure2Result run_figure2_experiment(const SyntheticConfig& config,
                                     const Figure2Options& options = {});

// result CSV: "task,round,loss_ewall,cumloss_ewall,loss_oracle,cumloss_oracle"
void emit_csv(const ExperimentTrace& trace, const std::string& path);
ExperimentTrace parse_csv(const std::string& path);

// plot-ready pair: <prefix>_series.csv holds long-format series rows,
// <prefix>_meta.csv holds the sidecar key/value metadata
void emit_plot_data(const ExperimentTrace& trace, const std::string& path_prefix);

// sidecar with the generating dictionary and per-task regression vectors
void write_truth_sidecar(const SyntheticData& data, const std::string& path);

// squared loss clipped at the 99.9th percentile of |y| over the dataset
LossFunction experiment_loss(const std::vector<TaskDataset>& tasks);

}  // namespace ewall
