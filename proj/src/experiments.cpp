#include "ewall/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ewall/bounds.hpp"
#include "ewall/rng.hpp"

namespace ewall {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string hex_hash(const std::string& bytes) {
  // FNV-1a, printable fingerprint for sidecar metadata
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticConfig& config) {
  require(config.K >= 1 && config.d >= 1 && config.T >= 1 && config.m >= 1,
          "generate_synthetic: sizes must be positive");
  require(config.noise_std >= 0.0, "generate_synthetic: noise std must be nonnegative");

  Rng rng(config.seed);
  SyntheticData data;
  data.truth = sample_sphere_prior(config.d, config.K, rng);
  data.tasks.reserve(config.T);
  data.thetas.reserve(config.T);

  for (int t = 1; t <= config.T; ++t) {
    Eigen::VectorXd theta(config.K);
    for (int k = 0; k < config.K; ++k) theta[k] = rng.uniform(-1.0, 1.0);

    std::vector<Observation> obs;
    obs.reserve(config.m);
    for (int i = 0; i < config.m; ++i) {
      Observation o;
      o.x = Eigen::VectorXd(config.d);
      for (int j = 0; j < config.d; ++j) o.x[j] = rng.uniform(-1.0, 1.0);
      const double noise = config.noise_std > 0.0 ? rng.normal(0.0, config.noise_std) : 0.0;
      o.y = theta.dot(data.truth.apply(o.x)) + noise;
      obs.push_back(std::move(o));
    }
    data.tasks.emplace_back(t, config.d, std::move(obs));
    data.thetas.push_back(std::move(theta));
  }
  return data;
}

LossFunction experiment_loss(const std::vector<TaskDataset>& tasks) {
  require(!tasks.empty(), "experiment_loss: no tasks");
  std::vector<double> abs_labels;
  for (const auto& task : tasks)
    for (const auto& obs : task.observations) abs_labels.push_back(std::abs(obs.y));
  std::sort(abs_labels.begin(), abs_labels.end());
  const std::size_t n = abs_labels.size();
  // nearest-rank 99.9th percentile
  std::size_t idx = static_cast<std::size_t>(std::ceil(0.999 * n));
  idx = std::min(std::max<std::size_t>(idx, 1), n) - 1;
  const double b = std::max(abs_labels[idx], 1e-6);
  return LossFunction::squared_clipped(b);
}

ExperimentTrace run_oracle(const std::vector<TaskDataset>& tasks, const Dictionary& truth,
                           const LossFunction& loss, double step,
                           std::optional<double> norm_bound) {
  require(!tasks.empty(), "run_oracle: no tasks");
  require(step > 0.0, "run_oracle: step must be positive");

  LinearHypothesisClass cls;
  cls.dimension = truth.size();
  cls.norm_bound = norm_bound ? *norm_bound : std::sqrt(static_cast<double>(truth.size()));

  ExperimentTrace trace;
  trace.truth_fingerprint = hex_hash(truth.fingerprint());
  const Representation rep = truth.as_representation();

  double cum = 0.0;
  for (const auto& task : tasks) {
    const OgaRun run = oga_run(task, rep, cls, loss, step);  // theta restarts at zero
    for (int i = 0; i < task.size(); ++i) {
      trace.task.push_back(task.task_index);
      trace.round.push_back(i + 1);
      trace.loss_ewall.push_back(0.0);
      trace.cumloss_ewall.push_back(0.0);
      cum += run.record.losses[i];
      trace.loss_oracle.push_back(run.record.losses[i]);
      trace.cumloss_oracle.push_back(cum);
    }
  }
  return trace;
}

Figure2Result run_figure2_experiment(const SyntheticConfig& config,
                                     const Figure2Options& options) {
  SyntheticData data = generate_synthetic(config);
  const LossFunction loss = experiment_loss(data.tasks);
  const double label_clip = *loss.clip_bound;

  // corollary configuration for the dictionary class: B covers the planted
  // regression vectors, the gradient Lipschitz constant is Phi sqrt(K)
  const double B = std::sqrt(static_cast<double>(config.K));
  const double Phi = loss.lipschitz_const;
  const double L = Phi * std::sqrt(static_cast<double>(config.K));

  // The comparison against the oracle is a within-task efficiency statement,
  // so the lifelong learner runs the same gradient step as the oracle by
  // default. The default meta rate evaluates the dictionary-rate formula at
  // the empirical loss scale (the zero predictor's loss, mean y^2) rather
  // than the worst-case clip range, which would flatten the posterior.
  double mean_sq_label = 0.0;
  int n_labels = 0;
  for (const auto& task : data.tasks)
    for (const auto& obs : task.observations) {
      mean_sq_label += obs.y * obs.y;
      ++n_labels;
    }
  mean_sq_label /= n_labels;

  Figure2Result out;
  out.label_clip = label_clip;
  out.oracle_step = options.oracle_step;
  out.within_step = options.within_step ? *options.within_step : options.oracle_step;
  out.eta = options.eta ? *options.eta
                        : eta_dictionary(std::max(mean_sq_label, 1e-12), config.K,
                                         config.d, config.T);
  out.truth = data.truth;

  LinearHypothesisClass cls;
  cls.dimension = config.K;
  cls.norm_bound = B;
  const WithinTaskLearner learner = make_oga_learner(cls, loss, L, out.within_step);

  MhConfig mh;
  mh.n_steps = options.n_mh;
  mh.proposal_std = options.proposal_std;
  mh.eta = out.eta;
  mh.seed = options.mh_seed ? *options.mh_seed : config.seed + 1;

  const DictionaryRunResult dict_run =
      ewa_ll_dictionary_run(data.tasks, learner, config.K, mh);
  ExperimentTrace trace =
      run_oracle(data.tasks, data.truth, loss, options.oracle_step);

  double cum = 0.0;
  std::size_t row = 0;
  for (std::size_t t = 0; t < data.tasks.size(); ++t) {
    const TaskRunRecord& rec = dict_run.realized[t];
    for (int i = 0; i < rec.losses.size(); ++i, ++row) {
      cum += rec.losses[i];
      trace.loss_ewall[row] = rec.losses[i];
      trace.cumloss_ewall[row] = cum;
    }
  }
  trace.mh_acceptance_rates = dict_run.acceptance_rates;
  out.chain_log = dict_run.chain_log;
  out.trace = std::move(trace);
  return out;
}

void emit_csv(const ExperimentTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out.precision(17);
  out << "task,round,loss_ewall,cumloss_ewall,loss_oracle,cumloss_oracle\n";
  for (std::size_t r = 0; r < trace.rows(); ++r)
    out << trace.task[r] << ',' << trace.round[r] << ',' << trace.loss_ewall[r] << ','
        << trace.cumloss_ewall[r] << ',' << trace.loss_oracle[r] << ','
        << trace.cumloss_oracle[r] << '\n';
  if (!out) throw std::runtime_error("write failure on trace file: " + path);
}

ExperimentTrace parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty trace file: " + path);
  if (header != "task,round,loss_ewall,cumloss_ewall,loss_oracle,cumloss_oracle")
    throw std::runtime_error("bad trace header in " + path);

  ExperimentTrace trace;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() != 6)
      throw std::runtime_error("bad trace row at " + path + ":" + std::to_string(line_no));
    trace.task.push_back(static_cast<int>(vals[0]));
    trace.round.push_back(static_cast<int>(vals[1]));
    trace.loss_ewall.push_back(vals[2]);
    trace.cumloss_ewall.push_back(vals[3]);
    trace.loss_oracle.push_back(vals[4]);
    trace.cumloss_oracle.push_back(vals[5]);
  }
  return trace;
}

void emit_plot_data(const ExperimentTrace& trace, const std::string& path_prefix) {
  {
    std::ofstream out(path_prefix + "_series.csv");
    if (!out) throw std::runtime_error("cannot write series file: " + path_prefix);
    out.precision(17);
    out << "series,task,round,value\n";
    for (std::size_t r = 0; r < trace.rows(); ++r) {
      out << "cumloss_ewall," << trace.task[r] << ',' << trace.round[r] << ','
          << trace.cumloss_ewall[r] << '\n';
      out << "cumloss_oracle," << trace.task[r] << ',' << trace.round[r] << ','
          << trace.cumloss_oracle[r] << '\n';
    }
  }
  {
    std::ofstream out(path_prefix + "_meta.csv");
    if (!out) throw std::runtime_error("cannot write meta file: " + path_prefix);
    out.precision(17);
    out << "key,value\n";
    out << "rows," << trace.rows() << '\n';
    out << "tasks," << (trace.task.empty() ? 0 : trace.task.back()) << '\n';
    out << "truth_fingerprint," << trace.truth_fingerprint << '\n';
    for (std::size_t t = 0; t < trace.mh_acceptance_rates.size(); ++t)
      out << "acceptance_rate_task_" << (t + 1) << ',' << trace.mh_acceptance_rates[t]
          << '\n';
  }
}

void write_truth_sidecar(const SyntheticData& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write truth sidecar: " + path);
  out.precision(17);
  out << "kind,index,coord,value\n";
  const Eigen::MatrixXd& m = data.truth.matrix();
  for (int k = 0; k < m.cols(); ++k)
    for (int i = 0; i < m.rows(); ++i)
      out << "dict," << k << ',' << i << ',' << m(i, k) << '\n';
  for (std::size_t t = 0; t < data.thetas.size(); ++t)
    for (int k = 0; k < data.thetas[t].size(); ++k)
      out << "theta," << (t + 1) << ',' << k << ',' << data.thetas[t][k] << '\n';
  if (!out) throw std::runtime_error("write failure on truth sidecar: " + path);
}

}  // namespace ewall
