#include "ewall/meta.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "ewall/rng.hpp"

namespace ewall {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Eigen::VectorXd resolve_prior(const MetaConfig& config, int K) {
  if (config.prior.size() == 0) return Eigen::VectorXd::Constant(K, 1.0 / K);
  require(config.prior.size() == K, "MetaConfig: prior length must equal K");
  require((config.prior.array() >= 0.0).all(), "MetaConfig: prior must be nonnegative");
  require(std::abs(config.prior.sum() - 1.0) <= 1e-12, "MetaConfig: prior must sum to 1");
  return config.prior;
}

void check_run_inputs(const std::vector<TaskDataset>& tasks,
                      const FiniteRepresentationSet& reps, const MetaConfig& config) {
  require(!tasks.empty(), "lifelong run: task list is empty");
  require(reps.size() >= 1, "lifelong run: representation set is empty");
  require(config.eta >= 0.0, "lifelong run: eta must be nonnegative");
}

}  // namespace

RepresentationWeights RepresentationWeights::from_probabilities(const Eigen::VectorXd& probs) {
  require(probs.size() >= 1, "RepresentationWeights: empty probability vector");
  require((probs.array() >= 0.0).all(), "RepresentationWeights: negative probability");
  require(std::abs(probs.sum() - 1.0) <= 1e-12,
          "RepresentationWeights: probabilities must sum to 1");
  Eigen::VectorXd lw(probs.size());
  for (int k = 0; k < probs.size(); ++k)
    lw[k] = probs[k] > 0.0 ? std::log(probs[k]) : -std::numeric_limits<double>::infinity();
  return from_log_weights(std::move(lw));
}

RepresentationWeights RepresentationWeights::from_log_weights(Eigen::VectorXd log_weights) {
  require(log_weights.size() >= 1, "RepresentationWeights: empty log-weight vector");
  require(!log_weights.hasNaN(), "RepresentationWeights: NaN log weight");
  RepresentationWeights w;
  w.log_weights_ = std::move(log_weights);
  const double mx = w.log_weights_.maxCoeff();
  require(std::isfinite(mx), "RepresentationWeights: all weights are zero");
  w.log_weights_.array() -= mx;
  return w;
}

Eigen::VectorXd RepresentationWeights::probabilities() const {
  Eigen::VectorXd w = log_weights_.array().exp();
  return w / w.sum();
}

RepresentationWeights posterior_update(const RepresentationWeights& weights,
                                       const Eigen::VectorXd& task_losses, double eta) {
  require(task_losses.size() == weights.size(),
          "posterior_update: loss vector length must equal K");
  require(task_losses.allFinite(), "posterior_update: non-finite task loss");
  require(eta >= 0.0, "posterior_update: eta must be nonnegative");
  return RepresentationWeights::from_log_weights(weights.log_weights() - eta * task_losses);
}

double mc_integrated_predict(const std::vector<double>& per_rep_predictions) {
  require(!per_rep_predictions.empty(), "mc_integrated_predict: empty prediction vector");
  double acc = 0.0;
  for (double p : per_rep_predictions) acc += p;
  return acc / static_cast<double>(per_rep_predictions.size());
}

LifelongRunResult ewa_ll_run(const std::vector<TaskDataset>& tasks,
                             const FiniteRepresentationSet& reps,
                             const WithinTaskLearner& learner, const MetaConfig& config) {
  check_run_inputs(tasks, reps, config);
  const int T = static_cast<int>(tasks.size());
  const int K = reps.size();

  LifelongRunResult out;
  out.drawn_indices.reserve(T);
  out.realized.reserve(T);
  out.posteriors.reserve(T);
  out.task_losses.resize(T, K);
  out.expected_losses.resize(T);

  RepresentationWeights weights =
      RepresentationWeights::from_probabilities(resolve_prior(config, K));
  Rng rng(config.seed);

  double realized_sum = 0.0;
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd pi = weights.probabilities();
    const int drawn = rng.categorical(pi);
    out.drawn_indices.push_back(drawn);

    // the learner is run through every representation: the posterior update
    // needs the whole loss vector, the drawn one doubles as the realized run
    std::vector<TaskRunRecord> records;
    records.reserve(K);
    for (int k = 0; k < K; ++k) {
      try {
        records.push_back(learner.run(tasks[t], reps.representations[k]));
      } catch (const std::exception& e) {
        throw std::runtime_error("ewa_ll_run: learner failed on task " +
                                 std::to_string(tasks[t].task_index) + ", representation " +
                                 std::to_string(k) + ": " + e.what());
      }
      out.task_losses(t, k) = records.back().average_loss;
    }

    out.expected_losses[t] = pi.dot(out.task_losses.row(t).transpose());
    realized_sum += records[drawn].average_loss;
    out.realized.push_back(std::move(records[drawn]));

    weights = posterior_update(weights, out.task_losses.row(t).transpose(), config.eta);
    out.posteriors.push_back(weights.probabilities());
  }

  out.average_realized_loss = realized_sum / T;
  return out;
}

LifelongRunResult integrated_ewa_ll_run(const std::vector<TaskDataset>& tasks,
                                        const FiniteRepresentationSet& reps,
                                        const WithinTaskLearner& learner,
                                        const MetaConfig& config) {
  check_run_inputs(tasks, reps, config);
  if (!learner.loss.convex())
    throw std::invalid_argument(
        "integrated_ewa_ll_run: the aggregated forecast needs a loss that is convex "
        "in its first argument");
  const int T = static_cast<int>(tasks.size());
  const int K = reps.size();

  LifelongRunResult out;
  out.realized.reserve(T);
  out.posteriors.reserve(T);
  out.task_losses.resize(T, K);
  out.expected_losses.resize(T);

  RepresentationWeights weights =
      RepresentationWeights::from_probabilities(resolve_prior(config, K));

  double realized_sum = 0.0;
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd pi = weights.probabilities();
    out.drawn_indices.push_back(-1);

    // per-representation learners evolve on their own predictions only, so
    // running each to completion and mixing afterwards equals the round-by-
    // round aggregation
    std::vector<TaskRunRecord> records;
    records.reserve(K);
    for (int k = 0; k < K; ++k) {
      records.push_back(learner.run(tasks[t], reps.representations[k]));
      out.task_losses(t, k) = records.back().average_loss;
    }

    const int m = tasks[t].size();
    Eigen::VectorXd mix_pred(m), mix_loss(m);
    for (int i = 0; i < m; ++i) {
      double pred = 0.0;
      for (int k = 0; k < K; ++k)
        pred += pi[k] * learner.loss.clip(records[k].predictions[i]);
      mix_pred[i] = pred;
      mix_loss[i] = evaluate_loss(learner.loss, pred, tasks[t].observations[i].y);
    }
    out.realized.push_back(
        make_run_record(tasks[t].task_index, std::move(mix_pred), std::move(mix_loss)));
    realized_sum += out.realized.back().average_loss;
    out.expected_losses[t] = pi.dot(out.task_losses.row(t).transpose());

    weights = posterior_update(weights, out.task_losses.row(t).transpose(), config.eta);
    out.posteriors.push_back(weights.probabilities());
  }

  out.average_realized_loss = realized_sum / T;
  return out;
}

ComparatorOracle make_finite_class_comparator(const FiniteHypothesisClass& cls,
                                              const LossFunction& loss) {
  require(cls.size() >= 1, "make_finite_class_comparator: empty class");
  return [cls, loss](const TaskDataset& task, const Representation& rep) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& h : cls.hypotheses) {
      double acc = 0.0;
      for (const auto& obs : task.observations)
        acc += evaluate_loss(loss, loss.clip(h(rep(obs.x))), obs.y);
      best = std::min(best, acc / task.size());
    }
    return best;
  };
}

double compound_regret(const LifelongRunResult& result, const FiniteRepresentationSet& reps,
                       const std::vector<TaskDataset>& tasks,
                       const ComparatorOracle& comparator) {
  require(!tasks.empty(), "compound_regret: empty task list");
  require(result.realized.size() == tasks.size(),
          "compound_regret: result does not match the task list");
  const int T = static_cast<int>(tasks.size());

  double best = std::numeric_limits<double>::infinity();
  for (const auto& rep : reps.representations) {
    double acc = 0.0;
    for (const auto& task : tasks) acc += comparator(task, rep);
    best = std::min(best, acc / T);
  }
  return result.average_realized_loss - best;
}

void write_posterior_csv(const LifelongRunResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write posterior file: " + path);
  out.precision(17);
  out << "task,rep_index,weight\n";
  for (std::size_t t = 0; t < result.posteriors.size(); ++t)
    for (int k = 0; k < result.posteriors[t].size(); ++k)
      out << (t + 1) << ',' << k << ',' << result.posteriors[t][k] << '\n';
  if (!out) throw std::runtime_error("write failure on posterior file: " + path);
}

}  // namespace ewall
