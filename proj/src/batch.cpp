#include "ewall/batch.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ewall {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

std::vector<TaskDataset> sample_tasks(const Environment& env, int T, int m, int dimension) {
  require(T >= 1 && m >= 1, "sample_tasks: T and m must be >= 1");
  Rng rng(env.seed);
  std::vector<TaskDataset> tasks;
  tasks.reserve(T);
  for (int t = 0; t < T; ++t) {
    const int handle = env.sample_task_distribution(rng);
    std::vector<Observation> obs;
    obs.reserve(m);
    for (int i = 0; i < m; ++i) obs.push_back(env.sample_observation(handle, rng));
    tasks.emplace_back(t + 1, dimension, std::move(obs));
  }
  return tasks;
}

double vc_delta(const VcDeltaParams& params) {
  require(params.vc_dim >= 1, "vc_delta: VC dimension must be >= 1");
  require(params.sample_size >= 1, "vc_delta: sample size must be >= 1");
  require(params.confidence > 0.0 && params.confidence < 1.0,
          "vc_delta: confidence must be in (0,1)");
  const double V = params.vc_dim;
  const double m = params.sample_size;
  const double eps = params.confidence;
  return 2.0 * std::sqrt(2.0 * (V * std::log(2.0 * m * M_E / V) + std::log(4.0 / eps)) / m);
}

LtlPredictor learning_to_learn(const std::vector<TaskDataset>& training_tasks,
                               const FiniteRepresentationSet& reps,
                               const WithinTaskLearner& learner, const MetaConfig& config,
                               const TaskDataset& new_task, Rng& rng) {
  require(new_task.size() >= 1, "learning_to_learn: new task has no rounds");
  require(static_cast<bool>(learner.run_traced),
          "learning_to_learn: learner must support hypothesis tracing");

  const LifelongRunResult trace = ewa_ll_run(training_tasks, reps, learner, config);
  const int T = static_cast<int>(training_tasks.size());

  LtlPredictor out;
  out.drawn_task = static_cast<int>(rng.uniform_index(T)) + 1;
  out.rep_index = trace.drawn_indices[out.drawn_task - 1];
  out.representation = reps.representations[out.rep_index];

  HypothesisTraceRun run = learner.run_traced(new_task, out.representation);
  const int m = new_task.size();
  out.drawn_round = static_cast<int>(rng.uniform_index(m)) + 1;
  out.hypothesis = run.pre_round_hypotheses[out.drawn_round - 1];
  return out;
}

ErmResult erm_zero_one(const TaskDataset& task, const Representation& rep,
                       const FiniteHypothesisClass& cls) {
  require(cls.size() >= 1, "erm_zero_one: empty hypothesis class");
  const LossFunction loss = LossFunction::zero_one();
  ErmResult best{0, std::numeric_limits<double>::infinity()};
  for (int j = 0; j < cls.size(); ++j) {
    double acc = 0.0;
    for (const auto& obs : task.observations)
      acc += evaluate_loss(loss, cls.hypotheses[j](rep(obs.x)), obs.y);
    const double risk = acc / task.size();
    if (risk < best.risk) best = {j, risk};  // ties keep the lowest index
  }
  return best;
}

EwaTlRunResult ewa_tl_run(const std::vector<TaskDataset>& tasks,
                          const FiniteRepresentationSet& reps,
                          const FiniteHypothesisClass& cls, const MetaConfig& config,
                          const VcDeltaParams& vc) {
  require(!tasks.empty(), "ewa_tl_run: task list is empty");
  require(reps.size() >= 1, "ewa_tl_run: representation set is empty");
  const int T = static_cast<int>(tasks.size());
  const int K = reps.size();

  EwaTlRunResult out;
  out.drawn_indices.reserve(T);
  out.erm_indices.reserve(T);
  out.realized_risks.reserve(T);
  out.posteriors.reserve(T);
  out.scores.resize(T, K);
  out.empirical_risks.resize(T, K);

  Eigen::VectorXd prior = config.prior.size() == 0
                              ? Eigen::VectorXd::Constant(K, 1.0 / K)
                              : config.prior;
  RepresentationWeights weights = RepresentationWeights::from_probabilities(prior);
  Rng rng(config.seed);

  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd pi = weights.probabilities();
    const int drawn = rng.categorical(pi);
    out.drawn_indices.push_back(drawn);

    VcDeltaParams task_vc = vc;
    task_vc.sample_size = tasks[t].size();
    task_vc.confidence = vc.confidence / T;  // epsilon split across tasks
    const double delta = vc_delta(task_vc);

    for (int k = 0; k < K; ++k) {
      const ErmResult erm = erm_zero_one(tasks[t], reps.representations[k], cls);
      out.empirical_risks(t, k) = erm.risk;
      const double score = erm.risk + delta;
      if (score > config.loss_bound + 1e-12)
        throw std::invalid_argument(
            "ewa_tl_run: empirical risk + delta exceeds the declared bound C");
      out.scores(t, k) = score;
      if (k == drawn) {
        out.erm_indices.push_back(erm.index);
        out.realized_risks.push_back(erm.risk);
      }
    }

    weights = posterior_update(weights, out.scores.row(t).transpose(), config.eta);
    out.posteriors.push_back(weights.probabilities());
  }
  return out;
}

}  // namespace ewall
