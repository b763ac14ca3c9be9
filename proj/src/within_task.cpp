#include "ewall/within_task.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ewall {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Eigen::VectorXd normalized_probabilities(const Eigen::VectorXd& log_weights) {
  Eigen::VectorXd w = (log_weights.array() - log_weights.maxCoeff()).exp();
  return w / w.sum();
}

}  // namespace

Representation identity_representation() {
  return [](const Eigen::VectorXd& x) { return x; };
}

double oga_default_step(double norm_bound, double grad_lipschitz, int sample_size) {
  require(norm_bound > 0.0, "oga_default_step: norm bound must be positive");
  require(grad_lipschitz > 0.0, "oga_default_step: Lipschitz constant must be positive");
  require(sample_size >= 1, "oga_default_step: sample size must be >= 1");
  return norm_bound / (grad_lipschitz * std::sqrt(2.0 * sample_size));
}

double oga_lambda_step(double norm_bound, double grad_lipschitz, int sample_size,
                       int dict_size, double lambda_budget) {
  require(norm_bound > 0.0, "oga_lambda_step: norm bound must be positive");
  require(grad_lipschitz > 0.0, "oga_lambda_step: Lipschitz constant must be positive");
  require(sample_size >= 1, "oga_lambda_step: sample size must be >= 1");
  require(dict_size >= 1, "oga_lambda_step: dictionary size must be >= 1");
  require(lambda_budget > 0.0, "oga_lambda_step: lambda budget must be positive");
  return norm_bound /
         (grad_lipschitz * std::sqrt(2.0 * sample_size * dict_size * lambda_budget));
}

double ewa_default_rate(const LossFunction& loss, const FiniteHypothesisClass& cls,
                        int sample_size) {
  require(sample_size >= 1, "ewa_default_rate: sample size must be >= 1");
  require(cls.size() >= 1, "ewa_default_rate: empty hypothesis class");
  if (loss.expconcavity) return *loss.expconcavity;
  require(loss.clip_bound.has_value(),
          "ewa_default_rate: fallback rate needs a declared prediction bound");
  const double b = *loss.clip_bound;
  return (2.0 / b) * std::sqrt(2.0 * std::log(static_cast<double>(cls.size())) /
                               static_cast<double>(sample_size));
}

OgaRun oga_run(const TaskDataset& task, const Representation& rep,
               const LinearHypothesisClass& cls, const LossFunction& loss,
               double step_size) {
  require(step_size > 0.0, "oga_run: step size must be positive");
  require(cls.norm_bound > 0.0, "oga_run: norm bound must be positive");
  const int m = task.size();
  const int p = cls.dimension;

  OgaRun out;
  out.pre_round_thetas.reserve(m);
  Eigen::VectorXd predictions(m), losses(m);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);

  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd z = rep(task.observations[i].x);
    require(z.size() == p, "oga_run: representation output dimension mismatch");
    out.pre_round_thetas.push_back(theta);

    const double pred = theta.dot(z);
    const double y = task.observations[i].y;
    predictions[i] = pred;
    losses[i] = evaluate_loss(loss, pred, y);

    const double dl = loss_derivative(loss, pred, y);
    if (!std::isfinite(dl)) throw std::runtime_error("oga_run: non-finite gradient");
    theta -= step_size * dl * z;
    // Euclidean projection onto the ball ||theta|| <= B
    const double n = theta.norm();
    if (n > cls.norm_bound) theta *= cls.norm_bound / n;
  }

  out.record = make_run_record(task.task_index, std::move(predictions), std::move(losses));
  return out;
}

EwaWithinRun ewa_within_run(const TaskDataset& task, const Representation& rep,
                            const FiniteHypothesisClass& cls, const LossFunction& loss,
                            double rate, const Eigen::VectorXd& prior) {
  const int n = cls.size();
  require(n >= 1, "ewa_within_run: empty hypothesis class");
  require(rate >= 0.0, "ewa_within_run: rate must be nonnegative");
  require(prior.size() == n, "ewa_within_run: prior length must equal |H|");
  require((prior.array() >= 0.0).all(), "ewa_within_run: prior must be nonnegative");
  require(std::abs(prior.sum() - 1.0) <= 1e-12, "ewa_within_run: prior must sum to 1");

  const int m = task.size();
  EwaWithinRun out;
  out.pre_round_weights.reserve(m);
  Eigen::VectorXd predictions(m), losses(m);

  // log-space weights with subtract-max renormalization per round
  Eigen::VectorXd log_w(n);
  for (int j = 0; j < n; ++j)
    log_w[j] = prior[j] > 0.0 ? std::log(prior[j])
                              : -std::numeric_limits<double>::infinity();

  Eigen::VectorXd outputs(n), hyp_losses(n);
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd z = rep(task.observations[i].x);
    const double y = task.observations[i].y;
    const Eigen::VectorXd w = normalized_probabilities(log_w);
    out.pre_round_weights.push_back(w);

    for (int j = 0; j < n; ++j) outputs[j] = loss.clip(cls.hypotheses[j](z));
    const double pred = w.dot(outputs);
    predictions[i] = pred;
    losses[i] = evaluate_loss(loss, pred, y);

    for (int j = 0; j < n; ++j) hyp_losses[j] = evaluate_loss(loss, outputs[j], y);
    log_w -= rate * hyp_losses;
    log_w.array() -= log_w.maxCoeff();
    if (log_w.hasNaN())
      throw std::runtime_error("ewa_within_run: weight update produced NaN");
  }

  out.record = make_run_record(task.task_index, std::move(predictions), std::move(losses));
  return out;
}

WithinTaskLearner make_oga_learner(const LinearHypothesisClass& cls, const LossFunction& loss,
                                   double grad_lipschitz, std::optional<double> fixed_step) {
  require(grad_lipschitz > 0.0, "make_oga_learner: Lipschitz constant must be positive");
  loss.validate();
  WithinTaskLearner learner;
  learner.loss = loss;
  auto step_for = [cls, grad_lipschitz, fixed_step](const TaskDataset& task) {
    return fixed_step ? *fixed_step
                      : oga_default_step(cls.norm_bound, grad_lipschitz, task.size());
  };
  learner.run = [cls, loss, step_for](const TaskDataset& task, const Representation& rep) {
    return oga_run(task, rep, cls, loss, step_for(task)).record;
  };
  learner.run_traced = [cls, loss, step_for](const TaskDataset& task,
                                             const Representation& rep) {
    OgaRun run = oga_run(task, rep, cls, loss, step_for(task));
    HypothesisTraceRun traced;
    traced.record = std::move(run.record);
    traced.pre_round_hypotheses.reserve(run.pre_round_thetas.size());
    for (auto& theta : run.pre_round_thetas) {
      traced.pre_round_hypotheses.push_back(
          [theta](const Eigen::VectorXd& z) { return theta.dot(z); });
    }
    return traced;
  };
  return learner;
}

WithinTaskLearner make_ewa_learner(const FiniteHypothesisClass& cls, const LossFunction& loss,
                                   std::optional<double> fixed_rate,
                                   std::optional<Eigen::VectorXd> prior) {
  require(cls.size() >= 1, "make_ewa_learner: empty hypothesis class");
  loss.validate();
  const Eigen::VectorXd pri =
      prior ? *prior : Eigen::VectorXd::Constant(cls.size(), 1.0 / cls.size());
  require(pri.size() == cls.size(), "make_ewa_learner: prior length must equal |H|");

  WithinTaskLearner learner;
  learner.loss = loss;
  auto rate_for = [cls, loss, fixed_rate](const TaskDataset& task) {
    return fixed_rate ? *fixed_rate : ewa_default_rate(loss, cls, task.size());
  };
  learner.run = [cls, loss, pri, rate_for](const TaskDataset& task,
                                           const Representation& rep) {
    return ewa_within_run(task, rep, cls, loss, rate_for(task), pri).record;
  };
  learner.run_traced = [cls, loss, pri, rate_for](const TaskDataset& task,
                                                  const Representation& rep) {
    EwaWithinRun run = ewa_within_run(task, rep, cls, loss, rate_for(task), pri);
    HypothesisTraceRun traced;
    traced.record = std::move(run.record);
    traced.pre_round_hypotheses.reserve(run.pre_round_weights.size());
    for (auto& w : run.pre_round_weights) {
      traced.pre_round_hypotheses.push_back([w, cls, loss](const Eigen::VectorXd& z) {
        double pred = 0.0;
        for (int j = 0; j < cls.size(); ++j)
          pred += w[j] * loss.clip(cls.hypotheses[j](z));
        return pred;
      });
    }
    return traced;
  };
  return learner;
}

}  // namespace ewall
