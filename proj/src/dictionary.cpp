#include "ewall/dictionary.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ewall {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Dictionary::Dictionary(Eigen::MatrixXd columns) : m_(std::move(columns)) {
  require(m_.rows() >= 1 && m_.cols() >= 1, "Dictionary: matrix must be nonempty");
  for (int k = 0; k < m_.cols(); ++k)
    require(std::abs(m_.col(k).norm() - 1.0) <= 1e-12,
            "Dictionary: column " + std::to_string(k) + " is not unit norm");
}

Representation Dictionary::as_representation() const {
  Eigen::MatrixXd m = m_;
  return [m](const Eigen::VectorXd& x) -> Eigen::VectorXd { return m.transpose() * x; };
}

std::string Dictionary::fingerprint() const {
  std::string key(sizeof(double) * m_.size(), '\0');
  std::memcpy(key.data(), m_.data(), key.size());
  return key;
}

Dictionary sample_sphere_prior(int d, int K, Rng& rng) {
  require(d >= 1, "sample_sphere_prior: d must be >= 1");
  require(K >= 1, "sample_sphere_prior: K must be >= 1");
  Eigen::MatrixXd m(d, K);
  for (int k = 0; k < K; ++k) {
    double norm = 0.0;
    do {
      for (int i = 0; i < d; ++i) m(i, k) = rng.normal();
      norm = m.col(k).norm();
    } while (norm == 0.0);
    m.col(k) /= norm;
  }
  return Dictionary(std::move(m));
}

Dictionary propose(const Dictionary& current, double proposal_std, Rng& rng) {
  require(proposal_std > 0.0, "propose: proposal std must be positive");
  const int d = current.input_dim();
  const int K = current.size();
  Eigen::MatrixXd m(d, K);
  for (int k = 0; k < K; ++k) {
    double norm = 0.0;
    do {
      for (int i = 0; i < d; ++i)
        m(i, k) = current.matrix()(i, k) + proposal_std * rng.normal();
      norm = m.col(k).norm();
    } while (norm == 0.0);
    m.col(k) /= norm;
  }
  return Dictionary(std::move(m));
}

double acceptance_probability(double eta, double cum_loss_current, double cum_loss_proposal) {
  require(eta >= 0.0, "acceptance_probability: eta must be nonnegative");
  require(std::isfinite(cum_loss_current) && std::isfinite(cum_loss_proposal),
          "acceptance_probability: non-finite cumulative loss");
  return std::min(1.0, std::exp(eta * (cum_loss_current - cum_loss_proposal)));
}

void CumulativeLossCache::append_task(TaskDataset task) {
  require(task.size() >= 1, "CumulativeLossCache: empty task");
  tasks_.push_back(std::move(task));
}

double CumulativeLossCache::cumulative_loss(const Dictionary& candidate,
                                            const WithinTaskLearner& learner) {
  auto& entry = memo_[candidate.fingerprint()];
  if (entry.size() < tasks_.size()) {
    const Representation rep = candidate.as_representation();
    for (std::size_t h = entry.size(); h < tasks_.size(); ++h)
      entry.push_back(learner.run(tasks_[h], rep).average_loss);
  }
  double acc = 0.0;
  for (double v : entry) acc += v;
  return acc;
}

double CumulativeLossCache::recompute_cumulative_loss(const Dictionary& candidate,
                                                      const WithinTaskLearner& learner) const {
  const Representation rep = candidate.as_representation();
  double acc = 0.0;
  for (const auto& task : tasks_) acc += learner.run(task, rep).average_loss;
  return acc;
}

void CumulativeLossCache::store_known_loss(const Dictionary& candidate, int task_position,
                                           double avg_loss) {
  require(task_position >= 0 && task_position < task_count(),
          "store_known_loss: task position out of range");
  auto& entry = memo_[candidate.fingerprint()];
  if (static_cast<int>(entry.size()) == task_position) {
    entry.push_back(avg_loss);
  } else if (static_cast<int>(entry.size()) > task_position) {
    require(std::abs(entry[task_position] - avg_loss) <= 1e-10,
            "store_known_loss: conflicting loss for memoized task");
  } else {
    // earlier entries are missing; leave the memo to fill lazily
  }
}

ChainState mh_chain(ChainState state, const MhConfig& config, CumulativeLossCache& cache,
                    const WithinTaskLearner& learner, Rng& rng,
                    std::vector<ChainDiagnosticsRow>* diagnostics, int task_index) {
  require(config.n_steps >= 1, "mh_chain: n_steps must be >= 1");
  for (int step = 0; step < config.n_steps; ++step) {
    Dictionary proposal = propose(state.current, config.proposal_std, rng);
    const double proposal_loss =
        cache.task_count() > 0 ? cache.cumulative_loss(proposal, learner) : 0.0;
    const double p = acceptance_probability(config.eta, state.cumulative_loss, proposal_loss);
    const bool accept = rng.uniform() < p;
    ++state.proposal_count;
    if (accept) {
      ++state.accept_count;
      state.current = std::move(proposal);
      state.cumulative_loss = proposal_loss;
    }
    if (diagnostics)
      diagnostics->push_back({task_index, step + 1, accept, state.cumulative_loss});
  }
  return state;
}

DictionaryRunResult ewa_ll_dictionary_run(const std::vector<TaskDataset>& tasks,
                                          const WithinTaskLearner& learner, int dict_size,
                                          const MhConfig& config) {
  require(!tasks.empty(), "ewa_ll_dictionary_run: task list is empty");
  require(dict_size >= 1, "ewa_ll_dictionary_run: dictionary size must be >= 1");
  const int d = tasks.front().dimension;
  const int T = static_cast<int>(tasks.size());

  Rng rng(config.seed);
  CumulativeLossCache cache;
  DictionaryRunResult out;
  out.realized.reserve(T);
  out.drawn.reserve(T);
  out.acceptance_rates.reserve(T);

  ChainState state;
  state.current = sample_sphere_prior(d, dict_size, rng);
  state.cumulative_loss = 0.0;

  for (int t = 0; t < T; ++t) {
    out.drawn.push_back(state.current);
    TaskRunRecord record = learner.run(tasks[t], state.current.as_representation());
    out.average_realized_loss += record.average_loss;

    // extend the history; the realized run already evaluated the current
    // state on the new task, so its memo entry comes for free
    cache.append_task(tasks[t]);
    cache.store_known_loss(state.current, t, record.average_loss);
    state.cumulative_loss = cache.cumulative_loss(state.current, learner);
    out.realized.push_back(std::move(record));

    const long before_acc = state.accept_count;
    const long before_prop = state.proposal_count;
    state = mh_chain(state, config, cache, learner, rng, &out.chain_log,
                     tasks[t].task_index);
    const long steps = state.proposal_count - before_prop;
    out.acceptance_rates.push_back(
        steps > 0 ? static_cast<double>(state.accept_count - before_acc) / steps : 0.0);
  }

  out.average_realized_loss /= T;
  return out;
}

void write_chain_csv(const std::vector<ChainDiagnosticsRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write chain file: " + path);
  out.precision(17);
  out << "task,mh_step,accepted,cum_loss_current\n";
  for (const auto& r : rows)
    out << r.task << ',' << r.mh_step << ',' << (r.accepted ? 1 : 0) << ','
        << r.cum_loss_current << '\n';
  if (!out) throw std::runtime_error("write failure on chain file: " + path);
}

}  // namespace ewall
