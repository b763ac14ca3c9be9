// Command-line driver: dataset generation, the lifelong learners, the
// online-to-batch conversion, the bound evaluators, and the synthetic
// experiment, all emitting the CSV formats consumed by the tests and docs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ewall/batch.hpp"
#include "ewall/bounds.hpp"
#include "ewall/dictionary.hpp"
#include "ewall/experiments.hpp"
#include "ewall/meta.hpp"
#include "ewall/rng.hpp"
#include "ewall/within_task.hpp"

namespace fs = std::filesystem;
using namespace ewall;

namespace {

struct CommonOptions {
  std::uint64_t seed = 0;
  std::string out = ".";
  int k = 2;
  int d = 5;
  int t = 150;
  int m = 100;
  double noise_std = 0.1;
  std::optional<double> eta;
  int n_mh = 10;
  double proposal_std = 0.1;
  std::optional<double> step_size;
  std::string loss = "squared";
  std::optional<double> clip_bound;
  std::string data;  // dataset csv path, when a run consumes one
};

void add_common(CLI::App& app, CommonOptions& o) {
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--k", o.k, "number of representations / dictionary columns");
  app.add_option("--d", o.d, "input dimension (generation only)");
  app.add_option("--t", o.t, "number of tasks (generation only)");
  app.add_option("--m", o.m, "rounds per task (generation only)");
  app.add_option("--noise_std", o.noise_std, "label noise std (generation only)");
  app.add_option("--eta", o.eta, "meta learning rate (default: formula value)");
  app.add_option("--n_mh", o.n_mh, "chain steps per task");
  app.add_option("--proposal_std", o.proposal_std, "chain proposal std");
  app.add_option("--step_size", o.step_size, "within-task gradient step");
  app.add_option("--loss", o.loss, "loss kind: squared|absolute|hinge|zero_one");
  app.add_option("--clip_bound", o.clip_bound, "prediction clip bound");
  app.add_option("--data", o.data, "input dataset csv (run-* subcommands)");
  app.set_config("--config", "", "key = value configuration file");
}

fs::path out_file(const CommonOptions& o, const std::string& name) {
  fs::create_directories(o.out);
  return fs::path(o.out) / name;
}

std::vector<TaskDataset> load_or_generate(const CommonOptions& o, SyntheticData* synth) {
  if (!o.data.empty()) return read_dataset_csv(o.data);
  SyntheticConfig config{o.k, o.d, o.t, o.m, o.noise_std, o.seed};
  SyntheticData data = generate_synthetic(config);
  if (synth) *synth = data;
  return data.tasks;
}

LossFunction build_loss(const CommonOptions& o, const std::vector<TaskDataset>& tasks) {
  const LossKind kind = loss_kind_from_name(o.loss);
  switch (kind) {
    case LossKind::squared:
      return o.clip_bound ? LossFunction::squared_clipped(*o.clip_bound)
                          : experiment_loss(tasks);
    case LossKind::absolute:
      return LossFunction::absolute_clipped(o.clip_bound.value_or(1.0));
    case LossKind::hinge:
      return LossFunction::hinge_clipped(o.clip_bound.value_or(1.0));
    case LossKind::zero_one:
      return LossFunction::zero_one();
  }
  throw std::invalid_argument("unknown loss kind");
}

// K dictionaries from the sphere prior serve as the finite representation set
FiniteRepresentationSet sampled_dictionary_set(int K, int d, std::uint64_t seed) {
  Rng rng(seed);
  FiniteRepresentationSet reps;
  for (int k = 0; k < K; ++k) {
    const Dictionary dict = sample_sphere_prior(d, K, rng);
    reps.representations.push_back(dict.as_representation());
    reps.labels.push_back("dict" + std::to_string(k));
  }
  return reps;
}

WithinTaskLearner build_oga_learner(const CommonOptions& o, const LossFunction& loss) {
  const double B = std::sqrt(static_cast<double>(o.k));
  const double L = loss.lipschitz_const * std::sqrt(static_cast<double>(o.k));
  LinearHypothesisClass cls{o.k, B};
  return make_oga_learner(cls, loss, L, o.step_size);
}

void write_run_trace(const std::vector<TaskRunRecord>& realized, const CommonOptions& o,
                     const std::string& name) {
  ExperimentTrace trace;
  double cum = 0.0;
  for (const auto& rec : realized) {
    for (int i = 0; i < rec.losses.size(); ++i) {
      trace.task.push_back(rec.task_index);
      trace.round.push_back(i + 1);
      cum += rec.losses[i];
      trace.loss_ewall.push_back(rec.losses[i]);
      trace.cumloss_ewall.push_back(cum);
      trace.loss_oracle.push_back(0.0);
      trace.cumloss_oracle.push_back(0.0);
    }
  }
  emit_csv(trace, out_file(o, name).string());
}

int cmd_generate(const CommonOptions& o) {
  SyntheticConfig config{o.k, o.d, o.t, o.m, o.noise_std, o.seed};
  const SyntheticData data = generate_synthetic(config);
  write_dataset_csv(data.tasks, out_file(o, "dataset.csv").string());
  write_truth_sidecar(data, out_file(o, "truth.csv").string());
  std::ofstream meta(out_file(o, "meta.txt"));
  meta << "seed = " << o.seed << "\nk = " << o.k << "\nd = " << o.d << "\nt = " << o.t
       << "\nm = " << o.m << "\nnoise_std = " << o.noise_std << '\n';
  std::cout << "wrote " << out_file(o, "dataset.csv").string() << " ("
            << data.tasks.size() << " tasks)\n";
  return 0;
}

int cmd_run_finite(const CommonOptions& o) {
  const std::vector<TaskDataset> tasks = load_or_generate(o, nullptr);
  const LossFunction loss = build_loss(o, tasks);
  const int d = tasks.front().dimension;
  const FiniteRepresentationSet reps = sampled_dictionary_set(o.k, d, o.seed + 1);
  const WithinTaskLearner learner = build_oga_learner(o, loss);

  const double C = loss.value_bound;
  MetaConfig config{o.eta.value_or(eta_finite(C, o.k, static_cast<int>(tasks.size()))),
                    C, Eigen::VectorXd(), o.seed};
  const LifelongRunResult res = ewa_ll_run(tasks, reps, learner, config);
  write_posterior_csv(res, out_file(o, "posterior.csv").string());
  write_run_trace(res.realized, o, "result.csv");
  std::cout << "average realized loss " << res.average_realized_loss << " over "
            << tasks.size() << " tasks; eta " << config.eta << '\n';
  return 0;
}

int cmd_run_dictionary(const CommonOptions& o) {
  const std::vector<TaskDataset> tasks = load_or_generate(o, nullptr);
  const LossFunction loss = build_loss(o, tasks);
  const WithinTaskLearner learner = build_oga_learner(o, loss);

  MhConfig mh;
  mh.n_steps = o.n_mh;
  mh.proposal_std = o.proposal_std;
  mh.eta = o.eta.value_or(eta_dictionary(loss.value_bound, o.k,
                                         tasks.front().dimension,
                                         static_cast<int>(tasks.size())));
  mh.seed = o.seed;
  const DictionaryRunResult res = ewa_ll_dictionary_run(tasks, learner, o.k, mh);
  write_chain_csv(res.chain_log, out_file(o, "chain.csv").string());
  write_run_trace(res.realized, o, "result.csv");

  double acc = 0.0;
  for (double r : res.acceptance_rates) acc += r;
  acc /= res.acceptance_rates.size();
  std::cout << "average realized loss " << res.average_realized_loss
            << "; mean acceptance rate " << acc << "; eta " << mh.eta << '\n';
  return 0;
}

int cmd_run_ltl(const CommonOptions& o) {
  const std::vector<TaskDataset> tasks = load_or_generate(o, nullptr);
  if (tasks.size() < 2)
    throw std::invalid_argument("run-ltl needs at least two tasks (training + new)");
  const std::vector<TaskDataset> training(tasks.begin(), tasks.end() - 1);
  const TaskDataset& new_task = tasks.back();

  const LossFunction loss = build_loss(o, tasks);
  const int d = tasks.front().dimension;
  const FiniteRepresentationSet reps = sampled_dictionary_set(o.k, d, o.seed + 1);
  const WithinTaskLearner learner = build_oga_learner(o, loss);
  const double C = loss.value_bound;
  MetaConfig config{
      o.eta.value_or(eta_finite(C, o.k, static_cast<int>(training.size()))), C,
      Eigen::VectorXd(), o.seed};

  Rng rng(o.seed + 2);
  const LtlPredictor p = learning_to_learn(training, reps, learner, config, new_task, rng);

  std::ofstream out(out_file(o, "ltl.csv"));
  out.precision(17);
  out << "round,prediction,label,loss\n";
  double avg = 0.0;
  for (int i = 0; i < new_task.size(); ++i) {
    const double pred = p.predict(new_task.observations[i].x);
    const double l = evaluate_loss(loss, pred, new_task.observations[i].y);
    avg += l;
    out << (i + 1) << ',' << pred << ',' << new_task.observations[i].y << ',' << l
        << '\n';
  }
  avg /= new_task.size();
  std::cout << "frozen predictor from task " << p.drawn_task << ", round "
            << p.drawn_round << " (representation " << p.rep_index
            << "); average loss on the held-out task " << avg << '\n';
  return 0;
}

int cmd_run_tl(const CommonOptions& o) {
  const std::vector<TaskDataset> tasks = load_or_generate(o, nullptr);
  for (const auto& task : tasks)
    for (const auto& obs : task.observations)
      if (obs.y != 1.0 && obs.y != -1.0)
        throw std::invalid_argument("run-tl needs +-1 labels (zero-one loss)");

  const int d = tasks.front().dimension;
  const FiniteRepresentationSet reps = sampled_dictionary_set(o.k, d, o.seed + 1);
  FiniteHypothesisClass cls;  // sign readouts of each feature
  for (int k = 0; k < o.k; ++k) {
    cls.hypotheses.push_back([k](const Eigen::VectorXd& z) { return z[k]; });
    cls.hypotheses.push_back([k](const Eigen::VectorXd& z) { return -z[k]; });
  }

  const int T = static_cast<int>(tasks.size());
  VcDeltaParams vc{2, tasks.front().size(), 0.05};
  VcDeltaParams per_task = vc;
  per_task.confidence = vc.confidence / T;
  const double C = 1.0 + vc_delta(per_task);
  MetaConfig config{o.eta.value_or(eta_finite(C, o.k, T)), C, Eigen::VectorXd(), o.seed};
  const EwaTlRunResult res = ewa_tl_run(tasks, reps, cls, config, vc);

  {
    std::ofstream out(out_file(o, "posterior.csv"));
    out.precision(17);
    out << "task,rep_index,weight\n";
    for (std::size_t t = 0; t < res.posteriors.size(); ++t)
      for (int k = 0; k < res.posteriors[t].size(); ++k)
        out << (t + 1) << ',' << k << ',' << res.posteriors[t][k] << '\n';
  }
  {
    std::ofstream out(out_file(o, "tl.csv"));
    out.precision(17);
    out << "task,drawn_rep,erm_index,empirical_risk\n";
    for (std::size_t t = 0; t < res.drawn_indices.size(); ++t)
      out << (t + 1) << ',' << res.drawn_indices[t] << ',' << res.erm_indices[t] << ','
          << res.realized_risks[t] << '\n';
  }
  double avg = 0.0;
  for (double r : res.realized_risks) avg += r;
  std::cout << "average realized empirical risk " << avg / res.realized_risks.size()
            << "; eta " << config.eta << '\n';
  return 0;
}

int cmd_bounds(const CommonOptions& o, bool as_csv) {
  const double B = std::sqrt(static_cast<double>(o.k));
  const LossFunction loss = o.clip_bound
                                ? LossFunction::squared_clipped(*o.clip_bound)
                                : LossFunction::squared_clipped(1.0);
  const double C = loss.value_bound;
  const double Phi = loss.lipschitz_const;
  const double L = Phi * std::sqrt(static_cast<double>(o.k));

  BoundReport rates;
  rates.info = {
      {"eta_finite", eta_finite(C, o.k, o.t)},
      {"eta_dictionary", eta_dictionary(C, o.k, o.d, o.t)},
      {"beta_oga", beta_oga(B, L, o.m)},
      {"beta_oga_lambda_1_over_d", beta_oga_lambda(B, L, o.m, o.k, 1.0 / o.d)},
      {"beta_ewa_pairwise", beta_ewa(*loss.expconcavity, 2, o.m)},
      {"vc_delta", vc_delta({2, o.m, 0.05})},
      {"mc_hoeffding", mc_hoeffding_term(C, o.t, 0.05, o.n_mh)},
  };
  const BoundReport dict_bound = theorem3_rhs(
      0.0, C, o.k, o.d, o.t, beta_oga(B, L, o.m), B, Phi, 1.0);

  if (as_csv) {
    std::cout << bound_report_csv(rates) << bound_report_csv(dict_bound);
  } else {
    std::cout << "rates at C=" << C << ", K=" << o.k << ", d=" << o.d << ", T=" << o.t
              << ", m=" << o.m << "\n"
              << format_bound_report(rates)
              << "\ndictionary bound (zero comparator, unit spectral budget)\n"
              << format_bound_report(dict_bound);
  }
  return 0;
}

int cmd_figure2(const CommonOptions& o) {
  SyntheticConfig config{o.k, o.d, o.t, o.m, o.noise_std, o.seed};
  Figure2Options options;
  options.n_mh = o.n_mh;
  options.proposal_std = o.proposal_std;
  options.eta = o.eta;
  options.within_step = o.step_size;
  const Figure2Result res = run_figure2_experiment(config, options);

  emit_csv(res.trace, out_file(o, "figure2.csv").string());
  write_chain_csv(res.chain_log, out_file(o, "figure2_chain.csv").string());
  emit_plot_data(res.trace, out_file(o, "figure2").string());

  // zoomed staircase view: the oracle columns of the first 15 tasks
  ExperimentTrace zoom;
  for (std::size_t r = 0; r < res.trace.rows(); ++r) {
    if (res.trace.task[r] > 15) break;
    zoom.task.push_back(res.trace.task[r]);
    zoom.round.push_back(res.trace.round[r]);
    zoom.loss_ewall.push_back(0.0);
    zoom.cumloss_ewall.push_back(0.0);
    zoom.loss_oracle.push_back(res.trace.loss_oracle[r]);
    zoom.cumloss_oracle.push_back(res.trace.cumloss_oracle[r]);
  }
  emit_csv(zoom, out_file(o, "figure1_zoom.csv").string());

  double acc = 0.0;
  for (double a : res.trace.mh_acceptance_rates) acc += a;
  acc /= res.trace.mh_acceptance_rates.size();
  std::cout << "eta " << res.eta << ", within-task step " << res.within_step
            << ", label clip " << res.label_clip << ", mean acceptance rate " << acc
            << '\n';
  std::cout << "final cumulative loss: learner " << res.trace.cumloss_ewall.back()
            << ", oracle " << res.trace.cumloss_oracle.back() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online lifelong learning over shared representations"};
  app.require_subcommand(1);

  CommonOptions o;
  add_common(app, o);
  auto* generate = app.add_subcommand("generate", "write a synthetic dataset");
  auto* run_finite =
      app.add_subcommand("run-finite", "lifelong run over a sampled finite set");
  auto* run_dictionary =
      app.add_subcommand("run-dictionary", "lifelong run with the chain sampler");
  auto* run_ltl =
      app.add_subcommand("run-ltl", "online-to-batch conversion on the last task");
  auto* run_tl =
      app.add_subcommand("run-tl", "batch-within-online run with the 0-1 ERM");
  auto* bounds_cmd = app.add_subcommand("bounds", "evaluate the closed-form rates");
  bool bounds_csv = false;
  bounds_cmd->add_flag("--csv", bounds_csv, "emit CSV instead of aligned text");
  auto* figure2 = app.add_subcommand("figure2", "synthetic dictionary experiment");
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough(true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(o);
    if (run_finite->parsed()) return cmd_run_finite(o);
    if (run_dictionary->parsed()) return cmd_run_dictionary(o);
    if (run_ltl->parsed()) return cmd_run_ltl(o);
    if (run_tl->parsed()) return cmd_run_tl(o);
    if (bounds_cmd->parsed()) return cmd_bounds(o, bounds_csv);
    if (figure2->parsed()) return cmd_figure2(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
