// Python bindings for the main operations: the loss contract, the within-task
// learners, the lifelong loops (finite set and dictionary), the
// online-to-batch conversion, the bound evaluators, and the synthetic
// experiment.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ewall/batch.hpp"
#include "ewall/bounds.hpp"
#include "ewall/dictionary.hpp"
#include "ewall/experiments.hpp"
#include "ewall/meta.hpp"
#include "ewall/rng.hpp"
#include "ewall/within_task.hpp"

namespace py = pybind11;
using namespace ewall;

namespace {

TaskDataset make_task(int task_index, const Eigen::MatrixXd& inputs,
                      const Eigen::VectorXd& labels) {
  if (inputs.rows() != labels.size())
    throw std::invalid_argument("make_task: inputs and labels disagree on the rounds");
  std::vector<Observation> obs;
  obs.reserve(inputs.rows());
  for (Eigen::Index i = 0; i < inputs.rows(); ++i)
    obs.push_back({inputs.row(i).transpose(), labels[i]});
  return TaskDataset(task_index, static_cast<int>(inputs.cols()), std::move(obs));
}

py::dict report_to_dict(const BoundReport& r) {
  py::dict components, info;
  for (const auto& [name, v] : r.components) components[py::str(name)] = v;
  for (const auto& [name, v] : r.info) info[py::str(name)] = v;
  py::dict out;
  out["total"] = r.total;
  out["components"] = components;
  out["info"] = info;
  return out;
}

}  // namespace

PYBIND11_MODULE(_ewall, m) {
  m.doc() = "online lifelong learning over shared representations";

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", [](Rng& r) { return r.uniform(); })
      .def("normal", [](Rng& r) { return r.normal(); });

  // ---- core -----------------------------------------------------------
  py::enum_<LossKind>(m, "LossKind")
      .value("squared", LossKind::squared)
      .value("absolute", LossKind::absolute)
      .value("hinge", LossKind::hinge)
      .value("zero_one", LossKind::zero_one);

  py::class_<LossFunction>(m, "LossFunction")
      .def_static("squared_clipped", &LossFunction::squared_clipped, py::arg("label_bound"))
      .def_static("squared_unclipped", &LossFunction::squared_unclipped,
                  py::arg("value_bound"), py::arg("lipschitz_const"))
      .def_static("absolute_clipped", &LossFunction::absolute_clipped,
                  py::arg("label_bound"))
      .def_static("hinge_clipped", &LossFunction::hinge_clipped, py::arg("prediction_bound"))
      .def_static("zero_one", &LossFunction::zero_one)
      .def_readonly("kind", &LossFunction::kind)
      .def_readonly("clip_bound", &LossFunction::clip_bound)
      .def_readonly("lipschitz_const", &LossFunction::lipschitz_const)
      .def_readonly("value_bound", &LossFunction::value_bound)
      .def_readonly("expconcavity", &LossFunction::expconcavity)
      .def("clip", &LossFunction::clip, py::arg("prediction"));

  m.def("evaluate_loss", &evaluate_loss, py::arg("loss"), py::arg("prediction"),
        py::arg("label"));
  m.def("loss_derivative", &loss_derivative, py::arg("loss"), py::arg("prediction"),
        py::arg("label"));
  m.def("average_loss",
        static_cast<double (*)(const std::vector<double>&)>(&average_loss),
        py::arg("losses"));

  py::class_<TaskDataset>(m, "TaskDataset")
      .def(py::init(&make_task), py::arg("task_index"), py::arg("inputs"),
           py::arg("labels"))
      .def_readonly("task_index", &TaskDataset::task_index)
      .def_readonly("dimension", &TaskDataset::dimension)
      .def("__len__", &TaskDataset::size)
      .def("inputs",
           [](const TaskDataset& t) {
             Eigen::MatrixXd x(t.size(), t.dimension);
             for (int i = 0; i < t.size(); ++i)
               x.row(i) = t.observations[i].x.transpose();
             return x;
           })
      .def("labels", [](const TaskDataset& t) {
        Eigen::VectorXd y(t.size());
        for (int i = 0; i < t.size(); ++i) y[i] = t.observations[i].y;
        return y;
      });

  py::class_<TaskRunRecord>(m, "TaskRunRecord")
      .def_readonly("task_index", &TaskRunRecord::task_index)
      .def_readonly("predictions", &TaskRunRecord::predictions)
      .def_readonly("losses", &TaskRunRecord::losses)
      .def_readonly("average_loss", &TaskRunRecord::average_loss);

  m.def("read_dataset_csv", &read_dataset_csv, py::arg("path"));
  m.def("write_dataset_csv", &write_dataset_csv, py::arg("tasks"), py::arg("path"));

  // ---- within-task learners -------------------------------------------
  py::class_<LinearHypothesisClass>(m, "LinearHypothesisClass")
      .def(py::init([](int dimension, double norm_bound) {
             return LinearHypothesisClass{dimension, norm_bound};
           }),
           py::arg("dimension"), py::arg("norm_bound"))
      .def_readonly("dimension", &LinearHypothesisClass::dimension)
      .def_readonly("norm_bound", &LinearHypothesisClass::norm_bound);

  py::class_<FiniteHypothesisClass>(m, "FiniteHypothesisClass")
      .def(py::init([](std::vector<Hypothesis> hs) {
             return FiniteHypothesisClass{std::move(hs)};
           }),
           py::arg("hypotheses"))
      .def("__len__", &FiniteHypothesisClass::size);

  m.def("oga_default_step", &oga_default_step, py::arg("norm_bound"),
        py::arg("grad_lipschitz"), py::arg("sample_size"));
  m.def("oga_lambda_step", &oga_lambda_step, py::arg("norm_bound"),
        py::arg("grad_lipschitz"), py::arg("sample_size"), py::arg("dict_size"),
        py::arg("lambda_budget"));
  m.def("ewa_default_rate", &ewa_default_rate, py::arg("loss"), py::arg("hypotheses"),
        py::arg("sample_size"));

  py::class_<OgaRun>(m, "OgaRun")
      .def_readonly("record", &OgaRun::record)
      .def_readonly("pre_round_thetas", &OgaRun::pre_round_thetas);
  m.def("oga_run", &oga_run, py::arg("task"), py::arg("representation"), py::arg("cls"),
        py::arg("loss"), py::arg("step_size"));

  py::class_<EwaWithinRun>(m, "EwaWithinRun")
      .def_readonly("record", &EwaWithinRun::record)
      .def_readonly("pre_round_weights", &EwaWithinRun::pre_round_weights);
  m.def("ewa_within_run", &ewa_within_run, py::arg("task"), py::arg("representation"),
        py::arg("cls"), py::arg("loss"), py::arg("rate"), py::arg("prior"));

  py::class_<WithinTaskLearner>(m, "WithinTaskLearner")
      .def("run", [](const WithinTaskLearner& l, const TaskDataset& t,
                     const Representation& g) { return l.run(t, g); });
  m.def("make_oga_learner", &make_oga_learner, py::arg("cls"), py::arg("loss"),
        py::arg("grad_lipschitz"), py::arg("fixed_step") = std::nullopt);
  m.def("make_ewa_learner", &make_ewa_learner, py::arg("cls"), py::arg("loss"),
        py::arg("fixed_rate") = std::nullopt, py::arg("prior") = std::nullopt);

  // ---- meta level -------------------------------------------------------
  py::class_<FiniteRepresentationSet>(m, "FiniteRepresentationSet")
      .def(py::init([](std::vector<Representation> reps, std::vector<std::string> labels) {
             return FiniteRepresentationSet{std::move(reps), std::move(labels)};
           }),
           py::arg("representations"), py::arg("labels") = std::vector<std::string>{})
      .def_static("from_dictionaries",
                  [](const std::vector<Eigen::MatrixXd>& mats) {
                    FiniteRepresentationSet reps;
                    for (std::size_t k = 0; k < mats.size(); ++k) {
                      reps.representations.push_back(
                          Dictionary(mats[k]).as_representation());
                      reps.labels.push_back("dict" + std::to_string(k));
                    }
                    return reps;
                  },
                  py::arg("matrices"))
      .def("__len__", &FiniteRepresentationSet::size);

  m.def("posterior_update",
        [](const Eigen::VectorXd& probabilities, const Eigen::VectorXd& losses,
           double eta) {
          return posterior_update(RepresentationWeights::from_probabilities(probabilities),
                                  losses, eta)
              .probabilities();
        },
        py::arg("probabilities"), py::arg("task_losses"), py::arg("eta"));

  py::class_<MetaConfig>(m, "MetaConfig")
      .def(py::init([](double eta, double loss_bound, Eigen::VectorXd prior,
                       std::uint64_t seed) {
             return MetaConfig{eta, loss_bound, std::move(prior), seed};
           }),
           py::arg("eta"), py::arg("loss_bound"), py::arg("prior") = Eigen::VectorXd(),
           py::arg("seed") = 0)
      .def_readonly("eta", &MetaConfig::eta)
      .def_readonly("loss_bound", &MetaConfig::loss_bound)
      .def_readonly("seed", &MetaConfig::seed);

  py::class_<LifelongRunResult>(m, "LifelongRunResult")
      .def_readonly("drawn_indices", &LifelongRunResult::drawn_indices)
      .def_readonly("realized", &LifelongRunResult::realized)
      .def_readonly("posteriors", &LifelongRunResult::posteriors)
      .def_readonly("task_losses", &LifelongRunResult::task_losses)
      .def_readonly("expected_losses", &LifelongRunResult::expected_losses)
      .def_readonly("average_realized_loss", &LifelongRunResult::average_realized_loss);

  m.def("ewa_ll_run", &ewa_ll_run, py::arg("tasks"), py::arg("representations"),
        py::arg("learner"), py::arg("config"));
  m.def("integrated_ewa_ll_run", &integrated_ewa_ll_run, py::arg("tasks"),
        py::arg("representations"), py::arg("learner"), py::arg("config"));
  m.def("mc_integrated_predict", &mc_integrated_predict, py::arg("per_rep_predictions"));
  m.def("make_finite_class_comparator", &make_finite_class_comparator, py::arg("cls"),
        py::arg("loss"));
  m.def("compound_regret", &compound_regret, py::arg("result"), py::arg("representations"),
        py::arg("tasks"), py::arg("comparator"));
  m.def("write_posterior_csv", &write_posterior_csv, py::arg("result"), py::arg("path"));

  // ---- dictionary sampler ------------------------------------------------
  py::class_<Dictionary>(m, "Dictionary")
      .def(py::init<Eigen::MatrixXd>(), py::arg("columns"))
      .def_property_readonly("matrix", &Dictionary::matrix)
      .def("input_dim", &Dictionary::input_dim)
      .def("__len__", &Dictionary::size)
      .def("apply", &Dictionary::apply, py::arg("x"))
      .def("as_representation", &Dictionary::as_representation);

  py::class_<MhConfig>(m, "MhConfig")
      .def(py::init([](int n_steps, double proposal_std, double eta, std::uint64_t seed) {
             return MhConfig{n_steps, proposal_std, eta, seed};
           }),
           py::arg("n_steps") = 10, py::arg("proposal_std") = 0.1, py::arg("eta") = 1.0,
           py::arg("seed") = 0)
      .def_readonly("n_steps", &MhConfig::n_steps)
      .def_readonly("proposal_std", &MhConfig::proposal_std)
      .def_readonly("eta", &MhConfig::eta)
      .def_readonly("seed", &MhConfig::seed);

  m.def("sample_sphere_prior", &sample_sphere_prior, py::arg("d"), py::arg("K"),
        py::arg("rng"));
  m.def("propose", &propose, py::arg("current"), py::arg("proposal_std"), py::arg("rng"));
  m.def("acceptance_probability", &acceptance_probability, py::arg("eta"),
        py::arg("cum_loss_current"), py::arg("cum_loss_proposal"));

  py::class_<DictionaryRunResult>(m, "DictionaryRunResult")
      .def_readonly("realized", &DictionaryRunResult::realized)
      .def_readonly("drawn", &DictionaryRunResult::drawn)
      .def_readonly("acceptance_rates", &DictionaryRunResult::acceptance_rates)
      .def_readonly("average_realized_loss", &DictionaryRunResult::average_realized_loss);
  m.def("ewa_ll_dictionary_run", &ewa_ll_dictionary_run, py::arg("tasks"),
        py::arg("learner"), py::arg("dict_size"), py::arg("config"));

  // ---- online-to-batch ----------------------------------------------------
  py::class_<VcDeltaParams>(m, "VcDeltaParams")
      .def(py::init([](int vc_dim, int sample_size, double confidence) {
             return VcDeltaParams{vc_dim, sample_size, confidence};
           }),
           py::arg("vc_dim"), py::arg("sample_size"), py::arg("confidence"))
      .def_readonly("vc_dim", &VcDeltaParams::vc_dim)
      .def_readonly("sample_size", &VcDeltaParams::sample_size)
      .def_readonly("confidence", &VcDeltaParams::confidence);
  m.def("vc_delta", &vc_delta, py::arg("params"));

  py::class_<LtlPredictor>(m, "LtlPredictor")
      .def_readonly("rep_index", &LtlPredictor::rep_index)
      .def_readonly("drawn_task", &LtlPredictor::drawn_task)
      .def_readonly("drawn_round", &LtlPredictor::drawn_round)
      .def("predict", &LtlPredictor::predict, py::arg("x"));
  m.def("learning_to_learn", &learning_to_learn, py::arg("training_tasks"),
        py::arg("representations"), py::arg("learner"), py::arg("config"),
        py::arg("new_task"), py::arg("rng"));

  py::class_<ErmResult>(m, "ErmResult")
      .def_readonly("index", &ErmResult::index)
      .def_readonly("risk", &ErmResult::risk);
  m.def("erm_zero_one", &erm_zero_one, py::arg("task"), py::arg("representation"),
        py::arg("cls"));

  py::class_<EwaTlRunResult>(m, "EwaTlRunResult")
      .def_readonly("drawn_indices", &EwaTlRunResult::drawn_indices)
      .def_readonly("erm_indices", &EwaTlRunResult::erm_indices)
      .def_readonly("realized_risks", &EwaTlRunResult::realized_risks)
      .def_readonly("posteriors", &EwaTlRunResult::posteriors)
      .def_readonly("scores", &EwaTlRunResult::scores)
      .def_readonly("empirical_risks", &EwaTlRunResult::empirical_risks);
  m.def("ewa_tl_run", &ewa_tl_run, py::arg("tasks"), py::arg("representations"),
        py::arg("cls"), py::arg("config"), py::arg("vc"));

  // ---- bound evaluators ----------------------------------------------------
  m.def("beta_oga", &beta_oga, py::arg("B"), py::arg("L"), py::arg("m"));
  m.def("beta_ewa", &beta_ewa, py::arg("zeta0"), py::arg("class_size"), py::arg("m"));
  m.def("beta_oga_lambda", &beta_oga_lambda, py::arg("B"), py::arg("L"), py::arg("m"),
        py::arg("K"), py::arg("Lambda"));
  m.def("eta_finite", &eta_finite, py::arg("C"), py::arg("K"), py::arg("T"));
  m.def("eta_dictionary", &eta_dictionary, py::arg("C"), py::arg("K"), py::arg("d"),
        py::arg("T"));
  m.def("mc_hoeffding_term", &mc_hoeffding_term, py::arg("C"), py::arg("T"),
        py::arg("delta"), py::arg("N"));
  m.def("lambda_max_gram", &lambda_max_gram, py::arg("task"));
  m.def("theorem2_rhs",
        [](const Eigen::MatrixXd& comp, const Eigen::VectorXd& beta, double C, int K,
           int T, double eta) { return report_to_dict(theorem2_rhs(comp, beta, C, K, T, eta)); },
        py::arg("comparator_per_g"), py::arg("beta_per_g"), py::arg("C"), py::arg("K"),
        py::arg("T"), py::arg("eta"));
  m.def("theorem1_rhs_dirac",
        [](const Eigen::MatrixXd& comp, const Eigen::VectorXd& beta, double C, int T,
           double eta, const Eigen::VectorXd& prior) {
          return report_to_dict(theorem1_rhs_dirac(comp, beta, C, T, eta, prior));
        },
        py::arg("comparator_per_g"), py::arg("beta_per_g"), py::arg("C"), py::arg("T"),
        py::arg("eta"), py::arg("prior"));
  m.def("theorem1_objective", &theorem1_objective, py::arg("rho"),
        py::arg("comparator_per_g"), py::arg("beta_per_g"), py::arg("C"), py::arg("T"),
        py::arg("eta"), py::arg("prior"));
  m.def("theorem3_rhs",
        [](double comparator, double C, int K, int d, int T, double beta_m, double B,
           double Phi, double lambda_bar) {
          return report_to_dict(theorem3_rhs(comparator, C, K, d, T, beta_m, B, Phi,
                                             lambda_bar));
        },
        py::arg("comparator"), py::arg("C"), py::arg("K"), py::arg("d"), py::arg("T"),
        py::arg("beta_m"), py::arg("B"), py::arg("Phi"), py::arg("lambda_bar"));
  m.def("theorem6_rhs",
        [](const Eigen::VectorXd& comp, const Eigen::MatrixXd& delta, double C, int T,
           double eta, const Eigen::VectorXd& prior) {
          return report_to_dict(theorem6_rhs(comp, delta, C, T, eta, prior));
        },
        py::arg("comparator_per_g"), py::arg("delta_per_g_t"), py::arg("C"), py::arg("T"),
        py::arg("eta"), py::arg("prior"));

  // ---- synthetic experiment --------------------------------------------------
  py::class_<SyntheticConfig>(m, "SyntheticConfig")
      .def(py::init([](int K, int d, int T, int m, double noise_std, std::uint64_t seed) {
             return SyntheticConfig{K, d, T, m, noise_std, seed};
           }),
           py::arg("K") = 2, py::arg("d") = 5, py::arg("T") = 150, py::arg("m") = 100,
           py::arg("noise_std") = 0.1, py::arg("seed") = 0)
      .def_readonly("K", &SyntheticConfig::K)
      .def_readonly("d", &SyntheticConfig::d)
      .def_readonly("T", &SyntheticConfig::T)
      .def_readonly("m", &SyntheticConfig::m)
      .def_readonly("noise_std", &SyntheticConfig::noise_std)
      .def_readonly("seed", &SyntheticConfig::seed);

  py::class_<SyntheticData>(m, "SyntheticData")
      .def_readonly("tasks", &SyntheticData::tasks)
      .def_readonly("truth", &SyntheticData::truth)
      .def_readonly("thetas", &SyntheticData::thetas);
  m.def("generate_synthetic", &generate_synthetic, py::arg("config"));
  m.def("experiment_loss", &experiment_loss, py::arg("tasks"));

  py::class_<ExperimentTrace>(m, "ExperimentTrace")
      .def_readonly("task", &ExperimentTrace::task)
      .def_readonly("round", &ExperimentTrace::round)
      .def_readonly("loss_ewall", &ExperimentTrace::loss_ewall)
      .def_readonly("cumloss_ewall", &ExperimentTrace::cumloss_ewall)
      .def_readonly("loss_oracle", &ExperimentTrace::loss_oracle)
      .def_readonly("cumloss_oracle", &ExperimentTrace::cumloss_oracle)
      .def_readonly("mh_acceptance_rates", &ExperimentTrace::mh_acceptance_rates)
      .def("__len__", &ExperimentTrace::rows);
  m.def("run_oracle", &run_oracle, py::arg("tasks"), py::arg("truth"), py::arg("loss"),
        py::arg("step"), py::arg("norm_bound") = std::nullopt);

  py::class_<Figure2Options>(m, "Figure2Options")
      .def(py::init<>())
      .def_readwrite("n_mh", &Figure2Options::n_mh)
      .def_readwrite("proposal_std", &Figure2Options::proposal_std)
      .def_readwrite("eta", &Figure2Options::eta)
      .def_readwrite("within_step", &Figure2Options::within_step)
      .def_readwrite("oracle_step", &Figure2Options::oracle_step)
      .def_readwrite("mh_seed", &Figure2Options::mh_seed);

  py::class_<Figure2Result>(m, "Figure2Result")
      .def_readonly("trace", &Figure2Result::trace)
      .def_readonly("eta", &Figure2Result::eta)
      .def_readonly("within_step", &Figure2Result::within_step)
      .def_readonly("oracle_step", &Figure2Result::oracle_step)
      .def_readonly("label_clip", &Figure2Result::label_clip)
      .def_readonly("truth", &Figure2Result::truth);
  m.def("run_figure2_experiment", &run_figure2_experiment, py::arg("config"),
        py::arg("options") = Figure2Options{});

  m.def("emit_csv", &emit_csv, py::arg("trace"), py::arg("path"));
  m.def("parse_csv", &parse_csv, py::arg("path"));
  m.def("emit_plot_data", &emit_plot_data, py::arg("trace"), py::arg("path_prefix"));
}
