#include "doctest.h"

#include <cmath>

#include "ewall/batch.hpp"
#include "ewall/bounds.hpp"
#include "support/discrete_env.hpp"
#include "support/oracles.hpp"

using namespace ewall;

namespace {

// labels are sign(x1); one representation exposes x1, the other a constant
struct TlScenario {
  std::vector<TaskDataset> tasks;
  FiniteRepresentationSet reps;
  FiniteHypothesisClass cls;
};

TlScenario realizable_vs_blind(int T, int m) {
  TlScenario s;
  for (int t = 1; t <= T; ++t) {
    std::vector<Observation> obs;
    for (int i = 0; i < m; ++i) {
      Observation o;
      o.x = Eigen::VectorXd(2);
      const double x1 = (i % 2 == 0) ? 1.0 : -1.0;  // balanced by construction
      o.x << x1, 1.0;
      o.y = x1;
      obs.push_back(o);
    }
    s.tasks.emplace_back(t, 2, std::move(obs));
  }
  s.reps.representations.push_back(
      [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return Eigen::VectorXd::Constant(1, x[0]);
      });
  s.reps.representations.push_back(
      [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return Eigen::VectorXd::Constant(1, x[1]);  // constant feature
      });
  s.reps.labels = {"informative", "blind"};
  s.cls.hypotheses = {[](const Eigen::VectorXd& z) { return z[0]; },
                      [](const Eigen::VectorXd& z) { return -z[0]; }};
  return s;
}

// random environment over +-1 labels for the zero-one loss checks
oracles::DiscreteEnvironment random_sign_environment(std::uint64_t seed, int n_dists,
                                                     int support_size, int dimension) {
  Rng rng(seed);
  oracles::DiscreteEnvironment env;
  env.dimension = dimension;
  for (int s = 0; s < support_size; ++s) {
    Observation o;
    o.x = Eigen::VectorXd(dimension);
    for (int j = 0; j < dimension; ++j) o.x[j] = rng.uniform(-1.0, 1.0);
    o.y = rng.uniform() < 0.5 ? -1.0 : 1.0;
    env.support.push_back(std::move(o));
  }
  env.meta_probs = Eigen::VectorXd(n_dists);
  for (int j = 0; j < n_dists; ++j) env.meta_probs[j] = rng.uniform(0.2, 1.0);
  env.meta_probs /= env.meta_probs.sum();
  for (int j = 0; j < n_dists; ++j) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(support_size);
    // each distribution charges a small subset of the support
    const int carriers = 2 + static_cast<int>(rng.uniform_index(2));
    for (int c = 0; c < carriers; ++c)
      p[rng.uniform_index(support_size)] += rng.uniform(0.2, 1.0);
    p /= p.sum();
    env.dist_probs.push_back(p);
  }
  return env;
}

}  // namespace

TEST_SUITE("batch") {

TEST_CASE("vc_delta") {
  // frozen from the printed formula: 2 sqrt(2 (V log(2 m e / V) + log(4/eps)) / m)
  const double direct =
      2.0 * std::sqrt(2.0 * (2.0 * (std::log(100.0) + 1.0) + std::log(80.0)) / 100.0);
  CHECK(vc_delta({2, 100, 0.05}) == doctest::Approx(direct).epsilon(1e-13));
  CHECK(vc_delta({2, 100, 0.05}) == doctest::Approx(1.1168660).epsilon(1e-6));

  // strictly decreasing in m
  for (int m : {1, 2, 4, 10, 50, 100, 1000})
    CHECK(vc_delta({2, 2 * m, 0.05}) < vc_delta({2, m, 0.05}));
  // strictly increasing in V while 2 m e / V stays above e
  for (int V = 1; V < 10; ++V)
    CHECK(vc_delta({V + 1, 100, 0.05}) > vc_delta({V, 100, 0.05}));

  CHECK_THROWS_AS(vc_delta({2, 100, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(vc_delta({0, 100, 0.5}), std::invalid_argument);
}

TEST_CASE("erm_zero_one") {
  SUBCASE("labeling function inside the class wins with risk zero") {
    const TlScenario s = realizable_vs_blind(1, 10);
    const ErmResult erm = erm_zero_one(s.tasks[0], s.reps.representations[0], s.cls);
    CHECK(erm.index == 0);
    CHECK(erm.risk == 0.0);
  }
  SUBCASE("all-positive constant class on all-positive labels") {
    std::vector<Observation> obs;
    for (int i = 0; i < 6; ++i) {
      Observation o;
      o.x = Eigen::VectorXd::Constant(1, 0.5);
      o.y = 1.0;
      obs.push_back(o);
    }
    const TaskDataset task(1, 1, std::move(obs));
    FiniteHypothesisClass cls{{[](const Eigen::VectorXd&) { return 1.0; }}};
    const ErmResult erm = erm_zero_one(task, identity_representation(), cls);
    CHECK(erm.risk == 0.0);
  }
  SUBCASE("ties break toward the lowest index") {
    const TlScenario s = realizable_vs_blind(1, 10);
    FiniteHypothesisClass twice{{s.cls.hypotheses[0], s.cls.hypotheses[0]}};
    const ErmResult erm = erm_zero_one(s.tasks[0], s.reps.representations[0], twice);
    CHECK(erm.index == 0);
  }
  SUBCASE("matches an independent exhaustive scan on random instances") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto env = random_sign_environment(seed, 2, 6, 2);
      Rng rng(seed + 100);
      std::vector<Observation> obs;
      for (int i = 0; i < 12; ++i)
        obs.push_back(env.support[rng.uniform_index(env.support.size())]);
      const TaskDataset task(1, 2, std::move(obs));

      FiniteHypothesisClass cls;
      for (int j = 0; j < 4; ++j) {
        const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
        cls.hypotheses.push_back(
            [a, b](const Eigen::VectorXd& z) { return a * z[0] + b * z[1]; });
      }
      const Representation rep = identity_representation();
      const ErmResult got = erm_zero_one(task, rep, cls);

      double best = 2.0;
      for (int j = 0; j < cls.size(); ++j) {
        int errors = 0;
        for (const auto& o : task.observations) {
          const double out = cls.hypotheses[j](o.x);
          const double sign = out >= 0.0 ? 1.0 : -1.0;
          if (sign != o.y) ++errors;
        }
        best = std::min(best, static_cast<double>(errors) / task.size());
      }
      CHECK(got.risk == doctest::Approx(best).epsilon(1e-14));
    }
  }
}

TEST_CASE("learning_to_learn") {
  const TlScenario s = realizable_vs_blind(5, 4);
  const LossFunction loss = LossFunction::squared_clipped(1.0);
  const WithinTaskLearner learner = make_ewa_learner(s.cls, loss);
  MetaConfig config{0.8, loss.value_bound, Eigen::VectorXd(), 11};

  SUBCASE("T = 1 uses the only drawn representation") {
    const std::vector<TaskDataset> one(s.tasks.begin(), s.tasks.begin() + 1);
    Rng rng(1);
    const LtlPredictor p = learning_to_learn(one, s.reps, learner, config, s.tasks[1], rng);
    CHECK(p.drawn_task == 1);
  }
  SUBCASE("m = 1 freezes the learner's initial hypothesis") {
    LinearHypothesisClass lin{1, 1.0};
    const WithinTaskLearner oga = make_oga_learner(lin, loss, 4.0);
    std::vector<Observation> obs = {s.tasks[0].observations[0]};
    const TaskDataset tiny(9, 2, std::move(obs));
    Rng rng(2);
    const LtlPredictor p = learning_to_learn(s.tasks, s.reps, oga, config, tiny, rng);
    CHECK(p.drawn_round == 1);
    Eigen::VectorXd probe(2);
    probe << 0.7, 0.3;
    CHECK(p.predict(probe) == 0.0);  // theta starts at zero
  }
  SUBCASE("the frozen predictor is deterministic") {
    Rng rng(3);
    const LtlPredictor p =
        learning_to_learn(s.tasks, s.reps, learner, config, s.tasks[4], rng);
    Eigen::VectorXd probe(2);
    probe << -1.0, 1.0;
    const double first = p.predict(probe);
    for (int i = 0; i < 5; ++i) CHECK(p.predict(probe) == first);
    CHECK(p.drawn_task >= 1);
    CHECK(p.drawn_task <= 5);
    CHECK(p.drawn_round >= 1);
    CHECK(p.drawn_round <= 4);
  }
  SUBCASE("learners without tracing are rejected") {
    WithinTaskLearner crippled = learner;
    crippled.run_traced = nullptr;
    Rng rng(4);
    CHECK_THROWS_AS(
        learning_to_learn(s.tasks, s.reps, crippled, config, s.tasks[4], rng),
        std::invalid_argument);
  }
}

TEST_CASE("ewa_tl_run") {
  const TlScenario s = realizable_vs_blind(20, 12);
  VcDeltaParams vc{2, 12, 0.05};

  SUBCASE("eta zero keeps the prior") {
    MetaConfig config{0.0, 4.0, Eigen::VectorXd(), 5};
    const EwaTlRunResult res = ewa_tl_run(s.tasks, s.reps, s.cls, config, vc);
    for (const auto& p : res.posteriors) {
      CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-13));
      CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-13));
    }
  }
  SUBCASE("equal widths cancel: posterior depends on risks alone") {
    MetaConfig config{0.9, 4.0, Eigen::VectorXd(), 5};
    const EwaTlRunResult res = ewa_tl_run(s.tasks, s.reps, s.cls, config, vc);
    Eigen::VectorXd cum = Eigen::VectorXd::Zero(2);
    for (int t = 0; t < 20; ++t) {
      cum += res.empirical_risks.row(t).transpose();
      const Eigen::VectorXd expect = oracles::softmax_posterior(
          cum, config.eta, Eigen::VectorXd::Constant(2, 0.5));
      CHECK(res.posteriors[t][0] == doctest::Approx(expect[0]).epsilon(1e-10));
    }
  }
  SUBCASE("score bound violations are contract errors") {
    MetaConfig config{0.5, 0.1, Eigen::VectorXd(), 5};  // C far below r + delta
    CHECK_THROWS_AS(ewa_tl_run(s.tasks, s.reps, s.cls, config, vc),
                    std::invalid_argument);
  }
}

TEST_CASE("ewa_tl posterior concentrates on the realizable representation") {
  const int T = 150, m = 100;
  const TlScenario s = realizable_vs_blind(T, m);
  VcDeltaParams vc{2, m, 0.05};
  VcDeltaParams per_task = vc;
  per_task.confidence = vc.confidence / T;
  const double C = 1.0 + vc_delta(per_task);
  MetaConfig config{eta_finite(C, 2, T), C, Eigen::VectorXd(), 5};
  const EwaTlRunResult res = ewa_tl_run(s.tasks, s.reps, s.cls, config, vc);
  // blind representation pays exactly 0.5 per task, the informative one 0
  CHECK(res.posteriors.back()[0] > 0.99);

  // closed-form cross-check via the one-shot softmax of cumulative scores
  Eigen::VectorXd cum = Eigen::VectorXd::Zero(2);
  for (int t = 0; t < T; ++t) cum += res.scores.row(t).transpose();
  const Eigen::VectorXd expect =
      oracles::softmax_posterior(cum, config.eta, Eigen::VectorXd::Constant(2, 0.5));
  CHECK(res.posteriors.back()[0] == doctest::Approx(expect[0]).epsilon(1e-10));
}

TEST_CASE("expected EWA-TL population risk stays under the batch bound") {
  // small-scale copy of the acceptance check
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto env = random_sign_environment(seed, 2, 5, 2);
    const int T = 6, m = 3;

    Environment sampler;
    sampler.seed = seed + 1;
    sampler.sample_task_distribution = [env](Rng& rng) {
      return rng.categorical(env.meta_probs);
    };
    sampler.sample_observation = [env](int handle, Rng& rng) {
      return env.support[rng.categorical(env.dist_probs[handle])];
    };
    // remember which distribution generated each task to evaluate population
    // risks; re-draw the handles with the same stream
    Rng handle_stream(sampler.seed);
    std::vector<TaskDataset> tasks;
    std::vector<int> handles;
    for (int t = 0; t < T; ++t) {
      const int h = sampler.sample_task_distribution(handle_stream);
      handles.push_back(h);
      std::vector<Observation> obs;
      for (int i = 0; i < m; ++i)
        obs.push_back(sampler.sample_observation(h, handle_stream));
      tasks.emplace_back(t + 1, env.dimension, std::move(obs));
    }

    FiniteRepresentationSet reps;
    Rng rep_rng(seed + 50);
    for (int k = 0; k < 2; ++k) {
      Eigen::MatrixXd M(env.dimension, env.dimension);
      for (int i = 0; i < M.size(); ++i) M.data()[i] = rep_rng.uniform(-1, 1);
      reps.representations.push_back(
          [M](const Eigen::VectorXd& x) -> Eigen::VectorXd { return M * x; });
    }
    FiniteHypothesisClass cls;
    for (int j = 0; j < 3; ++j) {
      const double a = rep_rng.uniform(-1, 1), b = rep_rng.uniform(-1, 1);
      cls.hypotheses.push_back(
          [a, b](const Eigen::VectorXd& z) { return a * z[0] + b * z[1]; });
    }

    VcDeltaParams vc{2, m, 0.05};
    VcDeltaParams per_task = vc;
    per_task.confidence = vc.confidence / T;
    const double C = 1.0 + vc_delta(per_task);
    MetaConfig config{eta_finite(C, 2, T), C, Eigen::VectorXd(), seed};
    const EwaTlRunResult res = ewa_tl_run(tasks, reps, cls, config, vc);

    const LossFunction zo = LossFunction::zero_one();
    // expected population risk of the realized strategy, exact over the draw
    // randomness via the stored posteriors
    double lhs = 0.0;
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(2, 0.5);
    Eigen::MatrixXd delta_per_g_t(2, T);
    Eigen::VectorXd comparator(2);
    comparator.setZero();
    for (int t = 0; t < T; ++t) {
      for (int k = 0; k < 2; ++k) {
        const ErmResult erm = erm_zero_one(tasks[t], reps.representations[k], cls);
        auto chosen = cls.hypotheses[erm.index];
        lhs += pi[k] *
               oracles::population_risk(env, handles[t], reps.representations[k],
                                        [&](const Eigen::VectorXd& z) {
                                          return chosen(z) >= 0.0 ? 1.0 : -1.0;
                                        },
                                        zo) /
               T;
        delta_per_g_t(k, t) = vc_delta(per_task);
      }
      pi = res.posteriors[t];
    }
    for (int k = 0; k < 2; ++k) {
      double acc = 0.0;
      for (int t = 0; t < T; ++t) {
        double best = 1.0;
        for (const auto& h : cls.hypotheses) {
          auto signed_h = [&](const Eigen::VectorXd& z) {
            return h(z) >= 0.0 ? 1.0 : -1.0;
          };
          best = std::min(best, oracles::population_risk(env, handles[t],
                                                         reps.representations[k],
                                                         signed_h, zo));
        }
        acc += best;
      }
      comparator[k] = acc / T;
    }

    const BoundReport rhs = theorem6_rhs(comparator, delta_per_g_t, C, T, config.eta,
                                         Eigen::VectorXd::Constant(2, 0.5));
    CHECK(lhs <= rhs.total + 1e-12);
  }
}

TEST_CASE("transfer risk stays under the aggregated bound on discrete environments") {
  // small-scale copy of the acceptance check: exact enumeration of the
  // environment against the Dirac evaluation of the bound
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(seed * 13 + 5);
    oracles::DiscreteEnvironment env;
    env.dimension = 2;
    const int support_size = 4;
    const double By = 0.1;
    for (int s = 0; s < support_size; ++s) {
      Observation o;
      o.x = Eigen::VectorXd(2);
      o.x << rng.uniform(-1, 1), rng.uniform(-1, 1);
      o.y = rng.uniform(-By, By);
      env.support.push_back(std::move(o));
    }
    const int n_dists = 2;
    env.meta_probs = Eigen::VectorXd::Constant(n_dists, 1.0 / n_dists);
    for (int j = 0; j < n_dists; ++j) {
      Eigen::VectorXd p = Eigen::VectorXd::Zero(support_size);
      p[2 * j] = rng.uniform(0.3, 0.7);
      p[2 * j + 1] = 1.0 - p[2 * j];
      env.dist_probs.push_back(p);
    }

    FiniteRepresentationSet reps;
    for (int k = 0; k < 2; ++k) {
      const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
      reps.representations.push_back([a, b](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return Eigen::VectorXd::Constant(1, a * x[0] + b * x[1]);
      });
    }
    FiniteHypothesisClass cls;
    for (int j = 0; j < 3; ++j) {
      const double a = rng.uniform(-By, By), b = rng.uniform(-By / 2, By / 2);
      cls.hypotheses.push_back([a, b](const Eigen::VectorXd& z) { return a * z[0] + b; });
    }

    const LossFunction loss = LossFunction::squared_clipped(By);
    const WithinTaskLearner learner = make_ewa_learner(cls, loss);
    const int T = 3, m = 2;
    const double C = loss.value_bound;
    const double eta = eta_finite(C, reps.size(), T);

    const Eigen::VectorXd avg_pi =
        oracles::expected_average_posterior(env, reps, learner, T, m, eta);
    double lhs = 0.0;
    for (int k = 0; k < reps.size(); ++k)
      lhs += avg_pi[k] *
             oracles::expected_new_task_risk(env, reps.representations[k], learner, m);

    Eigen::MatrixXd comparator(T, reps.size());
    for (int k = 0; k < reps.size(); ++k)
      comparator.col(k).setConstant(
          oracles::population_comparator(env, reps.representations[k], cls, loss));
    const Eigen::VectorXd beta = Eigen::VectorXd::Constant(
        reps.size(), beta_ewa(*loss.expconcavity, cls.size(), m));
    const BoundReport rhs =
        theorem1_rhs_dirac(comparator, beta, C, T, eta,
                           Eigen::VectorXd::Constant(reps.size(), 0.5));
    CHECK(lhs <= rhs.total + 1e-12);
  }
}

}  // TEST_SUITE
