#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ewall/core.hpp"

namespace ewall {

// Itemized value of a closed-form bound. `components` sum exactly to `total`;
// `info` carries context values (rates, argmin index) that are not part of
// the sum.
struct BoundReport {
  double total = 0.0;
  std::vector<std::pair<std::string, double>> components;
  std::vector<std::pair<std::string, double>> info;
};

std::string format_bound_report(const BoundReport& report);  // aligned key/value text
std::string bound_report_csv(const BoundReport& report);     // "name,value" lines

// within-task regret rates
double beta_oga(double B, double L, int m);                  // B L sqrt(2/m)
double beta_ewa(double zeta0, int class_size, int m);        // zeta0 log|H| / m
double beta_oga_lambda(double B, double L, int m, int K,
                       double Lambda);                       // 2 B L sqrt(2 K Lambda / m)

// meta learning rates
double eta_finite(double C, int K, int T);          // (2/C) sqrt(2 log K / T)
double eta_dictionary(double C, int K, int d, int T);  // (2/C) sqrt(K d / T)

// Monte-Carlo prediction penalty: C sqrt(log(T/delta) / (2N))
double mc_hoeffding_term(double C, int T, double delta, int N);

// largest eigenvalue of the task's empirical second-moment matrix
// (1/m) sum_i x_i x_i^T, by power iteration to relative tolerance 1e-10
double lambda_max_gram(const TaskDataset& task);

// finite-set bound: min_k { mean_t comparator(t,k) + beta_k } + C sqrt(log K / (2T))
BoundReport theorem2_rhs(const Eigen::MatrixXd& comparator_per_g,
                         const Eigen::VectorXd& beta_per_g, double C, int K, int T,
                         double eta);

// general bound at Dirac masses:
// min_k { mean_t comparator(t,k) + beta_k + eta C^2/8 + (-log prior_k)/(eta T) }
BoundReport theorem1_rhs_dirac(const Eigen::MatrixXd& comparator_per_g,
                               const Eigen::VectorXd& beta_per_g, double C, int T,
                               double eta, const Eigen::VectorXd& prior);

// the same objective evaluated at a user-supplied discrete aggregation
// measure rho over the K representations (KL term against the prior)
double theorem1_objective(const Eigen::VectorXd& rho, const Eigen::MatrixXd& comparator_per_g,
                          const Eigen::VectorXd& beta_per_g, double C, int T, double eta,
                          const Eigen::VectorXd& prior);

// dictionary bound:
// comparator + (C/4) sqrt(Kd/T) (log T + 7) + beta_m + B Phi sqrt(lambda_bar) / sqrt(T)
BoundReport theorem3_rhs(double comparator, double C, int K, int d, int T, double beta_m,
                         double B, double Phi, double lambda_bar);

// batch-within-online bound at Dirac masses: delta_per_g_t is K x T
BoundReport theorem6_rhs(const Eigen::VectorXd& comparator_per_g,
                         const Eigen::MatrixXd& delta_per_g_t, double C, int T, double eta,
                         const Eigen::VectorXd& prior);

}  // namespace ewall
