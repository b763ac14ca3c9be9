#include "ewall/bounds.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ewall {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double kl_term(double prior_k, double eta, int T) {
  require(prior_k > 0.0, "bounds: Dirac mass on a zero-prior representation");
  return -std::log(prior_k) / (eta * T);
}

BoundReport assemble(std::vector<std::pair<std::string, double>> components,
                     std::vector<std::pair<std::string, double>> info) {
  BoundReport r;
  r.components = std::move(components);
  r.info = std::move(info);
  for (const auto& [name, value] : r.components) r.total += value;
  return r;
}

}  // namespace

std::string format_bound_report(const BoundReport& report) {
  std::size_t width = 5;  // "total"
  for (const auto& [name, v] : report.components) width = std::max(width, name.size());
  for (const auto& [name, v] : report.info) width = std::max(width, name.size());
  std::ostringstream out;
  out << std::setprecision(12);
  for (const auto& [name, v] : report.components)
    out << std::left << std::setw(static_cast<int>(width) + 2) << name << v << '\n';
  if (!report.components.empty())
    out << std::left << std::setw(static_cast<int>(width) + 2) << "total" << report.total
        << '\n';
  for (const auto& [name, v] : report.info)
    out << std::left << std::setw(static_cast<int>(width) + 2) << name << v << '\n';
  return out.str();
}

std::string bound_report_csv(const BoundReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "name,value\n";
  for (const auto& [name, v] : report.components) out << name << ',' << v << '\n';
  if (!report.components.empty()) out << "total," << report.total << '\n';
  for (const auto& [name, v] : report.info) out << name << ',' << v << '\n';
  return out.str();
}

double beta_oga(double B, double L, int m) {
  require(B > 0.0 && L > 0.0, "beta_oga: B and L must be positive");
  require(m >= 1, "beta_oga: m must be >= 1");
  return B * L * std::sqrt(2.0 / m);
}

double beta_ewa(double zeta0, int class_size, int m) {
  require(zeta0 > 0.0, "beta_ewa: zeta0 must be positive");
  require(class_size >= 1, "beta_ewa: class size must be >= 1");
  require(m >= 1, "beta_ewa: m must be >= 1");
  return zeta0 * std::log(static_cast<double>(class_size)) / m;
}

double beta_oga_lambda(double B, double L, int m, int K, double Lambda) {
  require(B > 0.0 && L > 0.0, "beta_oga_lambda: B and L must be positive");
  require(m >= 1 && K >= 1, "beta_oga_lambda: m and K must be >= 1");
  require(Lambda > 0.0, "beta_oga_lambda: Lambda must be positive");
  return 2.0 * B * L * std::sqrt(2.0 * K * Lambda / m);
}

double eta_finite(double C, int K, int T) {
  require(C > 0.0, "eta_finite: C must be positive");
  require(K >= 1 && T >= 1, "eta_finite: K and T must be >= 1");
  return (2.0 / C) * std::sqrt(2.0 * std::log(static_cast<double>(K)) / T);
}

double eta_dictionary(double C, int K, int d, int T) {
  require(C > 0.0, "eta_dictionary: C must be positive");
  require(K >= 1 && d >= 1 && T >= 1, "eta_dictionary: K, d, T must be >= 1");
  return (2.0 / C) * std::sqrt(static_cast<double>(K) * d / T);
}

double mc_hoeffding_term(double C, int T, double delta, int N) {
  require(C > 0.0, "mc_hoeffding_term: C must be positive");
  require(T >= 1 && N >= 1, "mc_hoeffding_term: T and N must be >= 1");
  require(delta > 0.0 && delta < 1.0, "mc_hoeffding_term: delta must be in (0,1)");
  return C * std::sqrt(std::log(T / delta) / (2.0 * N));
}

double lambda_max_gram(const TaskDataset& task) {
  const int d = task.dimension;
  const int m = task.size();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  for (const auto& obs : task.observations) gram += obs.x * obs.x.transpose();
  gram /= m;

  if (gram.isZero(0.0)) return 0.0;

  // power iteration on a symmetric PSD matrix; deterministic starts, retried
  // from canonical basis vectors if a start lies orthogonal to the top
  // eigenspace (detected via the residual)
  const double tol = 1e-13;
  const int max_iters = 1000000;
  double best = 0.0;
  for (int attempt = 0; attempt <= d; ++attempt) {
    Eigen::VectorXd v = attempt == 0 ? Eigen::VectorXd::Ones(d).normalized()
                                     : Eigen::VectorXd::Unit(d, attempt - 1);
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
      Eigen::VectorXd w = gram * v;
      const double n = w.norm();
      if (n == 0.0) break;  // start in the null space
      v = w / n;
      const double next = v.dot(gram * v);
      const bool converged = std::abs(next - lambda) <= tol * std::max(next, 1e-300);
      lambda = next;
      if (converged) break;
    }
    best = std::max(best, lambda);
    if (lambda > 0.0 && (gram * v - lambda * v).norm() <= 1e-9 * lambda) break;
  }
  return best;
}

BoundReport theorem2_rhs(const Eigen::MatrixXd& comparator_per_g,
                         const Eigen::VectorXd& beta_per_g, double C, int K, int T,
                         double eta) {
  require(comparator_per_g.rows() == T && comparator_per_g.cols() == K,
          "theorem2_rhs: comparator matrix must be T x K");
  require(beta_per_g.size() == K, "theorem2_rhs: beta vector length must equal K");
  require(C > 0.0 && K >= 1 && T >= 1, "theorem2_rhs: bad scalar inputs");

  int best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    const double v = comparator_per_g.col(k).mean() + beta_per_g[k];
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  const double rate = C * std::sqrt(std::log(static_cast<double>(K)) / (2.0 * T));
  return assemble({{"comparator", comparator_per_g.col(best_k).mean()},
                   {"beta", beta_per_g[best_k]},
                   {"meta_rate", rate}},
                  {{"eta", eta}, {"argmin_k", static_cast<double>(best_k)}});
}

BoundReport theorem1_rhs_dirac(const Eigen::MatrixXd& comparator_per_g,
                               const Eigen::VectorXd& beta_per_g, double C, int T,
                               double eta, const Eigen::VectorXd& prior) {
  const int K = static_cast<int>(prior.size());
  require(comparator_per_g.rows() == T && comparator_per_g.cols() == K,
          "theorem1_rhs_dirac: comparator matrix must be T x K");
  require(beta_per_g.size() == K, "theorem1_rhs_dirac: beta vector length must equal K");
  require(C > 0.0 && T >= 1 && eta > 0.0, "theorem1_rhs_dirac: bad scalar inputs");

  int best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    if (prior[k] <= 0.0) continue;  // infinite KL, never the minimizer
    const double v =
        comparator_per_g.col(k).mean() + beta_per_g[k] + kl_term(prior[k], eta, T);
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  require(std::isfinite(best), "theorem1_rhs_dirac: prior has no support");
  return assemble({{"comparator", comparator_per_g.col(best_k).mean()},
                   {"beta", beta_per_g[best_k]},
                   {"eta_C2_8", eta * C * C / 8.0},
                   {"kl_term", kl_term(prior[best_k], eta, T)}},
                  {{"eta", eta}, {"argmin_k", static_cast<double>(best_k)}});
}

double theorem1_objective(const Eigen::VectorXd& rho, const Eigen::MatrixXd& comparator_per_g,
                          const Eigen::VectorXd& beta_per_g, double C, int T, double eta,
                          const Eigen::VectorXd& prior) {
  const int K = static_cast<int>(prior.size());
  require(rho.size() == K, "theorem1_objective: rho length must equal K");
  require((rho.array() >= 0.0).all() && std::abs(rho.sum() - 1.0) <= 1e-12,
          "theorem1_objective: rho must be a probability vector");
  double expectation = 0.0;
  double kl = 0.0;
  for (int k = 0; k < K; ++k) {
    if (rho[k] == 0.0) continue;
    require(prior[k] > 0.0, "theorem1_objective: rho charges a zero-prior representation");
    expectation += rho[k] * (comparator_per_g.col(k).mean() + beta_per_g[k]);
    kl += rho[k] * std::log(rho[k] / prior[k]);
  }
  return expectation + eta * C * C / 8.0 + kl / (eta * T);
}

BoundReport theorem3_rhs(double comparator, double C, int K, int d, int T, double beta_m,
                         double B, double Phi, double lambda_bar) {
  require(C > 0.0 && K >= 1 && d >= 1 && T >= 1, "theorem3_rhs: bad scalar inputs");
  require(B > 0.0 && Phi > 0.0, "theorem3_rhs: B and Phi must be positive");
  require(lambda_bar >= 0.0, "theorem3_rhs: lambda_bar must be nonnegative");
  const double rate =
      (C / 4.0) * std::sqrt(static_cast<double>(K) * d / T) * (std::log(T) + 7.0);
  const double lambda_term = B * Phi * std::sqrt(lambda_bar) / std::sqrt(T);
  return assemble({{"comparator", comparator},
                   {"meta_rate", rate},
                   {"beta", beta_m},
                   {"lambda_term", lambda_term}},
                  {{"lambda_bar", lambda_bar}});
}

BoundReport theorem6_rhs(const Eigen::VectorXd& comparator_per_g,
                         const Eigen::MatrixXd& delta_per_g_t, double C, int T, double eta,
                         const Eigen::VectorXd& prior) {
  const int K = static_cast<int>(prior.size());
  require(comparator_per_g.size() == K, "theorem6_rhs: comparator length must equal K");
  require(delta_per_g_t.rows() == K && delta_per_g_t.cols() == T,
          "theorem6_rhs: delta matrix must be K x T");
  require(C > 0.0 && T >= 1 && eta > 0.0, "theorem6_rhs: bad scalar inputs");

  int best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    if (prior[k] <= 0.0) continue;
    const double v = comparator_per_g[k] + 4.0 * delta_per_g_t.row(k).mean() +
                     kl_term(prior[k], eta, T);
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  require(std::isfinite(best), "theorem6_rhs: prior has no support");
  return assemble({{"comparator", comparator_per_g[best_k]},
                   {"delta_term", 4.0 * delta_per_g_t.row(best_k).mean()},
                   {"eta_C2_8", eta * C * C / 8.0},
                   {"kl_term", kl_term(prior[best_k], eta, T)}},
                  {{"eta", eta}, {"argmin_k", static_cast<double>(best_k)}});
}

}  // namespace ewall
