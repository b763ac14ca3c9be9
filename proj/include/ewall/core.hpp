#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ewall {

struct Observation {
  Eigen::VectorXd x;
  double y = 0.0;
};

// One task's ordered observation sequence, revealed round by round.
struct TaskDataset {
  int task_index = 1;  // 1-based position in the task sequence
  int dimension = 0;
  std::vector<Observation> observations;

  TaskDataset() = default;
  TaskDataset(int task_index, int dimension, std::vector<Observation> obs);

  int size() const { return static_cast<int>(observations.size()); }
};

enum class LossKind { squared, absolute, hinge, zero_one };

// Loss contract shared by every learner. When clip_bound is set, predictions
// are clipped to [-clip_bound, clip_bound] before the loss is evaluated, so
// that every evaluated loss lies in [0, value_bound] and lipschitz_const is a
// valid Lipschitz constant over the clipped range. clip_bound doubles as the
// assumed label bound for the bounded-regression losses.
struct LossFunction {
  LossKind kind = LossKind::squared;
  std::optional<double> clip_bound;    // B_y
  double lipschitz_const = 1.0;        // Phi
  double value_bound = 1.0;            // C
  std::optional<double> expconcavity;  // zeta_0

  // squared loss on predictions and labels clipped/bounded by B:
  // C = 4B^2, Phi = 4B, zeta_0 = 1/(8B)
  static LossFunction squared_clipped(double label_bound);
  // squared loss without clipping; caller declares C and Phi for its own
  // prediction/label ranges
  static LossFunction squared_unclipped(double value_bound, double lipschitz_const);
  static LossFunction absolute_clipped(double label_bound);
  static LossFunction hinge_clipped(double prediction_bound);
  static LossFunction zero_one();

  double clip(double prediction) const;
  bool convex() const { return kind != LossKind::zero_one; }
  void validate() const;  // throws when C or Phi are inconsistent with the clip range
};

const char* loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(const std::string& name);

// loss of a prediction against a label; the prediction is clipped first
double evaluate_loss(const LossFunction& loss, double prediction, double label);

// d loss / d prediction at the clipped prediction. Zero on the clipped
// plateau and at the kinks of the absolute and hinge losses (midpoint of the
// subdifferential at 0, flat side at the hinge).
double loss_derivative(const LossFunction& loss, double prediction, double label);

double average_loss(const std::vector<double>& losses);
double average_loss(const Eigen::VectorXd& losses);

// Per-round outcome of one within-task run.
struct TaskRunRecord {
  int task_index = 0;
  Eigen::VectorXd predictions;
  Eigen::VectorXd losses;
  double average_loss = 0.0;  // mean of losses
};

// builds a record with average_loss computed from the losses
TaskRunRecord make_run_record(int task_index, Eigen::VectorXd predictions,
                              Eigen::VectorXd losses);

// Dataset file format: UTF-8 CSV, header "task,round,x1,...,xd,y", rows
// sorted by (task, round), round 1-based within each task.
std::vector<TaskDataset> read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::vector<TaskDataset>& tasks, const std::string& path);

}  // namespace ewall
