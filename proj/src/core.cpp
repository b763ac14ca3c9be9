#include "ewall/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ewall {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double sign_plus(double v) { return v >= 0.0 ? 1.0 : -1.0; }  // sign(0) = +1

}  // namespace

TaskDataset::TaskDataset(int task_index_, int dimension_, std::vector<Observation> obs)
    : task_index(task_index_), dimension(dimension_), observations(std::move(obs)) {
  require(task_index >= 1, "TaskDataset: task_index must be >= 1");
  require(dimension >= 1, "TaskDataset: dimension must be >= 1");
  require(!observations.empty(), "TaskDataset: observations must be nonempty");
  for (const auto& o : observations) {
    require(o.x.size() == dimension, "TaskDataset: observation dimension mismatch");
    require(std::isfinite(o.y), "TaskDataset: non-finite label");
  }
}

LossFunction LossFunction::squared_clipped(double label_bound) {
  require(label_bound > 0.0, "squared_clipped: label bound must be positive");
  LossFunction l;
  l.kind = LossKind::squared;
  l.clip_bound = label_bound;
  l.lipschitz_const = 4.0 * label_bound;
  l.value_bound = 4.0 * label_bound * label_bound;
  l.expconcavity = 1.0 / (8.0 * label_bound);
  return l;
}

LossFunction LossFunction::squared_unclipped(double value_bound, double lipschitz_const) {
  require(value_bound > 0.0 && lipschitz_const > 0.0,
          "squared_unclipped: bounds must be positive");
  LossFunction l;
  l.kind = LossKind::squared;
  l.lipschitz_const = lipschitz_const;
  l.value_bound = value_bound;
  return l;
}

LossFunction LossFunction::absolute_clipped(double label_bound) {
  require(label_bound > 0.0, "absolute_clipped: label bound must be positive");
  LossFunction l;
  l.kind = LossKind::absolute;
  l.clip_bound = label_bound;
  l.lipschitz_const = 1.0;
  l.value_bound = 2.0 * label_bound;
  return l;
}

LossFunction LossFunction::hinge_clipped(double prediction_bound) {
  require(prediction_bound > 0.0, "hinge_clipped: prediction bound must be positive");
  LossFunction l;
  l.kind = LossKind::hinge;
  l.clip_bound = prediction_bound;
  l.lipschitz_const = 1.0;
  l.value_bound = 1.0 + prediction_bound;
  return l;
}

LossFunction LossFunction::zero_one() {
  LossFunction l;
  l.kind = LossKind::zero_one;
  l.lipschitz_const = 1.0;  // not meaningful for the 0-1 loss
  l.value_bound = 1.0;
  return l;
}

double LossFunction::clip(double prediction) const {
  if (!clip_bound) return prediction;
  return std::clamp(prediction, -*clip_bound, *clip_bound);
}

void LossFunction::validate() const {
  require(value_bound > 0.0, "LossFunction: value_bound must be positive");
  require(lipschitz_const > 0.0, "LossFunction: lipschitz_const must be positive");
  if (clip_bound) {
    require(*clip_bound > 0.0, "LossFunction: clip_bound must be positive");
    const double b = *clip_bound;
    switch (kind) {
      case LossKind::squared:
        require(value_bound >= 4.0 * b * b - 1e-12,
                "LossFunction: squared loss needs C >= 4B^2 for clip bound B");
        require(lipschitz_const >= 4.0 * b - 1e-12,
                "LossFunction: squared loss needs Phi >= 4B for clip bound B");
        break;
      case LossKind::absolute:
        require(value_bound >= 2.0 * b - 1e-12,
                "LossFunction: absolute loss needs C >= 2B");
        break;
      case LossKind::hinge:
        require(value_bound >= 1.0 + b - 1e-12,
                "LossFunction: hinge loss needs C >= 1 + B");
        break;
      case LossKind::zero_one:
        require(value_bound >= 1.0, "LossFunction: zero-one loss needs C >= 1");
        break;
    }
  }
  if (expconcavity) require(*expconcavity > 0.0, "LossFunction: zeta_0 must be positive");
}

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::squared: return "squared";
    case LossKind::absolute: return "absolute";
    case LossKind::hinge: return "hinge";
    case LossKind::zero_one: return "zero_one";
  }
  return "unknown";
}

LossKind loss_kind_from_name(const std::string& name) {
  if (name == "squared") return LossKind::squared;
  if (name == "absolute") return LossKind::absolute;
  if (name == "hinge") return LossKind::hinge;
  if (name == "zero_one") return LossKind::zero_one;
  throw std::invalid_argument("unknown loss kind: " + name);
}

double evaluate_loss(const LossFunction& loss, double prediction, double label) {
  require(std::isfinite(prediction), "evaluate_loss: non-finite prediction");
  require(std::isfinite(label), "evaluate_loss: non-finite label");
  const double p = loss.clip(prediction);
  switch (loss.kind) {
    case LossKind::squared: {
      const double d = p - label;
      return d * d;
    }
    case LossKind::absolute:
      return std::abs(p - label);
    case LossKind::hinge:
      return std::max(0.0, 1.0 - label * p);
    case LossKind::zero_one:
      return sign_plus(p) == label ? 0.0 : 1.0;
  }
  throw std::invalid_argument("evaluate_loss: invalid loss kind");
}

double loss_derivative(const LossFunction& loss, double prediction, double label) {
  require(std::isfinite(prediction), "loss_derivative: non-finite prediction");
  require(std::isfinite(label), "loss_derivative: non-finite label");
  // chain rule through the clip: zero derivative on the plateau
  if (loss.clip_bound && std::abs(prediction) > *loss.clip_bound) return 0.0;
  const double p = loss.clip(prediction);
  switch (loss.kind) {
    case LossKind::squared:
      return 2.0 * (p - label);
    case LossKind::absolute:
      if (p == label) return 0.0;
      return p > label ? 1.0 : -1.0;
    case LossKind::hinge:
      return (1.0 - label * p) > 0.0 ? -label : 0.0;
    case LossKind::zero_one:
      return 0.0;
  }
  throw std::invalid_argument("loss_derivative: invalid loss kind");
}

double average_loss(const std::vector<double>& losses) {
  require(!losses.empty(), "average_loss: empty loss vector");
  double acc = 0.0;
  for (double v : losses) {
    require(std::isfinite(v), "average_loss: non-finite loss value");
    acc += v;
  }
  return acc / static_cast<double>(losses.size());
}

double average_loss(const Eigen::VectorXd& losses) {
  require(losses.size() > 0, "average_loss: empty loss vector");
  require(losses.allFinite(), "average_loss: non-finite loss value");
  return losses.mean();
}

TaskRunRecord make_run_record(int task_index, Eigen::VectorXd predictions,
                              Eigen::VectorXd losses) {
  require(predictions.size() == losses.size(),
          "make_run_record: predictions/losses length mismatch");
  TaskRunRecord rec;
  rec.task_index = task_index;
  rec.average_loss = average_loss(losses);
  rec.predictions = std::move(predictions);
  rec.losses = std::move(losses);
  return rec;
}

std::vector<TaskDataset> read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty dataset file: " + path);
  int d = 0;
  {
    std::istringstream hs(header);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(hs, col, ',')) cols.push_back(col);
    if (cols.size() < 3 || cols[0] != "task" || cols[1] != "round" || cols.back() != "y")
      throw std::runtime_error("bad dataset header in " + path);
    d = static_cast<int>(cols.size()) - 3;
    if (d < 1) throw std::runtime_error("dataset has no feature columns: " + path);
  }

  std::map<int, std::vector<Observation>> by_task;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != d + 3)
      throw std::runtime_error("bad dataset row at " + path + ":" + std::to_string(line_no));
    Observation o;
    o.x = Eigen::VectorXd(d);
    for (int j = 0; j < d; ++j) o.x[j] = vals[2 + j];
    o.y = vals.back();
    by_task[static_cast<int>(vals[0])].push_back(std::move(o));
  }

  std::vector<TaskDataset> tasks;
  tasks.reserve(by_task.size());
  for (auto& [t, obs] : by_task) tasks.emplace_back(t, d, std::move(obs));
  return tasks;
}

void write_dataset_csv(const std::vector<TaskDataset>& tasks, const std::string& path) {
  if (tasks.empty()) throw std::invalid_argument("write_dataset_csv: no tasks");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  out.precision(17);
  const int d = tasks.front().dimension;
  out << "task,round";
  for (int j = 1; j <= d; ++j) out << ",x" << j;
  out << ",y\n";
  for (const auto& task : tasks) {
    for (int i = 0; i < task.size(); ++i) {
      out << task.task_index << ',' << (i + 1);
      for (int j = 0; j < d; ++j) out << ',' << task.observations[i].x[j];
      out << ',' << task.observations[i].y << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failure on dataset file: " + path);
}

}  // namespace ewall
