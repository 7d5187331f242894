#pragma once

#include <string>
#include <vector>

#include "hpn/model.hpp"

namespace hpn {

// Lower-triangular accuracy grid: rows[i-1][j-1] = test accuracy on task j
// after training through task i (1-based tasks). A joint run stores a single
// final row instead.
struct AccuracyMatrix {
  std::vector<std::vector<double>> rows;
  int tasks() const { return static_cast<int>(rows.size()); }
};

struct AmFm {
  double am = 0.0;
  double fm = 0.0;
  bool fm_defined = false;  // single-task runs report fm = 0, undefined
};

// AM = mean of the final row; FM = mean over j < p of M[p][j] - M[j][j]
// (negative = forgetting, positive = backward transfer).
AmFm compute_am_fm(const AccuracyMatrix& m);

// ARS(i) = mean over m < i of M[i][m] / M[m][m], for i = 2..p. A zero
// just-learned accuracy is skipped (and flagged by the caller's report).
std::vector<double> compute_ars(const AccuracyMatrix& m);

struct ParamBreakdown {
  long afes = 0;
  long fc_a2n = 0;
  long fc_n2c = 0;
  long classifier = 0;
  long protos_a = 0;
  long protos_n = 0;
  long protos_c = 0;
  long total() const { return afes + fc_a2n + fc_n2c + classifier + protos_a + protos_n + protos_c; }
};

// Exact float counts: every AFE and FC entry, biases included, plus dim
// floats per stored prototype.
ParamBreakdown count_parameters(const HpnModel& m);

struct EpochLogEntry {
  int task = 0;  // 1-based
  EpochStats stats;
  long params_total = 0;
};

struct TaskStats {
  int task = 0;
  double wall_seconds = 0.0;
  long params_total = 0;
  int n_proto_a = 0, n_proto_n = 0, n_proto_c = 0;
};

struct RunRecord {
  bool joint = false;
  AccuracyMatrix matrix;
  AmFm amfm;
  std::vector<double> ars;  // entry per task index i = 2..p
  std::vector<EpochLogEntry> runlog;
  std::vector<TaskStats> per_task;
};

struct HarnessOptions {
  // freeze all three stores (no creation, no updates) once this many tasks
  // have been trained; -1 never. The --freeze-prototypes control run uses 1.
  int freeze_prototypes_after_task = -1;
};

// The evaluation stream used to fill matrix cell (trained_through, task);
// exposed so `eval` on a saved checkpoint reproduces the final row exactly.
Rng harness_eval_rng(std::uint64_t seed, int trained_through, int task);

// Trains tasks in order; after task i evaluates test accuracy on tasks 1..i
// with creation disabled, filling row i. Deterministic given cfg.seed.
RunRecord run_sequence(HpnModel& model, const std::vector<TaskView>& tasks, const TrainConfig& cfg,
                       const HarnessOptions& opt = {});

// Non-continual reference: each epoch interleaves one full-batch pass per
// task over the shared c-logit head; evaluates every task at the end.
// With a single task this reduces exactly to run_sequence.
RunRecord run_joint(HpnModel& model, const std::vector<TaskView>& tasks, const TrainConfig& cfg);

void write_acc_matrix(const RunRecord& rec, const std::string& path);
AccuracyMatrix read_acc_matrix(const std::string& path, bool* joint = nullptr);
void write_metrics(const RunRecord& rec, const std::string& path);
void write_runlog(const RunRecord& rec, const std::string& path);

}  // namespace hpn
