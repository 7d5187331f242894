#include "hpn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace hpn {

AmFm compute_am_fm(const AccuracyMatrix& m) {
  const int p = m.tasks();
  if (p == 0) throw std::invalid_argument("compute_am_fm: empty matrix");
  for (int i = 0; i < p; ++i)
    if (static_cast<int>(m.rows[static_cast<size_t>(i)].size()) != i + 1)
      throw std::invalid_argument("compute_am_fm: matrix is not lower-triangular/complete");

  AmFm out;
  const auto& last = m.rows[static_cast<size_t>(p - 1)];
  double s = 0.0;
  for (double a : last) s += a;
  out.am = s / static_cast<double>(p);

  if (p == 1) {
    out.fm = 0.0;
    out.fm_defined = false;
    return out;
  }
  double f = 0.0;
  for (int j = 0; j < p - 1; ++j)
    f += last[static_cast<size_t>(j)] - m.rows[static_cast<size_t>(j)][static_cast<size_t>(j)];
  out.fm = f / static_cast<double>(p - 1);
  out.fm_defined = true;
  return out;
}

std::vector<double> compute_ars(const AccuracyMatrix& m) {
  std::vector<double> out;
  for (int i = 2; i <= m.tasks(); ++i) {
    double s = 0.0;
    int n = 0;
    for (int j = 1; j < i; ++j) {
      const double just_learned = m.rows[static_cast<size_t>(j - 1)][static_cast<size_t>(j - 1)];
      if (just_learned == 0.0) continue;  // skipped, surfaced via count mismatch
      s += m.rows[static_cast<size_t>(i - 1)][static_cast<size_t>(j - 1)] / just_learned;
      ++n;
    }
    out.push_back(n > 0 ? s / static_cast<double>(n) : 0.0);
  }
  return out;
}

ParamBreakdown count_parameters(const HpnModel& m) {
  ParamBreakdown b;
  for (const Matrix& a : m.bank.node_afes) b.afes += static_cast<long>(a.data.size());
  for (const Matrix& r : m.bank.struct_afes) b.afes += static_cast<long>(r.data.size());
  b.fc_a2n = static_cast<long>(m.fc_a2n.W.data.size() + m.fc_a2n.b.data.size());
  b.fc_n2c = static_cast<long>(m.fc_n2c.W.data.size() + m.fc_n2c.b.data.size());
  b.classifier = static_cast<long>(m.classifier.W.data.size() + m.classifier.b.data.size());
  b.protos_a = static_cast<long>(m.a_store.size()) * m.a_store.dim();
  b.protos_n = static_cast<long>(m.n_store.size()) * m.n_store.dim();
  b.protos_c = static_cast<long>(m.c_store.size()) * m.c_store.dim();
  return b;
}

Rng harness_eval_rng(std::uint64_t seed, int trained_through, int task) {
  return Rng(seed).fork(0xE000 + 1000ull * static_cast<std::uint64_t>(trained_through) +
                        static_cast<std::uint64_t>(task));
}

namespace {

constexpr std::uint64_t kTrainStream = 0x7000;

Rng eval_rng(const TrainConfig& cfg, int trained_through, int task) {
  return harness_eval_rng(cfg.seed, trained_through, task);
}

void append_runlog(RunRecord& rec, const HpnModel& m, int task,
                   const std::vector<EpochStats>& stats) {
  const ParamBreakdown fixed = count_parameters(m);
  const long fixed_part = fixed.afes + fixed.fc_a2n + fixed.fc_n2c + fixed.classifier;
  for (const EpochStats& st : stats) {
    EpochLogEntry e;
    e.task = task;
    e.stats = st;
    e.params_total = fixed_part + static_cast<long>(st.n_proto_a) * m.a_store.dim() +
                     static_cast<long>(st.n_proto_n) * m.n_store.dim() +
                     static_cast<long>(st.n_proto_c) * m.c_store.dim();
    rec.runlog.push_back(e);
  }
}

void record_task(RunRecord& rec, const HpnModel& m, int task, double wall_seconds) {
  TaskStats ts;
  ts.task = task;
  ts.wall_seconds = wall_seconds;
  ts.params_total = count_parameters(m).total();
  ts.n_proto_a = m.a_store.size();
  ts.n_proto_n = m.n_store.size();
  ts.n_proto_c = m.c_store.size();
  rec.per_task.push_back(ts);
}

}  // namespace

RunRecord run_sequence(HpnModel& model, const std::vector<TaskView>& tasks, const TrainConfig& cfg,
                       const HarnessOptions& opt) {
  if (tasks.empty()) throw std::invalid_argument("run_sequence: need at least one task");
  RunRecord rec;
  const Rng base(cfg.seed);

  for (int i = 1; i <= static_cast<int>(tasks.size()); ++i) {
    const TaskView& view = tasks[static_cast<size_t>(i - 1)];
    Rng train = base.fork(kTrainStream + static_cast<std::uint64_t>(i));
    const auto t0 = std::chrono::steady_clock::now();
    const auto stats = train_task(model, view, cfg, train, i);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    append_runlog(rec, model, i, stats);
    record_task(rec, model, i, wall);

    std::vector<double> row;
    for (int j = 1; j <= i; ++j) {
      Rng er = eval_rng(cfg, i, j);
      row.push_back(evaluate_accuracy(model, tasks[static_cast<size_t>(j - 1)], Split::Test, er));
    }
    rec.matrix.rows.push_back(std::move(row));

    if (opt.freeze_prototypes_after_task == i) {
      model.a_store.set_frozen(true);
      model.n_store.set_frozen(true);
      model.c_store.set_frozen(true);
    }
  }

  rec.amfm = compute_am_fm(rec.matrix);
  rec.ars = compute_ars(rec.matrix);
  return rec;
}

RunRecord run_joint(HpnModel& model, const std::vector<TaskView>& tasks, const TrainConfig& cfg) {
  if (tasks.empty()) throw std::invalid_argument("run_joint: need at least one task");
  cfg.validate();
  RunRecord rec;
  rec.joint = true;
  const Rng base(cfg.seed);
  const int p = static_cast<int>(tasks.size());

  // one rng stream per task so a single-task joint run replays run_sequence
  std::vector<Rng> streams;
  for (int i = 1; i <= p; ++i) streams.push_back(base.fork(kTrainStream + static_cast<std::uint64_t>(i)));

  const auto t0 = std::chrono::steady_clock::now();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const bool warmup = epoch < cfg.warmup_epochs;
    for (int ti = 0; ti < p; ++ti) {
      const TaskView& view = tasks[static_cast<size_t>(ti)];
      const auto train_nodes = view.nodes_with_split(Split::Train);
      std::vector<ForwardTrace> traces;
      traces.reserve(train_nodes.size());
      for (int v : train_nodes)
        traces.push_back(forward(model, view, v, streams[static_cast<size_t>(ti)],
                                 ForwardMode::Train, warmup, ti + 1));
      Gradients g(model);
      const unsigned comp = warmup ? (kLossCls | kLossDiv) : kLossAll;
      const LossBreakdown lb = loss_and_grads(model, view, traces, &g, comp);
      if (!std::isfinite(lb.total))
        throw std::runtime_error("run_joint: non-finite loss at epoch " + std::to_string(epoch));
      sgd_update(model, g, cfg, epoch);
      EpochStats st;
      st.epoch = epoch;
      st.loss_cls = lb.cls;
      st.loss_div = lb.div;
      st.loss_dis = lb.dis;
      st.n_proto_a = model.a_store.size();
      st.n_proto_n = model.n_store.size();
      st.n_proto_c = model.c_store.size();
      EpochLogEntry le;
      le.task = ti + 1;
      le.stats = st;
      le.params_total = count_parameters(model).total();
      rec.runlog.push_back(le);
    }
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  record_task(rec, model, p, wall);

  std::vector<double> row;
  for (int j = 1; j <= p; ++j) {
    Rng er = eval_rng(cfg, p, j);
    row.push_back(evaluate_accuracy(model, tasks[static_cast<size_t>(j - 1)], Split::Test, er));
  }
  rec.matrix.rows.push_back(std::move(row));

  double s = 0.0;
  for (double a : rec.matrix.rows[0]) s += a;
  rec.amfm.am = s / static_cast<double>(p);
  rec.amfm.fm = 0.0;
  rec.amfm.fm_defined = false;
  return rec;
}

void write_acc_matrix(const RunRecord& rec, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "trained_through,task,accuracy\n";
  char buf[40];
  const int p = rec.matrix.tasks();
  for (int i = 0; i < p; ++i) {
    const int trained = rec.joint ? static_cast<int>(rec.matrix.rows[static_cast<size_t>(i)].size())
                                  : i + 1;
    for (size_t j = 0; j < rec.matrix.rows[static_cast<size_t>(i)].size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", rec.matrix.rows[static_cast<size_t>(i)][j]);
      f << trained << ',' << (j + 1) << ',' << buf << "\n";
    }
  }
}

AccuracyMatrix read_acc_matrix(const std::string& path, bool* joint) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("trained_through,task,accuracy", 0) != 0)
    throw std::runtime_error(path + ": expected header trained_through,task,accuracy");
  std::map<std::pair<int, int>, double> cells;
  int max_trained = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    int i = 0, j = 0;
    double a = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &i, &j, &a) != 3)
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    cells[{i, j}] = a;
    max_trained = std::max(max_trained, i);
  }
  if (max_trained == 0) throw std::runtime_error(path + ": no data rows");

  AccuracyMatrix m;
  bool complete = true;
  for (int i = 1; i <= max_trained; ++i)
    for (int j = 1; j <= i; ++j)
      if (!cells.count({i, j})) complete = false;

  if (complete) {
    if (joint) *joint = false;
    for (int i = 1; i <= max_trained; ++i) {
      std::vector<double> row;
      for (int j = 1; j <= i; ++j) row.push_back(cells[{i, j}]);
      m.rows.push_back(std::move(row));
    }
    return m;
  }
  // joint-style: a single final row
  std::vector<double> row;
  for (int j = 1; j <= max_trained; ++j) {
    if (!cells.count({max_trained, j}))
      throw std::runtime_error(path + ": incomplete accuracy matrix");
    row.push_back(cells[{max_trained, j}]);
  }
  if (joint) *joint = true;
  m.rows.push_back(std::move(row));
  return m;
}

void write_metrics(const RunRecord& rec, const std::string& path) {
  nlohmann::json j;
  j["am"] = rec.amfm.am;
  j["fm"] = rec.amfm.fm;
  j["fm_defined"] = rec.amfm.fm_defined;
  j["ars"] = rec.ars;
  j["joint"] = rec.joint;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << "\n";
}

void write_runlog(const RunRecord& rec, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  for (const EpochLogEntry& e : rec.runlog) {
    nlohmann::json j;
    j["task"] = e.task;
    j["epoch"] = e.stats.epoch;
    j["loss_cls"] = e.stats.loss_cls;
    j["loss_div"] = e.stats.loss_div;
    j["loss_dis"] = e.stats.loss_dis;
    j["n_proto_a"] = e.stats.n_proto_a;
    j["n_proto_n"] = e.stats.n_proto_n;
    j["n_proto_c"] = e.stats.n_proto_c;
    j["params_total"] = e.params_total;
    f << j.dump() << "\n";
  }
}

}  // namespace hpn
