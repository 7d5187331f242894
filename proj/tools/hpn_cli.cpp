#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "hpn/checkpoint.hpp"
#include "hpn/graphstore.hpp"
#include "hpn/harness.hpp"
#include "hpn/model.hpp"
#include "hpn/runconfig.hpp"
#include "hpn/theory.hpp"

namespace fs = std::filesystem;
using namespace hpn;

namespace {

constexpr std::uint64_t kInitStream = 0xC0DE;

struct GenArgs {
  int classes = 6;
  int per_class = 200;
  int dim = 32;
  double intra_p = 0.05;
  double inter_p = 0.01;
  double sep = 4.0;
  int classes_per_task = 2;
  std::uint64_t seed = 42;
  std::string out;
};

struct IoArgs {
  std::string data;
  std::string out;
  std::string checkpoint;
  std::string matrix;
  std::string against;
  int d_v = -1;
  int classes_per_task = 2;
};

void add_model_flags(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--d-a", rc.d_a, "A-prototype dimension")->capture_default_str();
  cmd->add_option("--d-n", rc.d_n, "N-prototype dimension")->capture_default_str();
  cmd->add_option("--d-c", rc.d_c, "C-prototype dimension")->capture_default_str();
  cmd->add_option("--l-a", rc.l_a, "number of node AFEs")->capture_default_str();
  cmd->add_option("--l-r", rc.l_r, "number of struct AFEs")->capture_default_str();
  cmd->add_option("--l-a-sel", rc.l_a_sel, "node AFEs selected per node")->capture_default_str();
  cmd->add_option("--l-r-sel", rc.l_r_sel, "struct AFEs selected per node")->capture_default_str();
  cmd->add_option("--t-a", rc.t_a, "A-level cosine threshold")->capture_default_str();
  cmd->add_option("--t-n", rc.t_n, "N-level cosine threshold")->capture_default_str();
  cmd->add_option("--t-c", rc.t_c, "C-level cosine threshold")->capture_default_str();
  cmd->add_option("--alpha", rc.alpha, "divergence loss weight")->capture_default_str();
  cmd->add_option("--beta", rc.beta, "distance loss weight")->capture_default_str();
  cmd->add_option("--hops", rc.hops, "neighbor sampling hops")->capture_default_str();
  cmd->add_option("--hop-counts", rc.per_hop_counts, "draws per hop")->capture_default_str();
}

void add_train_flags(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--epochs", rc.epochs, "epochs per task")->capture_default_str();
  cmd->add_option("--warmup-epochs", rc.warmup_epochs, "epochs before prototypes are established")
      ->capture_default_str();
  cmd->add_option("--batch-size", rc.batch_size, "minibatch size (0 = full batch)")
      ->capture_default_str();
  cmd->add_option("--afe-lr", rc.afe_lr_initial, "AFE learning rate")->capture_default_str();
  cmd->add_option("--afe-lr-decayed", rc.afe_lr_decayed, "AFE rate after decay")
      ->capture_default_str();
  cmd->add_option("--afe-lr-decay-epoch", rc.afe_lr_decay_epoch, "AFE decay epoch")
      ->capture_default_str();
  cmd->add_option("--proto-lr", rc.proto_lr_initial, "prototype learning rate")
      ->capture_default_str();
  cmd->add_option("--proto-lr-decayed", rc.proto_lr_decayed, "prototype rate after decay")
      ->capture_default_str();
  cmd->add_option("--proto-lr-decay-epoch", rc.proto_lr_decay_epoch, "prototype decay epoch")
      ->capture_default_str();
  cmd->add_option("--other-lr", rc.other_lr_initial, "fc/classifier learning rate")
      ->capture_default_str();
  cmd->add_option("--other-lr-decayed", rc.other_lr_decayed, "fc/classifier rate after decay")
      ->capture_default_str();
  cmd->add_option("--other-lr-decay-epoch", rc.other_lr_decay_epoch, "fc/classifier decay epoch")
      ->capture_default_str();
  cmd->add_option("--seed", rc.seed, "run seed")->capture_default_str();
  cmd->add_flag("--joint", rc.joint, "joint (non-continual) training over all tasks");
  cmd->add_flag("--freeze-prototypes", rc.freeze_prototypes,
                "freeze all prototype stores after task 1");
  cmd->add_flag("--freeze-proto-updates", rc.freeze_proto_updates,
                "disable prototype refinement (creation still on)");
}

int fail_with(const std::vector<std::string>& errors) {
  for (const auto& e : errors) std::cerr << "error: " << e << "\n";
  return 1;
}

// Removes everything this invocation created when a command fails midway.
class OutputDir {
 public:
  explicit OutputDir(const std::string& path) : path_(path) {
    created_ = !fs::exists(path_);
    fs::create_directories(path_);
  }
  void keep() { keep_ = true; }
  ~OutputDir() {
    if (keep_) return;
    std::error_code ec;
    if (created_) {
      fs::remove_all(path_, ec);
    } else {
      for (const auto& f : written_) fs::remove(f, ec);
    }
  }
  std::string file(const std::string& name) {
    const std::string p = (fs::path(path_) / name).string();
    written_.push_back(p);
    return p;
  }

 private:
  std::string path_;
  bool created_ = false;
  bool keep_ = false;
  std::vector<std::string> written_;
};

struct LoadedTasks {
  // heap-held so the views' graph pointers survive moves of this struct
  std::unique_ptr<LoadedDataset> ds;
  TaskSpec spec;
  std::vector<TaskView> views;
  int classes_per_task = 0;

  const Graph& graph() const { return ds->graph; }
};

LoadedTasks load_data_dir(const std::string& dir) {
  LoadedTasks lt;
  const fs::path d(dir);
  lt.ds = std::make_unique<LoadedDataset>(load_graph(
      (d / "nodes.csv").string(), (d / "edges.csv").string(), (d / "splits.csv").string()));
  lt.spec = load_tasks((d / "tasks.json").string());
  lt.views = make_task_subgraphs(lt.ds->graph, lt.ds->splits, lt.spec);
  lt.classes_per_task = lt.views.front().num_classes();
  for (const TaskView& v : lt.views)
    if (v.num_classes() != lt.classes_per_task)
      throw std::runtime_error("all tasks must have the same class count (shared output head)");
  return lt;
}

int cmd_gen_synth(const GenArgs& a) {
  if (a.out.empty()) return fail_with({"--out is required"});
  if (a.classes_per_task < 1 || a.classes % a.classes_per_task != 0)
    return fail_with({"--classes must be divisible by --classes-per-task"});
  OutputDir out(a.out);
  Rng rng(a.seed);
  const LoadedDataset ds =
      gen_synthetic(a.classes, a.per_class, a.dim, a.intra_p, a.inter_p, a.sep, rng);
  save_graph(ds.graph, ds.splits, out.file("nodes.csv"), out.file("edges.csv"),
             out.file("splits.csv"));
  TaskSpec spec;
  for (int c = 0; c < a.classes; c += a.classes_per_task) {
    std::vector<int> task;
    for (int k = 0; k < a.classes_per_task; ++k) task.push_back(c + k);
    spec.tasks.push_back(task);
  }
  save_tasks(spec, out.file("tasks.json"));
  out.keep();
  std::cout << "wrote " << a.classes * a.per_class << " nodes, " << spec.tasks.size()
            << " tasks to " << a.out << "\n";
  return 0;
}

int cmd_train(CLI::App& app, const RunConfig& rc, const IoArgs& io) {
  if (io.data.empty() || io.out.empty()) return fail_with({"--data and --out are required"});
  const LoadedTasks lt = load_data_dir(io.data);
  const auto errors = rc.validate(lt.graph().feat_dim, lt.classes_per_task);
  if (!errors.empty()) return fail_with(errors);

  OutputDir out(io.out);
  {
    std::ofstream f(out.file("config.toml"));
    f << app.config_to_str(true, true);
  }

  Rng init = Rng(rc.seed).fork(kInitStream);
  HpnModel model(rc.model_dims(lt.graph().feat_dim, lt.classes_per_task), rc.sampler_config(),
                 rc.alpha, rc.beta, init);

  const TrainConfig cfg = rc.train_config();
  HarnessOptions opt;
  if (rc.freeze_prototypes) opt.freeze_prototypes_after_task = 1;

  const RunRecord rec =
      rc.joint ? run_joint(model, lt.views, cfg) : run_sequence(model, lt.views, cfg, opt);

  save_checkpoint(model, rc.seed, out.file("checkpoint.json"));
  write_acc_matrix(rec, out.file("acc_matrix.csv"));
  write_metrics(rec, out.file("metrics.json"));
  write_runlog(rec, out.file("runlog.jsonl"));
  out.keep();

  std::printf("AM %.4f", rec.amfm.am);
  if (rec.amfm.fm_defined) std::printf("  FM %+.4f", rec.amfm.fm);
  std::printf("  (%d tasks, %ld params)\n", static_cast<int>(lt.views.size()),
              count_parameters(model).total());
  return 0;
}

int cmd_eval(const IoArgs& io) {
  if (io.data.empty() || io.checkpoint.empty() || io.out.empty())
    return fail_with({"--data, --checkpoint and --out are required"});
  const LoadedTasks lt = load_data_dir(io.data);
  LoadedCheckpoint ck = load_checkpoint(io.checkpoint);

  OutputDir out(io.out);
  nlohmann::json j;
  j["per_task"] = nlohmann::json::array();
  const int p = static_cast<int>(lt.views.size());
  double mean = 0.0;
  for (int t = 1; t <= p; ++t) {
    Rng er = harness_eval_rng(ck.seed, p, t);
    const double acc =
        evaluate_accuracy(ck.model, lt.views[static_cast<size_t>(t - 1)], Split::Test, er);
    j["per_task"].push_back(acc);
    mean += acc / p;
  }
  j["mean"] = mean;
  {
    std::ofstream f(out.file("eval.json"));
    f << j.dump(2) << "\n";
  }
  out.keep();
  std::printf("mean test accuracy %.4f over %d tasks\n", mean, p);
  return 0;
}

int cmd_metrics(const IoArgs& io) {
  if (io.matrix.empty() || io.out.empty()) return fail_with({"--matrix and --out are required"});
  bool joint = false;
  const AccuracyMatrix m = read_acc_matrix(io.matrix, &joint);

  RunRecord rec;
  rec.joint = joint;
  rec.matrix = m;
  if (joint) {
    double s = 0.0;
    for (double a : m.rows[0]) s += a;
    rec.amfm.am = s / static_cast<double>(m.rows[0].size());
    rec.amfm.fm_defined = false;
  } else {
    rec.amfm = compute_am_fm(m);
    rec.ars = compute_ars(m);
  }
  OutputDir out(io.out);
  write_metrics(rec, out.file("metrics.json"));
  out.keep();
  std::printf("AM %.4f", rec.amfm.am);
  if (rec.amfm.fm_defined) std::printf("  FM %+.4f", rec.amfm.fm);
  std::printf("\n");
  return 0;
}

int cmd_check(const RunConfig& rc, const IoArgs& io) {
  if (io.out.empty()) return fail_with({"--out is required"});

  int d_v = io.d_v;
  int classes = io.classes_per_task;
  std::optional<LoadedTasks> lt;
  if (!io.data.empty()) {
    lt = load_data_dir(io.data);
    d_v = lt->graph().feat_dim;
    classes = lt->classes_per_task;
  }
  if (d_v < 1) return fail_with({"--d-v (or --data) is required for the bound report"});
  const auto errors = rc.validate(d_v, classes);
  if (!errors.empty()) return fail_with(errors);

  OutputDir out(io.out);

  RunRecord observed;
  bool have_observed = false;
  if (!io.against.empty()) {
    std::ifstream f(fs::path(io.against) / "runlog.jsonl");
    if (!f) throw std::runtime_error("cannot open " + io.against + "/runlog.jsonl");
    std::string line, last;
    while (std::getline(f, line))
      if (!line.empty()) last = line;
    if (last.empty()) throw std::runtime_error(io.against + "/runlog.jsonl is empty");
    const auto j = nlohmann::json::parse(last);
    TaskStats ts;
    ts.task = j.at("task").get<int>();
    ts.params_total = j.at("params_total").get<long>();
    ts.n_proto_a = j.at("n_proto_a").get<int>();
    ts.n_proto_n = j.at("n_proto_n").get<int>();
    ts.n_proto_c = j.at("n_proto_c").get<int>();
    observed.per_task.push_back(ts);
    have_observed = true;
  }

  const BoundReport br =
      memory_bound(rc.model_shape(d_v, classes), have_observed ? &observed : nullptr);
  write_bound_report(br, out.file("bound_report.json"));

  if (lt && lt->views.size() >= 2) {
    // the initial AFE bank of a run with this seed
    Rng init = Rng(rc.seed).fork(kInitStream);
    const HpnModel probe(rc.model_dims(d_v, classes), rc.sampler_config(), rc.alpha, rc.beta,
                         init);
    const TheoremTwoReport tr = check_theorem_two(probe.bank, lt->views[0], lt->views[1], rc.t_a);
    write_theorem_two_report(tr, out.file("theorem2_report.json"));
    std::printf("theorem 2 verdict: %s (bound %.4f vs t_A %.2f)\n", tr.verdict ? "pass" : "fail",
                tr.bound, tr.t_a);
  }
  out.keep();
  if (br.param_bound_available)
    std::printf("parameter bound %.1f (fixed %ld)\n", br.param_bound, br.fixed_params);
  else
    std::printf("%s\n", br.note.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical prototype networks for continual node classification on graphs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file (flags override)");

  GenArgs ga;
  RunConfig rc;
  IoArgs io;

  auto* gen = app.add_subcommand("gen-synth", "generate a synthetic dataset directory");
  gen->add_option("--classes", ga.classes, "number of classes")->capture_default_str();
  gen->add_option("--per-class", ga.per_class, "nodes per class")->capture_default_str();
  gen->add_option("--dim", ga.dim, "feature dimension")->capture_default_str();
  gen->add_option("--intra-p", ga.intra_p, "within-class edge probability")->capture_default_str();
  gen->add_option("--inter-p", ga.inter_p, "cross-class edge probability")->capture_default_str();
  gen->add_option("--sep", ga.sep, "class mean separation")->capture_default_str();
  gen->add_option("--classes-per-task", ga.classes_per_task, "classes grouped per task")
      ->capture_default_str();
  gen->add_option("--seed", ga.seed, "generator seed")->capture_default_str();
  gen->add_option("--out", ga.out, "output dataset directory");

  auto* train = app.add_subcommand("train", "train on a task sequence and emit run artifacts");
  train->add_option("--data", io.data, "dataset directory");
  train->add_option("--out", io.out, "run output directory");
  add_model_flags(train, rc);
  add_train_flags(train, rc);

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on every task's test split");
  ev->add_option("--data", io.data, "dataset directory");
  ev->add_option("--checkpoint", io.checkpoint, "checkpoint.json path");
  ev->add_option("--out", io.out, "output directory");

  auto* met = app.add_subcommand("metrics", "recompute AM/FM/ARS from an accuracy matrix");
  met->add_option("--matrix", io.matrix, "acc_matrix.csv path");
  met->add_option("--out", io.out, "output directory");

  auto* chk = app.add_subcommand("check", "write spherical-code bound and task-distance reports");
  chk->add_option("--data", io.data, "dataset directory (enables the task-distance check)");
  chk->add_option("--out", io.out, "output directory");
  chk->add_option("--d-v", io.d_v, "feature dimension when no dataset is given");
  chk->add_option("--classes-per-task", io.classes_per_task, "classes per task")
      ->capture_default_str();
  chk->add_option("--against", io.against, "finished run directory to compare against");
  add_model_flags(chk, rc);
  chk->add_option("--seed", rc.seed, "seed for the probe AFE bank")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_synth(ga);
    if (train->parsed()) return cmd_train(app, rc, io);
    if (ev->parsed()) return cmd_eval(io);
    if (met->parsed()) return cmd_metrics(io);
    if (chk->parsed()) return cmd_check(rc, io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
