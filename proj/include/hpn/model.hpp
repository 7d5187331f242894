#pragma once

#include <cstdint>
#include <vector>

#include "hpn/afe.hpp"
#include "hpn/graphstore.hpp"
#include "hpn/protostore.hpp"

namespace hpn {

struct LinearLayer {
  Matrix W;  // out x in
  Vector b;  // out
  LinearLayer() = default;
  LinearLayer(int out, int in, double stddev, Rng& rng);
  Vector apply(const Vector& x) const;
};

struct ModelDims {
  int d_v = 0;
  int d_a = 16;
  int d_n = 16;
  int d_c = 16;
  int l_a = 22;
  int l_r = 22;
  int l_a_sel = 1;
  int l_r_sel = 1;
  int classes_per_task = 2;
  double t_a = 0.3;
  double t_n = 0.3;
  double t_c = 0.4;

  int rep_dim() const { return (l_a_sel + l_r_sel) * d_a + d_n + d_c; }
};

// The full model: AFE bank, the three prototype stores, the two hierarchy
// maps, and the shared c-logit classifier.
struct HpnModel {
  ModelDims dims;
  AfeBank bank;
  PrototypeStore a_store, n_store, c_store;
  LinearLayer fc_a2n, fc_n2c, classifier;
  double alpha = 1.0;
  double beta = 1.0;
  SamplerConfig sampler;

  HpnModel() = default;
  HpnModel(const ModelDims& dims, const SamplerConfig& sampler, double alpha, double beta,
           Rng& init_rng);
  void validate() const;
};

enum class ForwardMode { Train, Eval };

// Everything the backward pass and the gradient checker need to replay the
// node: the discrete choices (neighbors, selection, match indices) plus the
// continuous intermediates at forward time.
struct ForwardTrace {
  int node = -1;   // local id in the view
  int label = -1;  // within-task label
  bool warmup = false;
  std::vector<int> neighbors;  // sampled local ids, hop order
  AfeSelection selection;
  std::vector<int> rep_node_afes;    // selected node AFEs, ascending index
  std::vector<int> rep_struct_afes;  // selected struct AFEs, ascending index
  std::vector<Vector> sel_embs;      // aggregated A-level embeddings, rep order
  MatchResult a_match;               // empty during warmup
  Vector n_emb;
  MatchEntry n_match;
  Vector c_emb;
  MatchEntry c_match;
  Vector rep;
  Vector logits;
};

// Runs one node through sampling, embedding, selection, the three prototype
// levels, and the classifier. Train mode creates prototypes (unless the
// store is frozen or warmup is on); Eval never mutates anything and matches
// by plain argmax when nothing clears the threshold. During warmup the raw
// embeddings stand in for prototypes and no store is touched.
ForwardTrace forward(HpnModel& model, const TaskView& view, int v_local, Rng& rng,
                     ForwardMode mode, bool warmup, int task_id);

struct Gradients {
  std::vector<Matrix> node_afes, struct_afes;
  Matrix fc_a2n_w;
  Vector fc_a2n_b;
  Matrix fc_n2c_w;
  Vector fc_n2c_b;
  Matrix classifier_w;
  Vector classifier_b;
  std::vector<Vector> a_protos, n_protos, c_protos;

  explicit Gradients(const HpnModel& m);
};

struct LossBreakdown {
  double total = 0.0;
  double cls = 0.0;  // mean over batch
  double div = 0.0;
  double dis = 0.0;  // mean over batch, summed over the three levels
};

enum LossComponents : unsigned {
  kLossCls = 1u,
  kLossDiv = 2u,
  kLossDis = 4u,
  kLossAll = 7u,
};

// L = mean L_cls + alpha*L_div + beta*mean(L_dis over the three levels).
// All continuous quantities are recomputed from current parameters with the
// traces' discrete choices held fixed, so the analytic gradients are exact
// derivatives of replay_loss. Matching/creation/selection are
// non-differentiable and contribute nothing.
LossBreakdown loss_and_grads(const HpnModel& model, const TaskView& view,
                             const std::vector<ForwardTrace>& traces, Gradients* grads,
                             unsigned components = kLossAll);

double replay_loss(const HpnModel& model, const TaskView& view,
                   const std::vector<ForwardTrace>& traces, unsigned components = kLossAll);

struct LrSchedule {
  double initial = 0.1;
  double decayed = 0.001;
  int decay_epoch = 35;
  double at(int epoch) const { return epoch < decay_epoch ? initial : decayed; }
};

struct TrainConfig {
  int epochs = 90;
  int warmup_epochs = 35;
  LrSchedule afe_lr{0.1, 0.001, 35};
  LrSchedule proto_lr{0.1, 0.01, 85};
  LrSchedule other_lr{0.1, 0.001, 35};
  int batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;
  bool freeze_afes = false;
  bool freeze_fc = false;            // fc_a2n and fc_n2c
  bool freeze_proto_updates = false; // creation still allowed, gradients skipped

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double loss_cls = 0.0;
  double loss_div = 0.0;
  double loss_dis = 0.0;
  int n_proto_a = 0;
  int n_proto_n = 0;
  int n_proto_c = 0;
};

// Applies one SGD step to every parameter group at the epoch's staged rates,
// honoring the freeze flags and store trainability, then renormalizes the
// trainable prototypes.
void sgd_update(HpnModel& model, const Gradients& g, const TrainConfig& cfg, int epoch);

// Full-batch (default) gradient descent over the view's training nodes with
// the staged learning rates; creation is sequential in node order. Non-finite
// loss aborts with a diagnostic.
std::vector<EpochStats> train_task(HpnModel& model, const TaskView& view, const TrainConfig& cfg,
                                   Rng& rng, int task_id);

// Argmax-logit prediction with creation suppressed; never mutates the model.
int predict(HpnModel& model, const TaskView& view, int v_local, Rng& rng);

double evaluate_accuracy(HpnModel& model, const TaskView& view, Split split, Rng& rng);

}  // namespace hpn
