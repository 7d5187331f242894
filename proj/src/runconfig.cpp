#include "hpn/runconfig.hpp"

namespace hpn {

std::vector<std::string> RunConfig::validate(int d_v, int classes_per_task) const {
  std::vector<std::string> errors;
  auto bad = [&](const std::string& msg) { errors.push_back(msg); };

  if (d_a < 1 || d_n < 1 || d_c < 1) bad("prototype dims d_a, d_n, d_c must be >= 1");
  if (l_a < 1 || l_r < 1) bad("need at least one AFE of each kind (l_a, l_r >= 1)");
  if (l_a_sel < 1 || l_a_sel > l_a) bad("l_a_sel must lie in [1, l_a]");
  if (l_r_sel < 1 || l_r_sel > l_r) bad("l_r_sel must lie in [1, l_r]");
  for (double t : {t_a, t_n, t_c})
    if (!(t > 0.0 && t < 1.0)) {
      bad("thresholds t_a, t_n, t_c must lie in (0,1)");
      break;
    }
  if (alpha < 0.0 || beta < 0.0) bad("alpha and beta must be >= 0");
  if (hops < 1) bad("hops must be >= 1");
  if (static_cast<int>(per_hop_counts.size()) != hops)
    bad("per_hop_counts must list exactly one count per hop");
  int total = 0;
  for (int c : per_hop_counts) {
    if (c < 0) bad("per-hop counts must be >= 0");
    total += c;
  }
  if (static_cast<int>(per_hop_counts.size()) == hops && total < 1)
    bad("at least one neighbor must be sampled in total");

  if (epochs < 0) bad("epochs must be >= 0");
  if (warmup_epochs < 0 || warmup_epochs > epochs) bad("warmup_epochs must lie in [0, epochs]");
  if (batch_size < 0) bad("batch_size must be >= 0 (0 = full batch)");
  for (double lr : {afe_lr_initial, afe_lr_decayed, proto_lr_initial, proto_lr_decayed,
                    other_lr_initial, other_lr_decayed})
    if (!(lr > 0.0)) {
      bad("learning rates must be positive");
      break;
    }

  if (d_v >= 0 && d_v < 1) bad("feature dimension must be >= 1");
  if (classes_per_task >= 0 && classes_per_task < 2) bad("tasks must have at least 2 classes");
  return errors;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.warmup_epochs = warmup_epochs;
  cfg.afe_lr = {afe_lr_initial, afe_lr_decayed, afe_lr_decay_epoch};
  cfg.proto_lr = {proto_lr_initial, proto_lr_decayed, proto_lr_decay_epoch};
  cfg.other_lr = {other_lr_initial, other_lr_decayed, other_lr_decay_epoch};
  cfg.batch_size = batch_size;
  cfg.seed = seed;
  cfg.freeze_proto_updates = freeze_proto_updates;
  return cfg;
}

ModelDims RunConfig::model_dims(int d_v, int classes_per_task) const {
  ModelDims dims;
  dims.d_v = d_v;
  dims.d_a = d_a;
  dims.d_n = d_n;
  dims.d_c = d_c;
  dims.l_a = l_a;
  dims.l_r = l_r;
  dims.l_a_sel = l_a_sel;
  dims.l_r_sel = l_r_sel;
  dims.classes_per_task = classes_per_task;
  dims.t_a = t_a;
  dims.t_n = t_n;
  dims.t_c = t_c;
  return dims;
}

SamplerConfig RunConfig::sampler_config() const { return SamplerConfig{hops, per_hop_counts}; }

ModelShape RunConfig::model_shape(int d_v, int classes_per_task) const {
  ModelShape s;
  s.d_v = d_v;
  s.d_a = d_a;
  s.d_n = d_n;
  s.d_c = d_c;
  s.l_a = l_a;
  s.l_r = l_r;
  s.l_a_sel = l_a_sel;
  s.l_r_sel = l_r_sel;
  s.classes_per_task = classes_per_task;
  s.t_a = t_a;
  s.t_n = t_n;
  s.t_c = t_c;
  return s;
}

}  // namespace hpn
