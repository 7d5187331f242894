#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hpn/model.hpp"
#include "hpn/theory.hpp"

namespace hpn {

// Every knob of a run. Defaults follow the reference configuration:
// 16-dim prototypes, 22 AFEs of each kind, select 1+1, two-hop sampling with
// 5/7 draws, thresholds 0.3/0.3/0.4, alpha = beta = 1, 90 epochs with a
// 35-epoch warmup and the staged learning-rate schedule.
struct RunConfig {
  int d_a = 16, d_n = 16, d_c = 16;
  int l_a = 22, l_r = 22;
  int l_a_sel = 1, l_r_sel = 1;
  double t_a = 0.3, t_n = 0.3, t_c = 0.4;
  double alpha = 1.0, beta = 1.0;
  int hops = 2;
  std::vector<int> per_hop_counts = {5, 7};

  int epochs = 90;
  int warmup_epochs = 35;
  int batch_size = 0;  // 0 = full batch
  double afe_lr_initial = 0.1, afe_lr_decayed = 0.001;
  int afe_lr_decay_epoch = 35;
  double proto_lr_initial = 0.1, proto_lr_decayed = 0.01;
  int proto_lr_decay_epoch = 85;
  double other_lr_initial = 0.1, other_lr_decayed = 0.001;
  int other_lr_decay_epoch = 35;

  std::uint64_t seed = 1;
  bool joint = false;
  bool freeze_prototypes = false;     // freeze all stores after task 1
  bool freeze_proto_updates = false;  // creation allowed, refinement off

  // All problems at once; empty means valid. classes_per_task/d_v may be -1
  // when not yet known (config-only validation).
  std::vector<std::string> validate(int d_v = -1, int classes_per_task = -1) const;

  TrainConfig train_config() const;
  ModelDims model_dims(int d_v, int classes_per_task) const;
  SamplerConfig sampler_config() const;
  ModelShape model_shape(int d_v, int classes_per_task) const;
};

}  // namespace hpn
