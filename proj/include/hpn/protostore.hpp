#pragma once

#include <string>
#include <vector>

#include "hpn/numerics.hpp"

namespace hpn {

struct Provenance {
  int task = 0;          // task index that created the prototype (1-based)
  std::string tag;       // "node:<afe>", "struct:<afe>", "N", "C"
};

struct MatchEntry {
  int proto = -1;
  double sim = 0.0;
  bool was_new = false;  // partitioned below threshold before this batch's creation step
};
using MatchResult = std::vector<MatchEntry>;

// One cosine-threshold-gated store of unit-norm prototypes. Used three times
// (A-, N-, C-level). Prototypes are ordered, never deleted, and only grow.
//
// Freezing is two independent controls:
//   - frozen(): creation is forbidden (create() throws) and no prototype may
//     receive gradient updates;
//   - freeze_existing(): marks everything currently stored as untrainable
//     while still allowing new prototypes to be created and trained.
class PrototypeStore {
 public:
  PrototypeStore() = default;
  PrototypeStore(int dim, double threshold);

  int dim() const { return dim_; }
  double threshold() const { return threshold_; }
  int size() const { return static_cast<int>(protos_.size()); }
  bool empty() const { return protos_.empty(); }

  const Vector& proto(int i) const { return protos_[static_cast<size_t>(i)]; }
  Vector& proto_mutable(int i) { return protos_[static_cast<size_t>(i)]; }
  const Provenance& provenance(int i) const { return prov_[static_cast<size_t>(i)]; }

  bool frozen() const { return frozen_; }
  void set_frozen(bool f) { frozen_ = f; }
  int trainable_from() const { return trainable_from_; }
  void freeze_existing() { trainable_from_ = size(); }
  bool trainable(int i) const { return !frozen_ && i >= trainable_from_; }

  // How many dedup candidates were dropped for having (near-)zero norm.
  long zero_norm_skipped() const { return zero_norm_skipped_; }

  // Indices of embeddings whose best cosine clears the threshold (old) and
  // the rest (new).
  std::pair<std::vector<int>, std::vector<int>> partition(const std::vector<Vector>& embs) const;

  // Greedy scan in input order: keep a normalized candidate iff its cosine
  // against every already-kept candidate stays below the threshold.
  // Zero-norm candidates are skipped and counted. kept_src, when given,
  // receives the candidate index each kept vector came from.
  std::vector<Vector> dedup_new(const std::vector<Vector>& candidates,
                                std::vector<int>* kept_src = nullptr);

  // Append kept vectors as prototypes. Frozen store → hard error.
  std::vector<int> create(const std::vector<Vector>& kept, const Provenance& prov);

  // Argmax-cosine match per embedding; ties break to the lowest prototype
  // index. In strict mode an embedding below threshold is a pipeline bug
  // (hard error) unless it has zero norm, which matches by plain argmax.
  // Relaxed mode (evaluation, frozen-store training) always takes the argmax.
  MatchResult match(const std::vector<Vector>& embs, bool relaxed = false) const;

  // L_dis = -sum cosine(e_i, p_match(i)) over entries partitioned as "old".
  // Analytic gradients accumulate into emb_grads (same shape as embs) and
  // proto_grads (one slot per prototype, grown as needed).
  double distance_loss(const MatchResult& matches, const std::vector<Vector>& embs,
                       std::vector<Vector>* emb_grads, std::vector<Vector>* proto_grads) const;

  // Rescale every prototype to unit norm; a prototype collapsed below 1e-12
  // means training diverged and is a hard error.
  void renormalize();

 private:
  int dim_ = 0;
  double threshold_ = 0.5;
  std::vector<Vector> protos_;
  std::vector<Provenance> prov_;
  bool frozen_ = false;
  int trainable_from_ = 0;
  long zero_norm_skipped_ = 0;
};

}  // namespace hpn
