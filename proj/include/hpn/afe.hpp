#pragma once

#include <vector>

#include "hpn/numerics.hpp"
#include "hpn/protostore.hpp"

namespace hpn {

// Atomic feature extractors: shallow learnable linear maps. node_afes embed
// the target node's features, struct_afes embed sampled neighbor features.
// d_a == d_r is required so both kinds share the single A-prototype store.
struct AfeBank {
  std::vector<Matrix> node_afes;    // each d_v x d_a
  std::vector<Matrix> struct_afes;  // each d_v x d_r

  int d_v = 0;
  int d_a = 0;

  AfeBank() = default;
  AfeBank(int d_v, int d_a, int l_a, int l_r, double init_stddev, Rng& rng);

  int num_node() const { return static_cast<int>(node_afes.size()); }
  int num_struct() const { return static_cast<int>(struct_afes.size()); }
  void validate() const;
};

struct AtomicEmbeddingSet {
  std::vector<Vector> node_embs;                // l_a entries, dim d_a
  std::vector<std::vector<Vector>> struct_embs; // l_r groups, one entry per sampled neighbor
};

// Selected AFE indices in selection-rank order (descending SimMAX, ties by
// ascending AFE index) plus the per-AFE scores.
struct AfeSelection {
  std::vector<int> node_idx;
  std::vector<int> struct_idx;
  std::vector<double> node_simmax;    // per node AFE, index-aligned with the bank
  std::vector<double> struct_simmax;  // per struct AFE
};

// node_embs[i] = x^T A_i; struct_embs[j] = { x(u)^T R_j : u in sampled order }.
AtomicEmbeddingSet atomic_embeddings(const AfeBank& bank, const Vector& x,
                                     const std::vector<Vector>& neighbor_features);

// L_div = sum over ordered same-kind pairs of squared Frobenius inner
// products; zero exactly when all distinct pairs are orthogonal. Gradients,
// when requested, are accumulated (+=) into the provided mats.
double divergence_loss(const AfeBank& bank, std::vector<Matrix>* node_grads = nullptr,
                       std::vector<Matrix>* struct_grads = nullptr);

// SimMAX of a node AFE is its embedding's best cosine over the A-store; a
// struct AFE maximizes over all of its per-neighbor embeddings. With an empty
// store every score is 0 and the index tie-break yields ascending order.
AfeSelection select_afes(const AfeBank& bank, const AtomicEmbeddingSet& embs,
                         const PrototypeStore& a_store, int l_a_sel, int l_r_sel);

}  // namespace hpn
