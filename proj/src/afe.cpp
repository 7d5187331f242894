#include "hpn/afe.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hpn {

AfeBank::AfeBank(int d_v_, int d_a_, int l_a, int l_r, double init_stddev, Rng& rng)
    : d_v(d_v_), d_a(d_a_) {
  if (l_a < 1 || l_r < 1) throw std::invalid_argument("AfeBank: need at least one AFE of each kind");
  for (int i = 0; i < l_a; ++i) node_afes.push_back(gaussian_matrix(d_v, d_a, init_stddev, rng));
  for (int j = 0; j < l_r; ++j) struct_afes.push_back(gaussian_matrix(d_v, d_a, init_stddev, rng));
}

void AfeBank::validate() const {
  if (node_afes.empty() || struct_afes.empty())
    throw std::invalid_argument("AfeBank: need at least one AFE of each kind");
  for (const Matrix& m : node_afes)
    if (m.rows != d_v || m.cols != d_a || !all_finite(m.flat()))
      throw std::invalid_argument("AfeBank: bad node AFE");
  for (const Matrix& m : struct_afes)
    if (m.rows != d_v || m.cols != d_a || !all_finite(m.flat()))
      throw std::invalid_argument("AfeBank: bad struct AFE (d_r must equal d_a)");
}

AtomicEmbeddingSet atomic_embeddings(const AfeBank& bank, const Vector& x,
                                     const std::vector<Vector>& neighbor_features) {
  if (x.dim() != bank.d_v) throw std::invalid_argument("atomic_embeddings: x dim mismatch");
  for (const Vector& u : neighbor_features)
    if (u.dim() != bank.d_v)
      throw std::invalid_argument("atomic_embeddings: neighbor feature dim mismatch");

  AtomicEmbeddingSet out;
  out.node_embs.reserve(bank.node_afes.size());
  for (const Matrix& a : bank.node_afes) out.node_embs.push_back(mat_tvec(a, x));
  out.struct_embs.reserve(bank.struct_afes.size());
  for (const Matrix& r : bank.struct_afes) {
    std::vector<Vector> group;
    group.reserve(neighbor_features.size());
    for (const Vector& u : neighbor_features) group.push_back(mat_tvec(r, u));
    out.struct_embs.push_back(std::move(group));
  }
  return out;
}

namespace {

double pair_divergence(const std::vector<Matrix>& mats, std::vector<Matrix>* grads) {
  double loss = 0.0;
  const int n = static_cast<int>(mats.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double c = frobenius_dot(mats[static_cast<size_t>(i)], mats[static_cast<size_t>(j)]);
      loss += 2.0 * c * c;  // ordered pairs (i,j) and (j,i)
      if (grads) {
        Matrix& gi = (*grads)[static_cast<size_t>(i)];
        Matrix& gj = (*grads)[static_cast<size_t>(j)];
        const double k = 4.0 * c;
        for (size_t e = 0; e < gi.data.size(); ++e) {
          gi.data[e] += k * mats[static_cast<size_t>(j)].data[e];
          gj.data[e] += k * mats[static_cast<size_t>(i)].data[e];
        }
      }
    }
  }
  return loss;
}

}  // namespace

double divergence_loss(const AfeBank& bank, std::vector<Matrix>* node_grads,
                       std::vector<Matrix>* struct_grads) {
  if (node_grads && node_grads->size() != bank.node_afes.size())
    throw std::invalid_argument("divergence_loss: node grad shape mismatch");
  if (struct_grads && struct_grads->size() != bank.struct_afes.size())
    throw std::invalid_argument("divergence_loss: struct grad shape mismatch");
  return pair_divergence(bank.node_afes, node_grads) +
         pair_divergence(bank.struct_afes, struct_grads);
}

namespace {

double simmax_single(const Vector& emb, const PrototypeStore& store) {
  if (store.empty()) return 0.0;  // every score ties, so selection falls back to index order
  double best = -1.0;
  for (int p = 0; p < store.size(); ++p) best = std::max(best, cosine(emb, store.proto(p)));
  return best;
}

std::vector<int> top_ranked(const std::vector<double>& scores, int take) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[static_cast<size_t>(a)] != scores[static_cast<size_t>(b)])
      return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)];
    return a < b;
  });
  order.resize(static_cast<size_t>(take));
  return order;
}

}  // namespace

AfeSelection select_afes(const AfeBank& bank, const AtomicEmbeddingSet& embs,
                         const PrototypeStore& a_store, int l_a_sel, int l_r_sel) {
  if (l_a_sel < 1 || l_a_sel > bank.num_node() || l_r_sel < 1 || l_r_sel > bank.num_struct())
    throw std::invalid_argument("select_afes: selection counts out of range");
  if (static_cast<int>(embs.node_embs.size()) != bank.num_node() ||
      static_cast<int>(embs.struct_embs.size()) != bank.num_struct())
    throw std::invalid_argument("select_afes: embedding set does not match bank");

  AfeSelection sel;
  sel.node_simmax.resize(embs.node_embs.size(), 0.0);
  for (size_t i = 0; i < embs.node_embs.size(); ++i)
    sel.node_simmax[i] = simmax_single(embs.node_embs[i], a_store);

  sel.struct_simmax.resize(embs.struct_embs.size(), 0.0);
  for (size_t j = 0; j < embs.struct_embs.size(); ++j) {
    if (a_store.empty() || embs.struct_embs[j].empty()) continue;
    double best = -1.0;
    for (const Vector& e : embs.struct_embs[j]) best = std::max(best, simmax_single(e, a_store));
    sel.struct_simmax[j] = best;
  }

  sel.node_idx = top_ranked(sel.node_simmax, l_a_sel);
  sel.struct_idx = top_ranked(sel.struct_simmax, l_r_sel);
  return sel;
}

}  // namespace hpn
