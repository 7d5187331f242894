#include "hpn/protostore.hpp"

#include <cmath>
#include <stdexcept>

namespace hpn {

PrototypeStore::PrototypeStore(int dim, double threshold) : dim_(dim), threshold_(threshold) {
  if (dim < 1) throw std::invalid_argument("PrototypeStore: dim must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("PrototypeStore: threshold must lie in (0,1)");
}

std::pair<std::vector<int>, std::vector<int>> PrototypeStore::partition(
    const std::vector<Vector>& embs) const {
  std::vector<int> old_idx, new_idx;
  for (size_t i = 0; i < embs.size(); ++i) {
    if (embs[i].dim() != dim_) throw std::invalid_argument("partition: embedding dim mismatch");
    bool observed = false;
    for (const Vector& p : protos_) {
      if (cosine(embs[i], p) >= threshold_) {
        observed = true;
        break;
      }
    }
    (observed ? old_idx : new_idx).push_back(static_cast<int>(i));
  }
  return {old_idx, new_idx};
}

std::vector<Vector> PrototypeStore::dedup_new(const std::vector<Vector>& candidates,
                                              std::vector<int>* kept_src) {
  std::vector<Vector> kept;
  if (kept_src) kept_src->clear();
  for (size_t ci = 0; ci < candidates.size(); ++ci) {
    const Vector& c = candidates[ci];
    const double n = c.norm();
    if (n < 1e-12) {
      ++zero_norm_skipped_;
      continue;
    }
    Vector unit(c.dim());
    for (int k = 0; k < c.dim(); ++k) unit[k] = c[k] / n;
    bool distinct = true;
    for (const Vector& seen : kept) {
      if (cosine(unit, seen) >= threshold_) {
        distinct = false;
        break;
      }
    }
    if (distinct) {
      kept.push_back(std::move(unit));
      if (kept_src) kept_src->push_back(static_cast<int>(ci));
    }
  }
  return kept;
}

std::vector<int> PrototypeStore::create(const std::vector<Vector>& kept, const Provenance& prov) {
  if (frozen_) throw std::logic_error("PrototypeStore::create: store is frozen");
  std::vector<int> idx;
  for (const Vector& v : kept) {
    if (v.dim() != dim_) throw std::invalid_argument("create: prototype dim mismatch");
    idx.push_back(size());
    protos_.push_back(v);
    prov_.push_back(prov);
  }
  return idx;
}

MatchResult PrototypeStore::match(const std::vector<Vector>& embs, bool relaxed) const {
  if (protos_.empty()) throw std::logic_error("PrototypeStore::match: store is empty");
  MatchResult out;
  out.reserve(embs.size());
  for (const Vector& e : embs) {
    int best = 0;
    double best_sim = cosine(e, protos_[0]);
    for (int i = 1; i < size(); ++i) {
      const double s = cosine(e, protos_[static_cast<size_t>(i)]);
      if (s > best_sim) {
        best_sim = s;
        best = i;
      }
    }
    if (!relaxed && best_sim < threshold_ && e.norm() >= 1e-12)
      throw std::logic_error("PrototypeStore::match: embedding below threshold after creation");
    out.push_back(MatchEntry{best, best_sim, false});
  }
  return out;
}

double PrototypeStore::distance_loss(const MatchResult& matches, const std::vector<Vector>& embs,
                                     std::vector<Vector>* emb_grads,
                                     std::vector<Vector>* proto_grads) const {
  if (matches.size() != embs.size())
    throw std::invalid_argument("distance_loss: matches/embs size mismatch");
  if (emb_grads) emb_grads->assign(embs.size(), Vector(dim_));
  if (proto_grads && static_cast<int>(proto_grads->size()) < size())
    proto_grads->resize(static_cast<size_t>(size()), Vector(dim_));

  double loss = 0.0;
  for (size_t i = 0; i < embs.size(); ++i) {
    if (matches[i].was_new) continue;  // only embeddings that matched observed features
    if (embs[i].norm() < 1e-12) continue;
    const int pi = matches[i].proto;
    Vector ge, gp;
    const double c = cosine_with_grads(embs[i], protos_[static_cast<size_t>(pi)], ge, gp);
    loss -= c;
    if (emb_grads)
      for (int k = 0; k < dim_; ++k) (*emb_grads)[i][k] -= ge[k];
    if (proto_grads)
      for (int k = 0; k < dim_; ++k) (*proto_grads)[static_cast<size_t>(pi)][k] -= gp[k];
  }
  return loss;
}

void PrototypeStore::renormalize() {
  for (Vector& p : protos_) {
    const double n = p.norm();
    if (n < 1e-12)
      throw std::runtime_error("PrototypeStore::renormalize: prototype collapsed (training diverged)");
    for (int k = 0; k < dim_; ++k) p[k] /= n;
  }
}

}  // namespace hpn
