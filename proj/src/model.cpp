#include "hpn/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hpn {

LinearLayer::LinearLayer(int out, int in, double stddev, Rng& rng)
    : W(gaussian_matrix(out, in, stddev, rng)), b(out) {}

Vector LinearLayer::apply(const Vector& x) const {
  Vector y = matvec(W, x);
  for (int i = 0; i < b.dim(); ++i) y[i] += b[i];
  return y;
}

// AFE init keeps ||A||_F small enough that the divergence loss (quartic in
// the AFE scale) stays in the stable region of the reference learning rates
// even with dozens of extractors.
HpnModel::HpnModel(const ModelDims& d, const SamplerConfig& s, double a, double bt, Rng& rng)
    : dims(d),
      bank(d.d_v, d.d_a, d.l_a, d.l_r, 0.3 / std::sqrt(static_cast<double>(d.d_v)), rng),
      a_store(d.d_a, d.t_a),
      n_store(d.d_n, d.t_n),
      c_store(d.d_c, d.t_c),
      fc_a2n(d.d_n, (d.l_a_sel + d.l_r_sel) * d.d_a,
             1.0 / std::sqrt(static_cast<double>((d.l_a_sel + d.l_r_sel) * d.d_a)), rng),
      fc_n2c(d.d_c, d.d_n, 1.0 / std::sqrt(static_cast<double>(d.d_n)), rng),
      classifier(d.classes_per_task, d.rep_dim(),
                 1.0 / std::sqrt(static_cast<double>(d.rep_dim())), rng),
      alpha(a),
      beta(bt),
      sampler(s) {
  validate();
}

void HpnModel::validate() const {
  bank.validate();
  if (bank.num_node() != dims.l_a || bank.num_struct() != dims.l_r)
    throw std::invalid_argument("HpnModel: bank size disagrees with dims");
  if (bank.d_a != dims.d_a) throw std::invalid_argument("HpnModel: d_a mismatch");
  if (dims.l_a_sel < 1 || dims.l_a_sel > dims.l_a || dims.l_r_sel < 1 || dims.l_r_sel > dims.l_r)
    throw std::invalid_argument("HpnModel: selection counts out of range");
  if (alpha < 0.0 || beta < 0.0) throw std::invalid_argument("HpnModel: alpha, beta must be >= 0");
  if (a_store.dim() != dims.d_a || n_store.dim() != dims.d_n || c_store.dim() != dims.d_c)
    throw std::invalid_argument("HpnModel: store dims inconsistent");
  const int k = (dims.l_a_sel + dims.l_r_sel) * dims.d_a;
  if (fc_a2n.W.rows != dims.d_n || fc_a2n.W.cols != k)
    throw std::invalid_argument("HpnModel: fc_a2n shape");
  if (fc_n2c.W.rows != dims.d_c || fc_n2c.W.cols != dims.d_n)
    throw std::invalid_argument("HpnModel: fc_n2c shape");
  if (classifier.W.rows != dims.classes_per_task || classifier.W.cols != dims.rep_dim())
    throw std::invalid_argument("HpnModel: classifier shape");
  if (static_cast<int>(sampler.per_hop_counts.size()) != sampler.hops)
    throw std::invalid_argument("HpnModel: per-hop counts length");
  int total = 0;
  for (int c : sampler.per_hop_counts) total += c;
  if (total < 1) throw std::invalid_argument("HpnModel: need at least one sampled neighbor");
}

namespace {

Vector mean_feature(const TaskView& view, const std::vector<int>& locals, int d_v) {
  Vector s(d_v);
  if (locals.empty()) return s;
  for (int u : locals) {
    const Vector xu = view.feature(u);
    for (int c = 0; c < d_v; ++c) s[c] += xu[c];
  }
  const double inv = 1.0 / static_cast<double>(locals.size());
  for (int c = 0; c < d_v; ++c) s[c] *= inv;
  return s;
}

// partition + dedup + create + match, with per-embedding provenance and the
// was_new flags carried through. Creation disabled -> relaxed matching.
MatchResult absorb_level(PrototypeStore& store, const std::vector<Vector>& embs,
                         const std::vector<Provenance>& prov, bool create_enabled) {
  auto [old_idx, new_idx] = store.partition(embs);
  std::vector<bool> was_new(embs.size(), false);
  for (int i : new_idx) was_new[static_cast<size_t>(i)] = true;

  if (create_enabled && !new_idx.empty()) {
    std::vector<Vector> candidates;
    candidates.reserve(new_idx.size());
    for (int i : new_idx) candidates.push_back(embs[static_cast<size_t>(i)]);
    std::vector<int> kept_src;
    auto kept = store.dedup_new(candidates, &kept_src);
    for (size_t k = 0; k < kept.size(); ++k)
      store.create({kept[k]}, prov[static_cast<size_t>(new_idx[static_cast<size_t>(kept_src[k])])]);
  }

  MatchResult m = store.match(embs, /*relaxed=*/!create_enabled);
  for (size_t i = 0; i < m.size(); ++i) m[i].was_new = was_new[i];
  return m;
}

void append(Vector& dst, const Vector& src) {
  dst.data.insert(dst.data.end(), src.data.begin(), src.data.end());
}

// Continuous quantities of one traced node, recomputed from the current
// parameters with the trace's discrete choices held fixed.
struct NodeValues {
  Vector x;
  Vector sbar;  // mean sampled-neighbor feature
  std::vector<Vector> sel_embs;
  Vector a_in;  // fc_a2n input: matched A-prototypes, or raw embeddings during warmup
  Vector n_emb;
  Vector c_in;  // fc_n2c input: matched N-prototype, or n_emb during warmup
  Vector c_emb;
  Vector rep;
  Vector logits;
};

NodeValues recompute_node(const HpnModel& m, const TaskView& view, const ForwardTrace& t) {
  NodeValues nv;
  nv.x = view.feature(t.node);
  nv.sbar = mean_feature(view, t.neighbors, m.dims.d_v);
  nv.sel_embs.reserve(t.rep_node_afes.size() + t.rep_struct_afes.size());
  for (int i : t.rep_node_afes)
    nv.sel_embs.push_back(mat_tvec(m.bank.node_afes[static_cast<size_t>(i)], nv.x));
  for (int j : t.rep_struct_afes)
    nv.sel_embs.push_back(mat_tvec(m.bank.struct_afes[static_cast<size_t>(j)], nv.sbar));

  if (t.warmup) {
    for (const Vector& e : nv.sel_embs) append(nv.a_in, e);
    nv.n_emb = m.fc_a2n.apply(nv.a_in);
    nv.c_in = nv.n_emb;
    nv.c_emb = m.fc_n2c.apply(nv.c_in);
    nv.rep = nv.a_in;
    append(nv.rep, nv.n_emb);
    append(nv.rep, nv.c_emb);
  } else {
    for (const MatchEntry& e : t.a_match) append(nv.a_in, m.a_store.proto(e.proto));
    nv.n_emb = m.fc_a2n.apply(nv.a_in);
    nv.c_in = m.n_store.proto(t.n_match.proto);
    nv.c_emb = m.fc_n2c.apply(nv.c_in);
    nv.rep = nv.a_in;
    append(nv.rep, m.n_store.proto(t.n_match.proto));
    append(nv.rep, m.c_store.proto(t.c_match.proto));
  }
  nv.logits = m.classifier.apply(nv.rep);
  return nv;
}

void outer_acc(Matrix& dst, const Vector& a, const Vector& b, double scale) {
  for (int r = 0; r < dst.rows; ++r) {
    const double ar = a[r] * scale;
    double* row = dst.data.data() + static_cast<size_t>(r) * dst.cols;
    for (int c = 0; c < dst.cols; ++c) row[c] += ar * b[c];
  }
}

void axpy(Vector& dst, const Vector& src, double scale) {
  for (int i = 0; i < dst.dim(); ++i) dst[i] += scale * src[i];
}

}  // namespace

ForwardTrace forward(HpnModel& m, const TaskView& view, int v_local, Rng& rng, ForwardMode mode,
                     bool warmup, int task_id) {
  ForwardTrace t;
  t.node = v_local;
  t.label = view.labels[static_cast<size_t>(v_local)];
  t.warmup = warmup;
  t.neighbors = sample_neighborhood(view, v_local, m.sampler, rng);

  const Vector x = view.feature(v_local);
  std::vector<Vector> neighbor_feats;
  neighbor_feats.reserve(t.neighbors.size());
  for (int u : t.neighbors) neighbor_feats.push_back(view.feature(u));

  const AtomicEmbeddingSet embset = atomic_embeddings(m.bank, x, neighbor_feats);
  t.selection = select_afes(m.bank, embset, m.a_store, m.dims.l_a_sel, m.dims.l_r_sel);
  t.rep_node_afes = t.selection.node_idx;
  std::sort(t.rep_node_afes.begin(), t.rep_node_afes.end());
  t.rep_struct_afes = t.selection.struct_idx;
  std::sort(t.rep_struct_afes.begin(), t.rep_struct_afes.end());

  const Vector sbar = mean_feature(view, t.neighbors, m.dims.d_v);
  for (int i : t.rep_node_afes) t.sel_embs.push_back(embset.node_embs[static_cast<size_t>(i)]);
  for (int j : t.rep_struct_afes)
    t.sel_embs.push_back(mat_tvec(m.bank.struct_afes[static_cast<size_t>(j)], sbar));

  if (warmup) {
    Vector a_in;
    for (const Vector& e : t.sel_embs) append(a_in, e);
    t.n_emb = m.fc_a2n.apply(a_in);
    t.c_emb = m.fc_n2c.apply(t.n_emb);
    t.rep = a_in;
    append(t.rep, t.n_emb);
    append(t.rep, t.c_emb);
    t.logits = m.classifier.apply(t.rep);
    return t;
  }

  const bool training = mode == ForwardMode::Train;

  std::vector<Provenance> a_prov;
  for (int i : t.rep_node_afes) a_prov.push_back({task_id, "node:" + std::to_string(i)});
  for (int j : t.rep_struct_afes) a_prov.push_back({task_id, "struct:" + std::to_string(j)});
  t.a_match = absorb_level(m.a_store, t.sel_embs, a_prov, training && !m.a_store.frozen());

  Vector a_in;
  for (const MatchEntry& e : t.a_match) append(a_in, m.a_store.proto(e.proto));
  t.n_emb = m.fc_a2n.apply(a_in);
  t.n_match = absorb_level(m.n_store, {t.n_emb}, {{task_id, "N"}},
                           training && !m.n_store.frozen())[0];

  t.c_emb = m.fc_n2c.apply(m.n_store.proto(t.n_match.proto));
  t.c_match = absorb_level(m.c_store, {t.c_emb}, {{task_id, "C"}},
                           training && !m.c_store.frozen())[0];

  t.rep = a_in;
  append(t.rep, m.n_store.proto(t.n_match.proto));
  append(t.rep, m.c_store.proto(t.c_match.proto));
  t.logits = m.classifier.apply(t.rep);
  return t;
}

Gradients::Gradients(const HpnModel& m)
    : fc_a2n_w(m.fc_a2n.W.rows, m.fc_a2n.W.cols),
      fc_a2n_b(m.fc_a2n.b.dim()),
      fc_n2c_w(m.fc_n2c.W.rows, m.fc_n2c.W.cols),
      fc_n2c_b(m.fc_n2c.b.dim()),
      classifier_w(m.classifier.W.rows, m.classifier.W.cols),
      classifier_b(m.classifier.b.dim()) {
  for (const Matrix& a : m.bank.node_afes) node_afes.emplace_back(a.rows, a.cols);
  for (const Matrix& r : m.bank.struct_afes) struct_afes.emplace_back(r.rows, r.cols);
  a_protos.assign(static_cast<size_t>(m.a_store.size()), Vector(m.a_store.dim()));
  n_protos.assign(static_cast<size_t>(m.n_store.size()), Vector(m.n_store.dim()));
  c_protos.assign(static_cast<size_t>(m.c_store.size()), Vector(m.c_store.dim()));
}

namespace {

// Routes a gradient on the slot-k aggregated embedding back to its AFE.
void afe_chain(const ForwardTrace& t, const NodeValues& nv, Gradients* g, int slot,
               const Vector& de) {
  const int n_node = static_cast<int>(t.rep_node_afes.size());
  if (slot < n_node) {
    const int afe = t.rep_node_afes[static_cast<size_t>(slot)];
    outer_acc(g->node_afes[static_cast<size_t>(afe)], nv.x, de, 1.0);
  } else {
    const int afe = t.rep_struct_afes[static_cast<size_t>(slot - n_node)];
    outer_acc(g->struct_afes[static_cast<size_t>(afe)], nv.sbar, de, 1.0);
  }
}

Vector slice(const Vector& v, int start, int len) {
  Vector out(len);
  for (int i = 0; i < len; ++i) out[i] = v[start + i];
  return out;
}

}  // namespace

LossBreakdown loss_and_grads(const HpnModel& m, const TaskView& view,
                             const std::vector<ForwardTrace>& traces, Gradients* g,
                             unsigned comp) {
  const int B = static_cast<int>(traces.size());
  const double w_cls = B > 0 ? 1.0 / B : 0.0;
  const double w_dis = B > 0 ? m.beta / B : 0.0;
  const int d_a = m.dims.d_a;

  double cls_sum = 0.0;
  double dis_sum = 0.0;

  for (const ForwardTrace& t : traces) {
    const NodeValues nv = recompute_node(m, view, t);
    const int k_slots = static_cast<int>(nv.sel_embs.size());

    if (comp & kLossCls) {
      const XentResult xe = softmax_xent(nv.logits, t.label);
      cls_sum += xe.loss;
      if (g) {
        outer_acc(g->classifier_w, xe.grad, nv.rep, w_cls);
        axpy(g->classifier_b, xe.grad, w_cls);
        Vector drep = mat_tvec(m.classifier.W, xe.grad);
        for (double& x : drep.data) x *= w_cls;

        if (t.warmup) {
          // rep = [e_1..e_K, n, c]; chain c -> n -> concat(e) -> AFEs
          std::vector<Vector> de(static_cast<size_t>(k_slots));
          for (int k = 0; k < k_slots; ++k) de[static_cast<size_t>(k)] = slice(drep, k * d_a, d_a);
          Vector dn = slice(drep, k_slots * d_a, m.dims.d_n);
          Vector dc = slice(drep, k_slots * d_a + m.dims.d_n, m.dims.d_c);

          outer_acc(g->fc_n2c_w, dc, nv.c_in, 1.0);
          axpy(g->fc_n2c_b, dc, 1.0);
          const Vector dn_from_c = mat_tvec(m.fc_n2c.W, dc);
          axpy(dn, dn_from_c, 1.0);

          outer_acc(g->fc_a2n_w, dn, nv.a_in, 1.0);
          axpy(g->fc_a2n_b, dn, 1.0);
          const Vector da_in = mat_tvec(m.fc_a2n.W, dn);
          for (int k = 0; k < k_slots; ++k)
            axpy(de[static_cast<size_t>(k)], slice(da_in, k * d_a, d_a), 1.0);

          for (int k = 0; k < k_slots; ++k) afe_chain(t, nv, g, k, de[static_cast<size_t>(k)]);
        } else {
          // rep is a concatenation of prototype vectors; they are the leaves.
          for (int k = 0; k < k_slots; ++k)
            axpy(g->a_protos[static_cast<size_t>(t.a_match[static_cast<size_t>(k)].proto)],
                 slice(drep, k * d_a, d_a), 1.0);
          axpy(g->n_protos[static_cast<size_t>(t.n_match.proto)],
               slice(drep, k_slots * d_a, m.dims.d_n), 1.0);
          axpy(g->c_protos[static_cast<size_t>(t.c_match.proto)],
               slice(drep, k_slots * d_a + m.dims.d_n, m.dims.d_c), 1.0);
        }
      }
    }

    if ((comp & kLossDis) && !t.warmup) {
      // A-level
      for (int k = 0; k < k_slots; ++k) {
        const MatchEntry& e = t.a_match[static_cast<size_t>(k)];
        if (e.was_new) continue;
        Vector ge, gp;
        const double c =
            cosine_with_grads(nv.sel_embs[static_cast<size_t>(k)], m.a_store.proto(e.proto), ge, gp);
        dis_sum -= c;
        if (g) {
          axpy(g->a_protos[static_cast<size_t>(e.proto)], gp, -w_dis);
          Vector de(d_a);
          axpy(de, ge, -w_dis);
          afe_chain(t, nv, g, k, de);
        }
      }
      // N-level: n_emb = fc_a2n(a_in), a_in concatenates A-prototypes
      if (!t.n_match.was_new) {
        Vector ge, gp;
        const double c = cosine_with_grads(nv.n_emb, m.n_store.proto(t.n_match.proto), ge, gp);
        dis_sum -= c;
        if (g) {
          axpy(g->n_protos[static_cast<size_t>(t.n_match.proto)], gp, -w_dis);
          Vector dn(m.dims.d_n);
          axpy(dn, ge, -w_dis);
          outer_acc(g->fc_a2n_w, dn, nv.a_in, 1.0);
          axpy(g->fc_a2n_b, dn, 1.0);
          const Vector da_in = mat_tvec(m.fc_a2n.W, dn);
          for (int k = 0; k < k_slots; ++k)
            axpy(g->a_protos[static_cast<size_t>(t.a_match[static_cast<size_t>(k)].proto)],
                 slice(da_in, k * d_a, d_a), 1.0);
        }
      }
      // C-level: c_emb = fc_n2c(matched N-prototype)
      if (!t.c_match.was_new) {
        Vector ge, gp;
        const double c = cosine_with_grads(nv.c_emb, m.c_store.proto(t.c_match.proto), ge, gp);
        dis_sum -= c;
        if (g) {
          axpy(g->c_protos[static_cast<size_t>(t.c_match.proto)], gp, -w_dis);
          Vector dc(m.dims.d_c);
          axpy(dc, ge, -w_dis);
          outer_acc(g->fc_n2c_w, dc, nv.c_in, 1.0);
          axpy(g->fc_n2c_b, dc, 1.0);
          const Vector dn_in = mat_tvec(m.fc_n2c.W, dc);
          axpy(g->n_protos[static_cast<size_t>(t.n_match.proto)], dn_in, 1.0);
        }
      }
    }
  }

  LossBreakdown lb;
  lb.cls = B > 0 ? cls_sum / B : 0.0;
  lb.dis = B > 0 ? dis_sum / B : 0.0;

  if (comp & kLossDiv) {
    if (g) {
      std::vector<Matrix> tn, ts;
      for (const Matrix& a : m.bank.node_afes) tn.emplace_back(a.rows, a.cols);
      for (const Matrix& r : m.bank.struct_afes) ts.emplace_back(r.rows, r.cols);
      lb.div = divergence_loss(m.bank, &tn, &ts);
      for (size_t i = 0; i < tn.size(); ++i)
        for (size_t e = 0; e < tn[i].data.size(); ++e)
          g->node_afes[i].data[e] += m.alpha * tn[i].data[e];
      for (size_t i = 0; i < ts.size(); ++i)
        for (size_t e = 0; e < ts[i].data.size(); ++e)
          g->struct_afes[i].data[e] += m.alpha * ts[i].data[e];
    } else {
      lb.div = divergence_loss(m.bank);
    }
  }

  lb.total = 0.0;
  if (comp & kLossCls) lb.total += lb.cls;
  if (comp & kLossDiv) lb.total += m.alpha * lb.div;
  if (comp & kLossDis) lb.total += m.beta * lb.dis;
  return lb;
}

double replay_loss(const HpnModel& m, const TaskView& view, const std::vector<ForwardTrace>& traces,
                   unsigned components) {
  return loss_and_grads(m, view, traces, nullptr, components).total;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (warmup_epochs < 0 || warmup_epochs > epochs)
    throw std::invalid_argument("TrainConfig: warmup_epochs must lie in [0, epochs]");
  if (!(afe_lr.initial > 0) || !(afe_lr.decayed > 0) || !(proto_lr.initial > 0) ||
      !(proto_lr.decayed > 0) || !(other_lr.initial > 0) || !(other_lr.decayed > 0))
    throw std::invalid_argument("TrainConfig: learning rates must be positive");
  if (batch_size < 0) throw std::invalid_argument("TrainConfig: batch_size must be >= 0");
}

namespace {

void renormalize_trainable(PrototypeStore& store) {
  if (store.frozen()) return;
  for (int i = store.trainable_from(); i < store.size(); ++i) {
    Vector& p = store.proto_mutable(i);
    const double n = p.norm();
    if (n < 1e-12)
      throw std::runtime_error("sgd_update: prototype collapsed to zero norm (training diverged)");
    for (int k = 0; k < p.dim(); ++k) p[k] /= n;
  }
}

}  // namespace

void sgd_update(HpnModel& m, const Gradients& g, const TrainConfig& cfg, int epoch) {
  const double lr_a = cfg.afe_lr.at(epoch);
  const double lr_p = cfg.proto_lr.at(epoch);
  const double lr_o = cfg.other_lr.at(epoch);

  if (!cfg.freeze_afes) {
    for (size_t i = 0; i < m.bank.node_afes.size(); ++i)
      sgd_step(m.bank.node_afes[i], g.node_afes[i], lr_a);
    for (size_t i = 0; i < m.bank.struct_afes.size(); ++i)
      sgd_step(m.bank.struct_afes[i], g.struct_afes[i], lr_a);
  }
  if (!cfg.freeze_fc) {
    sgd_step(m.fc_a2n.W, g.fc_a2n_w, lr_o);
    sgd_step(m.fc_a2n.b, g.fc_a2n_b, lr_o);
    sgd_step(m.fc_n2c.W, g.fc_n2c_w, lr_o);
    sgd_step(m.fc_n2c.b, g.fc_n2c_b, lr_o);
  }
  sgd_step(m.classifier.W, g.classifier_w, lr_o);
  sgd_step(m.classifier.b, g.classifier_b, lr_o);

  if (!cfg.freeze_proto_updates) {
    auto step_store = [&](PrototypeStore& store, const std::vector<Vector>& pg) {
      for (int i = 0; i < store.size(); ++i)
        if (store.trainable(i) && i < static_cast<int>(pg.size()))
          sgd_step(store.proto_mutable(i), pg[static_cast<size_t>(i)], lr_p);
      renormalize_trainable(store);
    };
    step_store(m.a_store, g.a_protos);
    step_store(m.n_store, g.n_protos);
    step_store(m.c_store, g.c_protos);
  }
}

std::vector<EpochStats> train_task(HpnModel& m, const TaskView& view, const TrainConfig& cfg,
                                   Rng& rng, int task_id) {
  cfg.validate();
  const std::vector<int> train_nodes = view.nodes_with_split(Split::Train);
  std::vector<EpochStats> log;
  log.reserve(static_cast<size_t>(cfg.epochs));

  // Warmup is the bootstrap phase before any prototypes exist. Once stores
  // are populated (task 2 onward), raw-embedding epochs would push the AFEs
  // around underneath the established prototypes, so they are skipped.
  const bool bootstrap = m.a_store.empty() && m.n_store.empty() && m.c_store.empty();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const bool warmup = bootstrap && epoch < cfg.warmup_epochs;

    std::vector<std::vector<int>> batches;
    if (cfg.batch_size <= 0 || cfg.batch_size >= static_cast<int>(train_nodes.size())) {
      batches.push_back(train_nodes);
    } else {
      for (size_t at = 0; at < train_nodes.size(); at += static_cast<size_t>(cfg.batch_size)) {
        const size_t end = std::min(train_nodes.size(), at + static_cast<size_t>(cfg.batch_size));
        batches.emplace_back(train_nodes.begin() + static_cast<long>(at),
                             train_nodes.begin() + static_cast<long>(end));
      }
    }

    double cls_w = 0.0, dis_w = 0.0, div_last = 0.0;
    size_t seen = 0;
    for (const auto& batch : batches) {
      std::vector<ForwardTrace> traces;
      traces.reserve(batch.size());
      for (int v : batch) traces.push_back(forward(m, view, v, rng, ForwardMode::Train, warmup, task_id));

      Gradients g(m);
      const unsigned comp = warmup ? (kLossCls | kLossDiv) : kLossAll;
      const LossBreakdown lb = loss_and_grads(m, view, traces, &g, comp);
      if (!std::isfinite(lb.total))
        throw std::runtime_error("train_task: non-finite loss at task " + std::to_string(task_id) +
                                 " epoch " + std::to_string(epoch));

      sgd_update(m, g, cfg, epoch);

      cls_w += lb.cls * static_cast<double>(batch.size());
      dis_w += lb.dis * static_cast<double>(batch.size());
      div_last = lb.div;
      seen += batch.size();
    }

    EpochStats st;
    st.epoch = epoch;
    st.loss_cls = seen ? cls_w / static_cast<double>(seen) : 0.0;
    st.loss_div = div_last;
    st.loss_dis = seen ? dis_w / static_cast<double>(seen) : 0.0;
    st.n_proto_a = m.a_store.size();
    st.n_proto_n = m.n_store.size();
    st.n_proto_c = m.c_store.size();
    log.push_back(st);
  }
  return log;
}

int predict(HpnModel& m, const TaskView& view, int v_local, Rng& rng) {
  const ForwardTrace t = forward(m, view, v_local, rng, ForwardMode::Eval, /*warmup=*/false, 0);
  int best = 0;
  for (int i = 1; i < t.logits.dim(); ++i)
    if (t.logits[i] > t.logits[best]) best = i;
  return best;
}

double evaluate_accuracy(HpnModel& m, const TaskView& view, Split split, Rng& rng) {
  const std::vector<int> nodes = view.nodes_with_split(split);
  if (nodes.empty()) return 0.0;
  int correct = 0;
  for (int v : nodes)
    if (predict(m, view, v, rng) == view.labels[static_cast<size_t>(v)]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

}  // namespace hpn
