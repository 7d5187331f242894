#include "hpn/theory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace hpn {

double circle_bound(double t) {
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("circle_bound: t must lie in (0,1]");
  return 2.0 * std::numbers::pi / std::acos(1.0 - t);
}

int circle_bound_floor(double t) { return static_cast<int>(std::floor(circle_bound(t))); }

double creation_rule_bound(double t) {
  if (!(t > 0.0 && t < 1.0))
    throw std::invalid_argument("creation_rule_bound: t must lie in (0,1)");
  return 2.0 * std::numbers::pi / std::acos(t);
}

int creation_rule_bound_floor(double t) {
  return static_cast<int>(std::floor(creation_rule_bound(t)));
}

namespace {

LevelBound level_bound(const std::string& level, int dim, double t, double multiplier) {
  LevelBound b;
  b.level = level;
  b.dim = dim;
  b.threshold = t;
  b.closed_form = dim == 2;
  if (b.closed_form) {
    b.capacity = circle_bound(t);
    b.capacity_floor = circle_bound_floor(t);
    b.rule_capacity = creation_rule_bound(t);
    b.rule_capacity_floor = creation_rule_bound_floor(t);
    b.count_bound = multiplier * b.capacity;
  }
  return b;
}

}  // namespace

BoundReport memory_bound(const ModelShape& s, const RunRecord* observed) {
  BoundReport r;
  r.a = level_bound("A", s.d_a, s.t_a, static_cast<double>(s.l_a + s.l_r));
  r.n = level_bound("N", s.d_n, s.t_n, 1.0);
  r.c = level_bound("C", s.d_c, s.t_c, 1.0);

  const long k = static_cast<long>(s.l_a_sel + s.l_r_sel) * s.d_a;
  const long rep = k + s.d_n + s.d_c;
  r.fixed_params = static_cast<long>(s.l_a + s.l_r) * s.d_v * s.d_a  // AFE matrices
                   + (static_cast<long>(s.d_n) * k + s.d_n)          // fc_a2n
                   + (static_cast<long>(s.d_c) * s.d_n + s.d_c)      // fc_n2c
                   + (static_cast<long>(s.classes_per_task) * rep + s.classes_per_task);

  r.param_bound_available = r.a.closed_form && r.n.closed_form && r.c.closed_form;
  if (r.param_bound_available) {
    r.param_bound = static_cast<double>(r.fixed_params) + r.a.count_bound * s.d_a +
                    r.n.count_bound * s.d_n + r.c.count_bound * s.d_c;
  } else {
    r.note = "bound unavailable (open sphere-packing problem) for prototype dims != 2";
  }

  if (observed && (!observed->per_task.empty() || !observed->runlog.empty())) {
    // counts only grow, but the whole trajectory is scanned rather than
    // trusting the final row
    long max_a = 0, max_n = 0, max_c = 0, params = 0;
    for (const EpochLogEntry& e : observed->runlog) {
      max_a = std::max(max_a, static_cast<long>(e.stats.n_proto_a));
      max_n = std::max(max_n, static_cast<long>(e.stats.n_proto_n));
      max_c = std::max(max_c, static_cast<long>(e.stats.n_proto_c));
      params = std::max(params, e.params_total);
    }
    for (const TaskStats& t : observed->per_task) {
      max_a = std::max(max_a, static_cast<long>(t.n_proto_a));
      max_n = std::max(max_n, static_cast<long>(t.n_proto_n));
      max_c = std::max(max_c, static_cast<long>(t.n_proto_c));
      params = std::max(params, t.params_total);
    }
    r.a.observed = max_a;
    r.n.observed = max_n;
    r.c.observed = max_c;
    r.observed_params = params;
    if (r.param_bound_available) {
      r.observed_within_rule_bound =
          max_a <= static_cast<long>(s.l_a + s.l_r) * r.a.rule_capacity_floor &&
          max_n <= r.n.rule_capacity_floor && max_c <= r.c.rule_capacity_floor;
    }
  }
  return r;
}

double task_distance(const TaskView& view_p, const TaskView& view_q) {
  if (view_p.size() == 0 || view_q.size() == 0)
    throw std::invalid_argument("task_distance: views must be non-empty");
  const int d = view_p.graph->feat_dim;
  double best_sq = -1.0;
  for (int i = 0; i < view_p.size(); ++i) {
    const Vector xi = view_p.feature(i);
    for (int j = 0; j < view_q.size(); ++j) {
      const Vector xj = view_q.feature(j);
      double s = 0.0;
      for (int c = 0; c < d; ++c) {
        const double dd = xi[c] - xj[c];
        s += dd * dd;
      }
      if (best_sq < 0.0 || s < best_sq) {
        best_sq = s;
        if (best_sq == 0.0) return 0.0;
      }
    }
  }
  return std::sqrt(best_sq);
}

Matrix build_w(const AfeBank& bank) {
  const int l_a = bank.num_node();
  const int l_r = bank.num_struct();
  const int d_v = bank.d_v;
  const int d_a = bank.d_a;
  Matrix w(l_a * d_a + l_r * d_a, (l_r + 1) * d_v);

  // node-AFE stack against the first block column: rows of A_i^T
  for (int i = 0; i < l_a; ++i) {
    const Matrix& a = bank.node_afes[static_cast<size_t>(i)];
    for (int r = 0; r < d_a; ++r)
      for (int c = 0; c < d_v; ++c) w.at(i * d_a + r, c) = a.at(c, r);
  }
  // struct AFE k against block column k (1-based)
  for (int k = 0; k < l_r; ++k) {
    const Matrix& rmat = bank.struct_afes[static_cast<size_t>(k)];
    for (int r = 0; r < d_a; ++r)
      for (int c = 0; c < d_v; ++c)
        w.at(l_a * d_a + k * d_a + r, (k + 1) * d_v + c) = rmat.at(c, r);
  }
  return w;
}

TheoremTwoReport check_theorem_two(const AfeBank& bank, const TaskView& view_p,
                                   const TaskView& view_q, double t_a) {
  TheoremTwoReport rep;
  rep.t_a = t_a;
  const int l_r = bank.num_struct();
  const Matrix w = build_w(bank);
  rep.w_rows = w.rows;
  rep.w_cols = w.cols;
  rep.dims_ok = w.rows >= w.cols;
  rep.distance = task_distance(view_p, view_q);

  if (rep.dims_ok) {
    // eigenvalues of W^T W; rank by singular values relative to the largest
    Matrix wtw(w.cols, w.cols);
    for (int i = 0; i < w.cols; ++i)
      for (int j = i; j < w.cols; ++j) {
        double s = 0.0;
        for (int r = 0; r < w.rows; ++r) s += w.at(r, i) * w.at(r, j);
        wtw.at(i, j) = s;
        wtw.at(j, i) = s;
      }
    const auto eig = sym_eig_all(wtw);
    const double max_ev = eig.back() > 0.0 ? eig.back() : 0.0;
    const double smax = std::sqrt(max_ev);
    rep.rank = 0;
    for (double ev : eig) {
      const double sv = ev > 0.0 ? std::sqrt(ev) : 0.0;
      if (smax > 0.0 && sv > 1e-10 * smax) ++rep.rank;
    }
    rep.full_rank = rep.rank == w.cols;
    rep.lambda_min = eig.front();
    if (rep.full_rank)
      rep.bound = std::sqrt(std::max(0.0, rep.lambda_min) * static_cast<double>(l_r + 1)) *
                  rep.distance;
  }

  rep.verdict = rep.dims_ok && rep.full_rank && t_a < rep.bound;
  return rep;
}

namespace {

nlohmann::json level_to_json(const LevelBound& b) {
  nlohmann::json j;
  j["level"] = b.level;
  j["dim"] = b.dim;
  j["threshold"] = b.threshold;
  j["closed_form"] = b.closed_form;
  if (b.closed_form) {
    j["capacity_formula"] = "2*pi/arccos(1-t)";
    j["capacity"] = b.capacity;
    j["capacity_floor"] = b.capacity_floor;
    j["creation_rule_formula"] = "2*pi/arccos(t)";
    j["creation_rule_capacity"] = b.rule_capacity;
    j["creation_rule_capacity_floor"] = b.rule_capacity_floor;
    j["count_bound"] = b.count_bound;
  } else {
    j["note"] = "bound unavailable (open sphere-packing problem)";
  }
  if (b.observed) j["observed_count"] = *b.observed;
  return j;
}

}  // namespace

void write_bound_report(const BoundReport& r, const std::string& path) {
  nlohmann::json j;
  j["levels"] = {level_to_json(r.a), level_to_json(r.n), level_to_json(r.c)};
  j["fixed_params"] = r.fixed_params;
  j["param_bound_available"] = r.param_bound_available;
  if (r.param_bound_available) j["param_bound"] = r.param_bound;
  if (!r.note.empty()) j["note"] = r.note;
  if (r.observed_params) {
    j["observed_params"] = *r.observed_params;
    j["observed_within_rule_bound"] = r.observed_within_rule_bound;
  }
  j["discrepancy"] =
      "the capacity formula counts points at pairwise dot >= 1-t while the creation rule "
      "enforces pairwise cosine < t; both numbers are reported";
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << "\n";
}

void write_theorem_two_report(const TheoremTwoReport& r, const std::string& path) {
  nlohmann::json j;
  j["dims_ok"] = r.dims_ok;
  j["full_rank"] = r.full_rank;
  j["w_rows"] = r.w_rows;
  j["w_cols"] = r.w_cols;
  j["rank"] = r.rank;
  j["lambda_min"] = r.lambda_min;
  j["task_distance"] = r.distance;
  j["bound"] = r.bound;
  j["t_a"] = r.t_a;
  j["verdict"] = r.verdict;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << "\n";
}

}  // namespace hpn
