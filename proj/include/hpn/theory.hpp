#pragma once

#include <optional>
#include <string>

#include "hpn/afe.hpp"
#include "hpn/graphstore.hpp"
#include "hpn/harness.hpp"
#include "hpn/model.hpp"

namespace hpn {

// Max points on the unit circle under the printed capacity formula,
// 2*pi / arccos(1 - t). Only valid for t in (0,1).
double circle_bound(double t);
int circle_bound_floor(double t);

// What the implemented creation rule (pairwise cosine < t at creation time)
// actually enforces on the circle: floor(2*pi / arccos(t)). The two formulas
// disagree; reports carry both.
double creation_rule_bound(double t);
int creation_rule_bound_floor(double t);

struct LevelBound {
  std::string level;        // "A", "N", "C"
  int dim = 0;
  double threshold = 0.0;
  bool closed_form = false;  // only dim == 2 has one
  double capacity = 0.0;           // printed-formula points per sphere (dim 2)
  int capacity_floor = 0;
  double rule_capacity = 0.0;      // creation-rule points per circle (dim 2)
  int rule_capacity_floor = 0;
  double count_bound = 0.0;        // capacity scaled by (l_a + l_r) at level A
  std::optional<long> observed;    // final prototype count from a run, if any
};

struct BoundReport {
  LevelBound a, n, c;
  long fixed_params = 0;      // AFEs + FC maps + classifier, biases included
  double param_bound = 0.0;   // fixed + sum of level count bounds * dim
  bool param_bound_available = false;
  std::optional<long> observed_params;
  bool observed_within_rule_bound = true;  // evaluated when observations given
  std::string note;
};

struct ModelShape {
  int d_v = 0, d_a = 16, d_n = 16, d_c = 16;
  int l_a = 22, l_r = 22;
  int l_a_sel = 1, l_r_sel = 1;
  int classes_per_task = 2;
  double t_a = 0.3, t_n = 0.3, t_c = 0.4;
};

BoundReport memory_bound(const ModelShape& shape, const RunRecord* observed = nullptr);

// Minimum Euclidean distance between feature vectors across the two views'
// node sets; brute force with early exit at zero.
double task_distance(const TaskView& view_p, const TaskView& view_q);

// Block matrix W with W * [x(v); x(u_1); ...; x(u_{l_r})] equal to the
// concatenated atomic embeddings [A_1^T x; ...; A_{l_a}^T x; R_1^T x(u_1);
// ...; R_{l_r}^T x(u_{l_r})]. Shape (l_a*d_a + l_r*d_r) x ((l_r+1)*d_v).
Matrix build_w(const AfeBank& bank);

struct TheoremTwoReport {
  bool dims_ok = false;       // l_a*d_a + l_r*d_r >= (l_r+1)*d_v
  bool full_rank = false;     // W column full rank
  int w_rows = 0, w_cols = 0;
  int rank = -1;              // -1 when the eigensolve was skipped
  double lambda_min = 0.0;    // of W^T W, when computed
  double distance = 0.0;      // task distance
  double bound = 0.0;         // sqrt(lambda_min * (l_r + 1)) * distance
  double t_a = 0.0;
  bool verdict = false;
};

TheoremTwoReport check_theorem_two(const AfeBank& bank, const TaskView& view_p,
                                   const TaskView& view_q, double t_a);

void write_bound_report(const BoundReport& r, const std::string& path);
void write_theorem_two_report(const TheoremTwoReport& r, const std::string& path);

}  // namespace hpn
