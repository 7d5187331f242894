#pragma once

#include <string>
#include <vector>

#include "hpn/numerics.hpp"

namespace hpn {

enum class Split { Train, Val, Test };

struct SplitAssignment {
  std::vector<Split> tag;  // one per node
};

// Immutable after load; all modules read it through task views.
struct Graph {
  int num_nodes = 0;
  int feat_dim = 0;
  Matrix features;                    // num_nodes x feat_dim, one row per node
  std::vector<int> labels;            // class index per node
  std::vector<std::vector<int>> adj;  // sorted, deduplicated neighbor ids
  bool undirected = true;

  int num_classes() const;
  Vector feature(int v) const;
};

// Ordered class groups; indices must be disjoint across tasks.
struct TaskSpec {
  std::vector<std::vector<int>> tasks;
};

struct SamplerConfig {
  int hops = 2;
  std::vector<int> per_hop_counts = {5, 7};
};

// Subgraph induced by one task's classes. Node ids are local (0..size-1);
// labels are remapped to within-task indices so every task shares the same
// c-logit output head.
struct TaskView {
  const Graph* graph = nullptr;
  std::vector<int> nodes;             // local -> original node id
  std::vector<int> labels;            // within-task labels, 0..c-1
  std::vector<std::vector<int>> adj;  // local ids, sorted
  std::vector<Split> split;
  std::vector<int> classes;           // original class ids in task order

  int size() const { return static_cast<int>(nodes.size()); }
  int num_classes() const { return static_cast<int>(classes.size()); }
  Vector feature(int local) const { return graph->feature(nodes[static_cast<size_t>(local)]); }
  std::vector<int> nodes_with_split(Split s) const;
};

struct LoadedDataset {
  Graph graph;
  SplitAssignment splits;
};

// CSV ingestion. nodes.csv: `id,label,f0,...`; edges.csv: `src,dst`;
// splits.csv: `id,split` with split in {train,val,test}. Node ids must be
// 0..N-1. Undirected edges are symmetrized, duplicates collapse to one
// adjacency entry, self-loops are kept as given. Malformed rows and dangling
// edge endpoints raise errors naming the offending line.
LoadedDataset load_graph(const std::string& nodes_path, const std::string& edges_path,
                         const std::string& splits_path);

void save_graph(const Graph& g, const SplitAssignment& splits, const std::string& nodes_path,
                const std::string& edges_path, const std::string& splits_path);

TaskSpec load_tasks(const std::string& tasks_json_path);
void save_tasks(const TaskSpec& spec, const std::string& tasks_json_path);

// One view per task; a task with no nodes is an error.
std::vector<TaskView> make_task_subgraphs(const Graph& g, const SplitAssignment& splits,
                                          const TaskSpec& spec);

// The full graph as a single view (labels kept as-is).
TaskView whole_view(const Graph& g, const SplitAssignment& splits);

// Uniform with-replacement draws from the exact-distance-l frontier around v,
// hop by hop, within the view. An empty frontier substitutes v itself, so
// isolated nodes degrade to self-information. Output: hop-1 draws, then
// hop-2 draws, etc. Deterministic given the rng state.
std::vector<int> sample_neighborhood(const TaskView& view, int v_local, const SamplerConfig& cfg,
                                     Rng& rng);

// Class-conditional Gaussian features (class k mean = sep * u_k for
// orthonormal random directions u_k) over a stochastic block model;
// 60/20/20 train/val/test per class.
LoadedDataset gen_synthetic(int classes, int nodes_per_class, int dim, double intra_p,
                            double inter_p, double sep, Rng& rng);

}  // namespace hpn
