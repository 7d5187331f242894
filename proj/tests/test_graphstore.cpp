#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <queue>

#include "hpn/graphstore.hpp"

using namespace hpn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() / ("hpn_gs_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = dir / name;
    std::ofstream f(p);
    f << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

LoadedDataset triangle(TempDir& t) {
  const auto nodes = t.file("nodes.csv",
                            "id,label,f0,f1\n"
                            "0,0,1.0,0.0\n"
                            "1,0,0.0,1.0\n"
                            "2,1,1.0,1.0\n");
  const auto edges = t.file("edges.csv", "src,dst\n0,1\n1,2\n2,0\n");
  const auto splits = t.file("splits.csv", "id,split\n0,train\n1,val\n2,test\n");
  return load_graph(nodes, edges, splits);
}

}  // namespace

TEST_CASE("load triangle graph") {
  TempDir t;
  auto ds = triangle(t);
  CHECK(ds.graph.num_nodes == 3);
  CHECK(ds.graph.feat_dim == 2);
  for (int v = 0; v < 3; ++v) CHECK(ds.graph.adj[v].size() == 2);
  CHECK(ds.graph.labels == std::vector<int>{0, 0, 1});
  CHECK(ds.splits.tag[0] == Split::Train);
  CHECK(ds.splits.tag[2] == Split::Test);
  CHECK(ds.graph.feature(2)[1] == 1.0);
}

TEST_CASE("duplicate edges collapse, reverse duplicates too") {
  TempDir t;
  t.file("nodes.csv", "id,label,f0\n0,0,1\n1,0,2\n");
  t.file("edges.csv", "src,dst\n0,1\n0,1\n1,0\n");
  t.file("splits.csv", "id,split\n0,train\n1,test\n");
  auto ds = load_graph(t.path("nodes.csv"), t.path("edges.csv"), t.path("splits.csv"));
  CHECK(ds.graph.adj[0] == std::vector<int>{1});
  CHECK(ds.graph.adj[1] == std::vector<int>{0});
}

TEST_CASE("self-loops are kept as given") {
  TempDir t;
  t.file("nodes.csv", "id,label,f0\n0,0,1\n1,0,2\n");
  t.file("edges.csv", "src,dst\n0,0\n0,1\n");
  t.file("splits.csv", "id,split\n0,train\n1,test\n");
  auto ds = load_graph(t.path("nodes.csv"), t.path("edges.csv"), t.path("splits.csv"));
  CHECK(ds.graph.adj[0] == std::vector<int>{0, 1});
}

TEST_CASE("malformed rows report the line") {
  TempDir t;
  t.file("nodes.csv", "id,label,f0\n0,0,1\n1,zero,2\n");
  t.file("edges.csv", "src,dst\n");
  t.file("splits.csv", "id,split\n0,train\n1,test\n");
  try {
    load_graph(t.path("nodes.csv"), t.path("edges.csv"), t.path("splits.csv"));
    FAIL("expected parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
}

TEST_CASE("dangling edge endpoint is an error") {
  TempDir t;
  t.file("nodes.csv", "id,label,f0\n0,0,1\n1,0,2\n");
  t.file("edges.csv", "src,dst\n0,5\n");
  t.file("splits.csv", "id,split\n0,train\n1,test\n");
  CHECK_THROWS(load_graph(t.path("nodes.csv"), t.path("edges.csv"), t.path("splits.csv")));
}

TEST_CASE("missing split tag is an error") {
  TempDir t;
  t.file("nodes.csv", "id,label,f0\n0,0,1\n1,0,2\n");
  t.file("edges.csv", "src,dst\n0,1\n");
  t.file("splits.csv", "id,split\n0,train\n");
  CHECK_THROWS(load_graph(t.path("nodes.csv"), t.path("edges.csv"), t.path("splits.csv")));
}

TEST_CASE("task views partition covered nodes and remap labels") {
  Rng rng(5);
  auto ds = gen_synthetic(5, 8, 8, 0.4, 0.05, 2.0, rng);
  TaskSpec spec{{{0, 1}, {2, 3}}};
  auto views = make_task_subgraphs(ds.graph, ds.splits, spec);
  REQUIRE(views.size() == 2);

  int covered = 0;
  for (int v = 0; v < ds.graph.num_nodes; ++v)
    if (ds.graph.labels[v] <= 3) ++covered;
  CHECK(views[0].size() + views[1].size() == covered);

  // class 4 appears in no view
  for (const auto& view : views)
    for (int orig : view.nodes) CHECK(ds.graph.labels[orig] <= 3);

  // labels remapped within task
  for (int i = 0; i < views[1].size(); ++i) {
    const int orig = views[1].nodes[i];
    CHECK(views[1].labels[i] == ds.graph.labels[orig] - 2);
  }

  // edges stay inside the view
  for (const auto& view : views)
    for (int v = 0; v < view.size(); ++v)
      for (int u : view.adj[v]) CHECK(u < view.size());
}

TEST_CASE("task spec validation") {
  Rng rng(5);
  auto ds = gen_synthetic(3, 4, 4, 0.5, 0.1, 1.0, rng);
  CHECK_THROWS(make_task_subgraphs(ds.graph, ds.splits, TaskSpec{{{0, 1}, {1, 2}}}));
  CHECK_THROWS(make_task_subgraphs(ds.graph, ds.splits, TaskSpec{{{0, 7}}}));
}

TEST_CASE("single-class spec on a one-class graph keeps all nodes") {
  Rng rng(9);
  auto ds = gen_synthetic(1, 6, 3, 0.5, 0.0, 1.0, rng);
  auto views = make_task_subgraphs(ds.graph, ds.splits, TaskSpec{{{0}}});
  REQUIRE(views.size() == 1);
  CHECK(views[0].size() == 6);
}

TEST_CASE("a task whose class has no nodes is an error") {
  // class 1 is within range (labels 0 and 2 exist) but empty
  Graph g;
  g.num_nodes = 2;
  g.feat_dim = 1;
  g.features = Matrix(2, 1);
  g.labels = {0, 2};
  g.adj = {{}, {}};
  SplitAssignment sp{{Split::Train, Split::Train}};
  CHECK_THROWS(make_task_subgraphs(g, sp, TaskSpec{{{1}}}));
}

TEST_CASE("Cora export statistics" * doctest::skip(!fs::exists("data/cora/nodes.csv"))) {
  auto ds = load_graph("data/cora/nodes.csv", "data/cora/edges.csv", "data/cora/splits.csv");
  CHECK(ds.graph.num_nodes == 2708);
  CHECK(ds.graph.feat_dim == 1433);
  CHECK(ds.graph.num_classes() == 7);
  long undirected_edges = 0;
  for (const auto& nbrs : ds.graph.adj) undirected_edges += static_cast<long>(nbrs.size());
  // 5429 citation pairs in the export; a handful are duplicates or self-loops
  CHECK(undirected_edges / 2 >= 5200);
  CHECK(undirected_edges / 2 <= 5429);
}

namespace {

Graph tiny_path_graph() {
  // a(0) - b(1) - c(2)
  Graph g;
  g.num_nodes = 3;
  g.feat_dim = 1;
  g.features = Matrix(3, 1);
  g.labels = {0, 0, 0};
  g.adj = {{1}, {0, 2}, {1}};
  return g;
}

}  // namespace

TEST_CASE("neighbor sampling on a path") {
  Graph g = tiny_path_graph();
  SplitAssignment sp{{Split::Train, Split::Train, Split::Train}};
  TaskView view = whole_view(g, sp);
  Rng rng(1);
  auto ids = sample_neighborhood(view, 0, SamplerConfig{2, {1, 1}}, rng);
  CHECK(ids == std::vector<int>{1, 2});
}

TEST_CASE("isolated node substitutes itself") {
  Graph g;
  g.num_nodes = 1;
  g.feat_dim = 1;
  g.features = Matrix(1, 1);
  g.labels = {0};
  g.adj = {{}};
  SplitAssignment sp{{Split::Train}};
  TaskView view = whole_view(g, sp);
  Rng rng(3);
  auto ids = sample_neighborhood(view, 0, SamplerConfig{2, {5, 7}}, rng);
  CHECK(ids.size() == 12);
  for (int id : ids) CHECK(id == 0);
}

TEST_CASE("star sampling is seed-reproducible and hits only leaves") {
  Graph g;
  g.num_nodes = 4;
  g.feat_dim = 1;
  g.features = Matrix(4, 1);
  g.labels = {0, 0, 0, 0};
  g.adj = {{1, 2, 3}, {0}, {0}, {0}};
  SplitAssignment sp{{Split::Train, Split::Train, Split::Train, Split::Train}};
  TaskView view = whole_view(g, sp);

  Rng r1(77), r2(77);
  auto a = sample_neighborhood(view, 0, SamplerConfig{1, {5}}, r1);
  auto b = sample_neighborhood(view, 0, SamplerConfig{1, {5}}, r2);
  CHECK(a == b);
  CHECK(a.size() == 5);
  for (int id : a) CHECK(id >= 1);
}

TEST_CASE("sampled hop-l ids sit at BFS distance exactly l") {
  Rng rng(123);
  auto ds = gen_synthetic(3, 15, 4, 0.15, 0.02, 1.0, rng);
  SplitAssignment sp = ds.splits;
  TaskView view = whole_view(ds.graph, sp);
  const SamplerConfig cfg{2, {4, 4}};

  for (int v = 0; v < view.size(); v += 5) {
    // BFS oracle
    std::vector<int> dist(view.size(), -1);
    std::queue<int> q;
    q.push(v);
    dist[v] = 0;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int w : view.adj[u])
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
    }
    Rng r = rng.fork(static_cast<uint64_t>(v));
    auto ids = sample_neighborhood(view, v, cfg, r);
    REQUIRE(ids.size() == 8);
    for (int k = 0; k < 8; ++k) {
      const int hop = k < 4 ? 1 : 2;
      if (ids[k] == v) {
        // substitution only fires when the frontier is empty
        bool any_at_hop = false;
        for (int w = 0; w < view.size(); ++w) any_at_hop |= (dist[w] == hop);
        CHECK_FALSE(any_at_hop);
      } else {
        CHECK(dist[ids[k]] == hop);
      }
    }
  }
}

TEST_CASE("synthetic generator basics") {
  Rng rng(2024);
  auto ds = gen_synthetic(2, 10, 4, 0.6, 0.0, 3.0, rng);
  CHECK(ds.graph.num_nodes == 20);

  // inter_p = 0: no cross-class edge
  for (int v = 0; v < 20; ++v)
    for (int u : ds.graph.adj[v]) CHECK(ds.graph.labels[u] == ds.graph.labels[v]);

  // splits 60/20/20 per class
  int n_train = 0, n_val = 0, n_test = 0;
  for (int v = 0; v < 10; ++v) {
    if (ds.splits.tag[v] == Split::Train) ++n_train;
    if (ds.splits.tag[v] == Split::Val) ++n_val;
    if (ds.splits.tag[v] == Split::Test) ++n_test;
  }
  CHECK(n_train == 6);
  CHECK(n_val == 2);
  CHECK(n_test == 2);

  CHECK_THROWS(gen_synthetic(5, 4, 3, 0.5, 0.1, 1.0, rng));
}

TEST_CASE("sep feature scaling behaves") {
  Rng rng(1);
  auto far = gen_synthetic(2, 30, 8, 0.0, 0.0, 10.0, rng);
  Rng rng2(1);
  auto none = gen_synthetic(2, 30, 8, 0.0, 0.0, 0.0, rng2);

  auto class_mean_dist = [](const Graph& g) {
    Vector m0(g.feat_dim), m1(g.feat_dim);
    int c0 = 0, c1 = 0;
    for (int v = 0; v < g.num_nodes; ++v) {
      for (int c = 0; c < g.feat_dim; ++c) {
        if (g.labels[v] == 0) m0[c] += g.features.at(v, c);
        else m1[c] += g.features.at(v, c);
      }
      (g.labels[v] == 0 ? c0 : c1)++;
    }
    double s = 0;
    for (int c = 0; c < g.feat_dim; ++c) {
      const double d = m0[c] / c0 - m1[c] / c1;
      s += d * d;
    }
    return std::sqrt(s);
  };
  CHECK(class_mean_dist(far.graph) > 10.0);
  CHECK(class_mean_dist(none.graph) < 2.0);
}

TEST_CASE("save/load round trip is the identity") {
  TempDir t;
  Rng rng(31);
  auto ds = gen_synthetic(3, 7, 5, 0.3, 0.05, 2.5, rng);
  save_graph(ds.graph, ds.splits, t.path("n.csv"), t.path("e.csv"), t.path("s.csv"));
  auto back = load_graph(t.path("n.csv"), t.path("e.csv"), t.path("s.csv"));

  CHECK(back.graph.num_nodes == ds.graph.num_nodes);
  CHECK(back.graph.labels == ds.graph.labels);
  CHECK(back.graph.adj == ds.graph.adj);
  CHECK(back.graph.features.data == ds.graph.features.data);  // bit-exact
  CHECK(back.splits.tag == ds.splits.tag);
}

TEST_CASE("tasks.json round trip") {
  TempDir t;
  TaskSpec spec{{{0, 1}, {2, 3}, {4, 5}}};
  save_tasks(spec, t.path("tasks.json"));
  auto back = load_tasks(t.path("tasks.json"));
  CHECK(back.tasks == spec.tasks);
}
