#include "hpn/graphstore.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace hpn {

int Graph::num_classes() const {
  int mx = -1;
  for (int l : labels) mx = std::max(mx, l);
  return mx + 1;
}

Vector Graph::feature(int v) const {
  Vector x(feat_dim);
  for (int c = 0; c < feat_dim; ++c) x[c] = features.at(v, c);
  return x;
}

std::vector<int> TaskView::nodes_with_split(Split s) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (split[static_cast<size_t>(i)] == s) out.push_back(i);
  return out;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

long parse_long(const std::string& s, const std::string& path, int line) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') parse_fail(path, line, "expected integer, got '" + s + "'");
  return v;
}

double parse_double(const std::string& s, const std::string& path, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') parse_fail(path, line, "expected number, got '" + s + "'");
  return v;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return f;
}

// Strips a trailing \r so CRLF exports parse cleanly.
bool get_line(std::ifstream& f, std::string& line) {
  if (!std::getline(f, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

LoadedDataset load_graph(const std::string& nodes_path, const std::string& edges_path,
                         const std::string& splits_path) {
  LoadedDataset ds;
  Graph& g = ds.graph;

  // nodes.csv
  {
    std::ifstream f = open_or_throw(nodes_path);
    std::string line;
    if (!get_line(f, line)) parse_fail(nodes_path, 1, "missing header");
    const auto header = split_csv(line);
    if (header.size() < 3 || header[0] != "id" || header[1] != "label")
      parse_fail(nodes_path, 1, "expected header id,label,f0,...");
    const int d = static_cast<int>(header.size()) - 2;

    struct Row {
      int id;
      int label;
      std::vector<double> feat;
    };
    std::vector<Row> rows;
    int lineno = 1;
    while (get_line(f, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto cells = split_csv(line);
      if (static_cast<int>(cells.size()) != d + 2)
        parse_fail(nodes_path, lineno,
                   "expected " + std::to_string(d + 2) + " fields, got " +
                       std::to_string(cells.size()));
      Row r;
      r.id = static_cast<int>(parse_long(cells[0], nodes_path, lineno));
      r.label = static_cast<int>(parse_long(cells[1], nodes_path, lineno));
      if (r.label < 0) parse_fail(nodes_path, lineno, "negative label");
      r.feat.resize(static_cast<size_t>(d));
      for (int c = 0; c < d; ++c)
        r.feat[static_cast<size_t>(c)] = parse_double(cells[static_cast<size_t>(c) + 2], nodes_path, lineno);
      rows.push_back(std::move(r));
    }
    const int n = static_cast<int>(rows.size());
    if (n == 0) throw std::runtime_error(nodes_path + ": no nodes");
    std::vector<bool> seen(static_cast<size_t>(n), false);
    g.num_nodes = n;
    g.feat_dim = d;
    g.features = Matrix(n, d);
    g.labels.assign(static_cast<size_t>(n), 0);
    for (const Row& r : rows) {
      if (r.id < 0 || r.id >= n || seen[static_cast<size_t>(r.id)])
        throw std::runtime_error(nodes_path + ": node ids must be 0..N-1, each exactly once (id " +
                                 std::to_string(r.id) + ")");
      seen[static_cast<size_t>(r.id)] = true;
      g.labels[static_cast<size_t>(r.id)] = r.label;
      for (int c = 0; c < d; ++c) g.features.at(r.id, c) = r.feat[static_cast<size_t>(c)];
    }
    if (!all_finite(g.features.flat())) throw std::runtime_error(nodes_path + ": non-finite feature");
  }

  // edges.csv
  {
    std::ifstream f = open_or_throw(edges_path);
    std::string line;
    if (!get_line(f, line)) parse_fail(edges_path, 1, "missing header");
    if (line != "src,dst") parse_fail(edges_path, 1, "expected header src,dst");
    std::vector<std::set<int>> nbr(static_cast<size_t>(g.num_nodes));
    int lineno = 1;
    while (get_line(f, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto cells = split_csv(line);
      if (cells.size() != 2) parse_fail(edges_path, lineno, "expected src,dst");
      const int s = static_cast<int>(parse_long(cells[0], edges_path, lineno));
      const int t = static_cast<int>(parse_long(cells[1], edges_path, lineno));
      if (s < 0 || s >= g.num_nodes || t < 0 || t >= g.num_nodes)
        parse_fail(edges_path, lineno, "edge endpoint out of range");
      nbr[static_cast<size_t>(s)].insert(t);
      nbr[static_cast<size_t>(t)].insert(s);  // undirected: symmetrize
    }
    g.adj.resize(static_cast<size_t>(g.num_nodes));
    for (int v = 0; v < g.num_nodes; ++v)
      g.adj[static_cast<size_t>(v)].assign(nbr[static_cast<size_t>(v)].begin(),
                                           nbr[static_cast<size_t>(v)].end());
    g.undirected = true;
  }

  // splits.csv
  {
    std::ifstream f = open_or_throw(splits_path);
    std::string line;
    if (!get_line(f, line)) parse_fail(splits_path, 1, "missing header");
    if (line != "id,split") parse_fail(splits_path, 1, "expected header id,split");
    ds.splits.tag.assign(static_cast<size_t>(g.num_nodes), Split::Train);
    std::vector<bool> seen(static_cast<size_t>(g.num_nodes), false);
    int lineno = 1;
    while (get_line(f, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto cells = split_csv(line);
      if (cells.size() != 2) parse_fail(splits_path, lineno, "expected id,split");
      const int id = static_cast<int>(parse_long(cells[0], splits_path, lineno));
      if (id < 0 || id >= g.num_nodes) parse_fail(splits_path, lineno, "node id out of range");
      if (seen[static_cast<size_t>(id)]) parse_fail(splits_path, lineno, "node tagged twice");
      seen[static_cast<size_t>(id)] = true;
      Split s;
      if (cells[1] == "train") s = Split::Train;
      else if (cells[1] == "val") s = Split::Val;
      else if (cells[1] == "test") s = Split::Test;
      else parse_fail(splits_path, lineno, "split must be train|val|test, got '" + cells[1] + "'");
      ds.splits.tag[static_cast<size_t>(id)] = s;
    }
    for (int v = 0; v < g.num_nodes; ++v)
      if (!seen[static_cast<size_t>(v)])
        throw std::runtime_error(splits_path + ": node " + std::to_string(v) + " has no split tag");
  }

  return ds;
}

void save_graph(const Graph& g, const SplitAssignment& splits, const std::string& nodes_path,
                const std::string& edges_path, const std::string& splits_path) {
  {
    std::ofstream f(nodes_path);
    if (!f) throw std::runtime_error("cannot write " + nodes_path);
    f << "id,label";
    for (int c = 0; c < g.feat_dim; ++c) f << ",f" << c;
    f << "\n";
    char buf[40];
    for (int v = 0; v < g.num_nodes; ++v) {
      f << v << ',' << g.labels[static_cast<size_t>(v)];
      for (int c = 0; c < g.feat_dim; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", g.features.at(v, c));
        f << ',' << buf;
      }
      f << "\n";
    }
  }
  {
    std::ofstream f(edges_path);
    if (!f) throw std::runtime_error("cannot write " + edges_path);
    f << "src,dst\n";
    for (int v = 0; v < g.num_nodes; ++v)
      for (int u : g.adj[static_cast<size_t>(v)])
        if (u >= v) f << v << ',' << u << "\n";  // each undirected edge once
  }
  {
    std::ofstream f(splits_path);
    if (!f) throw std::runtime_error("cannot write " + splits_path);
    f << "id,split\n";
    for (int v = 0; v < g.num_nodes; ++v) {
      const char* s = "train";
      if (splits.tag[static_cast<size_t>(v)] == Split::Val) s = "val";
      if (splits.tag[static_cast<size_t>(v)] == Split::Test) s = "test";
      f << v << ',' << s << "\n";
    }
  }
}

TaskSpec load_tasks(const std::string& tasks_json_path) {
  std::ifstream f = open_or_throw(tasks_json_path);
  nlohmann::json j;
  f >> j;
  if (!j.contains("tasks") || !j["tasks"].is_array())
    throw std::runtime_error(tasks_json_path + ": expected {\"tasks\": [[...],...]}");
  TaskSpec spec;
  for (const auto& t : j["tasks"]) spec.tasks.push_back(t.get<std::vector<int>>());
  return spec;
}

void save_tasks(const TaskSpec& spec, const std::string& tasks_json_path) {
  nlohmann::json j;
  j["tasks"] = spec.tasks;
  std::ofstream f(tasks_json_path);
  if (!f) throw std::runtime_error("cannot write " + tasks_json_path);
  f << j.dump() << "\n";
}

std::vector<TaskView> make_task_subgraphs(const Graph& g, const SplitAssignment& splits,
                                          const TaskSpec& spec) {
  std::unordered_set<int> used;
  const int nc = g.num_classes();
  for (const auto& task : spec.tasks)
    for (int c : task) {
      if (!used.insert(c).second)
        throw std::invalid_argument("task spec: class " + std::to_string(c) +
                                    " appears in more than one task");
      if (c < 0 || c >= nc)
        throw std::invalid_argument("task spec: class " + std::to_string(c) + " not in graph");
    }

  std::vector<TaskView> views;
  for (size_t ti = 0; ti < spec.tasks.size(); ++ti) {
    const auto& classes = spec.tasks[ti];
    std::vector<int> class_rank(static_cast<size_t>(nc), -1);
    for (size_t k = 0; k < classes.size(); ++k)
      class_rank[static_cast<size_t>(classes[k])] = static_cast<int>(k);

    TaskView view;
    view.graph = &g;
    view.classes = classes;
    std::vector<int> local_of(static_cast<size_t>(g.num_nodes), -1);
    for (int v = 0; v < g.num_nodes; ++v) {
      const int rank = class_rank[static_cast<size_t>(g.labels[static_cast<size_t>(v)])];
      if (rank < 0) continue;
      local_of[static_cast<size_t>(v)] = view.size();
      view.nodes.push_back(v);
      view.labels.push_back(rank);
      view.split.push_back(splits.tag[static_cast<size_t>(v)]);
    }
    if (view.nodes.empty())
      throw std::invalid_argument("task " + std::to_string(ti + 1) + " has no nodes");
    view.adj.resize(view.nodes.size());
    for (int local = 0; local < view.size(); ++local) {
      const int orig = view.nodes[static_cast<size_t>(local)];
      for (int u : g.adj[static_cast<size_t>(orig)]) {
        const int lu = local_of[static_cast<size_t>(u)];
        if (lu >= 0) view.adj[static_cast<size_t>(local)].push_back(lu);
      }
    }
    views.push_back(std::move(view));
  }
  return views;
}

TaskView whole_view(const Graph& g, const SplitAssignment& splits) {
  TaskView view;
  view.graph = &g;
  const int nc = g.num_classes();
  for (int c = 0; c < nc; ++c) view.classes.push_back(c);
  view.nodes.resize(static_cast<size_t>(g.num_nodes));
  for (int v = 0; v < g.num_nodes; ++v) view.nodes[static_cast<size_t>(v)] = v;
  view.labels = g.labels;
  view.adj = g.adj;
  view.split = splits.tag;
  return view;
}

std::vector<int> sample_neighborhood(const TaskView& view, int v_local, const SamplerConfig& cfg,
                                     Rng& rng) {
  if (v_local < 0 || v_local >= view.size())
    throw std::out_of_range("sample_neighborhood: node out of range");
  if (cfg.hops < 1 || static_cast<int>(cfg.per_hop_counts.size()) != cfg.hops)
    throw std::invalid_argument("sample_neighborhood: per_hop_counts length must equal hops");

  // BFS distances up to cfg.hops; frontier l = nodes at distance exactly l.
  std::vector<int> dist(static_cast<size_t>(view.size()), -1);
  dist[static_cast<size_t>(v_local)] = 0;
  std::vector<std::vector<int>> frontier(static_cast<size_t>(cfg.hops) + 1);
  frontier[0] = {v_local};
  for (int l = 1; l <= cfg.hops; ++l) {
    for (int u : frontier[static_cast<size_t>(l - 1)]) {
      for (int w : view.adj[static_cast<size_t>(u)]) {
        if (dist[static_cast<size_t>(w)] < 0) {
          dist[static_cast<size_t>(w)] = l;
          frontier[static_cast<size_t>(l)].push_back(w);
        }
      }
    }
    std::sort(frontier[static_cast<size_t>(l)].begin(), frontier[static_cast<size_t>(l)].end());
  }

  std::vector<int> out;
  for (int l = 1; l <= cfg.hops; ++l) {
    const auto& fr = frontier[static_cast<size_t>(l)];
    const int count = cfg.per_hop_counts[static_cast<size_t>(l - 1)];
    if (count < 0) throw std::invalid_argument("sample_neighborhood: negative per-hop count");
    for (int k = 0; k < count; ++k) {
      if (fr.empty())
        out.push_back(v_local);
      else
        out.push_back(fr[static_cast<size_t>(rng.uniform_int(static_cast<int>(fr.size())))]);
    }
  }
  return out;
}

LoadedDataset gen_synthetic(int classes, int nodes_per_class, int dim, double intra_p,
                            double inter_p, double sep, Rng& rng) {
  if (classes < 1 || nodes_per_class < 1) throw std::invalid_argument("gen_synthetic: counts must be >= 1");
  if (intra_p < 0 || intra_p > 1 || inter_p < 0 || inter_p > 1)
    throw std::invalid_argument("gen_synthetic: probabilities must lie in [0,1]");
  if (dim < classes)
    throw std::invalid_argument("gen_synthetic: dim must be >= classes for orthogonal class means");

  // Orthonormal class directions via Gram-Schmidt on Gaussian draws.
  std::vector<Vector> dirs;
  for (int k = 0; k < classes; ++k) {
    Vector u(dim);
    while (true) {
      for (int c = 0; c < dim; ++c) u[c] = rng.normal();
      for (const Vector& prev : dirs) {
        const double d = u.dot(prev);
        for (int c = 0; c < dim; ++c) u[c] -= d * prev[c];
      }
      const double n = u.norm();
      if (n > 1e-6) {
        for (int c = 0; c < dim; ++c) u[c] /= n;
        break;
      }
    }
    dirs.push_back(u);
  }

  const int n = classes * nodes_per_class;
  LoadedDataset ds;
  Graph& g = ds.graph;
  g.num_nodes = n;
  g.feat_dim = dim;
  g.features = Matrix(n, dim);
  g.labels.resize(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) {
    const int k = v / nodes_per_class;
    g.labels[static_cast<size_t>(v)] = k;
    for (int c = 0; c < dim; ++c)
      g.features.at(v, c) = sep * dirs[static_cast<size_t>(k)][c] + rng.normal();
  }

  g.adj.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool same = g.labels[static_cast<size_t>(i)] == g.labels[static_cast<size_t>(j)];
      const double p = same ? intra_p : inter_p;
      if (rng.uniform01() < p) {
        g.adj[static_cast<size_t>(i)].push_back(j);
        g.adj[static_cast<size_t>(j)].push_back(i);
      }
    }
  }
  for (auto& nbrs : g.adj) std::sort(nbrs.begin(), nbrs.end());

  ds.splits.tag.resize(static_cast<size_t>(n));
  for (int k = 0; k < classes; ++k) {
    const int base = k * nodes_per_class;
    const int n_train = (nodes_per_class * 6) / 10;
    const int n_val = (nodes_per_class * 2) / 10;
    for (int i = 0; i < nodes_per_class; ++i) {
      Split s = Split::Test;
      if (i < n_train) s = Split::Train;
      else if (i < n_train + n_val) s = Split::Val;
      ds.splits.tag[static_cast<size_t>(base + i)] = s;
    }
  }
  return ds;
}

}  // namespace hpn
