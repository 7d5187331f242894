#include "hpn/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace hpn {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<int>(), j.at("cols").get<int>());
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != static_cast<size_t>(m.rows) * static_cast<size_t>(m.cols))
    throw std::runtime_error("checkpoint: matrix payload size mismatch");
  return m;
}

json layer_to_json(const LinearLayer& l) {
  return json{{"w", matrix_to_json(l.W)}, {"b", l.b.data}};
}

LinearLayer layer_from_json(const json& j) {
  LinearLayer l;
  l.W = matrix_from_json(j.at("w"));
  l.b.data = j.at("b").get<std::vector<double>>();
  return l;
}

json store_to_json(const PrototypeStore& s) {
  json protos = json::array();
  for (int i = 0; i < s.size(); ++i) {
    protos.push_back(json{{"v", s.proto(i).data},
                          {"task", s.provenance(i).task},
                          {"tag", s.provenance(i).tag}});
  }
  return json{{"dim", s.dim()},
              {"threshold", s.threshold()},
              {"frozen", s.frozen()},
              {"trainable_from", s.trainable_from()},
              {"protos", protos}};
}

PrototypeStore store_from_json(const json& j) {
  PrototypeStore s(j.at("dim").get<int>(), j.at("threshold").get<double>());
  for (const auto& pj : j.at("protos")) {
    Vector v;
    v.data = pj.at("v").get<std::vector<double>>();
    s.create({v}, Provenance{pj.at("task").get<int>(), pj.at("tag").get<std::string>()});
  }
  const int tf = j.at("trainable_from").get<int>();
  if (tf > 0) {
    if (tf > s.size()) throw std::runtime_error("checkpoint: trainable_from out of range");
    PrototypeStore rebuilt(s.dim(), s.threshold());
    for (int i = 0; i < tf; ++i) rebuilt.create({s.proto(i)}, s.provenance(i));
    rebuilt.freeze_existing();
    for (int i = tf; i < s.size(); ++i) rebuilt.create({s.proto(i)}, s.provenance(i));
    s = rebuilt;
  }
  s.set_frozen(j.at("frozen").get<bool>());
  return s;
}

}  // namespace

std::string checkpoint_to_json(const HpnModel& m, std::uint64_t seed) {
  json j;
  j["version"] = 1;
  j["seed"] = seed;
  j["alpha"] = m.alpha;
  j["beta"] = m.beta;
  j["dims"] = json{{"d_v", m.dims.d_v},       {"d_a", m.dims.d_a},
                   {"d_n", m.dims.d_n},       {"d_c", m.dims.d_c},
                   {"l_a", m.dims.l_a},       {"l_r", m.dims.l_r},
                   {"l_a_sel", m.dims.l_a_sel}, {"l_r_sel", m.dims.l_r_sel},
                   {"classes_per_task", m.dims.classes_per_task},
                   {"t_a", m.dims.t_a},       {"t_n", m.dims.t_n},
                   {"t_c", m.dims.t_c}};
  j["sampler"] = json{{"hops", m.sampler.hops}, {"per_hop_counts", m.sampler.per_hop_counts}};
  json node = json::array(), strct = json::array();
  for (const Matrix& a : m.bank.node_afes) node.push_back(matrix_to_json(a));
  for (const Matrix& r : m.bank.struct_afes) strct.push_back(matrix_to_json(r));
  j["bank"] = json{{"node", node}, {"struct", strct}};
  j["fc_a2n"] = layer_to_json(m.fc_a2n);
  j["fc_n2c"] = layer_to_json(m.fc_n2c);
  j["classifier"] = layer_to_json(m.classifier);
  j["stores"] = json{{"a", store_to_json(m.a_store)},
                     {"n", store_to_json(m.n_store)},
                     {"c", store_to_json(m.c_store)}};
  return j.dump();
}

LoadedCheckpoint checkpoint_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("version").get<int>() != 1) throw std::runtime_error("checkpoint: unknown version");

  LoadedCheckpoint out;
  HpnModel& m = out.model;
  out.seed = j.at("seed").get<std::uint64_t>();
  m.alpha = j.at("alpha").get<double>();
  m.beta = j.at("beta").get<double>();

  const json& d = j.at("dims");
  m.dims.d_v = d.at("d_v").get<int>();
  m.dims.d_a = d.at("d_a").get<int>();
  m.dims.d_n = d.at("d_n").get<int>();
  m.dims.d_c = d.at("d_c").get<int>();
  m.dims.l_a = d.at("l_a").get<int>();
  m.dims.l_r = d.at("l_r").get<int>();
  m.dims.l_a_sel = d.at("l_a_sel").get<int>();
  m.dims.l_r_sel = d.at("l_r_sel").get<int>();
  m.dims.classes_per_task = d.at("classes_per_task").get<int>();
  m.dims.t_a = d.at("t_a").get<double>();
  m.dims.t_n = d.at("t_n").get<double>();
  m.dims.t_c = d.at("t_c").get<double>();

  m.sampler.hops = j.at("sampler").at("hops").get<int>();
  m.sampler.per_hop_counts = j.at("sampler").at("per_hop_counts").get<std::vector<int>>();

  m.bank.d_v = m.dims.d_v;
  m.bank.d_a = m.dims.d_a;
  for (const auto& aj : j.at("bank").at("node")) m.bank.node_afes.push_back(matrix_from_json(aj));
  for (const auto& rj : j.at("bank").at("struct")) m.bank.struct_afes.push_back(matrix_from_json(rj));

  m.fc_a2n = layer_from_json(j.at("fc_a2n"));
  m.fc_n2c = layer_from_json(j.at("fc_n2c"));
  m.classifier = layer_from_json(j.at("classifier"));
  m.a_store = store_from_json(j.at("stores").at("a"));
  m.n_store = store_from_json(j.at("stores").at("n"));
  m.c_store = store_from_json(j.at("stores").at("c"));

  m.validate();
  return out;
}

void save_checkpoint(const HpnModel& m, std::uint64_t seed, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << checkpoint_to_json(m, seed) << "\n";
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return checkpoint_from_json(text);
}

}  // namespace hpn
