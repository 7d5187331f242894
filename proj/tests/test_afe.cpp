#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hpn/afe.hpp"

using namespace hpn;

namespace {

AfeBank bank_from(std::vector<Matrix> node, std::vector<Matrix> strct) {
  AfeBank b;
  b.d_v = node[0].rows;
  b.d_a = node[0].cols;
  b.node_afes = std::move(node);
  b.struct_afes = std::move(strct);
  b.validate();
  return b;
}

}  // namespace

TEST_CASE("atomic embeddings") {
  auto b = bank_from({Matrix::identity(2)}, {Matrix::identity(2)});
  auto e = atomic_embeddings(b, {1, 0}, {});
  REQUIRE(e.node_embs.size() == 1);
  CHECK(e.node_embs[0].data == std::vector<double>{1.0, 0.0});
  CHECK(e.struct_embs[0].empty());

  auto b2 = bank_from({Matrix::identity(2), Matrix::from_rows({{0, 1}, {1, 0}})},
                      {Matrix::identity(2)});
  auto e2 = atomic_embeddings(b2, {1, 2}, {{3, 4}});
  CHECK(e2.node_embs[0].data == std::vector<double>{1.0, 2.0});
  CHECK(e2.node_embs[1].data == std::vector<double>{2.0, 1.0});
  CHECK(e2.struct_embs[0][0].data == std::vector<double>{3.0, 4.0});

  auto e3 = atomic_embeddings(b, {0, 0}, {});
  CHECK(e3.node_embs[0].norm() == 0.0);

  CHECK_THROWS(atomic_embeddings(b, {1, 0, 0}, {}));
}

TEST_CASE("divergence loss worked values") {
  // Frobenius-orthogonal pair -> 0
  auto b = bank_from({Matrix::from_rows({{1, 0}, {0, 0}}), Matrix::from_rows({{0, 0}, {0, 1}})},
                     {Matrix::identity(2)});
  CHECK(divergence_loss(b) == doctest::Approx(0.0));

  // both identity: <I,I> = 2, both ordered pairs -> 2 * 2^2 = 8
  auto b2 = bank_from({Matrix::identity(2), Matrix::identity(2)}, {Matrix::identity(2)});
  CHECK(divergence_loss(b2) == doctest::Approx(8.0));

  // single AFE of each kind: empty sums
  auto b3 = bank_from({Matrix::identity(2)}, {Matrix::identity(2)});
  CHECK(divergence_loss(b3) == doctest::Approx(0.0));
}

TEST_CASE("divergence loss is nonnegative") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    AfeBank b(3, 2, 3, 2, 0.8, rng);
    CHECK(divergence_loss(b) >= 0.0);
  }
}

TEST_CASE("divergence gradients pass finite differences") {
  Rng rng(41);
  AfeBank b(2, 2, 2, 2, 0.7, rng);
  std::vector<Matrix> ng(2, Matrix(2, 2)), sg(2, Matrix(2, 2));
  divergence_loss(b, &ng, &sg);
  auto loss = [&]() { return divergence_loss(b); };
  for (int i = 0; i < 2; ++i) {
    CHECK(finite_diff_check(b.node_afes[i].flat(), ng[i].flat(), loss, 1e-5) < 1e-5);
    CHECK(finite_diff_check(b.struct_afes[i].flat(), sg[i].flat(), loss, 1e-5) < 1e-5);
  }

  // the two-identity bank from the worked example, checked end to end
  auto b2 = bank_from({Matrix::identity(2), Matrix::identity(2)}, {Matrix::identity(2)});
  std::vector<Matrix> ng2(2, Matrix(2, 2)), sg2(1, Matrix(2, 2));
  divergence_loss(b2, &ng2, &sg2);
  auto loss2 = [&]() { return divergence_loss(b2); };
  CHECK(finite_diff_check(b2.node_afes[0].flat(), ng2[0].flat(), loss2, 1e-5) < 1e-6);
}

TEST_CASE("AFE selection ranks by SimMAX") {
  // two node AFEs whose embeddings of x=[1,0] are [1,0] and [0,1]
  auto b = bank_from({Matrix::from_rows({{1, 0}, {0, 0}}), Matrix::from_rows({{0, 1}, {0, 0}})},
                     {Matrix::identity(2)});
  PrototypeStore store(2, 0.3);
  store.create({{0.9486832980505138, 0.31622776601683794}}, Provenance{1, "t"});  // ~[3,1]/sqrt(10)

  auto embs = atomic_embeddings(b, {1, 0}, {{1, 0}});
  auto sel = select_afes(b, embs, store, 1, 1);
  CHECK(sel.node_simmax[0] > sel.node_simmax[1]);
  CHECK(sel.node_idx == std::vector<int>{0});

  for (double s : sel.node_simmax) {
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("selection falls back to index order on an empty store") {
  Rng rng(6);
  AfeBank b(3, 2, 3, 2, 0.5, rng);
  PrototypeStore store(2, 0.3);
  auto embs = atomic_embeddings(b, {1, 0.5, -0.2}, {{0.3, 0.1, 0.9}});
  auto sel = select_afes(b, embs, store, 2, 1);
  CHECK(sel.node_idx == std::vector<int>{0, 1});
  CHECK(sel.struct_idx == std::vector<int>{0});
}

TEST_CASE("selection tie-break and store-permutation invariance") {
  // both node AFEs produce the same embedding -> tie -> ascending index
  auto b = bank_from({Matrix::identity(2), Matrix::identity(2)},
                     {Matrix::identity(2), Matrix::from_rows({{0, 1}, {1, 0}})});
  PrototypeStore fwd(2, 0.3), rev(2, 0.3);
  fwd.create({{1, 0}}, Provenance{1, "a"});
  fwd.create({{0, 1}}, Provenance{1, "b"});
  rev.create({{0, 1}}, Provenance{1, "b"});
  rev.create({{1, 0}}, Provenance{1, "a"});

  auto embs = atomic_embeddings(b, {0.8, 0.6}, {{0.6, 0.8}, {1, 0}});
  auto s1 = select_afes(b, embs, fwd, 1, 2);
  auto s2 = select_afes(b, embs, rev, 1, 2);
  CHECK(s1.node_idx == std::vector<int>{0});  // tie between equal scores -> index 0
  CHECK(s1.node_idx == s2.node_idx);
  CHECK(s1.struct_idx == s2.struct_idx);
  CHECK(s1.node_simmax == s2.node_simmax);
}
