#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hpn/protostore.hpp"

using namespace hpn;

namespace {

PrototypeStore store_with(double t, std::vector<Vector> protos) {
  PrototypeStore s(protos.empty() ? 2 : protos[0].dim(), t);
  for (auto& p : protos) s.create({p}, Provenance{1, "test"});
  return s;
}

}  // namespace

TEST_CASE("partition against the threshold") {
  auto s = store_with(0.5, {{1, 0}});
  auto [old1, new1] = s.partition({{1, 0}});
  CHECK(old1 == std::vector<int>{0});

  auto [old2, new2] = s.partition({{0, 1}});
  CHECK(new2 == std::vector<int>{0});

  auto [old3, new3] = s.partition({{0.6, 0.8}});  // sim 0.6 >= 0.5
  CHECK(old3 == std::vector<int>{0});

  auto s2 = store_with(0.7, {{1, 0}});
  auto [old4, new4] = s2.partition({{0.6, 0.8}});  // sim 0.6 < 0.7
  CHECK(new4 == std::vector<int>{0});
}

TEST_CASE("dedup keeps distinctive candidates in order") {
  PrototypeStore s(2, 0.5);
  auto kept = s.dedup_new({{1, 0}, {0.8, 0.6}, {0, 1}});
  REQUIRE(kept.size() == 2);
  CHECK(kept[0][0] == doctest::Approx(1.0));
  CHECK(kept[1][1] == doctest::Approx(1.0));

  auto single = s.dedup_new({{3, 4}});
  REQUIRE(single.size() == 1);
  CHECK(single[0][0] == doctest::Approx(0.6));  // normalized
  CHECK(single[0][1] == doctest::Approx(0.8));

  auto dups = s.dedup_new({{1, 0}, {1, 0}});
  CHECK(dups.size() == 1);

  CHECK(s.zero_norm_skipped() == 0);
  auto with_zero = s.dedup_new({{0, 0}, {1, 0}});
  CHECK(with_zero.size() == 1);
  CHECK(s.zero_norm_skipped() == 1);
}

TEST_CASE("create appends and respects the frozen flag") {
  PrototypeStore s(2, 0.5);
  auto idx = s.create({{1, 0}}, Provenance{1, "node:0"});
  CHECK(idx == std::vector<int>{0});
  CHECK(s.size() == 1);

  auto idx2 = s.create({{0, 1}}, Provenance{2, "struct:1"});
  CHECK(idx2 == std::vector<int>{1});
  CHECK(s.size() == 2);
  CHECK(s.provenance(1).task == 2);

  auto none = s.create({}, Provenance{2, "x"});
  CHECK(none.empty());
  CHECK(s.size() == 2);

  s.set_frozen(true);
  CHECK_THROWS_AS(s.create({{0.5, 0.5}}, Provenance{3, "x"}), std::logic_error);
}

TEST_CASE("match takes the argmax with low-index tie break") {
  auto s = store_with(0.5, {{0, 1}, {1, 0}});
  auto m = s.match({{1, 0}});
  CHECK(m[0].proto == 1);
  CHECK(m[0].sim == doctest::Approx(1.0));

  auto s2 = store_with(0.5, {{1, 0}, {0, 1}});
  auto m2 = s2.match({{0.6, 0.8}});
  CHECK(m2[0].proto == 1);
  CHECK(m2[0].sim == doctest::Approx(0.8));

  // equidistant: indices 0 and 2 both at sim cos(45°)
  const double r = std::sqrt(0.5);
  auto s3 = store_with(0.5, {{1, 0}, {0, -1}, {0, 1}});
  auto m3 = s3.match({{r, r}});
  CHECK(m3[0].proto == 0);

  // below threshold: strict errors, relaxed matches anyway
  auto s4 = store_with(0.9, {{1, 0}});
  CHECK_THROWS_AS(s4.match({{0, 1}}), std::logic_error);
  auto m4 = s4.match({{0, 1}}, /*relaxed=*/true);
  CHECK(m4[0].proto == 0);

  PrototypeStore empty(2, 0.5);
  CHECK_THROWS_AS(empty.match({{1, 0}}), std::logic_error);
}

TEST_CASE("distance loss values and stationarity") {
  auto s = store_with(0.5, {{1, 0}});
  std::vector<Vector> emb_grads;
  std::vector<Vector> proto_grads;

  MatchResult m{{0, 1.0, false}};
  const double l = s.distance_loss(m, {{1, 0}}, &emb_grads, &proto_grads);
  CHECK(l == doctest::Approx(-1.0));
  CHECK(emb_grads[0][0] == doctest::Approx(0.0));  // maximum similarity is stationary
  CHECK(emb_grads[0][1] == doctest::Approx(0.0));

  MatchResult m2{{0, 0.6, false}};
  std::vector<Vector> eg2, pg2;
  const double l2 = s.distance_loss(m2, {{0.6, 0.8}}, &eg2, &pg2);
  CHECK(l2 == doctest::Approx(-0.6));

  // empty old set: all entries flagged new
  MatchResult m3{{0, 0.9, true}};
  std::vector<Vector> eg3, pg3;
  CHECK(s.distance_loss(m3, {{0.9, 0.1}}, &eg3, &pg3) == 0.0);
  CHECK(eg3[0][0] == 0.0);
}

TEST_CASE("distance loss gradients pass finite differences") {
  Rng rng(17);
  PrototypeStore s(3, 0.3);
  Vector p(3), e(3);
  for (int k = 0; k < 3; ++k) {
    p[k] = rng.normal();
    e[k] = rng.normal();
  }
  const double pn = p.norm();
  for (int k = 0; k < 3; ++k) p[k] /= pn;
  s.create({p}, Provenance{1, "t"});

  std::vector<Vector> embs{e};
  MatchResult m{{0, cosine(e, p), false}};
  std::vector<Vector> eg, pg;
  s.distance_loss(m, embs, &eg, &pg);

  auto loss = [&]() { return s.distance_loss(m, embs, nullptr, nullptr); };
  CHECK(finite_diff_check(embs[0].flat(), eg[0].flat(), loss, 1e-6) < 1e-5);
  CHECK(finite_diff_check(s.proto_mutable(0).flat(), pg[0].flat(), loss, 1e-6) < 1e-5);
}

TEST_CASE("renormalize") {
  auto s = store_with(0.5, {{1, 0}});
  s.proto_mutable(0) = Vector{2, 0};
  s.renormalize();
  CHECK(s.proto(0)[0] == doctest::Approx(1.0));

  s.proto_mutable(0) = Vector{3, 4};
  s.renormalize();
  CHECK(s.proto(0)[0] == doctest::Approx(0.6));
  CHECK(s.proto(0)[1] == doctest::Approx(0.8));

  Vector before = s.proto(0);
  s.renormalize();
  CHECK(std::abs(s.proto(0)[0] - before[0]) < 1e-15);

  s.proto_mutable(0) = Vector{0, 0};
  CHECK_THROWS_AS(s.renormalize(), std::runtime_error);
}

TEST_CASE("frozen store gives byte-identical repeat matches") {
  Rng rng(23);
  PrototypeStore s(4, 0.3);
  for (int i = 0; i < 5; ++i) {
    Vector v(4);
    for (int k = 0; k < 4; ++k) v[k] = rng.normal();
    auto kept = s.dedup_new({v});
    s.create(kept, Provenance{1, "t"});
  }
  s.set_frozen(true);
  std::vector<Vector> embs;
  for (int i = 0; i < 8; ++i) {
    Vector v(4);
    for (int k = 0; k < 4; ++k) v[k] = rng.normal();
    embs.push_back(v);
  }
  auto m1 = s.match(embs, true);
  auto m2 = s.match(embs, true);
  for (size_t i = 0; i < m1.size(); ++i) {
    CHECK(m1[i].proto == m2[i].proto);
    CHECK(m1[i].sim == m2[i].sim);  // bitwise
  }
}

TEST_CASE("creation rule packs the circle no denser than the angular bound") {
  // d=2, refinement frozen: the pairwise-creation rule caps the store size at
  // floor(2*pi / arccos(t)). Oracle: exhaustive pairwise angular check.
  const double pi = 3.14159265358979323846;
  for (double t : {0.2, 0.3, 0.5, 0.7}) {
    Rng rng(static_cast<uint64_t>(t * 1000));
    PrototypeStore s(2, t);
    for (int step = 0; step < 3000; ++step) {
      const double ang = 2.0 * pi * rng.uniform01();
      Vector cand{std::cos(ang), std::sin(ang)};
      auto [old_idx, new_idx] = s.partition({cand});
      if (!new_idx.empty()) {
        auto kept = s.dedup_new({cand});
        s.create(kept, Provenance{1, "t"});
      }
    }
    const int bound = static_cast<int>(std::floor(2.0 * pi / std::acos(t)));
    CHECK(s.size() <= bound);
    CHECK(s.size() >= 2);  // sanity: the stream actually created prototypes
    for (int i = 0; i < s.size(); ++i)
      for (int j = i + 1; j < s.size(); ++j) CHECK(cosine(s.proto(i), s.proto(j)) < t);
  }
}

TEST_CASE("store size is non-decreasing and era freezing marks trainability") {
  PrototypeStore s(2, 0.4);
  s.create({{1, 0}}, Provenance{1, "t"});
  CHECK(s.trainable(0));
  s.freeze_existing();
  CHECK_FALSE(s.trainable(0));
  s.create({{0, 1}}, Provenance{2, "t"});
  CHECK(s.trainable(1));
  s.set_frozen(true);
  CHECK_FALSE(s.trainable(1));
}
