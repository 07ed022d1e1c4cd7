#include <algorithm>
#include <array>
#include <deque>
#include <cmath>
#include <random>

#include "doctest.h"
#include "exstream/buffer_manager.hpp"
#include "exstream/clustream.hpp"
#include "exstream/errors.hpp"
#include "exstream/hpstream.hpp"
#include "exstream/kmeans.hpp"
#include "exstream/prototype_buffers.hpp"
#include "oracles/oracles.hpp"

using namespace exstream;

namespace {

using V = std::vector<double>;

const Strategy kAll[] = {Strategy::kExStream,  Strategy::kOnlineKMeans, Strategy::kCluStream,
                         Strategy::kHPStream,  Strategy::kReservoir,    Strategy::kQueue,
                         Strategy::kFull};

std::vector<oracle::Proto> as_oracle(const std::vector<Prototype>& ps) {
  std::vector<oracle::Proto> out;
  for (const auto& p : ps) out.push_back({p.vector, static_cast<double>(p.count)});
  return out;
}

const MicroCluster* find_cluster(const CluStreamBuffer& b, double centroid, double tol = 1e-9) {
  for (const auto& mc : b.clusters())
    if (std::abs(mc.centroid()[0] - centroid) < tol) return &mc;
  return nullptr;
}

}  // namespace

TEST_CASE("ExStream merges the closest pair and stores the new point") {
  // Fill {[0,0],[0,0],[3,3]}, then force the duplicate pair to merge into ([0,0], 2).
  ExStreamBuffer b(2);
  b.insert(V{0, 0});
  b.insert(V{0, 0});
  b.insert(V{3, 3});
  REQUIRE(b.prototypes() == std::vector<Prototype>{{{0, 0}, 2}, {{3, 3}, 1}});
  b.insert(V{10, 10});
  CHECK(b.prototypes() == std::vector<Prototype>{{{1, 1}, 3}, {{10, 10}, 1}});
}

TEST_CASE("ExStream scalar stream 0, 2, 10 with b=2") {
  ExStreamBuffer b(2);
  std::vector<oracle::Proto> sim;
  for (double x : {0.0, 2.0, 10.0}) {
    b.insert(V{x});
    sim = oracle::exstream_step(sim, 2, {x});
  }
  CHECK(b.prototypes() == std::vector<Prototype>{{{1}, 2}, {{10}, 1}});
  REQUIRE(sim.size() == 2);
  CHECK(sim[0].w == V{1});
  CHECK(sim[0].c == 2);
}

TEST_CASE("ExStream merging equal vectors keeps the vector and sums counts") {
  ExStreamBuffer b(2);
  b.insert(V{4, -1});
  b.insert(V{4, -1});
  b.insert(V{9, 9});
  CHECK(b.prototypes()[0] == Prototype{{4, -1}, 2});
}

TEST_CASE("ExStream ties go to the lowest pair") {
  ExStreamBuffer b(3);
  for (double x : {0.0, 1.0, 2.0, 50.0}) b.insert(V{x});
  // (0,1) and (1,2) are both at distance 1; slot pair (0,1) wins.
  CHECK(b.prototypes() == std::vector<Prototype>{{{0.5}, 2}, {{50}, 1}, {{2}, 1}});
}

TEST_CASE("ExStream stores verbatim while the stream fits") {
  ExStreamBuffer b(8);
  for (int i = 0; i < 8; ++i) b.insert(V{static_cast<double>(i * i)});
  for (int i = 0; i < 8; ++i) CHECK(b.prototypes()[i] == Prototype{{static_cast<double>(i * i)}, 1});
}

TEST_CASE("ExStream with capacity 1 keeps the running mean") {
  ExStreamBuffer b(1);
  for (double x : {1.0, 2.0, 3.0, 4.0}) b.insert(V{x});
  CHECK(b.prototypes() == std::vector<Prototype>{{{2.5}, 4}});
}

TEST_CASE("ExStream and online k-means follow the step oracles") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + trial % 4;
    const std::size_t cap = 1 + (trial / 4) % 4;
    ExStreamBuffer ex(cap);
    OnlineKMeansBuffer km(cap);
    std::vector<oracle::Proto> ex_sim;
    std::vector<oracle::Proto> km_sim;
    for (int n = 0; n < 20; ++n) {
      V x(d);
      for (double& v : x) v = u(rng);
      ex.insert(x);
      km.insert(x);
      ex_sim = oracle::exstream_step(ex_sim, cap, x);
      km_sim = oracle::online_kmeans_step(km_sim, cap, x);
    }
    const auto ex_lib = as_oracle(ex.prototypes());
    const auto km_lib = as_oracle(km.prototypes());
    REQUIRE(ex_lib.size() == ex_sim.size());
    REQUIRE(km_lib.size() == km_sim.size());
    for (std::size_t i = 0; i < ex_sim.size(); ++i) {
      CHECK(ex_lib[i].c == ex_sim[i].c);
      CHECK(km_lib[i].c == km_sim[i].c);
      for (std::size_t j = 0; j < d; ++j) {
        CHECK(std::abs(ex_lib[i].w[j] - ex_sim[i].w[j]) <= 1e-9);
        CHECK(std::abs(km_lib[i].w[j] - km_sim[i].w[j]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("online k-means updates the nearest prototype") {
  OnlineKMeansBuffer b(1);
  b.insert(V{1, 1});
  b.insert(V{3, 3});
  CHECK(b.prototypes() == std::vector<Prototype>{{{2, 2}, 2}});

  OnlineKMeansBuffer s(1);
  for (double x : {1.0, 2.0, 3.0, 4.0}) s.insert(V{x});
  CHECK(s.prototypes() == std::vector<Prototype>{{{2.5}, 4}});

  OnlineKMeansBuffer e(2);
  e.insert(V{0, 7});
  e.insert(V{5, 5});
  e.insert(V{5, 5});
  CHECK(e.prototypes() == std::vector<Prototype>{{{0, 7}, 1}, {{5, 5}, 2}});
}

TEST_CASE("reservoir third insert into a full b=2 buffer replaces with probability 2/3") {
  int kept = 0;
  const int trials = 30000;
  for (int s = 0; s < trials; ++s) {
    ReservoirBuffer r(2, static_cast<std::uint64_t>(s));
    for (double x : {1.0, 2.0, 3.0}) r.insert(V{x});
    kept += std::count(r.samples().begin(), r.samples().end(), V{3.0}) > 0;
  }
  // 3 sigma of a Bernoulli(2/3) mean over 30000 trials is about 0.0082.
  CHECK(std::abs(kept / double(trials) - 2.0 / 3.0) < 0.0082);
}

TEST_CASE("reservoir inclusion is uniform") {
  std::array<int, 4> hits{};
  const int trials = 20000;
  for (int s = 0; s < trials; ++s) {
    ReservoirBuffer r(2, static_cast<std::uint64_t>(s));
    for (int i = 0; i < 4; ++i) r.insert(V{static_cast<double>(i)});
    CHECK(r.size() == 2);
    CHECK(r.seen_count() == 4);
    for (const auto& v : r.samples()) ++hits[static_cast<std::size_t>(v[0])];
  }
  for (int h : hits) CHECK(std::abs(h / double(trials) - 0.5) <= 0.02);
}

TEST_CASE("queue is first in, first out") {
  QueueBuffer q(2);
  for (double x : {1.0, 2.0, 3.0}) q.insert(V{x});
  CHECK(std::vector<V>(q.samples().begin(), q.samples().end()) == std::vector<V>{{2}, {3}});

  QueueBuffer one(1);
  for (double x : {5.0, 6.0, 7.0}) {
    one.insert(V{x});
    CHECK(one.samples().back() == V{x});
    CHECK(one.size() == 1);
  }

  QueueBuffer roomy(5);
  for (double x : {1.0, 2.0, 3.0}) roomy.insert(V{x});
  CHECK(std::vector<V>(roomy.samples().begin(), roomy.samples().end()) ==
        std::vector<V>{{1}, {2}, {3}});
}

TEST_CASE("queue follows the FIFO oracle") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  for (std::size_t cap = 1; cap <= 4; ++cap) {
    QueueBuffer q(cap);
    std::deque<V> sim;
    for (int n = 0; n < 30; ++n) {
      V x{u(rng), u(rng)};
      q.insert(x);
      sim = oracle::queue_step(sim, cap, x);
      CHECK(q.samples() == sim);
    }
  }
}

TEST_CASE("micro-cluster statistics") {
  auto mc = MicroCluster::singleton(V{0.0}, 1.0);
  mc.absorb(V{2.0}, 2.0);
  CHECK(mc.n == 2);
  CHECK(mc.centroid() == V{1.0});
  CHECK(mc.rms_deviation() == doctest::Approx(1.0));
  CHECK(2.0 * mc.rms_deviation() == doctest::Approx(2.0));

  mc.absorb(V{2.5}, 3.0);
  CHECK(mc.n == 3);
  CHECK(mc.linear_sum == V{4.5});
  CHECK(mc.squared_sum == V{10.25});

  auto two = MicroCluster::singleton(V{1.0, 3.0}, 0.0);
  two.absorb(V{1.0, 1.0}, 0.0);
  CHECK(two.linear_sum == V{2.0, 4.0});
  CHECK(two.centroid() == V{1.0, 2.0});

  auto same = MicroCluster::singleton(V{1.0, 2.0}, 0.0);
  same.absorb(V{1.0, 2.0}, 1.0);
  same.absorb(same.centroid(), 2.0);
  CHECK(same.n == 3);
  CHECK(same.centroid() == V{1.0, 2.0});

  auto stamp = MicroCluster::singleton(V{0.0}, 10.0);
  stamp.absorb(V{0.0}, 20.0);
  CHECK(stamp.relevance_stamp(2.0) == doctest::Approx(15.0 + 2.0 * 5.0));
}

TEST_CASE("CluStream absorbs inside the boundary and takes the new-cluster path outside it") {
  CluStreamBuffer b(2, {}, 0);
  // Staged pool {0, 2, 100, 100} clusters into {0, 2} and {100, 100}.
  double t = 1;
  for (double x : {0.0, 100.0, 2.0, 100.0}) b.insert(V{x}, t++);
  REQUIRE(b.initialized());
  REQUIRE(find_cluster(b, 1.0) != nullptr);

  b.insert(V{2.5}, t++);
  const auto* a = find_cluster(b, 1.5);
  REQUIRE(a != nullptr);
  CHECK(a->n == 3);
  CHECK(a->linear_sum == V{4.5});
  CHECK(a->squared_sum == V{10.25});

  // 10 is 8.5 from the centroid 1.5, beyond 2 * 1.08. Nothing is stale, so the
  // two clusters merge and 10 becomes a singleton.
  b.insert(V{10.0}, t++);
  REQUIRE(b.clusters().size() == 2);
  const auto* fresh = find_cluster(b, 10.0);
  REQUIRE(fresh != nullptr);
  CHECK(fresh->n == 1);
  const auto* merged = find_cluster(b, (4.5 + 200.0) / 5.0);
  REQUIRE(merged != nullptr);
  CHECK(merged->n == 5);
}

TEST_CASE("CluStream evicts a cluster older than the horizon") {
  CluStreamParams p;
  p.horizon = 10.0;
  CluStreamBuffer b(2, p, 0);
  b.insert(V{0.0}, 1);
  b.insert(V{0.0}, 2);
  b.insert(V{50.0}, 100);
  b.insert(V{50.0}, 101);
  REQUIRE(b.initialized());
  b.insert(V{-40.0}, 105);
  const auto* fresh = find_cluster(b, -40.0);
  REQUIRE(fresh != nullptr);
  CHECK(fresh->n == 1);
  CHECK(find_cluster(b, 0.0) == nullptr);
  CHECK(find_cluster(b, 50.0)->n == 2);
}

TEST_CASE("CluStream singleton boundary is the distance to the nearest other centroid") {
  CluStreamBuffer b(2, {}, 0);
  double t = 1;
  for (double x : {0.0, 0.0, 10.0, 10.0}) b.insert(V{x}, t++);
  // 100 is outside both zero-spread clusters: they merge and 100 becomes a singleton.
  b.insert(V{100.0}, t++);
  const auto* single = find_cluster(b, 100.0);
  REQUIRE(single != nullptr);
  // Nearest other centroid is 5 (merged 0,0,10,10), 95 away, so 150 is absorbed.
  b.insert(V{150.0}, t++);
  CHECK(find_cluster(b, 125.0) != nullptr);
}

TEST_CASE("CluStream initialisation") {
  // b=1 gives the mean of the staged points.
  CluStreamBuffer one(1, {}, 0);
  one.insert(V{1.0, 2.0}, 1);
  CHECK_FALSE(one.initialized());
  CHECK(one.prototypes() == std::vector<V>{{1.0, 2.0}});
  one.insert(V{3.0, 6.0}, 2);
  REQUIRE(one.initialized());
  CHECK(one.prototypes() == std::vector<V>{{2.0, 4.0}});

  // b separated locations, each staged twice, are recovered exactly.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::size_t cap = 6;
    CluStreamBuffer b(cap, {}, seed);
    for (int rep = 0; rep < 2; ++rep)
      for (std::size_t i = 0; i < cap; ++i) b.insert(V{10.0 * i, -3.0 * i}, 1.0 + rep * cap + i);
    REQUIRE(b.initialized());
    auto got = b.prototypes();
    std::sort(got.begin(), got.end());
    for (std::size_t i = 0; i < cap; ++i) {
      CHECK(got[i] == V{10.0 * i, -3.0 * i});
      CHECK(b.clusters()[i].n == 2);
    }
  }

  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<V> pts(16, V(3));
  for (auto& p : pts)
    for (double& v : p) v = g(rng);
  std::vector<double> times(16, 0.0);
  const auto a = CluStreamBuffer::initialize(pts, times, 8, 42);
  const auto c = CluStreamBuffer::initialize(pts, times, 8, 42);
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].linear_sum == c[i].linear_sum);
}

TEST_CASE("CluStream staging exposes at most b recent points") {
  CluStreamBuffer b(3, {}, 0);
  for (int i = 0; i < 5; ++i) {
    b.insert(V{static_cast<double>(i)}, i + 1.0);
    CHECK(b.size() <= 3);
    CHECK(b.memory_cost() == i + 1);
  }
  CHECK(b.prototypes() == std::vector<V>{{2}, {3}, {4}});
  b.insert(V{5.0}, 6);
  CHECK(b.initialized());
  CHECK(b.size() == 3);
  CHECK(b.memory_cost() == 6);
}

TEST_CASE("k-means gives every cluster a member") {
  std::mt19937_64 rng(5);
  std::vector<V> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({0.0});
  pts.push_back({1.0});
  for (std::size_t k = 1; k <= 2; ++k) {
    const auto res = kmeans(pts, k, rng);
    std::vector<int> sizes(k, 0);
    for (auto a : res.assignment) ++sizes[a];
    for (int s : sizes) CHECK(s >= 1);
  }
}

TEST_CASE("HPStream fade factor") {
  CHECK(fade_factor(0.5, 2.0) == 0.5);
  CHECK(fade_factor(0.0, 123.0) == 1.0);
  CHECK(fade_factor(0.5, 0.0) == 1.0);

  auto fc = FadedCluster::singleton(V{2.0}, 0.0);
  fc.fade_to(2.0, 0.5);
  CHECK(fc.weight == 0.5);
  CHECK(fc.linear_sum == V{1.0});
  CHECK(fc.squared_sum == V{2.0});
  CHECK(fc.centroid() == V{2.0});

  auto still = FadedCluster::singleton(V{2.0}, 0.0);
  still.fade_to(50.0, 0.0);
  CHECK(still.weight == 1.0);
}

TEST_CASE("HPStream dimension selection") {
  const std::vector<V> two{{0.1, 5.0}, {0.2, 4.0}};
  const auto bits = hpstream_assign_dims(two, 1);
  CHECK(bits == std::vector<BitVector>{{true, false}, {true, false}});

  const std::vector<V> one{{0.5, 0.1, 0.9, 0.3, 0.7}};
  CHECK(hpstream_assign_dims(one, 3) == std::vector<BitVector>{{true, true, false, true, false}});

  const std::vector<V> flat{{1, 1, 1}, {1, 1, 1}};
  CHECK(hpstream_assign_dims(flat, 2) ==
        std::vector<BitVector>{{true, true, true}, {true, false, false}});

  CHECK(hpstream_assign_dims(two, 2) == std::vector<BitVector>{{true, true}, {true, true}});

  // The global budget can starve a cluster; it keeps its smallest dimension.
  const std::vector<V> starve{{0.1, 0.2}, {9.0, 8.0}};
  CHECK(hpstream_assign_dims(starve, 1) == std::vector<BitVector>{{true, true}, {false, true}});
}

TEST_CASE("HPStream dimension selection matches the sort-all-pairs oracle") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<V> radii(4, V(12));
    for (auto& r : radii)
      for (double& v : r) v = u(rng);
    CHECK(hpstream_assign_dims(radii, 5) == oracle::hpstream_bits(radii, 5));
  }
}

TEST_CASE("projected distance averages over set bits") {
  CHECK(projected_distance(V{3, 100, 0}, V{0, 0, 4}, BitVector{true, false, true}) ==
        doctest::Approx(std::sqrt(25.0 / 2.0)));
  CHECK(projected_distance(V{3, 4}, V{0, 0}, BitVector{true, true}) ==
        doctest::Approx(std::sqrt(12.5)));
}

TEST_CASE("HPStream buffer") {
  HPStreamParams p;
  HPStreamBuffer b(3, p);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int i = 1; i <= 500; ++i) {
    b.insert(V{g(rng), g(rng), g(rng), g(rng)}, i);
    CHECK(b.size() <= 3);
  }
  for (const auto& fc : b.clusters()) {
    CHECK(fc.weight > 0.0);
    CHECK(std::count(fc.bits.begin(), fc.bits.end(), true) >= 1);
  }

  // With l = d the projected rule is the unprojected one on every dimension.
  p.projected_dims = 99;
  HPStreamBuffer full(2, p);
  for (int i = 1; i <= 50; ++i) full.insert(V{g(rng), g(rng)}, i);
  for (const auto& fc : full.clusters()) CHECK(fc.bits == BitVector{true, true});

  // A point at an existing centroid joins it.
  HPStreamBuffer join(2, {});
  join.insert(V{0.0, 0.0}, 1);
  join.insert(V{10.0, 10.0}, 2);
  join.insert(V{0.0, 0.0}, 3);
  CHECK(join.clusters()[0].points == 2);
  CHECK(join.clusters()[1].points == 1);

  // A point far from a tight cluster replaces the least recently updated one.
  join.insert(V{0.0, 0.0}, 4);
  join.insert(V{-50.0, 30.0}, 5);
  CHECK(join.clusters()[1].points == 1);
  CHECK(join.clusters()[1].centroid() == V{-50.0, 30.0});
  CHECK(join.clusters()[0].points == 3);
}

TEST_CASE("buffer manager: empty buffers store the first sample verbatim") {
  for (auto s : kAll) {
    BufferManager m(s, 4, 2);
    m.insert(V{1.5, -2.0}, 1, 1);
    REQUIRE(m.contents().size() == 1);
    CHECK(m.contents()[0].features == V{1.5, -2.0});
    CHECK(m.contents()[0].class_label == 1);
    CHECK(m.size(0) == 0);
  }
}

TEST_CASE("buffer manager: 3b inserts leave exactly b entries") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (auto s : kAll) {
    if (!is_bounded(s)) continue;
    for (std::size_t b : {1u, 2u, 5u}) {
      BufferManager m(s, b, 1);
      for (std::size_t i = 0; i < 3 * b; ++i) m.insert(V{g(rng), g(rng)}, 0, i + 1);
      CHECK(m.size(0) == b);
    }
  }
  BufferManager full(Strategy::kFull, 2, 1);
  for (int i = 1; i <= 10; ++i) {
    full.insert(V{1.0}, 0, i);
    CHECK(full.size(0) == static_cast<std::size_t>(i));
  }
}

TEST_CASE("buffer manager: fewer than b inserts are returned raw in (class, slot) order") {
  for (auto s : kAll) {
    BufferManager m(s, 8, 3);
    std::vector<LabeledVector> expected;
    std::uint64_t t = 1;
    for (int c : {2, 0, 2, 1, 0}) {
      const V x{static_cast<double>(t), static_cast<double>(c)};
      m.insert(x, c, t++);
    }
    const auto got = m.contents();
    REQUIRE(got.size() == 5);
    std::vector<int> labels;
    for (const auto& lv : got) {
      CHECK(lv.features[1] == lv.class_label);
      labels.push_back(lv.class_label);
    }
    CHECK(labels == std::vector<int>{0, 0, 1, 2, 2});
    CHECK(got[0].features[0] < got[1].features[0]);
  }
}

TEST_CASE("buffer manager: memory cost") {
  const std::size_t b = 16;
  BufferManager ex(Strategy::kExStream, b, 10);
  BufferManager cs(Strategy::kCluStream, b, 10);
  BufferManager hp(Strategy::kHPStream, b, 10);
  CHECK(ex.memory_cost() == 0.0);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::uint64_t t = 1;
  for (int c = 0; c < 10; ++c)
    for (std::size_t i = 0; i < 2 * b; ++i) {
      const V x{g(rng), g(rng), g(rng)};
      ex.insert(x, c, t);
      cs.insert(x, c, t);
      hp.insert(x, c, t);
      ++t;
    }
  CHECK(ex.memory_cost() == 160.0);
  CHECK(cs.memory_cost() == 320.0);
  CHECK(hp.memory_cost() == 320.0);
}

TEST_CASE("buffer manager: strategy names") {
  for (auto s : kAll) CHECK(parse_strategy(to_string(s)) == s);
  CHECK_THROWS_AS(parse_strategy("lru"), ConfigError);
  CHECK_THROWS_AS(BufferManager(Strategy::kExStream, 0, 2), UsageError);
  BufferManager m(Strategy::kQueue, 2, 2);
  CHECK_THROWS_AS(m.insert(V{1.0}, 2, 1), UsageError);
}
