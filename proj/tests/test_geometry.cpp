#include <doctest.h>

#include <algorithm>

#include "cagnet/geometry.hpp"
#include "cagnet/rng.hpp"
#include "oracles.hpp"

using namespace cagnet;

namespace {

ScoredRegion make_region(double x1, double y1, double x2, double y2, double conf = 1.0) {
  ScoredRegion r;
  r.box = {x1, y1, x2, y2};
  r.confidence = conf;
  return r;
}

std::vector<ScoredRegion> random_regions(Rng& rng, std::size_t n, double span = 100.0) {
  std::vector<ScoredRegion> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = rng.uniform(0.0, span - 2.0);
    const double y1 = rng.uniform(0.0, span - 2.0);
    out.push_back(make_region(x1, y1, x1 + rng.uniform(1.0, span - x1),
                              y1 + rng.uniform(1.0, span - y1), rng.uniform()));
  }
  return out;
}

}  // namespace

TEST_CASE("iou basics") {
  const BBox b{0, 0, 10, 10};
  CHECK(iou(b, b) == 1.0);
  CHECK(iou(b, BBox{20, 20, 30, 30}) == 0.0);
  CHECK(iou(b, BBox{5, 0, 15, 10}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  // touching edges count as disjoint under the continuous convention
  CHECK(iou(b, BBox{10, 0, 20, 10}) == 0.0);
}

TEST_CASE("iou is symmetric and bounded on fuzzed boxes") {
  Rng rng(21);
  auto regions = random_regions(rng, 60);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t j = 0; j < regions.size(); ++j) {
      const double ab = iou(regions[i].box, regions[j].box);
      CHECK(ab == iou(regions[j].box, regions[i].box));
      CHECK(ab >= 0.0);
      CHECK(ab <= 1.0);
      if (i == j) CHECK(ab == 1.0);
    }
  }
}

TEST_CASE("nms trivial cases") {
  CHECK(nms({}, 0.5, 10).empty());

  auto single = make_region(0, 0, 5, 5, 0.7);
  auto kept = nms({single}, 0.5, 10);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].confidence == 0.7);

  // identical boxes: only the higher-confidence one survives
  auto a = make_region(0, 0, 5, 5, 0.9);
  auto b = make_region(0, 0, 5, 5, 0.8);
  kept = nms({b, a}, 0.5, 10);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].confidence == 0.9);
}

TEST_CASE("nms matches the quadratic reference on 100 seeds x 200 boxes") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    auto regions = random_regions(rng, 200);
    const double threshold = 0.3 + 0.4 * rng.uniform();
    auto got = nms_indices(regions, threshold, regions.size());
    auto want = oracle::nms_reference(regions, threshold, regions.size());
    CHECK(got == want);
  }
}

TEST_CASE("nms survivors never overlap at or above the threshold") {
  Rng rng(5);
  auto regions = random_regions(rng, 80);
  auto kept = nms_indices(regions, 0.4, 50);
  CHECK(kept.size() <= 50);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = i + 1; j < kept.size(); ++j) {
      CHECK(iou(regions[kept[i]].box, regions[kept[j]].box) < 0.4);
    }
    if (i > 0) {
      CHECK(regions[kept[i - 1]].confidence >= regions[kept[i]].confidence);
    }
  }
}

TEST_CASE("nms rejects bad thresholds") {
  CHECK_THROWS(nms({}, 0.0, 1));
  CHECK_THROWS(nms({}, 1.5, 1));
}

TEST_CASE("top_k_neighbors trivial cases") {
  auto target = make_region(0, 0, 10, 10);
  CHECK(top_k_neighbors(target, {}, 3).empty());

  std::vector<ScoredRegion> pool = {make_region(0, 0, 10, 10)};
  auto hits = top_k_neighbors(target, pool, 1);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0] == 0);

  // all-disjoint pool ties at IoU zero; indices break the tie
  pool = {make_region(20, 0, 30, 10), make_region(40, 0, 50, 10),
          make_region(60, 0, 70, 10)};
  hits = top_k_neighbors(target, pool, 2);
  CHECK(hits == std::vector<std::size_t>{0, 1});
}

TEST_CASE("top_k_neighbors matches exhaustive sort on nested boxes") {
  auto target = make_region(0, 0, 100, 100);
  std::vector<ScoredRegion> pool;
  for (int i = 0; i < 10; ++i) {
    pool.push_back(make_region(i, i, 100 - i, 100 - i));
  }
  Rng rng(3);
  rng.shuffle(pool);
  for (std::size_t k = 1; k <= pool.size(); ++k) {
    CHECK(top_k_neighbors(target, pool, k) == oracle::topk_reference(target, pool, k));
  }
  // IoU sequence is non-increasing
  auto hits = top_k_neighbors(target, pool, pool.size());
  for (std::size_t i = 1; i < hits.size(); ++i) {
    CHECK(iou(target.box, pool[hits[i - 1]].box) >=
          iou(target.box, pool[hits[i]].box));
  }
}
