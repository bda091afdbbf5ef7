#include <doctest.h>

#include <random>
#include <set>

#include "camsim/memhier.hpp"
#include "oracles.hpp"

using namespace camsim;

namespace {
constexpr std::uint64_t kMem = 512ull << 20;
}

TEST_CASE("geometry of the baseline caches") {
  CHECK(CacheGeometry::make(256 << 10, 4, 64).n_sets() == 1024);
  CHECK(CacheGeometry::make(16 << 20, 4, 64).n_sets() == 65536);
  CHECK_THROWS_AS(CacheGeometry::make(3000, 4, 64), ConfigError);
  CHECK_THROWS_AS(CacheGeometry::make(256 << 10, 3, 64), ConfigError);
  CHECK_THROWS_AS(CacheGeometry::make(256 << 10, 4, 48), ConfigError);
  // Fewer bytes than one set.
  CHECK_THROWS_AS(CacheGeometry::make(128, 4, 64), ConfigError);
}

TEST_CASE("split_address") {
  const auto l1 = CacheGeometry::make(256 << 10, 4, 64);
  CHECK(split_address(0x12345, l1, kMem) == AddressParts{0x1, 0x8D, 0x05});
  CHECK(split_address(0x0, l1, kMem) == AddressParts{0, 0, 0});
  const auto a = split_address(0x1000, l1, kMem);
  const auto b = split_address(0x1001, l1, kMem);
  CHECK(a.tag == b.tag);
  CHECK(a.set == b.set);
  CHECK_THROWS_AS(split_address(kMem, l1, kMem), ConfigError);
  CHECK_NOTHROW(split_address(kMem - 1, l1, kMem));
}

TEST_CASE("split_address agrees with the formula on random addresses") {
  std::mt19937_64 rng(11);
  for (auto geom : {CacheGeometry::make(256 << 10, 4, 64), CacheGeometry::make(16 << 20, 4, 64),
                    CacheGeometry::make(4096, 2, 32)}) {
    for (int i = 0; i < 1000; ++i) {
      const Addr addr = rng() % kMem;
      const auto p = split_address(addr, geom, kMem);
      CHECK(p.offset == addr % geom.block_bytes);
      CHECK(p.set == (addr / geom.block_bytes) % geom.n_sets());
      CHECK(p.tag == (addr / geom.block_bytes) / geom.n_sets());
    }
  }
}

TEST_CASE("lookup, install and LRU victims") {
  CacheArray<int> c(CacheGeometry::make(4 * 64 * 2, 4, 64));  // 2 sets
  const Addr stride = 2 * 64;                                  // same set
  CHECK(c.lookup(0) == nullptr);
  c.install(0, 1);
  CHECK(c.lookup(0) != nullptr);

  SUBCASE("fifth distinct tag evicts the oldest") {
    for (int i = 1; i < 4; ++i) c.install(i * stride, i + 1);
    auto v = c.select_victim(4 * stride);
    REQUIRE(v);
    CHECK(v->addr == 0);
    c.erase(v->addr);
    c.install(4 * stride, 5);
    CHECK(c.lookup(0) == nullptr);
  }
  SUBCASE("re-touching moves the victim") {
    for (int i = 1; i < 4; ++i) c.install(i * stride, i + 1);
    c.lookup(0);
    auto v = c.select_victim(4 * stride);
    REQUIRE(v);
    CHECK(v->addr == stride);
  }
  SUBCASE("non-full set has no victim") {
    CHECK_FALSE(c.select_victim(stride));
    CHECK_FALSE(c.select_victim(64));
  }
  SUBCASE("peek does not touch recency") {
    for (int i = 1; i < 4; ++i) c.install(i * stride, i + 1);
    c.peek(0);
    CHECK(c.select_victim(4 * stride)->addr == 0);
  }
  SUBCASE("full set refuses installs") {
    for (int i = 1; i < 4; ++i) c.install(i * stride, i + 1);
    CHECK_THROWS_AS(c.install(9 * stride, 0), SimError);
  }
}

TEST_CASE("CacheArray matches the LRU oracle on random streams") {
  for (auto geom : {CacheGeometry::make(1024, 4, 64), CacheGeometry::make(2048, 2, 64),
                    CacheGeometry::make(512, 8, 64)}) {
    CacheArray<Addr> c(geom);
    oracle::Lru ref(geom.n_sets(), geom.associativity, geom.block_bytes);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20000; ++i) {
      const Addr addr = (rng() % 96) * 64 + rng() % 64;
      const Addr block = block_align(addr, 64);
      std::optional<std::uint64_t> evicted;
      const bool hit = ref.access(addr, evicted);
      const bool got = c.lookup(block) != nullptr;
      REQUIRE(hit == got);
      if (!got) {
        auto v = c.select_victim(block);
        REQUIRE(v.has_value() == evicted.has_value());
        if (v) {
          REQUIRE(v->addr == *evicted);
          REQUIRE(v->payload == *evicted);
          c.erase(v->addr);
        }
        c.install(block, block);
      }
      // Occupancy and uniqueness.
      const auto s = c.set_of(block);
      const auto& entries = c.set_entries(s);
      REQUIRE(entries.size() <= geom.associativity);
      std::set<std::uint64_t> tags;
      for (const auto& e : entries) tags.insert(e.tag);
      REQUIRE(tags.size() == entries.size());
    }
  }
}

TEST_CASE("block_align masks offsets") {
  CHECK(block_align(0x1003F, 64) == 0x10000);
  CHECK(block_align(0x10040, 64) == 0x10040);
}
