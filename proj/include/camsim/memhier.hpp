#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "camsim/common.hpp"

namespace camsim {

struct CacheGeometry {
  std::uint64_t capacity_bytes = 0;
  std::uint32_t associativity = 0;
  std::uint32_t block_bytes = 64;

  // Throws ConfigError unless every field is a power of two and the cache has
  // at least one set.
  static CacheGeometry make(std::uint64_t capacity_bytes, std::uint32_t associativity,
                            std::uint32_t block_bytes);

  std::uint64_t n_sets() const { return capacity_bytes / (std::uint64_t(associativity) * block_bytes); }
};

struct AddressParts {
  std::uint64_t tag = 0;
  std::uint64_t set = 0;
  std::uint64_t offset = 0;
  friend bool operator==(const AddressParts&, const AddressParts&) = default;
};

// Throws ConfigError when addr is not below memory_bytes.
AddressParts split_address(Addr addr, const CacheGeometry& geom, std::uint64_t memory_bytes);

inline Addr block_align(Addr addr, std::uint32_t block_bytes) {
  return addr & ~Addr(block_bytes - 1);
}

// Set-associative tag array with true LRU replacement. Each set is kept in
// recency order, front = MRU. Sets are allocated on first touch.
template <typename Payload>
class CacheArray {
 public:
  struct Entry {
    std::uint64_t tag = 0;
    Payload payload{};
  };

  struct Victim {
    Addr addr = 0;
    Payload payload{};
  };

  explicit CacheArray(CacheGeometry geom)
      : geom_(geom), sets_(geom.n_sets()) {}

  const CacheGeometry& geometry() const { return geom_; }

  // Hit moves the entry to MRU.
  Payload* lookup(Addr addr) {
    auto& set = sets_[set_of(addr)];
    const std::uint64_t tag = tag_of(addr);
    auto it = std::find_if(set.begin(), set.end(), [&](const Entry& e) { return e.tag == tag; });
    if (it == set.end()) return nullptr;
    std::rotate(set.begin(), it, it + 1);
    return &set.front().payload;
  }

  // Lookup without touching recency.
  Payload* peek(Addr addr) {
    auto& set = sets_[set_of(addr)];
    const std::uint64_t tag = tag_of(addr);
    for (auto& e : set) {
      if (e.tag == tag) return &e.payload;
    }
    return nullptr;
  }
  const Payload* peek(Addr addr) const { return const_cast<CacheArray*>(this)->peek(addr); }

  bool set_full(Addr addr) const { return sets_[set_of(addr)].size() >= geom_.associativity; }

  // LRU entry of the set addr maps to, or nullopt if the set has a free way.
  std::optional<Victim> select_victim(Addr addr) const {
    const std::uint64_t s = set_of(addr);
    const auto& set = sets_[s];
    if (set.size() < geom_.associativity) return std::nullopt;
    return Victim{addr_of(set.back().tag, s), set.back().payload};
  }

  // Installs at MRU. The set must have room (evict the victim first).
  Payload& install(Addr addr, Payload payload) {
    auto& set = sets_[set_of(addr)];
    if (set.size() >= geom_.associativity) throw SimError("install into full cache set");
    set.insert(set.begin(), Entry{tag_of(addr), std::move(payload)});
    return set.front().payload;
  }

  bool erase(Addr addr) {
    auto& set = sets_[set_of(addr)];
    const std::uint64_t tag = tag_of(addr);
    auto it = std::find_if(set.begin(), set.end(), [&](const Entry& e) { return e.tag == tag; });
    if (it == set.end()) return false;
    set.erase(it);
    return true;
  }

  // Entries of one set in recency order (front = MRU).
  const std::vector<Entry>& set_entries(std::uint64_t set) const { return sets_[set]; }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::uint64_t s = 0; s < sets_.size(); ++s) {
      for (const auto& e : sets_[s]) fn(addr_of(e.tag, s), e.payload);
    }
  }

  std::uint64_t set_of(Addr addr) const { return (addr / geom_.block_bytes) % geom_.n_sets(); }
  std::uint64_t tag_of(Addr addr) const { return (addr / geom_.block_bytes) / geom_.n_sets(); }
  Addr addr_of(std::uint64_t tag, std::uint64_t set) const {
    return (tag * geom_.n_sets() + set) * geom_.block_bytes;
  }

 private:
  CacheGeometry geom_;
  std::vector<std::vector<Entry>> sets_;
};

}  // namespace camsim
