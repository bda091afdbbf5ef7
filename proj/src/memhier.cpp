#include "camsim/memhier.hpp"

#include <bit>
#include <string>

namespace camsim {

CacheGeometry CacheGeometry::make(std::uint64_t capacity_bytes, std::uint32_t associativity,
                                  std::uint32_t block_bytes) {
  if (!std::has_single_bit(capacity_bytes) || !std::has_single_bit(associativity) ||
      !std::has_single_bit(block_bytes)) {
    throw ConfigError("cache geometry must use powers of two (capacity " +
                      std::to_string(capacity_bytes) + ", assoc " +
                      std::to_string(associativity) + ", block " + std::to_string(block_bytes) +
                      ")");
  }
  CacheGeometry g{capacity_bytes, associativity, block_bytes};
  if (capacity_bytes < std::uint64_t(associativity) * block_bytes) {
    throw ConfigError("cache geometry has no sets: capacity " + std::to_string(capacity_bytes) +
                      " < assoc x block");
  }
  return g;
}

AddressParts split_address(Addr addr, const CacheGeometry& geom, std::uint64_t memory_bytes) {
  if (addr >= memory_bytes) {
    throw ConfigError("address " + std::to_string(addr) + " beyond memory size " +
                      std::to_string(memory_bytes));
  }
  const std::uint64_t block = addr / geom.block_bytes;
  return AddressParts{block / geom.n_sets(), block % geom.n_sets(), addr % geom.block_bytes};
}

}  // namespace camsim
