#include "camsim/topology.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "camsim/common.hpp"

namespace camsim {

namespace {

constexpr std::uint32_t kNoLink = std::numeric_limits<std::uint32_t>::max();

// Signed step (+1 / -1 / 0) that moves `from` toward `to` on a ring of `size`
// along the shorter direction. Equal distances go toward increasing coordinate.
int ring_step(std::uint32_t from, std::uint32_t to, std::uint32_t size) {
  if (from == to) return 0;
  const std::uint32_t forward = (to + size - from) % size;
  const std::uint32_t backward = size - forward;
  return forward <= backward ? +1 : -1;
}

std::uint32_t ring_distance(std::uint32_t a, std::uint32_t b, std::uint32_t size) {
  const std::uint32_t forward = (b + size - a) % size;
  return std::min(forward, size - forward);
}

}  // namespace

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::Crossbar: return "crossbar";
    case TopologyKind::Torus2D: return "torus2d";
    case TopologyKind::Hypercube: return "hypercube";
  }
  return "?";
}

TopologyKind parse_topology_kind(std::string_view name) {
  if (name == "crossbar") return TopologyKind::Crossbar;
  if (name == "torus2d") return TopologyKind::Torus2D;
  if (name == "hypercube") return TopologyKind::Hypercube;
  throw ConfigError("unknown topology '" + std::string(name) +
                    "' (expected crossbar, torus2d or hypercube)");
}

Topology Topology::build(TopologyKind kind, std::uint32_t n_endpoints) {
  if (n_endpoints < 2) {
    throw ConfigError("topology needs at least 2 endpoints, got " +
                      std::to_string(n_endpoints));
  }
  Topology t;
  t.kind_ = kind;
  t.n_endpoints_ = n_endpoints;

  switch (kind) {
    case TopologyKind::Crossbar:
      t.n_nodes_ = n_endpoints + 1;
      break;
    case TopologyKind::Torus2D: {
      // Squarest factorization, height <= width.
      std::uint32_t h = static_cast<std::uint32_t>(std::sqrt(double(n_endpoints)));
      while (h > 1 && n_endpoints % h != 0) --h;
      t.height_ = h;
      t.width_ = n_endpoints / h;
      t.n_nodes_ = n_endpoints;
      break;
    }
    case TopologyKind::Hypercube:
      if (!std::has_single_bit(n_endpoints)) {
        throw ConfigError("hypercube endpoint count must be a power of two, got " +
                          std::to_string(n_endpoints));
      }
      t.dimension_ = static_cast<std::uint32_t>(std::countr_zero(n_endpoints));
      t.n_nodes_ = n_endpoints;
      break;
  }

  const std::uint32_t n = t.n_nodes_;
  t.link_index_.assign(std::size_t(n) * n, kNoLink);

  switch (kind) {
    case TopologyKind::Crossbar: {
      const std::uint32_t router = n_endpoints;
      for (std::uint32_t e = 0; e < n_endpoints; ++e) {
        t.add_link(e, router);
        t.add_link(router, e);
      }
      break;
    }
    case TopologyKind::Torus2D: {
      const std::uint32_t w = t.width_, h = t.height_;
      for (std::uint32_t y = 0; y < h; ++y) {
        for (std::uint32_t x = 0; x < w; ++x) {
          const std::uint32_t self = y * w + x;
          // add_link drops self loops and collapses duplicate pairs, which
          // covers rings of size 1 and 2.
          t.add_link(self, y * w + (x + 1) % w);
          t.add_link(self, y * w + (x + w - 1) % w);
          t.add_link(self, ((y + 1) % h) * w + x);
          t.add_link(self, ((y + h - 1) % h) * w + x);
        }
      }
      break;
    }
    case TopologyKind::Hypercube:
      for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t k = 0; k < t.dimension_; ++k) t.add_link(i, i ^ (1u << k));
      }
      break;
  }

  t.route_.assign(std::size_t(n) * n, kNoLink);
  for (std::uint32_t at = 0; at < n; ++at) {
    for (std::uint32_t dest = 0; dest < n; ++dest) {
      if (at == dest) continue;
      const std::uint32_t next = t.route_next_node(at, dest);
      const std::uint32_t link = t.link_index_[std::size_t(at) * n + next];
      if (link == kNoLink) {
        throw SimError("routing table: no link " + std::to_string(at) + "->" +
                       std::to_string(next));
      }
      t.route_[std::size_t(at) * n + dest] = link;
    }
  }
  return t;
}

void Topology::add_link(std::uint32_t src, std::uint32_t dst) {
  if (src == dst) return;
  auto& slot = link_index_[std::size_t(src) * n_nodes_ + dst];
  if (slot != kNoLink) return;
  slot = static_cast<std::uint32_t>(links_.size());
  links_.push_back(LinkEnds{node(src), node(dst)});
}

NodeId Topology::node(std::uint32_t index) const {
  return NodeId{index, index < n_endpoints_ ? NodeKind::Endpoint : NodeKind::Router};
}

std::uint32_t Topology::route_next_node(std::uint32_t at, std::uint32_t dest) const {
  switch (kind_) {
    case TopologyKind::Crossbar: {
      const std::uint32_t router = n_endpoints_;
      return at == router ? dest : router;
    }
    case TopologyKind::Torus2D: {
      const std::uint32_t ax = at % width_, ay = at / width_;
      const std::uint32_t dx = dest % width_, dy = dest / width_;
      if (ax != dx) {
        const int step = ring_step(ax, dx, width_);
        return ay * width_ + (ax + width_ + step) % width_;
      }
      const int step = ring_step(ay, dy, height_);
      return ((ay + height_ + step) % height_) * width_ + ax;
    }
    case TopologyKind::Hypercube: {
      const std::uint32_t diff = at ^ dest;
      return at ^ (1u << std::countr_zero(diff));
    }
  }
  return dest;
}

LinkId Topology::next_hop(NodeId at, NodeId dest) const {
  if (at.index >= n_nodes_ || dest.index >= n_nodes_ || at == dest) {
    throw SimError("next_hop: invalid node pair " + std::to_string(at.index) + "->" +
                   std::to_string(dest.index));
  }
  return LinkId{route_[std::size_t(at.index) * n_nodes_ + dest.index]};
}

std::uint32_t Topology::min_hops(NodeId src, NodeId dest) const {
  if (src == dest) return 0;
  switch (kind_) {
    case TopologyKind::Crossbar:
      return (src.index >= n_endpoints_ || dest.index >= n_endpoints_) ? 1 : 2;
    case TopologyKind::Torus2D:
      return ring_distance(src.index % width_, dest.index % width_, width_) +
             ring_distance(src.index / width_, dest.index / width_, height_);
    case TopologyKind::Hypercube:
      return static_cast<std::uint32_t>(std::popcount(src.index ^ dest.index));
  }
  return 0;
}

std::optional<LinkId> Topology::find_link(NodeId src, NodeId dst) const {
  if (src.index >= n_nodes_ || dst.index >= n_nodes_) return std::nullopt;
  const std::uint32_t link = link_index_[std::size_t(src.index) * n_nodes_ + dst.index];
  if (link == kNoLink) return std::nullopt;
  return LinkId{link};
}

}  // namespace camsim
