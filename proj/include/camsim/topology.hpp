#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace camsim {

enum class TopologyKind { Crossbar, Torus2D, Hypercube };

std::string_view to_string(TopologyKind kind);
// Accepts exactly "crossbar", "torus2d", "hypercube".
TopologyKind parse_topology_kind(std::string_view name);

enum class NodeKind : std::uint8_t { Endpoint, Router };

struct NodeId {
  std::uint32_t index = 0;
  NodeKind kind = NodeKind::Endpoint;

  friend bool operator==(NodeId a, NodeId b) { return a.index == b.index; }
  friend auto operator<=>(NodeId a, NodeId b) { return a.index <=> b.index; }
};

inline NodeId endpoint(std::uint32_t i) { return NodeId{i, NodeKind::Endpoint}; }

// Index into Topology::links(). Links are unidirectional.
struct LinkId {
  std::uint32_t index = 0;
  friend bool operator==(LinkId, LinkId) = default;
};

struct LinkEnds {
  NodeId src;
  NodeId dst;
};

// Interconnect graph plus its deterministic minimal routing function.
//
// Endpoints are nodes [0, n_endpoints). The crossbar adds one router with
// index n_endpoints; torus and hypercube nodes route for themselves.
// Immutable once built.
class Topology {
 public:
  // Throws ConfigError when n_endpoints is invalid for the kind.
  static Topology build(TopologyKind kind, std::uint32_t n_endpoints);

  TopologyKind kind() const { return kind_; }
  std::uint32_t n_endpoints() const { return n_endpoints_; }
  std::uint32_t n_nodes() const { return n_nodes_; }
  const std::vector<LinkEnds>& links() const { return links_; }
  const LinkEnds& link(LinkId id) const { return links_[id.index]; }
  NodeId node(std::uint32_t index) const;

  // Torus grid shape (width x height); (0, 0) for other kinds.
  std::uint32_t torus_width() const { return width_; }
  std::uint32_t torus_height() const { return height_; }
  std::uint32_t hypercube_dimension() const { return dimension_; }

  // Outgoing link on the route from `at` toward `dest`: via the router for the
  // crossbar, X-then-Y dimension order on the torus (shorter wrap direction,
  // ties toward increasing coordinate), lowest differing bit first on the
  // hypercube. Requires at != dest.
  LinkId next_hop(NodeId at, NodeId dest) const;

  // Shortest path length in links.
  std::uint32_t min_hops(NodeId src, NodeId dest) const;

  // Link from src to dst if one exists.
  std::optional<LinkId> find_link(NodeId src, NodeId dst) const;

 private:
  Topology() = default;
  void add_link(std::uint32_t src, std::uint32_t dst);
  std::uint32_t route_next_node(std::uint32_t at, std::uint32_t dest) const;

  TopologyKind kind_ = TopologyKind::Crossbar;
  std::uint32_t n_endpoints_ = 0;
  std::uint32_t n_nodes_ = 0;
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::uint32_t dimension_ = 0;
  std::vector<LinkEnds> links_;
  // Dense n_nodes x n_nodes table of link indices; kNoLink where absent.
  std::vector<std::uint32_t> link_index_;
  // Precomputed next-hop link for every (at, dest) pair.
  std::vector<std::uint32_t> route_;
};

}  // namespace camsim
