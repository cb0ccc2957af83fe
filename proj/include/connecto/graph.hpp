#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "connecto/gradient.hpp"

namespace connecto {

using VertexId = std::uint64_t;

/// Undirected edges; self-loops and duplicates are tolerated and cleaned up
/// by build_from_edge_list.
struct EdgeList {
  std::vector<std::pair<VertexId, VertexId>> pairs;
};

/// Opaque property record; the graph never interprets the bytes.
using Property = std::string;

/// Offset-array adjacency over one packed edge array.
///
///   vertex_ids  sorted distinct ids, length V
///   offsets     length V+1, offsets[0] = 0, offsets[V] = edges.size()
///   edges       neighbours of vertex i in edges[offsets[i], offsets[i+1]),
///               strictly ascending, both directions of every edge stored
///
/// Node/edge properties are either empty or parallel to vertex_ids / edges.
class CompactGraph {
 public:
  CompactGraph() : offsets_{0} {}

  /// Takes ownership of prebuilt arrays; throws kFormat if they violate the
  /// layout invariants.
  CompactGraph(std::vector<VertexId> vertex_ids, std::vector<std::uint64_t> offsets,
               std::vector<VertexId> edges);

  std::size_t vertex_count() const { return vertex_ids_.size(); }
  std::size_t edge_slots() const { return edges_.size(); }

  std::span<const VertexId> vertex_ids() const { return vertex_ids_; }
  std::span<const std::uint64_t> offsets() const { return offsets_; }
  std::span<const VertexId> edges() const { return edges_; }

  /// Position of `v` in vertex_ids, or throws kUnknownVertex.
  std::size_t index_of(VertexId v) const;
  bool contains(VertexId v) const;

  const std::vector<Property>& node_props() const { return node_props_; }
  const std::vector<Property>& edge_props() const { return edge_props_; }

  const Property& node_prop(VertexId v) const;
  const Property& edge_prop(std::size_t slot) const;

  /// Edge slot holding neighbour `to` of vertex `from`; throws kUnknownVertex
  /// if the edge does not exist.
  std::size_t edge_slot(VertexId from, VertexId to) const;

  /// Throws kFormat describing the first violated invariant.
  void check_invariants() const;

  friend bool operator==(const CompactGraph&, const CompactGraph&) = default;

 private:
  friend CompactGraph attach_node_props(CompactGraph g, std::vector<Property> props);
  friend CompactGraph attach_edge_props(CompactGraph g, std::vector<Property> props);
  friend CompactGraph decode_graph(std::string_view bytes);

  std::vector<VertexId> vertex_ids_;
  std::vector<std::uint64_t> offsets_;
  std::vector<VertexId> edges_;
  std::vector<Property> node_props_;
  std::vector<Property> edge_props_;
};

CompactGraph build_from_edge_list(const EdgeList& e);

std::span<const VertexId> neighbors(const CompactGraph& g, VertexId v);
std::size_t degree(const CompactGraph& g, VertexId v);

/// Number of common neighbours, by a merge scan of the two sorted ranges.
std::uint64_t dot_product(const CompactGraph& g, VertexId u, VertexId v);

/// edges + 2 * vertices: the packed edge array plus one id and one offset
/// entry per vertex.
std::uint64_t memory_footprint(const CompactGraph& g);

enum class Connectivity { k6 = 6, k18 = 18, k26 = 26 };

/// Throws kInvalidParameter for anything but 6, 18, 26.
Connectivity to_connectivity(int n);

/// One vertex per foreground voxel, id = flat voxel index.
CompactGraph build_from_binary_volume(const BinaryVolume& b, Connectivity c);

struct Components {
  std::vector<std::uint64_t> labels;  // parallel to vertex_ids
  std::uint64_t count = 0;

  std::vector<std::uint64_t> sizes() const;
};

/// Labels are 0..C-1 in order of each component's smallest vertex id.
Components connected_components(const CompactGraph& g);

CompactGraph attach_node_props(CompactGraph g, std::vector<Property> props);
CompactGraph attach_edge_props(CompactGraph g, std::vector<Property> props);

std::string encode_graph(const CompactGraph& g);
CompactGraph decode_graph(std::string_view bytes);

void save_graph(const CompactGraph& g, const std::filesystem::path& path);
CompactGraph load_graph(const std::filesystem::path& path);

}  // namespace connecto
