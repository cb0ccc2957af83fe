#include "connecto/graph.hpp"

#include <algorithm>
#include <deque>

#include "bytes.hpp"
#include "connecto/error.hpp"
#include "connecto/volume_io.hpp"

namespace connecto {

namespace {

constexpr std::string_view kGraphMagic = "CNXGRAPH";
constexpr std::uint64_t kGraphVersion = 1;

[[noreturn]] void unknown_vertex(VertexId v) {
  throw Error(ErrorKind::kUnknownVertex, "unknown vertex " + std::to_string(v));
}

}  // namespace

CompactGraph::CompactGraph(std::vector<VertexId> vertex_ids,
                           std::vector<std::uint64_t> offsets,
                           std::vector<VertexId> edges)
    : vertex_ids_(std::move(vertex_ids)), offsets_(std::move(offsets)), edges_(std::move(edges)) {
  check_invariants();
}

std::size_t CompactGraph::index_of(VertexId v) const {
  const auto it = std::lower_bound(vertex_ids_.begin(), vertex_ids_.end(), v);
  if (it == vertex_ids_.end() || *it != v) unknown_vertex(v);
  return static_cast<std::size_t>(it - vertex_ids_.begin());
}

bool CompactGraph::contains(VertexId v) const {
  return std::binary_search(vertex_ids_.begin(), vertex_ids_.end(), v);
}

const Property& CompactGraph::node_prop(VertexId v) const {
  const std::size_t i = index_of(v);
  if (node_props_.empty()) {
    throw Error(ErrorKind::kInvalidParameter, "graph has no node properties");
  }
  return node_props_[i];
}

const Property& CompactGraph::edge_prop(std::size_t slot) const {
  if (edge_props_.empty()) {
    throw Error(ErrorKind::kInvalidParameter, "graph has no edge properties");
  }
  if (slot >= edge_props_.size()) {
    throw Error(ErrorKind::kOutOfRange, "edge slot " + std::to_string(slot) + " out of range");
  }
  return edge_props_[slot];
}

std::size_t CompactGraph::edge_slot(VertexId from, VertexId to) const {
  const std::size_t i = index_of(from);
  const auto first = edges_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
  const auto last = edges_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
  const auto it = std::lower_bound(first, last, to);
  if (it == last || *it != to) {
    throw Error(ErrorKind::kUnknownVertex,
                "no edge " + std::to_string(from) + " -> " + std::to_string(to));
  }
  return static_cast<std::size_t>(it - edges_.begin());
}

void CompactGraph::check_invariants() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kFormat, "graph: " + msg); };
  const std::size_t n = vertex_ids_.size();
  if (offsets_.size() != n + 1) fail("offset array length must be V+1");
  if (offsets_.front() != 0) fail("offsets[0] must be 0");
  if (offsets_.back() != edges_.size()) fail("offsets[V] must equal the edge array length");
  for (std::size_t i = 1; i < n; ++i) {
    if (vertex_ids_[i - 1] >= vertex_ids_[i]) fail("vertex ids not strictly ascending");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (offsets_[i] > offsets_[i + 1]) fail("offsets decrease");
    for (std::uint64_t s = offsets_[i]; s < offsets_[i + 1]; ++s) {
      const VertexId w = edges_[s];
      if (w == vertex_ids_[i]) fail("self-loop at " + std::to_string(w));
      if (s > offsets_[i] && edges_[s - 1] >= w) fail("neighbour range not strictly ascending");
      if (!contains(w)) fail("edge to unknown vertex " + std::to_string(w));
    }
  }
  // Symmetry: every slot (i -> w) has a matching (w -> i).
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint64_t s = offsets_[i]; s < offsets_[i + 1]; ++s) {
      const std::size_t j = index_of(edges_[s]);
      const auto first = edges_.begin() + static_cast<std::ptrdiff_t>(offsets_[j]);
      const auto last = edges_.begin() + static_cast<std::ptrdiff_t>(offsets_[j + 1]);
      if (!std::binary_search(first, last, vertex_ids_[i])) fail("adjacency not symmetric");
    }
  }
  if (!node_props_.empty() && node_props_.size() != n) fail("node property count mismatch");
  if (!edge_props_.empty() && edge_props_.size() != edges_.size()) {
    fail("edge property count mismatch");
  }
}

CompactGraph build_from_edge_list(const EdgeList& e) {
  std::vector<std::pair<VertexId, VertexId>> directed;
  directed.reserve(e.pairs.size() * 2);
  for (auto [u, v] : e.pairs) {
    if (u == v) continue;
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  std::vector<VertexId> ids;
  std::vector<std::uint64_t> offsets{0};
  std::vector<VertexId> edges;
  edges.reserve(directed.size());
  for (std::size_t s = 0; s < directed.size(); ++s) {
    if (ids.empty() || ids.back() != directed[s].first) {
      if (!ids.empty()) offsets.push_back(s);
      ids.push_back(directed[s].first);
    }
    edges.push_back(directed[s].second);
  }
  if (!ids.empty()) offsets.push_back(edges.size());
  return CompactGraph(std::move(ids), std::move(offsets), std::move(edges));
}

std::span<const VertexId> neighbors(const CompactGraph& g, VertexId v) {
  const std::size_t i = g.index_of(v);
  const auto off = g.offsets();
  return g.edges().subspan(off[i], off[i + 1] - off[i]);
}

std::size_t degree(const CompactGraph& g, VertexId v) { return neighbors(g, v).size(); }

std::uint64_t dot_product(const CompactGraph& g, VertexId u, VertexId v) {
  const auto a = neighbors(g, u);
  const auto b = neighbors(g, v);
  std::uint64_t common = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  return common;
}

std::uint64_t memory_footprint(const CompactGraph& g) {
  return g.edge_slots() + 2 * g.vertex_count();
}

Connectivity to_connectivity(int n) {
  switch (n) {
    case 6: return Connectivity::k6;
    case 18: return Connectivity::k18;
    case 26: return Connectivity::k26;
    default:
      throw Error(ErrorKind::kInvalidParameter,
                  "connectivity must be 6, 18 or 26, got " + std::to_string(n));
  }
}

CompactGraph build_from_binary_volume(const BinaryVolume& b, Connectivity c) {
  const int reach = c == Connectivity::k6 ? 1 : c == Connectivity::k18 ? 2 : 3;
  const Extent3D& e = b.extent;
  const std::int64_t nx = e.width(), ny = e.height(), nz = e.depth();

  // Lexicographic (dz, dy, dx) order is ascending flat-index order, so each
  // neighbour range comes out sorted.
  struct Offset {
    int dz, dy, dx;
  };
  std::vector<Offset> stencil;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int l1 = std::abs(dz) + std::abs(dy) + std::abs(dx);
        if (l1 != 0 && l1 <= reach) stencil.push_back({dz, dy, dx});
      }

  std::vector<VertexId> ids;
  std::vector<std::uint64_t> offsets{0};
  std::vector<VertexId> edges;
  for (std::int64_t z = 0; z < nz; ++z) {
    for (std::int64_t y = 0; y < ny; ++y) {
      for (std::int64_t x = 0; x < nx; ++x) {
        const auto flat = static_cast<std::uint64_t>((z * ny + y) * nx + x);
        if (!b.bits[flat]) continue;
        ids.push_back(flat);
        for (const Offset& o : stencil) {
          const std::int64_t sx = x + o.dx, sy = y + o.dy, sz = z + o.dz;
          if (sx < 0 || sy < 0 || sz < 0 || sx >= nx || sy >= ny || sz >= nz) continue;
          const auto n = static_cast<std::uint64_t>((sz * ny + sy) * nx + sx);
          if (b.bits[n]) edges.push_back(n);
        }
        offsets.push_back(edges.size());
      }
    }
  }
  return CompactGraph(std::move(ids), std::move(offsets), std::move(edges));
}

std::vector<std::uint64_t> Components::sizes() const {
  std::vector<std::uint64_t> out(count, 0);
  for (std::uint64_t l : labels) ++out[l];
  return out;
}

Components connected_components(const CompactGraph& g) {
  constexpr auto kUnset = ~std::uint64_t{0};
  const std::size_t n = g.vertex_count();
  const auto off = g.offsets();
  const auto edges = g.edges();
  Components c{std::vector<std::uint64_t>(n, kUnset), 0};
  std::deque<std::size_t> queue;
  // Vertex ids are ascending, so seeding in index order labels components by
  // their smallest member.
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (c.labels[seed] != kUnset) continue;
    c.labels[seed] = c.count;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t i = queue.front();
      queue.pop_front();
      for (std::uint64_t s = off[i]; s < off[i + 1]; ++s) {
        const std::size_t j = g.index_of(edges[s]);
        if (c.labels[j] == kUnset) {
          c.labels[j] = c.count;
          queue.push_back(j);
        }
      }
    }
    ++c.count;
  }
  return c;
}

CompactGraph attach_node_props(CompactGraph g, std::vector<Property> props) {
  if (props.size() != g.vertex_count()) {
    throw Error(ErrorKind::kInvalidParameter,
                std::to_string(props.size()) + " node properties for " +
                    std::to_string(g.vertex_count()) + " vertices");
  }
  g.node_props_ = std::move(props);
  return g;
}

CompactGraph attach_edge_props(CompactGraph g, std::vector<Property> props) {
  if (props.size() != g.edge_slots()) {
    throw Error(ErrorKind::kInvalidParameter,
                std::to_string(props.size()) + " edge properties for " +
                    std::to_string(g.edge_slots()) + " edge slots");
  }
  g.edge_props_ = std::move(props);
  return g;
}

// Layout, all integers u64 little-endian:
//   "CNXGRAPH" version V E n_node_props n_edge_props
//   vertex_ids[V] offsets[V+1] edges[E]
//   n_node_props x (length, bytes) then n_edge_props x (length, bytes)
// n_node_props is 0 or V; n_edge_props is 0 or E.
std::string encode_graph(const CompactGraph& g) {
  std::string out(kGraphMagic);
  detail::append_u64(out, kGraphVersion);
  detail::append_u64(out, g.vertex_count());
  detail::append_u64(out, g.edge_slots());
  detail::append_u64(out, g.node_props().size());
  detail::append_u64(out, g.edge_props().size());
  for (VertexId v : g.vertex_ids()) detail::append_u64(out, v);
  for (std::uint64_t o : g.offsets()) detail::append_u64(out, o);
  for (VertexId w : g.edges()) detail::append_u64(out, w);
  for (const auto* props : {&g.node_props(), &g.edge_props()}) {
    for (const Property& p : *props) {
      detail::append_u64(out, p.size());
      out += p;
    }
  }
  return out;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    const std::uint64_t v = detail::load_u64(bytes_.data() + pos_);
    pos_ += 8;
    return v;
  }

  std::string_view take(std::uint64_t n) {
    need(n);
    const auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

  // Guards element counts before allocating: each element is >= 8 bytes.
  void expect_at_least(std::uint64_t count, std::uint64_t width) {
    if (count > (bytes_.size() - pos_) / width) truncated();
  }

 private:
  void need(std::uint64_t n) {
    if (n > bytes_.size() - pos_) truncated();
  }
  [[noreturn]] static void truncated() { throw Error(ErrorKind::kFormat, "graph file truncated"); }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

CompactGraph decode_graph(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(kGraphMagic.size()) != kGraphMagic) {
    throw Error(ErrorKind::kFormat, "bad graph magic");
  }
  if (const auto version = r.u64(); version != kGraphVersion) {
    throw Error(ErrorKind::kFormat, "unsupported graph version " + std::to_string(version));
  }
  const std::uint64_t n = r.u64();
  const std::uint64_t m = r.u64();
  const std::uint64_t n_node = r.u64();
  const std::uint64_t n_edge = r.u64();
  if ((n_node != 0 && n_node != n) || (n_edge != 0 && n_edge != m)) {
    throw Error(ErrorKind::kFormat, "property section length mismatch");
  }
  r.expect_at_least(n + (n + 1) + m, 8);
  std::vector<VertexId> ids(n);
  std::vector<std::uint64_t> offsets(n + 1);
  std::vector<VertexId> edges(m);
  for (auto& v : ids) v = r.u64();
  for (auto& o : offsets) o = r.u64();
  for (auto& w : edges) w = r.u64();
  CompactGraph g(std::move(ids), std::move(offsets), std::move(edges));
  r.expect_at_least(n_node + n_edge, 8);
  for (auto* props : {&g.node_props_, &g.edge_props_}) {
    const std::uint64_t count = props == &g.node_props_ ? n_node : n_edge;
    props->reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      const std::uint64_t len = r.u64();
      props->emplace_back(r.take(len));
    }
  }
  if (!r.at_end()) throw Error(ErrorKind::kFormat, "trailing bytes after graph");
  return g;
}

void save_graph(const CompactGraph& g, const std::filesystem::path& path) {
  atomic_write(path, encode_graph(g));
}

CompactGraph load_graph(const std::filesystem::path& path) {
  try {
    return decode_graph(read_file(path));
  } catch (const Error& ex) {
    if (ex.kind() != ErrorKind::kFormat) throw;
    throw Error(ErrorKind::kFormat, path.string() + ": " + ex.what());
  }
}

}  // namespace connecto
