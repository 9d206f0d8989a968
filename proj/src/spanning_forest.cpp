#include "hdp/spanning_forest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <random>

#include "hdp/error.hpp"

namespace hdp {

EdgeList grid_edges(const PyramidLayer& layer) {
  EdgeList list;
  list.node_count = layer.node_count();
  const int w = layer.width;
  const int h = layer.height;
  list.edges.reserve(static_cast<std::size_t>(2) * w * h - w - h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const NodeId p = layer.node(x, y);
      if (x + 1 < w) list.edges.push_back({p, p + 1, edge_weight_unchecked(layer, p, p + 1)});
      if (y + 1 < h) {
        const NodeId q = p + static_cast<NodeId>(w);
        list.edges.push_back({p, q, edge_weight_unchecked(layer, p, q)});
      }
    }
  }
  return list;
}

std::string to_string(TreeKind kind) { return kind == TreeKind::Mst ? "mst" : "rt"; }

TreeKind parse_tree_kind(const std::string& name) {
  if (name == "mst") return TreeKind::Mst;
  if (name == "rt") return TreeKind::Random;
  if (name == "st") throw ConfigError("segment-tree construction is not available; use mst or rt");
  throw ConfigError("unknown tree kind '" + name + "' (expected mst or rt)");
}

std::vector<std::uint32_t> sort_edges_by_weight(const EdgeList& edges) {
  constexpr int kBuckets = 256;
  const auto bucket_of = [](double w) {
    return std::clamp(static_cast<int>(std::floor(w)), 0, kBuckets - 1);
  };

  std::array<std::size_t, kBuckets + 1> start{};
  std::array<bool, kBuckets> fractional{};
  for (const Edge& e : edges.edges) {
    const int b = bucket_of(e.w);
    ++start[static_cast<std::size_t>(b) + 1];
    if (e.w != std::floor(e.w)) fractional[static_cast<std::size_t>(b)] = true;
  }
  for (int b = 0; b < kBuckets; ++b) start[b + 1] += start[b];

  std::vector<std::uint32_t> order(edges.edges.size());
  auto cursor = start;
  for (std::uint32_t i = 0; i < edges.edges.size(); ++i)
    order[cursor[static_cast<std::size_t>(bucket_of(edges.edges[i].w))]++] = i;

  for (int b = 0; b < kBuckets; ++b) {
    if (!fractional[b]) continue;
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start[b]),
                     order.begin() + static_cast<std::ptrdiff_t>(start[b + 1]),
                     [&](std::uint32_t a, std::uint32_t c) { return edges.edges[a].w < edges.edges[c].w; });
  }
  return order;
}

std::vector<std::uint32_t> order_edges(const EdgeList& edges, const EdgeOrdering& ordering) {
  if (ordering.kind == TreeKind::Mst) return sort_edges_by_weight(edges);
  std::vector<std::uint32_t> order(edges.edges.size());
  std::iota(order.begin(), order.end(), 0U);
  std::mt19937_64 rng(ordering.seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

RootedForest root_and_order(const EdgeList& edges, std::span<const std::uint32_t> accepted) {
  const std::size_t n = edges.node_count;

  // Undirected adjacency of the accepted edges, CSR.
  std::vector<std::size_t> adj_begin(n + 1, 0);
  for (std::uint32_t idx : accepted) {
    ++adj_begin[edges.edges[idx].u + 1];
    ++adj_begin[edges.edges[idx].v + 1];
  }
  for (std::size_t i = 0; i < n; ++i) adj_begin[i + 1] += adj_begin[i];
  std::vector<std::pair<NodeId, double>> adj(adj_begin[n]);
  {
    auto fill = adj_begin;
    for (std::uint32_t idx : accepted) {
      const Edge& e = edges.edges[idx];
      adj[fill[e.u]++] = {e.v, e.w};
      adj[fill[e.v]++] = {e.u, e.w};
    }
  }

  RootedForest f;
  f.parent.assign(n, 0);
  f.parent_weight.assign(n, 0.0);
  f.tree_id.assign(n, 0);
  f.order.reserve(n);
  f.child_begin.assign(n + 1, 0);
  std::vector<std::uint8_t> seen(n, 0);

  std::uint32_t tree = 0;
  for (NodeId root = 0; root < n; ++root) {
    if (seen[root]) continue;
    f.tree_begin.push_back(f.order.size());
    seen[root] = 1;
    f.parent[root] = root;
    f.tree_id[root] = tree;
    f.order.push_back(root);
    for (std::size_t head = f.order.size() - 1; head < f.order.size(); ++head) {
      const NodeId v = f.order[head];
      for (std::size_t k = adj_begin[v]; k < adj_begin[v + 1]; ++k) {
        const auto [u, w] = adj[k];
        if (seen[u]) continue;
        seen[u] = 1;
        f.parent[u] = v;
        f.parent_weight[u] = w;
        f.tree_id[u] = tree;
        f.order.push_back(u);
        ++f.child_begin[v + 1];
      }
    }
    ++tree;
  }
  f.tree_begin.push_back(f.order.size());

  for (std::size_t i = 0; i < n; ++i) f.child_begin[i + 1] += f.child_begin[i];
  f.children.resize(f.child_begin[n]);
  auto fill = f.child_begin;
  for (NodeId v : f.order)
    if (!f.is_root(v)) f.children[fill[f.parent[v]]++] = v;

  if (f.edge_count() != accepted.size())
    throw InvariantError("accepted edges do not form a forest");
  return f;
}

RootedForest build_forest(const EdgeList& edges, const EdgeOrdering& ordering) {
  ForestPolicy policy;
  return build_forest(edges, ordering, policy);
}

RasterImage median_filter_3x3(const RasterImage& image) {
  RasterImage out(image.width, image.height, image.channels);
  std::array<std::uint8_t, 9> window{};
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        std::size_t count = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = y + dy;
          if (yy < 0 || yy >= image.height) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = x + dx;
            if (xx < 0 || xx >= image.width) continue;
            window[count++] = image.at(xx, yy, c);
          }
        }
        auto mid = window.begin() + static_cast<std::ptrdiff_t>(count / 2);
        std::nth_element(window.begin(), mid, window.begin() + static_cast<std::ptrdiff_t>(count));
        out.at(x, y, c) = *mid;
      }
    }
  }
  return out;
}

}  // namespace hdp
