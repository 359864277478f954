#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace giw {

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

/// Multigraph in dart (half-edge) form. Edge k owns darts 2k and 2k+1:
/// dart 2k runs from -> to, dart 2k+1 runs to -> from, and the involution
/// flips the low bit. Positive darts are the even ones; they index C^1.
/// Loops and parallel edges are allowed.
class Graph {
  public:
    Graph() = default;

    Graph(std::size_t vertex_count,
          const std::vector<std::pair<std::size_t, std::size_t>>& edges,
          std::vector<std::string> vertex_labels = {},
          std::vector<std::string> edge_labels = {})
        : nv_(vertex_count), vertex_labels_(std::move(vertex_labels)),
          edge_labels_(std::move(edge_labels)) {
        origin_.reserve(2 * edges.size());
        terminus_.reserve(2 * edges.size());
        involution_.reserve(2 * edges.size());
        for (const auto& [from, to] : edges) {
            if (from >= nv_ || to >= nv_)
                throw Error("Graph: edge endpoint out of range");
            const std::size_t d = origin_.size();
            origin_.push_back(from);
            terminus_.push_back(to);
            involution_.push_back(d + 1);
            origin_.push_back(to);
            terminus_.push_back(from);
            involution_.push_back(d);
        }
        finish_labels();
        build_stars();
    }

    /// Raw dart data, not checked; see validate(). terminus is derived
    /// from origin and involution where possible.
    static Graph from_darts(std::size_t vertex_count, std::vector<std::size_t> origin,
                            std::vector<std::size_t> involution) {
        if (origin.size() != involution.size())
            throw Error("from_darts: origin/involution size mismatch");
        Graph g;
        g.nv_ = vertex_count;
        g.origin_ = std::move(origin);
        g.involution_ = std::move(involution);
        g.terminus_.assign(g.origin_.size(), npos);
        for (std::size_t d = 0; d < g.origin_.size(); ++d) {
            std::size_t i = g.involution_[d];
            if (i < g.origin_.size())
                g.terminus_[d] = g.origin_[i];
        }
        g.finish_labels();
        g.build_stars();
        return g;
    }

    std::size_t vertex_count() const { return nv_; }
    std::size_t dart_count() const { return origin_.size(); }
    std::size_t edge_count() const { return origin_.size() / 2; }

    std::size_t origin(std::size_t d) const { return origin_[d]; }
    std::size_t terminus(std::size_t d) const { return terminus_[d]; }
    std::size_t involution(std::size_t d) const { return involution_[d]; }

    static bool is_positive(std::size_t d) { return d % 2 == 0; }
    static std::size_t dart_of_edge(std::size_t e) { return 2 * e; }
    static std::size_t edge_of_dart(std::size_t d) { return d / 2; }

    std::size_t edge_from(std::size_t e) const { return origin_[2 * e]; }
    std::size_t edge_to(std::size_t e) const { return terminus_[2 * e]; }
    bool is_loop_edge(std::size_t e) const { return edge_from(e) == edge_to(e); }

    /// Darts leaving v, ascending. Two per incident loop.
    const std::vector<std::size_t>& out_darts(std::size_t v) const { return stars_[v]; }

    const std::string& vertex_label(std::size_t v) const { return vertex_labels_[v]; }
    const std::string& edge_label(std::size_t e) const { return edge_labels_[e]; }

  private:
    void finish_labels() {
        if (vertex_labels_.empty())
            for (std::size_t v = 0; v < nv_; ++v)
                vertex_labels_.push_back("v" + std::to_string(v));
        if (vertex_labels_.size() != nv_)
            throw Error("Graph: vertex label count mismatch");
        if (edge_labels_.empty())
            for (std::size_t e = 0; e < edge_count(); ++e)
                edge_labels_.push_back("e" + std::to_string(e));
        if (edge_labels_.size() != edge_count())
            throw Error("Graph: edge label count mismatch");
    }

    void build_stars() {
        stars_.assign(nv_, {});
        for (std::size_t d = 0; d < origin_.size(); ++d)
            if (origin_[d] < nv_)
                stars_[origin_[d]].push_back(d);
    }

    std::size_t nv_ = 0;
    std::vector<std::size_t> origin_, terminus_, involution_;
    std::vector<std::vector<std::size_t>> stars_;
    std::vector<std::string> vertex_labels_, edge_labels_;
};

/// Structural problems, empty when the dart axioms hold.
inline std::vector<std::string> validate(const Graph& g) {
    std::vector<std::string> problems;
    const std::size_t nd = g.dart_count();
    if (nd % 2 != 0)
        problems.push_back("odd dart count " + std::to_string(nd));
    for (std::size_t d = 0; d < nd; ++d) {
        if (g.origin(d) >= g.vertex_count())
            problems.push_back("dart " + std::to_string(d) + ": origin out of range");
        std::size_t i = g.involution(d);
        if (i >= nd) {
            problems.push_back("dart " + std::to_string(d) + ": involution out of range");
            continue;
        }
        if (i == d)
            problems.push_back("dart " + std::to_string(d) + ": involution fixed point");
        if (g.involution(i) != d)
            problems.push_back("dart " + std::to_string(d) + ": involution not self-inverse");
        if ((d ^ 1) != i)
            problems.push_back("dart " + std::to_string(d) + ": pair convention broken");
        if (g.terminus(d) != g.origin(i))
            problems.push_back("dart " + std::to_string(d) + ": terminus mismatch");
    }
    return problems;
}

inline bool is_connected(const Graph& g) {
    const std::size_t nv = g.vertex_count();
    if (nv <= 1)
        return true;
    std::vector<char> seen(nv, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t d : g.out_darts(v)) {
            std::size_t w = g.terminus(d);
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == nv;
}

/// Vertex sets of the connected components, each ascending, ordered by
/// smallest member.
inline std::vector<std::vector<std::size_t>> components(const Graph& g) {
    const std::size_t nv = g.vertex_count();
    std::vector<char> seen(nv, 0);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t s = 0; s < nv; ++s) {
        if (seen[s])
            continue;
        std::vector<std::size_t> comp, stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            comp.push_back(v);
            for (std::size_t d : g.out_darts(v))
                if (!seen[g.terminus(d)]) {
                    seen[g.terminus(d)] = 1;
                    stack.push_back(g.terminus(d));
                }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

inline std::size_t component_count(const Graph& g) { return components(g).size(); }

/// Walk in dart form: o(darts[j+1]) = t(darts[j]). An empty path is
/// based at start.
struct Path {
    std::size_t start = 0;
    std::vector<std::size_t> darts;

    std::size_t end(const Graph& g) const {
        return darts.empty() ? start : g.terminus(darts.back());
    }
};

/// Shortest path by dart count, breadth-first with dart-id tie-breaks,
/// so the result is deterministic for a given graph.
inline Path find_path(const Graph& g, std::size_t from, std::size_t to) {
    if (from >= g.vertex_count() || to >= g.vertex_count())
        throw Error("find_path: vertex out of range");
    Path path;
    path.start = from;
    if (from == to)
        return path;
    std::vector<std::size_t> parent(g.vertex_count(), npos);
    std::queue<std::size_t> q;
    std::vector<char> seen(g.vertex_count(), 0);
    seen[from] = 1;
    q.push(from);
    while (!q.empty() && !seen[to]) {
        std::size_t v = q.front();
        q.pop();
        for (std::size_t d : g.out_darts(v)) {
            std::size_t w = g.terminus(d);
            if (seen[w])
                continue;
            seen[w] = 1;
            parent[w] = d;
            q.push(w);
        }
    }
    if (!seen[to])
        throw NotConnectedError("find_path: no path from " + g.vertex_label(from) +
                                " to " + g.vertex_label(to));
    for (std::size_t v = to; v != from; v = g.origin(parent[v]))
        path.darts.push_back(parent[v]);
    std::reverse(path.darts.begin(), path.darts.end());
    return path;
}

/// Edge indices of a spanning tree, chosen greedily in edge-id order
/// (deterministic). Throws NotConnectedError when none exists.
inline std::vector<std::size_t> spanning_tree(const Graph& g) {
    const std::size_t nv = g.vertex_count();
    std::vector<std::size_t> parent(nv);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    std::vector<std::size_t> tree;
    for (std::size_t e = 0; e < g.edge_count() && tree.size() + 1 < nv; ++e) {
        std::size_t a = find(g.edge_from(e)), b = find(g.edge_to(e));
        if (a != b) {
            parent[a] = b;
            tree.push_back(e);
        }
    }
    if (tree.size() + 1 < nv && nv > 0)
        throw NotConnectedError("spanning_tree: graph is not connected");
    return tree;
}

/// Spanning tree turned into a parent structure by BFS from root.
/// parent_dart[v] is the tree dart entering v from its parent
/// (npos at the root).
struct RootedTree {
    std::size_t root = 0;
    std::vector<std::size_t> parent_dart;
    std::vector<char> in_tree; // indexed by edge
};

inline RootedTree root_tree(const Graph& g, const std::vector<std::size_t>& tree_edges,
                            std::size_t root) {
    RootedTree t;
    t.root = root;
    t.parent_dart.assign(g.vertex_count(), npos);
    t.in_tree.assign(g.edge_count(), 0);
    for (std::size_t e : tree_edges)
        t.in_tree[e] = 1;
    std::vector<char> seen(g.vertex_count(), 0);
    std::queue<std::size_t> q;
    q.push(root);
    seen[root] = 1;
    while (!q.empty()) {
        std::size_t v = q.front();
        q.pop();
        for (std::size_t d : g.out_darts(v)) {
            if (!t.in_tree[Graph::edge_of_dart(d)])
                continue;
            std::size_t w = g.terminus(d);
            if (!seen[w]) {
                seen[w] = 1;
                t.parent_dart[w] = d;
                q.push(w);
            }
        }
    }
    for (std::size_t v = 0; v < g.vertex_count(); ++v)
        if (!seen[v])
            throw NotConnectedError("root_tree: tree does not reach vertex " +
                                    g.vertex_label(v));
    return t;
}

/// Map of graphs: vertex map plus dart map commuting with origin and
/// involution. Holds shared ownership of both graphs so morphisms stay
/// valid independently of where the graphs came from.
class GraphMorphism {
  public:
    GraphMorphism(std::shared_ptr<const Graph> domain, std::shared_ptr<const Graph> codomain,
                  std::vector<std::size_t> vertex_map, std::vector<std::size_t> dart_map)
        : dom_(std::move(domain)), cod_(std::move(codomain)),
          vmap_(std::move(vertex_map)), dmap_(std::move(dart_map)) {
        if (!dom_ || !cod_)
            throw Error("GraphMorphism: null graph");
        if (vmap_.size() != dom_->vertex_count() || dmap_.size() != dom_->dart_count())
            throw Error("GraphMorphism: map size mismatch");
    }

    const Graph& domain() const { return *dom_; }
    const Graph& codomain() const { return *cod_; }
    std::shared_ptr<const Graph> domain_ptr() const { return dom_; }
    std::shared_ptr<const Graph> codomain_ptr() const { return cod_; }

    std::size_t vertex_image(std::size_t v) const { return vmap_[v]; }
    std::size_t dart_image(std::size_t d) const { return dmap_[d]; }

    /// Dart images of positive darts are positive.
    bool preserves_orientation() const {
        for (std::size_t d = 0; d < dmap_.size(); d += 2)
            if (!Graph::is_positive(dmap_[d]))
                return false;
        return true;
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> problems;
        for (std::size_t v = 0; v < vmap_.size(); ++v)
            if (vmap_[v] >= cod_->vertex_count())
                problems.push_back("vertex " + std::to_string(v) + ": image out of range");
        for (std::size_t d = 0; d < dmap_.size(); ++d) {
            if (dmap_[d] >= cod_->dart_count()) {
                problems.push_back("dart " + std::to_string(d) + ": image out of range");
                continue;
            }
            if (vmap_[dom_->origin(d)] != cod_->origin(dmap_[d]))
                problems.push_back("dart " + std::to_string(d) + ": origin not preserved");
            if (dmap_[dom_->involution(d)] != cod_->involution(dmap_[d]))
                problems.push_back("dart " + std::to_string(d) + ": involution not preserved");
        }
        return problems;
    }

  private:
    std::shared_ptr<const Graph> dom_, cod_;
    std::vector<std::size_t> vmap_, dmap_;
};

/// Covering test: valid morphism, surjective on vertices, and a star
/// bijection at every domain vertex. Reports the first failure in *why.
inline bool is_covering(const GraphMorphism& f, std::string* why = nullptr) {
    auto fail = [&](const std::string& msg) {
        if (why)
            *why = msg;
        return false;
    };
    auto problems = f.validate();
    if (!problems.empty())
        return fail("not a morphism: " + problems.front());
    const Graph& x = f.domain();
    const Graph& y = f.codomain();
    std::vector<char> hit(y.vertex_count(), 0);
    for (std::size_t v = 0; v < x.vertex_count(); ++v)
        hit[f.vertex_image(v)] = 1;
    for (std::size_t w = 0; w < y.vertex_count(); ++w)
        if (!hit[w])
            return fail("vertex " + y.vertex_label(w) + " not in the image");
    std::vector<std::size_t> seen(y.dart_count(), npos);
    for (std::size_t v = 0; v < x.vertex_count(); ++v) {
        const auto& star = x.out_darts(v);
        const auto& target = y.out_darts(f.vertex_image(v));
        if (star.size() != target.size())
            return fail("star size mismatch at vertex " + x.vertex_label(v));
        for (std::size_t d : star) {
            std::size_t im = f.dart_image(d);
            if (seen[im] == v)
                return fail("star not injective at vertex " + x.vertex_label(v));
            seen[im] = v;
        }
    }
    return true;
}

} // namespace giw
