#pragma once

#include <cstddef>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "int_matrix.hpp"
#include "jacobian.hpp"
#include "smith.hpp"

namespace giw {

/// Graph with an integer voltage on every positive edge. The voltage of
/// the opposite dart is the negative. Deriving over Z/m reads the
/// voltages mod m.
struct VoltageAssignment {
    std::shared_ptr<const Graph> base;
    std::vector<Int> voltages;

    VoltageAssignment(std::shared_ptr<const Graph> base_graph, std::vector<Int> v)
        : base(std::move(base_graph)), voltages(std::move(v)) {
        if (!base)
            throw Error("VoltageAssignment: null graph");
        if (voltages.size() != base->edge_count())
            throw Error("VoltageAssignment: need one voltage per edge");
    }

    Int dart_voltage(std::size_t d) const {
        const Int& a = voltages[Graph::edge_of_dart(d)];
        return Graph::is_positive(d) ? a : Int(-a);
    }
};

/// Derived graph of a voltage assignment over Z/m. Vertex (v, g) has id
/// v*m + g; edge (e, h) has id e*m + h and runs from (o(e), h) to
/// (t(e), h + a(e)). Labels get "@g" appended.
struct DerivedGraph {
    std::shared_ptr<const Graph> graph;
    std::shared_ptr<const Graph> base;
    std::size_t modulus = 1;

    std::size_t vertex_id(std::size_t base_vertex, std::size_t g) const {
        return base_vertex * modulus + g;
    }
    std::size_t edge_id(std::size_t base_edge, std::size_t h) const {
        return base_edge * modulus + h;
    }

    /// The covering projection onto the base.
    GraphMorphism projection() const {
        std::vector<std::size_t> vmap(graph->vertex_count());
        for (std::size_t v = 0; v < base->vertex_count(); ++v)
            for (std::size_t g = 0; g < modulus; ++g)
                vmap[vertex_id(v, g)] = v;
        std::vector<std::size_t> dmap(graph->dart_count());
        for (std::size_t e = 0; e < base->edge_count(); ++e)
            for (std::size_t h = 0; h < modulus; ++h) {
                dmap[2 * edge_id(e, h)] = 2 * e;
                dmap[2 * edge_id(e, h) + 1] = 2 * e + 1;
            }
        return GraphMorphism(graph, base, std::move(vmap), std::move(dmap));
    }
};

inline DerivedGraph derive(const VoltageAssignment& va, std::size_t modulus) {
    if (modulus == 0)
        throw Error("derive: modulus must be positive");
    const Graph& b = *va.base;
    const std::size_t m = modulus;
    const Int mi(static_cast<unsigned long long>(m));

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<std::string> vlabels, elabels;
    edges.reserve(b.edge_count() * m);
    vlabels.reserve(b.vertex_count() * m);
    elabels.reserve(b.edge_count() * m);
    for (std::size_t v = 0; v < b.vertex_count(); ++v)
        for (std::size_t g = 0; g < m; ++g)
            vlabels.push_back(b.vertex_label(v) + "@" + std::to_string(g));
    for (std::size_t e = 0; e < b.edge_count(); ++e) {
        Int a = va.voltages[e] % mi;
        if (a < 0)
            a += mi;
        const std::size_t shift = static_cast<std::size_t>(a);
        for (std::size_t h = 0; h < m; ++h) {
            edges.emplace_back(b.edge_from(e) * m + h,
                               b.edge_to(e) * m + (h + shift) % m);
            elabels.push_back(b.edge_label(e) + "@" + std::to_string(h));
        }
    }
    DerivedGraph dg;
    dg.graph = std::make_shared<Graph>(b.vertex_count() * m, edges,
                                       std::move(vlabels), std::move(elabels));
    dg.base = va.base;
    dg.modulus = m;
    return dg;
}

/// Deck transformation (v, g) -> (v, g + shift) of a derived graph.
inline GraphMorphism galois_action(const DerivedGraph& dg, std::size_t shift) {
    const std::size_t m = dg.modulus;
    shift %= m;
    const Graph& b = *dg.base;
    std::vector<std::size_t> vmap(dg.graph->vertex_count());
    for (std::size_t v = 0; v < b.vertex_count(); ++v)
        for (std::size_t g = 0; g < m; ++g)
            vmap[dg.vertex_id(v, g)] = dg.vertex_id(v, (g + shift) % m);
    std::vector<std::size_t> dmap(dg.graph->dart_count());
    for (std::size_t e = 0; e < b.edge_count(); ++e)
        for (std::size_t h = 0; h < m; ++h) {
            std::size_t from = dg.edge_id(e, h);
            std::size_t to = dg.edge_id(e, (h + shift) % m);
            dmap[2 * from] = 2 * to;
            dmap[2 * from + 1] = 2 * to + 1;
        }
    return GraphMorphism(dg.graph, dg.graph, std::move(vmap), std::move(dmap));
}

/// The two-step factorization through Z/m' for m' | m: the level-m'
/// derived graph together with the reduction map from level m.
struct IntermediateCover {
    DerivedGraph lower;
    GraphMorphism down; // derived(m) -> derived(m')
};

inline IntermediateCover intermediate_cover(const VoltageAssignment& va,
                                            const DerivedGraph& upper,
                                            std::size_t lower_modulus) {
    if (lower_modulus == 0 || upper.modulus % lower_modulus != 0)
        throw Error("intermediate_cover: modulus must divide the upper one");
    DerivedGraph lower = derive(va, lower_modulus);
    const Graph& b = *va.base;
    const std::size_t m = upper.modulus, mp = lower_modulus;
    std::vector<std::size_t> vmap(upper.graph->vertex_count());
    for (std::size_t v = 0; v < b.vertex_count(); ++v)
        for (std::size_t g = 0; g < m; ++g)
            vmap[upper.vertex_id(v, g)] = lower.vertex_id(v, g % mp);
    std::vector<std::size_t> dmap(upper.graph->dart_count());
    for (std::size_t e = 0; e < b.edge_count(); ++e)
        for (std::size_t h = 0; h < m; ++h) {
            std::size_t from = upper.edge_id(e, h);
            std::size_t to = lower.edge_id(e, h % mp);
            dmap[2 * from] = 2 * to;
            dmap[2 * from + 1] = 2 * to + 1;
        }
    GraphMorphism down(upper.graph, lower.graph, std::move(vmap), std::move(dmap));
    return IntermediateCover{std::move(lower), std::move(down)};
}

/// Tree potential and per-edge holonomy of a voltage assignment. The
/// potential integrates voltages along the spanning tree from the root
/// (lowest vertex id); tree edges then carry holonomy zero and a cotree
/// edge e carries theta(o(e)) + a(e) - theta(t(e)).
struct Holonomy {
    std::vector<std::size_t> tree;    // edge ids
    std::vector<Int> potential;       // per vertex
    std::vector<Int> edge_holonomy;   // per edge; zero on tree edges
};

inline Holonomy holonomy(const VoltageAssignment& va) {
    const Graph& g = *va.base;
    Holonomy h;
    h.tree = spanning_tree(g);
    RootedTree rt = root_tree(g, h.tree, 0);
    h.potential.assign(g.vertex_count(), Int(0));
    // parent_dart chains end at the root; fill by increasing BFS depth.
    std::vector<std::size_t> order;
    order.reserve(g.vertex_count());
    std::vector<char> done(g.vertex_count(), 0);
    done[rt.root] = 1;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        std::size_t w = v;
        std::vector<std::size_t> chain;
        while (!done[w]) {
            chain.push_back(w);
            w = g.origin(rt.parent_dart[w]);
        }
        while (!chain.empty()) {
            std::size_t x = chain.back();
            chain.pop_back();
            std::size_t d = rt.parent_dart[x];
            h.potential[x] = h.potential[g.origin(d)] + va.dart_voltage(d);
            done[x] = 1;
        }
    }
    h.edge_holonomy.assign(g.edge_count(), Int(0));
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        if (rt.in_tree[e])
            continue;
        h.edge_holonomy[e] =
            h.potential[g.edge_from(e)] + va.voltages[e] - h.potential[g.edge_to(e)];
    }
    return h;
}

/// Number of components of the derived graph over Z/m, from the gcd of
/// the cotree holonomies. Base must be connected.
inline std::size_t derived_component_count(const VoltageAssignment& va, std::size_t m) {
    Holonomy h = holonomy(va);
    Int g(0);
    for (const Int& x : h.edge_holonomy)
        g = gcd(g, x);
    Int c = gcd(g, Int(static_cast<unsigned long long>(m)));
    if (c == 0)
        c = static_cast<unsigned long long>(m);
    return static_cast<std::size_t>(c);
}

/// Smallest p-adic valuation among the cotree holonomies, or nullopt
/// when all vanish. The derived graph over Z/p^n has p^min(u, n)
/// components, so the whole tower is connected exactly when u == 0.
inline std::optional<unsigned> connectivity_criterion(const VoltageAssignment& va,
                                                      const Int& p) {
    Holonomy h = holonomy(va);
    Int g(0);
    for (const Int& x : h.edge_holonomy)
        g = gcd(g, x);
    if (g == 0)
        return std::nullopt;
    return valuation(g, p);
}

namespace detail {

class RollbackUnionFind {
  public:
    explicit RollbackUnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) const {
        while (parent_[x] != x)
            x = parent_[x];
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        if (size_[a] < size_[b])
            std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        trail_.push_back(b);
        return true;
    }

    std::size_t mark() const { return trail_.size(); }

    void rollback(std::size_t mark) {
        while (trail_.size() > mark) {
            std::size_t b = trail_.back();
            trail_.pop_back();
            size_[parent_[b]] -= size_[b];
            parent_[b] = b;
        }
    }

  private:
    std::vector<std::size_t> parent_, size_;
    std::vector<std::size_t> trail_;
};

} // namespace detail

/// Visit every spanning tree (as an ascending edge-id list) of a graph
/// with at most max_enum_edges edges. Exhaustive backtracking; refuses
/// larger graphs rather than running forever.
template <typename Visitor>
void for_each_spanning_tree(const Graph& g, std::size_t max_enum_edges, Visitor&& visit) {
    if (g.edge_count() > max_enum_edges)
        throw TooLargeError("for_each_spanning_tree: " + std::to_string(g.edge_count()) +
                            " edges exceeds cap " + std::to_string(max_enum_edges));
    const std::size_t nv = g.vertex_count();
    if (nv == 0)
        return;
    const std::size_t need = nv - 1;
    const std::size_t ne = g.edge_count();
    detail::RollbackUnionFind uf(nv);
    std::vector<std::size_t> tree;
    tree.reserve(need);

    const auto& found = tree;
    auto rec = [&](auto&& self, std::size_t e) -> void {
        if (tree.size() == need) {
            visit(found);
            return;
        }
        if (e == ne || ne - e < need - tree.size())
            return;
        if (!g.is_loop_edge(e)) {
            std::size_t m = uf.mark();
            if (uf.unite(g.edge_from(e), g.edge_to(e))) {
                tree.push_back(e);
                self(self, e + 1);
                tree.pop_back();
                uf.rollback(m);
            }
        }
        self(self, e + 1);
    };
    rec(rec, 0);
}

/// Spanning tree count by exhaustive enumeration (cap-guarded). Zero on
/// disconnected input; one for a single vertex.
inline Int enumerate_spanning_trees(const Graph& g, std::size_t max_enum_edges = 24,
                                    std::vector<std::vector<std::size_t>>* list = nullptr) {
    Int count(0);
    for_each_spanning_tree(g, max_enum_edges, [&](const std::vector<std::size_t>& t) {
        ++count;
        if (list)
            list->push_back(t);
    });
    return count;
}

/// Count distinct lifts of spanning trees through a covering: for every
/// spanning tree of the base, the components of its edge preimage are
/// trees mapping isomorphically onto it, and each such component is one
/// lift. Lifts are deduplicated by (vertex set, edge set). The cover may
/// be disconnected; the base must be connected.
inline Int count_lifted_trees(const GraphMorphism& cover,
                              std::size_t max_enum_edges = 24) {
    std::string why;
    if (!is_covering(cover, &why))
        throw NotACoverError("count_lifted_trees: " + why);
    const Graph& x = cover.domain();
    const Graph& y = cover.codomain();
    if (!is_connected(y))
        throw NotConnectedError("count_lifted_trees: base is not connected");

    // Preimage edge lists, indexed by base edge.
    std::vector<std::vector<std::size_t>> fibre(y.edge_count());
    for (std::size_t e = 0; e < x.edge_count(); ++e)
        fibre[Graph::edge_of_dart(cover.dart_image(2 * e))].push_back(e);

    std::set<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> lifts;
    for_each_spanning_tree(y, max_enum_edges, [&](const std::vector<std::size_t>& t) {
        std::vector<char> allowed(x.edge_count(), 0);
        for (std::size_t e : t)
            for (std::size_t lift : fibre[e])
                allowed[lift] = 1;
        std::vector<char> seen(x.vertex_count(), 0);
        for (std::size_t s = 0; s < x.vertex_count(); ++s) {
            if (seen[s])
                continue;
            std::vector<std::size_t> vs, es, stack{s};
            seen[s] = 1;
            while (!stack.empty()) {
                std::size_t v = stack.back();
                stack.pop_back();
                vs.push_back(v);
                for (std::size_t d : x.out_darts(v)) {
                    std::size_t e = Graph::edge_of_dart(d);
                    if (!allowed[e])
                        continue;
                    if (Graph::is_positive(d))
                        es.push_back(e);
                    std::size_t w = x.terminus(d);
                    if (!seen[w]) {
                        seen[w] = 1;
                        stack.push_back(w);
                    }
                }
            }
            std::sort(vs.begin(), vs.end());
            std::sort(es.begin(), es.end());
            es.erase(std::unique(es.begin(), es.end()), es.end());
            lifts.emplace(std::move(vs), std::move(es));
        }
    });
    return Int(static_cast<unsigned long long>(lifts.size()));
}

/// Cokernel of the pushforward on cycle lattices, H1(base) / pi_* H1(cover).
/// For a connected derived cover this recovers the deck group.
inline AbelianGroupStructure pushforward_cokernel(const GraphMorphism& cover,
                                                  const std::optional<Int>& p = std::nullopt) {
    std::string why;
    if (!is_covering(cover, &why))
        throw NotACoverError("pushforward_cokernel: " + why);
    const Graph& x = cover.domain();
    const Graph& y = cover.codomain();

    IntMatrix push(y.edge_count(), x.edge_count());
    for (std::size_t e = 0; e < x.edge_count(); ++e) {
        std::size_t im = cover.dart_image(2 * e);
        push(Graph::edge_of_dart(im), e) += Graph::is_positive(im) ? 1 : -1;
    }
    IntMatrix upstairs = homology_basis(x);
    IntMatrix downstairs = homology_basis(y);
    IntMatrix target = push * upstairs;
    if (downstairs.cols() == 0) {
        // Base is a forest; the pushforward lattice must be zero too.
        if (!target.is_zero())
            throw InternalCheckError("pushforward_cokernel: cycle image off the base lattice");
        return {};
    }
    IntMatrix w = solve_in_lattice(downstairs, target);
    AbelianGroupStructure coker = cokernel_structure(w);
    if (p)
        return p_part(coker, *p);
    return coker;
}

} // namespace giw
