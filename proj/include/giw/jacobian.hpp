#pragma once

#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "int_matrix.hpp"
#include "smith.hpp"

namespace giw {

/// Formal integer combination of vertices.
struct Divisor {
    std::vector<Int> coeff; // per vertex

    Int degree() const {
        Int d(0);
        for (const Int& c : coeff)
            d += c;
        return d;
    }
};

/// Formal integer combination of positively oriented edges.
struct EdgeChain {
    std::vector<Int> coeff; // per edge
};

/// Boundary d: C^1 -> C^0, d(e) = t(e) - o(e) on positive darts.
/// Loop columns are zero.
inline IntMatrix boundary_matrix(const Graph& g) {
    IntMatrix d(g.vertex_count(), g.edge_count());
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        d(g.edge_to(e), e) += 1;
        d(g.edge_from(e), e) -= 1;
    }
    return d;
}

/// Star s: C^0 -> C^1, s(v) = sum of edges into v minus edges out of v.
/// The transpose of the boundary, so loops drop out.
inline IntMatrix star_matrix(const Graph& g) {
    IntMatrix s(g.edge_count(), g.vertex_count());
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        s(e, g.edge_to(e)) += 1;
        s(e, g.edge_from(e)) -= 1;
    }
    return s;
}

/// Laplacian = d ∘ s: degree (loops not counted) on the diagonal, minus
/// adjacency multiplicity off it.
inline IntMatrix laplacian_matrix(const Graph& g) {
    const std::size_t nv = g.vertex_count();
    IntMatrix l(nv, nv);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        std::size_t a = g.edge_from(e), b = g.edge_to(e);
        if (a == b)
            continue;
        l(a, a) += 1;
        l(b, b) += 1;
        l(a, b) -= 1;
        l(b, a) -= 1;
    }
    return l;
}

/// Laplacian with the sink row and column removed.
inline IntMatrix reduced_laplacian(const Graph& g, std::size_t sink = 0) {
    if (sink >= g.vertex_count())
        throw Error("reduced_laplacian: sink out of range");
    IntMatrix l = laplacian_matrix(g);
    const std::size_t n = g.vertex_count();
    IntMatrix r(n - 1, n - 1);
    for (std::size_t i = 0, ri = 0; i < n; ++i) {
        if (i == sink)
            continue;
        for (std::size_t j = 0, rj = 0; j < n; ++j) {
            if (j == sink)
                continue;
            r(ri, rj) = l(i, j);
            ++rj;
        }
        ++ri;
    }
    return r;
}

/// Spanning tree count by the matrix-tree determinant.
inline Int tree_count(const Graph& g) {
    if (!is_connected(g))
        return 0;
    if (g.vertex_count() <= 1)
        return 1;
    return determinant(reduced_laplacian(g));
}

/// Basis of the cycle lattice ker(d), columns in canonical form.
inline IntMatrix homology_basis(const Graph& g) {
    return kernel_basis(boundary_matrix(g));
}

/// Fundamental cycles of a connected graph: one column per cotree edge,
/// the edge plus the tree path closing it up. Spans the same lattice as
/// homology_basis at linear cost, entries in {-1, 0, 1}.
inline IntMatrix fundamental_cycles(const Graph& g) {
    const std::size_t ne = g.edge_count();
    std::vector<std::size_t> tree = spanning_tree(g);
    RootedTree rt = root_tree(g, tree, 0);
    std::size_t rank = ne - tree.size();
    IntMatrix basis(ne, rank);
    std::size_t col = 0;
    for (std::size_t e = 0; e < ne; ++e) {
        if (rt.in_tree[e])
            continue;
        basis(e, col) += 1;
        // Walking v toward the root traverses each parent dart backward.
        auto add_walk = [&](std::size_t v, int sign) {
            while (v != rt.root) {
                std::size_t d = rt.parent_dart[v];
                int step = Graph::is_positive(d) ? -1 : 1;
                basis(Graph::edge_of_dart(d), col) += sign * step;
                v = g.origin(d);
            }
        };
        add_walk(g.edge_to(e), 1);
        add_walk(g.edge_from(e), -1);
        ++col;
    }
    return basis;
}

/// The same basis as a list of edge chains.
inline std::vector<EdgeChain> homology_chains(const Graph& g) {
    IntMatrix k = homology_basis(g);
    std::vector<EdgeChain> out(k.cols());
    for (std::size_t j = 0; j < k.cols(); ++j) {
        out[j].coeff.resize(k.rows());
        for (std::size_t i = 0; i < k.rows(); ++i)
            out[j].coeff[i] = k(i, j);
    }
    return out;
}

/// Degree-zero divisors modulo principal ones, presented by the reduced
/// Laplacian. Requires a connected graph.
inline AbelianGroupStructure vertex_jacobian(const Graph& g) {
    if (!is_connected(g))
        throw NotConnectedError("vertex_jacobian: graph is not connected");
    if (g.vertex_count() <= 1)
        return {};
    return cokernel_structure(reduced_laplacian(g));
}

/// Z E+ modulo the cycle lattice plus the star image. Requires a
/// connected graph.
inline AbelianGroupStructure edge_jacobian(const Graph& g) {
    if (!is_connected(g))
        throw NotConnectedError("edge_jacobian: graph is not connected");
    const std::size_t ne = g.edge_count();
    IntMatrix cycles = homology_basis(g);
    IntMatrix stars = star_matrix(g);
    IntMatrix gen(ne, cycles.cols() + stars.cols());
    for (std::size_t i = 0; i < ne; ++i) {
        for (std::size_t j = 0; j < cycles.cols(); ++j)
            gen(i, j) = cycles(i, j);
        for (std::size_t j = 0; j < stars.cols(); ++j)
            gen(i, cycles.cols() + j) = stars(i, j);
    }
    return cokernel_structure(gen);
}

struct JacobianReport {
    AbelianGroupStructure vertex;
    AbelianGroupStructure edge;
    Int order = 0;
    bool agree = false;
};

/// Both presentations side by side. agree compares the invariant
/// factors; the two definitions give isomorphic groups on every
/// connected graph, so a false here means an implementation bug.
inline JacobianReport jacobian_report(const Graph& g) {
    JacobianReport r;
    r.vertex = vertex_jacobian(g);
    r.edge = edge_jacobian(g);
    r.agree = r.vertex.torsion == r.edge.torsion && r.edge.free_rank == 0;
    r.order = r.vertex.order();
    return r;
}

} // namespace giw
