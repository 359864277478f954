#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <giw/giw.hpp>

#include "test_util.hpp"

using giw::Int;
using giw::IntMatrix;

TEST_CASE("boundary, star, and Laplacian on K4") {
    auto g = testutil::k4();
    IntMatrix d = giw::boundary_matrix(*g);
    IntMatrix s = giw::star_matrix(*g);
    IntMatrix lap = giw::laplacian_matrix(*g);
    REQUIRE(d.rows() == 4);
    REQUIRE(d.cols() == 6);
    REQUIRE(d * s == lap);
    for (std::size_t v = 0; v < 4; ++v)
        REQUIRE(lap(v, v) == 3);
    for (std::size_t v = 0; v < 4; ++v)
        for (std::size_t w = 0; w < 4; ++w)
            if (v != w)
                REQUIRE(lap(v, w) == -1);
}

TEST_CASE("loops vanish in the Laplacian but keep their edge columns") {
    auto g = testutil::make_graph(1, {{0, 0}});
    IntMatrix lap = giw::laplacian_matrix(*g);
    REQUIRE(lap.rows() == 1);
    REQUIRE(lap(0, 0) == 0);
    IntMatrix d = giw::boundary_matrix(*g);
    REQUIRE(d.cols() == 1);
    REQUIRE(d(0, 0) == 0);
    REQUIRE(giw::boundary_matrix(*g) * giw::star_matrix(*g) == lap);
    // A bouquet is all cycle space: homology rank equals loop count.
    REQUIRE(giw::homology_basis(*testutil::bouquet(3)).cols() == 3);
}

TEST_CASE("factorization holds on random multigraphs") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        auto g = testutil::random_connected_multigraph(rng, 6, 12);
        REQUIRE(giw::boundary_matrix(*g) * giw::star_matrix(*g) ==
                giw::laplacian_matrix(*g));
    }
}

TEST_CASE("K4 Jacobian is (Z/4)^2 and counts the 16 spanning trees") {
    auto g = testutil::k4();
    auto jac = giw::vertex_jacobian(*g);
    REQUIRE(jac.free_rank == 0);
    REQUIRE(jac.torsion == std::vector<Int>{4, 4});
    REQUIRE(jac.order() == 16);
    REQUIRE(giw::tree_count(*g) == 16);
    auto report = giw::jacobian_report(*g);
    REQUIRE(report.agree);
    REQUIRE(report.order == 16);
    REQUIRE(report.edge.torsion == jac.torsion);
}

TEST_CASE("two-bundle graphs have Jacobian of order ab") {
    for (std::size_t a = 1; a <= 4; ++a)
        for (std::size_t b = 1; b <= 4; ++b) {
            auto g = testutil::xab(a, b);
            auto jac = giw::vertex_jacobian(*g);
            Int order = jac.is_trivial() ? Int(1) : jac.order();
            REQUIRE(order == Int(a) * Int(b));
            REQUIRE(giw::tree_count(*g) == Int(a) * Int(b));
        }
    // The full Laplacian of the (2,3) case presents Z x Z/6.
    auto full = giw::cokernel_structure(giw::laplacian_matrix(*testutil::xab(2, 3)));
    REQUIRE(full.free_rank == 1);
    REQUIRE(full.torsion == std::vector<Int>{6});
}

TEST_CASE("edge and vertex Jacobians agree on random graphs") {
    std::mt19937 rng(29);
    for (int trial = 0; trial < 40; ++trial) {
        auto g = testutil::random_connected_multigraph(rng, 5, 10);
        auto report = giw::jacobian_report(*g);
        REQUIRE(report.agree);
        REQUIRE(report.vertex.torsion == report.edge.torsion);
        REQUIRE(report.edge.free_rank == 0);
    }
}

TEST_CASE("degenerate cases") {
    auto single = testutil::make_graph(1, {});
    REQUIRE(giw::vertex_jacobian(*single).is_trivial());
    REQUIRE(giw::tree_count(*single) == 1);
    auto disconnected = testutil::make_graph(2, {});
    REQUIRE_THROWS_AS(giw::vertex_jacobian(*disconnected), giw::NotConnectedError);
    REQUIRE_THROWS_AS(giw::edge_jacobian(*disconnected), giw::NotConnectedError);
    REQUIRE(giw::tree_count(*disconnected) == 0);
}

TEST_CASE("fundamental cycles span the homology lattice") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        auto g = testutil::random_connected_multigraph(rng, 5, 9);
        IntMatrix fast = giw::fundamental_cycles(*g);
        REQUIRE((giw::boundary_matrix(*g) * fast).is_zero());
        // Equal column Hermite forms mean equal lattices.
        REQUIRE(giw::column_hermite_form(fast) == giw::homology_basis(*g));
    }
    REQUIRE(giw::fundamental_cycles(*testutil::xab(1, 1)).cols() == 0);
}

TEST_CASE("divisors and chains") {
    giw::Divisor d;
    d.coeff = {Int(2), Int(-1), Int(0)};
    REQUIRE(d.degree() == 1);
    auto chains = giw::homology_chains(*testutil::cycle(3));
    REQUIRE(chains.size() == 1);
    // The fundamental cycle uses every edge once, up to global sign.
    Int norm = 0;
    for (const Int& c : chains[0].coeff)
        norm += abs(c);
    REQUIRE(norm == 3);
}
