#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include <giw/giw.hpp>

#include "test_util.hpp"

using giw::Int;
using giw::IntMatrix;
using giw::VoltageAssignment;

namespace {

VoltageAssignment b2_assignment() {
    return VoltageAssignment(testutil::bouquet(2), {Int(1), Int(1)});
}

} // namespace

TEST_CASE("derived graph of the two-loop bouquet over Z/4") {
    auto dg = giw::derive(b2_assignment(), 4);
    REQUIRE(dg.graph->vertex_count() == 4);
    REQUIRE(dg.graph->edge_count() == 8);
    REQUIRE(giw::validate(*dg.graph).empty());
    REQUIRE(giw::is_connected(*dg.graph));
    // Edge (e, h) runs from (o(e), h) to (t(e), h + a(e)).
    for (std::size_t e = 0; e < 2; ++e)
        for (std::size_t h = 0; h < 4; ++h) {
            std::size_t id = dg.edge_id(e, h);
            REQUIRE(dg.graph->edge_from(id) == h);
            REQUIRE(dg.graph->edge_to(id) == (h + 1) % 4);
        }
    REQUIRE(dg.graph->vertex_label(1) == "v0@1");
    REQUIRE(dg.graph->edge_label(dg.edge_id(1, 2)) == "e1@2");

    std::string why;
    REQUIRE(giw::is_covering(dg.projection(), &why));
}

TEST_CASE("modulus one reproduces the base") {
    auto base = testutil::xab(2, 3);
    std::vector<Int> volts(base->edge_count(), Int(0));
    volts[0] = 1;
    auto dg = giw::derive(VoltageAssignment(base, volts), 1);
    REQUIRE(dg.graph->vertex_count() == base->vertex_count());
    REQUIRE(dg.graph->edge_count() == base->edge_count());
    for (std::size_t e = 0; e < base->edge_count(); ++e) {
        REQUIRE(dg.graph->edge_from(e) == base->edge_from(e));
        REQUIRE(dg.graph->edge_to(e) == base->edge_to(e));
    }
}

TEST_CASE("negative voltages wrap") {
    auto base = testutil::bouquet(1);
    auto dg = giw::derive(VoltageAssignment(base, {Int(-1)}), 3);
    // -1 = 2 mod 3.
    REQUIRE(dg.graph->edge_to(dg.edge_id(0, 0)) == 2);
}

TEST_CASE("galois action permutes fibers and commutes with projection") {
    auto dg = giw::derive(b2_assignment(), 4);
    auto sigma = giw::galois_action(dg, 1);
    REQUIRE(sigma.validate().empty());
    for (std::size_t v = 0; v < 4; ++v)
        REQUIRE(sigma.vertex_image(v) == (v + 1) % 4);
    // Composing the shift four times is the identity.
    std::size_t v = 2;
    for (int i = 0; i < 4; ++i)
        v = sigma.vertex_image(v);
    REQUIRE(v == 2);
    // The projection is shift-invariant.
    auto pi = dg.projection();
    for (std::size_t d = 0; d < dg.graph->dart_count(); ++d)
        REQUIRE(pi.dart_image(sigma.dart_image(d)) == pi.dart_image(d));
}

TEST_CASE("intermediate cover glues the tower levels") {
    auto va = b2_assignment();
    auto upper = giw::derive(va, 4);
    auto mid = giw::intermediate_cover(va, upper, 2);
    REQUIRE(mid.lower.graph->vertex_count() == 2);
    std::string why;
    REQUIRE(giw::is_covering(mid.down, &why));
    REQUIRE_THROWS_AS(giw::intermediate_cover(va, upper, 3), giw::Error);
}

TEST_CASE("holonomy detects derived connectivity") {
    // B1 with voltage 2: over Z/2 the derived graph splits.
    VoltageAssignment va(testutil::bouquet(1), {Int(2)});
    REQUIRE(giw::derived_component_count(va, 2) == 2);
    REQUIRE(giw::derived_component_count(va, 3) == 1);
    auto u2 = giw::connectivity_criterion(va, 2);
    REQUIRE(u2.has_value());
    REQUIRE(*u2 == 1);
    auto u3 = giw::connectivity_criterion(va, 3);
    REQUIRE(u3.has_value());
    REQUIRE(*u3 == 0);

    // All-zero voltages have unbounded disconnection.
    VoltageAssignment trivial(testutil::bouquet(1), {Int(0)});
    REQUIRE(!giw::connectivity_criterion(trivial, 2).has_value());
    REQUIRE(giw::derived_component_count(trivial, 5) == 5);
}

TEST_CASE("holonomy component count matches breadth-first search") {
    std::mt19937 rng(53);
    std::uniform_int_distribution<int> volt(-3, 3);
    for (int trial = 0; trial < 40; ++trial) {
        auto base = testutil::random_connected_multigraph(rng, 4, 7);
        std::vector<Int> volts(base->edge_count());
        for (auto& a : volts)
            a = volt(rng);
        VoltageAssignment va(base, volts);
        for (std::size_t m = 1; m <= 4; ++m) {
            auto dg = giw::derive(va, m);
            REQUIRE(giw::derived_component_count(va, m) ==
                    giw::component_count(*dg.graph));
        }
    }
}

TEST_CASE("spanning tree enumeration") {
    std::vector<std::vector<std::size_t>> listing;
    REQUIRE(giw::enumerate_spanning_trees(*testutil::k4(), 24, &listing) == 16);
    REQUIRE(listing.size() == 16);
    std::set<std::vector<std::size_t>> unique(listing.begin(), listing.end());
    REQUIRE(unique.size() == 16);
    for (const auto& tree : listing)
        REQUIRE(tree.size() == 3);

    REQUIRE(giw::enumerate_spanning_trees(*testutil::xab(2, 3)) == 6);
    REQUIRE(giw::enumerate_spanning_trees(*testutil::bouquet(2)) == 1);
    REQUIRE(giw::enumerate_spanning_trees(*testutil::make_graph(2, {})) == 0);
    REQUIRE_THROWS_AS(giw::enumerate_spanning_trees(*testutil::k4(), 5),
                      giw::TooLargeError);
}

TEST_CASE("enumeration matches the matrix-tree determinant on randoms") {
    std::mt19937 rng(59);
    for (int trial = 0; trial < 30; ++trial) {
        auto g = testutil::random_connected_multigraph(rng, 5, 8);
        REQUIRE(giw::enumerate_spanning_trees(*g) == giw::tree_count(*g));
    }
}

TEST_CASE("lifted spanning trees count as degree times kappa") {
    // Connected double cover of B2: 2 lifts of the single base tree.
    auto dg = giw::derive(b2_assignment(), 2);
    REQUIRE(giw::count_lifted_trees(dg.projection()) == 2);

    // Tree base: the derived graph is a disjoint union of copies, yet
    // every component still lifts the unique spanning tree.
    auto path = testutil::xab(1, 1);
    VoltageAssignment pva(path, {Int(1), Int(0)});
    auto pdg = giw::derive(pva, 2);
    REQUIRE(giw::component_count(*pdg.graph) == 2);
    REQUIRE(giw::count_lifted_trees(pdg.projection()) == 2);

    // K4 over Z/3 via one unit voltage: 3 * 16 lifts.
    std::vector<Int> kv(6, Int(0));
    kv[0] = 1;
    auto kdg = giw::derive(VoltageAssignment(testutil::k4(), kv), 3);
    REQUIRE(giw::count_lifted_trees(kdg.projection()) == 48);
}

TEST_CASE("lifted tree counting rejects non-covers") {
    auto base = testutil::bouquet(1);
    auto path2 = testutil::make_graph(2, {{0, 1}});
    giw::GraphMorphism bad(path2, base, {0, 0}, {0, 1});
    REQUIRE_THROWS_AS(giw::count_lifted_trees(bad), giw::NotACoverError);
}

TEST_CASE("pushforward cokernel of the Z/4 bouquet cover") {
    auto va = b2_assignment();
    auto dg = giw::derive(va, 4);
    // Rank of the cover's cycle space: E - V + 1 = 8 - 4 + 1 = 5.
    REQUIRE(giw::homology_basis(*dg.graph).cols() == 5);
    auto coker = giw::pushforward_cokernel(dg.projection());
    REQUIRE(coker.free_rank == 0);
    REQUIRE(coker.torsion == std::vector<Int>{4});

    auto mid = giw::intermediate_cover(va, dg, 2);
    auto coker2 = giw::pushforward_cokernel(mid.down);
    REQUIRE(coker2.torsion == std::vector<Int>{2});

    auto both = giw::pushforward_cokernel(dg.projection(), Int(2));
    REQUIRE(both.torsion == std::vector<Int>{4});
}

TEST_CASE("pushforward over a tree base is trivial") {
    auto path = testutil::xab(1, 1);
    VoltageAssignment va(path, {Int(1), Int(0)});
    auto dg = giw::derive(va, 2);
    REQUIRE(giw::pushforward_cokernel(dg.projection()).is_trivial());
}
