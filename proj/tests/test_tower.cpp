#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include <giw/giw.hpp>

#include "test_util.hpp"

using giw::Int;
using giw::IntMatrix;
using giw::TowerSpec;

namespace {

TowerSpec b2_spec(std::size_t levels) {
    TowerSpec spec;
    spec.base = testutil::bouquet(2);
    spec.voltages = {Int(1), Int(1)};
    spec.p = 2;
    spec.levels = levels;
    return spec;
}

TowerSpec x23_spec(std::size_t levels, const Int& p) {
    TowerSpec spec;
    spec.base = testutil::xab(2, 3);
    spec.voltages = {Int(1), Int(0), Int(0), Int(0), Int(0)};
    spec.p = p;
    spec.levels = levels;
    return spec;
}

} // namespace

TEST_CASE("tower spec validation") {
    auto spec = b2_spec(2);
    REQUIRE_NOTHROW(giw::validate_tower_spec(spec));

    spec.p = 4;
    REQUIRE_THROWS_AS(giw::validate_tower_spec(spec), giw::Error);
    spec.p = 2;
    spec.levels = 0;
    REQUIRE_THROWS_AS(giw::validate_tower_spec(spec), giw::Error);

    // A loop with even voltage disconnects every level above the base.
    TowerSpec split;
    split.base = testutil::bouquet(1);
    split.voltages = {Int(2)};
    split.p = 2;
    split.levels = 1;
    REQUIRE_THROWS_AS(giw::validate_tower_spec(split), giw::DisconnectedError);

    TowerSpec zero;
    zero.base = testutil::bouquet(1);
    zero.voltages = {Int(0)};
    zero.p = 2;
    zero.levels = 1;
    REQUIRE_THROWS_AS(giw::validate_tower_spec(zero), giw::DisconnectedError);
}

TEST_CASE("twisted matrices flatten to the level matrices") {
    for (std::size_t n = 0; n <= 2; ++n) {
        auto spec = b2_spec(2);
        auto dg = giw::build_level(spec, n);
        IntMatrix d = giw::twisted_boundary(spec, n).flatten();
        IntMatrix s = giw::twisted_star(spec, n).flatten();
        REQUIRE(d == giw::boundary_matrix(*dg.graph));
        REQUIRE(s == giw::star_matrix(*dg.graph));
        REQUIRE(d * s == giw::laplacian_matrix(*dg.graph));
    }
    // A base with parallel edges and zero voltages on the tree part.
    auto spec = x23_spec(1, 3);
    auto dg = giw::build_level(spec, 1);
    REQUIRE(giw::twisted_boundary(spec, 1).flatten() ==
            giw::boundary_matrix(*dg.graph));
    REQUIRE(giw::twisted_star(spec, 1).flatten() == giw::star_matrix(*dg.graph));
}

TEST_CASE("projected path generator has unit voltage") {
    auto spec = b2_spec(1);
    giw::EdgeChain d0 = giw::delta_zero(spec);
    REQUIRE(d0.coeff == std::vector<Int>{1, 0});
    Int functional = 0;
    for (std::size_t e = 0; e < d0.coeff.size(); ++e)
        functional += spec.voltages[e] * d0.coeff[e];
    REQUIRE(functional % spec.p != 0);
}

TEST_CASE("module structure of the two-loop tower at level one") {
    auto spec = b2_spec(1);
    auto j = giw::j_module_structure(spec, 1);
    REQUIRE(j.free_rank == 1);
    REQUIRE(j.torsion == std::vector<Int>{2});

    auto via = giw::p_primary_jacobian_via_module(spec, 1);
    REQUIRE(via.free_rank == 0);
    REQUIRE(via.torsion == std::vector<Int>{4});

    auto direct = giw::p_primary_jacobian_direct(spec, 1);
    REQUIRE(direct.torsion == std::vector<Int>{4});
}

TEST_CASE("both routes agree level by level on the two-loop tower") {
    auto result = giw::run_tower(b2_spec(4));
    REQUIRE(result.levels.size() == 5);
    REQUIRE(result.all_agree);
    std::vector<unsigned> e;
    for (const auto& row : result.levels) {
        REQUIRE(row.computed);
        REQUIRE(row.route_agree);
        e.push_back(row.e_n);
    }
    REQUIRE(e == std::vector<unsigned>{0, 2, 5, 10, 19});
    REQUIRE(result.fit.has_value());
    REQUIRE(result.fit->fitted);
    REQUIRE(result.fit->lambda == 1);
    REQUIRE(result.fit->mu == 1);
    REQUIRE(result.fit->nu == -1);
    // e_n = 2^n + n - 1 already holds from the base level.
    REQUIRE(result.fit->n0 == 0);
}

TEST_CASE("three-loop tower carries exactly Z/2^n") {
    TowerSpec spec;
    spec.base = testutil::bouquet(3);
    spec.voltages = {Int(1), Int(1), Int(1)};
    spec.p = 2;
    spec.levels = 3;
    auto result = giw::run_tower(spec);
    REQUIRE(result.all_agree);
    for (std::size_t n = 0; n < result.levels.size(); ++n) {
        REQUIRE(result.levels[n].e_n == n);
        if (n > 0)
            REQUIRE(result.levels[n].direct_route.torsion ==
                    std::vector<Int>{Int(1) << n});
    }
    REQUIRE(result.fit->fitted);
    REQUIRE(result.fit->lambda == 0);
    REQUIRE(result.fit->mu == 1);
    REQUIRE(result.fit->nu == 0);
}

TEST_CASE("a non-bouquet base keeps the routes in agreement") {
    auto result = giw::run_tower(x23_spec(2, 3));
    REQUIRE(result.all_agree);
    for (const auto& row : result.levels)
        REQUIRE(row.computed);
}

TEST_CASE("fit recovers the invariants from exact data") {
    auto fit = giw::fit_invariants({Int(0), Int(2), Int(5), Int(10), Int(19)}, 2);
    REQUIRE(fit.fitted);
    REQUIRE((fit.lambda == 1 && fit.mu == 1 && fit.nu == -1));
    REQUIRE(fit.n0 == 0);

    auto linear = giw::fit_invariants({Int(0), Int(1), Int(2), Int(3), Int(4)}, 2);
    REQUIRE(linear.fitted);
    REQUIRE((linear.lambda == 0 && linear.mu == 1 && linear.nu == 0));

    auto three = giw::fit_invariants({Int(0), Int(3), Int(10), Int(29)}, 3);
    REQUIRE(three.fitted);
    REQUIRE((three.lambda == 1 && three.mu == 1 && three.nu == -1));

    SECTION("a late start raises the minimal level") {
        // e_0 off by one from the asymptotic formula.
        auto fit2 = giw::fit_invariants({Int(1), Int(2), Int(5), Int(10), Int(19)}, 2);
        REQUIRE(fit2.fitted);
        REQUIRE(fit2.n0 == 1);
    }

    SECTION("non-integral slope refuses to fit") {
        auto bad = giw::fit_invariants({Int(0), Int(0), Int(0), Int(5)}, 2);
        REQUIRE(!bad.fitted);
    }

    SECTION("too little data") {
        REQUIRE_THROWS_AS(giw::fit_invariants({Int(0), Int(1), Int(2)}, 2),
                          giw::InsufficientLevelsError);
    }
}

TEST_CASE("cap overruns annotate their rows and the run continues") {
    auto spec = b2_spec(3);
    spec.matrix_cap = 8;
    auto result = giw::run_tower(spec);
    REQUIRE(result.levels.size() == 4);
    for (std::size_t n = 0; n <= 2; ++n)
        REQUIRE(result.levels[n].computed);
    REQUIRE(!result.levels[3].computed);
    REQUIRE(!result.levels[3].error.empty());
    REQUIRE(!result.fit.has_value());
    REQUIRE(!result.fit_note.empty());
}

TEST_CASE("debug asserts pass on healthy towers") {
    auto spec = b2_spec(2);
    spec.debug_asserts = true;
    REQUIRE_NOTHROW(giw::run_tower(spec));
}

TEST_CASE("parallel level computation matches the serial run") {
    auto serial = giw::run_tower(b2_spec(3), true, 1);
    auto parallel = giw::run_tower(b2_spec(3), true, 3);
    REQUIRE(serial.levels.size() == parallel.levels.size());
    for (std::size_t n = 0; n < serial.levels.size(); ++n) {
        REQUIRE(serial.levels[n].e_n == parallel.levels[n].e_n);
        REQUIRE(serial.levels[n].direct_route.torsion ==
                parallel.levels[n].direct_route.torsion);
    }
    REQUIRE(serial.fit->lambda == parallel.fit->lambda);
}

TEST_CASE("per-level cache round-trips") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "giw-cache-test";
    fs::remove_all(dir);
    {
        giw::TowerCache cache(dir);
        auto first = giw::run_tower(b2_spec(2), true, 1, &cache);
        REQUIRE(first.all_agree);
        REQUIRE(!fs::is_empty(dir));
    }
    {
        // A fresh cache object must find the stored rows on disk.
        giw::TowerCache cache(dir);
        auto key = giw::tower_cache_key(b2_spec(2));
        auto row = cache.lookup(key, 2);
        REQUIRE(row.has_value());
        REQUIRE(row->e_n == 5);
        auto again = giw::run_tower(b2_spec(2), true, 1, &cache);
        REQUIRE(again.all_agree);
        REQUIRE(again.levels[2].e_n == 5);
    }
    // Different towers get different keys.
    REQUIRE(giw::tower_cache_key(b2_spec(2)) != giw::tower_cache_key(x23_spec(2, 3)));
    fs::remove_all(dir);
}

TEST_CASE("level modulus respects the matrix cap") {
    auto spec = b2_spec(3);
    spec.matrix_cap = 8;
    REQUIRE(giw::level_modulus(spec, 2) == 4);
    REQUIRE_THROWS_AS(giw::level_modulus(spec, 3), giw::CapExceededError);
}
