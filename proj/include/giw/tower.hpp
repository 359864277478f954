#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "covers.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "group_ring.hpp"
#include "int_matrix.hpp"
#include "jacobian.hpp"
#include "smith.hpp"

namespace giw {

inline bool is_small_prime(const Int& p) {
    if (p < 2)
        return false;
    for (Int d = 2; d * d <= p; ++d)
        if (p % d == 0)
            return false;
    return true;
}

/// A p-power tower over a voltage graph: level n is the derived graph of
/// the voltages read mod p^n. Valid specs are connected at every level.
struct TowerSpec {
    std::shared_ptr<const Graph> base;
    std::vector<Int> voltages;
    Int p = 2;
    std::size_t levels = 1; // N; levels 0..N are computed
    std::size_t base_vertex = 0;
    std::size_t matrix_cap = 4096;
    bool debug_asserts = false;

    VoltageAssignment assignment() const { return VoltageAssignment(base, voltages); }
};

inline void validate_tower_spec(const TowerSpec& spec) {
    if (!spec.base)
        throw Error("tower spec: no base graph");
    auto problems = validate(*spec.base);
    if (!problems.empty())
        throw Error("tower spec: invalid base graph: " + problems.front());
    if (!is_connected(*spec.base))
        throw NotConnectedError("tower spec: base graph is not connected");
    if (spec.voltages.size() != spec.base->edge_count())
        throw Error("tower spec: need one voltage per edge");
    if (spec.base_vertex >= spec.base->vertex_count())
        throw Error("tower spec: base vertex out of range");
    if (!is_small_prime(spec.p))
        throw Error("tower spec: p must be a prime, got " + spec.p.str());
    if (spec.levels < 1)
        throw Error("tower spec: need at least one level");
    auto u = connectivity_criterion(spec.assignment(), spec.p);
    if (!u || *u != 0) {
        std::string uv = u ? std::to_string(*u) : "infinite";
        throw DisconnectedError(
            "tower spec: levels >= 1 are disconnected (holonomy valuation " + uv +
            "; a holonomy prime to p is required)");
    }
}

/// p^n as a machine integer, rejected early when the flattened level
/// would blow the matrix cap anyway.
inline std::size_t level_modulus(const TowerSpec& spec, std::size_t n) {
    Int m(1);
    for (std::size_t i = 0; i < n; ++i)
        m *= spec.p;
    const Int cap(static_cast<unsigned long long>(spec.matrix_cap));
    Int dim = m * Int(static_cast<unsigned long long>(
                      std::max(spec.base->vertex_count(), spec.base->edge_count())));
    if (dim > cap)
        throw CapExceededError("level " + std::to_string(n) + ": flattened dimension " +
                               dim.str() + " exceeds cap " +
                               std::to_string(spec.matrix_cap));
    return static_cast<std::size_t>(m);
}

/// Derived graph of the voltages mod p^n.
inline DerivedGraph build_level(const TowerSpec& spec, std::size_t n) {
    return derive(spec.assignment(), level_modulus(spec, n));
}

namespace detail {

inline long long reduced_voltage(const Int& a, std::size_t m) {
    const Int mi(static_cast<unsigned long long>(m));
    Int r = a % mi;
    if (r < 0)
        r += mi;
    return static_cast<long long>(r);
}

} // namespace detail

/// Boundary over Z[T]/(T^{p^n}-1): column e carries T^{a(e)} at t(e) and
/// -1 at o(e). Flattening it gives exactly the boundary matrix of
/// build_level(spec, n) under the id scheme (v, g) -> v*m + g.
inline GroupRingMatrix twisted_boundary(const TowerSpec& spec, std::size_t n) {
    const std::size_t m = level_modulus(spec, n);
    const Graph& b = *spec.base;
    GroupRingMatrix d(b.vertex_count(), b.edge_count(), m);
    for (std::size_t e = 0; e < b.edge_count(); ++e) {
        d.add_monomial(b.edge_to(e), e, detail::reduced_voltage(spec.voltages[e], m), Int(1));
        d.add_monomial(b.edge_from(e), e, 0, Int(-1));
    }
    return d;
}

/// Star over the same ring: row e carries T^{-a(e)} at t(e) and -1 at
/// o(e); the flatten identity d*s = level Laplacian pins the convention.
inline GroupRingMatrix twisted_star(const TowerSpec& spec, std::size_t n) {
    const std::size_t m = level_modulus(spec, n);
    const Graph& b = *spec.base;
    GroupRingMatrix s(b.edge_count(), b.vertex_count(), m);
    for (std::size_t e = 0; e < b.edge_count(); ++e) {
        s.add_monomial(e, b.edge_to(e), -detail::reduced_voltage(spec.voltages[e], m), Int(1));
        s.add_monomial(e, b.edge_from(e), 0, Int(-1));
    }
    return s;
}

/// Signed base-edge vector of the level-1 path from (v0, 0) to (v0, 1),
/// projected down. It is a closed walk on the base whose voltage is
/// congruent to 1 mod p, so it is a cycle with unit voltage functional.
inline EdgeChain delta_zero(const TowerSpec& spec) {
    DerivedGraph level1 = derive(spec.assignment(), level_modulus(spec, 1));
    GraphMorphism proj = level1.projection();
    Path path = find_path(*level1.graph, level1.vertex_id(spec.base_vertex, 0),
                          level1.vertex_id(spec.base_vertex, 1));
    EdgeChain c;
    c.coeff.assign(spec.base->edge_count(), Int(0));
    for (std::size_t d : path.darts) {
        std::size_t im = proj.dart_image(d);
        c.coeff[Graph::edge_of_dart(im)] += Graph::is_positive(im) ? 1 : -1;
    }
    return c;
}

namespace detail {

/// Flattened level-n data shared by the module-route computations.
struct LevelMatrices {
    std::size_t modulus = 1;
    IntMatrix star;        // flattened twisted star
    IntMatrix h_basis;     // basis of H(n): voltage-functional kernel inside ker d
    IntMatrix norm_vector; // N_n(gamma) applied to the delta_zero lift
};

inline LevelMatrices level_matrices(const TowerSpec& spec, std::size_t n) {
    LevelMatrices lm;
    const std::size_t m = level_modulus(spec, n);
    lm.modulus = m;
    const Graph& b = *spec.base;
    const std::size_t ne = b.edge_count();

    DerivedGraph dg = build_level(spec, n);
    lm.star = twisted_star(spec, n).flatten(spec.matrix_cap);

    // H(n) = kernel of the voltage functional sum_e a(e)*c_(e,h) on the
    // cycle lattice ker(boundary). Cycles at level k have functional
    // value divisible by p^k, so compatible systems of lifts are exactly
    // the functional's kernel; the norm vector spans the complement.
    // The derived graph's fundamental cycles span that kernel lattice.
    IntMatrix cycles = fundamental_cycles(*dg.graph);
    IntMatrix phi(1, ne * m);
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t h = 0; h < m; ++h)
            phi(0, e * m + h) = spec.voltages[e];
    IntMatrix phi_on_cycles = phi * cycles;
    if (phi_on_cycles.is_zero())
        throw InternalCheckError("level " + std::to_string(n) +
                                 ": voltage functional vanishes on the cycle lattice");
    lm.h_basis = cycles * kernel_basis(phi_on_cycles);

    EdgeChain d0 = delta_zero(spec);
    lm.norm_vector = IntMatrix(ne * m, 1);
    for (std::size_t e = 0; e < ne; ++e)
        for (std::size_t h = 0; h < m; ++h)
            lm.norm_vector(e * m + h, 0) = d0.coeff[e];

    if (spec.debug_asserts) {
        IntMatrix boundary = twisted_boundary(spec, n).flatten(spec.matrix_cap);
        if (boundary != boundary_matrix(*dg.graph))
            throw InternalCheckError("level " + std::to_string(n) +
                                     ": twisted boundary does not flatten to the level boundary");
        if (lm.star != star_matrix(*dg.graph))
            throw InternalCheckError("level " + std::to_string(n) +
                                     ": twisted star does not flatten to the level star");
        if (boundary * lm.star != laplacian_matrix(*dg.graph))
            throw InternalCheckError("level " + std::to_string(n) +
                                     ": flattened d*s is not the level Laplacian");
        if (!(boundary * cycles).is_zero() || !(boundary * lm.norm_vector).is_zero())
            throw InternalCheckError("level " + std::to_string(n) +
                                     ": cycle data does not lie in the boundary kernel");
    }
    return lm;
}

inline IntMatrix concat_columns(const IntMatrix& a, const IntMatrix& b) {
    IntMatrix r(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j)
            r(i, j) = a(i, j);
        for (std::size_t j = 0; j < b.cols(); ++j)
            r(i, a.cols() + j) = b(i, j);
    }
    return r;
}

inline AbelianGroupStructure j_structure_from(const LevelMatrices& lm, const Int& p,
                                              std::size_t n) {
    AbelianGroupStructure j = cokernel_structure(concat_columns(lm.h_basis, lm.star));
    if (j.free_rank != 1)
        throw InternalCheckError("level " + std::to_string(n) +
                                 ": module coinvariants have free rank " +
                                 std::to_string(j.free_rank) + ", expected 1");
    return p_part(j, p, /*keep_free_rank=*/true);
}

inline AbelianGroupStructure via_module_from(const LevelMatrices& lm, const Int& p,
                                             std::size_t n) {
    AbelianGroupStructure q = cokernel_structure(
        concat_columns(concat_columns(lm.h_basis, lm.star), lm.norm_vector));
    if (q.free_rank != 0)
        throw InternalCheckError("level " + std::to_string(n) +
                                 ": norm element does not generate the free quotient");
    return p_part(q, p);
}

} // namespace detail

/// Structure of J(n) = C(n)/(H(n) + S(n)): free rank over the level ring
/// plus p-power torsion. Free rank 1 is forced by the tower extension;
/// anything else is an internal error.
inline AbelianGroupStructure j_module_structure(const TowerSpec& spec, std::size_t n) {
    return detail::j_structure_from(detail::level_matrices(spec, n), spec.p, n);
}

/// p-power torsion of the level-n Jacobian by the norm-element quotient
/// of the module route: C(n)/(H(n) + S(n) + Z*N_n(delta0)).
inline AbelianGroupStructure p_primary_jacobian_via_module(const TowerSpec& spec,
                                                           std::size_t n) {
    return detail::via_module_from(detail::level_matrices(spec, n), spec.p, n);
}

/// p-power torsion of the level-n Jacobian computed directly from the
/// derived graph's reduced Laplacian; the independent oracle.
inline AbelianGroupStructure p_primary_jacobian_direct(const TowerSpec& spec,
                                                       std::size_t n) {
    DerivedGraph dg = build_level(spec, n);
    if (!is_connected(*dg.graph))
        throw DisconnectedError("level " + std::to_string(n) + " is not connected");
    return p_part(vertex_jacobian(*dg.graph), spec.p);
}

/// Exponents of the growth law e_n = lambda*p^n + mu*n + nu.
struct IwasawaInvariants {
    Int lambda = 0, mu = 0, nu = 0;
    std::size_t n0 = 0;
    bool fitted = false;
};

/// Exact fit from the top three levels, then the smallest n0 from which
/// the formula reproduces every e_n. No rounding: a fit either holds
/// exactly on the tail or is reported as not fitted.
inline IwasawaInvariants fit_invariants(const std::vector<Int>& e, const Int& p) {
    if (e.size() < 4)
        throw InsufficientLevelsError(
            "fit_invariants: need levels 0..3, got " + std::to_string(e.size()) +
            " values");
    const std::size_t top = e.size() - 1;
    auto ppow = [&](std::size_t k) {
        Int x(1);
        for (std::size_t i = 0; i < k; ++i)
            x *= p;
        return x;
    };
    IwasawaInvariants f;
    Int d1 = e[top] - e[top - 1];
    Int d2 = e[top - 1] - e[top - 2];
    Int den = ppow(top - 2) * (p - 1) * (p - 1);
    if ((d1 - d2) % den != 0)
        return f;
    Int lambda = (d1 - d2) / den;
    if (lambda < 0)
        return f;
    Int mu = d1 - lambda * (ppow(top) - ppow(top - 1));
    Int nu = e[top] - lambda * ppow(top) - mu * Int(static_cast<unsigned long long>(top));
    auto value = [&](std::size_t n) {
        return lambda * ppow(n) + mu * Int(static_cast<unsigned long long>(n)) + nu;
    };
    std::size_t n0 = top - 2; // levels top-2..top match by construction
    while (n0 > 0 && value(n0 - 1) == e[n0 - 1])
        --n0;
    f.lambda = lambda;
    f.mu = mu;
    f.nu = nu;
    f.n0 = n0;
    f.fitted = true;
    return f;
}

/// One tower level: sizes, both routes, valuation, agreement. error is
/// set (and computed false) when a cap stopped the computation.
struct TowerLevelReport {
    std::size_t n = 0;
    std::size_t vertices = 0;
    std::size_t edges = 0;
    AbelianGroupStructure direct_route;
    AbelianGroupStructure module_route;
    AbelianGroupStructure j_module;
    unsigned e_n = 0;
    bool route_agree = false;
    bool computed = false;
    std::string error;
};

struct TowerResult {
    std::vector<TowerLevelReport> levels;
    std::optional<IwasawaInvariants> fit;
    std::string fit_note;
    bool all_agree = true;
};

/// Disk-backed level cache, keyed by a spec fingerprint and the level.
/// Safe to share between threads; concurrent stores of the same key
/// write identical content (tmp file + atomic rename).
class TowerCache {
  public:
    explicit TowerCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        if (!dir_.empty())
            std::filesystem::create_directories(dir_);
    }

    std::optional<TowerLevelReport> lookup(const std::string& key, std::size_t n) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = mem_.find({key, n});
            if (it != mem_.end())
                return it->second;
        }
        if (dir_.empty())
            return std::nullopt;
        std::ifstream in(file_for(key, n));
        if (!in)
            return std::nullopt;
        TowerLevelReport row;
        std::string header, file_key;
        std::size_t file_n = 0;
        if (!(in >> header >> file_key >> file_n) || header != "giw-tower-level" ||
            file_key != key || file_n != n)
            return std::nullopt;
        int agree = 0, computed = 0;
        if (!(in >> row.n >> row.vertices >> row.edges >> row.e_n >> agree >> computed))
            return std::nullopt;
        row.route_agree = agree != 0;
        row.computed = computed != 0;
        if (!read_group(in, row.direct_route) || !read_group(in, row.module_route) ||
            !read_group(in, row.j_module))
            return std::nullopt;
        std::lock_guard<std::mutex> lock(mu_);
        mem_[{key, n}] = row;
        return row;
    }

    void store(const std::string& key, std::size_t n, const TowerLevelReport& row) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            mem_[{key, n}] = row;
        }
        if (dir_.empty() || !row.computed)
            return;
        auto path = file_for(key, n);
        auto tmp = path;
        tmp += ".tmp" + std::to_string(
                   std::hash<std::thread::id>{}(std::this_thread::get_id()));
        {
            std::ofstream out(tmp);
            out << "giw-tower-level " << key << " " << n << "\n"
                << row.n << " " << row.vertices << " " << row.edges << " " << row.e_n
                << " " << (row.route_agree ? 1 : 0) << " " << (row.computed ? 1 : 0)
                << "\n";
            write_group(out, row.direct_route);
            write_group(out, row.module_route);
            write_group(out, row.j_module);
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path, ec);
        if (ec)
            std::filesystem::remove(tmp, ec);
    }

  private:
    std::filesystem::path file_for(const std::string& key, std::size_t n) const {
        return dir_ / (key + "-" + std::to_string(n) + ".level");
    }

    static void write_group(std::ofstream& out, const AbelianGroupStructure& g) {
        out << g.free_rank << " " << g.torsion.size();
        for (const Int& d : g.torsion)
            out << " " << d;
        out << "\n";
    }

    static bool read_group(std::ifstream& in, AbelianGroupStructure& g) {
        std::size_t count = 0;
        if (!(in >> g.free_rank >> count) || count > 100000)
            return false;
        g.torsion.assign(count, Int(0));
        for (std::size_t i = 0; i < count; ++i)
            if (!(in >> g.torsion[i]))
                return false;
        return true;
    }

    std::filesystem::path dir_;
    std::mutex mu_;
    std::map<std::pair<std::string, std::size_t>, TowerLevelReport> mem_;
};

/// Fingerprint of everything a level row depends on (not N or jobs).
inline std::string tower_cache_key(const TowerSpec& spec) {
    std::ostringstream os;
    os << "p" << spec.p << ".v0_" << spec.base_vertex << ".cap" << spec.matrix_cap
       << ".nv" << spec.base->vertex_count() << ".e";
    for (std::size_t e = 0; e < spec.base->edge_count(); ++e)
        os << spec.base->edge_from(e) << ">" << spec.base->edge_to(e) << ",";
    os << ".a";
    for (const Int& a : spec.voltages)
        os << a << ",";
    const std::string s = os.str();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream hex;
    hex << std::hex << h;
    return hex.str();
}

/// All data for one level. Cap overruns surface as CapExceededError.
inline TowerLevelReport compute_level(const TowerSpec& spec, std::size_t n) {
    TowerLevelReport row;
    row.n = n;
    const std::size_t m = level_modulus(spec, n);
    row.vertices = spec.base->vertex_count() * m;
    row.edges = spec.base->edge_count() * m;
    row.direct_route = p_primary_jacobian_direct(spec, n);
    detail::LevelMatrices lm = detail::level_matrices(spec, n);
    row.module_route = detail::via_module_from(lm, spec.p, n);
    row.j_module = detail::j_structure_from(lm, spec.p, n);
    row.route_agree = row.direct_route == row.module_route;
    unsigned e = 0;
    for (const Int& d : row.direct_route.torsion)
        e += valuation(d, spec.p);
    row.e_n = e;
    row.computed = true;
    return row;
}

/// Levels 0..N with both routes, agreement flags, and the invariant fit
/// over the contiguous computed prefix. Cap errors annotate their row
/// and the run continues; other errors propagate. With strict_oracle a
/// route disagreement becomes a hard error instead of an annotation.
inline TowerResult run_tower(const TowerSpec& spec, bool with_fit = true,
                             std::size_t jobs = 1, TowerCache* cache = nullptr,
                             bool strict_oracle = false) {
    validate_tower_spec(spec);
    const std::size_t count = spec.levels + 1;
    TowerResult result;
    result.levels.resize(count);
    const std::string key = cache ? tower_cache_key(spec) : std::string();

    std::vector<std::exception_ptr> failures(count);
    auto work_on = [&](std::size_t n) {
        TowerLevelReport& row = result.levels[n];
        row.n = n;
        try {
            bool from_cache = false;
            if (cache) {
                if (auto hit = cache->lookup(key, n)) {
                    row = *hit;
                    from_cache = true;
                }
            }
            if (!from_cache) {
                row = compute_level(spec, n);
                if (cache)
                    cache->store(key, n, row);
            }
            if (strict_oracle && row.computed && !row.route_agree)
                throw InternalCheckError("route disagreement at level " +
                                         std::to_string(n) + ": direct " +
                                         row.direct_route.to_string() + " vs module " +
                                         row.module_route.to_string());
        } catch (const CapExceededError& e) {
            row.computed = false;
            row.error = e.what();
            // The level sizes are plain arithmetic even when the level
            // itself is too big to process.
            Int m = 1;
            for (std::size_t i = 0; i < n; ++i)
                m *= spec.p;
            Int ne = m * Int(static_cast<std::uint64_t>(spec.base->edge_count()));
            if (ne <= Int(std::numeric_limits<std::size_t>::max())) {
                row.vertices = static_cast<std::size_t>(
                    m * Int(static_cast<std::uint64_t>(spec.base->vertex_count())));
                row.edges = static_cast<std::size_t>(ne);
            }
        } catch (...) {
            failures[n] = std::current_exception();
        }
    };

    if (jobs <= 1 || count == 1) {
        for (std::size_t n = 0; n < count; ++n)
            work_on(n);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                std::size_t n = next.fetch_add(1);
                if (n >= count)
                    return;
                work_on(n);
            }
        };
        std::vector<std::thread> pool;
        const std::size_t width = std::min(jobs, count);
        pool.reserve(width);
        for (std::size_t i = 0; i < width; ++i)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    for (std::size_t n = 0; n < count; ++n)
        if (failures[n])
            std::rethrow_exception(failures[n]);

    for (const auto& row : result.levels)
        if (row.computed && !row.route_agree)
            result.all_agree = false;

    if (with_fit) {
        std::vector<Int> e;
        for (const auto& row : result.levels) {
            if (!row.computed)
                break;
            e.emplace_back(row.e_n);
        }
        try {
            result.fit = fit_invariants(e, spec.p);
            if (!result.fit->fitted)
                result.fit_note = "no exact fit on the top three levels";
        } catch (const InsufficientLevelsError& ex) {
            result.fit_note = ex.what();
        }
    }
    return result;
}

} // namespace giw
