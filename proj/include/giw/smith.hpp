#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "int_matrix.hpp"

namespace giw {

/// Result of U * A * V = S with U, V unimodular and S diagonal,
/// nonnegative, each entry dividing the next, zeros last.
struct SmithDecomposition {
    IntMatrix u, s, v;
};

namespace detail {

// In-place Smith reduction. u and v, when non-null, accumulate the row
// and column operations applied to s. Skipping them is noticeably faster
// on large matrices where only the diagonal (or only v) is needed.
inline void smith_reduce(IntMatrix& s, IntMatrix* u, IntMatrix* v) {
    const std::size_t r = s.rows(), c = s.cols();

    auto swap_rows = [&](std::size_t a, std::size_t b) {
        s.swap_rows(a, b);
        if (u)
            u->swap_rows(a, b);
    };
    auto swap_cols = [&](std::size_t a, std::size_t b) {
        s.swap_cols(a, b);
        if (v)
            v->swap_cols(a, b);
    };
    auto row_op = [&](std::size_t a, std::size_t b, const Int& q) {
        s.add_row_multiple(a, b, q);
        if (u)
            u->add_row_multiple(a, b, q);
    };
    auto col_op = [&](std::size_t a, std::size_t b, const Int& q) {
        s.add_col_multiple(a, b, q);
        if (v)
            v->add_col_multiple(a, b, q);
    };

    // Nearest-integer quotient, so remainders satisfy |rem| <= |d| / 2
    // and pivots at least halve whenever a reduction leaves one behind.
    auto near_q = [](const Int& x, const Int& d) {
        Int q = x / d;
        Int rem = x - q * d;
        if (rem != 0 && 2 * abs(rem) > abs(d))
            q += (rem > 0) == (d > 0) ? Int(1) : Int(-1);
        return q;
    };

    // One pivot per step t. The global min-|entry| pivot is refreshed on
    // every pass (not just once per step) and the step only advances once
    // the pivot divides the whole remaining submatrix; both are needed to
    // keep intermediate entries from exploding.
    const std::size_t kk = std::min(r, c);
    for (std::size_t t = 0; t < kk; ++t) {
        bool submatrix_zero = false;
        for (;;) {
            std::size_t pi = t, pj = t;
            bool found = false;
            for (std::size_t i = t; i < r; ++i)
                for (std::size_t j = t; j < c; ++j) {
                    const Int& x = s(i, j);
                    if (x == 0)
                        continue;
                    if (!found || abs(x) < abs(s(pi, pj))) {
                        pi = i;
                        pj = j;
                        found = true;
                    }
                }
            if (!found) {
                submatrix_zero = true;
                break;
            }
            swap_rows(t, pi);
            swap_cols(t, pj);

            bool dirty = false;
            for (std::size_t i = t + 1; i < r; ++i) {
                if (s(i, t) == 0)
                    continue;
                Int q = near_q(s(i, t), s(t, t));
                if (q != 0)
                    row_op(i, t, q);
                if (s(i, t) != 0)
                    dirty = true; // remainder becomes a smaller pivot next pass
            }
            for (std::size_t j = t + 1; j < c; ++j) {
                if (s(t, j) == 0)
                    continue;
                Int q = near_q(s(t, j), s(t, t));
                if (q != 0)
                    col_op(j, t, q);
                if (s(t, j) != 0)
                    dirty = true;
            }
            if (dirty)
                continue;

            // Fold a row with a non-multiple into row t; clearing it then
            // strictly shrinks the pivot toward the submatrix gcd.
            bool divides_all = true;
            for (std::size_t i = t + 1; i < r && divides_all; ++i)
                for (std::size_t j = t + 1; j < c; ++j)
                    if (s(i, j) % s(t, t) != 0) {
                        row_op(t, i, Int(-1));
                        divides_all = false;
                        break;
                    }
            if (divides_all)
                break;
        }
        if (submatrix_zero)
            break;
    }

    // Sign normalization.
    auto fix_sign = [&](std::size_t t) {
        if (s(t, t) < 0) {
            s.negate_row(t);
            if (u)
                u->negate_row(t);
        }
    };
    const std::size_t k = std::min(r, c);
    for (std::size_t t = 0; t < k; ++t)
        fix_sign(t);

    // Enforce the divisibility chain d1 | d2 | ... The block trick turns
    // diag(a, b) into diag(gcd, lcm); rows t, t+1 are zero outside the
    // block, so the Euclid steps stay inside it.
    auto fix_pair = [&](std::size_t t) {
        col_op(t, t + 1, Int(-1)); // s(t+1, t) = b
        while (s(t + 1, t) != 0) {
            if (s(t, t) != 0) {
                Int q = s(t + 1, t) / s(t, t);
                row_op(t + 1, t, q);
            }
            if (s(t + 1, t) != 0)
                swap_rows(t, t + 1);
        }
        if (s(t, t + 1) != 0) {
            // gcd divides every entry of the block, so this is exact.
            Int q = s(t, t + 1) / s(t, t);
            col_op(t + 1, t, q);
        }
        fix_sign(t);
        fix_sign(t + 1);
    };
    for (;;) {
        bool chain_ok = true;
        for (std::size_t t = 0; t + 1 < k; ++t) {
            const Int& a = s(t, t);
            const Int& b = s(t + 1, t + 1);
            if (b == 0)
                continue;
            if (a == 0) {
                swap_rows(t, t + 1);
                swap_cols(t, t + 1);
                chain_ok = false;
                break;
            }
            if (b % a != 0) {
                fix_pair(t);
                chain_ok = false;
                break;
            }
        }
        if (chain_ok)
            break;
    }
}

} // namespace detail

inline SmithDecomposition smith_normal_form(const IntMatrix& a) {
    SmithDecomposition d{IntMatrix::identity(a.rows()), a, IntMatrix::identity(a.cols())};
    detail::smith_reduce(d.s, &d.u, &d.v);
    return d;
}

/// Diagonal of the Smith form only (no transform matrices).
inline std::vector<Int> smith_diagonal(IntMatrix a) {
    detail::smith_reduce(a, nullptr, nullptr);
    std::vector<Int> d;
    const std::size_t k = std::min(a.rows(), a.cols());
    d.reserve(k);
    for (std::size_t t = 0; t < k; ++t)
        d.push_back(a(t, t));
    return d;
}

/// Finitely generated abelian group, as free rank plus invariant
/// factors in an ascending divisibility chain (all > 1).
struct AbelianGroupStructure {
    std::size_t free_rank = 0;
    std::vector<Int> torsion;

    bool is_trivial() const { return free_rank == 0 && torsion.empty(); }
    bool is_finite() const { return free_rank == 0; }

    Int order() const {
        if (free_rank > 0)
            throw InfiniteGroupError("order: group has free rank " +
                                     std::to_string(free_rank));
        Int n = 1;
        for (const Int& d : torsion)
            n *= d;
        return n;
    }

    bool operator==(const AbelianGroupStructure& o) const {
        return free_rank == o.free_rank && torsion == o.torsion;
    }
    bool operator!=(const AbelianGroupStructure& o) const { return !(*this == o); }

    std::string to_string() const {
        std::ostringstream os;
        if (free_rank > 0)
            os << "Z^" << free_rank;
        for (const Int& d : torsion)
            os << (os.tellp() > 0 ? " x " : "") << "Z/" << d;
        if (os.tellp() == 0)
            os << "0";
        return os.str();
    }
};

/// Structure of coker(A) = Z^rows / column span of A.
inline AbelianGroupStructure cokernel_structure(const IntMatrix& a) {
    AbelianGroupStructure g;
    std::vector<Int> d = smith_diagonal(a);
    std::size_t rank = 0;
    for (const Int& x : d)
        if (x != 0)
            ++rank;
    g.free_rank = a.rows() - rank;
    for (const Int& x : d)
        if (x > 1)
            g.torsion.push_back(x);
    return g;
}

/// Canonical basis of a full-column-rank lattice: column-style Hermite
/// form, pivots positive, entries right of a pivot reduced into [0, pivot).
/// Two matrices whose columns span the same lattice map to the same form.
inline IntMatrix column_hermite_form(IntMatrix m) {
    const std::size_t r = m.rows(), c = m.cols();
    std::size_t fixed = 0;
    for (std::size_t row = 0; row < r && fixed < c; ++row) {
        // Gcd-combine the active columns until row has one nonzero entry.
        for (;;) {
            std::size_t best = c;
            for (std::size_t j = fixed; j < c; ++j)
                if (m(row, j) != 0 && (best == c || abs(m(row, j)) < abs(m(row, best))))
                    best = j;
            if (best == c)
                break; // row is zero on active columns
            bool lone = true;
            for (std::size_t j = fixed; j < c; ++j) {
                if (j == best || m(row, j) == 0)
                    continue;
                Int q = m(row, j) / m(row, best);
                m.add_col_multiple(j, best, q);
                if (m(row, j) != 0)
                    lone = false;
            }
            if (lone) {
                m.swap_cols(fixed, best);
                if (m(row, fixed) < 0)
                    m.negate_col(fixed);
                // Reduce earlier pivot columns at this row.
                const Int& p = m(row, fixed);
                for (std::size_t j = 0; j < fixed; ++j) {
                    Int q = m(row, j) / p;
                    if (m(row, j) - q * p < 0)
                        q -= 1;
                    m.add_col_multiple(j, fixed, q);
                }
                ++fixed;
                break;
            }
        }
    }
    if (fixed < c)
        throw Error("column_hermite_form: columns not independent");
    return m;
}

/// Basis of the saturated integer kernel of A, as matrix columns, in
/// canonical (Hermite) form. Deterministic for a given A.
inline IntMatrix kernel_basis(const IntMatrix& a) {
    IntMatrix s = a;
    IntMatrix v = IntMatrix::identity(a.cols());
    detail::smith_reduce(s, nullptr, &v);
    std::size_t rank = 0;
    const std::size_t k = std::min(s.rows(), s.cols());
    for (std::size_t t = 0; t < k; ++t)
        if (s(t, t) != 0)
            ++rank;
    // Columns of V past the rank span ker(A); SNF kernels are saturated.
    IntMatrix basis = v.columns(rank, a.cols());
    if (basis.cols() == 0)
        return basis;
    return column_hermite_form(std::move(basis));
}

/// Solve K * W = B over the integers, where the columns of K are
/// independent. Returns W; throws if some column of B is outside the
/// column lattice of K.
inline IntMatrix solve_in_lattice(const IntMatrix& k, const IntMatrix& b) {
    if (k.rows() != b.rows())
        throw Error("solve_in_lattice: row mismatch");
    SmithDecomposition d = smith_normal_form(k);
    IntMatrix y = d.u * b;
    std::size_t rank = 0;
    const std::size_t m = std::min(k.rows(), k.cols());
    for (std::size_t t = 0; t < m; ++t)
        if (d.s(t, t) != 0)
            ++rank;
    if (rank != k.cols())
        throw Error("solve_in_lattice: columns of K not independent");
    IntMatrix z(k.cols(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < rank; ++i) {
            if (y(i, j) % d.s(i, i) != 0)
                throw Error("solve_in_lattice: target outside lattice");
            z(i, j) = y(i, j) / d.s(i, i);
        }
        for (std::size_t i = rank; i < k.rows(); ++i)
            if (y(i, j) != 0)
                throw Error("solve_in_lattice: target outside lattice");
    }
    return d.v * z;
}

/// p-adic valuation of a nonzero integer.
inline unsigned valuation(Int x, const Int& p) {
    if (x == 0)
        throw Error("valuation: zero argument");
    unsigned v = 0;
    x = abs(x);
    while (x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

/// p-primary part. Each invariant factor is replaced by its p-power
/// part; trivial factors drop out. Free rank must be zero unless
/// keep_free_rank is set (it then carries through unchanged).
inline AbelianGroupStructure p_part(const AbelianGroupStructure& g, const Int& p,
                                    bool keep_free_rank = false) {
    if (g.free_rank > 0 && !keep_free_rank)
        throw InfiniteGroupError("p_part: group has free rank " +
                                 std::to_string(g.free_rank));
    AbelianGroupStructure out;
    out.free_rank = keep_free_rank ? g.free_rank : 0;
    for (const Int& d : g.torsion) {
        Int q = 1;
        Int x = d;
        while (x % p == 0) {
            x /= p;
            q *= p;
        }
        if (q > 1)
            out.torsion.push_back(q);
    }
    return out;
}

} // namespace giw
