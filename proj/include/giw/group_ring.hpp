#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"
#include "int_matrix.hpp"

namespace giw {

/// Element of Z[T]/(T^m - 1): coefficient vector indexed by exponent.
class GroupRingElement {
  public:
    explicit GroupRingElement(std::size_t modulus) : coeff_(modulus) {}

    static GroupRingElement monomial(std::size_t modulus, long long exponent,
                                     const Int& c = Int(1)) {
        GroupRingElement e(modulus);
        long long m = static_cast<long long>(modulus);
        long long k = ((exponent % m) + m) % m;
        e.coeff_[static_cast<std::size_t>(k)] += c;
        return e;
    }

    std::size_t modulus() const { return coeff_.size(); }
    Int& operator[](std::size_t k) { return coeff_[k]; }
    const Int& operator[](std::size_t k) const { return coeff_[k]; }

    bool is_zero() const {
        for (const Int& c : coeff_)
            if (c != 0)
                return false;
        return true;
    }

    GroupRingElement& operator+=(const GroupRingElement& o) {
        check_modulus(o);
        for (std::size_t k = 0; k < coeff_.size(); ++k)
            coeff_[k] += o.coeff_[k];
        return *this;
    }

    GroupRingElement& operator-=(const GroupRingElement& o) {
        check_modulus(o);
        for (std::size_t k = 0; k < coeff_.size(); ++k)
            coeff_[k] -= o.coeff_[k];
        return *this;
    }

    // Cyclic convolution: (a * b)[k] = sum over i+j = k mod m.
    GroupRingElement operator*(const GroupRingElement& o) const {
        check_modulus(o);
        const std::size_t m = coeff_.size();
        GroupRingElement r(m);
        for (std::size_t i = 0; i < m; ++i) {
            if (coeff_[i] == 0)
                continue;
            for (std::size_t j = 0; j < m; ++j) {
                if (o.coeff_[j] == 0)
                    continue;
                std::size_t k = i + j;
                if (k >= m)
                    k -= m;
                r.coeff_[k] += coeff_[i] * o.coeff_[j];
            }
        }
        return r;
    }

    bool operator==(const GroupRingElement& o) const { return coeff_ == o.coeff_; }

  private:
    void check_modulus(const GroupRingElement& o) const {
        if (o.coeff_.size() != coeff_.size())
            throw Error("GroupRingElement: modulus mismatch");
    }

    std::vector<Int> coeff_;
};

/// Matrix over Z[T]/(T^m - 1). Stored densely; entry (i, j) is a
/// coefficient vector of length m.
class GroupRingMatrix {
  public:
    GroupRingMatrix(std::size_t rows, std::size_t cols, std::size_t modulus)
        : rows_(rows), cols_(cols), modulus_(modulus),
          coeff_(rows * cols * modulus) {
        if (modulus == 0)
            throw Error("GroupRingMatrix: modulus must be positive");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t modulus() const { return modulus_; }

    // Coefficient of T^k in entry (i, j).
    Int& coeff(std::size_t i, std::size_t j, std::size_t k) {
        return coeff_[(i * cols_ + j) * modulus_ + k];
    }
    const Int& coeff(std::size_t i, std::size_t j, std::size_t k) const {
        return coeff_[(i * cols_ + j) * modulus_ + k];
    }

    // Add c * T^exponent to entry (i, j); exponent may be negative.
    void add_monomial(std::size_t i, std::size_t j, long long exponent,
                      const Int& c = Int(1)) {
        long long m = static_cast<long long>(modulus_);
        long long k = ((exponent % m) + m) % m;
        coeff(i, j, static_cast<std::size_t>(k)) += c;
    }

    GroupRingElement entry(std::size_t i, std::size_t j) const {
        GroupRingElement e(modulus_);
        for (std::size_t k = 0; k < modulus_; ++k)
            e[k] = coeff(i, j, k);
        return e;
    }

    GroupRingMatrix operator*(const GroupRingMatrix& o) const {
        if (cols_ != o.rows_ || modulus_ != o.modulus_)
            throw Error("GroupRingMatrix: shape or modulus mismatch in product");
        GroupRingMatrix r(rows_, o.cols_, modulus_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t l = 0; l < cols_; ++l) {
                GroupRingElement a = entry(i, l);
                if (a.is_zero())
                    continue;
                for (std::size_t j = 0; j < o.cols_; ++j) {
                    GroupRingElement b = o.entry(l, j);
                    if (b.is_zero())
                        continue;
                    GroupRingElement p = a * b;
                    for (std::size_t k = 0; k < modulus_; ++k)
                        r.coeff(i, j, k) += p[k];
                }
            }
        return r;
    }

    bool operator==(const GroupRingMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && modulus_ == o.modulus_ &&
               coeff_ == o.coeff_;
    }

    /// Flatten to an integer matrix of circulant blocks: block (i, j) has
    /// (g, h) entry equal to the coefficient of T^(g - h mod m) in entry
    /// (i, j). Row index i*m + g, column index j*m + h. A matrix acting on
    /// formal sums of group-labelled columns then acts identically on the
    /// flattened coordinates.
    IntMatrix flatten(std::size_t max_dim = 4096) const {
        const std::size_t fr = rows_ * modulus_, fc = cols_ * modulus_;
        if (fr > max_dim || fc > max_dim)
            throw CapExceededError("flatten: " + std::to_string(fr) + " x " +
                                   std::to_string(fc) + " exceeds cap " +
                                   std::to_string(max_dim));
        IntMatrix f(fr, fc);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                for (std::size_t g = 0; g < modulus_; ++g)
                    for (std::size_t h = 0; h < modulus_; ++h) {
                        std::size_t k = (g + modulus_ - h) % modulus_;
                        const Int& c = coeff(i, j, k);
                        if (c != 0)
                            f(i * modulus_ + g, j * modulus_ + h) = c;
                    }
        return f;
    }

  private:
    std::size_t rows_, cols_, modulus_;
    std::vector<Int> coeff_;
};

inline IntMatrix flatten_group_ring(const GroupRingMatrix& m, std::size_t max_dim = 4096) {
    return m.flatten(max_dim);
}

} // namespace giw
