#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace giw {

using Int = boost::multiprecision::cpp_int;

// Dense matrix over the integers. All arithmetic is exact.
class IntMatrix {
  public:
    IntMatrix() : rows_(0), cols_(0) {}

    IntMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    IntMatrix(std::initializer_list<std::initializer_list<long long>> rows)
        : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw Error("IntMatrix: ragged initializer");
            for (long long x : r)
                data_.emplace_back(x);
        }
    }

    static IntMatrix identity(std::size_t n) {
        IntMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Int& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Int& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    bool operator==(const IntMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }
    bool operator!=(const IntMatrix& o) const { return !(*this == o); }

    bool is_zero() const {
        for (const Int& x : data_)
            if (x != 0)
                return false;
        return true;
    }

    IntMatrix operator*(const IntMatrix& o) const {
        if (cols_ != o.rows_)
            throw Error("IntMatrix: dimension mismatch in product");
        IntMatrix r(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const Int& a = (*this)(i, k);
                if (a == 0)
                    continue;
                for (std::size_t j = 0; j < o.cols_; ++j) {
                    const Int& b = o(k, j);
                    if (b != 0)
                        r(i, j) += a * b;
                }
            }
        return r;
    }

    IntMatrix operator-(const IntMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw Error("IntMatrix: dimension mismatch in difference");
        IntMatrix r(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i)
            r.data_[i] = data_[i] - o.data_[i];
        return r;
    }

    IntMatrix transpose() const {
        IntMatrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                r(j, i) = (*this)(i, j);
        return r;
    }

    // Columns [first, last) as a new matrix.
    IntMatrix columns(std::size_t first, std::size_t last) const {
        IntMatrix r(rows_, last - first);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = first; j < last; ++j)
                r(i, j - first) = (*this)(i, j);
        return r;
    }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b)
            return;
        for (std::size_t j = 0; j < cols_; ++j)
            std::swap((*this)(a, j), (*this)(b, j));
    }

    void swap_cols(std::size_t a, std::size_t b) {
        if (a == b)
            return;
        for (std::size_t i = 0; i < rows_; ++i)
            std::swap((*this)(i, a), (*this)(i, b));
    }

    // row[a] -= q * row[b]
    void add_row_multiple(std::size_t a, std::size_t b, const Int& q) {
        if (q == 0)
            return;
        for (std::size_t j = 0; j < cols_; ++j)
            (*this)(a, j) -= q * (*this)(b, j);
    }

    // col[a] -= q * col[b]
    void add_col_multiple(std::size_t a, std::size_t b, const Int& q) {
        if (q == 0)
            return;
        for (std::size_t i = 0; i < rows_; ++i)
            (*this)(i, a) -= q * (*this)(i, b);
    }

    void negate_row(std::size_t i) {
        for (std::size_t j = 0; j < cols_; ++j)
            (*this)(i, j) = -(*this)(i, j);
    }

    void negate_col(std::size_t j) {
        for (std::size_t i = 0; i < rows_; ++i)
            (*this)(i, j) = -(*this)(i, j);
    }

    std::string to_string() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < rows_; ++i) {
            os << (i ? "\n[" : "[");
            for (std::size_t j = 0; j < cols_; ++j)
                os << (j ? " " : "") << (*this)(i, j);
            os << "]";
        }
        return os.str();
    }

  private:
    std::size_t rows_, cols_;
    std::vector<Int> data_;
};

// Exact determinant by Bareiss fraction-free elimination.
inline Int determinant(IntMatrix a) {
    if (a.rows() != a.cols())
        throw Error("determinant: matrix not square");
    const std::size_t n = a.rows();
    if (n == 0)
        return 1;
    Int prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a(k, k) == 0) {
            std::size_t pivot = k;
            while (pivot < n && a(pivot, k) == 0)
                ++pivot;
            if (pivot == n)
                return 0;
            a.swap_rows(k, pivot);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j)
                a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
            a(i, k) = 0;
        }
        prev = a(k, k);
    }
    Int d = a(n - 1, n - 1);
    return sign < 0 ? Int(-d) : d;
}

} // namespace giw
