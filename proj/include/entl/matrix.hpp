#pragma once

#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace entl {

/// Dense row-major matrix over an arbitrary element type.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, const T& fill = T())
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<T>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (auto& row : init) {
            require(row.size() == cols_, ErrorKind::InvalidInput, "ragged matrix literal");
            for (auto& x : row) data_.push_back(x);
        }
    }

    static Matrix identity(std::size_t n, const T& zero, const T& one) {
        Matrix m(n, n, zero);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = one;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    T& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    const T& operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
    }

    void swap_cols(std::size_t a, std::size_t b) {
        if (a == b) return;
        for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
    }

    void append_row(std::span<const T> r) {
        if (rows_ == 0 && cols_ == 0) cols_ = r.size();
        require(r.size() == cols_, ErrorKind::InvalidInput, "row length mismatch");
        data_.insert(data_.end(), r.begin(), r.end());
        ++rows_;
    }

    void append_rows(const Matrix& other) {
        if (other.rows_ == 0) return;
        if (rows_ == 0 && cols_ == 0) cols_ = other.cols_;
        require(other.cols_ == cols_, ErrorKind::InvalidInput, "column count mismatch");
        data_.insert(data_.end(), other.data_.begin(), other.data_.end());
        rows_ += other.rows_;
    }

    /// Keeps the first n rows.
    void truncate_rows(std::size_t n) {
        if (n >= rows_) return;
        data_.resize(n * cols_);
        rows_ = n;
    }

    /// Column count for a matrix with no rows (e.g. an empty generator list).
    void set_cols_if_empty(std::size_t c) {
        if (rows_ == 0) cols_ = c;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

} // namespace entl
