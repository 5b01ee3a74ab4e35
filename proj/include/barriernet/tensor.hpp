#pragma once

#include <cstddef>
#include <vector>

namespace barriernet {

// Dense (batch, channels, length) activation block, contiguous row-major.
template <typename T>
struct Tensor {
    int n = 0;
    int c = 0;
    int len = 0;
    std::vector<T> v;

    Tensor() = default;
    Tensor(int n_, int c_, int len_)
        : n(n_), c(c_), len(len_), v(std::size_t(n_) * c_ * len_, T(0)) {}

    T* channel(int b, int ch) { return v.data() + (std::size_t(b) * c + ch) * len; }
    const T* channel(int b, int ch) const { return v.data() + (std::size_t(b) * c + ch) * len; }

    T& at(int b, int ch, int t) { return v[(std::size_t(b) * c + ch) * len + t]; }
    T at(int b, int ch, int t) const { return v[(std::size_t(b) * c + ch) * len + t]; }

    std::size_t size() const { return v.size(); }
    bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && len == o.len; }
};

// Dense (rows, cols) matrix, row-major. Used for pooled features and logits.
template <typename T>
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<T> v;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), v(std::size_t(r) * c, T(0)) {}

    T* row(int r) { return v.data() + std::size_t(r) * cols; }
    const T* row(int r) const { return v.data() + std::size_t(r) * cols; }

    T& at(int r, int c) { return v[std::size_t(r) * cols + c]; }
    T at(int r, int c) const { return v[std::size_t(r) * cols + c]; }
};

}  // namespace barriernet
