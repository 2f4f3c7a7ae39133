#pragma once

#include <cstddef>
#include <vector>

#include "unfold/errors.hpp"

namespace unfold {

using Vec = std::vector<double>;

// Dense row-major matrix of 64-bit floats. Column access is strided.
struct Matrix {
    int rows = 0;
    int cols = 0;
    Vec data; // rows * cols, row-major

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double &operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    size_t size() const { return data.size(); }
    bool same_shape(const Matrix &o) const { return rows == o.rows && cols == o.cols; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline void require(bool cond, const char *msg) {
    if (!cond) throw ContractError(msg);
}

} // namespace unfold
