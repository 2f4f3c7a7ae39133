#include "unfold/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace unfold {

Vec matvec(const Matrix &A, const Vec &v) {
    require(A.cols == static_cast<int>(v.size()), "matvec: A.cols != v.len");
    Vec out(A.rows, 0.0);
    for (int i = 0; i < A.rows; ++i) {
        const double *row = A.data.data() + static_cast<size_t>(i) * A.cols;
        double acc = 0.0;
        for (int j = 0; j < A.cols; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

Vec matvec_transpose(const Matrix &A, const Vec &v) {
    require(A.rows == static_cast<int>(v.size()), "matvec_transpose: A.rows != v.len");
    Vec out(A.cols, 0.0);
    for (int i = 0; i < A.rows; ++i) {
        const double *row = A.data.data() + static_cast<size_t>(i) * A.cols;
        const double vi = v[i];
        for (int j = 0; j < A.cols; ++j) out[j] += row[j] * vi;
    }
    return out;
}

Matrix gram(const Matrix &H) {
    Matrix G(H.cols, H.cols);
    for (int a = 0; a < H.cols; ++a) {
        for (int b = a; b < H.cols; ++b) {
            double acc = 0.0;
            for (int i = 0; i < H.rows; ++i) acc += H(i, a) * H(i, b);
            G(a, b) = acc;
            G(b, a) = acc;
        }
    }
    return G;
}

Vec solve_normal_equations(const Matrix &G, const Vec &b) {
    require(G.rows == G.cols, "solve_normal_equations: G must be square");
    require(G.rows == static_cast<int>(b.size()), "solve_normal_equations: size mismatch");
    const int n = G.rows;

    double gmax = 0.0;
    for (double v : G.data) gmax = std::max(gmax, std::abs(v));
    const double tol = 1e-12 * gmax;

    Matrix A = G;
    Vec x = b;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A(r, col)) > std::abs(A(piv, col))) piv = r;
        if (std::abs(A(piv, col)) <= tol)
            throw SingularMatrixError("solve_normal_equations: matrix is singular to working precision");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(A(col, j), A(piv, j));
            std::swap(x[col], x[piv]);
        }
        const double d = A(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = A(r, col) / d;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) A(r, j) -= f * A(col, j);
            x[r] -= f * x[col];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double acc = x[i];
        for (int j = i + 1; j < n; ++j) acc -= A(i, j) * x[j];
        x[i] = acc / A(i, i);
    }
    return x;
}

double dot(const Vec &a, const Vec &b) {
    require(a.size() == b.size(), "dot: length mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2_sq(const Vec &v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

double frobenius_sq(const Matrix &A) {
    double acc = 0.0;
    for (double x : A.data) acc += x * x;
    return acc;
}

} // namespace unfold
