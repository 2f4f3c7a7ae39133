#pragma once

#include "unfold/matrix.hpp"

namespace unfold {

// out[i] = sum_j A[i,j] * v[j]
Vec matvec(const Matrix &A, const Vec &v);

// out[j] = sum_i A[i,j] * v[i]
Vec matvec_transpose(const Matrix &A, const Vec &v);

// H^T H. Upper triangle is computed and mirrored, so the result is
// symmetric to exact bit equality.
Matrix gram(const Matrix &H);

// Solve G u = b for square symmetric G via partially pivoted elimination.
// A pivot below 1e-12 * max|G| raises SingularMatrixError.
Vec solve_normal_equations(const Matrix &G, const Vec &b);

double dot(const Vec &a, const Vec &b);
double norm2_sq(const Vec &v);          // squared Euclidean norm
double frobenius_sq(const Matrix &A);

} // namespace unfold
