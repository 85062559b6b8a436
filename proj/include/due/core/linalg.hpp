#pragma once

#include <cstddef>

#include "due/core/tensor.hpp"

namespace due {
namespace linalg {

// Plain dense routines on row-major buffers. These back the differentiable
// ops below and are also used directly by closed-form code paths.

// In-place lower Cholesky of the n x n matrix a; reads the lower triangle,
// writes L into it (upper part zeroed). Returns false on a non-positive
// pivot.
bool cholesky_in_place(double* a, std::size_t n);

// Copies k, applies the jitter ladder (1e-8 * mean(diag), escalating x10 up
// to 1e-3 * mean(diag)) and factors. Writes L to l_out (n x n). Returns the
// jitter that succeeded; throws DecompositionError after the ladder is
// exhausted.
double cholesky_jittered(const double* k, std::size_t n, double* l_out);

// Solve L X = B (lower) or L^T X = B in place; b is n x ncols row-major.
// Throws SingularMatrixError on a zero diagonal element.
void solve_lower(const double* l, std::size_t n, double* b, std::size_t ncols);
void solve_lower_transposed(const double* l, std::size_t n, double* b,
                            std::size_t ncols);
// Solve U X = B (upper).
void solve_upper(const double* u, std::size_t n, double* b, std::size_t ncols);

double logdet_from_cholesky(const double* l, std::size_t n);

}  // namespace linalg

// Differentiable lower Cholesky factor of a symmetric matrix, applying the
// jitter ladder before factoring. The jitter is treated as constant in the
// backward rule.
Tensor cholesky(const Tensor& k);

// Differentiable solve: returns x with l x = b for triangular l.
Tensor triangular_solve(const Tensor& l, const Tensor& b, bool lower);

}  // namespace due
