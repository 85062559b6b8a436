#pragma once

#include <vector>

#include "due/core/tensor.hpp"

// Differentiable tensor operations. Binary elementwise ops accept equal
// shapes or a size-1 operand broadcast against the other side. All inputs
// are 64-bit floats; every op here has an analytic backward rule checked
// against central finite differences in the test suite.

namespace due {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor add_scalar(const Tensor& a, double c);
Tensor mul_scalar(const Tensor& a, double c);

Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor elu(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor clamp_min(const Tensor& a, double floor);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor col_mean(const Tensor& a);  // [n x d] -> {d}

// Broadcast a length-d vector across the rows of an [n x d] matrix.
Tensor add_rowvec(const Tensor& x, const Tensor& v);
Tensor sub_rowvec(const Tensor& x, const Tensor& v);
Tensor mul_rowvec(const Tensor& x, const Tensor& v);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// (i, j) -> squared Euclidean distance between row i of a and row j of b,
// clamped at zero to absorb rounding.
Tensor pairwise_sqdist(const Tensor& a, const Tensor& b);

Tensor colwise_sqnorm(const Tensor& a);  // [m x n] -> {n, 1}
Tensor diag_part(const Tensor& a);       // [n x n] -> {n, 1}

// Unconstrained square matrix -> lower triangular factor with positive
// diagonal: strict lower part copied, diagonal exponentiated, upper zeroed.
Tensor lower_tri_posdiag(const Tensor& raw);

Tensor hstack(const std::vector<Tensor>& parts);
Tensor reshape(const Tensor& a, Shape target);

Tensor logsumexp_rows(const Tensor& f);  // [n x T] -> {n, 1}
Tensor take_per_row(const Tensor& f, const std::vector<std::size_t>& idx);

}  // namespace due
