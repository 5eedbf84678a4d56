// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>

namespace dloamp {

using Cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

/// Unitary DFT: forward kernel e^{-j2*pi*kn/N}, both directions scaled by
/// 1/sqrt(N), so ifft_unitary(fft_unitary(x)) == x.  Power-of-two sizes go
/// through a radix-2 path, everything else through the direct O(N^2) sum.
CVec fft_unitary(const CVec& x);
CVec ifft_unitary(const CVec& x);

/// The unitary DFT matrix F with F(k,n) = e^{-j*2*pi*kn/N}/sqrt(N).
CMat dft_matrix_unitary(int n);

/// Real embedding of a complex-linear map: [Re -Im; Im Re].
/// Satisfies complex_to_real_mat(M) * stack_vec(x) == stack_vec(M * x).
RMat complex_to_real_mat(const CMat& m);

/// [Re(x); Im(x)] and its inverse.
RVec stack_vec(const CVec& x);
CVec unstack_vec(const RVec& xr);

namespace detail {
// sign = -1 forward, +1 inverse; both unitary (1/sqrt(N) scale).
CVec dft_direct(const CVec& x, int sign);
CVec dft_radix2(const CVec& x, int sign);
}  // namespace detail

}  // namespace dloamp
