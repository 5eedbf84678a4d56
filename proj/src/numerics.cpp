// SPDX-License-Identifier: Apache-2.0
#include "dloamp/numerics.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dloamp {

namespace detail {

CVec dft_direct(const CVec& x, int sign) {
  const int n = static_cast<int>(x.size());
  CVec out(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) {
    Cplx acc(0.0, 0.0);
    for (int m = 0; m < n; ++m) {
      // accumulate k*m mod n to keep the angle argument small
      const double ang = sign * 2.0 * std::numbers::pi *
                         static_cast<double>((static_cast<long long>(k) * m) % n) / n;
      acc += x(m) * Cplx(std::cos(ang), std::sin(ang));
    }
    out(k) = acc * scale;
  }
  return out;
}

CVec dft_radix2(const CVec& x, int sign) {
  const size_t n = static_cast<size_t>(x.size());
  CVec a = x;
  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a(static_cast<Eigen::Index>(i)), a(static_cast<Eigen::Index>(j)));
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const Cplx wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      Cplx w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const Cplx u = a(static_cast<Eigen::Index>(i + k));
        const Cplx v = a(static_cast<Eigen::Index>(i + k + len / 2)) * w;
        a(static_cast<Eigen::Index>(i + k)) = u + v;
        a(static_cast<Eigen::Index>(i + k + len / 2)) = u - v;
        w *= wlen;
      }
    }
  }
  return a / std::sqrt(static_cast<double>(n));
}

static CVec dft_dispatch(const CVec& x, int sign) {
  if (x.size() == 0) throw std::invalid_argument("fft: zero-length input");
  const auto n = static_cast<size_t>(x.size());
  if (std::has_single_bit(n)) return dft_radix2(x, sign);
  return dft_direct(x, sign);
}

}  // namespace detail

CVec fft_unitary(const CVec& x) { return detail::dft_dispatch(x, -1); }

CVec ifft_unitary(const CVec& x) { return detail::dft_dispatch(x, +1); }

CMat dft_matrix_unitary(int n) {
  if (n <= 0) throw std::invalid_argument("dft_matrix_unitary: n must be positive");
  CMat f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) {
    for (int m = 0; m < n; ++m) {
      const double ang = -2.0 * std::numbers::pi *
                         static_cast<double>((static_cast<long long>(k) * m) % n) / n;
      f(k, m) = scale * Cplx(std::cos(ang), std::sin(ang));
    }
  }
  return f;
}

RMat complex_to_real_mat(const CMat& m) {
  const Eigen::Index r = m.rows(), c = m.cols();
  RMat out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = m.real();
  out.topRightCorner(r, c) = -m.imag();
  out.bottomLeftCorner(r, c) = m.imag();
  out.bottomRightCorner(r, c) = m.real();
  return out;
}

RVec stack_vec(const CVec& x) {
  RVec out(2 * x.size());
  out.head(x.size()) = x.real();
  out.tail(x.size()) = x.imag();
  return out;
}

CVec unstack_vec(const RVec& xr) {
  if (xr.size() % 2 != 0) throw std::invalid_argument("unstack_vec: odd-length input");
  const Eigen::Index n = xr.size() / 2;
  CVec out(n);
  out.real() = xr.head(n);
  out.imag() = xr.tail(n);
  return out;
}

}  // namespace dloamp
