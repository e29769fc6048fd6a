#pragma once

#include "rotconv/tensor.hpp"

// Gather-style and im2col/matmul convolutions. These are the reference
// semantics every scatter-based path is checked against.
//
// All convolutions here are cross-correlations: indices run h+i, w+j and
// kernels are never flipped.

namespace rotconv {

// Valid convolution, output C_out x (H-K_h+1) x (W-K_w+1).
template <typename T>
Tensor3<T> conv_gather_valid(const Tensor3<T>& x, const FilterBank<T>& w) {
  detail::check(x.channels() == w.in_channels(),
                "conv_gather_valid: channel mismatch");
  detail::check(x.height() >= w.kernel_h() && x.width() >= w.kernel_w(),
                "conv_gather_valid: kernel larger than input");
  const int kh = w.kernel_h(), kw = w.kernel_w();
  const int oh = x.height() - kh + 1, ow = x.width() - kw + 1;
  Tensor3<T> y(w.out_channels(), oh, ow);
  for (int co = 0; co < w.out_channels(); ++co)
    for (int h = 0; h < oh; ++h)
      for (int p = 0; p < ow; ++p) {
        T acc = T(0);
        for (int ci = 0; ci < x.channels(); ++ci) {
          const T* plane = w.plane(co, ci);
          for (int i = 0; i < kh; ++i)
            for (int j = 0; j < kw; ++j)
              acc += plane[i * kw + j] * x(ci, h + i, p + j);
        }
        y(co, h, p) = acc;
      }
  return y;
}

// Zero-padded centered convolution, output C_out x H x W. The center offset
// is (floor(K_h/2), floor(K_w/2)); even kernels bias toward the top-left.
template <typename T>
Tensor3<T> conv_gather_same(const Tensor3<T>& x, const FilterBank<T>& w) {
  detail::check(x.channels() == w.in_channels(),
                "conv_gather_same: channel mismatch");
  const int kh = w.kernel_h(), kw = w.kernel_w();
  const int ch = kh / 2, cw = kw / 2;
  const int hh = x.height(), ww = x.width();
  Tensor3<T> y(w.out_channels(), hh, ww);
  for (int co = 0; co < w.out_channels(); ++co)
    for (int p = 0; p < hh; ++p)
      for (int q = 0; q < ww; ++q) {
        T acc = T(0);
        for (int ci = 0; ci < x.channels(); ++ci) {
          const T* plane = w.plane(co, ci);
          for (int i = 0; i < kh; ++i) {
            const int sh = p + i - ch;
            if (sh < 0 || sh >= hh) continue;
            for (int j = 0; j < kw; ++j) {
              const int sw = q + j - cw;
              if (sw < 0 || sw >= ww) continue;
              acc += plane[i * kw + j] * x(ci, sh, sw);
            }
          }
        }
        y(co, p, q) = acc;
      }
  return y;
}

// Data lowering: X_col(k, t) = X(c_i, h+i, w+j) with
//   k = c_i*K_h*K_w + i*K_w + j   and   t = h*W' + w.
// Each input element appears in up to K_h*K_w columns.
template <typename T>
MatrixRM<T> im2col(const Tensor3<T>& x, int kernel_h, int kernel_w) {
  detail::check(kernel_h >= 1 && kernel_w >= 1, "im2col: kernel dims must be >= 1");
  detail::check(x.height() >= kernel_h && x.width() >= kernel_w,
                "im2col: kernel larger than input");
  const int oh = x.height() - kernel_h + 1, ow = x.width() - kernel_w + 1;
  MatrixRM<T> m(x.channels() * kernel_h * kernel_w, oh * ow);
  for (int ci = 0; ci < x.channels(); ++ci)
    for (int i = 0; i < kernel_h; ++i)
      for (int j = 0; j < kernel_w; ++j) {
        const int k = (ci * kernel_h + i) * kernel_w + j;
        T* dst = m.row(k);
        for (int h = 0; h < oh; ++h)
          for (int w = 0; w < ow; ++w) dst[h * ow + w] = x(ci, h + i, w + j);
      }
  return m;
}

// Valid convolution as a single matrix product Y_col = W_row * X_col. The
// filter bank's flat (C_out, C_in*K_h*K_w) layout already is W_row.
template <typename T>
Tensor3<T> conv_via_matmul(const Tensor3<T>& x, const FilterBank<T>& w) {
  detail::check(x.channels() == w.in_channels(),
                "conv_via_matmul: channel mismatch");
  detail::check(x.height() >= w.kernel_h() && x.width() >= w.kernel_w(),
                "conv_via_matmul: kernel larger than input");
  const int oh = x.height() - w.kernel_h() + 1, ow = x.width() - w.kernel_w() + 1;
  MatrixRM<T> xcol = im2col(x, w.kernel_h(), w.kernel_w());
  MatrixRM<T> wrow = MatrixRM<T>::from_data(
      w.out_channels(), w.in_channels() * w.kernel_h() * w.kernel_w(),
      std::vector<T>(w.values().begin(), w.values().end()));
  MatrixRM<T> ycol = matmul(wrow, xcol);
  Tensor3<T> y(w.out_channels(), oh, ow);
  for (int co = 0; co < w.out_channels(); ++co) {
    const T* src = ycol.row(co);
    T* dst = y.plane(co);
    for (int k = 0; k < oh * ow; ++k) dst[k] = src[k];
  }
  return y;
}

}  // namespace rotconv
