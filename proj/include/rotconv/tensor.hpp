#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

// Dense containers and memory-layout helpers shared by every convolution
// path in the library. Storage is flat row-major in (C,H,W) order; strided
// views are deliberately not part of the public surface so that scatter
// index arithmetic stays auditable.
//
// All value types are templated on the scalar: float is the benchmark mode,
// double the correctness/gradient mode.

namespace rotconv {

namespace detail {

inline void check(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace detail

// C x H x W feature map, channel-major.
template <typename T>
class Tensor3 {
  static_assert(std::is_floating_point_v<T>);

 public:
  Tensor3() = default;
  Tensor3(int channels, int height, int width, T fill = T(0))
      : channels_(channels), height_(height), width_(width),
        data_(static_cast<std::size_t>(channels) * height * width, fill) {
    detail::check(channels >= 1 && height >= 1 && width >= 1,
                  "Tensor3: dimensions must be positive");
  }

  static Tensor3 from_data(int channels, int height, int width,
                           std::vector<T> data) {
    Tensor3 t(channels, height, width);
    detail::check(data.size() == t.data_.size(),
                  "Tensor3: data length must equal C*H*W");
    t.data_ = std::move(data);
    return t;
  }

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  // Unchecked fast path; at() is the checked accessor.
  T& operator()(int c, int h, int w) { return data_[index(c, h, w)]; }
  const T& operator()(int c, int h, int w) const { return data_[index(c, h, w)]; }

  T& at(int c, int h, int w) {
    bounds_check(c, h, w);
    return data_[index(c, h, w)];
  }
  const T& at(int c, int h, int w) const {
    bounds_check(c, h, w);
    return data_[index(c, h, w)];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T* plane(int c) { return data_.data() + static_cast<std::size_t>(c) * height_ * width_; }
  const T* plane(int c) const {
    return data_.data() + static_cast<std::size_t>(c) * height_ * width_;
  }

  std::span<const T> values() const { return data_; }
  std::span<T> values() { return data_; }

  void fill(T v) { data_.assign(data_.size(), v); }

  bool same_shape(const Tensor3& o) const {
    return channels_ == o.channels_ && height_ == o.height_ && width_ == o.width_;
  }

 private:
  std::size_t index(int c, int h, int w) const {
    return (static_cast<std::size_t>(c) * height_ + h) * width_ + w;
  }
  void bounds_check(int c, int h, int w) const {
    if (c < 0 || c >= channels_ || h < 0 || h >= height_ || w < 0 || w >= width_)
      throw std::out_of_range("Tensor3: index (" + std::to_string(c) + "," +
                              std::to_string(h) + "," + std::to_string(w) +
                              ") out of range");
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

// C_out x C_in x K_h x K_w kernel weights.
template <typename T>
class FilterBank {
  static_assert(std::is_floating_point_v<T>);

 public:
  FilterBank() = default;
  FilterBank(int out_channels, int in_channels, int kernel_h, int kernel_w,
             T fill = T(0))
      : out_channels_(out_channels), in_channels_(in_channels),
        kernel_h_(kernel_h), kernel_w_(kernel_w),
        data_(static_cast<std::size_t>(out_channels) * in_channels * kernel_h *
                  kernel_w,
              fill) {
    detail::check(out_channels >= 1 && in_channels >= 1, "FilterBank: channel counts must be positive");
    detail::check(kernel_h >= 1 && kernel_w >= 1, "FilterBank: kernel dims must be >= 1");
  }

  static FilterBank from_data(int out_channels, int in_channels, int kernel_h,
                              int kernel_w, std::vector<T> data) {
    FilterBank b(out_channels, in_channels, kernel_h, kernel_w);
    detail::check(data.size() == b.data_.size(),
                  "FilterBank: data length must equal Cout*Cin*Kh*Kw");
    b.data_ = std::move(data);
    return b;
  }

  int out_channels() const { return out_channels_; }
  int in_channels() const { return in_channels_; }
  int kernel_h() const { return kernel_h_; }
  int kernel_w() const { return kernel_w_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int co, int ci, int i, int j) { return data_[index(co, ci, i, j)]; }
  const T& operator()(int co, int ci, int i, int j) const {
    return data_[index(co, ci, i, j)];
  }

  T& at(int co, int ci, int i, int j) {
    bounds_check(co, ci, i, j);
    return data_[index(co, ci, i, j)];
  }
  const T& at(int co, int ci, int i, int j) const {
    bounds_check(co, ci, i, j);
    return data_[index(co, ci, i, j)];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  // Pointer to the K_h x K_w plane of one (co, ci) pair.
  const T* plane(int co, int ci) const {
    return data_.data() +
           (static_cast<std::size_t>(co) * in_channels_ + ci) * kernel_h_ * kernel_w_;
  }
  T* plane(int co, int ci) {
    return data_.data() +
           (static_cast<std::size_t>(co) * in_channels_ + ci) * kernel_h_ * kernel_w_;
  }

  std::span<const T> values() const { return data_; }
  std::span<T> values() { return data_; }

  bool same_shape(const FilterBank& o) const {
    return out_channels_ == o.out_channels_ && in_channels_ == o.in_channels_ &&
           kernel_h_ == o.kernel_h_ && kernel_w_ == o.kernel_w_;
  }
  bool square() const { return kernel_h_ == kernel_w_; }

 private:
  std::size_t index(int co, int ci, int i, int j) const {
    return ((static_cast<std::size_t>(co) * in_channels_ + ci) * kernel_h_ + i) *
               kernel_w_ +
           j;
  }
  void bounds_check(int co, int ci, int i, int j) const {
    if (co < 0 || co >= out_channels_ || ci < 0 || ci >= in_channels_ || i < 0 ||
        i >= kernel_h_ || j < 0 || j >= kernel_w_)
      throw std::out_of_range("FilterBank: index out of range");
  }

  int out_channels_ = 0;
  int in_channels_ = 0;
  int kernel_h_ = 0;
  int kernel_w_ = 0;
  std::vector<T> data_;
};

// C_out x R x H x W rotation-equivariant stack.
template <typename T>
class OrientedFeature {
  static_assert(std::is_floating_point_v<T>);

 public:
  OrientedFeature() = default;
  OrientedFeature(int out_channels, int orientations, int height, int width,
                  T fill = T(0))
      : out_channels_(out_channels), orientations_(orientations),
        height_(height), width_(width),
        data_(static_cast<std::size_t>(out_channels) * orientations * height *
                  width,
              fill) {
    detail::check(orientations >= 1, "OrientedFeature: orientations must be >= 1");
    detail::check(out_channels >= 1 && height >= 1 && width >= 1,
                  "OrientedFeature: dimensions must be positive");
  }

  int out_channels() const { return out_channels_; }
  int orientations() const { return orientations_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int co, int r, int h, int w) { return data_[index(co, r, h, w)]; }
  const T& operator()(int co, int r, int h, int w) const {
    return data_[index(co, r, h, w)];
  }

  T& at(int co, int r, int h, int w) {
    bounds_check(co, r, h, w);
    return data_[index(co, r, h, w)];
  }
  const T& at(int co, int r, int h, int w) const {
    bounds_check(co, r, h, w);
    return data_[index(co, r, h, w)];
  }

  T* slice(int co, int r) {
    return data_.data() +
           (static_cast<std::size_t>(co) * orientations_ + r) * height_ * width_;
  }
  const T* slice(int co, int r) const {
    return data_.data() +
           (static_cast<std::size_t>(co) * orientations_ + r) * height_ * width_;
  }

  // One orientation as a Tensor3 (copy).
  Tensor3<T> orientation(int r) const {
    Tensor3<T> out(out_channels_, height_, width_);
    for (int co = 0; co < out_channels_; ++co) {
      const T* src = slice(co, r);
      T* dst = out.plane(co);
      for (int k = 0; k < height_ * width_; ++k) dst[k] = src[k];
    }
    return out;
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<const T> values() const { return data_; }
  std::span<T> values() { return data_; }

  bool same_shape(const OrientedFeature& o) const {
    return out_channels_ == o.out_channels_ && orientations_ == o.orientations_ &&
           height_ == o.height_ && width_ == o.width_;
  }

 private:
  std::size_t index(int co, int r, int h, int w) const {
    return ((static_cast<std::size_t>(co) * orientations_ + r) * height_ + h) *
               width_ +
           w;
  }
  void bounds_check(int co, int r, int h, int w) const {
    if (co < 0 || co >= out_channels_ || r < 0 || r >= orientations_ || h < 0 ||
        h >= height_ || w < 0 || w >= width_)
      throw std::out_of_range("OrientedFeature: index out of range");
  }

  int out_channels_ = 0;
  int orientations_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

// Row-major matrix. Doubles as the 2-D plane type for single-channel ops.
template <typename T>
class MatrixRM {
  static_assert(std::is_floating_point_v<T>);

 public:
  MatrixRM() = default;
  MatrixRM(int rows, int cols, T fill = T(0))
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * cols, fill) {
    detail::check(rows >= 1 && cols >= 1, "MatrixRM: dimensions must be positive");
  }

  static MatrixRM from_data(int rows, int cols, std::vector<T> data) {
    MatrixRM m(rows, cols);
    detail::check(data.size() == m.data_.size(),
                  "MatrixRM: data length must equal rows*cols");
    m.data_ = std::move(data);
    return m;
  }

  static MatrixRM identity(int n) {
    MatrixRM m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  T& at(int r, int c) {
    bounds_check(r, c);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  const T& at(int r, int c) const {
    bounds_check(r, c);
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const T* row(int r) const { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  std::span<const T> values() const { return data_; }
  std::span<T> values() { return data_; }

  bool same_shape(const MatrixRM& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

 private:
  void bounds_check(int r, int c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
      throw std::out_of_range("MatrixRM: index out of range");
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

// Counterclockwise quarter-turn rotation. One turn maps an MxN grid to NxM
// with out[i][j] = in[j][N-1-i]; four turns are the identity. quarter_turns
// is reduced mod 4 so the op is total.
template <typename T>
MatrixRM<T> rot90_plane(const MatrixRM<T>& plane, int quarter_turns) {
  int q = ((quarter_turns % 4) + 4) % 4;
  MatrixRM<T> cur = plane;
  for (int t = 0; t < q; ++t) {
    MatrixRM<T> next(cur.cols(), cur.rows());
    for (int i = 0; i < next.rows(); ++i)
      for (int j = 0; j < next.cols(); ++j)
        next(i, j) = cur(j, cur.cols() - 1 - i);
    cur = std::move(next);
  }
  return cur;
}

// Horizontal flip: out[i][j] = in[i][N-1-j]. Involution.
template <typename T>
MatrixRM<T> mirror_plane(const MatrixRM<T>& plane) {
  MatrixRM<T> out(plane.rows(), plane.cols());
  for (int i = 0; i < plane.rows(); ++i)
    for (int j = 0; j < plane.cols(); ++j)
      out(i, j) = plane(i, plane.cols() - 1 - j);
  return out;
}

// CNHW packing: rows enumerate channels, columns enumerate (n,h,w).
template <typename T>
MatrixRM<T> pack_cnhw(std::span<const Tensor3<T>> batch) {
  detail::check(!batch.empty(), "pack_cnhw: empty batch");
  const int c = batch[0].channels(), h = batch[0].height(), w = batch[0].width();
  for (const auto& t : batch)
    detail::check(t.channels() == c && t.height() == h && t.width() == w,
                  "pack_cnhw: shape mismatch across the batch");
  const int n = static_cast<int>(batch.size());
  MatrixRM<T> m(c, n * h * w);
  for (int ci = 0; ci < c; ++ci) {
    T* dst = m.row(ci);
    for (int ni = 0; ni < n; ++ni) {
      const T* src = batch[ni].plane(ci);
      for (int k = 0; k < h * w; ++k) dst[static_cast<std::size_t>(ni) * h * w + k] = src[k];
    }
  }
  return m;
}

template <typename T>
std::vector<Tensor3<T>> unpack_cnhw(const MatrixRM<T>& m, int channels, int height,
                                    int width, int batch) {
  detail::check(m.rows() == channels &&
                    m.cols() == batch * height * width,
                "unpack_cnhw: matrix shape does not match requested layout");
  std::vector<Tensor3<T>> out;
  out.reserve(batch);
  for (int ni = 0; ni < batch; ++ni) {
    Tensor3<T> t(channels, height, width);
    for (int ci = 0; ci < channels; ++ci) {
      const T* src = m.row(ci) + static_cast<std::size_t>(ni) * height * width;
      T* dst = t.plane(ci);
      for (int k = 0; k < height * width; ++k) dst[k] = src[k];
    }
    out.push_back(std::move(t));
  }
  return out;
}

// NHWC packing: row = filter index, column enumerates (h,w,c).
template <typename T>
MatrixRM<T> pack_nhwc(const FilterBank<T>& bank) {
  const int co = bank.out_channels(), ci = bank.in_channels();
  const int kh = bank.kernel_h(), kw = bank.kernel_w();
  MatrixRM<T> m(co, kh * kw * ci);
  for (int n = 0; n < co; ++n)
    for (int i = 0; i < kh; ++i)
      for (int j = 0; j < kw; ++j)
        for (int c = 0; c < ci; ++c)
          m(n, (i * kw + j) * ci + c) = bank(n, c, i, j);
  return m;
}

template <typename T>
FilterBank<T> unpack_nhwc(const MatrixRM<T>& m, int out_channels, int in_channels,
                          int kernel_h, int kernel_w) {
  detail::check(m.rows() == out_channels &&
                    m.cols() == kernel_h * kernel_w * in_channels,
                "unpack_nhwc: matrix shape does not match requested layout");
  FilterBank<T> bank(out_channels, in_channels, kernel_h, kernel_w);
  for (int n = 0; n < out_channels; ++n)
    for (int i = 0; i < kernel_h; ++i)
      for (int j = 0; j < kernel_w; ++j)
        for (int c = 0; c < in_channels; ++c)
          bank(n, c, i, j) = m(n, (i * kernel_w + j) * in_channels + c);
  return bank;
}

// Plain row-major product, ikj loop order.
template <typename T>
MatrixRM<T> matmul(const MatrixRM<T>& a, const MatrixRM<T>& b) {
  detail::check(a.cols() == b.rows(), "matmul: inner dimensions must agree");
  MatrixRM<T> out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    T* dst = out.row(i);
    for (int k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      const T* brow = b.row(k);
      for (int j = 0; j < b.cols(); ++j) dst[j] += aik * brow[j];
    }
  }
  return out;
}

}  // namespace rotconv
