#pragma once

#include <barrier>
#include <cstdint>
#include <thread>
#include <vector>

#include "rotconv/tensor.hpp"

// Scatter-dataflow convolution. Instead of accumulating a receptive field at
// each output pixel, every input pixel's products are added into neighboring
// output positions:
//
//   Y[i - m + floor(K_h/2), j - n + floor(K_w/2)] += X[i,j] * W[m,n]
//
// over the full input, with writes whose target falls outside the image
// dropped. The raw ops use these indices verbatim; with them, scatter with
// kernel W produces the same output as conv_gather_same with kernel W.
// scatter_conv_single / scatter_conv_multi pre-reverse the kernel in both
// spatial axes, so they match conv_gather_same of the index-reversed kernel.
//
// Every path accumulates contributions to a given output pixel in ascending
// input order, so the untiled, tiled, and phase-parallel variants produce
// bit-identical results for any worker count and tile size.

namespace rotconv {

// Instrumented operation counts. Monotonically nondecreasing during a run.
struct MultCounter {
  unsigned long long scalar_multiplications = 0;
  unsigned long long scalar_additions = 0;

  void add(unsigned long long mults, unsigned long long adds) {
    scalar_multiplications += mults;
    scalar_additions += adds;
  }
  void reset() {
    scalar_multiplications = 0;
    scalar_additions = 0;
  }
};

// High-water mark of auxiliary allocations, recorded at the allocation sites
// themselves rather than through the allocator.
struct AuxMemCounter {
  std::size_t current_bytes = 0;
  std::size_t peak_bytes = 0;

  void acquire(std::size_t bytes) {
    current_bytes += bytes;
    if (current_bytes > peak_bytes) peak_bytes = current_bytes;
  }
  void release(std::size_t bytes) {
    current_bytes = bytes > current_bytes ? 0 : current_bytes - bytes;
  }
  void reset() { current_bytes = peak_bytes = 0; }
};

// Output tiling parameters. halo is floor(K/2) for plain and average-pooled
// tiles and floor(K/2)+1 when max pooling happens inside the tile.
struct TileConfig {
  int tile_h = 32;
  int tile_w = 32;
  int halo = 1;
};

enum class ScatterStrategy {
  tile_private,    // disjoint output tiles with private accumulators
  phase_parallel,  // one kernel offset per step, barrier between steps
};

template <typename T>
MatrixRM<T> reverse_plane(const MatrixRM<T>& w) {
  MatrixRM<T> out(w.rows(), w.cols());
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j)
      out(i, j) = w(w.rows() - 1 - i, w.cols() - 1 - j);
  return out;
}

template <typename T>
FilterBank<T> reverse_bank(const FilterBank<T>& w) {
  FilterBank<T> out(w.out_channels(), w.in_channels(), w.kernel_h(), w.kernel_w());
  for (int co = 0; co < w.out_channels(); ++co)
    for (int ci = 0; ci < w.in_channels(); ++ci)
      for (int i = 0; i < w.kernel_h(); ++i)
        for (int j = 0; j < w.kernel_w(); ++j)
          out(co, ci, i, j) = w(co, ci, w.kernel_h() - 1 - i, w.kernel_w() - 1 - j);
  return out;
}

namespace detail {

// In-range write count for one kernel offset: the target row i - dm stays in
// [0,H) for H - |dm| input rows (dm = m - center), same for columns.
inline unsigned long long clipped_writes(int h, int w, int kh, int kw) {
  const int ch = kh / 2, cw = kw / 2;
  unsigned long long total = 0;
  for (int m = 0; m < kh; ++m) {
    const int dm = m - ch;
    const int rows = dm < 0 ? h + dm : h - dm;
    if (rows <= 0) continue;
    for (int n = 0; n < kw; ++n) {
      const int dn = n - cw;
      const int cols = dn < 0 ? w + dn : w - dn;
      if (cols > 0) total += static_cast<unsigned long long>(rows) * cols;
    }
  }
  return total;
}

}  // namespace detail

// Single-channel scatter with the raw indices above. Output is input-sized.
template <typename T>
MatrixRM<T> scatter_conv_raw_single(const MatrixRM<T>& x, const MatrixRM<T>& w,
                                    MultCounter* counter = nullptr) {
  const int h = x.rows(), ww = x.cols();
  const int kh = w.rows(), kw = w.cols();
  const int ch = kh / 2, cw = kw / 2;
  MatrixRM<T> y(h, ww);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < ww; ++j) {
      const T xv = x(i, j);
      for (int m = 0; m < kh; ++m) {
        const int tx = i - m + ch;
        if (tx < 0 || tx >= h) continue;
        T* yrow = y.row(tx);
        const T* wrow = w.row(m);
        for (int n = 0; n < kw; ++n) {
          const int ty = j - n + cw;
          if (ty < 0 || ty >= ww) continue;
          yrow[ty] += xv * wrow[n];
        }
      }
    }
  if (counter)
    counter->add(static_cast<unsigned long long>(h) * ww * kh * kw,
                 detail::clipped_writes(h, ww, kh, kw));
  return y;
}

// Convenience form: pre-reverses the kernel, so the result equals
// conv_gather_same of the index-reversed kernel.
template <typename T>
MatrixRM<T> scatter_conv_single(const MatrixRM<T>& x, const MatrixRM<T>& w,
                                MultCounter* counter = nullptr) {
  return scatter_conv_raw_single(x, reverse_plane(w), counter);
}

// Multi-channel raw scatter: the channel-wise dot product
// sum_ci X[ci,h,w] * W[co,ci,m,n] is formed once per (h,w,co,m,n) and added
// to the clipped target position.
template <typename T>
Tensor3<T> scatter_conv_raw_multi(const Tensor3<T>& x, const FilterBank<T>& w,
                                  MultCounter* counter = nullptr) {
  detail::check(x.channels() == w.in_channels(),
                "scatter_conv_multi: channel mismatch");
  const int h = x.height(), ww = x.width();
  const int kh = w.kernel_h(), kw = w.kernel_w();
  const int ch = kh / 2, cw = kw / 2;
  const int cin = x.channels(), cout = w.out_channels();
  const int plane = h * ww;
  Tensor3<T> y(cout, h, ww);
  std::vector<T> xcol(cin);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < ww; ++j) {
      for (int ci = 0; ci < cin; ++ci) xcol[ci] = x.data()[ci * plane + i * ww + j];
      for (int co = 0; co < cout; ++co) {
        T* yplane = y.plane(co);
        for (int m = 0; m < kh; ++m) {
          const int tx = i - m + ch;
          for (int n = 0; n < kw; ++n) {
            T dot = T(0);
            for (int ci = 0; ci < cin; ++ci)
              dot += xcol[ci] * w(co, ci, m, n);
            const int ty = j - n + cw;
            if (tx >= 0 && tx < h && ty >= 0 && ty < ww) yplane[tx * ww + ty] += dot;
          }
        }
      }
    }
  if (counter)
    counter->add(static_cast<unsigned long long>(h) * ww * kh * kw * cin * cout,
                 detail::clipped_writes(h, ww, kh, kw) * cout);
  return y;
}

template <typename T>
Tensor3<T> scatter_conv_multi(const Tensor3<T>& x, const FilterBank<T>& w,
                              MultCounter* counter = nullptr) {
  return scatter_conv_raw_multi(x, reverse_bank(w), counter);
}

namespace detail {

template <typename T>
void scatter_tile_private(const Tensor3<T>& x, const FilterBank<T>& rev,
                          const TileConfig& cfg, int workers, Tensor3<T>& y) {
  const int h = x.height(), w = x.width();
  const int kh = rev.kernel_h(), kw = rev.kernel_w();
  const int ch = kh / 2, cw = kw / 2;
  const int cin = x.channels(), cout = rev.out_channels();
  const int plane = h * w;
  const int tiles_y = (h + cfg.tile_h - 1) / cfg.tile_h;
  const int tiles_x = (w + cfg.tile_w - 1) / cfg.tile_w;
  const int n_tiles = tiles_y * tiles_x;

  auto run_tiles = [&](int first, int step) {
    std::vector<T> buf(static_cast<std::size_t>(cfg.tile_h) * cfg.tile_w);
    std::vector<T> xcol(cin);
    for (int t = first; t < n_tiles; t += step) {
      const int r0 = (t / tiles_x) * cfg.tile_h;
      const int c0 = (t % tiles_x) * cfg.tile_w;
      const int r1 = std::min(r0 + cfg.tile_h, h);
      const int c1 = std::min(c0 + cfg.tile_w, w);
      // Input reads extend one halo beyond the tile core so border scatters
      // complete inside the private accumulator.
      const int qr0 = std::max(0, r0 - cfg.halo), qr1 = std::min(h, r1 + cfg.halo);
      const int qc0 = std::max(0, c0 - cfg.halo), qc1 = std::min(w, c1 + cfg.halo);
      for (int co = 0; co < cout; ++co) {
        std::fill(buf.begin(), buf.end(), T(0));
        for (int i = qr0; i < qr1; ++i)
          for (int j = qc0; j < qc1; ++j) {
            for (int ci = 0; ci < cin; ++ci)
              xcol[ci] = x.data()[ci * plane + i * w + j];
            for (int m = 0; m < kh; ++m) {
              const int tx = i - m + ch;
              if (tx < r0 || tx >= r1) continue;
              for (int n = 0; n < kw; ++n) {
                const int ty = j - n + cw;
                if (ty < c0 || ty >= c1) continue;
                T dot = T(0);
                for (int ci = 0; ci < cin; ++ci) dot += xcol[ci] * rev(co, ci, m, n);
                buf[static_cast<std::size_t>(tx - r0) * cfg.tile_w + (ty - c0)] += dot;
              }
            }
          }
        T* dst = y.plane(co);
        for (int r = r0; r < r1; ++r)
          for (int c = c0; c < c1; ++c)
            dst[r * w + c] = buf[static_cast<std::size_t>(r - r0) * cfg.tile_w + (c - c0)];
      }
    }
  };

  if (workers == 1) {
    run_tiles(0, 1);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int wk = 0; wk < workers; ++wk)
    pool.emplace_back(run_tiles, wk, workers);
  for (auto& th : pool) th.join();
}

template <typename T>
void scatter_phase_parallel(const Tensor3<T>& x, const FilterBank<T>& rev,
                            int workers, Tensor3<T>& y) {
  const int h = x.height(), w = x.width();
  const int kh = rev.kernel_h(), kw = rev.kernel_w();
  const int ch = kh / 2, cw = kw / 2;
  const int cin = x.channels(), cout = rev.out_channels();
  const int plane = h * w;

  // Within one phase every worker multiplies by the same kernel offset, so
  // all write targets are distinct and no locking is needed; a barrier
  // separates the phases.
  std::barrier sync(workers);
  auto run_rows = [&](int wk) {
    const int rows_per = (h + workers - 1) / workers;
    const int i0 = wk * rows_per, i1 = std::min(h, i0 + rows_per);
    std::vector<T> xcol(cin);
    for (int m = 0; m < kh; ++m) {
      for (int n = 0; n < kw; ++n) {
        const int dm = m - ch, dn = n - cw;
        for (int i = i0; i < i1; ++i) {
          const int tx = i - dm;
          if (tx < 0 || tx >= h) continue;
          for (int j = 0; j < w; ++j) {
            const int ty = j - dn;
            if (ty < 0 || ty >= w) continue;
            for (int ci = 0; ci < cin; ++ci)
              xcol[ci] = x.data()[ci * plane + i * w + j];
            for (int co = 0; co < cout; ++co) {
              T dot = T(0);
              for (int ci = 0; ci < cin; ++ci) dot += xcol[ci] * rev(co, ci, m, n);
              y.plane(co)[tx * w + ty] += dot;
            }
          }
        }
        sync.arrive_and_wait();
      }
    }
  };

  if (workers == 1) {
    // Degenerate pool: same phase order, no threads.
    std::vector<T> xcol(cin);
    for (int m = 0; m < kh; ++m)
      for (int n = 0; n < kw; ++n) {
        const int dm = m - ch, dn = n - cw;
        for (int i = 0; i < h; ++i) {
          const int tx = i - dm;
          if (tx < 0 || tx >= h) continue;
          for (int j = 0; j < w; ++j) {
            const int ty = j - dn;
            if (ty < 0 || ty >= w) continue;
            for (int ci = 0; ci < cin; ++ci)
              xcol[ci] = x.data()[ci * plane + i * w + j];
            for (int co = 0; co < cout; ++co) {
              T dot = T(0);
              for (int ci = 0; ci < cin; ++ci) dot += xcol[ci] * rev(co, ci, m, n);
              y.plane(co)[tx * w + ty] += dot;
            }
          }
        }
      }
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int wk = 0; wk < workers; ++wk) pool.emplace_back(run_rows, wk);
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Tiled parallel scatter convolution. Identical output to scatter_conv_multi
// for every worker count and tile size; tiles own private accumulators and
// are merged into disjoint regions of the global output.
template <typename T>
Tensor3<T> tiled_scatter_conv(const Tensor3<T>& x, const FilterBank<T>& w,
                              const TileConfig& cfg, int workers,
                              MultCounter* counter = nullptr,
                              AuxMemCounter* aux = nullptr,
                              ScatterStrategy strategy = ScatterStrategy::tile_private) {
  detail::check(x.channels() == w.in_channels(),
                "tiled_scatter_conv: channel mismatch");
  detail::check(w.kernel_h() == w.kernel_w(),
                "tiled_scatter_conv: kernel must be square");
  detail::check(cfg.tile_h >= 1 && cfg.tile_w >= 1,
                "tiled_scatter_conv: tile dims must be >= 1");
  detail::check(cfg.halo == w.kernel_h() / 2, "tiled_scatter_conv: invalid halo");
  detail::check(workers >= 1, "tiled_scatter_conv: workers must be >= 1");

  const FilterBank<T> rev = reverse_bank(w);
  Tensor3<T> y(w.out_channels(), x.height(), x.width());

  const std::size_t buf_bytes =
      static_cast<std::size_t>(cfg.tile_h) * cfg.tile_w * sizeof(T) * workers;
  if (aux && strategy == ScatterStrategy::tile_private) aux->acquire(buf_bytes);

  if (strategy == ScatterStrategy::tile_private)
    detail::scatter_tile_private(x, rev, cfg, workers, y);
  else
    detail::scatter_phase_parallel(x, rev, workers, y);

  if (aux && strategy == ScatterStrategy::tile_private) aux->release(buf_bytes);
  if (counter)
    counter->add(static_cast<unsigned long long>(x.height()) * x.width() *
                     w.kernel_h() * w.kernel_w() * x.channels() * w.out_channels(),
                 detail::clipped_writes(x.height(), x.width(), w.kernel_h(),
                                        w.kernel_w()) *
                     w.out_channels());
  return y;
}

}  // namespace rotconv
