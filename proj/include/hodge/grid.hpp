#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <new>
#include <span>
#include <vector>

namespace hodge {

using cplx = std::complex<double>;

/// 64-byte aligned storage; FFTW only uses its SIMD kernels on aligned arrays.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

enum class Representation { physical, spectral };

/// Square flat torus [0, 2pi)^{2n} sampled with N points per real axis.
///
/// Real axes are ordered (x_1, y_1, ..., x_n, y_n) with z_a = x_a + i y_a;
/// samples are stored row-major with the last axis fastest. Frequencies use
/// the centered convention k in [-N/2, N/2). The Nyquist frequency is
/// dropped from every derivative symbol, so the discrete first derivatives
/// are exactly skew-adjoint.
///
/// A grid is a cheap shared handle; copies refer to the same tables.
class TorusGrid {
 public:
  /// Throws PreconditionError unless n in {1, 2} and N is a power of two >= 8.
  TorusGrid(int complex_dim, int samples_per_axis);

  int dim() const noexcept;
  int samples_per_axis() const noexcept;
  int real_dim() const noexcept { return 2 * dim(); }
  std::size_t size() const noexcept;
  double volume() const noexcept;
  double spacing() const noexcept;

  /// Centered integer frequency of array index j along one axis.
  int frequency(int j) const noexcept;
  /// Frequency used by derivative symbols (Nyquist mapped to zero).
  int derivative_frequency(int j) const noexcept;

  /// Multi-index of a flat sample index, one entry per real axis.
  std::array<int, 4> unflatten(std::size_t flat) const noexcept;
  std::size_t flatten(std::span<const int> idx) const noexcept;
  /// Flat index of the spectral slot holding integer frequency k.
  std::size_t frequency_slot(std::span<const int> k) const;
  /// Real coordinate value of sample index j along any axis.
  double coordinate(int j) const noexcept;

  /// Spectral symbol of d/dz_a, i.e. (i k_x + k_y) / 2 (a is 0-based).
  std::span<const cplx> dz_symbol(int a) const;
  /// Spectral symbol of d/dzbar_a, i.e. (i k_x - k_y) / 2.
  std::span<const cplx> dzbar_symbol(int a) const;
  /// |k~|^2 summed over all real axes (derivative frequencies).
  std::span<const double> wave_number_sq() const;
  /// 1 where every derivative frequency vanishes (kernel of the Laplacian).
  std::span<const double> kernel_indicator() const;
  /// 2/|k~|^2 off the kernel, 0 on it: the inverse of the dbar-Laplacian.
  std::span<const double> green_symbol() const;

  void forward_fft(std::span<const cplx> in, std::span<cplx> out) const;
  void inverse_fft(std::span<const cplx> in, std::span<cplx> out) const;

  bool operator==(const TorusGrid& other) const noexcept;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Complex samples on a TorusGrid, in physical or spectral representation.
///
/// Spectral coefficients are normalized so that the zero-frequency slot
/// holds the mean and e^{i k.x} maps to a unit coefficient at k.
class ScalarField {
 public:
  explicit ScalarField(TorusGrid grid, Representation rep = Representation::physical);
  ScalarField(TorusGrid grid, std::vector<cplx> data, Representation rep);

  template <class F>
  static ScalarField sample(const TorusGrid& grid, F&& f) {
    ScalarField out(grid);
    const int d = grid.real_dim();
    std::array<double, 4> x{};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto idx = grid.unflatten(i);
      for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = grid.coordinate(idx[a]);
      out.data_[i] = f(std::span<const double>(x.data(), static_cast<std::size_t>(d)));
    }
    return out;
  }

  static ScalarField constant(const TorusGrid& grid, cplx value);

  const TorusGrid& grid() const noexcept { return grid_; }
  Representation representation() const noexcept { return rep_; }
  std::span<cplx> values() noexcept { return data_; }
  std::span<const cplx> values() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }
  cplx& operator[](std::size_t i) { return data_[i]; }
  cplx operator[](std::size_t i) const { return data_[i]; }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(cplx s);
  /// this += alpha * other
  ScalarField& add_scaled(cplx alpha, const ScalarField& other);

  /// Pointwise product; both operands must be physical.
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(cplx s, ScalarField a) { return a *= s; }

  ScalarField conj() const;

 private:
  void check_compatible(const ScalarField& other) const;

  TorusGrid grid_;
  std::vector<cplx, AlignedAllocator<cplx>> data_;
  Representation rep_;
};

}  // namespace hodge
