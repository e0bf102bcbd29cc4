#include "hodge/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "hodge/error.hpp"
#include "hodge/kernels.hpp"

namespace hodge {

namespace {

// FFTW's planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

struct TorusGrid::Impl {
  int n = 1;
  int N = 8;
  std::size_t total = 0;
  std::vector<std::vector<cplx>> dz;
  std::vector<std::vector<cplx>> dzbar;
  std::vector<double> k2;
  std::vector<double> kernel;
  std::vector<double> green;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  // fallbacks for caller-owned arrays without FFTW's alignment
  fftw_plan forward_unaligned = nullptr;
  fftw_plan backward_unaligned = nullptr;

  Impl(int n_, int N_) : n(n_), N(N_) {
    total = 1;
    for (int a = 0; a < 2 * n; ++a) total *= static_cast<std::size_t>(N);

    std::vector<int> dims(static_cast<std::size_t>(2 * n), N);
    auto* in = fftw_alloc_complex(total);
    auto* out = fftw_alloc_complex(total);
    {
      std::lock_guard lock(planner_mutex());
      // ESTIMATE keeps the plan, and so the rounding, identical from run to run
      forward = fftw_plan_dft(2 * n, dims.data(), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
      backward = fftw_plan_dft(2 * n, dims.data(), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
      forward_unaligned = fftw_plan_dft(2 * n, dims.data(), in, out, FFTW_FORWARD,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
      backward_unaligned = fftw_plan_dft(2 * n, dims.data(), in, out, FFTW_BACKWARD,
                                         FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_free(in);
    fftw_free(out);
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_destroy_plan(forward_unaligned);
    fftw_destroy_plan(backward_unaligned);
  }

  static fftw_plan pick(fftw_plan aligned, fftw_plan unaligned, fftw_complex* in, fftw_complex* out) {
    const bool ok = fftw_alignment_of(reinterpret_cast<double*>(in)) == 0 &&
                    fftw_alignment_of(reinterpret_cast<double*>(out)) == 0;
    return ok ? aligned : unaligned;
  }

  Impl(const Impl&) = delete;
  Impl& operator=(const Impl&) = delete;

  int deriv_freq(int j) const {
    const int k = j < N / 2 ? j : j - N;
    return k == -N / 2 ? 0 : k;
  }

  void build_symbols() {
    dz.assign(static_cast<std::size_t>(n), std::vector<cplx>(total));
    dzbar.assign(static_cast<std::size_t>(n), std::vector<cplx>(total));
    k2.assign(total, 0.0);
    kernel.assign(total, 0.0);
    green.assign(total, 0.0);
    const int d = 2 * n;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      for (int a = d - 1; a >= 0; --a) {
        idx[static_cast<std::size_t>(a)] = static_cast<int>(rem % static_cast<std::size_t>(N));
        rem /= static_cast<std::size_t>(N);
      }
      double s = 0.0;
      for (int a = 0; a < n; ++a) {
        const double kx = deriv_freq(idx[static_cast<std::size_t>(2 * a)]);
        const double ky = deriv_freq(idx[static_cast<std::size_t>(2 * a + 1)]);
        dz[static_cast<std::size_t>(a)][flat] = 0.5 * cplx(ky, kx);
        dzbar[static_cast<std::size_t>(a)][flat] = 0.5 * cplx(-ky, kx);
        s += kx * kx + ky * ky;
      }
      k2[flat] = s;
      kernel[flat] = s == 0.0 ? 1.0 : 0.0;
      green[flat] = s == 0.0 ? 0.0 : 2.0 / s;
    }
  }
};

TorusGrid::TorusGrid(int complex_dim, int samples_per_axis) {
  if (complex_dim != 1 && complex_dim != 2) {
    throw PreconditionError("complex dimension must be 1 or 2, got " +
                            std::to_string(complex_dim));
  }
  if (samples_per_axis < 8 || !is_power_of_two(samples_per_axis)) {
    throw PreconditionError("samples per axis must be a power of two >= 8, got " +
                            std::to_string(samples_per_axis));
  }
  auto impl = std::make_shared<Impl>(complex_dim, samples_per_axis);
  impl->build_symbols();
  impl_ = std::move(impl);
}

int TorusGrid::dim() const noexcept { return impl_->n; }
int TorusGrid::samples_per_axis() const noexcept { return impl_->N; }
std::size_t TorusGrid::size() const noexcept { return impl_->total; }

double TorusGrid::volume() const noexcept {
  return std::pow(2.0 * std::numbers::pi, real_dim());
}

double TorusGrid::spacing() const noexcept {
  return 2.0 * std::numbers::pi / impl_->N;
}

int TorusGrid::frequency(int j) const noexcept {
  const int N = impl_->N;
  return j < N / 2 ? j : j - N;
}

int TorusGrid::derivative_frequency(int j) const noexcept { return impl_->deriv_freq(j); }

std::array<int, 4> TorusGrid::unflatten(std::size_t flat) const noexcept {
  std::array<int, 4> idx{};
  const auto N = static_cast<std::size_t>(impl_->N);
  for (int a = real_dim() - 1; a >= 0; --a) {
    idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % N);
    flat /= N;
  }
  return idx;
}

std::size_t TorusGrid::flatten(std::span<const int> idx) const noexcept {
  std::size_t flat = 0;
  const auto N = static_cast<std::size_t>(impl_->N);
  for (int a = 0; a < real_dim(); ++a) flat = flat * N + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
  return flat;
}

std::size_t TorusGrid::frequency_slot(std::span<const int> k) const {
  if (static_cast<int>(k.size()) != real_dim()) {
    throw ShapeError("frequency vector length does not match the real dimension");
  }
  const int N = impl_->N;
  std::array<int, 4> idx{};
  for (int a = 0; a < real_dim(); ++a) {
    const int ka = k[static_cast<std::size_t>(a)];
    if (ka < -N / 2 || ka >= N / 2) {
      throw PreconditionError("frequency " + std::to_string(ka) + " not representable on N=" +
                              std::to_string(N));
    }
    idx[static_cast<std::size_t>(a)] = ka >= 0 ? ka : ka + N;
  }
  return flatten(std::span<const int>(idx.data(), static_cast<std::size_t>(real_dim())));
}

double TorusGrid::coordinate(int j) const noexcept { return spacing() * j; }

std::span<const cplx> TorusGrid::dz_symbol(int a) const {
  if (a < 0 || a >= impl_->n) throw PreconditionError("derivative index out of range");
  return impl_->dz[static_cast<std::size_t>(a)];
}

std::span<const cplx> TorusGrid::dzbar_symbol(int a) const {
  if (a < 0 || a >= impl_->n) throw PreconditionError("derivative index out of range");
  return impl_->dzbar[static_cast<std::size_t>(a)];
}

std::span<const double> TorusGrid::wave_number_sq() const { return impl_->k2; }
std::span<const double> TorusGrid::kernel_indicator() const { return impl_->kernel; }
std::span<const double> TorusGrid::green_symbol() const { return impl_->green; }

void TorusGrid::forward_fft(std::span<const cplx> in, std::span<cplx> out) const {
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(impl_->pick(impl_->forward, impl_->forward_unaligned, src, dst), src, dst);
  kernels::parallel::scale(out, 1.0 / static_cast<double>(impl_->total));
}

void TorusGrid::inverse_fft(std::span<const cplx> in, std::span<cplx> out) const {
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(impl_->pick(impl_->backward, impl_->backward_unaligned, src, dst), src, dst);
}

bool TorusGrid::operator==(const TorusGrid& other) const noexcept {
  return impl_ == other.impl_ || (dim() == other.dim() && samples_per_axis() == other.samples_per_axis());
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(TorusGrid grid, Representation rep)
    : grid_(std::move(grid)), data_(grid_.size(), cplx(0.0)), rep_(rep) {}

ScalarField::ScalarField(TorusGrid grid, std::vector<cplx> data, Representation rep)
    : grid_(std::move(grid)), data_(data.begin(), data.end()), rep_(rep) {
  if (data_.size() != grid_.size()) throw ShapeError("sample count does not match grid size");
}

ScalarField ScalarField::constant(const TorusGrid& grid, cplx value) {
  return ScalarField(grid, std::vector<cplx>(grid.size(), value), Representation::physical);
}

void ScalarField::check_compatible(const ScalarField& other) const {
  if (!(grid_ == other.grid_)) throw ShapeError("fields live on different grids");
  if (rep_ != other.rep_) throw ShapeError("fields have different representations");
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  check_compatible(other);
  kernels::parallel::axpy(data_, 1.0, other.data_);
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  check_compatible(other);
  kernels::parallel::axpy(data_, -1.0, other.data_);
  return *this;
}

ScalarField& ScalarField::operator*=(cplx s) {
  kernels::parallel::scale(data_, s);
  return *this;
}

ScalarField& ScalarField::add_scaled(cplx alpha, const ScalarField& other) {
  check_compatible(other);
  kernels::parallel::axpy(data_, alpha, other.data_);
  return *this;
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  a.check_compatible(b);
  if (a.rep_ != Representation::physical) {
    throw ShapeError("pointwise products need physical representation");
  }
  ScalarField out(a.grid_, Representation::physical);
  kernels::parallel::accumulate_product(out.data_, 1.0, a.data_, b.data_);
  return out;
}

ScalarField ScalarField::conj() const {
  if (rep_ != Representation::physical) throw ShapeError("conj needs physical representation");
  ScalarField out(*this);
  for (auto& v : out.data_) v = std::conj(v);
  return out;
}

}  // namespace hodge
