#include "hodge/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace hodge::kernels {

namespace serial {

void scale(std::span<cplx> data, cplx factor) {
  for (auto& v : data) v *= factor;
}

void multiply(std::span<cplx> data, std::span<const cplx> multiplier) {
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= multiplier[i];
}

void multiply(std::span<cplx> data, std::span<const double> multiplier) {
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= multiplier[i];
}

void axpy(std::span<cplx> out, cplx alpha, std::span<const cplx> x) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * x[i];
}

void accumulate_product(std::span<cplx> out, cplx alpha, std::span<const cplx> x,
                        std::span<const cplx> y) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * x[i] * y[i];
}

void accumulate_multiplied(std::span<cplx> out, cplx alpha, std::span<const cplx> m,
                           std::span<const cplx> x) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * m[i] * x[i];
}

double sum_norm2(std::span<const cplx> data) {
  double s = 0.0;
  for (const auto& v : data) s += std::norm(v);
  return s;
}

cplx sum_conj_product(std::span<const cplx> x, std::span<const cplx> y) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * std::conj(y[i]);
  return s;
}

double max_abs(std::span<const cplx> data) {
  double m = 0.0;
  for (const auto& v : data) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace serial

namespace parallel {

namespace {
using index_t = std::ptrdiff_t;
}

void scale(std::span<cplx> data, cplx factor) {
  const auto n = static_cast<index_t>(data.size());
  cplx* d = data.data();
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < n; ++i) d[i] *= factor;
}

void multiply(std::span<cplx> data, std::span<const cplx> multiplier) {
  const auto n = static_cast<index_t>(data.size());
  cplx* d = data.data();
  const cplx* m = multiplier.data();
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < n; ++i) d[i] *= m[i];
}

void multiply(std::span<cplx> data, std::span<const double> multiplier) {
  const auto n = static_cast<index_t>(data.size());
  cplx* d = data.data();
  const double* m = multiplier.data();
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < n; ++i) d[i] *= m[i];
}

void axpy(std::span<cplx> out, cplx alpha, std::span<const cplx> x) {
  const auto n = static_cast<index_t>(out.size());
  cplx* o = out.data();
  const cplx* xs = x.data();
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < n; ++i) o[i] += alpha * xs[i];
}

void accumulate_product(std::span<cplx> out, cplx alpha, std::span<const cplx> x,
                        std::span<const cplx> y) {
  const auto n = static_cast<index_t>(out.size());
  cplx* o = out.data();
  const cplx* xs = x.data();
  const cplx* ys = y.data();
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < n; ++i) o[i] += alpha * xs[i] * ys[i];
}

void accumulate_multiplied(std::span<cplx> out, cplx alpha, std::span<const cplx> m,
                           std::span<const cplx> x) {
  const auto n = static_cast<index_t>(out.size());
  cplx* o = out.data();
  const cplx* ms = m.data();
  const cplx* xs = x.data();
#pragma omp parallel for schedule(static)
  for (index_t i = 0; i < n; ++i) o[i] += alpha * ms[i] * xs[i];
}

// Sums are split into a fixed number of chunks combined in order, so the
// rounding does not depend on the thread count or scheduling.
constexpr index_t kChunks = 64;

template <class T, class F>
T chunked_sum(index_t n, F&& term) {
  T partial[kChunks] = {};
#pragma omp parallel for schedule(static)
  for (index_t c = 0; c < kChunks; ++c) {
    const index_t lo = n * c / kChunks;
    const index_t hi = n * (c + 1) / kChunks;
    T s{};
    for (index_t i = lo; i < hi; ++i) s += term(i);
    partial[c] = s;
  }
  T total{};
  for (index_t c = 0; c < kChunks; ++c) total += partial[c];
  return total;
}

double sum_norm2(std::span<const cplx> data) {
  const cplx* d = data.data();
  return chunked_sum<double>(static_cast<index_t>(data.size()), [d](index_t i) { return std::norm(d[i]); });
}

cplx sum_conj_product(std::span<const cplx> x, std::span<const cplx> y) {
  const cplx* xs = x.data();
  const cplx* ys = y.data();
  return chunked_sum<cplx>(static_cast<index_t>(x.size()),
                           [xs, ys](index_t i) { return xs[i] * std::conj(ys[i]); });
}

double max_abs(std::span<const cplx> data) {
  const auto n = static_cast<index_t>(data.size());
  const cplx* d = data.data();
  double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m)
  for (index_t i = 0; i < n; ++i) m = std::max(m, std::abs(d[i]));
  return m;
}

}  // namespace parallel

}  // namespace hodge::kernels
