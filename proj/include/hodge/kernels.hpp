#pragma once

// Pointwise kernels over flat complex arrays. Every kernel exists twice:
// `parallel` (OpenMP, used by the library) and `serial` (plain loops, kept
// as the reference the parallel versions are tested and benchmarked against).

#include <complex>
#include <span>

namespace hodge::kernels {

using cplx = std::complex<double>;

namespace serial {

void scale(std::span<cplx> data, cplx factor);
/// data[i] *= multiplier[i]
void multiply(std::span<cplx> data, std::span<const cplx> multiplier);
/// data[i] *= multiplier[i] (real multiplier)
void multiply(std::span<cplx> data, std::span<const double> multiplier);
/// out[i] += alpha * x[i]
void axpy(std::span<cplx> out, cplx alpha, std::span<const cplx> x);
/// out[i] += alpha * x[i] * y[i]
void accumulate_product(std::span<cplx> out, cplx alpha, std::span<const cplx> x,
                        std::span<const cplx> y);
/// out[i] += alpha * m[i] * x[i]
void accumulate_multiplied(std::span<cplx> out, cplx alpha, std::span<const cplx> m,
                           std::span<const cplx> x);
double sum_norm2(std::span<const cplx> data);
cplx sum_conj_product(std::span<const cplx> x, std::span<const cplx> y);
double max_abs(std::span<const cplx> data);

}  // namespace serial

namespace parallel {

void scale(std::span<cplx> data, cplx factor);
void multiply(std::span<cplx> data, std::span<const cplx> multiplier);
void multiply(std::span<cplx> data, std::span<const double> multiplier);
void axpy(std::span<cplx> out, cplx alpha, std::span<const cplx> x);
void accumulate_product(std::span<cplx> out, cplx alpha, std::span<const cplx> x,
                        std::span<const cplx> y);
void accumulate_multiplied(std::span<cplx> out, cplx alpha, std::span<const cplx> m,
                           std::span<const cplx> x);
double sum_norm2(std::span<const cplx> data);
cplx sum_conj_product(std::span<const cplx> x, std::span<const cplx> y);
double max_abs(std::span<const cplx> data);

}  // namespace parallel

}  // namespace hodge::kernels
