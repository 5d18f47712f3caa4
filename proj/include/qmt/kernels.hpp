#pragma once

// Complex inner-loop kernels. Each kernel has a portable scalar reference and
// an AVX2/FMA variant; the variant is picked once at runtime from CPUID and can
// be pinned with QMT_KERNELS=scalar|avx2 (or force_isa) for equivalence tests.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace qmt::kernels {

using cplx = std::complex<double>;

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// ISA the dispatcher currently routes to.
Isa active_isa();
/// True when the CPU (and the build) can run the given variant.
bool isa_available(Isa isa);
/// Pins the dispatcher. Throws qmt::Error(InvalidArgument) if unavailable.
void force_isa(Isa isa);

// sum_i conj(a_i) * b_i
cplx dotc(std::span<const cplx> a, std::span<const cplx> b);

// sum_i |a_i|^2
double norm2(std::span<const cplx> a);

// y += alpha * x
void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);

// out_i = a_i * b_i
void cmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out);

// Reduced density contribution of one pure vector. v is viewed as an
// outer x inner row-major array (outer = kept factors, inner = traced ones);
// out is an outer x outer column-major matrix and receives
//   out(a, b) += weight * sum_e v[a*inner + e] * conj(v[b*inner + e]).
void accumulate_reduced(double weight, std::span<const cplx> v, std::size_t outer,
                        std::size_t inner, std::span<cplx> out);

namespace scalar {
cplx dotc(const cplx* a, const cplx* b, std::size_t n);
double norm2(const cplx* a, std::size_t n);
void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n);
void cmul(const cplx* a, const cplx* b, cplx* out, std::size_t n);
} // namespace scalar

namespace avx2 {
cplx dotc(const cplx* a, const cplx* b, std::size_t n);
double norm2(const cplx* a, std::size_t n);
void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n);
void cmul(const cplx* a, const cplx* b, cplx* out, std::size_t n);
} // namespace avx2

} // namespace qmt::kernels
