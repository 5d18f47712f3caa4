#include <atomic>
#include <cstdlib>
#include <string>

#include "qmt/errors.hpp"
#include "qmt/kernels.hpp"

namespace qmt::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(QMT_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__)) && defined(__x86_64__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detect() {
    if (const char* env = std::getenv("QMT_KERNELS")) {
        const std::string v(env);
        if (v == "scalar") return Isa::Scalar;
        if (v == "avx2" && cpu_has_avx2()) return Isa::Avx2;
    }
    return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

void check_sizes(std::size_t a, std::size_t b) {
    if (a != b) fail(ErrorKind::LayoutConflict, "kernel operand lengths differ");
}

} // namespace

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

void force_isa(Isa isa) {
    if (!isa_available(isa)) fail(ErrorKind::InvalidArgument, "kernel ISA not available on this CPU");
    current().store(isa, std::memory_order_relaxed);
}

cplx dotc(std::span<const cplx> a, std::span<const cplx> b) {
    check_sizes(a.size(), b.size());
    return active_isa() == Isa::Avx2 ? avx2::dotc(a.data(), b.data(), a.size())
                                     : scalar::dotc(a.data(), b.data(), a.size());
}

double norm2(std::span<const cplx> a) {
    return active_isa() == Isa::Avx2 ? avx2::norm2(a.data(), a.size()) : scalar::norm2(a.data(), a.size());
}

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
    check_sizes(x.size(), y.size());
    if (active_isa() == Isa::Avx2)
        avx2::axpy(alpha, x.data(), y.data(), x.size());
    else
        scalar::axpy(alpha, x.data(), y.data(), x.size());
}

void cmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
    check_sizes(a.size(), b.size());
    check_sizes(a.size(), out.size());
    if (active_isa() == Isa::Avx2)
        avx2::cmul(a.data(), b.data(), out.data(), a.size());
    else
        scalar::cmul(a.data(), b.data(), out.data(), a.size());
}

void accumulate_reduced(double weight, std::span<const cplx> v, std::size_t outer, std::size_t inner,
                        std::span<cplx> out) {
    check_sizes(v.size(), outer * inner);
    check_sizes(out.size(), outer * outer);
    const bool wide = active_isa() == Isa::Avx2;
    for (std::size_t b = 0; b < outer; ++b) {
        const cplx* vb = v.data() + b * inner;
        for (std::size_t a = b; a < outer; ++a) {
            const cplx* va = v.data() + a * inner;
            // conj(vb) . va = sum_e va_e * conj(vb_e)
            const cplx s = weight * (wide ? avx2::dotc(vb, va, inner) : scalar::dotc(vb, va, inner));
            out[a + b * outer] += s;
            if (a != b) out[b + a * outer] += std::conj(s);
        }
    }
}

} // namespace qmt::kernels
