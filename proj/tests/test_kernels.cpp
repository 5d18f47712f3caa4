#include <doctest.h>

#include <random>
#include <vector>

#include "qmt/errors.hpp"
#include "qmt/kernels.hpp"

using namespace qmt::kernels;

namespace {

std::vector<cplx> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    std::vector<cplx> v(n);
    for (auto& x : v) x = {d(rng), d(rng)};
    return v;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Restores the dispatcher after a test pins it.
struct IsaGuard {
    Isa saved = active_isa();
    ~IsaGuard() { force_isa(saved); }
};

const std::size_t kSizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 15, 64, 1001};

} // namespace

TEST_CASE("scalar reference kernels match naive loops") {
    std::mt19937_64 rng(1);
    for (std::size_t n : kSizes) {
        const auto a = random_vec(n, rng);
        const auto b = random_vec(n, rng);
        cplx dot = 0.0;
        double nn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dot += std::conj(a[i]) * b[i];
            nn += std::norm(a[i]);
        }
        CHECK(rel(scalar::dotc(a.data(), b.data(), n), dot) < 1e-13);
        CHECK(std::abs(scalar::norm2(a.data(), n) - nn) <= 1e-13 * std::max(1.0, nn));
        std::vector<cplx> out(n);
        scalar::cmul(a.data(), b.data(), out.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(rel(out[i], a[i] * b[i]) < 1e-15);
    }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
    if (!isa_available(Isa::Avx2)) {
        MESSAGE("AVX2 not available on this host; equivalence test skipped");
        return;
    }
    std::mt19937_64 rng(2);
    const cplx alpha(0.3, -1.7);
    for (std::size_t n : kSizes) {
        const auto a = random_vec(n, rng);
        const auto b = random_vec(n, rng);
        CHECK(rel(avx2::dotc(a.data(), b.data(), n), scalar::dotc(a.data(), b.data(), n)) < 1e-12);
        const double s = scalar::norm2(a.data(), n);
        CHECK(std::abs(avx2::norm2(a.data(), n) - s) <= 1e-12 * std::max(1.0, s));

        std::vector<cplx> y1 = b, y2 = b;
        scalar::axpy(alpha, a.data(), y1.data(), n);
        avx2::axpy(alpha, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(rel(y2[i], y1[i]) < 1e-14);

        std::vector<cplx> o1(n), o2(n);
        scalar::cmul(a.data(), b.data(), o1.data(), n);
        avx2::cmul(a.data(), b.data(), o2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(rel(o2[i], o1[i]) < 1e-14);
    }
}

TEST_CASE("accumulate_reduced matches a naive oracle under both dispatch targets") {
    IsaGuard guard;
    std::mt19937_64 rng(3);
    for (auto [outer, inner] : {std::pair<std::size_t, std::size_t>{1, 1}, {2, 3}, {4, 5}, {3, 16}, {8, 7}}) {
        const auto v = random_vec(outer * inner, rng);
        // Naive oracle.
        std::vector<cplx> ref(outer * outer, 0.0);
        for (std::size_t a = 0; a < outer; ++a)
            for (std::size_t b = 0; b < outer; ++b)
                for (std::size_t e = 0; e < inner; ++e)
                    ref[a + b * outer] += 0.25 * v[a * inner + e] * std::conj(v[b * inner + e]);

        std::vector<Isa> isas{Isa::Scalar};
        if (isa_available(Isa::Avx2)) isas.push_back(Isa::Avx2);
        for (Isa isa : isas) {
            force_isa(isa);
            CHECK(active_isa() == isa);
            std::vector<cplx> out(outer * outer, 0.0);
            accumulate_reduced(0.25, v, outer, inner, out);
            for (std::size_t i = 0; i < out.size(); ++i) CHECK(rel(out[i], ref[i]) < 1e-13);
        }
    }
}

TEST_CASE("dispatched span kernels follow the pinned variant") {
    IsaGuard guard;
    std::mt19937_64 rng(4);
    const auto a = random_vec(37, rng);
    const auto b = random_vec(37, rng);
    force_isa(Isa::Scalar);
    const cplx ds = dotc(a, b);
    const double ns = norm2(a);
    if (isa_available(Isa::Avx2)) {
        force_isa(Isa::Avx2);
        CHECK(rel(dotc(a, b), ds) < 1e-12);
        CHECK(std::abs(norm2(a) - ns) < 1e-12 * ns);
    }
    CHECK(to_string(Isa::Scalar) == "scalar");
}

TEST_CASE("mismatched span lengths are rejected") {
    std::vector<cplx> a(3), b(4), out(3);
    CHECK_THROWS_AS(dotc(a, b), qmt::Error);
    CHECK_THROWS_AS(cmul(a, b, out), qmt::Error);
}
