#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qmt/errors.hpp"
#include "qmt/qlinalg.hpp"
#include "support.hpp"

using namespace qmt;
using qmt::testing::random_density;
using qmt::testing::random_state;

namespace {

Matrix diag(std::initializer_list<double> d) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    Eigen::Index i = 0;
    for (double v : d) m(i, i) = v, ++i;
    return m;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::InvalidArgument;
}

} // namespace

TEST_CASE("tensor of identities and label bookkeeping") {
    const HermitianOperator i1(SpaceLayout::two_level("Q"), ops::identity(2));
    const HermitianOperator i2(SpaceLayout::two_level("A"), ops::identity(2));
    const auto t = tensor({i1, i2});
    CHECK(max_abs(t.matrix() - ops::identity(4)) == 0.0);
    CHECK(t.layout().labels() == std::vector<std::string>{"Q", "A"});
    CHECK(kind_of([&] { tensor({i1, i1}); }) == ErrorKind::LayoutConflict);
}

TEST_CASE("sigma_z convention: |down> is index 0 with eigenvalue +1") {
    const HermitianOperator sz(SpaceLayout::two_level("Q"), ops::sigma_z());
    const HermitianOperator id(SpaceLayout::two_level("A"), ops::identity(2));
    const Matrix m = tensor({sz, id}).matrix();
    Vector down_up = Vector::Zero(4);
    down_up[1] = 1.0;  // |down>_Q |up>_A
    CHECK(max_abs(m * down_up - down_up) == 0.0);
}

TEST_CASE("tensor of thermal-like factors keeps unit trace") {
    const DensityOperator a(SpaceLayout::two_level("Q"), diag({0.7, 0.3}));
    const DensityOperator b(SpaceLayout::boson("E1", 3), diag({0.5, 0.3, 0.2}));
    const auto t = tensor({a, b});
    CHECK(t.dim() == 6);
    CHECK(std::abs(t.matrix().trace().real() - 1.0) < 1e-15);
}

TEST_CASE("partial trace: product states, Bell state, empty selection") {
    std::mt19937_64 rng(11);
    for (std::size_t d1 : {2u, 3u})
        for (std::size_t d2 : {2u, 4u}) {
            const auto r1 = random_density(SpaceLayout::boson("Q", d1), d1, rng);
            const auto r2 = random_density(SpaceLayout::boson("E1", d2), d2, rng);
            const auto t = tensor({r1, r2});
            CHECK(max_abs(partial_trace(t, {"Q"}).matrix() - r1.matrix()) < 1e-12);
            CHECK(max_abs(partial_trace(t, {"E1"}).matrix() - r2.matrix()) < 1e-12);
        }
    Vector bell = Vector::Zero(4);
    bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
    const auto rho = DensityOperator::from_pure(SpaceLayout::two_level("Q").concat(SpaceLayout::two_level("A")), bell);
    CHECK(max_abs(partial_trace(rho, {"Q"}).matrix() - 0.5 * ops::identity(2)) < 1e-15);
    CHECK(kind_of([&] { partial_trace(rho, {}); }) == ErrorKind::InvalidSelection);
    CHECK(kind_of([&] { partial_trace(rho, {"E9"}); }) == ErrorKind::InvalidSelection);
}

TEST_CASE("partial trace keeps a non-leading factor in layout order") {
    std::mt19937_64 rng(12);
    const auto a = random_density(SpaceLayout::boson("Q", 2), 2, rng);
    const auto b = random_density(SpaceLayout::boson("A", 3), 3, rng);
    const auto c = random_density(SpaceLayout::boson("E1", 2), 2, rng);
    const auto t = tensor({a, b, c});
    const auto ac = partial_trace(t, {"Q", "E1"});
    CHECK(max_abs(ac.matrix() - kron(a.matrix(), c.matrix())) < 1e-12);
    CHECK(ac.layout().labels() == std::vector<std::string>{"Q", "E1"});
}

TEST_CASE("partial_trace_ensemble equals the dense partial trace") {
    std::mt19937_64 rng(13);
    const SpaceLayout layout({{"Q", 2, FactorKind::TwoLevel}, {"A", 3, FactorKind::Boson}, {"E1", 4, FactorKind::Boson}});
    Matrix vecs(24, 5);
    const std::vector<double> w{0.4, 0.3, 0.2, 0.1, 0.0};
    Matrix rho = Matrix::Zero(24, 24);
    for (int c = 0; c < 5; ++c) {
        vecs.col(c) = random_state(24, rng);
        rho += w[static_cast<std::size_t>(c)] * vecs.col(c) * vecs.col(c).adjoint();
    }
    const auto dense = partial_trace(DensityOperator(layout, rho), {"Q", "A"});
    const Matrix ens = partial_trace_ensemble(layout, {"Q", "A"}, vecs, w);
    CHECK(max_abs(ens - dense.matrix()) < 1e-13);
    const Matrix ens_e = partial_trace_ensemble(layout, {"E1"}, vecs, w);
    CHECK(max_abs(ens_e - partial_trace(DensityOperator(layout, rho), {"E1"}).matrix()) < 1e-13);
}

TEST_CASE("spectral function: logs, phases and identity map") {
    const HermitianOperator mixed(SpaceLayout::boson("A", 3), ops::identity(3) / 3.0);
    const auto l = spectral_function(mixed, [](double x) { return std::log(x); });
    CHECK(max_abs(l.matrix() + std::log(3.0) * ops::identity(3)) < 1e-14);

    const double w = 2.5;
    const HermitianOperator h(SpaceLayout::two_level("Q"), diag({0.0, w}), Unit::AngularFrequency);
    const double t = std::numbers::pi / w;
    const Matrix u = spectral_function_complex(h, [t](double e) { return std::polar(1.0, -e * t); });
    CHECK(max_abs(u - diag({1.0, -1.0})) < 1e-15);

    const HermitianOperator p(SpaceLayout::boson("A", 3), diag({0.9, 0.1, 0.0}));
    const auto lp = spectral_function(p, [](double x) { return std::log(x); }, 1e-14);
    CHECK(max_abs(lp.matrix() - diag({std::log(0.9), std::log(0.1), 0.0})) < 1e-14);

    std::mt19937_64 rng(14);
    Matrix g = qmt::testing::random_gaussian(5, 5, rng);
    const HermitianOperator herm(SpaceLayout::boson("A", 5), g + g.adjoint());
    CHECK(max_abs(spectral_function(herm, [](double x) { return x; }).matrix() - herm.matrix()) < 1e-12);
}

TEST_CASE("validation of Hermitian and density operators") {
    Matrix m = diag({1.0, 2.0});
    m(0, 1) = 1.0;
    CHECK(kind_of([&] { HermitianOperator(SpaceLayout::two_level("Q"), m); }) == ErrorKind::NotHermitian);
    CHECK(kind_of([&] { DensityOperator(SpaceLayout::two_level("Q"), diag({0.6, 0.5})); }) == ErrorKind::InvalidState);
    CHECK(kind_of([&] { DensityOperator(SpaceLayout::two_level("Q"), diag({1.1, -0.1})); }) == ErrorKind::InvalidState);
    // Tiny negative eigenvalues are clipped and renormalised.
    const DensityOperator ok(SpaceLayout::two_level("Q"), diag({1.0 + 5e-11, -5e-11}));
    CHECK(ok.eigen().values.minCoeff() >= 0.0);
    CHECK(kind_of([&] { DensityOperator(SpaceLayout::two_level("Q"), ops::identity(3) / 3.0); }) ==
          ErrorKind::LayoutConflict);
}

TEST_CASE("expectation and variance") {
    const HermitianOperator sz(SpaceLayout::two_level("Q"), ops::sigma_z());
    const DensityOperator down(SpaceLayout::two_level("Q"), diag({1.0, 0.0}));
    auto mv = expectation_and_variance(sz, down);
    CHECK(mv.mean == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(mv.variance == doctest::Approx(0.0));
    mv = expectation_and_variance(sz, DensityOperator(SpaceLayout::two_level("Q"), ops::identity(2) / 2.0));
    CHECK(std::abs(mv.mean) < 1e-15);
    CHECK(mv.variance == doctest::Approx(1.0).epsilon(1e-15));

    // Thermal quadrature variance on 40 levels at theta = 2: g^2 coth(1).
    const std::size_t d = 40;
    const double g = 0.7;
    Matrix p = Matrix::Zero(d, d);
    double z = 0.0;
    for (std::size_t n = 0; n < d; ++n) z += std::exp(-2.0 * static_cast<double>(n));
    for (std::size_t n = 0; n < d; ++n)
        p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = std::exp(-2.0 * static_cast<double>(n)) / z;
    const HermitianOperator x(SpaceLayout::boson("E1", d), g * (ops::annihilation(d) + ops::creation(d)));
    mv = expectation_and_variance(x, DensityOperator(SpaceLayout::boson("E1", d), p));
    CHECK(std::abs(mv.mean) < 1e-15);
    CHECK(mv.variance == doctest::Approx(g * g * 1.3130352854993313).epsilon(1e-12));

    // Auto-embedding by label into a larger layout.
    const SpaceLayout qa = SpaceLayout::two_level("Q").concat(SpaceLayout::two_level("A"));
    const DensityOperator prod(qa, kron(diag({1.0, 0.0}), ops::identity(2) / 2.0));
    mv = expectation_and_variance(HermitianOperator(SpaceLayout::two_level("A"), ops::sigma_z()), prod);
    CHECK(mv.variance == doctest::Approx(1.0));
    CHECK(kind_of([&] {
              expectation_and_variance(HermitianOperator(SpaceLayout::boson("A", 3), ops::identity(3)), prod);
          }) == ErrorKind::LayoutConflict);
}

TEST_CASE("eigenstates have vanishing variance") {
    std::mt19937_64 rng(15);
    const Matrix g = qmt::testing::random_gaussian(6, 6, rng);
    const HermitianOperator h(SpaceLayout::boson("A", 6), g + g.adjoint());
    const auto es = eigensystem(h.matrix());
    for (int k = 0; k < 6; ++k) {
        const auto rho = DensityOperator::from_pure(h.layout(), es.vectors.col(k));
        CHECK(expectation_and_variance(h, rho).variance <= 1e-10);
    }
}

TEST_CASE("evolve: t = 0, stationary states, unitarity") {
    std::mt19937_64 rng(16);
    const SpaceLayout layout = SpaceLayout::two_level("Q").concat(SpaceLayout::boson("E1", 4));
    const Matrix g = qmt::testing::random_gaussian(8, 8, rng);
    const HermitianOperator h(layout, g + g.adjoint(), Unit::AngularFrequency);
    const auto rho0 = DensityOperator::from_pure(layout, random_state(8, rng));
    const std::vector<double> times{0.0, 0.1, 0.7, 3.0, 11.0};
    const auto traj = evolve(rho0, h, times);
    CHECK(max_abs(traj[0].matrix() - rho0.matrix()) == 0.0);
    for (const auto& r : traj) {
        CHECK(std::abs(r.purity() - 1.0) < 1e-10);
        CHECK(std::abs(r.matrix().trace().real() - 1.0) < 1e-12);
    }
    const auto mixed = random_density(layout, 5, rng);
    const auto mtraj = evolve(mixed, h, times);
    for (const auto& r : mtraj)
        CHECK((r.eigen().values - mixed.eigen().values).cwiseAbs().maxCoeff() < 1e-10);

    const auto es = eigensystem(h.matrix());
    Matrix stat = Matrix::Zero(8, 8);
    for (int k = 0; k < 8; ++k) stat += (k + 1.0) / 36.0 * es.vectors.col(k) * es.vectors.col(k).adjoint();
    const DensityOperator st(layout, stat);
    for (const auto& r : evolve(st, h, times)) CHECK(max_abs(r.matrix() - st.matrix()) < 1e-12);

    const HermitianOperator dimless(layout, g + g.adjoint());
    CHECK_THROWS_AS(evolve(rho0, dimless, times), Error);
    const HermitianOperator wrong(SpaceLayout::boson("E1", 8), g + g.adjoint(), Unit::AngularFrequency);
    CHECK(kind_of([&] { evolve(rho0, wrong, times); }) == ErrorKind::LayoutConflict);
}

TEST_CASE("layouts: concat, subset, positions") {
    const SpaceLayout l({{"Q", 2, FactorKind::TwoLevel}, {"A", 5, FactorKind::Boson}, {"E1", 3, FactorKind::Boson}});
    CHECK(l.total_dim() == 30);
    CHECK(l.position("E1") == 2);
    CHECK(l.subset({"E1", "Q"}).labels() == std::vector<std::string>{"Q", "E1"});
    CHECK(kind_of([&] { l.concat(SpaceLayout::boson("A", 5)); }) == ErrorKind::LayoutConflict);
    const auto perm = front_permutation(l, {"A"});
    CHECK(perm.size() == 30);
    // New index 0 (A=0, Q=0, E1=0) is old index 0; new index 1 (A=0, Q=0, E1=1) is old 1.
    CHECK(perm[0] == 0);
    CHECK(perm[6] == 3);  // A=1, Q=0, E1=0 -> old (0*5 + 1)*3 + 0
}
