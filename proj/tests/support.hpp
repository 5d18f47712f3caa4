#pragma once

#include <random>

#include <Eigen/QR>

#include "qmt/qlinalg.hpp"

namespace qmt::testing {

inline Matrix random_gaussian(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = cplx(n(rng), n(rng));
    return m;
}

// Haar-ish unitary from the QR factor of a Ginibre matrix.
inline Matrix random_unitary(std::size_t d, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_gaussian(d, d, rng));
    return qr.householderQ() * Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

// rho = G G^dag / Tr with G of shape d x rank.
inline Matrix random_density_matrix(std::size_t d, std::size_t rank, std::mt19937_64& rng) {
    const Matrix g = random_gaussian(d, rank, rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

inline DensityOperator random_density(const SpaceLayout& layout, std::size_t rank, std::mt19937_64& rng) {
    return DensityOperator(layout, random_density_matrix(layout.total_dim(), rank, rng));
}

inline Vector random_state(std::size_t d, std::mt19937_64& rng) {
    Vector v = random_gaussian(d, 1, rng).col(0);
    return v / v.norm();
}

} // namespace qmt::testing
