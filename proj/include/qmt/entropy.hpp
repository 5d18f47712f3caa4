#pragma once

// Entropy functionals, all in nats.

#include <vector>

#include "qmt/qlinalg.hpp"

namespace qmt {

// A probability vector; validated on construction (entries >= 0, sum within 1e-10 of 1).
class Spectrum {
public:
    explicit Spectrum(std::vector<double> probabilities);
    static Spectrum of(const DensityOperator& rho);

    const std::vector<double>& probabilities() const { return p_; }
    std::size_t size() const { return p_.size(); }

private:
    std::vector<double> p_;
};

struct EntropyMoments {
    double entropy = 0.0;     // -sum p ln p
    double varentropy = 0.0;  // sum p ln^2 p - entropy^2
};

// Both moments from the same spectrum; terms with p <= cutoff * max(p) are dropped.
EntropyMoments entropy_moments(const Spectrum& spectrum, double relative_cutoff = kLogCutoff);
EntropyMoments entropy_moments(const DensityOperator& rho, double relative_cutoff = kLogCutoff);

double von_neumann_entropy(const DensityOperator& rho);
double von_neumann_entropy(const Spectrum& spectrum);
double varentropy(const DensityOperator& rho);
double varentropy(const Spectrum& spectrum);

inline constexpr double kSupportTol = 1e-8;

// Tr rho (ln rho - ln sigma). Throws SupportMismatch when an eigenvector of rho
// with non-negligible weight has overlap below 1 - support_tol with the support
// of sigma.
double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma, double support_tol = kSupportTol);

// Smallest overlap of rho's supported eigenvectors with the support of sigma.
double support_overlap(const DensityOperator& rho, const DensityOperator& sigma);

// sqrt(ln^2(A-1)/4 + 1): cap on the square root of the varentropy of a state
// whose spectrum has at most A non-zero entries. Throws InvalidOutcomeCount for A < 2.
double f_A(int outcomes);

struct VarentropyMaxResult {
    int outcomes = 2;
    double r = 0.0;               // weight spread over the A-1 equal entries
    double max_varentropy = 0.0;  // nats^2
    double f_A_squared = 0.0;     // nats^2
    double residual = 0.0;        // 2 - (1-2r) ln((1-r)(A-1)/r)
};

// Varentropy of diag((1-r)/m x m, r/n x n): r(1-r)(ln((1-r)/r) + ln(n/m))^2.
double two_block_varentropy(double r, int m, int n);

// Maximum varentropy over all spectra with at most A non-zero entries. The
// maximiser has one entry 1-r and A-1 entries r/(A-1), where r solves
// 2 = (1-2r) ln((1-r)(A-1)/r) on (0, 1/2); found by bisection.
VarentropyMaxResult varentropy_max(int outcomes);

} // namespace qmt
