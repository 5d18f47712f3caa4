#pragma once

// Dense Hermitian algebra on labelled tensor-product spaces.
//
// Index convention: the first factor of a layout is the most significant one,
// i.e. |i1 i2 ... in> sits at ((i1*d2 + i2)*d3 + ...)*dn + in, matching the
// Kronecker product A (x) B (x) ... in the order the factors are listed.

#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qmt {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

enum class FactorKind { TwoLevel, Boson };

struct Factor {
    std::string label;
    std::size_t dim = 0;
    FactorKind kind = FactorKind::Boson;

    friend bool operator==(const Factor&, const Factor&) = default;
};

class SpaceLayout {
public:
    SpaceLayout() = default;
    explicit SpaceLayout(std::vector<Factor> factors);

    static SpaceLayout two_level(const std::string& label) { return SpaceLayout({{label, 2, FactorKind::TwoLevel}}); }
    static SpaceLayout boson(const std::string& label, std::size_t dim) {
        return SpaceLayout({{label, dim, FactorKind::Boson}});
    }

    const std::vector<Factor>& factors() const { return factors_; }
    std::size_t size() const { return factors_.size(); }
    std::size_t total_dim() const { return total_; }
    bool contains(const std::string& label) const;
    // Position of label in factors(); throws InvalidSelection if absent.
    std::size_t position(const std::string& label) const;
    std::vector<std::string> labels() const;

    // Throws LayoutConflict when a label appears in both.
    SpaceLayout concat(const SpaceLayout& other) const;
    SpaceLayout subset(const std::vector<std::string>& labels) const;

    friend bool operator==(const SpaceLayout&, const SpaceLayout&) = default;

private:
    std::vector<Factor> factors_;
    std::size_t total_ = 1;
};

enum class Unit { Dimensionless, AngularFrequency };

class HermitianOperator {
public:
    // Validates Hermiticity: max|M - M^dag| <= 1e-12 * max|M|, else NotHermitian.
    HermitianOperator(SpaceLayout layout, Matrix entries, Unit unit = Unit::Dimensionless);

    const SpaceLayout& layout() const { return layout_; }
    const Matrix& matrix() const { return m_; }
    Unit unit() const { return unit_; }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }

    HermitianOperator operator+(const HermitianOperator& rhs) const;
    HermitianOperator operator*(double s) const;

private:
    SpaceLayout layout_;
    Matrix m_;
    Unit unit_;
};

struct EigenSystem {
    RealVector values;  // ascending
    Matrix vectors;     // columns are orthonormal eigenvectors
};

EigenSystem eigensystem(const Matrix& hermitian);

class DensityOperator {
public:
    // Validates: Hermitian within 1e-12, trace within 1e-10 of one, minimum
    // eigenvalue >= -1e-10. Eigenvalues in [-1e-10, 0) are clipped to zero and
    // the state is renormalised; anything more negative throws InvalidState.
    DensityOperator(SpaceLayout layout, Matrix entries);

    static DensityOperator from_pure(SpaceLayout layout, const Vector& psi);

    const SpaceLayout& layout() const { return layout_; }
    const Matrix& matrix() const { return m_; }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    // Eigen-decomposition computed during validation (eigenvalues clipped to >= 0).
    const EigenSystem& eigen() const { return eig_; }
    double purity() const;

private:
    SpaceLayout layout_;
    Matrix m_;
    EigenSystem eig_;
};

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

Matrix kron(const Matrix& a, const Matrix& b);

HermitianOperator tensor(std::span<const HermitianOperator> ops);
HermitianOperator tensor(std::initializer_list<HermitianOperator> ops);
DensityOperator tensor(std::span<const DensityOperator> states);
DensityOperator tensor(std::initializer_list<DensityOperator> states);

// Embeds an operator acting on a subset of labels into `target` by padding with
// identities; factors are matched by label (and must agree in dimension).
Matrix embed(const Matrix& op, const SpaceLayout& op_layout, const SpaceLayout& target);
HermitianOperator embed(const HermitianOperator& op, const SpaceLayout& target);

// Index permutation that moves `keep` factors (in layout order) to the front.
// perm[new_index] = old_index.
std::vector<std::size_t> front_permutation(const SpaceLayout& layout, const std::vector<std::string>& keep);

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& keep);

// Reduced state of sum_n w_n |v_n><v_n| where v_n are the columns of `vectors`.
// Weights below `skip_below` are ignored.
Matrix partial_trace_ensemble(const SpaceLayout& layout, const std::vector<std::string>& keep,
                              const Matrix& vectors, std::span<const double> weights,
                              double skip_below = 0.0);

// f applied on the spectrum; eigenvalues with |lambda| <= zero_cutoff map to 0.
HermitianOperator spectral_function(const HermitianOperator& op, const std::function<double(double)>& f,
                                    double zero_cutoff = 0.0);
// Complex-valued variant (e.g. exp(-iHt)); the result is a general matrix.
Matrix spectral_function_complex(const HermitianOperator& op, const std::function<cplx(double)>& f);

// ln rho with the 0 ln 0 = 0 convention: eigenvalues <= cutoff*lambda_max map to 0.
inline constexpr double kLogCutoff = 1e-12;
Matrix log_density(const DensityOperator& rho, double relative_cutoff = kLogCutoff);

// Tr(rho H) and Tr(rho H^2) - Tr(rho H)^2; obs is auto-embedded by label.
Moments expectation_and_variance(const HermitianOperator& obs, const DensityOperator& rho);

// rho(t) = U rho0 U^dag with U = exp(-i H t), one eigendecomposition for all times.
std::vector<DensityOperator> evolve(const DensityOperator& rho0, const HermitianOperator& hamiltonian,
                                    std::span<const double> times);

double max_abs(const Matrix& m);
// Largest singular value.
double spectral_norm(const Matrix& m);

namespace ops {
Matrix identity(std::size_t d);
// sigma_z = |down><down| - |up><up| with |down> = index 0.
Matrix sigma_z();
Matrix annihilation(std::size_t d);
Matrix creation(std::size_t d);
Matrix number(std::size_t d);
} // namespace ops

} // namespace qmt
