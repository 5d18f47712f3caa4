#include "qmt/qlinalg.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "qmt/errors.hpp"
#include "qmt/kernels.hpp"

namespace qmt {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-10;
constexpr double kNegativeTol = 1e-10;

double hermiticity_defect(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

void require_square(const Matrix& m, std::size_t dim, const char* what) {
    if (static_cast<std::size_t>(m.rows()) != dim || static_cast<std::size_t>(m.cols()) != dim)
        fail(ErrorKind::LayoutConflict, std::string(what) + ": matrix shape does not match layout dimension");
}

// Decomposes a flat index into per-factor digits.
std::vector<std::size_t> digits_of(std::size_t index, const std::vector<Factor>& factors) {
    std::vector<std::size_t> d(factors.size());
    for (std::size_t k = factors.size(); k-- > 0;) {
        d[k] = index % factors[k].dim;
        index /= factors[k].dim;
    }
    return d;
}

} // namespace

SpaceLayout::SpaceLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
    std::unordered_set<std::string> seen;
    total_ = 1;
    for (const auto& f : factors_) {
        if (f.label.empty()) fail(ErrorKind::LayoutConflict, "empty factor label");
        if (!seen.insert(f.label).second) fail(ErrorKind::LayoutConflict, "duplicate factor label '" + f.label + "'");
        if (f.kind == FactorKind::TwoLevel && f.dim < 2)
            fail(ErrorKind::LayoutConflict, "two-level factor '" + f.label + "' needs dim >= 2");
        if (f.dim < 1) fail(ErrorKind::LayoutConflict, "factor '" + f.label + "' has zero dimension");
        total_ *= f.dim;
    }
}

bool SpaceLayout::contains(const std::string& label) const {
    return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.label == label; });
}

std::size_t SpaceLayout::position(const std::string& label) const {
    for (std::size_t i = 0; i < factors_.size(); ++i)
        if (factors_[i].label == label) return i;
    fail(ErrorKind::InvalidSelection, "label '" + label + "' not in layout");
}

std::vector<std::string> SpaceLayout::labels() const {
    std::vector<std::string> out;
    out.reserve(factors_.size());
    for (const auto& f : factors_) out.push_back(f.label);
    return out;
}

SpaceLayout SpaceLayout::concat(const SpaceLayout& other) const {
    std::vector<Factor> all = factors_;
    all.insert(all.end(), other.factors_.begin(), other.factors_.end());
    return SpaceLayout(std::move(all));
}

SpaceLayout SpaceLayout::subset(const std::vector<std::string>& labels) const {
    std::vector<Factor> out;
    for (const auto& f : factors_)
        if (std::find(labels.begin(), labels.end(), f.label) != labels.end()) out.push_back(f);
    return SpaceLayout(std::move(out));
}

HermitianOperator::HermitianOperator(SpaceLayout layout, Matrix entries, Unit unit)
    : layout_(std::move(layout)), m_(std::move(entries)), unit_(unit) {
    require_square(m_, layout_.total_dim(), "HermitianOperator");
    const double scale = m_.size() ? m_.cwiseAbs().maxCoeff() : 0.0;
    if (hermiticity_defect(m_) > kHermitianTol * std::max(scale, 1e-300))
        fail(ErrorKind::NotHermitian, "operator deviates from its adjoint");
    m_ = 0.5 * (m_ + m_.adjoint()).eval();
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& rhs) const {
    if (!(layout_ == rhs.layout_)) {
        // Allow summing operators defined on different factor subsets of the same layout.
        fail(ErrorKind::LayoutConflict, "cannot add operators on different layouts (embed first)");
    }
    return HermitianOperator(layout_, m_ + rhs.m_, unit_);
}

HermitianOperator HermitianOperator::operator*(double s) const { return HermitianOperator(layout_, m_ * s, unit_); }

EigenSystem eigensystem(const Matrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
    if (solver.info() != Eigen::Success) fail(ErrorKind::NotHermitian, "eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

DensityOperator::DensityOperator(SpaceLayout layout, Matrix entries)
    : layout_(std::move(layout)), m_(std::move(entries)) {
    require_square(m_, layout_.total_dim(), "DensityOperator");
    if (hermiticity_defect(m_) > kHermitianTol) fail(ErrorKind::InvalidState, "density operator is not Hermitian");
    m_ = 0.5 * (m_ + m_.adjoint()).eval();
    const double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > kTraceTol)
        fail(ErrorKind::InvalidState, "trace " + num(tr) + " differs from 1");
    eig_ = eigensystem(m_);
    const double min_ev = eig_.values.size() ? eig_.values.minCoeff() : 0.0;
    if (min_ev < -kNegativeTol)
        fail(ErrorKind::InvalidState, "negative eigenvalue " + num(min_ev));
    if (min_ev < 0.0) {
        eig_.values = eig_.values.cwiseMax(0.0);
        eig_.values /= eig_.values.sum();
        m_ = eig_.vectors * eig_.values.cast<cplx>().asDiagonal() * eig_.vectors.adjoint();
    }
}

DensityOperator DensityOperator::from_pure(SpaceLayout layout, const Vector& psi) {
    const double n = psi.norm();
    if (n == 0.0) fail(ErrorKind::InvalidState, "zero state vector");
    const Vector u = psi / n;
    return DensityOperator(std::move(layout), u * u.adjoint());
}

double DensityOperator::purity() const { return eig_.values.squaredNorm(); }

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (a(i, j) != cplx(0.0)) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

HermitianOperator tensor(std::span<const HermitianOperator> ops) {
    if (ops.empty()) fail(ErrorKind::InvalidSelection, "tensor of an empty list");
    SpaceLayout layout = ops.front().layout();
    Matrix m = ops.front().matrix();
    Unit unit = ops.front().unit();
    for (std::size_t i = 1; i < ops.size(); ++i) {
        layout = layout.concat(ops[i].layout());
        m = kron(m, ops[i].matrix());
        if (ops[i].unit() == Unit::AngularFrequency) unit = Unit::AngularFrequency;
    }
    return HermitianOperator(std::move(layout), std::move(m), unit);
}

HermitianOperator tensor(std::initializer_list<HermitianOperator> ops) {
    return tensor(std::span<const HermitianOperator>(ops.begin(), ops.size()));
}

DensityOperator tensor(std::span<const DensityOperator> states) {
    if (states.empty()) fail(ErrorKind::InvalidSelection, "tensor of an empty list");
    SpaceLayout layout = states.front().layout();
    Matrix m = states.front().matrix();
    for (std::size_t i = 1; i < states.size(); ++i) {
        layout = layout.concat(states[i].layout());
        m = kron(m, states[i].matrix());
    }
    return DensityOperator(std::move(layout), std::move(m));
}

DensityOperator tensor(std::initializer_list<DensityOperator> states) {
    return tensor(std::span<const DensityOperator>(states.begin(), states.size()));
}

std::vector<std::size_t> front_permutation(const SpaceLayout& layout, const std::vector<std::string>& keep) {
    const auto& f = layout.factors();
    std::vector<std::size_t> order;  // factor positions: kept first, then the rest
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::find(keep.begin(), keep.end(), f[i].label) != keep.end()) order.push_back(i);
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::find(keep.begin(), keep.end(), f[i].label) == keep.end()) order.push_back(i);

    // stride of each original factor in the original flat index
    std::vector<std::size_t> stride(f.size(), 1);
    for (std::size_t k = f.size(); k-- > 1;) stride[k - 1] = stride[k] * f[k].dim;

    const std::size_t total = layout.total_dim();
    std::vector<std::size_t> perm(total);
    std::vector<std::size_t> digit(f.size(), 0);  // digits in the permuted ordering
    for (std::size_t n = 0; n < total; ++n) {
        std::size_t old = 0;
        for (std::size_t k = 0; k < order.size(); ++k) old += digit[k] * stride[order[k]];
        perm[n] = old;
        for (std::size_t k = order.size(); k-- > 0;) {
            if (++digit[k] < f[order[k]].dim) break;
            digit[k] = 0;
        }
    }
    return perm;
}

Matrix embed(const Matrix& op, const SpaceLayout& op_layout, const SpaceLayout& target) {
    if (static_cast<std::size_t>(op.rows()) != op_layout.total_dim())
        fail(ErrorKind::LayoutConflict, "operator shape does not match its layout");
    if (op_layout == target) return op;
    std::vector<std::string> keep;
    for (const auto& f : op_layout.factors()) {
        if (!target.contains(f.label)) fail(ErrorKind::LayoutConflict, "label '" + f.label + "' absent from target");
        if (target.factors()[target.position(f.label)].dim != f.dim)
            fail(ErrorKind::LayoutConflict, "dimension mismatch for label '" + f.label + "'");
        keep.push_back(f.label);
    }
    // The operator's own factor order may differ from the target's; reorder it
    // into target order first.
    const SpaceLayout kept = target.subset(keep);
    Matrix op_sorted = op;
    if (!(kept == op_layout)) {
        std::vector<std::string> kept_labels = kept.labels();
        // perm maps kept-order index -> op-order index
        std::vector<std::size_t> perm(kept.total_dim());
        const auto& kf = kept.factors();
        for (std::size_t n = 0; n < perm.size(); ++n) {
            const auto d = digits_of(n, kf);
            std::size_t old = 0;
            for (const auto& of : op_layout.factors()) old = old * of.dim + d[kept.position(of.label)];
            perm[n] = old;
        }
        for (std::size_t i = 0; i < perm.size(); ++i)
            for (std::size_t j = 0; j < perm.size(); ++j)
                op_sorted(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    op(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j]));
    }
    const std::size_t dk = kept.total_dim();
    const std::size_t dr = target.total_dim() / dk;
    const Matrix front = kron(op_sorted, ops::identity(dr));
    const auto perm = front_permutation(target, keep);
    Matrix out(static_cast<Eigen::Index>(target.total_dim()), static_cast<Eigen::Index>(target.total_dim()));
    for (std::size_t j = 0; j < perm.size(); ++j)
        for (std::size_t i = 0; i < perm.size(); ++i)
            out(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j])) =
                front(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
}

HermitianOperator embed(const HermitianOperator& op, const SpaceLayout& target) {
    return HermitianOperator(target, embed(op.matrix(), op.layout(), target), op.unit());
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& keep) {
    if (keep.empty()) fail(ErrorKind::InvalidSelection, "partial trace must keep at least one factor");
    for (const auto& l : keep)
        if (!rho.layout().contains(l)) fail(ErrorKind::InvalidSelection, "label '" + l + "' not in layout");
    const SpaceLayout kept = rho.layout().subset(keep);
    const std::size_t dk = kept.total_dim();
    const std::size_t dr = rho.dim() / dk;
    const auto perm = front_permutation(rho.layout(), keep);
    const Matrix& m = rho.matrix();
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::size_t b = 0; b < dk; ++b)
        for (std::size_t a = 0; a < dk; ++a) {
            cplx s = 0.0;
            for (std::size_t e = 0; e < dr; ++e)
                s += m(static_cast<Eigen::Index>(perm[a * dr + e]), static_cast<Eigen::Index>(perm[b * dr + e]));
            out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = s;
        }
    return DensityOperator(kept, std::move(out));
}

Matrix partial_trace_ensemble(const SpaceLayout& layout, const std::vector<std::string>& keep, const Matrix& vectors,
                              std::span<const double> weights, double skip_below) {
    if (keep.empty()) fail(ErrorKind::InvalidSelection, "partial trace must keep at least one factor");
    if (static_cast<std::size_t>(vectors.rows()) != layout.total_dim() ||
        static_cast<std::size_t>(vectors.cols()) != weights.size())
        fail(ErrorKind::LayoutConflict, "ensemble shape does not match layout/weights");
    const SpaceLayout kept = layout.subset(keep);
    const std::size_t dk = kept.total_dim();
    const std::size_t dr = layout.total_dim() / dk;

    // Kept factors already leading in layout order means no gather is needed.
    bool leading = true;
    for (std::size_t i = 0; i < kept.size(); ++i) leading = leading && layout.factors()[i].label == kept.factors()[i].label;
    const std::vector<std::size_t> perm = leading ? std::vector<std::size_t>{} : front_permutation(layout, keep);

    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    std::span<cplx> out_span(out.data(), static_cast<std::size_t>(out.size()));
    Vector gathered(static_cast<Eigen::Index>(layout.total_dim()));
    for (std::size_t n = 0; n < weights.size(); ++n) {
        if (weights[n] <= skip_below) continue;
        const cplx* col = vectors.col(static_cast<Eigen::Index>(n)).data();
        std::span<const cplx> v(col, layout.total_dim());
        if (!leading) {
            for (std::size_t i = 0; i < perm.size(); ++i) gathered[static_cast<Eigen::Index>(i)] = col[perm[i]];
            v = std::span<const cplx>(gathered.data(), layout.total_dim());
        }
        kernels::accumulate_reduced(weights[n], v, dk, dr, out_span);
    }
    return out;
}

HermitianOperator spectral_function(const HermitianOperator& op, const std::function<double(double)>& f,
                                    double zero_cutoff) {
    if (zero_cutoff < 0.0) fail(ErrorKind::InvalidArgument, "zero_cutoff must be nonnegative");
    const EigenSystem es = eigensystem(op.matrix());
    RealVector fv(es.values.size());
    for (Eigen::Index i = 0; i < es.values.size(); ++i)
        fv[i] = std::abs(es.values[i]) <= zero_cutoff ? 0.0 : f(es.values[i]);
    Matrix m = es.vectors * fv.cast<cplx>().asDiagonal() * es.vectors.adjoint();
    return HermitianOperator(op.layout(), std::move(m), op.unit());
}

Matrix spectral_function_complex(const HermitianOperator& op, const std::function<cplx(double)>& f) {
    const EigenSystem es = eigensystem(op.matrix());
    Vector fv(es.values.size());
    for (Eigen::Index i = 0; i < es.values.size(); ++i) fv[i] = f(es.values[i]);
    return es.vectors * fv.asDiagonal() * es.vectors.adjoint();
}

Matrix log_density(const DensityOperator& rho, double relative_cutoff) {
    const auto& es = rho.eigen();
    const double cutoff = relative_cutoff * es.values.maxCoeff();
    RealVector lv(es.values.size());
    for (Eigen::Index i = 0; i < lv.size(); ++i) lv[i] = es.values[i] > cutoff ? std::log(es.values[i]) : 0.0;
    return es.vectors * lv.cast<cplx>().asDiagonal() * es.vectors.adjoint();
}

Moments expectation_and_variance(const HermitianOperator& obs, const DensityOperator& rho) {
    const Matrix h = obs.layout() == rho.layout() ? obs.matrix() : embed(obs.matrix(), obs.layout(), rho.layout());
    const auto n = static_cast<std::size_t>(h.size());
    // For Hermitian H: Tr(rho H) = sum_ij rho_ij conj(H_ij) = <vec H, vec rho>.
    const Matrix rho_h = rho.matrix() * h;
    const double mean = kernels::dotc({h.data(), n}, {rho.matrix().data(), n}).real();
    const double second = kernels::dotc({h.data(), n}, {rho_h.data(), n}).real();
    double var = second - mean * mean;
    const double clip_tol = 1e-10 * std::max(1.0, second);
    if (var < -clip_tol) fail(ErrorKind::InvalidState, "negative variance " + num(var));
    return {mean, std::max(var, 0.0)};
}

std::vector<DensityOperator> evolve(const DensityOperator& rho0, const HermitianOperator& hamiltonian,
                                    std::span<const double> times) {
    if (!(hamiltonian.layout() == rho0.layout())) fail(ErrorKind::LayoutConflict, "Hamiltonian/state layouts differ");
    if (hamiltonian.unit() != Unit::AngularFrequency && hamiltonian.matrix().cwiseAbs().maxCoeff() != 0.0)
        fail(ErrorKind::InvalidArgument, "Hamiltonian must be expressed in angular-frequency units");
    const EigenSystem es = eigensystem(hamiltonian.matrix());
    const Matrix rho_eig = es.vectors.adjoint() * rho0.matrix() * es.vectors;
    std::vector<DensityOperator> out;
    out.reserve(times.size());
    const auto d = rho_eig.rows();
    for (double t : times) {
        if (t < 0.0) fail(ErrorKind::InvalidArgument, "negative time");
        if (t == 0.0) {
            out.push_back(rho0);
            continue;
        }
        Vector phase(d);
        for (Eigen::Index i = 0; i < d; ++i) phase[i] = std::polar(1.0, -es.values[i] * t);
        const Matrix m = phase.asDiagonal() * rho_eig * phase.conjugate().asDiagonal();
        out.emplace_back(rho0.layout(), es.vectors * m * es.vectors.adjoint());
    }
    return out;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    // Largest eigenvalue of M^dag M; avoids a full SVD.
    const Matrix g = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

namespace ops {

Matrix identity(std::size_t d) {
    return Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

Matrix sigma_z() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

Matrix annihilation(std::size_t d) {
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t n = 1; n < d; ++n)
        a(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n)) = std::sqrt(static_cast<double>(n));
    return a;
}

Matrix creation(std::size_t d) { return annihilation(d).adjoint(); }

Matrix number(std::size_t d) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t n = 0; n < d; ++n) m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = static_cast<double>(n);
    return m;
}

} // namespace ops

} // namespace qmt
