// hilbert.hpp — Truncated Fock-space operator algebra: spaces, operators, states

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dce {

using Index = Eigen::Index;
using cplx = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Triplet = Eigen::Triplet<cplx>;

inline constexpr cplx I{0.0, 1.0};

// ----------------------------------------------------------------------------
// Space descriptors
//
// Global basis ordering: subsystem 1 before subsystem 2 and, inside a
// subsystem, qubit before mode, i.e. (qubit1, mode1, qubit2, mode2). Flat
// indices are row-major over the factor list (last factor fastest). Qubit
// basis order is (|g>, |e>).
// ----------------------------------------------------------------------------

enum class FactorKind { qubit, mode, dressed, ladder };

struct Factor {
    FactorKind kind{FactorKind::qubit};
    Index dim{2};

    bool operator==(const Factor&) const = default;
};

inline const char* factor_kind_name(FactorKind k) {
    switch (k) {
    case FactorKind::qubit: return "qubit";
    case FactorKind::mode: return "mode";
    case FactorKind::dressed: return "dressed";
    case FactorKind::ladder: return "ladder";
    }
    return "?";
}

class SpaceDescriptor {
public:
    SpaceDescriptor() = default;

    explicit SpaceDescriptor(std::vector<Factor> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) throw std::invalid_argument("SpaceDescriptor: no factors");
        for (const auto& f : factors_) {
            if (f.kind == FactorKind::qubit && f.dim != 2)
                throw std::invalid_argument("SpaceDescriptor: qubit factor must have dimension 2");
            if (f.kind == FactorKind::mode && f.dim < 2)
                throw std::invalid_argument("SpaceDescriptor: mode factor needs n_max >= 1");
            if (f.dim < 1) throw std::invalid_argument("SpaceDescriptor: empty factor");
        }
    }

    static SpaceDescriptor qubit() { return SpaceDescriptor({{FactorKind::qubit, 2}}); }
    static SpaceDescriptor mode(Index n_max) { return SpaceDescriptor({{FactorKind::mode, n_max + 1}}); }
    static SpaceDescriptor qubit_mode(Index n_max) {
        return SpaceDescriptor({{FactorKind::qubit, 2}, {FactorKind::mode, n_max + 1}});
    }
    static SpaceDescriptor two_pairs(Index n_max1, Index n_max2) {
        return SpaceDescriptor({{FactorKind::qubit, 2},
                                {FactorKind::mode, n_max1 + 1},
                                {FactorKind::qubit, 2},
                                {FactorKind::mode, n_max2 + 1}});
    }
    static SpaceDescriptor dressed_pair(Index k1, Index k2) {
        return SpaceDescriptor({{FactorKind::dressed, k1}, {FactorKind::dressed, k2}});
    }
    static SpaceDescriptor ladder(Index rungs) { return SpaceDescriptor({{FactorKind::ladder, rungs}}); }

    std::size_t size() const { return factors_.size(); }
    const Factor& factor(std::size_t i) const { return factors_.at(i); }
    const std::vector<Factor>& factors() const { return factors_; }

    Index dim() const {
        Index d = 1;
        for (const auto& f : factors_) d *= f.dim;
        return factors_.empty() ? 0 : d;
    }

    // Product of dimensions of factors after position i.
    Index stride(std::size_t i) const {
        Index s = 1;
        for (std::size_t j = i + 1; j < factors_.size(); ++j) s *= factors_[j].dim;
        return s;
    }

    Index digit(Index flat, std::size_t i) const { return (flat / stride(i)) % factors_.at(i).dim; }

    std::vector<Index> digits(Index flat) const {
        std::vector<Index> d(factors_.size());
        for (std::size_t i = factors_.size(); i-- > 0;) {
            d[i] = flat % factors_[i].dim;
            flat /= factors_[i].dim;
        }
        return d;
    }

    Index flat(const std::vector<Index>& digits) const {
        if (digits.size() != factors_.size()) throw std::invalid_argument("SpaceDescriptor::flat: digit count");
        Index f = 0;
        for (std::size_t i = 0; i < factors_.size(); ++i) f = f * factors_[i].dim + digits[i];
        return f;
    }

    SpaceDescriptor slice(std::size_t first, std::size_t count) const {
        if (count == 0 || first + count > factors_.size())
            throw std::out_of_range("SpaceDescriptor::slice: range outside descriptor");
        return SpaceDescriptor(std::vector<Factor>(factors_.begin() + static_cast<std::ptrdiff_t>(first),
                                                   factors_.begin() + static_cast<std::ptrdiff_t>(first + count)));
    }

    SpaceDescriptor concat(const SpaceDescriptor& other) const {
        auto f = factors_;
        f.insert(f.end(), other.factors_.begin(), other.factors_.end());
        return SpaceDescriptor(std::move(f));
    }

    std::string describe() const {
        std::string s = "[";
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            if (i) s += ", ";
            s += factor_kind_name(factors_[i].kind);
            s += ":" + std::to_string(factors_[i].dim);
        }
        return s + "]";
    }

    bool operator==(const SpaceDescriptor&) const = default;

private:
    std::vector<Factor> factors_;
};

inline void require_same_space(const SpaceDescriptor& a, const SpaceDescriptor& b, const char* where) {
    if (!(a == b))
        throw std::invalid_argument(std::string(where) + ": space mismatch " + a.describe() + " vs " + b.describe());
}

// ----------------------------------------------------------------------------
// OperatorMatrix
// ----------------------------------------------------------------------------

class OperatorMatrix {
public:
    // Operators up to this total dimension are stored dense.
    static constexpr Index kDenseLimit = 256;

    OperatorMatrix() = default;

    OperatorMatrix(SpaceDescriptor space, const DenseMatrix& m) : space_(std::move(space)) {
        check_shape(m.rows(), m.cols());
        if (space_.dim() <= kDenseLimit) {
            data_ = m;
        } else {
            data_ = SparseMatrix(m.sparseView(cplx(0.0), 0.0));
        }
    }

    OperatorMatrix(SpaceDescriptor space, SparseMatrix m) : space_(std::move(space)) {
        check_shape(m.rows(), m.cols());
        if (space_.dim() <= kDenseLimit) {
            data_ = DenseMatrix(m);
        } else {
            m.makeCompressed();
            data_ = std::move(m);
        }
    }

    static OperatorMatrix identity(const SpaceDescriptor& space) {
        SparseMatrix id(space.dim(), space.dim());
        id.setIdentity();
        return OperatorMatrix(space, std::move(id));
    }

    static OperatorMatrix zero(const SpaceDescriptor& space) {
        return OperatorMatrix(space, SparseMatrix(space.dim(), space.dim()));
    }

    static OperatorMatrix diagonal(const SpaceDescriptor& space, const Vector& d) {
        if (d.size() != space.dim()) throw std::invalid_argument("OperatorMatrix::diagonal: size");
        std::vector<Triplet> t;
        for (Index i = 0; i < d.size(); ++i)
            if (d(i) != cplx(0.0)) t.emplace_back(i, i, d(i));
        SparseMatrix m(space.dim(), space.dim());
        m.setFromTriplets(t.begin(), t.end());
        return OperatorMatrix(space, std::move(m));
    }

    const SpaceDescriptor& space() const { return space_; }
    Index dim() const { return space_.dim(); }
    bool is_sparse() const { return std::holds_alternative<SparseMatrix>(data_); }

    DenseMatrix dense() const {
        if (auto* d = std::get_if<DenseMatrix>(&data_)) return *d;
        return DenseMatrix(std::get<SparseMatrix>(data_));
    }

    SparseMatrix sparse() const {
        if (auto* s = std::get_if<SparseMatrix>(&data_)) return *s;
        return std::get<DenseMatrix>(data_).sparseView(cplx(0.0), 0.0);
    }

    cplx operator()(Index r, Index c) const {
        if (auto* d = std::get_if<DenseMatrix>(&data_)) return (*d)(r, c);
        return std::get<SparseMatrix>(data_).coeff(r, c);
    }

    OperatorMatrix adjoint() const {
        if (auto* d = std::get_if<DenseMatrix>(&data_)) return OperatorMatrix(space_, DenseMatrix(d->adjoint()));
        return OperatorMatrix(space_, SparseMatrix(std::get<SparseMatrix>(data_).adjoint()));
    }

    double max_abs() const {
        if (auto* d = std::get_if<DenseMatrix>(&data_)) return d->size() ? d->cwiseAbs().maxCoeff() : 0.0;
        const auto& s = std::get<SparseMatrix>(data_);
        double m = 0.0;
        for (Index k = 0; k < s.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(s, k); it; ++it) m = std::max(m, std::abs(it.value()));
        return m;
    }

    double frobenius_norm() const {
        if (auto* d = std::get_if<DenseMatrix>(&data_)) return d->norm();
        return std::get<SparseMatrix>(data_).norm();
    }

    // max |M - M^dagger|
    double hermiticity_residual() const { return (*this - adjoint()).max_abs(); }
    bool is_hermitian(double tol) const { return hermiticity_residual() <= tol; }

    Vector apply(const Vector& v) const {
        if (v.size() != dim()) throw std::invalid_argument("OperatorMatrix::apply: vector size");
        if (auto* d = std::get_if<DenseMatrix>(&data_)) return (*d) * v;
        return std::get<SparseMatrix>(data_) * v;
    }

    friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
        require_same_space(a.space_, b.space_, "operator+");
        if (!a.is_sparse() && !b.is_sparse()) return OperatorMatrix(a.space_, DenseMatrix(a.dense() + b.dense()));
        return OperatorMatrix(a.space_, SparseMatrix(a.sparse() + b.sparse()));
    }

    friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
        require_same_space(a.space_, b.space_, "operator-");
        if (!a.is_sparse() && !b.is_sparse()) return OperatorMatrix(a.space_, DenseMatrix(a.dense() - b.dense()));
        return OperatorMatrix(a.space_, SparseMatrix(a.sparse() - b.sparse()));
    }

    friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
        require_same_space(a.space_, b.space_, "operator*");
        if (!a.is_sparse() && !b.is_sparse()) return OperatorMatrix(a.space_, DenseMatrix(a.dense() * b.dense()));
        return OperatorMatrix(a.space_, SparseMatrix((a.sparse() * b.sparse()).pruned()));
    }

    friend OperatorMatrix operator*(cplx s, const OperatorMatrix& a) {
        if (!a.is_sparse()) return OperatorMatrix(a.space_, DenseMatrix(s * a.dense()));
        return OperatorMatrix(a.space_, SparseMatrix(s * a.sparse()));
    }
    friend OperatorMatrix operator*(double s, const OperatorMatrix& a) { return cplx(s) * a; }

    OperatorMatrix& operator+=(const OperatorMatrix& b) { return *this = *this + b; }

private:
    void check_shape(Index r, Index c) const {
        if (r != c) throw std::invalid_argument("OperatorMatrix: matrix not square");
        if (r != space_.dim())
            throw std::invalid_argument("OperatorMatrix: dimension " + std::to_string(r) + " does not match space " +
                                        space_.describe());
    }

    SpaceDescriptor space_;
    std::variant<DenseMatrix, SparseMatrix> data_;
};

inline OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) { return a * b - b * a; }

// ----------------------------------------------------------------------------
// Elementary operators
// ----------------------------------------------------------------------------

inline OperatorMatrix annihilation(Index n_max) {
    if (n_max < 1) throw std::invalid_argument("annihilation: n_max must be >= 1");
    const auto space = SpaceDescriptor::mode(n_max);
    std::vector<Triplet> t;
    for (Index n = 1; n <= n_max; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
    SparseMatrix a(n_max + 1, n_max + 1);
    a.setFromTriplets(t.begin(), t.end());
    return OperatorMatrix(space, std::move(a));
}

inline OperatorMatrix creation(Index n_max) { return annihilation(n_max).adjoint(); }

inline OperatorMatrix number(Index n_max) {
    Vector d(n_max + 1);
    for (Index n = 0; n <= n_max; ++n) d(n) = static_cast<double>(n);
    return OperatorMatrix::diagonal(SpaceDescriptor::mode(n_max), d);
}

enum class Pauli { x, y, z, plus, minus };

// Basis (|g>, |e>): sigma_z = diag(-1, +1), sigma_plus |g> = |e>.
inline OperatorMatrix pauli(Pauli which) {
    DenseMatrix m = DenseMatrix::Zero(2, 2);
    switch (which) {
    case Pauli::x: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case Pauli::y: m(0, 1) = I; m(1, 0) = -I; break;
    case Pauli::z: m(0, 0) = -1.0; m(1, 1) = 1.0; break;
    case Pauli::plus: m(1, 0) = 1.0; break;
    case Pauli::minus: m(0, 1) = 1.0; break;
    }
    return OperatorMatrix(SpaceDescriptor::qubit(), m);
}

// Kronecker product; factor lists are concatenated.
inline OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b) {
    const SparseMatrix sa = a.sparse();
    const SparseMatrix sb = b.sparse();
    const Index db = b.dim();
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(sa.nonZeros() * sb.nonZeros()));
    for (Index ka = 0; ka < sa.outerSize(); ++ka)
        for (SparseMatrix::InnerIterator ia(sa, ka); ia; ++ia)
            for (Index kb = 0; kb < sb.outerSize(); ++kb)
                for (SparseMatrix::InnerIterator ib(sb, kb); ib; ++ib)
                    t.emplace_back(ia.row() * db + ib.row(), ia.col() * db + ib.col(), ia.value() * ib.value());
    SparseMatrix m(a.dim() * db, a.dim() * db);
    m.setFromTriplets(t.begin(), t.end());
    return OperatorMatrix(a.space().concat(b.space()), std::move(m));
}

// Places `op` on the consecutive factors starting at factor_index of `target`
// (identity elsewhere). op's space must equal that slice of the target.
inline OperatorMatrix embed(const OperatorMatrix& op, std::size_t factor_index, const SpaceDescriptor& target) {
    const std::size_t nf = op.space().size();
    if (factor_index + nf > target.size())
        throw std::out_of_range("embed: factor index " + std::to_string(factor_index) + " out of range for " +
                                target.describe());
    if (!(target.slice(factor_index, nf) == op.space()))
        throw std::invalid_argument("embed: operator space " + op.space().describe() +
                                    " does not match target factors at index " + std::to_string(factor_index));
    Index left = 1;
    for (std::size_t i = 0; i < factor_index; ++i) left *= target.factor(i).dim;
    const Index right = target.stride(factor_index + nf - 1);
    const Index d = op.dim();
    const SparseMatrix s = op.sparse();
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(s.nonZeros() * left * right));
    for (Index l = 0; l < left; ++l)
        for (Index k = 0; k < s.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(s, k); it; ++it)
                for (Index r = 0; r < right; ++r)
                    t.emplace_back((l * d + it.row()) * right + r, (l * d + it.col()) * right + r, it.value());
    SparseMatrix m(target.dim(), target.dim());
    m.setFromTriplets(t.begin(), t.end());
    return OperatorMatrix(target, std::move(m));
}

// Pi = -sigma_z exp(i pi a^dagger a) on a (qubit, mode) pair.
inline OperatorMatrix parity_operator(const SpaceDescriptor& pair) {
    if (pair.size() != 2 || pair.factor(0).kind != FactorKind::qubit || pair.factor(1).kind != FactorKind::mode)
        throw std::invalid_argument("parity_operator: expected a (qubit, mode) pair, got " + pair.describe());
    const Index m = pair.factor(1).dim;
    Vector d(2 * m);
    for (Index q = 0; q < 2; ++q)
        for (Index n = 0; n < m; ++n) {
            const double sz = q == 0 ? -1.0 : 1.0;
            d(q * m + n) = -sz * ((n % 2 == 0) ? 1.0 : -1.0);
        }
    return OperatorMatrix::diagonal(pair, d);
}

// ----------------------------------------------------------------------------
// QuantumState
// ----------------------------------------------------------------------------

class QuantumState {
public:
    enum class Kind { pure, mixed };

    static QuantumState pure(SpaceDescriptor space, Vector psi, double tol = 1e-9) {
        if (psi.size() != space.dim()) throw std::invalid_argument("QuantumState::pure: vector size mismatch");
        if (std::abs(psi.norm() - 1.0) > tol)
            throw std::invalid_argument("QuantumState::pure: state not normalized (norm " +
                                        std::to_string(psi.norm()) + ")");
        QuantumState s;
        s.space_ = std::move(space);
        s.kind_ = Kind::pure;
        s.psi_ = std::move(psi);
        return s;
    }

    static QuantumState mixed(SpaceDescriptor space, DenseMatrix rho, double tol = 1e-9) {
        if (rho.rows() != space.dim() || rho.cols() != space.dim())
            throw std::invalid_argument("QuantumState::mixed: matrix size mismatch");
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol)
            throw std::invalid_argument("QuantumState::mixed: density matrix not Hermitian");
        if (std::abs(rho.trace() - cplx(1.0)) > tol)
            throw std::invalid_argument("QuantumState::mixed: trace differs from 1");
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -tol)
            throw std::invalid_argument("QuantumState::mixed: negative eigenvalue " +
                                        std::to_string(es.eigenvalues().minCoeff()));
        QuantumState s;
        s.space_ = std::move(space);
        s.kind_ = Kind::mixed;
        s.rho_ = std::move(rho);
        return s;
    }

    static QuantumState basis(const SpaceDescriptor& space, Index index) {
        Vector v = Vector::Zero(space.dim());
        v(index) = 1.0;
        return pure(space, std::move(v));
    }

    const SpaceDescriptor& space() const { return space_; }
    Kind kind() const { return kind_; }
    bool is_pure() const { return kind_ == Kind::pure; }

    const Vector& vector() const {
        if (kind_ != Kind::pure) throw std::logic_error("QuantumState::vector: state is mixed");
        return psi_;
    }

    DenseMatrix density() const {
        if (kind_ == Kind::pure) return psi_ * psi_.adjoint();
        return rho_;
    }

    QuantumState tensor(const QuantumState& other) const {
        const auto space = space_.concat(other.space_);
        if (is_pure() && other.is_pure()) {
            Vector v(space.dim());
            for (Index i = 0; i < psi_.size(); ++i) v.segment(i * other.psi_.size(), other.psi_.size()) = psi_(i) * other.psi_;
            return pure(space, std::move(v));
        }
        const DenseMatrix a = density();
        const DenseMatrix b = other.density();
        DenseMatrix r(space.dim(), space.dim());
        for (Index i = 0; i < a.rows(); ++i)
            for (Index j = 0; j < a.cols(); ++j) r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        return mixed(space, std::move(r));
    }

private:
    SpaceDescriptor space_;
    Kind kind_{Kind::pure};
    Vector psi_;
    DenseMatrix rho_;
};

// Splits every flat index of `space` into (kept index, traced index) for a
// given sorted factor subset.
struct IndexSplit {
    SpaceDescriptor kept_space;
    Index traced_dim{1};
    std::vector<Index> kept;
    std::vector<Index> traced;
};

inline IndexSplit split_indices(const SpaceDescriptor& space, std::vector<std::size_t> keep) {
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    if (keep.back() >= space.size()) throw std::out_of_range("partial_trace: factor index out of range");
    std::vector<Factor> kf;
    std::vector<bool> is_kept(space.size(), false);
    for (auto k : keep) {
        kf.push_back(space.factor(k));
        is_kept[k] = true;
    }
    IndexSplit s{SpaceDescriptor(kf), 1, {}, {}};
    for (std::size_t i = 0; i < space.size(); ++i)
        if (!is_kept[i]) s.traced_dim *= space.factor(i).dim;
    const Index d = space.dim();
    s.kept.resize(static_cast<std::size_t>(d));
    s.traced.resize(static_cast<std::size_t>(d));
    for (Index f = 0; f < d; ++f) {
        Index rem = f, kidx = 0, tidx = 0, kmul = 1, tmul = 1;
        for (std::size_t i = space.size(); i-- > 0;) {
            const Index dim = space.factor(i).dim;
            const Index digit = rem % dim;
            rem /= dim;
            if (is_kept[i]) {
                kidx += digit * kmul;
                kmul *= dim;
            } else {
                tidx += digit * tmul;
                tmul *= dim;
            }
        }
        s.kept[static_cast<std::size_t>(f)] = kidx;
        s.traced[static_cast<std::size_t>(f)] = tidx;
    }
    return s;
}

// Reduced density matrix on the kept factors (kept in descriptor order).
inline QuantumState partial_trace(const QuantumState& state, std::vector<std::size_t> keep) {
    const auto split = split_indices(state.space(), std::move(keep));
    const Index dk = split.kept_space.dim();
    DenseMatrix rho = DenseMatrix::Zero(dk, dk);
    if (state.is_pure()) {
        DenseMatrix m = DenseMatrix::Zero(dk, split.traced_dim);
        const Vector& psi = state.vector();
        for (Index f = 0; f < psi.size(); ++f) m(split.kept[f], split.traced[f]) = psi(f);
        rho = m * m.adjoint();
    } else {
        const DenseMatrix full = state.density();
        // group flat indices by traced index
        std::vector<std::vector<Index>> groups(static_cast<std::size_t>(split.traced_dim));
        for (Index f = 0; f < full.rows(); ++f) groups[static_cast<std::size_t>(split.traced[f])].push_back(f);
        for (const auto& g : groups)
            for (Index a : g)
                for (Index b : g) rho(split.kept[a], split.kept[b]) += full(a, b);
    }
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return QuantumState::mixed(split.kept_space, std::move(rho), 1e-8);
}

} // namespace dce
