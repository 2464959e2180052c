// eigensystem.hpp — Parity-resolved eigendecomposition of a qubit-mode subsystem

#pragma once

#include "dce/hilbert.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dce {

// Eigenstates of a single (qubit, mode) Hamiltonian, ascending in energy.
// x_elements(k, l) = <phi_k|(a + a^dagger)|phi_l>, sx_elements(k, l) = <phi_k|sigma_x|phi_l>.
struct EigenSystem {
    SpaceDescriptor space;
    RealVector energies;
    DenseMatrix states;
    std::vector<int> parities;
    DenseMatrix x_elements;
    DenseMatrix sx_elements;

    Index size() const { return energies.size(); }
    double gap(Index k, Index l) const { return energies(k) - energies(l); }

    // Matrix elements V^dagger op V on the retained states.
    DenseMatrix project(const OperatorMatrix& op) const {
        require_same_space(op.space(), space, "EigenSystem::project");
        if (op.is_sparse()) return states.adjoint() * (op.sparse() * states);
        return states.adjoint() * op.dense() * states;
    }

    EigenSystem truncated(Index k) const {
        if (k < 1 || k > size()) throw std::out_of_range("EigenSystem::truncated: level count");
        EigenSystem e;
        e.space = space;
        e.energies = energies.head(k);
        e.states = states.leftCols(k);
        e.parities.assign(parities.begin(), parities.begin() + k);
        e.x_elements = x_elements.topLeftCorner(k, k);
        e.sx_elements = sx_elements.topLeftCorner(k, k);
        return e;
    }

    // Population of state k on the two highest Fock levels of the mode.
    double top_fock_population(Index k) const {
        const Index m = space.factor(1).dim;
        double p = 0.0;
        for (Index q = 0; q < 2; ++q)
            for (Index n = std::max<Index>(0, m - 2); n < m; ++n) p += std::norm(states(q * m + n, k));
        return p;
    }
};

namespace detail {

// Largest-magnitude component made real positive; ties resolved by lowest index.
inline void fix_phase(Eigen::Ref<Vector> v) {
    Index best = 0;
    double mag = -1.0;
    for (Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        if (a > mag * (1.0 + 1e-10) + 1e-300) {
            mag = a;
            best = i;
        }
    }
    if (mag > 0.0) v *= std::conj(v(best)) / std::abs(v(best));
}

} // namespace detail

// Diagonalizes a (qubit, mode) Hamiltonian that commutes with the parity
// operator, block by block, so every eigenvector carries an exact parity label.
// `keep` limits the number of returned levels (all when negative).
inline EigenSystem diagonalize_pair(const OperatorMatrix& h, Index keep = -1) {
    const auto& space = h.space();
    const OperatorMatrix parity = parity_operator(space);
    if (commutator(parity, h).max_abs() > 1e-10 * std::max(1.0, h.max_abs()))
        throw std::invalid_argument("diagonalize_pair: Hamiltonian does not conserve parity");

    const Index d = space.dim();
    const DenseMatrix hd = h.dense();
    const bool real = hd.imag().cwiseAbs().maxCoeff() == 0.0;

    struct Level {
        double energy;
        int parity;
        Index order;
        Vector vec;
    };
    std::vector<Level> levels;
    levels.reserve(static_cast<std::size_t>(d));

    for (int p : {+1, -1}) {
        std::vector<Index> idx;
        for (Index i = 0; i < d; ++i)
            if (std::real(parity(i, i)) == static_cast<double>(p)) idx.push_back(i);
        const Index n = static_cast<Index>(idx.size());
        if (n == 0) continue;
        DenseMatrix block(n, n);
        for (Index r = 0; r < n; ++r)
            for (Index c = 0; c < n; ++c) block(r, c) = hd(idx[r], idx[c]);
        RealVector evals;
        DenseMatrix evecs;
        if (real) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block.real());
            evals = es.eigenvalues();
            evecs = es.eigenvectors().cast<cplx>();
        } else {
            Eigen::SelfAdjointEigenSolver<DenseMatrix> es(block);
            evals = es.eigenvalues();
            evecs = es.eigenvectors();
        }
        for (Index k = 0; k < n; ++k) {
            Vector v = Vector::Zero(d);
            for (Index r = 0; r < n; ++r) v(idx[r]) = evecs(r, k);
            detail::fix_phase(v);
            levels.push_back({evals(k), p, static_cast<Index>(levels.size()), std::move(v)});
        }
    }
    std::stable_sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) {
        if (a.energy != b.energy) return a.energy < b.energy;
        if (a.parity != b.parity) return a.parity > b.parity;
        return a.order < b.order;
    });

    const Index k = keep < 0 ? d : std::min(keep, d);
    EigenSystem e;
    e.space = space;
    e.energies.resize(k);
    e.states.resize(d, k);
    e.parities.resize(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) {
        e.energies(i) = levels[static_cast<std::size_t>(i)].energy;
        e.states.col(i) = levels[static_cast<std::size_t>(i)].vec;
        e.parities[static_cast<std::size_t>(i)] = levels[static_cast<std::size_t>(i)].parity;
    }
    const Index n_max = space.factor(1).dim - 1;
    const OperatorMatrix x = embed(annihilation(n_max) + creation(n_max), 1, space);
    const OperatorMatrix sx = embed(pauli(Pauli::x), 0, space);
    e.x_elements = e.project(x);
    e.sx_elements = e.project(sx);
    return e;
}

} // namespace dce
