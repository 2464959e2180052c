// spectral.hpp — Dressed bases and effective models (JC ladder, polariton XY, displaced oscillators)

#pragma once

#include "dce/eigensystem.hpp"
#include "dce/errors.hpp"
#include "dce/models.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace dce {

// Any orthonormal set of subsystem states with attached (approximate) energies.
// The dressed propagators work on products of two of these.
struct LocalBasis {
    SpaceDescriptor space; // (qubit, mode)
    RealVector energies;
    DenseMatrix states;

    Index size() const { return energies.size(); }
    DenseMatrix project(const OperatorMatrix& op) const {
        require_same_space(op.space(), space, "LocalBasis::project");
        return states.adjoint() * (op.sparse() * states);
    }
};

inline LocalBasis local_basis(const EigenSystem& e) { return {e.space, e.energies, e.states}; }

namespace detail {

inline void check_top_levels(const DenseMatrix& states, Index count, Index mode_dim, double tol, const std::string& what) {
    for (Index k = 0; k < std::min(count, states.cols()); ++k) {
        double p = 0.0;
        for (Index q = 0; q < 2; ++q)
            for (Index n = std::max<Index>(0, mode_dim - 2); n < mode_dim; ++n) p += std::norm(states(q * mode_dim + n, k));
        if (p > tol)
            throw TruncationError(what + ": state " + std::to_string(k) + " has population " + std::to_string(p) +
                                      " on the two highest Fock levels (n_max = " + std::to_string(mode_dim - 1) +
                                      "); increase n_max (try " + std::to_string(2 * (mode_dim - 1)) + ")",
                                  0.0, p);
    }
}

} // namespace detail

// Full Rabi spectrum; the lowest k_dressed states must not touch the Fock cutoff.
inline EigenSystem diagonalize_rabi(const ModelSpec& spec, int sub) {
    EigenSystem e = diagonalize_pair(build_rabi(spec, sub));
    detail::check_top_levels(e.states, spec.k_dressed, spec.n_max + 1, 1e-8, "diagonalize_rabi");
    return e;
}

inline EigenSystem diagonalize_jc(const ModelSpec& spec, int sub) {
    EigenSystem e = diagonalize_pair(build_jc(spec, sub));
    detail::check_top_levels(e.states, spec.k_dressed, spec.n_max + 1, 1e-8, "diagonalize_jc");
    return e;
}

// ----------------------------------------------------------------------------
// Ladder models
// ----------------------------------------------------------------------------

// Effective Hamiltonian on an abstract ladder, plus the isometry that places
// each ladder state in a product space (column j = ladder state j).
struct LadderModel {
    std::vector<std::string> labels;
    OperatorMatrix hamiltonian;
    SpaceDescriptor product_space;
    SparseMatrix mapping;

    Index size() const { return static_cast<Index>(labels.size()); }

    double isometry_residual() const {
        const SparseMatrix g = SparseMatrix(mapping.adjoint()) * mapping;
        DenseMatrix d = DenseMatrix(g) - DenseMatrix::Identity(g.rows(), g.cols());
        return d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
    }
};

namespace detail {

inline OperatorMatrix tridiagonal(const std::vector<double>& off) {
    const Index n = static_cast<Index>(off.size()) + 1;
    std::vector<Triplet> t;
    for (Index i = 0; i + 1 < n; ++i) {
        t.emplace_back(i, i + 1, off[static_cast<std::size_t>(i)]);
        t.emplace_back(i + 1, i, off[static_cast<std::size_t>(i)]);
    }
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return OperatorMatrix(SpaceDescriptor::ladder(n), std::move(m));
}

} // namespace detail

// Harmonic part of the resonant SC problem: {|phi_0>, |Psi_1>, ..., |Psi_{rungs-1}>}
// with |Psi_n> = (|g,n;g,n> - |e,n-1;e,n-1>)/sqrt2, in the interaction picture
// of the JC Hamiltonians. Needs n_max >= rungs - 1 for the mapping.
inline LadderModel build_sc_ladder(const ModelSpec& spec, Index rungs) {
    if (rungs < 2) throw ConfigError("sc_ladder needs at least 2 rungs");
    if (spec.omega1 != spec.omega_q1 || spec.omega2 != spec.omega_q2)
        throw ConfigError("sc_ladder tier requires resonant subsystems (omega = omega_q)");
    if (spec.g1 != spec.g2) throw ConfigError("sc_ladder tier requires equal couplings g1 = g2");
    const double a0 = spec.drive_strengths().alpha0;

    LadderModel m;
    std::vector<double> off;
    m.labels.push_back("phi0");
    for (Index n = 1; n < rungs; ++n) {
        m.labels.push_back("Psi" + std::to_string(n));
        off.push_back(n == 1 ? a0 / (2.0 * std::sqrt(2.0)) : 0.0);
    }
    for (Index n = 1; n + 1 < rungs; ++n) off[static_cast<std::size_t>(n)] = 0.5 * a0 * (2.0 * n + 1.0) / 2.0;
    m.hamiltonian = detail::tridiagonal(off);

    const Index nm = rungs - 1;
    m.product_space = SpaceDescriptor::two_pairs(nm, nm);
    const auto& ps = m.product_space;
    std::vector<Triplet> t;
    t.emplace_back(ps.flat({0, 0, 0, 0}), 0, 1.0);
    const double r = 1.0 / std::sqrt(2.0);
    for (Index n = 1; n < rungs; ++n) {
        t.emplace_back(ps.flat({0, n, 0, n}), n, r);
        t.emplace_back(ps.flat({1, n - 1, 1, n - 1}), n, -r);
    }
    m.mapping = SparseMatrix(ps.dim(), rungs);
    m.mapping.setFromTriplets(t.begin(), t.end());
    return m;
}

// Polariton XY model on span{|phi_0>, |phi_1>}^{x2}.
struct UscXyModel {
    LadderModel model;
    double lambda{0.0};
    double max_validity_ratio{0.0};
    std::vector<std::string> warnings;
};

inline UscXyModel build_usc_xy(const ModelSpec& spec, const EigenSystem& e1, const EigenSystem& e2) {
    if (e1.size() < 2 || e2.size() < 2) throw std::invalid_argument("build_usc_xy: need at least two levels");
    const double a0 = spec.drive_strengths().alpha0;
    const double wd = resolved_drive_frequency(spec);
    const double resonance = e1.gap(1, 0) + e2.gap(1, 0);
    UscXyModel out;
    if (std::abs(wd - resonance) > 1e-9 * resonance)
        out.warnings.push_back("drive frequency " + std::to_string(wd) + " is detuned from the polariton sum " +
                               std::to_string(resonance));
    out.lambda = a0 * std::real(e1.x_elements(0, 1)) * std::real(e2.x_elements(0, 1));

    // validity of dropping every other drive term that acts on the kept polariton-qubit subspace
    const Index k1 = std::min<Index>(e1.size(), spec.k_dressed);
    const Index k2 = std::min<Index>(e2.size(), spec.k_dressed);
    for (Index k = 0; k < k1; ++k)
        for (Index l = 0; l < 2; ++l) {
            if (k == l || std::abs(e1.x_elements(k, l)) < 1e-12) continue;
            for (Index h = 0; h < k2; ++h)
                for (Index v = 0; v < 2; ++v) {
                    if (h == v || std::abs(e2.x_elements(h, v)) < 1e-12) continue;
                    const double coupling = a0 * std::abs(e1.x_elements(k, l) * e2.x_elements(h, v));
                    const double delta = e1.gap(k, l) + e2.gap(h, v);
                    const bool kept_pair = (k == 0 && l == 1 && h == 0 && v == 1) || (k == 1 && l == 0 && h == 1 && v == 0);
                    for (double s : {+1.0, -1.0}) {
                        const double det = std::abs(wd + s * delta);
                        if (kept_pair && det < 1e-9 * wd) continue;
                        const double ratio = det > 0 ? coupling / det : std::numeric_limits<double>::infinity();
                        out.max_validity_ratio = std::max(out.max_validity_ratio, ratio);
                    }
                }
        }
    if (out.max_validity_ratio > 0.1)
        out.warnings.push_back("RWA validity ratio " + std::to_string(out.max_validity_ratio) + " exceeds 0.1");

    auto& m = out.model;
    m.labels = {"00", "01", "10", "11"};
    DenseMatrix h = DenseMatrix::Zero(4, 4);
    h(0, 3) = out.lambda / 2.0;
    h(3, 0) = out.lambda / 2.0;
    m.hamiltonian = OperatorMatrix(SpaceDescriptor::dressed_pair(2, 2), h);
    m.product_space = SpaceDescriptor::dressed_pair(2, 2);
    m.mapping = SparseMatrix(4, 4);
    m.mapping.setIdentity();
    return out;
}

// ----------------------------------------------------------------------------
// Displaced-oscillator (adiabatic) approximation
// ----------------------------------------------------------------------------

// L_n(x) by the three-term upward recurrence.
inline double laguerre(Index n, double x) {
    if (n < 0) throw std::invalid_argument("laguerre: negative order");
    double lm1 = 1.0;
    if (n == 0) return lm1;
    double l = 1.0 - x;
    for (Index k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 - x) * l - static_cast<double>(k) * lm1) / (k + 1.0);
        lm1 = l;
        l = next;
    }
    return l;
}

// |Lambda_{-,N}> = (|+>|N_+> + |->|N_->)/sqrt2 at E_N - Omega_N and
// |Lambda_{+,N}> = (|+>|N_+> - |->|N_->)/sqrt2 at E_N + Omega_N, where
// |N_+-> = D(-+beta)|N> and |+-> = (|g> +- |e>)/sqrt2 are sigma_x eigenstates.
struct DisplacedOscillatorApprox {
    double beta{0.0};
    double omega{1.0};
    double omega_q{1.0};
    RealVector E;
    RealVector Omega;
    SpaceDescriptor space;
    DenseMatrix lambda_minus; // column N
    DenseMatrix lambda_plus;

    Index levels() const { return E.size(); }
    double energy(int theta, Index N) const { return theta < 0 ? E(N) - Omega(N) : E(N) + Omega(N); }

    // Basis ordered j = 2N + (theta == + ? 1 : 0).
    LocalBasis basis() const {
        LocalBasis b{space, RealVector(2 * levels()), DenseMatrix(space.dim(), 2 * levels())};
        for (Index N = 0; N < levels(); ++N) {
            b.energies(2 * N) = energy(-1, N);
            b.energies(2 * N + 1) = energy(+1, N);
            b.states.col(2 * N) = lambda_minus.col(N);
            b.states.col(2 * N + 1) = lambda_plus.col(N);
        }
        return b;
    }
};

inline DisplacedOscillatorApprox displaced_oscillator(const ModelSpec& spec, int sub, Index levels) {
    if (sub != 1 && sub != 2) throw std::invalid_argument("subsystem must be 1 or 2");
    if (levels < 1) throw std::invalid_argument("displaced_oscillator: need at least one level");
    DisplacedOscillatorApprox d;
    d.omega = spec.omega(sub);
    d.omega_q = spec.omega_q(sub);
    d.beta = spec.g(sub) / d.omega;
    d.E.resize(levels);
    d.Omega.resize(levels);
    const double b2 = d.beta * d.beta;
    for (Index N = 0; N < levels; ++N) {
        d.E(N) = d.omega * (static_cast<double>(N) - b2);
        d.Omega(N) = 0.5 * d.omega_q * std::exp(-2.0 * b2) * laguerre(N, 4.0 * b2);
    }

    const Index nm = spec.n_max;
    if (levels > nm + 1) throw ConfigError("displaced_oscillator: more levels than Fock states");
    d.space = SpaceDescriptor::qubit_mode(nm);
    const Eigen::MatrixXd a = DenseMatrix(annihilation(nm).dense()).real();
    const Eigen::MatrixXd gen = d.beta * (a.transpose() - a);
    const Eigen::MatrixXd d_plus = (-gen).exp(); // D(-beta)
    const Eigen::MatrixXd d_minus = gen.exp();   // D(+beta)
    const Index m = nm + 1;
    const double r = 1.0 / std::sqrt(2.0);
    d.lambda_minus = DenseMatrix::Zero(2 * m, levels);
    d.lambda_plus = DenseMatrix::Zero(2 * m, levels);
    for (Index N = 0; N < levels; ++N) {
        // |+>|N_+> and |->|N_->, qubit order (g, e)
        Vector plus_part = Vector::Zero(2 * m), minus_part = Vector::Zero(2 * m);
        for (Index n = 0; n < m; ++n) {
            plus_part(n) = r * d_plus(n, N);
            plus_part(m + n) = r * d_plus(n, N);
            minus_part(n) = r * d_minus(n, N);
            minus_part(m + n) = -r * d_minus(n, N);
        }
        d.lambda_minus.col(N) = r * (plus_part + minus_part);
        d.lambda_plus.col(N) = r * (plus_part - minus_part);
    }
    detail::check_top_levels(d.lambda_minus, levels, m, 1e-8, "displaced_oscillator");
    detail::check_top_levels(d.lambda_plus, levels, m, 1e-8, "displaced_oscillator");
    return d;
}

// Rung N <-> |Lambda_{-,N}>^1 |Lambda_{+,N}>^2, coupling (alpha0/2)(N+1) between N and N+1.
inline LadderModel build_dsc_effective(const ModelSpec& spec, const DisplacedOscillatorApprox& a1,
                                       const DisplacedOscillatorApprox& a2, Index rungs) {
    if (spec.omega1 == spec.omega2) throw ConfigError("dsc_effective tier requires nondegenerate resonators");
    if (std::abs(resolved_drive_frequency(spec) - (spec.omega1 + spec.omega2)) > 1e-12)
        throw ConfigError("dsc_effective tier requires omega_d = omega1 + omega2");
    if (rungs < 2 || rungs > a1.levels() || rungs > a2.levels())
        throw ConfigError("dsc_effective: rung count must be in [2, displaced levels]");
    const double a0 = spec.drive_strengths().alpha0;
    LadderModel m;
    std::vector<double> off;
    for (Index N = 0; N < rungs; ++N) {
        m.labels.push_back("N" + std::to_string(N));
        if (N + 1 < rungs) off.push_back(0.5 * a0 * (N + 1.0));
    }
    m.hamiltonian = detail::tridiagonal(off);
    const Index k1 = 2 * a1.levels(), k2 = 2 * a2.levels();
    m.product_space = SpaceDescriptor::dressed_pair(k1, k2);
    std::vector<Triplet> t;
    for (Index N = 0; N < rungs; ++N) t.emplace_back((2 * N) * k2 + (2 * N + 1), N, 1.0);
    m.mapping = SparseMatrix(k1 * k2, rungs);
    m.mapping.setFromTriplets(t.begin(), t.end());
    return m;
}

struct AdiabaticLevelError {
    Index N;
    int theta;
    Index matched;
    double energy_error;
    double overlap_error;
};

// Each approximate state is matched to the exact eigenstate of largest overlap.
inline std::vector<AdiabaticLevelError> validate_adiabatic_approx(const DisplacedOscillatorApprox& approx,
                                                                  const EigenSystem& exact) {
    require_same_space(approx.space, exact.space, "validate_adiabatic_approx");
    std::vector<AdiabaticLevelError> out;
    for (Index N = 0; N < approx.levels(); ++N)
        for (int theta : {-1, +1}) {
            const Vector v = theta < 0 ? Vector(approx.lambda_minus.col(N)) : Vector(approx.lambda_plus.col(N));
            const Eigen::VectorXd ov = (exact.states.adjoint() * v).cwiseAbs2();
            Index best = 0;
            const double w = ov.maxCoeff(&best);
            out.push_back({N, theta, best, std::abs(approx.energy(theta, N) - exact.energies(best)), 1.0 - w});
        }
    return out;
}

// ----------------------------------------------------------------------------
// Spectrum export
// ----------------------------------------------------------------------------

struct SpectrumRow {
    double g_over_omega;
    Index level;
    double energy;
    int parity;
};

// Lowest `levels` Rabi energies of subsystem 1 over a coupling grid. n_max is
// doubled until the requested levels are converged.
inline std::vector<SpectrumRow> rabi_spectrum(ModelSpec spec, const std::vector<double>& g_over_omega, Index levels,
                                              Index max_n_max = 1024) {
    std::vector<SpectrumRow> rows;
    spec.k_dressed = levels;
    for (double x : g_over_omega) {
        spec.g1 = x * spec.omega1;
        for (;;) {
            try {
                const EigenSystem e = diagonalize_rabi(spec, 1);
                for (Index k = 0; k < levels; ++k) rows.push_back({x, k, e.energies(k), e.parities[static_cast<std::size_t>(k)]});
                break;
            } catch (const TruncationError&) {
                if (2 * spec.n_max > max_n_max) throw;
                spec.n_max *= 2;
            }
        }
    }
    return rows;
}

} // namespace dce
