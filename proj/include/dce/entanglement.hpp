// entanglement.hpp — Concurrence, von Neumann entropy and closed-form reference curves

#pragma once

#include "dce/eigensystem.hpp"
#include "dce/errors.hpp"
#include "dce/hilbert.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace dce {

using Matrix4 = Eigen::Matrix4cd;

// Two-qubit state with the convention it was extracted in. `leakage` is the
// weight outside the qubit subspace before renormalization.
struct TwoQubitDensity {
    enum class Convention { bare, polariton } convention{Convention::bare};
    Matrix4 rho{Matrix4::Zero()};
    double leakage{0.0};
};

namespace detail {

inline void require_density(const DenseMatrix& rho, double tol, const char* where) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument(std::string(where) + ": matrix not square");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument(std::string(where) + ": matrix not Hermitian");
    if (std::abs(rho.trace() - cplx(1.0)) > tol) throw std::invalid_argument(std::string(where) + ": trace differs from 1");
}

inline RealVector clipped_eigenvalues(const DenseMatrix& rho, double clip) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho, Eigen::EigenvaluesOnly);
    RealVector p = es.eigenvalues();
    for (Index i = 0; i < p.size(); ++i)
        if (p(i) < 0.0 && p(i) >= -clip) p(i) = 0.0;
    return p;
}

} // namespace detail

// Wootters concurrence. The square roots of the eigenvalues of
// rho (sy x sy) rho* (sy x sy) are obtained as the singular spectrum of the
// Hermitian sqrt(rho) rho~ sqrt(rho).
inline double concurrence(const Matrix4& rho_in, double tol = 1e-6) {
    detail::require_density(rho_in, tol, "concurrence");
    Matrix4 rho = 0.5 * (rho_in + rho_in.adjoint());
    rho /= rho.trace().real();

    Eigen::SelfAdjointEigenSolver<Matrix4> es(rho);
    Eigen::Vector4d ev = es.eigenvalues();
    if (ev.minCoeff() < -tol) throw std::invalid_argument("concurrence: negative eigenvalue");
    const Eigen::Vector4d sq = ev.cwiseMax(0.0).cwiseSqrt();
    const Matrix4 root = es.eigenvectors() * sq.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();

    Matrix4 yy = Matrix4::Zero();
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    const Matrix4 tilde = yy * rho.conjugate() * yy;
    Matrix4 r = root * tilde * root;
    r = 0.5 * (r + r.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix4> rs(r, Eigen::EigenvaluesOnly);
    Eigen::Vector4d lam = rs.eigenvalues();
    for (int i = 0; i < 4; ++i) lam(i) = lam(i) < 0.0 ? 0.0 : std::sqrt(lam(i)); // eigenvalues may dip to -1e-16
    std::sort(lam.data(), lam.data() + 4, std::greater<>());
    return std::clamp(lam(0) - lam(1) - lam(2) - lam(3), 0.0, 1.0);
}

inline double concurrence(const TwoQubitDensity& d) { return concurrence(d.rho); }

// Restriction to span{|phi_0>, |phi_1>}^{x2}. The state lives either on the
// two-pair Fock space (projected through the eigenvectors) or already on a
// dressed product space with the eigenbasis ordering.
inline TwoQubitDensity polariton_qubit_extract(const QuantumState& state, const EigenSystem& e1, const EigenSystem& e2) {
    if (e1.size() < 2 || e2.size() < 2) throw std::invalid_argument("polariton_qubit_extract: need two levels");
    const auto& sp = state.space();
    DenseMatrix v; // columns: |00>, |01>, |10>, |11> in sp
    if (sp.size() == 4) {
        if (!(sp.slice(0, 2) == e1.space) || !(sp.slice(2, 2) == e2.space))
            throw std::invalid_argument("polariton_qubit_extract: eigensystem spaces do not match the state");
        const Index d2 = e2.space.dim();
        v = DenseMatrix::Zero(sp.dim(), 4);
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l)
                for (Index i = 0; i < e1.space.dim(); ++i) v.col(2 * k + l).segment(i * d2, d2) = e1.states(i, k) * e2.states.col(l);
    } else if (sp.size() == 2 && sp.factor(0).kind == FactorKind::dressed) {
        v = DenseMatrix::Zero(sp.dim(), 4);
        const Index k2 = sp.factor(1).dim;
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) v(k * k2 + l, 2 * k + l) = 1.0;
    } else {
        throw std::invalid_argument("polariton_qubit_extract: unsupported space " + sp.describe());
    }
    Matrix4 p;
    if (state.is_pure()) {
        const Vector c = v.adjoint() * state.vector();
        p = c * c.adjoint();
    } else {
        p = v.adjoint() * state.density() * v;
    }
    TwoQubitDensity out;
    out.convention = TwoQubitDensity::Convention::polariton;
    const double w = p.trace().real();
    out.leakage = std::max(0.0, 1.0 - w);
    if (out.leakage > 0.5)
        throw NumericalError("polariton_qubit_extract: leakage " + std::to_string(out.leakage) +
                             " exceeds 0.5, the polariton-qubit picture does not apply");
    out.rho = p / w;
    return out;
}

inline double von_neumann_entropy(const DenseMatrix& rho) {
    detail::require_density(rho, 1e-6, "von_neumann_entropy");
    const RealVector p = detail::clipped_eigenvalues(0.5 * (rho + rho.adjoint()), 1e-10);
    double s = 0.0;
    for (Index i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) s -= p(i) * std::log(p(i));
    return std::max(0.0, s);
}

inline double von_neumann_entropy(const QuantumState& state) {
    if (state.is_pure()) return 0.0;
    return von_neumann_entropy(state.density());
}

// One-mode marginal entropy of a two-mode squeezed state (nats).
inline double tmss_entropy_closed(double xi) {
    const double c2 = std::cosh(xi) * std::cosh(xi);
    const double s2 = std::sinh(xi) * std::sinh(xi);
    return c2 * std::log(c2) - (s2 > 0.0 ? s2 * std::log(s2) : 0.0);
}

inline double tmss_entropy(double xi) {
    xi = std::abs(xi);
    if (xi == 0.0) return 0.0;
    const double t2 = std::tanh(xi) * std::tanh(xi);
    if (xi > 3.0) return tmss_entropy_closed(xi); // series needs ~1e4+ terms beyond here
    const double c2 = std::cosh(xi) * std::cosh(xi);
    double s = 0.0, w = 1.0 / c2;
    for (int n = 0; n < 1000000 && w > 0.0; ++n) {
        const double term = -w * std::log(w);
        s += term;
        if (term < 1e-15 * s) break;
        w *= t2;
    }
    const double closed = tmss_entropy_closed(xi);
    if (std::abs(s - closed) > 1e-9 * std::max(1.0, closed))
        throw NumericalError("tmss_entropy: series and closed form disagree");
    return s;
}

inline double usc_concurrence_ideal(double lambda, double t) { return std::abs(std::sin(lambda * t)); }

// Closed form for the damped XY pair up to t_so, then decay at 2*Gamma
// anchored at the switch-off value.
inline double usc_concurrence_dissipative(double lambda, double gamma, double t, double t_so) {
    if (!(lambda > 0.0) || !(gamma >= 0.0)) throw std::invalid_argument("usc_concurrence_dissipative: need lambda > 0, Gamma >= 0");
    auto during = [&](double s) {
        const double e = std::exp(-gamma * s);
        const double u = gamma + e * (lambda * std::sin(lambda * s) - gamma * std::cos(lambda * s));
        const double p = e * (lambda * std::sinh(gamma * s) - gamma * std::sin(lambda * s));
        return lambda / (gamma * gamma + lambda * lambda) * std::max(0.0, std::abs(u) - p);
    };
    if (t <= t_so) return during(t);
    return during(t_so) * std::exp(-2.0 * gamma * (t - t_so));
}

} // namespace dce
