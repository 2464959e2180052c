// test_properties.cpp — Randomized property suites (each at least 100 cases)

#include "dce/protocol.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace dce;

namespace {

constexpr int cases = 100;

ModelSpec random_pair_spec(oracle::Random& rng, Index n_max) {
    ModelSpec s;
    s.omega1 = rng.uniform(0.5, 1.5);
    s.omega2 = s.omega1 + rng.uniform(0.1, 0.5);
    s.omega_q1 = rng.uniform(0.1, 1.5);
    s.omega_q2 = rng.uniform(0.1, 1.5);
    s.g1 = rng.uniform(0.0, 1.5);
    s.g2 = rng.uniform(0.0, 1.5);
    s.alpha1 = rng.uniform(0.0, 0.05);
    s.alpha2 = rng.uniform(0.0, 0.05);
    s.n_max = n_max;
    s.t_switch_off = rng.uniform(1.0, 20.0);
    return s;
}

double residual(const OperatorMatrix& h) { return h.hermiticity_residual() / std::max(1.0, h.max_abs()); }

// Single-pair Fock state |q, n> as a vector on (qubit, mode n_max).
oracle::Vec ket(int q, int n, int n_max) {
    oracle::Vec v = oracle::Vec::Zero(2 * (n_max + 1));
    v(q * (n_max + 1) + n) = 1.0;
    return v;
}

} // namespace

TEST(Property, GeneratorsAreHermitian) {
    oracle::Random rng(101);
    for (int i = 0; i < cases; ++i) {
        auto s = random_pair_spec(rng, rng.integer(1, 4));
        for (int sub : {1, 2}) {
            EXPECT_LE(residual(build_rabi(s, sub)), 1e-12);
            EXPECT_LE(residual(build_jc(s, sub)), 1e-12);
        }
        const auto full = build_full(s);
        const auto rwa = build_sc_rwa(s);
        for (int k = 0; k < 3; ++k) {
            const double t = rng.uniform(0.0, 25.0);
            EXPECT_LE(residual(full.at(t)), 1e-12) << "case " << i << " t " << t;
            EXPECT_LE(residual(rwa.at(t)), 1e-12) << "case " << i << " t " << t;
            if (t > s.t_switch_off) EXPECT_LE((full.at(t) - full.static_part).max_abs(), 0.0);
        }
        s.k_dressed = 4;
        s.n_max = 12;
        s.g1 = rng.uniform(0.0, 0.6);
        s.g2 = rng.uniform(0.0, 0.6);
        const auto e1 = local_basis(diagonalize_pair(build_rabi(s, 1), 4));
        const auto e2 = local_basis(diagonalize_pair(build_rabi(s, 2), 4));
        const auto dressed = build_dressed_generator(s, e1, e2, true);
        EXPECT_LE(residual(dressed.at(rng.uniform(0.0, 1.0))), 1e-12);
    }
}

TEST(Property, ParitySelectionRule) {
    oracle::Random rng(202);
    for (int i = 0; i < cases; ++i) {
        ModelSpec s;
        s.omega1 = rng.uniform(0.5, 1.5);
        s.omega_q1 = rng.uniform(0.05, 1.5);
        s.g1 = rng.uniform(0.0, 1.0);
        s.n_max = 50;
        s.k_dressed = 6;
        const auto e = diagonalize_rabi(s, 1).truncated(s.k_dressed);
        for (Index k = 0; k < e.size(); ++k)
            for (Index l = 0; l < e.size(); ++l) {
                EXPECT_NEAR(e.gap(k, l), -e.gap(l, k), 1e-15);
                if (e.parities[static_cast<std::size_t>(k)] == e.parities[static_cast<std::size_t>(l)]) {
                    EXPECT_LE(std::abs(e.x_elements(k, l)), 1e-10) << "case " << i;
                    EXPECT_LE(std::abs(e.sx_elements(k, l)), 1e-10) << "case " << i;
                }
            }
        // dressed jump operators only connect opposite-parity levels
        s.omega2 = s.omega1;
        s.omega_q2 = s.omega_q1;
        s.g2 = s.g1;
        s.noise.kappa1 = s.noise.kappa2 = 1.0;
        s.noise.gamma1 = s.noise.gamma2 = 1.0;
        std::size_t j = 0;
        const auto diss = lindblad_dissipators(s, DissipatorBasis::dressed(e, e));
        for (int mu : {1, 2})
            for (Index lo = 0; lo < e.size(); ++lo)
                for (Index hi = lo + 1; hi < e.size(); ++hi, ++j)
                    if (e.parities[static_cast<std::size_t>(lo)] == e.parities[static_cast<std::size_t>(hi)])
                        EXPECT_LE(diss[j].rate, 1e-20) << mu;
    }
}

TEST(Property, LindbladPreservesTraceAndPositivity) {
    oracle::Random rng(303);
    for (int i = 0; i < cases; ++i) {
        ModelSpec s;
        s.tier = Tier::rwa_drive;
        s.omega1 = s.omega_q1 = 1.0;
        s.omega2 = s.omega_q2 = rng.uniform(1.1, 1.5);
        s.g1 = s.g2 = rng.uniform(0.0, 0.2);
        s.alpha0 = rng.uniform(0.0, 0.1);
        s.n_max = 2;
        s.noise = {rng.uniform(0, 0.05), rng.uniform(0, 0.05), rng.uniform(0, 0.05),
                   rng.uniform(0, 0.05), rng.uniform(0, 0.05), rng.uniform(0, 0.05), SpectrumModel::flat};
        const auto gen = build_sc_rwa(s);
        const auto space = gen.space();
        // random mixed initial state with a fixed excitation-difference structure is not required:
        // the solver handles arbitrary coherences
        const auto rho0 = QuantumState::mixed(space, rng.density(space.dim(), rng.integer(1, 3)));
        PropagationConfig cfg;
        cfg.t_max = rng.uniform(2.0, 10.0);
        cfg.dt_out = cfg.t_max / 4;
        cfg.leakage_tol = 1.0;
        Observables obs;
        obs.s1 = SubsystemView::fock(2, s.omega1);
        obs.s2 = SubsystemView::fock(2, s.omega2);
        obs.columns = {"trace", "purity", "concurrence"};
        const auto ts = evolve_lindblad(gen, lindblad_dissipators(s, DissipatorBasis::bare()), rho0, cfg, obs);
        for (std::size_t r = 0; r < ts.rows(); ++r) {
            EXPECT_NEAR(ts.column("trace")[r], 1.0, 1e-8) << "case " << i;
            EXPECT_LE(ts.column("purity")[r], 1.0 + 1e-9);
            EXPECT_GE(ts.column("concurrence")[r], 0.0);
        }
        EXPECT_GE(ts.info.at("min_eigenvalue"), -1e-6) << "case " << i;
    }
}

TEST(Property, ConcurrenceLocalUnitaryInvariance) {
    oracle::Random rng(404);
    for (int i = 0; i < cases; ++i) {
        const Matrix4 rho = rng.density(4, rng.integer(1, 4));
        const oracle::Mat u = oracle::kron(rng.unitary(2), rng.unitary(2));
        const Matrix4 rotated = u * rho * u.adjoint();
        const double c = concurrence(rho);
        // rank-deficient states: square roots of ~1e-17 eigenvalues limit the agreement to ~1e-8
        EXPECT_NEAR(concurrence(rotated), c, 1e-7) << "case " << i;
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 1.0);
    }
}

TEST(Property, PureStateMarginalEntropiesAgree) {
    oracle::Random rng(505);
    for (int i = 0; i < cases; ++i) {
        const Index na = rng.integer(1, 3), nb = rng.integer(1, 3);
        const auto space = SpaceDescriptor::qubit_mode(na).concat(SpaceDescriptor::qubit_mode(nb));
        const auto psi = QuantumState::pure(space, rng.state(space.dim()));
        const double sa = von_neumann_entropy(partial_trace(psi, {0, 1}).density());
        const double sb = von_neumann_entropy(partial_trace(psi, {2, 3}).density());
        EXPECT_NEAR(sa, sb, 1e-9) << "case " << i;
        EXPECT_LE(sa, std::log(static_cast<double>(std::min(2 * (na + 1), 2 * (nb + 1)))) + 1e-12);
        EXPECT_GE(sa, 0.0);
    }
}

TEST(Property, PolaritonLadderCoefficientsByBruteForce) {
    // Two resonant JC pairs; states built from their definitions in the bare basis.
    const int nm = 6;
    const double r = 1.0 / std::sqrt(2.0);
    auto pm = [&](int sign, int n) { return oracle::Vec(r * (ket(0, n, nm) + sign * ket(1, n - 1, nm))); };
    auto phi = [&](int sign, int n) { return oracle::kron(pm(sign, n), pm(sign, n)); };
    auto psi = [&](int n) { return oracle::Vec(r * (oracle::kron(ket(0, n, nm), ket(0, n, nm)) - oracle::kron(ket(1, n - 1, nm), ket(1, n - 1, nm)))); };
    const oracle::Vec phi0 = oracle::kron(ket(0, 0, nm), ket(0, 0, nm));
    const oracle::Mat a = oracle::kron(oracle::eye(2), oracle::annihilation(nm));
    const oracle::Mat a12 = oracle::kron(a, oracle::eye(2 * (nm + 1))) * oracle::kron(oracle::eye(2 * (nm + 1)), a);
    auto el = [&](const oracle::Vec& x, const oracle::Vec& y) { return (x.adjoint() * a12 * y)(0, 0); };

    oracle::Random rng(606);
    for (int i = 0; i < cases; ++i) {
        // eigen-equations against the library JC Hamiltonians at random resonant parameters
        ModelSpec s;
        s.omega1 = s.omega_q1 = rng.uniform(0.5, 1.5);
        s.omega2 = s.omega_q2 = rng.uniform(0.5, 1.5);
        s.g1 = s.g2 = rng.uniform(0.001, 0.2);
        s.n_max = nm;
        const oracle::Mat h = (on_subsystem(build_jc(s, 1), 1, two_pair_space(s)) + on_subsystem(build_jc(s, 2), 2, two_pair_space(s))).dense();
        const double w = s.omega1 + s.omega2;
        const int n = rng.integer(1, 4);
        for (int sign : {-1, 1}) {
            const double e = (n - 0.5) * w + sign * 2 * s.g1 * std::sqrt(static_cast<double>(n));
            EXPECT_NEAR((h * phi(sign, n) - e * phi(sign, n)).norm(), 0.0, 1e-12);
        }
        EXPECT_NEAR((h * psi(n) - (n - 0.5) * w * psi(n)).norm(), 0.0, 1e-12);
        EXPECT_NEAR((h * phi0 + 0.5 * w * phi0).norm(), 0.0, 1e-12);

        // operator coefficients of the two-mode squeezing term
        const double sp = std::pow(std::sqrt(n + 1.0) + std::sqrt(static_cast<double>(n)), 2) / 4;
        const double sm = std::pow(std::sqrt(n + 1.0) - std::sqrt(static_cast<double>(n)), 2) / 4;
        for (int s1 : {-1, 1})
            for (int s2 : {-1, 1}) EXPECT_NEAR(std::abs(el(phi(s1, n), phi(s2, n + 1))), s1 == s2 ? sp : sm, 1e-12);
        for (int s1 : {-1, 1}) {
            EXPECT_NEAR(std::abs(el(phi(s1, n), psi(n + 1))), std::sqrt(2.0) / 4, 1e-12);
            EXPECT_NEAR(std::abs(el(psi(n), phi(s1, n + 1))), std::sqrt(2.0) / 4, 1e-12);
            EXPECT_NEAR(std::abs(el(phi0, phi(s1, 1))), 0.5, 1e-12);
        }
        EXPECT_NEAR(el(psi(n), psi(n + 1)).real(), (2 * n + 1) / 2.0, 1e-12);
        EXPECT_NEAR(el(phi0, psi(1)).real(), r, 1e-12);

        // the library ladder carries exactly these harmonic-part couplings times alpha0/2
        s.alpha0 = rng.uniform(0.001, 0.02);
        const DenseMatrix lad = build_sc_ladder(s, 6).hamiltonian.dense();
        EXPECT_NEAR(lad(0, 1).real(), *s.alpha0 / 2 * el(phi0, psi(1)).real(), 1e-15);
        EXPECT_NEAR(lad(n, n + 1).real(), *s.alpha0 / 2 * el(psi(n), psi(n + 1)).real(), 1e-15);
    }
}

TEST(Property, DisplacedOscillatorLevels) {
    oracle::Random rng(707);
    const double betas[] = {0.0, 0.5, 1.5};
    for (int i = 0; i < cases; ++i) {
        const double beta = betas[i % 3];
        ModelSpec s;
        s.omega1 = rng.uniform(0.5, 2.0);
        s.omega_q1 = rng.uniform(0.05, 1.0);
        s.g1 = beta * s.omega1;
        s.n_max = 50;
        const Index levels = 6;
        const auto d = displaced_oscillator(s, 1, levels);
        EXPECT_NEAR(d.E(0), -beta * beta * s.omega1, 1e-13);
        // Omega_N = (omega_q / 2) <N| D(2 beta) |N>, overlap from a brute-force matrix exponential
        const oracle::Mat a = oracle::annihilation(60);
        const oracle::Mat disp = (2.0 * beta * (a.adjoint() - a)).exp();
        for (Index N = 0; N < levels; ++N) {
            const double overlap = disp(N, N).real();
            EXPECT_NEAR(d.Omega(N), 0.5 * s.omega_q1 * overlap, 1e-10) << "beta " << beta << " N " << N;
            EXPECT_NEAR(d.energy(+1, N) - d.energy(-1, N), 2 * d.Omega(N), 1e-14);
            EXPECT_NEAR(d.E(N) - d.E(0), N * s.omega1, 1e-12);
        }
        // the approximate states are orthonormal
        const auto b = d.basis();
        EXPECT_TRUE((b.states.adjoint() * b.states).isIdentity(1e-9)) << "beta " << beta;
    }
}

TEST(Property, TwoModeSqueezedEntropyIsMonotone) {
    oracle::Random rng(808);
    for (int i = 0; i < cases; ++i) {
        const double x = rng.uniform(0.0, 4.0), y = x + rng.uniform(1e-3, 1.0);
        EXPECT_LT(tmss_entropy(x), tmss_entropy(y));
    }
}

TEST(Property, EmbedPreservesSpectrum) {
    oracle::Random rng(909);
    for (int i = 0; i < cases; ++i) {
        const Index n = rng.integer(1, 3);
        const OperatorMatrix h(SpaceDescriptor::qubit_mode(n), rng.hermitian(2 * (n + 1)));
        const auto target = SpaceDescriptor::two_pairs(n, rng.integer(1, 2));
        const auto e = embed(h, 0, target);
        EXPECT_LE(e.hermiticity_residual(), 1e-14);
        Eigen::SelfAdjointEigenSolver<oracle::Mat> small(h.dense()), big(e.dense());
        const Index mult = target.dim() / h.dim();
        for (Index k = 0; k < big.eigenvalues().size(); ++k) EXPECT_NEAR(big.eigenvalues()(k), small.eigenvalues()(k / mult), 1e-10);
    }
}
