// test_models.cpp — Parameter rules, envelopes, Hamiltonian builders and dissipators

#include "dce/models.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace dce;

namespace {

ModelSpec sc_spec(Index n_max = 4) {
    ModelSpec s;
    s.omega1 = s.omega_q1 = 1.0;
    s.omega2 = s.omega_q2 = 1.25;
    s.g1 = s.g2 = 0.04;
    s.alpha0 = 0.004;
    s.n_max = n_max;
    s.tier = Tier::rwa_drive;
    return s;
}

} // namespace

TEST(DriveStrengths, ResolutionRules) {
    ModelSpec s;
    s.alpha0 = 0.02;
    auto d = s.drive_strengths();
    EXPECT_DOUBLE_EQ(d.alpha1, 0.01);
    EXPECT_DOUBLE_EQ(d.alpha2, 0.01);
    EXPECT_NEAR(d.alpha0, 2.0 * std::sqrt(d.alpha1 * d.alpha2), 1e-15);

    ModelSpec t;
    t.alpha1 = 0.04;
    t.alpha2 = 0.01;
    EXPECT_NEAR(t.drive_strengths().alpha0, 0.04, 1e-15);

    ModelSpec u;
    u.alpha0 = 0.1;
    u.alpha1 = 0.1;
    u.alpha2 = 0.1;
    EXPECT_THROW(u.drive_strengths(), ConfigError);

    ModelSpec v;
    v.alpha1 = 0.1;
    EXPECT_THROW(v.drive_strengths(), ConfigError);

    ModelSpec w;
    w.alpha0 = 0.02;
    w.alpha1 = 0.04;
    EXPECT_NEAR(w.drive_strengths().alpha2, 0.0025, 1e-15);
}

TEST(ModelSpec, ValidationRejectsBadValues) {
    ModelSpec s = sc_spec();
    s.omega1 = -1.0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = sc_spec();
    s.noise.kappa1 = -1e-3;
    EXPECT_THROW(s.validate(), ConfigError);
    s = sc_spec();
    s.n_max = 0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = sc_spec();
    s.drive_policy = DrivePolicy::fixed;
    s.omega_d = 0.0;
    EXPECT_THROW(s.validate(), ConfigError);
    EXPECT_NO_THROW(sc_spec().validate());
}

TEST(Envelope, CosineAndGating) {
    const auto e = Envelope::cosine(2.0, 1.3, 5.0);
    for (double t : {0.0, 0.7, 4.99, 5.0}) EXPECT_NEAR(std::abs(e(t) - 2.0 * std::cos(1.3 * t)), 0.0, 1e-14);
    EXPECT_EQ(e(5.01), cplx(0.0));
    EXPECT_NEAR(std::abs(e.ungated(6.0) - 2.0 * std::cos(7.8)), 0.0, 1e-14);
    const auto p = Envelope::phase(0.5, 2.0, std::numeric_limits<double>::infinity());
    EXPECT_NEAR(std::abs(p(1.0) - 0.5 * std::exp(-2.0 * I)), 0.0, 1e-15);
}

TEST(Builders, RabiAndJcMatchOracle) {
    ModelSpec s;
    s.omega1 = 1.1;
    s.omega_q1 = 0.9;
    s.g1 = 0.3;
    s.n_max = 9;
    EXPECT_NEAR((build_rabi(s, 1).dense() - oracle::rabi(1.1, 0.9, 0.3, 9)).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    EXPECT_NEAR((build_jc(s, 1).dense() - oracle::jc(1.1, 0.9, 0.3, 9)).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    EXPECT_THROW(build_rabi(s, 3), std::invalid_argument);
}

TEST(Builders, FullGeneratorMatchesExplicitSum) {
    ModelSpec s = sc_spec(3);
    s.tier = Tier::full;
    s.g1 = 0.2;
    s.g2 = 0.3;
    s.alpha1 = 0.01;
    s.alpha2 = 0.04;
    s.alpha0.reset();
    s.t_switch_off = 10.0;
    const auto gen = build_full(s);
    const int n = 3;
    const oracle::Mat x = oracle::annihilation(n) + oracle::annihilation(n).adjoint();
    const auto q = oracle::eye(2);
    const auto x1 = oracle::kron(oracle::kron(q, x), oracle::eye(2 * (n + 1)));
    const auto x2 = oracle::kron(oracle::eye(2 * (n + 1)), oracle::kron(q, x));
    const oracle::Mat h0 = oracle::kron(oracle::rabi(1.0, 1.0, 0.2, n), oracle::eye(8)) + oracle::kron(oracle::eye(8), oracle::rabi(1.25, 1.25, 0.3, n));
    for (double t : {0.0, 1.7, 9.9, 10.5}) {
        const double c = t <= 10.0 ? std::cos(2.25 * t) : 0.0;
        const oracle::Mat ref = h0 + c * (0.01 * x1 * x1 + 0.04 * x2 * x2 + 0.04 * x1 * x2);
        EXPECT_NEAR((gen.at(t).dense() - ref).cwiseAbs().maxCoeff(), 0.0, 1e-13) << "t = " << t;
    }
    EXPECT_DOUBLE_EQ(gen.switch_off(), 10.0);
}

TEST(Builders, ScRwaGeneratorHermitianAndExcitationStructure) {
    const auto s = sc_spec(4);
    const auto gen = build_sc_rwa(s);
    for (double t : {0.0, 0.3, 12.0}) EXPECT_LE(gen.at(t).hermiticity_residual(), 1e-14);
    // the static part conserves each subsystem's excitation number a^dagger a + sigma_+ sigma_-
    const auto space = gen.space();
    const auto pair = SpaceDescriptor::qubit_mode(4);
    const auto nexc = embed(number(4), 1, pair) + embed(pauli(Pauli::plus) * pauli(Pauli::minus), 0, pair);
    EXPECT_LE(commutator(gen.static_part, on_subsystem(nexc, 1, space)).max_abs(), 1e-13);
    auto deg = s;
    deg.omega2 = deg.omega_q2 = 1.0;
    EXPECT_THROW(build_sc_rwa(deg), ConfigError);
}

TEST(Builders, DriveFrequencyPolicies) {
    ModelSpec s = sc_spec(30);
    EXPECT_DOUBLE_EQ(resolved_drive_frequency(s), 2.25);
    s.drive_policy = DrivePolicy::fixed;
    s.omega_d = 1.9;
    EXPECT_DOUBLE_EQ(resolved_drive_frequency(s), 1.9);
    s.drive_policy = DrivePolicy::dressed_gap_sum;
    s.g1 = s.g2 = 0.0;
    EXPECT_NEAR(resolved_drive_frequency(s), 1.0 + 1.25, 1e-12);
}

TEST(Dissipators, BareChannels) {
    auto s = sc_spec(3);
    s.noise.kappa1 = 1e-3;
    s.noise.gamma2 = 2e-3;
    s.noise.gamma_phi1 = 3e-3;
    const auto d = lindblad_dissipators(s, DissipatorBasis::bare());
    ASSERT_EQ(d.size(), 6u);
    EXPECT_EQ(d[0].label, "a1");
    EXPECT_DOUBLE_EQ(d[0].rate, 1e-3);
    EXPECT_DOUBLE_EQ(d[2].rate, 3e-3);
    EXPECT_DOUBLE_EQ(d[4].rate, 2e-3);
    const auto space = two_pair_space(s);
    EXPECT_LE((d[0].jump - embed(annihilation(3), 1, space)).max_abs(), 0.0);
    s.tier = Tier::full;
    EXPECT_THROW(lindblad_dissipators(s, DissipatorBasis::bare()), ConfigError);
}

TEST(Dissipators, DressedRatesFromMatrixElements) {
    ModelSpec s;
    s.omega1 = s.omega_q1 = s.omega2 = s.omega_q2 = 1.0;
    s.g1 = s.g2 = 0.15;
    s.n_max = 30;
    s.noise.kappa1 = s.noise.kappa2 = 1e-4;
    s.noise.gamma1 = s.noise.gamma2 = 2e-4;
    EigenSystem e = diagonalize_pair(build_rabi(s, 1), 4);
    const auto d = lindblad_dissipators(s, DissipatorBasis::dressed(e, e));
    ASSERT_EQ(d.size(), 12u); // 6 pairs l > k per subsystem
    EXPECT_NEAR(d[0].rate, 1e-4 * std::norm(e.x_elements(0, 1)) + 2e-4 * std::norm(e.sx_elements(0, 1)), 1e-18);
    EXPECT_EQ(d[0].jump.space(), SpaceDescriptor::dressed_pair(4, 4));
    // phi_1 and phi_2 share a parity, so d[3] = (1, 2) has vanishing matrix elements
    EXPECT_EQ(e.parities[1], e.parities[2]);
    EXPECT_LE(d[3].rate, 1e-20);
    EXPECT_GT(d[1].rate, 1e-6);
}
