// test_hilbert.cpp — Spaces, elementary operators, embeddings and partial traces

#include "dce/hilbert.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace dce;

TEST(SpaceDescriptor, DimensionsAndDigits) {
    const auto s = SpaceDescriptor::two_pairs(3, 5);
    EXPECT_EQ(s.dim(), 2 * 4 * 2 * 6);
    EXPECT_EQ(s.size(), 4u);
    for (Index f = 0; f < s.dim(); ++f) EXPECT_EQ(s.flat(s.digits(f)), f);
    EXPECT_EQ(s.digits(s.flat({1, 2, 0, 5})), (std::vector<Index>{1, 2, 0, 5}));
    EXPECT_EQ(s.stride(1), 2 * 6);
    EXPECT_EQ(s.slice(2, 2), SpaceDescriptor::qubit_mode(5));
}

TEST(SpaceDescriptor, RejectsInvalidFactors) {
    EXPECT_THROW(SpaceDescriptor({{FactorKind::qubit, 3}}), std::invalid_argument);
    EXPECT_THROW(SpaceDescriptor::mode(0), std::invalid_argument);
    EXPECT_THROW(SpaceDescriptor(std::vector<Factor>{}), std::invalid_argument);
}

TEST(Operators, CanonicalCommutatorExceptTruncationEdge) {
    const Index n = 7;
    const DenseMatrix c = commutator(annihilation(n), creation(n)).dense();
    for (Index k = 0; k < n; ++k) EXPECT_NEAR(std::abs(c(k, k) - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(c(n, n).real(), -static_cast<double>(n), 1e-12);
    EXPECT_NEAR((c - DenseMatrix(c.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    EXPECT_NEAR((number(n).dense() - (creation(n) * annihilation(n)).dense()).cwiseAbs().maxCoeff(), 0.0, 1e-14);
}

TEST(Operators, PauliConventions) {
    const auto sp = pauli(Pauli::plus), sm = pauli(Pauli::minus), sz = pauli(Pauli::z);
    EXPECT_NEAR((commutator(sp, sm).dense() - sz.dense()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    EXPECT_EQ(sz(0, 0), cplx(-1.0)); // |g> is the sigma_z = -1 state
    EXPECT_EQ(sp(1, 0), cplx(1.0)); // sigma_+ |g> = |e>
    const DenseMatrix y = pauli(Pauli::y).dense();
    const DenseMatrix x = pauli(Pauli::x).dense();
    EXPECT_NEAR(((x * y) - I * sz.dense()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Operators, KronMatchesOracle) {
    oracle::Random rng(3);
    const DenseMatrix a = rng.ginibre(2, 2), b = rng.ginibre(4, 4);
    const auto k = kron(OperatorMatrix(SpaceDescriptor::qubit(), a), OperatorMatrix(SpaceDescriptor::mode(3), b));
    EXPECT_EQ(k.space(), SpaceDescriptor::qubit_mode(3));
    EXPECT_NEAR((k.dense() - oracle::kron(a, b)).cwiseAbs().maxCoeff(), 0.0, 1e-14);
}

TEST(Operators, EmbedPlacesOperatorOnFactor) {
    const auto space = SpaceDescriptor::two_pairs(2, 3);
    const auto e = embed(annihilation(3), 3, space);
    const auto ref = oracle::kron(oracle::eye(2 * 3 * 2), oracle::annihilation(3));
    EXPECT_NEAR((e.dense() - ref).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    const auto pair = embed(parity_operator(SpaceDescriptor::qubit_mode(2)), 0, space);
    const auto ref2 = oracle::kron(parity_operator(SpaceDescriptor::qubit_mode(2)).dense(), oracle::eye(2 * 4));
    EXPECT_NEAR((pair.dense() - ref2).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    EXPECT_THROW(embed(annihilation(2), 3, space), std::invalid_argument);
    EXPECT_THROW(embed(annihilation(3), 4, space), std::out_of_range);
}

TEST(Operators, ParityCommutesWithRabiHamiltonian) {
    for (double g : {0.0, 0.15, 0.8, 1.5}) {
        const int n = 20;
        const OperatorMatrix h(SpaceDescriptor::qubit_mode(n), oracle::rabi(1.0, 0.7, g, n));
        const auto pi = parity_operator(SpaceDescriptor::qubit_mode(n));
        EXPECT_LE(commutator(pi, h).max_abs(), 1e-12);
        EXPECT_TRUE((pi * pi).dense().isIdentity(1e-14));
    }
}

TEST(Operators, SparseAndDenseStorageAgree) {
    const Index n = 200; // 402-dimensional pair: sparse storage
    const auto space = SpaceDescriptor::qubit_mode(n);
    const auto a = embed(annihilation(n), 1, space);
    EXPECT_TRUE(a.is_sparse());
    const auto small = embed(annihilation(4), 1, SpaceDescriptor::qubit_mode(4));
    EXPECT_FALSE(small.is_sparse());
    EXPECT_LE((a.adjoint() * a - embed(number(n), 1, space)).max_abs(), 1e-12);
}

TEST(QuantumState, ValidationErrors) {
    const auto q = SpaceDescriptor::qubit();
    EXPECT_THROW(QuantumState::pure(q, Vector::Ones(2)), std::invalid_argument);
    EXPECT_THROW(QuantumState::pure(q, Vector::Ones(3) / std::sqrt(3.0)), std::invalid_argument);
    DenseMatrix bad = DenseMatrix::Zero(2, 2);
    bad(0, 0) = 1.5;
    bad(1, 1) = -0.5;
    EXPECT_THROW(QuantumState::mixed(q, bad), std::invalid_argument);
    DenseMatrix nh = DenseMatrix::Identity(2, 2) / 2.0;
    nh(0, 1) = 0.3;
    EXPECT_THROW(QuantumState::mixed(q, nh), std::invalid_argument);
}

TEST(PartialTrace, BellMarginalIsMaximallyMixed) {
    const auto space = SpaceDescriptor::qubit().concat(SpaceDescriptor::qubit());
    Vector bell = Vector::Zero(4);
    bell(3) = 1.0 / std::sqrt(2.0); // |ee>
    bell(0) = I / std::sqrt(2.0);   // i|gg>
    const auto psi = QuantumState::pure(space, bell);
    for (std::size_t keep : {0u, 1u}) {
        const auto r = partial_trace(psi, {keep});
        EXPECT_NEAR((r.density() - DenseMatrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    }
}

TEST(PartialTrace, ProductStateAndMixedPathAgree) {
    oracle::Random rng(11);
    const auto sa = SpaceDescriptor::qubit_mode(2), sb = SpaceDescriptor::qubit_mode(1);
    const Vector a = rng.state(sa.dim()), b = rng.state(sb.dim());
    const auto prod = QuantumState::pure(sa, a).tensor(QuantumState::pure(sb, b));
    const auto ra = partial_trace(prod, {0, 1});
    EXPECT_NEAR((ra.density() - a * a.adjoint()).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    const auto rb = partial_trace(prod, {2, 3});
    EXPECT_NEAR((rb.density() - b * b.adjoint()).cwiseAbs().maxCoeff(), 0.0, 1e-14);

    const Vector psi = rng.state(sa.dim() * sb.dim());
    const auto space = sa.concat(sb);
    const auto pure = partial_trace(QuantumState::pure(space, psi), {0, 2});
    const auto mixed = partial_trace(QuantumState::mixed(space, psi * psi.adjoint()), {0, 2});
    EXPECT_NEAR((pure.density() - mixed.density()).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    // Qubit-qubit reduction of (qubit, mode, qubit, mode) by explicit summation.
    DenseMatrix ref = DenseMatrix::Zero(4, 4);
    for (Index f = 0; f < space.dim(); ++f)
        for (Index h = 0; h < space.dim(); ++h) {
            const auto df = space.digits(f), dh = space.digits(h);
            if (df[1] != dh[1] || df[3] != dh[3]) continue;
            ref(df[0] * 2 + df[2], dh[0] * 2 + dh[2]) += psi(f) * std::conj(psi(h));
        }
    EXPECT_NEAR((pure.density() - ref).cwiseAbs().maxCoeff(), 0.0, 1e-14);
}
