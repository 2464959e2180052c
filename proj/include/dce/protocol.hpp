// protocol.hpp — Tier dispatch: ground-state preparation, drive, switch-off, truncation growth

#pragma once

#include "dce/dynamics.hpp"
#include "dce/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace dce {

inline std::vector<std::string> default_columns(const ModelSpec& spec) {
    const bool noisy = !spec.noise.is_zero() || (spec.tier == Tier::usc_xy && spec.gamma_over_lambda.value_or(0.0) > 0.0);
    std::vector<std::string> c;
    switch (spec.tier) {
    case Tier::rwa_drive:
    case Tier::sc_ladder: c = {"concurrence", "fidelity_bell", "n1", "n2", "trace", "leakage"}; break;
    case Tier::full:
        if (spec.full_basis == FullBasis::fock) c = {"concurrence", "fidelity_bell", "n1", "n2", "entropy_vn", "trace", "leakage"};
        else c = {"concurrence", "fidelity_bell", "n1", "n2", "entropy_vn", "subspace_pop", "polariton_leakage", "trace", "leakage"};
        break;
    case Tier::usc_dressed:
        c = {"concurrence", "fidelity_bell", "n1", "n2", "subspace_pop", "polariton_leakage", "trace", "leakage"};
        break;
    case Tier::usc_xy: c = {"concurrence", "fidelity_bell", "trace"}; break;
    case Tier::dsc_adiabatic:
    case Tier::dsc_effective: c = {"entropy_vn", "n1", "n2", "trace", "leakage"}; break;
    }
    if (noisy) c.push_back("purity");
    return c;
}

// Interaction-picture generator on a dressed product basis: static part diag(E1 + E2),
// drive alpha0 X1 X2 (+ alpha1 X1^2 + alpha2 X2^2 when single_mode) times cos(omega_d t).
inline TimeDependentGenerator build_dressed_generator(const ModelSpec& spec, const LocalBasis& b1, const LocalBasis& b2,
                                                      bool single_mode) {
    const auto d = spec.drive_strengths();
    const double wd = resolved_drive_frequency(spec);
    const Index k1 = b1.size(), k2 = b2.size();
    const auto space = SpaceDescriptor::dressed_pair(k1, k2);
    auto local = [](const LocalBasis& b, const DenseMatrix& m) {
        DenseMatrix c = m;
        const double cut = 1e-13 * std::max(1.0, m.cwiseAbs().maxCoeff());
        for (Index j = 0; j < c.cols(); ++j)
            for (Index i = 0; i < c.rows(); ++i)
                if (std::abs(c(i, j)) < cut) c(i, j) = 0.0;
        return OperatorMatrix(SpaceDescriptor({{FactorKind::dressed, b.size()}}), c);
    };
    auto quad = [](const LocalBasis& b) {
        const Index nm = b.space.factor(1).dim - 1;
        return embed(annihilation(nm) + creation(nm), 1, b.space);
    };
    const OperatorMatrix x1 = quad(b1), x2 = quad(b2);
    const auto X1 = local(b1, b1.project(x1)), X2 = local(b2, b2.project(x2));
    const auto id1 = OperatorMatrix::identity(X1.space()), id2 = OperatorMatrix::identity(X2.space());

    Vector e(k1 * k2);
    for (Index a = 0; a < k1; ++a)
        for (Index b = 0; b < k2; ++b) e(a * k2 + b) = b1.energies(a) + b2.energies(b);
    TimeDependentGenerator gen;
    gen.static_part = OperatorMatrix::diagonal(space, e);
    const auto env = Envelope::cosine(1.0, wd, spec.t_switch_off);
    gen.drive_terms.push_back({d.alpha0 * kron(X1, X2), env});
    if (single_mode) {
        gen.drive_terms.push_back({d.alpha1 * kron(local(b1, b1.project(x1 * x1)), id2), env});
        gen.drive_terms.push_back({d.alpha2 * kron(id1, local(b2, b2.project(x2 * x2))), env});
    }
    return gen;
}

// EigenSystem-shaped record for an arbitrary local basis (parity from <Pi>).
inline EigenSystem as_eigensystem(const LocalBasis& b) {
    EigenSystem e;
    e.space = b.space;
    e.energies = b.energies;
    e.states = b.states;
    const OperatorMatrix pi = parity_operator(b.space);
    const Index nm = b.space.factor(1).dim - 1;
    for (Index k = 0; k < b.size(); ++k) {
        const double p = std::real(b.states.col(k).dot(pi.apply(b.states.col(k))));
        e.parities.push_back(p >= 0 ? 1 : -1);
    }
    e.x_elements = b.project(embed(annihilation(nm) + creation(nm), 1, b.space));
    e.sx_elements = b.project(embed(pauli(Pauli::x), 0, b.space));
    return e;
}

namespace detail {

inline SubsystemView dressed_view(const LocalBasis& b) {
    const Index nm = b.space.factor(1).dim - 1;
    return SubsystemView::dressed(b.energies, b.project(embed(number(nm), 1, b.space)));
}

inline void stamp(TimeSeries& ts, const ModelSpec& s) {
    ts.info["n_max"] = static_cast<double>(s.n_max);
    ts.info["k_dressed"] = static_cast<double>(s.k_dressed);
    ts.info["t_switch_off"] = s.t_switch_off;
    ts.info["omega_d"] = resolved_drive_frequency(s);
}

inline bool can_grow(const PropagationConfig& cfg, Index next) { return cfg.auto_truncation && next <= cfg.max_n_max; }

// Dressed-basis run (full, usc_dressed, dsc_adiabatic tiers).
inline TimeSeries run_dressed(ModelSpec s, const PropagationConfig& cfg, const std::vector<std::string>& columns) {
    for (;;) {
        LocalBasis b1, b2;
        try {
            if (s.tier == Tier::dsc_adiabatic) {
                const Index levels = (s.k_dressed + 1) / 2;
                b1 = displaced_oscillator(s, 1, levels).basis();
                b2 = displaced_oscillator(s, 2, levels).basis();
            } else {
                b1 = local_basis(diagonalize_rabi(s, 1).truncated(s.k_dressed));
                b2 = local_basis(diagonalize_rabi(s, 2).truncated(s.k_dressed));
            }
        } catch (const TruncationError&) {
            if (!can_grow(cfg, 2 * s.n_max)) throw;
            s.n_max *= 2;
            continue;
        }
        if (s.switch_off_policy == SwitchOffPolicy::half_pi_over_lambda) {
            const double lam = s.drive_strengths().alpha0 * std::real(b1.project(embed(annihilation(s.n_max) + creation(s.n_max), 1, b1.space))(0, 1)) *
                               std::real(b2.project(embed(annihilation(s.n_max) + creation(s.n_max), 1, b2.space))(0, 1));
            if (lam == 0.0) throw ConfigError("t_switch_off = pi/(2 lambda) needs a nonzero lambda");
            s.t_switch_off = std::numbers::pi / (2.0 * std::abs(lam));
        }
        const auto gen = build_dressed_generator(s, b1, b2, s.tier != Tier::usc_dressed);
        Observables obs;
        obs.s1 = dressed_view(b1);
        obs.s2 = dressed_view(b2);
        obs.convention = TwoQubitDensity::Convention::polariton;
        obs.columns = columns;
        const Index start = s.initial == InitialState::dsc_pair ? 1 : 0;
        const auto psi0 = QuantumState::basis(gen.space(), start);
        try {
            TimeSeries ts;
            if (s.noise.is_zero()) {
                ts = evolve_pure(gen, psi0, cfg, obs);
            } else {
                const EigenSystem e1 = as_eigensystem(b1), e2 = as_eigensystem(b2);
                ts = evolve_lindblad(gen, lindblad_dissipators(s, DissipatorBasis::dressed(e1, e2)), psi0, cfg, obs);
            }
            stamp(ts, s);
            return ts;
        } catch (const TruncationError&) {
            if (!can_grow(cfg, 2 * s.k_dressed)) throw;
            s.k_dressed *= 2;
            if (s.k_dressed > 2 * (s.n_max + 1) - 4) s.n_max *= 2;
        }
    }
}

inline TimeSeries run_fock(ModelSpec s, const PropagationConfig& cfg, const std::vector<std::string>& columns) {
    for (;;) {
        try {
            TimeSeries ts;
            Observables obs;
            obs.s1 = SubsystemView::fock(s.n_max, s.omega1);
            obs.s2 = SubsystemView::fock(s.n_max, s.omega2);
            obs.columns = columns;
            if (s.tier == Tier::rwa_drive) {
                const auto gen = build_sc_rwa(s);
                const auto psi0 = QuantumState::basis(gen.space(), 0);
                if (s.noise.is_zero()) ts = evolve_pure(gen, psi0, cfg, obs);
                else ts = evolve_lindblad(gen, lindblad_dissipators(s, DissipatorBasis::bare()), psi0, cfg, obs);
            } else {
                if (!s.noise.is_zero())
                    throw ConfigError("full tier with noise requires the dressed basis (full_basis = dressed)");
                const auto gen = build_full(s);
                const EigenSystem e1 = diagonalize_rabi(s, 1), e2 = diagonalize_rabi(s, 2);
                const Vector v1 = e1.states.col(0);
                const Vector v2 = e2.states.col(s.initial == InitialState::dsc_pair ? 1 : 0);
                Vector v(gen.space().dim());
                for (Index i = 0; i < v1.size(); ++i) v.segment(i * v2.size(), v2.size()) = v1(i) * v2;
                ts = evolve_pure(gen, QuantumState::pure(gen.space(), v / v.norm()), cfg, obs);
            }
            stamp(ts, s);
            return ts;
        } catch (const TruncationError&) {
            if (!can_grow(cfg, 2 * s.n_max)) throw;
            s.n_max *= 2;
        }
    }
}

inline TimeSeries run_ladder(ModelSpec s, const PropagationConfig& cfg, const std::vector<std::string>& columns) {
    if (!s.noise.is_zero()) throw ConfigError("ladder tiers are closed-system models; noise is not supported");
    Index rungs = s.n_ladder > 0 ? s.n_ladder : s.n_max + 1;
    for (;;) {
        try {
            Observables obs;
            obs.columns = columns;
            obs.in_frame = true;
            LadderModel m;
            if (s.tier == Tier::sc_ladder) {
                m = build_sc_ladder(s, rungs);
                obs.s1 = SubsystemView::fock(rungs - 1, s.omega1);
                obs.s2 = SubsystemView::fock(rungs - 1, s.omega2);
            } else {
                s.n_max = std::max(s.n_max, 2 * rungs + 16);
                const auto a1 = displaced_oscillator(s, 1, rungs);
                const auto a2 = displaced_oscillator(s, 2, rungs);
                m = build_dsc_effective(s, a1, a2, rungs);
                obs.s1 = dressed_view(a1.basis());
                obs.s2 = dressed_view(a2.basis());
                obs.convention = TwoQubitDensity::Convention::polariton;
            }
            Vector c0 = Vector::Zero(m.size());
            c0(0) = 1.0;
            TimeSeries ts = evolve_ladder(m.hamiltonian, m.mapping, c0, cfg, obs, s.t_switch_off);
            stamp(ts, s);
            ts.info["rungs"] = static_cast<double>(rungs);
            return ts;
        } catch (const TruncationError&) {
            if (!can_grow(cfg, 2 * rungs)) throw;
            rungs *= 2;
        }
    }
}

inline TimeSeries run_usc_xy(ModelSpec s, const PropagationConfig& cfg, const std::vector<std::string>& columns) {
    EigenSystem e1, e2;
    for (;;) {
        try {
            e1 = diagonalize_rabi(s, 1).truncated(std::max<Index>(s.k_dressed, 2));
            e2 = diagonalize_rabi(s, 2).truncated(std::max<Index>(s.k_dressed, 2));
            break;
        } catch (const TruncationError&) {
            if (!can_grow(cfg, 2 * s.n_max)) throw;
            s.n_max *= 2;
        }
    }
    const UscXyModel xy = build_usc_xy(s, e1, e2);
    if (s.switch_off_policy == SwitchOffPolicy::half_pi_over_lambda) {
        if (xy.lambda == 0.0) throw ConfigError("t_switch_off = pi/(2 lambda) needs a nonzero lambda");
        s.t_switch_off = std::numbers::pi / (2.0 * std::abs(xy.lambda));
    }
    const auto space = SpaceDescriptor::dressed_pair(2, 2);
    TimeDependentGenerator gen;
    gen.static_part = OperatorMatrix::zero(space);
    gen.drive_terms.push_back({xy.model.hamiltonian, Envelope::constant(1.0, s.t_switch_off)});

    Observables obs;
    obs.s1 = detail::dressed_view(local_basis(e1.truncated(2)));
    obs.s2 = detail::dressed_view(local_basis(e2.truncated(2)));
    obs.s1.top.assign(2, 0);
    obs.s2.top.assign(2, 0);
    obs.convention = TwoQubitDensity::Convention::polariton;
    obs.columns = columns;
    PropagationConfig c = cfg;
    c.picture = Picture::schrodinger; // the XY model is already in the interaction picture
    obs.in_frame = false;

    double g1, g2;
    if (s.gamma_over_lambda) {
        g1 = g2 = *s.gamma_over_lambda * std::abs(xy.lambda);
    } else {
        g1 = s.noise.kappa1 * std::norm(e1.x_elements(0, 1)) + s.noise.gamma1 * std::norm(e1.sx_elements(0, 1));
        g2 = s.noise.kappa2 * std::norm(e2.x_elements(0, 1)) + s.noise.gamma2 * std::norm(e2.sx_elements(0, 1));
    }
    const auto psi0 = QuantumState::basis(space, 0);
    TimeSeries ts;
    if (g1 == 0.0 && g2 == 0.0) {
        ts = evolve_pure(gen, psi0, c, obs);
    } else {
        const auto local = SpaceDescriptor({{FactorKind::dressed, 2}});
        DenseMatrix sm = DenseMatrix::Zero(2, 2);
        sm(0, 1) = 1.0;
        const OperatorMatrix s_minus(local, sm);
        const std::vector<Dissipator> d{{embed(s_minus, 0, space), g1, "S_minus1"}, {embed(s_minus, 1, space), g2, "S_minus2"}};
        ts = evolve_lindblad(gen, d, psi0, c, obs);
    }
    stamp(ts, s);
    ts.info["lambda"] = xy.lambda;
    ts.info["gamma1"] = g1;
    ts.info["gamma2"] = g2;
    ts.info["rwa_validity_ratio"] = xy.max_validity_ratio;
    return ts;
}

} // namespace detail

// Single entry point: prepare the tier's initial state, drive until
// t_switch_off, continue undriven to cfg.t_max.
inline TimeSeries run_protocol(const ModelSpec& spec, const PropagationConfig& cfg, std::vector<std::string> columns = {}) {
    spec.validate();
    cfg.validate();
    if (columns.empty()) columns = default_columns(spec);
    switch (spec.tier) {
    case Tier::rwa_drive: return detail::run_fock(spec, cfg, columns);
    case Tier::full:
        if (spec.full_basis == FullBasis::fock) return detail::run_fock(spec, cfg, columns);
        return detail::run_dressed(spec, cfg, columns);
    case Tier::usc_dressed:
    case Tier::dsc_adiabatic: return detail::run_dressed(spec, cfg, columns);
    case Tier::sc_ladder:
    case Tier::dsc_effective: return detail::run_ladder(spec, cfg, columns);
    case Tier::usc_xy: return detail::run_usc_xy(spec, cfg, columns);
    }
    throw ConfigError("unknown tier");
}

} // namespace dce
