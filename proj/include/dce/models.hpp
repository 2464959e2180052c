// models.hpp — Parameter records and Hamiltonian builders for every model tier

#pragma once

#include "dce/eigensystem.hpp"
#include "dce/errors.hpp"
#include "dce/hilbert.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace dce {

enum class Tier { full, rwa_drive, sc_ladder, usc_dressed, usc_xy, dsc_adiabatic, dsc_effective };
enum class DrivePolicy { fixed, sum_of_modes, dressed_gap_sum };
enum class SwitchOffPolicy { fixed, half_pi_over_lambda };
enum class InitialState { ground, dsc_pair };
enum class FullBasis { dressed, fock };
enum class SpectrumModel { flat };

inline const char* to_string(Tier t) {
    switch (t) {
    case Tier::full: return "full";
    case Tier::rwa_drive: return "rwa_drive";
    case Tier::sc_ladder: return "sc_ladder";
    case Tier::usc_dressed: return "usc_dressed";
    case Tier::usc_xy: return "usc_xy";
    case Tier::dsc_adiabatic: return "dsc_adiabatic";
    case Tier::dsc_effective: return "dsc_effective";
    }
    return "?";
}

inline std::optional<Tier> parse_tier(const std::string& s) {
    for (Tier t : {Tier::full, Tier::rwa_drive, Tier::sc_ladder, Tier::usc_dressed, Tier::usc_xy,
                   Tier::dsc_adiabatic, Tier::dsc_effective})
        if (s == to_string(t)) return t;
    return std::nullopt;
}

struct NoiseSpec {
    double kappa1{0.0}, kappa2{0.0};
    double gamma1{0.0}, gamma2{0.0};
    double gamma_phi1{0.0}, gamma_phi2{0.0};
    SpectrumModel spectrum{SpectrumModel::flat};

    double kappa(int sub) const { return sub == 1 ? kappa1 : kappa2; }
    double gamma(int sub) const { return sub == 1 ? gamma1 : gamma2; }
    double gamma_phi(int sub) const { return sub == 1 ? gamma_phi1 : gamma_phi2; }

    bool is_zero() const {
        return kappa1 == 0 && kappa2 == 0 && gamma1 == 0 && gamma2 == 0 && gamma_phi1 == 0 && gamma_phi2 == 0;
    }

    void validate() const {
        for (double r : {kappa1, kappa2, gamma1, gamma2, gamma_phi1, gamma_phi2})
            if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("noise rates must be finite and >= 0");
    }
};

struct DriveStrengths {
    double alpha0{0.0};
    double alpha1{0.0};
    double alpha2{0.0};
};

// Frequencies in units of omega1 (omega1 = 1 in all presets).
struct ModelSpec {
    double omega1{1.0}, omega2{1.0};
    double omega_q1{1.0}, omega_q2{1.0};
    double g1{0.0}, g2{0.0};
    std::optional<double> alpha0, alpha1, alpha2;
    DrivePolicy drive_policy{DrivePolicy::sum_of_modes};
    double omega_d{0.0};
    SwitchOffPolicy switch_off_policy{SwitchOffPolicy::fixed};
    double t_switch_off{std::numeric_limits<double>::infinity()};
    NoiseSpec noise;
    Index n_max{15};
    Index k_dressed{8};
    Index n_ladder{0}; // 0 selects a default from n_max
    Tier tier{Tier::full};
    InitialState initial{InitialState::ground};
    FullBasis full_basis{FullBasis::dressed};
    std::optional<double> gamma_over_lambda; // usc_xy only: fixes Gamma = ratio * lambda

    double omega(int sub) const { return sub == 1 ? omega1 : omega2; }
    double omega_q(int sub) const { return sub == 1 ? omega_q1 : omega_q2; }
    double g(int sub) const { return sub == 1 ? g1 : g2; }

    DriveStrengths drive_strengths() const {
        DriveStrengths d;
        if (alpha0 && alpha1 && alpha2) {
            d = {*alpha0, *alpha1, *alpha2};
            const double expect = 2.0 * std::sqrt(*alpha1 * *alpha2);
            if (std::abs(expect - *alpha0) > 1e-9 * std::max(1.0, *alpha0))
                throw ConfigError("alpha0 must equal 2*sqrt(alpha1*alpha2)");
        } else if (alpha0 && alpha1) {
            d = {*alpha0, *alpha1, *alpha1 > 0 ? (*alpha0 * *alpha0) / (4.0 * *alpha1) : 0.0};
            if (*alpha1 == 0 && *alpha0 != 0) throw ConfigError("alpha1 = 0 is incompatible with alpha0 > 0");
        } else if (alpha0 && alpha2) {
            d = {*alpha0, *alpha2 > 0 ? (*alpha0 * *alpha0) / (4.0 * *alpha2) : 0.0, *alpha2};
            if (*alpha2 == 0 && *alpha0 != 0) throw ConfigError("alpha2 = 0 is incompatible with alpha0 > 0");
        } else if (alpha0) {
            d = {*alpha0, *alpha0 / 2.0, *alpha0 / 2.0};
        } else if (alpha1 && alpha2) {
            d = {2.0 * std::sqrt(*alpha1 * *alpha2), *alpha1, *alpha2};
        } else if (alpha1 || alpha2) {
            throw ConfigError("single-mode drive given without alpha0 or its partner");
        }
        return d;
    }

    void validate() const {
        for (double w : {omega1, omega2, omega_q1, omega_q2})
            if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("frequencies must be finite and > 0");
        if (!(g1 >= 0.0) || !(g2 >= 0.0)) throw ConfigError("couplings must be >= 0");
        for (const auto& a : {alpha0, alpha1, alpha2})
            if (a && (!(*a >= 0.0) || !std::isfinite(*a))) throw ConfigError("drive strengths must be >= 0");
        (void)drive_strengths();
        if (!(t_switch_off >= 0.0)) throw ConfigError("t_switch_off must be >= 0");
        if (drive_policy == DrivePolicy::fixed && !(omega_d > 0.0)) throw ConfigError("omega_d must be > 0");
        if (n_max < 1) throw ConfigError("n_max must be >= 1");
        if (k_dressed < 2) throw ConfigError("k_dressed must be >= 2");
        if (n_ladder < 0) throw ConfigError("n_ladder must be >= 0");
        if (gamma_over_lambda && !(*gamma_over_lambda >= 0.0)) throw ConfigError("gamma_over_lambda must be >= 0");
        noise.validate();
    }
};

// ----------------------------------------------------------------------------
// Time-dependent generators
// ----------------------------------------------------------------------------

// f(t) = sum_j c_j exp(-i nu_j t) for t <= switch_off, zero afterwards.
struct Envelope {
    struct Component {
        cplx amplitude;
        double frequency;
    };
    std::vector<Component> components;
    double switch_off{std::numeric_limits<double>::infinity()};

    static Envelope constant(cplx a, double t_so) { return {{{a, 0.0}}, t_so}; }
    static Envelope cosine(double amplitude, double omega, double t_so) {
        return {{{0.5 * amplitude, omega}, {0.5 * amplitude, -omega}}, t_so};
    }
    // amplitude * exp(-i nu t)
    static Envelope phase(double amplitude, double nu, double t_so) { return {{{amplitude, nu}}, t_so}; }

    cplx ungated(double t) const {
        cplx v = 0.0;
        for (const auto& c : components) v += c.amplitude * std::exp(-I * (c.frequency * t));
        return v;
    }
    cplx operator()(double t) const { return t <= switch_off ? ungated(t) : cplx(0.0); }
};

struct DriveTerm {
    OperatorMatrix op;
    Envelope envelope;
};

// H(t) = static_part + sum_i envelope_i(t) * op_i.
struct TimeDependentGenerator {
    OperatorMatrix static_part;
    std::vector<DriveTerm> drive_terms;

    const SpaceDescriptor& space() const { return static_part.space(); }

    OperatorMatrix at(double t) const {
        OperatorMatrix h = static_part;
        for (const auto& term : drive_terms) {
            const cplx f = term.envelope(t);
            if (f != cplx(0.0)) h += f * term.op;
        }
        return h;
    }

    double switch_off() const {
        double t = std::numeric_limits<double>::infinity();
        for (const auto& term : drive_terms) t = std::min(t, term.envelope.switch_off);
        return t;
    }
};

// ----------------------------------------------------------------------------
// Builders
// ----------------------------------------------------------------------------

namespace detail {

inline void check_subsystem(int sub) {
    if (sub != 1 && sub != 2) throw std::invalid_argument("subsystem must be 1 or 2");
}

inline OperatorMatrix quadrature_on_pair(Index n_max) {
    return embed(annihilation(n_max) + creation(n_max), 1, SpaceDescriptor::qubit_mode(n_max));
}

} // namespace detail

// omega a^dagger a + (omega_q/2) sigma_z + g sigma_x (a + a^dagger)
inline OperatorMatrix build_rabi(const ModelSpec& spec, int sub) {
    detail::check_subsystem(sub);
    const auto space = SpaceDescriptor::qubit_mode(spec.n_max);
    const auto n = embed(number(spec.n_max), 1, space);
    const auto sz = embed(pauli(Pauli::z), 0, space);
    const auto sx = embed(pauli(Pauli::x), 0, space);
    return spec.omega(sub) * n + (spec.omega_q(sub) / 2.0) * sz + spec.g(sub) * (sx * detail::quadrature_on_pair(spec.n_max));
}

// omega a^dagger a + (omega_q/2) sigma_z + g (sigma_- a^dagger + sigma_+ a)
inline OperatorMatrix build_jc(const ModelSpec& spec, int sub) {
    detail::check_subsystem(sub);
    const auto space = SpaceDescriptor::qubit_mode(spec.n_max);
    const auto a = embed(annihilation(spec.n_max), 1, space);
    const auto n = embed(number(spec.n_max), 1, space);
    const auto sz = embed(pauli(Pauli::z), 0, space);
    const auto sm = embed(pauli(Pauli::minus), 0, space);
    const auto sp = embed(pauli(Pauli::plus), 0, space);
    return spec.omega(sub) * n + (spec.omega_q(sub) / 2.0) * sz + spec.g(sub) * (sm * a.adjoint() + sp * a);
}

inline double lowest_gap(const OperatorMatrix& h) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.dense(), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(1) - es.eigenvalues()(0);
}

// Drive frequency after applying the spec's policy.
inline double resolved_drive_frequency(const ModelSpec& spec) {
    switch (spec.drive_policy) {
    case DrivePolicy::fixed: return spec.omega_d;
    case DrivePolicy::sum_of_modes: return spec.omega1 + spec.omega2;
    case DrivePolicy::dressed_gap_sum: return lowest_gap(build_rabi(spec, 1)) + lowest_gap(build_rabi(spec, 2));
    }
    return spec.omega_d;
}

inline SpaceDescriptor two_pair_space(const ModelSpec& spec) { return SpaceDescriptor::two_pairs(spec.n_max, spec.n_max); }

inline OperatorMatrix on_subsystem(const OperatorMatrix& pair_op, int sub, const SpaceDescriptor& target) {
    return embed(pair_op, sub == 1 ? 0 : 2, target);
}

// Drive frequency-modulated Rabi pair, no approximations on the drive.
inline TimeDependentGenerator build_full(const ModelSpec& spec) {
    spec.validate();
    const auto space = two_pair_space(spec);
    const auto d = spec.drive_strengths();
    const double wd = resolved_drive_frequency(spec);
    const double t_so = spec.t_switch_off;
    const auto x1 = on_subsystem(detail::quadrature_on_pair(spec.n_max), 1, space);
    const auto x2 = on_subsystem(detail::quadrature_on_pair(spec.n_max), 2, space);

    TimeDependentGenerator gen;
    gen.static_part = on_subsystem(build_rabi(spec, 1), 1, space) + on_subsystem(build_rabi(spec, 2), 2, space);
    gen.drive_terms.push_back({d.alpha1 * (x1 * x1), Envelope::cosine(1.0, wd, t_so)});
    gen.drive_terms.push_back({d.alpha2 * (x2 * x2), Envelope::cosine(1.0, wd, t_so)});
    gen.drive_terms.push_back({d.alpha0 * (x1 * x2), Envelope::cosine(1.0, wd, t_so)});
    return gen;
}

// JC pair with the two-mode squeezing drive kept under RWA.
inline TimeDependentGenerator build_sc_rwa(const ModelSpec& spec) {
    spec.validate();
    if (spec.omega1 == spec.omega2)
        throw ConfigError("rwa_drive tier requires nondegenerate resonators (omega1 != omega2)");
    const auto space = two_pair_space(spec);
    const auto d = spec.drive_strengths();
    const double wd = resolved_drive_frequency(spec);
    const auto a = embed(annihilation(spec.n_max), 1, SpaceDescriptor::qubit_mode(spec.n_max));
    const auto a1 = on_subsystem(a, 1, space);
    const auto a2 = on_subsystem(a, 2, space);

    TimeDependentGenerator gen;
    gen.static_part = on_subsystem(build_jc(spec, 1), 1, space) + on_subsystem(build_jc(spec, 2), 2, space);
    gen.drive_terms.push_back({a1.adjoint() * a2.adjoint(), Envelope::phase(d.alpha0 / 2.0, wd, spec.t_switch_off)});
    gen.drive_terms.push_back({a1 * a2, Envelope::phase(d.alpha0 / 2.0, -wd, spec.t_switch_off)});
    return gen;
}

// ----------------------------------------------------------------------------
// Dissipators
// ----------------------------------------------------------------------------

struct Dissipator {
    OperatorMatrix jump;
    double rate;
    std::string label;
};

struct DissipatorBasis {
    enum class Kind { bare, dressed } kind{Kind::bare};
    const EigenSystem* eig1{nullptr};
    const EigenSystem* eig2{nullptr};

    static DissipatorBasis bare() { return {}; }
    static DissipatorBasis dressed(const EigenSystem& e1, const EigenSystem& e2) { return {Kind::dressed, &e1, &e2}; }
};

// Bare: {a_mu, kappa_mu}, {sigma_-^mu, gamma_mu}, {sigma_z^mu, gamma_phi_mu} on the
// two-pair Fock space. Dressed: {|phi_k><phi_l|, kappa |X^kl|^2 + gamma |<k|sigma_x|l>|^2}
// for l > k on the dressed product space, flat noise spectrum.
inline std::vector<Dissipator> lindblad_dissipators(const ModelSpec& spec, const DissipatorBasis& basis) {
    spec.noise.validate();
    std::vector<Dissipator> out;
    if (basis.kind == DissipatorBasis::Kind::bare) {
        if (spec.tier != Tier::rwa_drive && spec.tier != Tier::sc_ladder)
            throw ConfigError(std::string("bare-basis dissipators are only valid for JC tiers, not ") + to_string(spec.tier));
        const auto space = two_pair_space(spec);
        const auto pair = SpaceDescriptor::qubit_mode(spec.n_max);
        const auto a = embed(annihilation(spec.n_max), 1, pair);
        const auto sm = embed(pauli(Pauli::minus), 0, pair);
        const auto sz = embed(pauli(Pauli::z), 0, pair);
        for (int mu : {1, 2}) {
            const std::string s = std::to_string(mu);
            out.push_back({on_subsystem(a, mu, space), spec.noise.kappa(mu), "a" + s});
            out.push_back({on_subsystem(sm, mu, space), spec.noise.gamma(mu), "sigma_minus" + s});
            out.push_back({on_subsystem(sz, mu, space), spec.noise.gamma_phi(mu), "sigma_z" + s});
        }
        return out;
    }
    if (!basis.eig1 || !basis.eig2) throw std::invalid_argument("lindblad_dissipators: dressed rates need eigensystems");
    const auto space = SpaceDescriptor::dressed_pair(basis.eig1->size(), basis.eig2->size());
    for (int mu : {1, 2}) {
        const EigenSystem& e = mu == 1 ? *basis.eig1 : *basis.eig2;
        const Index k = e.size();
        const auto local = SpaceDescriptor({{FactorKind::dressed, k}});
        for (Index lo = 0; lo < k; ++lo)
            for (Index hi = lo + 1; hi < k; ++hi) {
                const double rate = spec.noise.kappa(mu) * std::norm(e.x_elements(lo, hi)) +
                                    spec.noise.gamma(mu) * std::norm(e.sx_elements(lo, hi));
                SparseMatrix m(k, k);
                m.insert(lo, hi) = 1.0;
                out.push_back({embed(OperatorMatrix(local, std::move(m)), mu == 1 ? 0 : 1, space), rate,
                               "phi" + std::to_string(lo) + "<-phi" + std::to_string(hi) + "@" + std::to_string(mu)});
            }
    }
    return out;
}

} // namespace dce
