// dynamics.hpp — Adaptive propagation of pure states and Lindblad master equations
//
// States are propagated in the interaction picture of a diagonal frame F
// (psi_I = e^{iFt} psi), restricted to the invariant sectors of the generator,
// and sampled on a fixed output grid. Drive switch-offs are integrator
// breakpoints.

#pragma once

#include "dce/entanglement.hpp"
#include "dce/errors.hpp"
#include "dce/hilbert.hpp"
#include "dce/models.hpp"

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dce {

enum class Picture { schrodinger, interaction };

struct PropagationConfig {
    double t_max{0.0};
    double dt_out{1.0};
    double rtol{1e-8};
    double atol{1e-10};
    double leakage_tol{1e-6};
    Picture picture{Picture::interaction};
    bool auto_truncation{true};
    Index max_n_max{512};

    void validate() const {
        if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be > 0");
        if (!(dt_out > 0.0)) throw ConfigError("dt_out must be > 0");
        if (!(rtol > 0.0) || !(atol > 0.0)) throw ConfigError("integrator tolerances must be > 0");
        if (!(leakage_tol > 0.0)) throw ConfigError("leakage_tol must be > 0");
        if (max_n_max < 1) throw ConfigError("max_n_max must be >= 1");
    }
};

struct TimeSeries {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::map<std::string, double> info;

    std::size_t rows() const { return times.size(); }
    bool has(const std::string& name) const { return std::find(names.begin(), names.end(), name) != names.end(); }

    const std::vector<double>& column(const std::string& name) const {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw std::out_of_range("TimeSeries: no column " + name);
        return columns[static_cast<std::size_t>(it - names.begin())];
    }

    // Value at the sample closest to t.
    double at(const std::string& name, double t) const {
        const auto& c = column(name);
        std::size_t best = 0;
        for (std::size_t i = 1; i < times.size(); ++i)
            if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
        return c.at(best);
    }
};

inline const std::vector<std::string>& known_columns() {
    static const std::vector<std::string> cols{"concurrence", "fidelity_bell", "n1",     "n2",      "entropy_vn",
                                              "subspace_pop", "purity",       "trace",  "leakage", "polariton_leakage"};
    return cols;
}

// ----------------------------------------------------------------------------
// Observables
// ----------------------------------------------------------------------------

// Local description of one subsystem's basis inside a two-subsystem product space.
struct SubsystemView {
    Index dim{0};
    RealVector frame;                  // local part of the frame generator
    DenseMatrix number;                // a^dagger a in this basis (empty: unavailable)
    bool number_diagonal{false};
    std::vector<int> qubit_label;      // two-qubit label per state (-1: outside)
    std::vector<Index> group;          // label of the traced partner for the two-qubit reduction
    std::vector<char> top;             // counted as truncation leakage
    bool has_subspace{false};          // states 0, 1 form the polariton pair

    // Frame energy carried by qubit label q (first state with that label).
    double qubit_frame(int q) const {
        for (std::size_t i = 0; i < qubit_label.size(); ++i)
            if (qubit_label[i] == q) return frame(static_cast<Index>(i));
        return 0.0;
    }

    // (qubit, mode) Fock basis; local index q*(n_max+1) + n.
    static SubsystemView fock(Index n_max, double omega) {
        SubsystemView v;
        const Index m = n_max + 1;
        v.dim = 2 * m;
        v.frame.resize(v.dim);
        v.number = DenseMatrix::Zero(v.dim, v.dim);
        v.number_diagonal = true;
        for (Index q = 0; q < 2; ++q)
            for (Index n = 0; n < m; ++n) {
                const Index i = q * m + n;
                v.frame(i) = omega * (static_cast<double>(n) + (q == 0 ? -0.5 : 0.5));
                v.number(i, i) = static_cast<double>(n);
                v.qubit_label.push_back(static_cast<int>(q));
                v.group.push_back(n);
                v.top.push_back(n >= m - 2 ? 1 : 0);
            }
        return v;
    }

    // Dressed basis of `energies`; number may be empty.
    static SubsystemView dressed(const RealVector& energies, DenseMatrix number) {
        SubsystemView v;
        v.dim = energies.size();
        v.frame = energies;
        v.number = std::move(number);
        v.has_subspace = true;
        for (Index i = 0; i < v.dim; ++i) {
            v.qubit_label.push_back(i < 2 ? static_cast<int>(i) : -1);
            v.group.push_back(0);
            v.top.push_back(i >= v.dim - 2 ? 1 : 0);
        }
        return v;
    }
};

struct Observables {
    SubsystemView s1, s2;
    TwoQubitDensity::Convention convention{TwoQubitDensity::Convention::bare};
    std::vector<std::string> columns{"concurrence", "n1", "n2", "trace", "leakage"};
    bool in_frame{true}; // state coordinates carry the view frames

    Vector bell_target() const {
        Vector b = Vector::Zero(4);
        const double r = 1.0 / std::sqrt(2.0);
        if (convention == TwoQubitDensity::Convention::bare) {
            b(3) = r;     // |ee>
            b(0) = I * r; // i|gg>
        } else {
            b(0) = r;      // |00>
            b(3) = -I * r; // -i|11>
        }
        return b;
    }

    void validate(const SpaceDescriptor& space) const {
        if (s1.dim * s2.dim != space.dim())
            throw std::invalid_argument("Observables: subsystem views do not span " + space.describe());
        for (const auto& c : columns) {
            if (std::find(known_columns().begin(), known_columns().end(), c) == known_columns().end())
                throw ConfigError("unknown output column '" + c + "'");
            if ((c == "n1" && s1.number.size() == 0) || (c == "n2" && s2.number.size() == 0))
                throw ConfigError("column '" + c + "' is not available for this tier");
            if (c == "subspace_pop" && !s1.has_subspace)
                throw ConfigError("column 'subspace_pop' is only available in dressed tiers");
            if (c == "polariton_leakage" && convention != TwoQubitDensity::Convention::polariton)
                throw ConfigError("column 'polariton_leakage' is only available in dressed tiers");
        }
    }

    bool wants(const char* c) const { return std::find(columns.begin(), columns.end(), c) != columns.end(); }
};

namespace detail {

// Per-block bookkeeping for observables, derived once from the product indices.
struct BlockIndex {
    std::vector<Index> rows; // product indices
    std::vector<Index> i1, i2;
    std::vector<Index> qgroup; // dense group id for the two-qubit reduction (-1: excluded)
    std::vector<int> qlabel;
    Index n_qgroups{0};
    std::vector<Index> t2; // dense id of the subsystem-2 index (for rho1)
    std::vector<Index> t1;
    Index n_t2{0}, n_t1{0};

    BlockIndex(std::vector<Index> r, const Observables& obs) : rows(std::move(r)) {
        const Index d2 = obs.s2.dim;
        const Index g2n = 1 + *std::max_element(obs.s2.group.begin(), obs.s2.group.end());
        std::map<Index, Index> gmap, m2, m1;
        for (Index row : rows) {
            const Index a = row / d2, b = row % d2;
            i1.push_back(a);
            i2.push_back(b);
            const int la = obs.s1.qubit_label[static_cast<std::size_t>(a)];
            const int lb = obs.s2.qubit_label[static_cast<std::size_t>(b)];
            if (la < 0 || lb < 0) {
                qlabel.push_back(-1);
                qgroup.push_back(-1);
            } else {
                qlabel.push_back(2 * la + lb);
                const Index key = obs.s1.group[static_cast<std::size_t>(a)] * g2n + obs.s2.group[static_cast<std::size_t>(b)];
                qgroup.push_back(gmap.emplace(key, static_cast<Index>(gmap.size())).first->second);
            }
            m2.emplace(b, 0);
            m1.emplace(a, 0);
        }
        n_qgroups = static_cast<Index>(gmap.size());
        Index k = 0;
        for (auto& [key, v] : m2) v = k++;
        n_t2 = k;
        k = 0;
        for (auto& [key, v] : m1) v = k++;
        n_t1 = k;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            t2.push_back(m2[i2[i]]);
            t1.push_back(m1[i1[i]]);
        }
    }
};

// Accumulates the reduced quantities of a (block-diagonal) state.
struct Reduction {
    double trace{0.0};
    double purity{0.0};
    Matrix4 two_qubit{Matrix4::Zero()};
    double leak1{0.0}, leak2{0.0};
    double pop_low1{0.0}, pop_low2{0.0};
    double n1_diag{0.0}, n2_diag{0.0};
    // reduced subsystem matrices in full local dimension, filled on demand
    DenseMatrix rho1, rho2;
};

inline void accumulate_diag(const Observables& obs, const BlockIndex& bi, Index i, double p, Reduction& r) {
    const auto a = static_cast<std::size_t>(bi.i1[static_cast<std::size_t>(i)]);
    const auto b = static_cast<std::size_t>(bi.i2[static_cast<std::size_t>(i)]);
    r.trace += p;
    if (obs.s1.top[a]) r.leak1 += p;
    if (obs.s2.top[b]) r.leak2 += p;
    if (obs.s1.has_subspace && a < 2) r.pop_low1 += p;
    if (obs.s2.has_subspace && b < 2) r.pop_low2 += p;
    if (obs.s1.number_diagonal) r.n1_diag += p * std::real(obs.s1.number(static_cast<Index>(a), static_cast<Index>(a)));
    if (obs.s2.number_diagonal) r.n2_diag += p * std::real(obs.s2.number(static_cast<Index>(b), static_cast<Index>(b)));
}

inline void reduce_pure(const Observables& obs, const BlockIndex& bi, const Eigen::Ref<const Vector>& c, bool need_rho1,
                        bool need_rho2, Reduction& r) {
    const auto m = static_cast<Index>(bi.rows.size());
    for (Index i = 0; i < m; ++i) accumulate_diag(obs, bi, i, std::norm(c(i)), r);
    r.purity += 0.0; // set by caller for pure states

    DenseMatrix g = DenseMatrix::Zero(4, std::max<Index>(bi.n_qgroups, 1));
    for (Index i = 0; i < m; ++i)
        if (bi.qgroup[static_cast<std::size_t>(i)] >= 0) g(bi.qlabel[static_cast<std::size_t>(i)], bi.qgroup[static_cast<std::size_t>(i)]) += c(i);
    r.two_qubit += g * g.adjoint();

    if (need_rho1) {
        DenseMatrix mm = DenseMatrix::Zero(obs.s1.dim, bi.n_t2);
        for (Index i = 0; i < m; ++i) mm(bi.i1[static_cast<std::size_t>(i)], bi.t2[static_cast<std::size_t>(i)]) += c(i);
        r.rho1 += mm * mm.adjoint();
    }
    if (need_rho2) {
        DenseMatrix mm = DenseMatrix::Zero(obs.s2.dim, bi.n_t1);
        for (Index i = 0; i < m; ++i) mm(bi.i2[static_cast<std::size_t>(i)], bi.t1[static_cast<std::size_t>(i)]) += c(i);
        r.rho2 += mm * mm.adjoint();
    }
}

inline void reduce_mixed(const Observables& obs, const BlockIndex& bi, const Eigen::Ref<const DenseMatrix>& rho,
                         bool need_rho1, bool need_rho2, Reduction& r) {
    const auto m = static_cast<Index>(bi.rows.size());
    for (Index i = 0; i < m; ++i) accumulate_diag(obs, bi, i, std::real(rho(i, i)), r);
    r.purity += rho.squaredNorm();
    for (Index j = 0; j < m; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        for (Index i = 0; i < m; ++i) {
            const auto si = static_cast<std::size_t>(i);
            const cplx v = rho(i, j);
            if (v == cplx(0.0)) continue;
            if (bi.qgroup[si] >= 0 && bi.qgroup[si] == bi.qgroup[sj]) r.two_qubit(bi.qlabel[si], bi.qlabel[sj]) += v;
            if (need_rho1 && bi.i2[si] == bi.i2[sj]) r.rho1(bi.i1[si], bi.i1[sj]) += v;
            if (need_rho2 && bi.i1[si] == bi.i1[sj]) r.rho2(bi.i2[si], bi.i2[sj]) += v;
        }
    }
}

// Lab-frame expectation of the number operator from a reduced matrix.
inline double number_from_reduced(const SubsystemView& v, const DenseMatrix& rho_frame, double t, bool in_frame) {
    DenseMatrix lab = rho_frame;
    if (in_frame) {
        for (Index j = 0; j < lab.cols(); ++j)
            for (Index i = 0; i < lab.rows(); ++i) lab(i, j) *= std::exp(-I * ((v.frame(i) - v.frame(j)) * t));
    }
    return std::real((lab * v.number).trace());
}

inline double entropy_of(const DenseMatrix& rho, double trace) {
    DenseMatrix n = 0.5 * (rho + rho.adjoint()) / trace;
    const RealVector p = clipped_eigenvalues(n, 1e-10);
    double s = 0.0;
    for (Index i = 0; i < p.size(); ++i)
        if (p(i) > 1e-300) s -= p(i) * std::log(p(i));
    return std::max(0.0, s);
}

inline std::vector<double> finish_row(const Observables& obs, Reduction& r, double t, bool pure) {
    std::vector<double> row;
    if (pure) r.purity = r.trace * r.trace;
    const double tr = r.trace;
    Matrix4 q = r.two_qubit;
    if (!obs.in_frame) {
        // lab coordinates: rotate into the views' frame so phase-sensitive columns agree across pictures
        Eigen::Vector4cd u;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) u(2 * a + b) = std::exp(I * ((obs.s1.qubit_frame(a) + obs.s2.qubit_frame(b)) * t));
        q = (u.asDiagonal() * q * u.conjugate().asDiagonal()).eval();
    }
    double qtrace = std::real(q.trace());
    const double pol_leak = std::max(0.0, 1.0 - qtrace / tr);
    for (const auto& c : obs.columns) {
        if (c == "concurrence") {
            row.push_back(qtrace > 0.0 ? concurrence(Matrix4(q / qtrace), 1e-5) : 0.0);
        } else if (c == "fidelity_bell") {
            const Vector b = obs.bell_target();
            row.push_back(qtrace > 0.0 ? std::real(b.dot(q * b)) / qtrace : 0.0);
        } else if (c == "n1") {
            row.push_back(obs.s1.number_diagonal ? r.n1_diag / tr : number_from_reduced(obs.s1, r.rho1, t, obs.in_frame) / tr);
        } else if (c == "n2") {
            row.push_back(obs.s2.number_diagonal ? r.n2_diag / tr : number_from_reduced(obs.s2, r.rho2, t, obs.in_frame) / tr);
        } else if (c == "entropy_vn") {
            row.push_back(entropy_of(r.rho1, tr));
        } else if (c == "subspace_pop") {
            row.push_back(r.pop_low1 / tr);
        } else if (c == "purity") {
            row.push_back(r.purity);
        } else if (c == "trace") {
            row.push_back(tr);
        } else if (c == "leakage") {
            row.push_back(std::max(r.leak1, r.leak2));
        } else if (c == "polariton_leakage") {
            row.push_back(pol_leak);
        }
    }
    return row;
}

// ----------------------------------------------------------------------------
// Sector decomposition
// ----------------------------------------------------------------------------

struct DisjointSets {
    std::vector<Index> parent;
    explicit DisjointSets(Index n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), Index{0}); }
    Index find(Index x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    bool unite(Index a, Index b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (a > b) std::swap(a, b);
        parent[static_cast<std::size_t>(b)] = a;
        return true;
    }
};

template <class F>
void for_each_nonzero(const SparseMatrix& m, F&& f) {
    for (Index k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            if (it.value() != cplx(0.0)) f(it.row(), it.col(), it.value());
}

struct Sectors {
    std::vector<std::vector<Index>> blocks;
    std::vector<Index> block_of; // -1 when unused
    std::vector<Index> local_of;
};

// Invariant blocks of a Lindblad (or unitary, if `jumps` is empty) evolution
// from `rho0`: coherently connected components, merged until every jump maps a
// block into a single block, restricted to the blocks reachable from rho0.
inline Sectors find_sectors(Index dim, const std::vector<SparseMatrix>& hamiltonian_parts,
                            const std::vector<SparseMatrix>& jumps, const SparseMatrix& rho0) {
    DisjointSets ds(dim);
    for (const auto& h : hamiltonian_parts) for_each_nonzero(h, [&](Index r, Index c, cplx) { ds.unite(r, c); });
    for_each_nonzero(rho0, [&](Index r, Index c, cplx) { ds.unite(r, c); });
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& o : jumps) {
            std::map<Index, Index> target; // source root -> a target root
            for_each_nonzero(o, [&](Index r, Index c, cplx) {
                const Index s = ds.find(c), t = ds.find(r);
                auto [it, fresh] = target.emplace(s, t);
                if (!fresh && ds.find(it->second) != t) {
                    ds.unite(it->second, t);
                    changed = true;
                }
            });
        }
    }
    // reachability through jumps
    std::map<Index, std::set<Index>> edges;
    for (const auto& o : jumps) for_each_nonzero(o, [&](Index r, Index c, cplx) { edges[ds.find(c)].insert(ds.find(r)); });
    std::set<Index> reached, frontier;
    for_each_nonzero(rho0, [&](Index r, Index, cplx) { frontier.insert(ds.find(r)); });
    while (!frontier.empty()) {
        const Index b = *frontier.begin();
        frontier.erase(frontier.begin());
        if (!reached.insert(b).second) continue;
        for (Index t : edges[b])
            if (!reached.count(t)) frontier.insert(t);
    }
    Sectors s;
    s.block_of.assign(static_cast<std::size_t>(dim), -1);
    s.local_of.assign(static_cast<std::size_t>(dim), -1);
    std::map<Index, Index> id;
    for (Index i = 0; i < dim; ++i) {
        const Index root = ds.find(i);
        if (!reached.count(root)) continue;
        auto [it, fresh] = id.emplace(root, static_cast<Index>(s.blocks.size()));
        if (fresh) s.blocks.emplace_back();
        auto& blk = s.blocks[static_cast<std::size_t>(it->second)];
        s.block_of[static_cast<std::size_t>(i)] = it->second;
        s.local_of[static_cast<std::size_t>(i)] = static_cast<Index>(blk.size());
        blk.push_back(i);
    }
    return s;
}

// A block Hamiltonian whose nonzero pattern is shared by all terms, so that
// H(t) = sum_i c_i(t) term_i is a single pass over the values.
// Linear combination of fixed terms on a shared sparsity pattern. Blocks with
// a fill above `dense_fill` are also scattered into a dense copy for GEMM.
struct BlockOperator {
    static constexpr double dense_fill = 0.08;
    SparseMatrix work;
    DenseMatrix dense_work;
    bool use_dense{false};
    std::vector<std::vector<cplx>> term_values;

    void assemble(const std::vector<cplx>& coeffs) {
        cplx* v = work.valuePtr();
        const auto nnz = static_cast<std::size_t>(work.nonZeros());
        std::fill(v, v + nnz, cplx(0.0));
        for (std::size_t k = 0; k < term_values.size(); ++k) {
            const cplx c = coeffs[k];
            if (c == cplx(0.0)) continue;
            const auto& tv = term_values[k];
            for (std::size_t p = 0; p < nnz; ++p) v[p] += c * tv[p];
        }
        if (use_dense) {
            const auto* outer = work.outerIndexPtr();
            const auto* inner = work.innerIndexPtr();
            for (Index j = 0; j < work.cols(); ++j)
                for (auto p = outer[j]; p < outer[j + 1]; ++p) dense_work(inner[p], j) = v[p];
        }
    }

    template <class In, class Out>
    void multiply(const In& x, Out& y) const {
        if (use_dense) y.noalias() = dense_work * x;
        else y.noalias() = work * x;
    }
};

inline BlockOperator make_block_operator(Index dim, const std::vector<std::vector<Triplet>>& terms) {
    BlockOperator b;
    std::vector<Triplet> all;
    for (const auto& t : terms)
        for (const auto& e : t) all.emplace_back(e.row(), e.col(), cplx(1.0));
    b.work = SparseMatrix(dim, dim);
    b.work.setFromTriplets(all.begin(), all.end());
    b.work.makeCompressed();
    const double fill = dim > 0 ? static_cast<double>(b.work.nonZeros()) / (static_cast<double>(dim) * static_cast<double>(dim)) : 0.0;
    b.use_dense = dim >= 16 && fill > BlockOperator::dense_fill;
    if (b.use_dense) b.dense_work = DenseMatrix::Zero(dim, dim);
    const auto* outer = b.work.outerIndexPtr();
    const auto* inner = b.work.innerIndexPtr();
    for (const auto& t : terms) {
        std::vector<cplx> vals(static_cast<std::size_t>(b.work.nonZeros()), cplx(0.0));
        for (const auto& e : t) {
            const auto* lo = inner + outer[e.col()];
            const auto* hi = inner + outer[e.col() + 1];
            const auto* pos = std::lower_bound(lo, hi, static_cast<int>(e.row()));
            vals[static_cast<std::size_t>(pos - inner)] += e.value();
        }
        b.term_values.push_back(std::move(vals));
    }
    return b;
}

// Time axis: output grid, forced samples and integration breakpoints.
struct Schedule {
    std::vector<double> samples;
    std::vector<double> breakpoints; // segment ends, last = t_max
};

inline Schedule make_schedule(double t_max, double dt_out, const std::vector<double>& switch_offs) {
    Schedule s;
    const auto n = static_cast<long>(std::floor(t_max / dt_out + 1e-9));
    for (long k = 0; k <= n; ++k) s.samples.push_back(static_cast<double>(k) * dt_out);
    std::vector<double> extra{t_max};
    for (double t : switch_offs)
        if (t > 0.0 && t < t_max) extra.push_back(t);
    for (double t : extra) {
        s.breakpoints.push_back(t);
        s.samples.push_back(t);
    }
    // merge near-duplicates, keeping the exact breakpoint values
    auto dedupe = [&](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        std::vector<double> out;
        for (double t : v) {
            if (!out.empty() && t - out.back() <= 1e-9 * std::max(1.0, t)) {
                if (std::find(extra.begin(), extra.end(), t) != extra.end()) out.back() = t;
                continue;
            }
            out.push_back(t);
        }
        v = std::move(out);
    };
    dedupe(s.samples);
    dedupe(s.breakpoints);
    return s;
}

using RealState = Eigen::VectorXd;

inline Eigen::Map<const Vector> as_complex(const RealState& x, Index offset, Index n) {
    return Eigen::Map<const Vector>(reinterpret_cast<const cplx*>(x.data()) + offset, n);
}
inline Eigen::Map<Vector> as_complex(RealState& x, Index offset, Index n) {
    return Eigen::Map<Vector>(reinterpret_cast<cplx*>(x.data()) + offset, n);
}

// Runs `sys` through the schedule; `sys.set_segment(end)` selects the active
// drive terms, `observe(x, t)` is called at every sample.
template <class System, class Observe>
void integrate_schedule(System& sys, RealState& x, const Schedule& sch, const PropagationConfig& cfg, Observe&& observe) {
    namespace ode = boost::numeric::odeint;
    using Stepper = ode::runge_kutta_dopri5<RealState, double, RealState, double, ode::vector_space_algebra>;
    double t0 = 0.0;
    std::size_t next = 0;
    observe(x, 0.0);
    ++next;
    for (double t1 : sch.breakpoints) {
        sys.set_segment(t1);
        std::vector<double> times{t0};
        std::vector<char> is_sample{0};
        while (next < sch.samples.size() && sch.samples[next] <= t1 * (1.0 + 1e-12)) {
            times.push_back(sch.samples[next]);
            is_sample.push_back(1);
            ++next;
        }
        if (times.back() < t1) {
            times.push_back(t1);
            is_sample.push_back(0);
        }
        if (times.size() < 2) {
            t0 = t1;
            continue;
        }
        auto stepper = ode::make_dense_output(cfg.atol, cfg.rtol, Stepper());
        std::size_t k = 0;
        const double dt0 = std::min(0.01, 0.1 * (times[1] - times[0]));
        ode::integrate_times(stepper, std::ref(sys), x, times.begin(), times.end(), dt0,
                             [&](const RealState& s, double t) {
                                 if (k > 0 && is_sample[k]) observe(s, t);
                                 ++k;
                             },
                             ode::max_step_checker(10000000));
        t0 = t1;
    }
}

// Product-space data common to both propagators.
struct Problem {
    SpaceDescriptor space;
    std::vector<SparseMatrix> terms; // [0] static, then drives
    std::vector<Envelope> envelopes; // one per drive term
    RealVector frame;                // product-space frame (zeros in the Schroedinger picture)
};

inline Problem make_problem(const TimeDependentGenerator& gen, const Observables& obs, Picture picture) {
    Problem p;
    p.space = gen.space();
    obs.validate(p.space);
    p.terms.push_back(gen.static_part.sparse());
    for (const auto& d : gen.drive_terms) {
        require_same_space(d.op.space(), p.space, "generator");
        p.terms.push_back(d.op.sparse());
        p.envelopes.push_back(d.envelope);
    }
    const Index d1 = obs.s1.dim, d2 = obs.s2.dim;
    p.frame = RealVector::Zero(d1 * d2);
    if (picture == Picture::interaction)
        for (Index a = 0; a < d1; ++a)
            for (Index b = 0; b < d2; ++b) p.frame(a * d2 + b) = obs.s1.frame(a) + obs.s2.frame(b);
    return p;
}

inline std::vector<double> switch_offs(const Problem& p) {
    std::vector<double> s;
    for (const auto& e : p.envelopes)
        if (std::isfinite(e.switch_off)) s.push_back(e.switch_off);
    return s;
}

// Restricts product-space terms to a block; static part gets -F (and any extra static pieces).
inline BlockOperator restrict_terms(const Problem& p, const Sectors& s, Index block, const std::vector<SparseMatrix>& extra_static) {
    const auto& rows = s.blocks[static_cast<std::size_t>(block)];
    const auto dim = static_cast<Index>(rows.size());
    std::vector<std::vector<Triplet>> terms(p.terms.size());
    auto add = [&](const SparseMatrix& m, std::vector<Triplet>& out) {
        for_each_nonzero(m, [&](Index r, Index c, cplx v) {
            if (s.block_of[static_cast<std::size_t>(c)] != block) return;
            if (s.block_of[static_cast<std::size_t>(r)] != block)
                throw std::logic_error("sector decomposition: operator leaves its block");
            out.emplace_back(s.local_of[static_cast<std::size_t>(r)], s.local_of[static_cast<std::size_t>(c)], v);
        });
    };
    for (std::size_t k = 0; k < p.terms.size(); ++k) add(p.terms[k], terms[k]);
    for (const auto& m : extra_static) add(m, terms[0]);
    for (Index i = 0; i < dim; ++i) {
        const double f = p.frame(rows[static_cast<std::size_t>(i)]);
        if (f != 0.0) terms[0].emplace_back(i, i, cplx(-f));
    }
    return make_block_operator(dim, terms);
}

inline void check_leakage(double leak, double t, double tol) {
    if (leak > tol) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "truncation leakage %.3g exceeds %.3g at t = %.6g", leak, tol, t);
        throw TruncationError(buf, t, leak);
    }
}

// ----------------------------------------------------------------------------
// Pure-state system
// ----------------------------------------------------------------------------

struct PureSystem {
    BlockOperator h;
    std::vector<Envelope> envelopes;
    std::vector<char> active;
    RealVector frame; // block frame
    bool use_frame{false};
    std::vector<cplx> coeffs;
    Vector phase, work_in, work_out;

    void set_segment(double end) {
        active.assign(envelopes.size(), 0);
        for (std::size_t k = 0; k < envelopes.size(); ++k) active[k] = envelopes[k].switch_off >= end ? 1 : 0;
    }

    void operator()(const RealState& xr, RealState& dxr, double t) {
        const Index m = frame.size();
        const auto x = as_complex(xr, 0, m);
        auto dx = as_complex(dxr, 0, m);
        coeffs.assign(envelopes.size() + 1, cplx(0.0));
        coeffs[0] = 1.0;
        for (std::size_t k = 0; k < envelopes.size(); ++k)
            if (active[k]) coeffs[k + 1] = envelopes[k].ungated(t);
        h.assemble(coeffs);
        if (use_frame) {
            phase = (I * t * frame.cast<cplx>()).array().exp();
            work_in = phase.conjugate().cwiseProduct(x);
            h.multiply(work_in, work_out);
            dx = -I * phase.cwiseProduct(work_out);
        } else {
            h.multiply(x, work_out);
            dx = -I * work_out;
        }
    }
};

} // namespace detail

// Unitary evolution of psi0 under gen. Rows are sampled every dt_out, at t_max
// and at every drive switch-off.
inline TimeSeries evolve_pure(const TimeDependentGenerator& gen, const QuantumState& psi0, const PropagationConfig& cfg,
                              const Observables& obs_in) {
    Observables obs = obs_in;
    if (cfg.picture == Picture::schrodinger) obs.in_frame = false;
    cfg.validate();
    if (!psi0.is_pure()) throw std::invalid_argument("evolve_pure: initial state must be pure");
    require_same_space(psi0.space(), gen.space(), "evolve_pure");
    const detail::Problem p = detail::make_problem(gen, obs, cfg.picture);

    const Vector& v0 = psi0.vector();
    std::vector<Triplet> support;
    for (Index i = 0; i < v0.size(); ++i)
        if (v0(i) != cplx(0.0)) support.emplace_back(i, i, 1.0);
    SparseMatrix diag0(v0.size(), v0.size());
    diag0.setFromTriplets(support.begin(), support.end());
    // unitary dynamics: merge every touched component into a single block
    for (std::size_t k = 1; k < support.size(); ++k) support.emplace_back(support[0].row(), support[k].row(), 1.0);
    SparseMatrix rho0(v0.size(), v0.size());
    rho0.setFromTriplets(support.begin(), support.end());
    const detail::Sectors sec = detail::find_sectors(p.space.dim(), p.terms, {}, rho0);
    if (sec.blocks.size() != 1) throw std::logic_error("evolve_pure: expected one sector");

    detail::PureSystem sys;
    sys.h = detail::restrict_terms(p, sec, 0, {});
    sys.envelopes = p.envelopes;
    const auto& rows = sec.blocks[0];
    const auto m = static_cast<Index>(rows.size());
    sys.frame.resize(m);
    for (Index i = 0; i < m; ++i) sys.frame(i) = p.frame(rows[static_cast<std::size_t>(i)]);
    sys.use_frame = sys.frame.cwiseAbs().maxCoeff() > 0.0;

    detail::RealState x = detail::RealState::Zero(2 * m);
    {
        auto c = detail::as_complex(x, 0, m);
        for (Index i = 0; i < m; ++i) c(i) = v0(rows[static_cast<std::size_t>(i)]);
    }

    const detail::BlockIndex bi(rows, obs);
    const bool need1 = obs.wants("entropy_vn") || (obs.wants("n1") && !obs.s1.number_diagonal);
    const bool need2 = obs.wants("n2") && !obs.s2.number_diagonal;
    TimeSeries ts;
    ts.names = obs.columns;
    ts.columns.resize(obs.columns.size());
    double drift = 0.0;
    const auto schedule = detail::make_schedule(cfg.t_max, cfg.dt_out, detail::switch_offs(p));
    detail::integrate_schedule(sys, x, schedule, cfg, [&](const detail::RealState& s, double t) {
        const auto c = detail::as_complex(s, 0, m);
        detail::Reduction r;
        if (need1) r.rho1 = DenseMatrix::Zero(obs.s1.dim, obs.s1.dim);
        if (need2) r.rho2 = DenseMatrix::Zero(obs.s2.dim, obs.s2.dim);
        detail::reduce_pure(obs, bi, c, need1, need2, r);
        drift = std::max(drift, std::abs(std::sqrt(r.trace) - 1.0));
        if (drift > 1e-6) throw NumericalError("evolve_pure: norm drift " + std::to_string(drift) + " at t = " + std::to_string(t));
        detail::check_leakage(std::max(r.leak1, r.leak2), t, cfg.leakage_tol);
        const auto row = detail::finish_row(obs, r, t, true);
        ts.times.push_back(t);
        for (std::size_t k = 0; k < row.size(); ++k) ts.columns[k].push_back(row[k]);
    });
    ts.info["norm_drift"] = drift;
    ts.info["sector_dim"] = static_cast<double>(m);
    return ts;
}

// ----------------------------------------------------------------------------
// Lindblad propagation
// ----------------------------------------------------------------------------

namespace detail {

// rate * O rho_src O^dagger accumulated into rho_dst, one term per pair of
// nonzeros of O (jumps are very sparse, so this beats sparse-dense products).
struct Gain {
    Index src, dst;
    double rate;
    SparseMatrix op; // dst_dim x src_dim
    std::vector<Index> rows, cols;
    std::vector<cplx> vals;

    void prepare() {
        rows.clear();
        cols.clear();
        vals.clear();
        for_each_nonzero(op, [&](Index r, Index c, cplx v) {
            rows.push_back(r);
            cols.push_back(c);
            vals.push_back(v);
        });
    }

    template <class Src, class Dst>
    void accumulate(const Src& rho, Dst& out) const {
        const std::size_t n = vals.size();
        for (std::size_t q = 0; q < n; ++q) {
            const cplx wq = rate * std::conj(vals[q]);
            for (std::size_t p = 0; p < n; ++p) out(rows[p], rows[q]) += vals[p] * wq * rho(cols[p], cols[q]);
        }
    }
};

struct LindbladSystem {
    std::vector<BlockOperator> h; // effective non-Hermitian H - F per block
    std::vector<Index> dims, offsets;
    std::vector<RealVector> frames;
    std::vector<Gain> gains;
    std::vector<Envelope> envelopes;
    std::vector<char> active;
    bool use_frame{false};
    std::vector<cplx> coeffs;
    std::vector<DenseMatrix> lab, out;
    std::vector<Vector> phases;
    DenseMatrix kbuf;

    void set_segment(double end) {
        active.assign(envelopes.size(), 0);
        for (std::size_t k = 0; k < envelopes.size(); ++k) active[k] = envelopes[k].switch_off >= end ? 1 : 0;
    }

    Eigen::Map<const DenseMatrix> block(const RealState& x, std::size_t b) const {
        return Eigen::Map<const DenseMatrix>(reinterpret_cast<const cplx*>(x.data()) + offsets[b], dims[b], dims[b]);
    }
    Eigen::Map<DenseMatrix> block(RealState& x, std::size_t b) const {
        return Eigen::Map<DenseMatrix>(reinterpret_cast<cplx*>(x.data()) + offsets[b], dims[b], dims[b]);
    }

    void operator()(const RealState& xr, RealState& dxr, double t) {
        const std::size_t nb = h.size();
        coeffs.assign(envelopes.size() + 1, cplx(0.0));
        coeffs[0] = 1.0;
        for (std::size_t k = 0; k < envelopes.size(); ++k)
            if (active[k]) coeffs[k + 1] = envelopes[k].ungated(t);
        lab.resize(nb);
        out.resize(nb);
        phases.resize(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            const auto rho = block(xr, b);
            if (use_frame) {
                phases[b] = (I * t * frames[b].cast<cplx>()).array().exp();
                lab[b].noalias() = phases[b].conjugate().asDiagonal() * rho * phases[b].asDiagonal();
            } else {
                lab[b] = rho;
            }
            h[b].assemble(coeffs);
            h[b].multiply(lab[b], kbuf);
            out[b] = kbuf.adjoint();
            out[b] -= kbuf;
            out[b] *= I; // -i (K - K^dagger)
        }
        for (const auto& g : gains) g.accumulate(lab[static_cast<std::size_t>(g.src)], out[static_cast<std::size_t>(g.dst)]);
        for (std::size_t b = 0; b < nb; ++b) {
            auto d = block(dxr, b);
            if (use_frame) {
                d = phases[b].asDiagonal() * out[b] * phases[b].conjugate().asDiagonal();
            } else {
                d = out[b];
            }
        }
    }
};

} // namespace detail

// Lindblad evolution with D[O]rho = O rho O^dagger - {O^dagger O, rho}/2 per
// (jump, rate). rho0 may be pure (preferred for large spaces) or mixed.
inline TimeSeries evolve_lindblad(const TimeDependentGenerator& gen, const std::vector<Dissipator>& dissipators,
                                  const QuantumState& rho0, const PropagationConfig& cfg, const Observables& obs_in) {
    Observables obs = obs_in;
    if (cfg.picture == Picture::schrodinger) obs.in_frame = false;
    cfg.validate();
    require_same_space(rho0.space(), gen.space(), "evolve_lindblad");
    const detail::Problem p = detail::make_problem(gen, obs, cfg.picture);
    const Index dim = p.space.dim();

    std::vector<SparseMatrix> jumps;
    std::vector<double> rates;
    std::vector<SparseMatrix> decay; // -(i/2) rate O^dagger O
    for (const auto& d : dissipators) {
        require_same_space(d.jump.space(), p.space, "evolve_lindblad: jump operator");
        if (!(d.rate >= 0.0)) throw ConfigError("dissipator '" + d.label + "' has a negative rate");
        if (d.rate == 0.0) continue;
        SparseMatrix o = d.jump.sparse();
        o.prune(cplx(0.0));
        if (o.nonZeros() == 0) continue;
        decay.push_back(SparseMatrix((cplx(0.0, -0.5 * d.rate) * (SparseMatrix(o.adjoint()) * o)).pruned()));
        jumps.push_back(std::move(o));
        rates.push_back(d.rate);
    }

    SparseMatrix r0(dim, dim);
    if (rho0.is_pure()) {
        const Vector& v = rho0.vector();
        std::vector<Index> sup;
        for (Index i = 0; i < dim; ++i)
            if (v(i) != cplx(0.0)) sup.push_back(i);
        std::vector<Triplet> t;
        for (Index a : sup)
            for (Index b : sup) t.emplace_back(a, b, v(a) * std::conj(v(b)));
        r0.setFromTriplets(t.begin(), t.end());
    } else {
        r0 = rho0.density().sparseView(cplx(0.0), 0.0);
    }
    const detail::Sectors sec = detail::find_sectors(dim, p.terms, jumps, r0);

    detail::LindbladSystem sys;
    sys.envelopes = p.envelopes;
    Index total = 0;
    for (std::size_t b = 0; b < sec.blocks.size(); ++b) {
        const auto n = static_cast<Index>(sec.blocks[b].size());
        sys.dims.push_back(n);
        sys.offsets.push_back(total);
        total += n * n;
        sys.h.push_back(detail::restrict_terms(p, sec, static_cast<Index>(b), decay));
        RealVector f(n);
        for (Index i = 0; i < n; ++i) f(i) = p.frame(sec.blocks[b][static_cast<std::size_t>(i)]);
        sys.use_frame = sys.use_frame || f.cwiseAbs().maxCoeff() > 0.0;
        sys.frames.push_back(std::move(f));
    }
    for (std::size_t j = 0; j < jumps.size(); ++j) {
        std::map<std::pair<Index, Index>, std::vector<Triplet>> parts;
        detail::for_each_nonzero(jumps[j], [&](Index r, Index c, cplx v) {
            const Index sb = sec.block_of[static_cast<std::size_t>(c)];
            if (sb < 0) return;
            const Index tb = sec.block_of[static_cast<std::size_t>(r)];
            parts[{sb, tb}].emplace_back(sec.local_of[static_cast<std::size_t>(r)], sec.local_of[static_cast<std::size_t>(c)], v);
        });
        for (auto& [key, trips] : parts) {
            SparseMatrix op(sys.dims[static_cast<std::size_t>(key.second)], sys.dims[static_cast<std::size_t>(key.first)]);
            op.setFromTriplets(trips.begin(), trips.end());
            sys.gains.push_back({key.first, key.second, rates[j], std::move(op), {}, {}, {}});
            sys.gains.back().prepare();
        }
    }

    detail::RealState x = detail::RealState::Zero(2 * total);
    detail::for_each_nonzero(r0, [&](Index r, Index c, cplx v) {
        const Index b = sec.block_of[static_cast<std::size_t>(r)];
        sys.block(x, static_cast<std::size_t>(b))(sec.local_of[static_cast<std::size_t>(r)], sec.local_of[static_cast<std::size_t>(c)]) = v;
    });

    std::vector<detail::BlockIndex> bis;
    for (const auto& rows : sec.blocks) bis.emplace_back(rows, obs);
    const bool need1 = obs.wants("entropy_vn") || (obs.wants("n1") && !obs.s1.number_diagonal);
    const bool need2 = obs.wants("n2") && !obs.s2.number_diagonal;

    TimeSeries ts;
    ts.names = obs.columns;
    ts.columns.resize(obs.columns.size());
    double drift = 0.0, herm = 0.0, min_eig = 0.0;
    Index positivity_budget = 0;
    for (Index n : sys.dims) positivity_budget += n * n * n;
    const bool check_every_sample = positivity_budget < 2000000;
    auto positivity = [&](const detail::RealState& s, double t) {
        for (std::size_t b = 0; b < sys.dims.size(); ++b) {
            const DenseMatrix blk = sys.block(s, b);
            Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (blk + blk.adjoint()), Eigen::EigenvaluesOnly);
            min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        }
        if (min_eig < -1e-6)
            throw NumericalError("evolve_lindblad: density matrix eigenvalue " + std::to_string(min_eig) + " at t = " + std::to_string(t));
    };
    const auto schedule = detail::make_schedule(cfg.t_max, cfg.dt_out, detail::switch_offs(p));
    detail::integrate_schedule(sys, x, schedule, cfg, [&](const detail::RealState& s, double t) {
        detail::Reduction r;
        if (need1) r.rho1 = DenseMatrix::Zero(obs.s1.dim, obs.s1.dim);
        if (need2) r.rho2 = DenseMatrix::Zero(obs.s2.dim, obs.s2.dim);
        for (std::size_t b = 0; b < sys.dims.size(); ++b) {
            const auto blk = sys.block(s, b);
            herm = std::max(herm, sys.dims[b] ? (blk - blk.adjoint()).cwiseAbs().maxCoeff() : 0.0);
            const DenseMatrix sym = 0.5 * (blk + blk.adjoint());
            detail::reduce_mixed(obs, bis[b], sym, need1, need2, r);
        }
        drift = std::max(drift, std::abs(r.trace - 1.0));
        if (drift > 1e-6) throw NumericalError("evolve_lindblad: trace drift " + std::to_string(drift) + " at t = " + std::to_string(t));
        detail::check_leakage(std::max(r.leak1, r.leak2), t, cfg.leakage_tol);
        const bool at_break = std::find(schedule.breakpoints.begin(), schedule.breakpoints.end(), t) != schedule.breakpoints.end();
        if (check_every_sample || at_break) positivity(s, t);
        const auto row = detail::finish_row(obs, r, t, false);
        ts.times.push_back(t);
        for (std::size_t k = 0; k < row.size(); ++k) ts.columns[k].push_back(row[k]);
    });
    ts.info["trace_drift"] = drift;
    ts.info["hermiticity_residual"] = herm;
    ts.info["min_eigenvalue"] = min_eig;
    ts.info["blocks"] = static_cast<double>(sys.dims.size());
    ts.info["sector_dim"] = static_cast<double>(total);
    return ts;
}

// Pure evolution of a static ladder Hamiltonian; observables are evaluated on
// the product-space image of the ladder state, leakage on the top two rungs.
// The ladder Hamiltonian is switched off at t_switch_off.
inline TimeSeries evolve_ladder(const OperatorMatrix& hamiltonian, const SparseMatrix& mapping, const Vector& c0,
                                const PropagationConfig& cfg, const Observables& obs,
                                double t_switch_off = std::numeric_limits<double>::infinity()) {
    cfg.validate();
    const Index n = hamiltonian.dim();
    if (mapping.cols() != n || c0.size() != n) throw std::invalid_argument("evolve_ladder: size mismatch");
    if (obs.s1.dim * obs.s2.dim != mapping.rows()) throw std::invalid_argument("evolve_ladder: views do not match mapping");
    for (const auto& c : obs.columns)
        if (std::find(known_columns().begin(), known_columns().end(), c) == known_columns().end())
            throw ConfigError("unknown output column '" + c + "'");

    // rows touched by the mapping
    std::vector<Index> rows;
    detail::for_each_nonzero(mapping, [&](Index r, Index, cplx) { rows.push_back(r); });
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    std::vector<Triplet> t;
    detail::for_each_nonzero(mapping, [&](Index r, Index c, cplx v) {
        t.emplace_back(std::lower_bound(rows.begin(), rows.end(), r) - rows.begin(), c, v);
    });
    SparseMatrix mr(static_cast<Index>(rows.size()), n);
    mr.setFromTriplets(t.begin(), t.end());

    detail::PureSystem sys;
    std::vector<Triplet> tr;
    detail::for_each_nonzero(hamiltonian.sparse(), [&](Index r, Index c, cplx v) { tr.emplace_back(r, c, v); });
    sys.h = detail::make_block_operator(n, {{}, tr});
    sys.envelopes = {Envelope::constant(1.0, t_switch_off)};
    sys.frame = RealVector::Zero(n);
    detail::RealState x = detail::RealState::Zero(2 * n);
    detail::as_complex(x, 0, n) = c0;

    const detail::BlockIndex bi(rows, obs);
    const bool need1 = obs.wants("entropy_vn") || (obs.wants("n1") && !obs.s1.number_diagonal);
    const bool need2 = obs.wants("n2") && !obs.s2.number_diagonal;
    TimeSeries ts;
    ts.names = obs.columns;
    ts.columns.resize(obs.columns.size());
    double drift = 0.0;
    const auto schedule = detail::make_schedule(cfg.t_max, cfg.dt_out, {t_switch_off});
    detail::integrate_schedule(sys, x, schedule, cfg, [&](const detail::RealState& s, double tt) {
        const auto c = detail::as_complex(s, 0, n);
        const Vector amp = mr * c;
        detail::Reduction r;
        if (need1) r.rho1 = DenseMatrix::Zero(obs.s1.dim, obs.s1.dim);
        if (need2) r.rho2 = DenseMatrix::Zero(obs.s2.dim, obs.s2.dim);
        detail::reduce_pure(obs, bi, amp, need1, need2, r);
        drift = std::max(drift, std::abs(std::sqrt(r.trace) - 1.0));
        if (drift > 1e-6) throw NumericalError("evolve_ladder: norm drift " + std::to_string(drift));
        const double leak = std::norm(c(n - 1)) + std::norm(c(n - 2));
        detail::check_leakage(leak, tt, cfg.leakage_tol);
        r.leak1 = r.leak2 = leak;
        const auto row = detail::finish_row(obs, r, tt, true);
        ts.times.push_back(tt);
        for (std::size_t k = 0; k < row.size(); ++k) ts.columns[k].push_back(row[k]);
    });
    ts.info["norm_drift"] = drift;
    ts.info["sector_dim"] = static_cast<double>(n);
    return ts;
}

} // namespace dce
