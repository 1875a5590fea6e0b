#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "shiftmod.hpp"

namespace entl {

enum class Certificate { TrajectoryStabilized, AlphaZero, ClosedForm, AutoFormula, BoundsOnly };

inline std::string_view to_string(Certificate c) {
    switch (c) {
    case Certificate::TrajectoryStabilized: return "TrajectoryStabilized";
    case Certificate::AlphaZero: return "AlphaZero";
    case Certificate::ClosedForm: return "ClosedForm";
    case Certificate::AutoFormula: return "AutoFormula";
    case Certificate::BoundsOnly: return "BoundsOnly";
    }
    return "?";
}

/// Certified exact value or sound bracket [lower, upper].
struct EntropyResult {
    LengthValue lower, upper;
    std::optional<LengthValue> exact;
    Certificate certificate = Certificate::BoundsOnly;
    std::string kind; // closed-form kind, when relevant
    std::size_t steps_used = 0;

    static EntropyResult exact_value(const LengthValue& v, Certificate c, std::size_t steps, std::string kind = "") {
        EntropyResult r;
        r.lower = r.upper = v;
        r.exact = v;
        r.certificate = c;
        r.kind = std::move(kind);
        r.steps_used = steps;
        return r;
    }
    static EntropyResult bounds(const LengthValue& lo, const LengthValue& hi, std::size_t steps) {
        EntropyResult r;
        r.lower = lo;
        r.upper = hi;
        r.steps_used = steps;
        return r;
    }
    bool is_exact() const { return exact.has_value(); }
};

/// Internal invariant violation (never an input problem).
inline void invariant(bool cond, const std::string& what) {
    if (!cond) throw std::logic_error("invariant violated: " + what);
}

template <class R>
struct EndoSystem {
    LengthId length = LengthId::LogCard;
    std::variant<Morphism<R>, FamilySystem<R>> body;

    static EndoSystem fp(Morphism<R> phi, LengthId l) {
        require(phi.is_endo(), ErrorKind::InvalidInput, "endo must map the module to itself");
        check_pair(l, phi.source().engine());
        return {l, std::move(phi)};
    }
    static EndoSystem family(FamilySystem<R> fs, LengthId l) {
        check_pair(l, fs.family.engine());
        validate_endo(fs.family, fs.endo);
        return {l, std::move(fs)};
    }

    bool is_family() const { return std::holds_alternative<FamilySystem<R>>(body); }
    const Morphism<R>& map() const { return std::get<Morphism<R>>(body); }
    const FamilySystem<R>& fam() const { return std::get<FamilySystem<R>>(body); }
    const ModPtr<R>& module() const { return map().source_ptr(); }
};

/// Graded seed: whole components plus individual elements.
template <class R>
struct Seed {
    using E = typename R::Element;
    struct Element {
        Pos pos;
        std::vector<E> coords;
    };
    std::vector<Pos> whole;
    std::vector<Element> elements;

    static Seed components(std::vector<Pos> ps) { return {std::move(ps), {}}; }
    static Seed component(Pos p) { return {{p}, {}}; }
    static Seed element(Pos p, std::vector<E> v) { return {{}, {Element{p, std::move(v)}}}; }

    std::pair<Pos, Pos> support() const {
        require(!whole.empty() || !elements.empty(), ErrorKind::InvalidInput, "empty seed");
        Pos lo{std::numeric_limits<long>::max(), std::numeric_limits<long>::max()};
        Pos hi{std::numeric_limits<long>::min(), std::numeric_limits<long>::min()};
        auto upd = [&](Pos p) {
            lo.i = std::min(lo.i, p.i);
            lo.j = std::min(lo.j, p.j);
            hi.i = std::max(hi.i, p.i);
            hi.j = std::max(hi.j, p.j);
        };
        for (auto p : whole) upd(p);
        for (auto& e : elements) upd(e.pos);
        return {lo, hi};
    }
};

/// A family system materialised on a window large enough for `steps` exact steps.
template <class R>
struct Prepared {
    Window<R> window;
    Morphism<R> phi;
    Submodule<R> seed;
    std::size_t steps = 0;
};

/// Window covering support + steps*d, with every map applied during `steps`
/// trajectory extensions landing inside it.
template <class R>
std::pair<Pos, Pos> window_bounds(const ShiftFamily<R>& fam, const std::vector<const BandedEndo<R>*>& endos,
                                  Pos lo, Pos hi, std::size_t steps) {
    long s = static_cast<long>(steps);
    for (auto* e : endos) {
        long fi = 0, bi = 0, fj = 0, bj = 0;
        for (auto& b : e->bands) {
            fi = std::max(fi, b.offset.i);
            bi = std::max(bi, -b.offset.i);
            fj = std::max(fj, b.offset.j);
            bj = std::max(bj, -b.offset.j);
        }
        lo.i -= s * bi;
        hi.i += s * fi;
        lo.j -= s * bj;
        hi.j += s * fj;
    }
    if (fam.index() == IndexKind::Nat) lo.i = std::max(lo.i, fam.first());
    if (fam.index() == IndexKind::Grid2) {
        lo.i = std::max(lo.i, 0L);
        lo.j = std::max(lo.j, 0L);
    }
    return {lo, hi};
}

template <class R>
Window<R> window_for(const ShiftFamily<R>& fam, Pos lo, Pos hi) {
    if (fam.index() == IndexKind::Grid2) return window_box(fam, lo.i, hi.i, lo.j, hi.j);
    return window_range(fam, lo.i, hi.i);
}

template <class R>
Submodule<R> seed_in_window(const Window<R>& w, const Seed<R>& seed) {
    Matrix<typename R::Element> rows(0, w.module->generators());
    for (Pos p : seed.whole) rows.append_rows(w.component_rows(p));
    for (auto& e : seed.elements) rows.append_row(w.embed(e.pos, e.coords));
    return Submodule<R>::generated(w.module, rows);
}

template <class R>
Prepared<R> prepare(const FamilySystem<R>& fs, const Seed<R>& seed, std::size_t steps) {
    auto [lo, hi] = seed.support();
    for (auto p : seed.whole) require(fs.family.in_domain(p), ErrorKind::InvalidInput, "seed grade outside the index set");
    for (auto& e : seed.elements)
        require(fs.family.in_domain(e.pos), ErrorKind::InvalidInput, "seed grade outside the index set");
    auto [wlo, whi] = window_bounds(fs.family, {&fs.endo}, lo, hi, steps);
    Prepared<R> p;
    p.window = window_for(fs.family, wlo, whi);
    p.phi = truncate_endo(p.window, fs.family, fs.endo);
    p.seed = seed_in_window(p.window, seed);
    p.steps = steps;
    return p;
}

/// T_k for k = 0..n+1 together with alpha_k = L(T_{k+1}/T_k).
template <class R>
struct TrajectoryRun {
    std::vector<Submodule<R>> T;     // T[0] = 0, T[1] = S
    std::vector<LengthValue> length; // L(T_k)
    std::vector<LengthValue> alpha;  // alpha[k] = L(T_{k+1}/T_k); alpha[0] = L(T_1)
    std::optional<std::size_t> stable_at;

    std::size_t steps() const { return alpha.size() - 1; }
};

/// Extends the trajectory n times. Stops extending after stabilisation
/// (T_{k+1} = T_k is permanent because phi(T_k) <= T_{k+1}) and pads with copies.
template <class R>
TrajectoryRun<R> run_trajectory(const Morphism<R>& phi, const Submodule<R>& s, LengthId l, std::size_t n) {
    using E = typename R::Element;
    require(same_module(s.ambient_ptr(), phi.source_ptr()), ErrorKind::AmbientMismatch, "seed not in the module");
    TrajectoryRun<R> run;
    run.T.push_back(Submodule<R>::zero(s.ambient_ptr()));
    run.T.push_back(s);
    run.length.push_back(LengthValue::zero());
    LengthValue ls = length(l, s);
    require(ls.is_finite(), ErrorKind::NotLFinite, "seed has infinite length");
    run.length.push_back(ls);
    run.alpha.push_back(ls);
    Matrix<E> frontier = s.generators();
    for (std::size_t k = 1; k <= n; ++k) {
        if (run.stable_at) {
            run.T.push_back(run.T.back());
            run.length.push_back(run.length.back());
            run.alpha.push_back(LengthValue::zero());
            continue;
        }
        Matrix<E> next(0, phi.target().generators());
        for (std::size_t i = 0; i < frontier.rows(); ++i) next.append_row(phi.apply(frontier.row(i)));
        frontier = std::move(next);
        Matrix<E> rows = run.T.back().lattice().basis;
        rows.append_rows(frontier);
        auto t = Submodule<R>::from_lattice(s.ambient_ptr(), echelon<R>(std::move(rows)));
        LengthValue a = quotient_length(l, t, run.T.back());
        if (t == run.T.back()) run.stable_at = k;
        run.alpha.push_back(a);
        run.length.push_back(lv_add(run.length.back(), a));
        run.T.push_back(std::move(t));
        invariant(lv_compare(run.alpha[k], run.alpha[k - 1]) <= 0, "alpha sequence must be non-increasing");
    }
    return run;
}

/// min over computed n of alpha_n and L(T_n)/n.
template <class R>
LengthValue upper_from(const TrajectoryRun<R>& run) {
    LengthValue best = LengthValue::infinity();
    for (std::size_t k = 1; k < run.alpha.size(); ++k) best = lv_min(best, run.alpha[k]);
    for (std::size_t k = 1; k < run.length.size(); ++k)
        if (run.length[k].is_finite()) best = lv_min(best, lv_scale(run.length[k], Rational(1, static_cast<long>(k))));
    return best;
}

template <class R>
struct AlphaSequence {
    std::vector<LengthValue> alpha;   // alpha_1 .. alpha_n
    std::vector<LengthValue> lengths; // L(T_1) .. L(T_{n+1})
};

template <class R>
AlphaSequence<R> to_alpha(const TrajectoryRun<R>& run) {
    AlphaSequence<R> a;
    a.alpha.assign(run.alpha.begin() + 1, run.alpha.end());
    a.lengths.assign(run.length.begin() + 1, run.length.end());
    return a;
}

/// Seed given either as a submodule of an f.p. ambient or as a graded seed.
template <class R>
using SeedArg = std::variant<Submodule<R>, Seed<R>>;

template <class R>
struct Materialised {
    Morphism<R> phi;
    Submodule<R> seed;
    std::optional<Window<R>> window;
};

template <class R>
Materialised<R> materialise(const EndoSystem<R>& sys, const SeedArg<R>& seed, std::size_t steps) {
    if (!sys.is_family()) {
        require(std::holds_alternative<Submodule<R>>(seed), ErrorKind::InvalidInput, "f.p. systems take a submodule seed");
        return {sys.map(), std::get<Submodule<R>>(seed), std::nullopt};
    }
    require(std::holds_alternative<Seed<R>>(seed), ErrorKind::InvalidInput, "shift families take a graded seed");
    auto p = prepare(sys.fam(), std::get<Seed<R>>(seed), steps);
    return {p.phi, p.seed, p.window};
}

/// T_n(phi, S); for families the result lives in a window that contains it exactly.
template <class R>
std::pair<Submodule<R>, std::optional<Window<R>>> trajectory(const EndoSystem<R>& sys, const SeedArg<R>& seed, std::size_t n) {
    require(n >= 1, ErrorKind::InvalidInput, "trajectory index starts at 1");
    auto m = materialise(sys, seed, n - 1);
    auto run = run_trajectory(m.phi, m.seed, sys.length, n - 1);
    return {run.T[n], m.window};
}

template <class R>
AlphaSequence<R> alpha_seq(const EndoSystem<R>& sys, const SeedArg<R>& seed, std::size_t n_max) {
    auto m = materialise(sys, seed, n_max);
    return to_alpha(run_trajectory(m.phi, m.seed, sys.length, n_max));
}

/// True when the seed is exactly the sum of whole components over a contiguous
/// grade range [a, b] (1D families).
template <class R>
std::optional<std::pair<long, long>> whole_component_range(const Window<R>& w, const Submodule<R>& seed,
                                                           const ShiftFamily<R>& fam, Pos lo, Pos hi) {
    if (fam.index() == IndexKind::Grid2) {
        if (lo != hi) return std::nullopt;
        auto whole = Submodule<R>::generated(w.module, w.component_rows(lo));
        if (!(whole == seed)) return std::nullopt;
        return std::make_pair(lo.i, lo.i);
    }
    Matrix<typename R::Element> rows(0, w.module->generators());
    for (long i = lo.i; i <= hi.i; ++i) rows.append_rows(w.component_rows({i, 0}));
    auto whole = Submodule<R>::generated(w.module, rows);
    if (!(whole == seed)) return std::nullopt;
    return std::make_pair(lo.i, hi.i);
}

/// Whether ent(phi, S) equals the closed-form family value: S is a block of
/// whole components whose trajectory is the invariant tail M_{>=a} (N index,
/// forward maps only, block reaching the periodic tail) or a half-line (Z index).
template <class R>
bool closed_form_applies(const FamilySystem<R>& fs, const Recognition& rec, std::pair<long, long> range) {
    const auto& fam = fs.family;
    if (fam.index() == IndexKind::Int) return true;
    if (fam.index() != IndexKind::Nat) return false;
    for (auto& b : fs.endo.bands)
        if (b.offset.i < 0) {
            for (auto& m : b.prefix)
                if (!is_zero_matrix<R>(m)) return false;
            for (auto& m : b.periodic)
                if (!is_zero_matrix<R>(m)) return false;
        }
    return range.second >= rec.tail_from;
}

template <class R>
EntropyResult entropy_of(const EndoSystem<R>& sys, const SeedArg<R>& seed, std::size_t budget) {
    auto m = materialise(sys, seed, budget);
    auto run = run_trajectory(m.phi, m.seed, sys.length, budget);
    const LengthValue upper = upper_from(run);
    const std::size_t used = run.stable_at ? *run.stable_at : budget;
    if (run.stable_at) return EntropyResult::exact_value(LengthValue::zero(), Certificate::TrajectoryStabilized, used);
    for (std::size_t k = 1; k < run.alpha.size(); ++k)
        if (run.alpha[k].is_zero()) return EntropyResult::exact_value(LengthValue::zero(), Certificate::AlphaZero, k);
    if (!sys.is_family()) {
        // An L-finite seed stays inside the largest L-finite submodule, which is
        // f.p. of finite length; L(T_n) is bounded, so the entropy vanishes.
        return EntropyResult::exact_value(LengthValue::zero(), Certificate::ClosedForm, used, "finite-length");
    }
    const auto& fs = sys.fam();
    if (auto rec = recognize(fs.family, fs.endo); rec && fs.family.components_L_finite(sys.length)) {
        auto [lo, hi] = std::get<Seed<R>>(seed).support();
        auto range = whole_component_range(*m.window, m.seed, fs.family, lo, hi);
        if (range && closed_form_applies(fs, *rec, *range)) {
            LengthValue v = closed_form_value(sys.length, fs.family, fs.endo);
            invariant(lv_compare(v, upper) <= 0, "closed form exceeds a computed upper bound");
            return EntropyResult::exact_value(v, Certificate::ClosedForm, used, std::string(to_string(rec->kind)));
        }
    }
    return EntropyResult::bounds(LengthValue::zero(), upper, used);
}

/// Sound upper bound for the entropy of a banded family: support grows by at
/// most (forward + backward width) grades per step.
template <class R>
LengthValue family_upper_bound(const FamilySystem<R>& fs, LengthId l) {
    long w = fs.endo.forward_width() + fs.endo.backward_width();
    LengthValue sup = fs.family.component_sup(l);
    if (w == 0 || sup.is_zero()) return LengthValue::zero();
    return sup.is_infinite() ? sup : lv_scale(sup, Rational(w));
}

template <class R>
EntropyResult entropy(const EndoSystem<R>& sys, std::size_t budget, bool force = false) {
    const LengthId l = sys.length;
    if (!sys.is_family()) {
        const auto& m = sys.module();
        require(force || is_locally_L_finite(l, *m), ErrorKind::NotLocallyFinite, "module is not locally L-finite");
        return entropy_of(sys, SeedArg<R>(torsion_submodule(l, m)), budget);
    }
    const auto& fs = sys.fam();
    const bool lfin = fs.family.components_L_finite(l);
    require(force || lfin, ErrorKind::NotLocallyFinite, "family is not locally L-finite");
    if (auto rec = recognize(fs.family, fs.endo)) {
        LengthValue v = closed_form_value(l, fs.family, fs.endo, force);
        if (lfin) {
            // Cross-check against the alpha bound of a seed covering the head.
            long a = fs.family.index() == IndexKind::Nat ? fs.family.first() : 0;
            long b = fs.family.index() == IndexKind::Nat ? rec->tail_from : 0;
            std::vector<Pos> ps;
            for (long i = a; i <= b; ++i) ps.push_back({i, 0});
            auto r = entropy_of(sys, SeedArg<R>(Seed<R>::components(ps)), std::min<std::size_t>(budget, 8));
            invariant(lv_compare(r.lower, v) <= 0 && lv_compare(v, r.upper) <= 0,
                      "closed form outside the computed bracket");
        }
        return EntropyResult::exact_value(v, Certificate::ClosedForm, 0, std::string(to_string(rec->kind)));
    }
    LengthValue upper = family_upper_bound(fs, l);
    if (upper.is_zero()) return EntropyResult::exact_value(upper, Certificate::ClosedForm, 0, "bounded-support");
    LengthValue lower;
    std::size_t used = 0;
    if (lfin && fs.family.index() != IndexKind::Grid2) {
        long a = fs.family.index() == IndexKind::Nat ? fs.family.first() : 0;
        for (long k = 0; k < 3; ++k) {
            std::vector<Pos> ps;
            for (long i = a; i <= a + k; ++i) ps.push_back({i, 0});
            auto r = entropy_of(sys, SeedArg<R>(Seed<R>::components(ps)), budget);
            used = std::max(used, r.steps_used);
            lower = lv_max(lower, r.lower);
        }
    }
    return EntropyResult::bounds(lower, upper, used);
}

/// J_n = {r : phi^n(x) r in T_n(phi, xR)} and the cross-check L(R/J_n) = alpha_n.
template <class R>
struct ColonChain {
    std::vector<typename R::Ideal> J;
    std::vector<LengthValue> cyclic;  // L(R/J_n)
    std::vector<LengthValue> alpha;   // alpha_n (alpha_0 = L(xR))
    bool consistent = true;
};

/// An element generating the cyclic submodule s: a basis row, their sum, or a
/// small combination of the rows.
template <class R>
std::vector<typename R::Element> cyclic_generator(const Submodule<R>& s) {
    using E = typename R::Element;
    auto gens = s.generators();
    const auto& amb = s.ambient_ptr();
    auto generates = [&](const std::vector<E>& v) {
        Matrix<E> r(0, amb->generators());
        r.append_row(v);
        return Submodule<R>::generated(amb, r) == s;
    };
    for (std::size_t i = 0; i < gens.rows(); ++i) {
        std::vector<E> v(gens.row(i).begin(), gens.row(i).end());
        if (generates(v)) return v;
    }
    std::mt19937_64 rng(gens.rows());
    for (int t = 0; t < 64; ++t) {
        std::vector<E> v(amb->generators(), R::zero());
        for (std::size_t i = 0; i < gens.rows(); ++i) {
            long c = t == 0 ? 1 : std::uniform_int_distribution<long>(0, 6)(rng);
            for (std::size_t k = 0; k < v.size(); ++k) v[k] = R::add(v[k], R::mul(R::from_integer(Integer(c)), gens(i, k)));
        }
        if (generates(v)) return v;
    }
    fail(ErrorKind::InvalidInput, "colon chains need a cyclic seed");
}

template <class R>
ColonChain<R> colon_chain(const EndoSystem<R>& sys, const SeedArg<R>& x, std::size_t n_max) {
    auto m = materialise(sys, x, n_max);
    const auto& amb = m.seed.ambient_ptr();
    auto gens = m.seed.generators();
    std::vector<typename R::Element> y;
    if (gens.rows() == 0) y.assign(amb->generators(), R::zero());
    else if (std::holds_alternative<Submodule<R>>(x)) y = cyclic_generator(m.seed);
    if (std::holds_alternative<Seed<R>>(x)) {
        const auto& sd = std::get<Seed<R>>(x);
        if (sd.elements.size() == 1 && sd.whole.empty()) y = m.window->embed(sd.elements[0].pos, sd.elements[0].coords);
        else if (sd.whole.size() == 1 && sd.elements.empty()) {
            auto rows = m.window->component_rows(sd.whole[0]);
            require(rows.rows() == 1, ErrorKind::InvalidInput, "colon chains need a cyclic seed");
            y.assign(rows.row(0).begin(), rows.row(0).end());
        } else fail(ErrorKind::InvalidInput, "colon chains need a single seed element");
    }
    auto xs = Submodule<R>::generated(amb, [&] {
        Matrix<typename R::Element> r(0, amb->generators());
        r.append_row(y);
        return r;
    }());
    auto run = run_trajectory(m.phi, xs, sys.length, n_max);
    ColonChain<R> out;
    std::vector<typename R::Element> cur = y;
    for (std::size_t n = 0; n <= n_max; ++n) {
        auto q = quotient(*amb, run.T[n]);
        auto j = annihilator(q, cur);
        out.J.push_back(j);
        out.cyclic.push_back(cyclic_length(sys.length, amb->engine(), j));
        out.alpha.push_back(run.alpha[n]);
        if (!(out.cyclic.back() == out.alpha.back())) out.consistent = false;
        cur = m.phi.apply(cur);
    }
    return out;
}

/// Ker_inf(phi) and the reduced system on M / Ker_inf(phi).
template <class R>
struct HyperkernelResult {
    EndoSystem<R> reduced;
    bool final = false;
    std::size_t steps = 0;
    LengthValue kernel_length;
    std::string description;
    std::optional<Submodule<R>> kernel;
    std::optional<Window<R>> window;
};

/// Ker(phi^n) inside an invariant submodule W, iterated until it stops growing.
template <class R>
std::pair<Submodule<R>, bool> kernel_chain(const Morphism<R>& phi, const Submodule<R>& w, std::size_t cap, std::size_t& steps) {
    auto k = Submodule<R>::zero(phi.source_ptr());
    for (steps = 0; steps < cap; ++steps) {
        auto next = sub_intersection(w, preimage(phi, k));
        if (next == k) return {k, true};
        k = std::move(next);
    }
    return {k, false};
}

template <class R>
HyperkernelResult<R> hyperkernel_reduce(const EndoSystem<R>& sys, std::size_t cap) {
    HyperkernelResult<R> out;
    const LengthId l = sys.length;
    if (!sys.is_family()) {
        const auto& phi = sys.map();
        auto whole = Submodule<R>::whole(phi.source_ptr());
        auto [k, fin] = kernel_chain(phi, whole, cap, out.steps);
        out.final = fin;
        out.kernel_length = length(l, k);
        auto q = share(quotient(phi.source(), k));
        Morphism<R> induced(q, q, phi.images());
        if (fin) invariant(is_injective(induced), "induced map on M/Ker_inf must be injective");
        out.reduced = EndoSystem<R>::fp(induced, l);
        out.kernel = k;
        out.description = "Ker_inf has length " + out.kernel_length.to_string();
        return out;
    }
    const auto& fs = sys.fam();
    const auto& fam = fs.family;
    if (fam.index() == IndexKind::Int) {
        auto rec = recognize(fam, fs.endo);
        require(rec.has_value(), ErrorKind::NotRecognized, "hyperkernel of this Z-indexed family");
        out.reduced = sys;
        out.final = true;
        out.description = "bijective shift: Ker_inf = 0";
        return out;
    }
    require(fam.index() == IndexKind::Nat && fam.constant_tail(), ErrorKind::NotRecognized,
            "hyperkernel needs an N-indexed family with a constant tail");
    const long d = fs.endo.forward_width();
    require(d >= 1, ErrorKind::NotRecognized, "hyperkernel needs a forward band");
    const long p0 = std::max(fam.tail_start(), fs.endo.periodic_from(fam));
    const long last = p0 + fs.endo.period() - 1;
    // Grades whose top-offset map is not injective; the tail must have none.
    long p = fam.first();
    for (long i = fam.first(); i <= last; ++i) {
        bool inj = false;
        for (auto& b : fs.endo.bands)
            if (b.offset.i == d) inj = is_injective(band_map(fam, b, Pos{i, 0}));
        if (!inj) {
            require(i < p0, ErrorKind::NotRecognized, "top band not injective on the periodic tail");
            p = i + 1;
        }
    }
    if (p == fam.first()) {
        out.reduced = sys;
        out.final = true;
        out.kernel_length = LengthValue::zero();
        out.description = "top band injective everywhere: Ker_inf = 0";
        return out;
    }
    // Ker_inf lies in the head H = grades < p, inside its largest invariant part W.
    Window<R> w = window_range(fam, fam.first(), p - 1 + d);
    Morphism<R> phi = truncate_endo(w, fam, fs.endo);
    Matrix<typename R::Element> hrows(0, w.module->generators());
    for (long i = fam.first(); i < p; ++i) hrows.append_rows(w.component_rows({i, 0}));
    auto inv = Submodule<R>::generated(w.module, hrows);
    std::size_t it = 0;
    for (; it < cap; ++it) {
        auto next = sub_intersection(inv, preimage(phi, inv));
        if (next == inv) break;
        inv = std::move(next);
    }
    require(it < cap, ErrorKind::CapExceeded, "invariant head did not settle within the cap");
    auto [k, fin] = kernel_chain(phi, inv, cap, out.steps);
    out.final = fin;
    out.kernel_length = length(l, k);
    // Split K by grade; the reduced family needs K = sum of its grade pieces.
    std::vector<FPModule<R>> prefix;
    Matrix<typename R::Element> pieces(0, w.module->generators());
    const long new_prefix_end = std::max(fam.tail_start(), p);
    for (long i = fam.first(); i < new_prefix_end; ++i) {
        FPModule<R> c = fam.component({i, 0});
        if (i >= p) {
            prefix.push_back(c);
            continue;
        }
        auto ci = Submodule<R>::generated(w.module, w.component_rows({i, 0}));
        auto ki = sub_intersection(k, ci);
        Matrix<typename R::Element> local(0, c.generators());
        for (std::size_t r = 0; r < ki.lattice().rank(); ++r) {
            pieces.append_row(ki.lattice().basis.row(r));
            local.append_row(w.project({i, 0}, ki.lattice().basis.row(r)));
        }
        Matrix<typename R::Element> rel = c.relations().basis;
        rel.set_cols_if_empty(c.generators());
        rel.append_rows(local);
        prefix.push_back(FPModule<R>(c.engine(), c.generators(), rel));
    }
    require(Submodule<R>::generated(w.module, pieces) == k, ErrorKind::NotRecognized,
            "hyperkernel is not a sum of homogeneous pieces");
    ShiftFamily<R> rf(fam.engine(), IndexKind::Nat, fam.first(), std::move(prefix), fam.tail(), fam.kind());
    out.reduced = EndoSystem<R>::family({rf, fs.endo}, l);
    out.kernel = k;
    out.window = w;
    out.description = "Ker_inf inside grades [" + std::to_string(fam.first()) + ", " + std::to_string(p - 1) +
                      "], length " + out.kernel_length.to_string();
    return out;
}

/// Inverse system; NotInvertible unless the endo is bijective.
template <class R>
EndoSystem<R> invert_endo(const EndoSystem<R>& sys) {
    if (!sys.is_family()) return EndoSystem<R>::fp(invert(sys.map()), sys.length);
    const auto& fs = sys.fam();
    const auto& fam = fs.family;
    std::vector<const Band<R>*> live;
    for (auto& b : fs.endo.bands) {
        bool zero = std::all_of(b.periodic.begin(), b.periodic.end(), [](auto& m) { return is_zero_matrix<R>(m); }) &&
                    std::all_of(b.prefix.begin(), b.prefix.end(), [](auto& m) { return is_zero_matrix<R>(m); });
        if (!zero) live.push_back(&b);
    }
    require(live.size() == 1, ErrorKind::NotInvertible, "only single-band endos are inverted");
    const Band<R>& b = *live[0];
    if (fam.index() == IndexKind::Nat)
        require(b.offset.i == 0, ErrorKind::NotInvertible, "a shift on an N-indexed family is not surjective");
    require(fam.index() != IndexKind::Grid2 || (b.offset.i == 0 && b.offset.j == 0), ErrorKind::NotInvertible,
            "grid shifts are not surjective");
    for (Pos p : sample_grades(fam, fs.endo)) {
        auto f = band_map(fam, b, p);
        require(is_injective(f) && is_surjective(f), ErrorKind::NotInvertible,
                "component map at grade " + p.to_string() + " is not bijective");
    }
    Band<R> inv{Pos{-b.offset.i, -b.offset.j}, {}, {}};
    auto inverse_at = [&](Pos src) { return invert(band_map(fam, b, src)).images(); };
    if (fam.index() == IndexKind::Nat) {
        // Cut tails vary by grade; constant tails make the inverse pattern periodic.
        require(fam.constant_tail() != nullptr, ErrorKind::NotInvertible, "cut-sequence components are not isomorphic");
        long s0 = std::max(fam.first() + static_cast<long>(b.prefix.size()), fam.tail_start());
        for (long i = fam.first(); i < s0; ++i) inv.prefix.push_back(inverse_at({i, 0}));
        for (std::size_t k = 0; k < b.periodic.size(); ++k) inv.periodic.push_back(inverse_at({s0 + static_cast<long>(k), 0}));
    } else {
        long per = static_cast<long>(b.periodic.size());
        for (long k = 0; k < per; ++k) inv.periodic.push_back(inverse_at({k - b.offset.i, 0}));
    }
    return EndoSystem<R>::family({fam, BandedEndo<R>{{inv}}}, sys.length);
}

/// ent via the inverse trajectory: L(T(phi^-1, S) / phi^-1 T(phi^-1, S)).
template <class R>
EntropyResult auto_entropy(const EndoSystem<R>& sys, const SeedArg<R>& seed, std::size_t budget) {
    EndoSystem<R> inv = invert_endo(sys);
    if (!sys.is_family()) {
        const auto& psi = inv.map();
        auto run = run_trajectory(psi, std::get<Submodule<R>>(seed), sys.length, budget);
        if (run.stable_at) {
            const auto& t = run.T[*run.stable_at];
            LengthValue v = quotient_length(sys.length, t, image(psi, t));
            return EntropyResult::exact_value(v, Certificate::AutoFormula, *run.stable_at);
        }
        auto fwd = entropy_of(sys, seed, budget);
        return EntropyResult::bounds(LengthValue::zero(), fwd.upper, budget);
    }
    const auto& fs = sys.fam();
    auto fwd = entropy_of(sys, seed, budget);
    auto rec = recognize(fs.family, fs.endo);
    if (rec && rec->kind == FamilyKind::TwoSided && fs.family.components_L_finite(sys.length)) {
        auto m = materialise(sys, seed, 0);
        auto [lo, hi] = std::get<Seed<R>>(seed).support();
        if (whole_component_range(*m.window, m.seed, fs.family, lo, hi)) {
            // phi^-1 moves grades down (shift +1) or up (shift -1); the quotient
            // T/phi^-1 T is the extreme component of the block.
            long off = 0;
            for (auto& b : fs.endo.bands)
                if (!is_zero_matrix<R>(b.periodic[0])) off = b.offset.i;
            Pos extreme = off > 0 ? hi : lo;
            LengthValue v = length(sys.length, fs.family.component(extreme));
            invariant(lv_compare(v, fwd.upper) <= 0, "automorphism formula exceeds the alpha bound");
            return EntropyResult::exact_value(v, Certificate::AutoFormula, 0, "two_sided");
        }
    }
    return EntropyResult::bounds(LengthValue::zero(), fwd.upper, fwd.steps_used);
}

/// mult_L(M_phi): ent of the inverse when phi is bijective, L(M/phi M) - L(Ker phi)
/// on f.p. ambients, L(C) for recognised one-sided Bernoulli shifts.
template <class R>
EntropyResult multiplicity(const EndoSystem<R>& sys, std::size_t budget, bool force = false) {
    std::optional<EndoSystem<R>> inv;
    try {
        inv = invert_endo(sys);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotInvertible) throw;
    }
    if (inv) return entropy(*inv, budget, force);
    const LengthId l = sys.length;
    if (!sys.is_family()) {
        const auto& phi = sys.map();
        auto whole = Submodule<R>::whole(phi.source_ptr());
        LengthValue coker = quotient_length(l, whole, image(phi, whole));
        LengthValue ker = length(l, kernel(phi));
        if (ker.is_infinite()) return EntropyResult::bounds(LengthValue::zero(), LengthValue::infinity(), 0);
        auto [r, logs] = lv_signed_diff(coker, ker);
        if (coker.is_infinite()) return EntropyResult::exact_value(coker, Certificate::ClosedForm, 0, "kernel-cokernel");
        LengthValue v = LengthValue::from_parts(r, logs);
        invariant(lv_compare(v, LengthValue::zero()) >= 0, "negative multiplicity");
        return EntropyResult::exact_value(v, Certificate::ClosedForm, 0, "kernel-cokernel");
    }
    const auto& fs = sys.fam();
    auto rec = recognize(fs.family, fs.endo);
    if (rec && rec->kind == FamilyKind::Bernoulli) {
        require(force || fs.family.components_L_finite(l), ErrorKind::NotLocallyFinite, "family is not locally L-finite");
        return EntropyResult::exact_value(closed_form_value(l, fs.family, fs.endo, force), Certificate::ClosedForm, 0,
                                          "bernoulli");
    }
    return EntropyResult::bounds(LengthValue::zero(), LengthValue::infinity(), 0);
}

/// Pairwise-commuting endos phi_1..phi_k on one ambient.
template <class R>
struct MultiEndoSystem {
    LengthId length = LengthId::LogCard;
    std::optional<ModPtr<R>> module;
    std::vector<Morphism<R>> maps;
    std::optional<ShiftFamily<R>> family;
    std::vector<BandedEndo<R>> endos;

    std::size_t arity() const { return module ? maps.size() : endos.size(); }

    static MultiEndoSystem fp(std::vector<Morphism<R>> maps, LengthId l) {
        require(!maps.empty() && maps.size() <= 3, ErrorKind::InvalidInput, "between 1 and 3 endos");
        MultiEndoSystem s;
        s.length = l;
        s.module = maps[0].source_ptr();
        check_pair(l, (*s.module)->engine());
        for (auto& f : maps) require(f.is_endo() && same_module(f.source_ptr(), *s.module), ErrorKind::InvalidInput,
                                     "all endos must act on the same module");
        for (std::size_t i = 0; i < maps.size(); ++i)
            for (std::size_t j = i + 1; j < maps.size(); ++j)
                require(compose(maps[i], maps[j]) == compose(maps[j], maps[i]), ErrorKind::NonCommuting,
                        "endos " + std::to_string(i) + " and " + std::to_string(j) + " do not commute");
        s.maps = std::move(maps);
        return s;
    }

    static MultiEndoSystem shift(ShiftFamily<R> fam, std::vector<BandedEndo<R>> endos, LengthId l) {
        require(!endos.empty() && endos.size() <= 3, ErrorKind::InvalidInput, "between 1 and 3 endos");
        check_pair(l, fam.engine());
        for (auto& e : endos) validate_endo(fam, e);
        MultiEndoSystem s;
        s.length = l;
        // Commutation on a sample window, compared where both composites stay inside.
        long reach = 0;
        for (auto& e : endos) reach += std::max(e.forward_width() + e.backward_width(), e.forward_width_j());
        long span = 0;
        for (auto& e : endos) span = std::max(span, e.periodic_from(fam) - fam.first() + 2 * e.period());
        Pos lo{fam.index() == IndexKind::Nat ? fam.first() : 0, 0};
        Pos hi{lo.i + span + 2 * reach + 2, fam.index() == IndexKind::Grid2 ? 2 * reach + 2 : 0};
        auto w = window_for(fam, lo, hi);
        std::vector<Morphism<R>> tr;
        for (auto& e : endos) tr.push_back(truncate_endo(w, fam, e));
        for (std::size_t i = 0; i < tr.size(); ++i)
            for (std::size_t j = i + 1; j < tr.size(); ++j) {
                auto ab = compose(tr[i], tr[j]), ba = compose(tr[j], tr[i]);
                for (Pos p : w.positions) {
                    if (p.i - lo.i < reach || hi.i - p.i < reach) continue;
                    if (fam.index() == IndexKind::Grid2 && hi.j - p.j < reach) continue;
                    auto rows = w.component_rows(p);
                    for (std::size_t r = 0; r < rows.rows(); ++r)
                        require(ab.apply(rows.row(r)) == ba.apply(rows.row(r)), ErrorKind::NonCommuting,
                                "endos " + std::to_string(i) + " and " + std::to_string(j) + " do not commute at grade " +
                                    p.to_string());
                }
            }
        s.family = std::move(fam);
        s.endos = std::move(endos);
        return s;
    }
};

struct MultivarResult {
    EntropyResult result;
    std::vector<LengthValue> normalized; // L(T_n)/n^k for n = 1..N
};

template <class R>
Submodule<R> box_trajectory(const std::vector<Morphism<R>>& maps, const Submodule<R>& s, LengthId l, std::size_t n) {
    Submodule<R> u = s;
    for (auto& f : maps) u = run_trajectory(f, u, l, n - 1).T[n];
    return u;
}

/// ent(Phi, S) = lim L(T_n(Phi, S)) / n^k over boxes [0, n-1]^k.
template <class R>
MultivarResult multivar_entropy(const MultiEndoSystem<R>& ms, const SeedArg<R>& seed, std::size_t budget) {
    const std::size_t k = ms.arity();
    const std::size_t cap = k == 1 ? budget : (k == 2 ? std::min<std::size_t>(budget, 16) : std::min<std::size_t>(budget, 6));
    std::vector<Morphism<R>> maps;
    Submodule<R> s;
    std::optional<Window<R>> window;
    if (ms.module) {
        maps = ms.maps;
        s = std::get<Submodule<R>>(seed);
    } else {
        const auto& sd = std::get<Seed<R>>(seed);
        auto [lo, hi] = sd.support();
        std::vector<const BandedEndo<R>*> es;
        for (auto& e : ms.endos) es.push_back(&e);
        auto [wlo, whi] = window_bounds(*ms.family, es, lo, hi, cap);
        window = window_for(*ms.family, wlo, whi);
        for (auto& e : ms.endos) maps.push_back(truncate_endo(*window, *ms.family, e));
        s = seed_in_window(*window, sd);
    }
    MultivarResult out;
    LengthValue upper = LengthValue::infinity();
    std::optional<EntropyResult> certified;
    Submodule<R> prev;
    for (std::size_t n = 1; n <= cap; ++n) {
        auto t = box_trajectory(maps, s, ms.length, n);
        LengthValue lt = length(ms.length, t);
        require(lt.is_finite(), ErrorKind::NotLFinite, "trajectory has infinite length");
        Rational nk = 1;
        for (std::size_t i = 0; i < k; ++i) nk *= static_cast<long>(n);
        LengthValue norm = lv_scale(lt, 1 / nk);
        out.normalized.push_back(norm);
        upper = lv_min(upper, norm);
        if (n > 1 && t == prev && !certified)
            certified = EntropyResult::exact_value(LengthValue::zero(), Certificate::TrajectoryStabilized, n - 1);
        prev = std::move(t);
    }
    if (!certified && k >= 2) {
        for (auto& f : maps)
            if (f == Morphism<R>::identity(f.source_ptr())) {
                certified = EntropyResult::exact_value(LengthValue::zero(), Certificate::ClosedForm, cap, "identity-factor");
                break;
            }
    }
    if (!certified && ms.family && ms.family->kind() == FamilyKind::Grid2D && k == 2 &&
        ms.family->components_L_finite(ms.length)) {
        bool coord = true;
        std::vector<Pos> dirs;
        for (auto& e : ms.endos) {
            if (e.bands.size() != 1 || !is_identity_matrix<R>(e.bands[0].periodic[0])) coord = false;
            else dirs.push_back(e.bands[0].offset);
        }
        coord = coord && dirs.size() == 2 &&
                ((dirs[0] == Pos{1, 0} && dirs[1] == Pos{0, 1}) || (dirs[0] == Pos{0, 1} && dirs[1] == Pos{1, 0}));
        const auto& sd = std::get<Seed<R>>(seed);
        auto [lo, hi] = sd.support();
        if (coord && whole_component_range(*window, s, *ms.family, lo, hi)) {
            LengthValue v = length(ms.length, *ms.family->constant_tail());
            invariant(lv_compare(v, upper) <= 0, "closed form exceeds a computed upper bound");
            certified = EntropyResult::exact_value(v, Certificate::ClosedForm, cap, "grid2d");
        }
    }
    if (certified) {
        invariant(lv_compare(*certified->exact, upper) <= 0, "certified value exceeds L(T_n)/n^k");
        out.result = *certified;
    } else {
        out.result = EntropyResult::bounds(LengthValue::zero(), upper, cap);
    }
    return out;
}

enum class Verdict { Additive, Consistent, Violated };

inline std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::Additive: return "Additive";
    case Verdict::Consistent: return "Consistent";
    case Verdict::Violated: return "Violated";
    }
    return "?";
}

struct ATReport {
    EntropyResult ent_n, ent_m, ent_q;
    Verdict verdict = Verdict::Consistent;
    bool forced = false;
    std::string warning;
};

inline Verdict at_verdict(const EntropyResult& n, const EntropyResult& m, const EntropyResult& q) {
    if (n.exact && m.exact && q.exact) {
        return *m.exact == lv_add(*n.exact, *q.exact) ? Verdict::Additive : Verdict::Violated;
    }
    bool ok = lv_compare(m.lower, lv_add(n.upper, q.upper)) <= 0 && lv_compare(lv_add(n.lower, q.lower), m.upper) <= 0;
    return ok ? Verdict::Consistent : Verdict::Violated;
}

/// Embedding of shift families: componentwise maps N_p -> M_p.
template <class R>
struct FamilyEmbedding {
    using E = typename R::Element;
    std::vector<Matrix<E>> prefix;
    std::vector<Matrix<E>> periodic;

    const Matrix<E>& at(const ShiftFamily<R>& fam, Pos p) const {
        require(!periodic.empty(), ErrorKind::InvalidInput, "embedding needs a periodic pattern");
        long k = fam.index() == IndexKind::Grid2 ? 0 : p.i - fam.first();
        if (fam.index() == IndexKind::Nat && k < static_cast<long>(prefix.size())) return prefix[k];
        if (fam.index() == IndexKind::Nat) k -= static_cast<long>(prefix.size());
        long per = static_cast<long>(periodic.size());
        return periodic[((k % per) + per) % per];
    }
};

/// Quotient family coker(iota_p) with the ambient's band matrices.
template <class R>
FamilySystem<R> quotient_family(const FamilySystem<R>& n, const FamilySystem<R>& m, const FamilyEmbedding<R>& iota) {
    using E = typename R::Element;
    const auto& fm = m.family;
    const auto& fn = n.family;
    require(fm.index() == fn.index(), ErrorKind::InvalidInput, "families over different index sets");
    if (fm.index() == IndexKind::Nat)
        require(fm.first() == fn.first(), ErrorKind::InvalidInput, "families start at different grades");
    require(!iota.periodic.empty(), ErrorKind::InvalidInput, "embedding needs a periodic pattern");
    auto coker_at = [&](Pos p) {
        FPModule<R> c = fm.component(p);
        Matrix<E> rel = c.relations().basis;
        rel.set_cols_if_empty(c.generators());
        rel.append_rows(iota.at(fn, p));
        return FPModule<R>(c.engine(), c.generators(), rel);
    };
    if (fm.index() != IndexKind::Nat) {
        FPModule<R> c = coker_at(Pos{0, 0});
        for (std::size_t k = 1; k < iota.periodic.size(); ++k)
            require(coker_at(Pos{static_cast<long>(k), 0}) == c, ErrorKind::NotRecognized, "quotient is not constant");
        ShiftFamily<R> q(fm.engine(), fm.index(), 0, {}, c, fm.kind());
        return {q, m.endo};
    }
    const long start = std::max({fm.tail_start(), fn.tail_start(), fm.first() + static_cast<long>(iota.prefix.size())});
    std::vector<FPModule<R>> prefix;
    for (long i = fm.first(); i < start; ++i) prefix.push_back(coker_at({i, 0}));
    typename ShiftFamily<R>::Tail tail;
    if (fm.constant_tail()) {
        FPModule<R> c = coker_at({start, 0});
        for (long k = 1; k < static_cast<long>(iota.periodic.size()); ++k)
            require(coker_at({start + k, 0}) == c, ErrorKind::NotRecognized, "quotient tail is not constant");
        tail = c;
    } else {
        if constexpr (std::is_same_v<R, ValuationRing>) {
            // R/(x^{gamma_n}, iota) with a monomial iota = x^delta is R/x^{min(gamma_n, delta)}.
            require(iota.periodic.size() == 1 && iota.periodic[0].rows() == 1 && iota.periodic[0].cols() == 1,
                    ErrorKind::NotRecognized, "cut-sequence quotient needs a 1x1 embedding");
            const ValElement& e = iota.periodic[0](0, 0);
            require(!e.is_zero(), ErrorKind::InvalidInput, "embedding is not injective");
            tail = fm.cut_tail()->capped(e.valuation()).with_start(start);
        } else {
            fail(ErrorKind::NotRecognized, "cut sequences need the valuation engine");
        }
    }
    ShiftFamily<R> q(fm.engine(), IndexKind::Nat, fm.first(), std::move(prefix), std::move(tail), fm.kind());
    return {q, m.endo};
}

/// iota_{p+o} after f^N_{o,p} equals f^M_{o,p} after iota_p for every offset o.
template <class R>
void check_equivariant(const FamilySystem<R>& n, const FamilySystem<R>& m, const FamilyEmbedding<R>& iota) {
    using E = typename R::Element;
    std::vector<Pos> offsets;
    for (auto& b : n.endo.bands) offsets.push_back(b.offset);
    for (auto& b : m.endo.bands) offsets.push_back(b.offset);
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
    auto band_matrix = [](const FamilySystem<R>& s, Pos o, Pos p, std::size_t rows, std::size_t cols) {
        Matrix<E> acc(rows, cols, R::zero());
        for (auto& b : s.endo.bands)
            if (b.offset == o) {
                const auto& mm = b.at(s.family, p);
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j) acc(i, j) = R::add(acc(i, j), mm(i, j));
            }
        return acc;
    };
    auto grades = sample_grades(m.family, m.endo);
    auto more = sample_grades(n.family, n.endo);
    grades.insert(grades.end(), more.begin(), more.end());
    for (Pos p : grades) {
        if (!m.family.in_domain(p) || !n.family.in_domain(p)) continue;
        auto np = share(n.family.component(p));
        auto mp = share(m.family.component(p));
        Morphism<R> ip(np, mp, iota.at(n.family, p));
        require(is_injective(ip), ErrorKind::NotEquivariant, "embedding is not injective at grade " + p.to_string());
        for (Pos o : offsets) {
            Pos q = p + o;
            if (!m.family.in_domain(q) || !n.family.in_domain(q)) continue;
            auto nq = share(n.family.component(q));
            auto mq = share(m.family.component(q));
            Morphism<R> iq(nq, mq, iota.at(n.family, q));
            Morphism<R> fn(np, nq, band_matrix(n, o, p, np->generators(), nq->generators()));
            Morphism<R> fm(mp, mq, band_matrix(m, o, p, mp->generators(), mq->generators()));
            require(compose(iq, fn) == compose(fm, ip), ErrorKind::NotEquivariant,
                    "embedding does not commute with the endos at grade " + p.to_string());
        }
    }
}

template <class R>
ATReport at_check(const FamilySystem<R>& n, const FamilySystem<R>& m, const FamilyEmbedding<R>& iota, LengthId l,
                  std::size_t budget, bool force = false) {
    check_equivariant(n, m, iota);
    auto q = quotient_family(n, m, iota);
    auto sn = EndoSystem<R>::family(n, l), sm = EndoSystem<R>::family(m, l), sq = EndoSystem<R>::family(q, l);
    bool lfin = n.family.components_L_finite(l) && m.family.components_L_finite(l) && q.family.components_L_finite(l);
    require(force || lfin, ErrorKind::NotLocallyFinite, "the addition check needs locally L-finite modules");
    ATReport r;
    r.forced = force && !lfin;
    r.ent_n = entropy(sn, budget, force);
    r.ent_m = entropy(sm, budget, force);
    r.ent_q = entropy(sq, budget, force);
    r.verdict = at_verdict(r.ent_n, r.ent_m, r.ent_q);
    if (r.forced) r.warning = "modules are not locally L-finite; additivity is not guaranteed";
    invariant(!(lfin && r.verdict == Verdict::Violated), "additivity violated on locally L-finite input");
    return r;
}

/// f.p. version: iota N -> M injective and equivariant; quotient M/iota(N).
template <class R>
ATReport at_check(const EndoSystem<R>& n, const EndoSystem<R>& m, const Morphism<R>& iota, std::size_t budget,
                  bool force = false) {
    require(!n.is_family() && !m.is_family(), ErrorKind::InvalidInput, "use the family overload for shift families");
    require(same_module(iota.source_ptr(), n.module()) && same_module(iota.target_ptr(), m.module()),
            ErrorKind::AmbientMismatch, "embedding does not connect the two systems");
    require(is_injective(iota), ErrorKind::NotEquivariant, "embedding is not injective");
    require(compose(iota, n.map()) == compose(m.map(), iota), ErrorKind::NotEquivariant,
            "embedding does not commute with the endos");
    const LengthId l = m.length;
    auto s = image(iota, Submodule<R>::whole(iota.source_ptr()));
    auto qm = share(quotient(*m.module(), s));
    auto sq = EndoSystem<R>::fp(Morphism<R>(qm, qm, m.map().images()), l);
    bool lfin = is_locally_L_finite(l, *n.module()) && is_locally_L_finite(l, *m.module()) && is_locally_L_finite(l, *qm);
    require(force || lfin, ErrorKind::NotLocallyFinite, "the addition check needs locally L-finite modules");
    ATReport r;
    r.forced = force && !lfin;
    r.ent_n = entropy(n, budget, force);
    r.ent_m = entropy(m, budget, force);
    r.ent_q = entropy(sq, budget, force);
    r.verdict = at_verdict(r.ent_n, r.ent_m, r.ent_q);
    if (r.forced) r.warning = "modules are not locally L-finite; additivity is not guaranteed";
    invariant(!(lfin && r.verdict == Verdict::Violated), "additivity violated on locally L-finite input");
    return r;
}

} // namespace entl
