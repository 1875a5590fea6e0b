#pragma once

#include <algorithm>
#include <compare>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cut_sequence.hpp"
#include "fpmod.hpp"

namespace entl {

enum class IndexKind { Nat, Int, Grid2 };

inline std::string_view to_string(IndexKind k) {
    switch (k) {
    case IndexKind::Nat: return "nat";
    case IndexKind::Int: return "int";
    case IndexKind::Grid2: return "grid2";
    }
    return "?";
}

/// Constructor tag, set by the builders below; Custom families are recognised
/// structurally when possible.
enum class FamilyKind { Bernoulli, BernoulliSigma, TwoSided, Grid2D, Custom };

inline std::string_view to_string(FamilyKind k) {
    switch (k) {
    case FamilyKind::Bernoulli: return "bernoulli";
    case FamilyKind::BernoulliSigma: return "bernoulli_sigma";
    case FamilyKind::TwoSided: return "two_sided";
    case FamilyKind::Grid2D: return "grid2d";
    case FamilyKind::Custom: return "custom";
    }
    return "?";
}

/// Grade of a component; j is used only by grid families.
struct Pos {
    long i = 0;
    long j = 0;
    friend auto operator<=>(const Pos&, const Pos&) = default;
    friend Pos operator+(Pos a, Pos b) { return {a.i + b.i, a.j + b.j}; }
    std::string to_string() const { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }
};

/// Records the grades touched through ShiftFamily::component while active.
struct AccessTracker {
    bool active = false;
    long min_i = std::numeric_limits<long>::max(), max_i = std::numeric_limits<long>::min();
    long min_j = std::numeric_limits<long>::max(), max_j = std::numeric_limits<long>::min();

    void reset() { *this = AccessTracker{true}; }
    void touch(Pos p) {
        if (!active) return;
        min_i = std::min(min_i, p.i);
        max_i = std::max(max_i, p.i);
        min_j = std::min(min_j, p.j);
        max_j = std::max(max_j, p.j);
    }
};

inline AccessTracker& access_tracker() {
    thread_local AccessTracker t;
    return t;
}

/// Graded module with components indexed by N (from `first`), Z, or N^2:
/// a finite prefix followed by a constant component or by cyclic components
/// R/x^{gamma_n} along a cut sequence.
template <class R>
class ShiftFamily {
public:
    using E = typename R::Element;
    using Tail = std::variant<FPModule<R>, CutSequence>;

    ShiftFamily() = default;
    ShiftFamily(Engine engine, IndexKind index, long first, std::vector<FPModule<R>> prefix, Tail tail,
                FamilyKind kind = FamilyKind::Custom)
        : engine_(std::move(engine)), index_(index), first_(first), prefix_(std::move(prefix)), tail_(std::move(tail)),
          kind_(kind) {
        require(engine_fits<R>(engine_.kind), ErrorKind::InvalidInput, "engine does not match element type");
        for (auto& m : prefix_) require(m.engine() == engine_, ErrorKind::InvalidInput, "components over different engines");
        if (auto* c = std::get_if<FPModule<R>>(&tail_))
            require(c->engine() == engine_, ErrorKind::InvalidInput, "components over different engines");
        if (index_ != IndexKind::Nat) {
            require(prefix_.empty() && std::holds_alternative<FPModule<R>>(tail_), ErrorKind::InvalidInput,
                    "int and grid families need a constant component");
            first_ = 0;
        }
        if (auto* cs = std::get_if<CutSequence>(&tail_)) {
            if constexpr (!std::is_same_v<R, ValuationRing>) {
                fail(ErrorKind::InvalidInput, "cut sequences need the valuation engine");
            }
            require(cs->start() == tail_start(), ErrorKind::InvalidInput, "cut sequence must start where the prefix ends");
        }
    }

    const Engine& engine() const { return engine_; }
    IndexKind index() const { return index_; }
    long first() const { return first_; }
    FamilyKind kind() const { return kind_; }
    const std::vector<FPModule<R>>& prefix() const { return prefix_; }
    const Tail& tail() const { return tail_; }
    long tail_start() const { return first_ + static_cast<long>(prefix_.size()); }
    const FPModule<R>* constant_tail() const { return std::get_if<FPModule<R>>(&tail_); }
    const CutSequence* cut_tail() const { return std::get_if<CutSequence>(&tail_); }

    bool in_domain(Pos p) const {
        switch (index_) {
        case IndexKind::Nat: return p.i >= first_ && p.j == 0;
        case IndexKind::Int: return p.j == 0;
        case IndexKind::Grid2: return p.i >= 0 && p.j >= 0;
        }
        return false;
    }

    FPModule<R> component(Pos p) const {
        require(in_domain(p), ErrorKind::InvalidInput, "grade " + p.to_string() + " outside the index set");
        access_tracker().touch(p);
        if (index_ == IndexKind::Nat) {
            long k = p.i - first_;
            if (k < static_cast<long>(prefix_.size())) return prefix_[k];
        }
        if (auto* c = constant_tail()) return *c;
        if constexpr (std::is_same_v<R, ValuationRing>) {
            return FPModule<R>::cyclic(engine_, ValElement::monomial(1, cut_tail()->at(p.i)));
        }
        fail(ErrorKind::InvalidInput, "cut sequences need the valuation engine");
    }

    /// sup over all components of L(C_i).
    LengthValue component_sup(LengthId l) const {
        LengthValue best;
        for (auto& m : prefix_) best = lv_max(best, length(l, m));
        if (auto* c = constant_tail()) best = lv_max(best, length(l, *c));
        else best = lv_max(best, LengthValue::rational(cut_tail()->at(tail_start())));
        return best;
    }

    bool components_L_finite(LengthId l) const { return component_sup(l).is_finite(); }

    std::string describe() const {
        std::string out = std::string(to_string(kind_)) + " family over " + engine_.name() + ", index " +
                          std::string(to_string(index_));
        if (!prefix_.empty()) out += ", " + std::to_string(prefix_.size()) + " prefix components";
        if (auto* c = constant_tail()) out += ", tail " + c->to_string();
        else out += ", cuts " + cut_tail()->to_string();
        return out;
    }

private:
    Engine engine_;
    IndexKind index_ = IndexKind::Nat;
    long first_ = 0;
    std::vector<FPModule<R>> prefix_;
    Tail tail_;
    FamilyKind kind_ = FamilyKind::Custom;
};

/// One diagonal of a banded endomorphism: maps C_p -> C_{p+offset}, listed for the
/// first grades (prefix) and then repeated with the given period.
template <class R>
struct Band {
    using E = typename R::Element;
    Pos offset;
    std::vector<Matrix<E>> prefix;
    std::vector<Matrix<E>> periodic;

    const Matrix<E>& at(const ShiftFamily<R>& fam, Pos p) const {
        require(!periodic.empty(), ErrorKind::InvalidInput, "band needs a periodic pattern");
        long k = fam.index() == IndexKind::Grid2 ? 0 : p.i - fam.first();
        if (fam.index() == IndexKind::Nat && k < static_cast<long>(prefix.size())) return prefix[k];
        if (fam.index() == IndexKind::Nat) k -= static_cast<long>(prefix.size());
        long per = static_cast<long>(periodic.size());
        return periodic[((k % per) + per) % per];
    }
};

template <class R>
struct BandedEndo {
    using E = typename R::Element;
    std::vector<Band<R>> bands;

    long forward_width() const {
        long d = 0;
        for (auto& b : bands) d = std::max(d, b.offset.i);
        return d;
    }
    long backward_width() const {
        long d = 0;
        for (auto& b : bands) d = std::max(d, -b.offset.i);
        return d;
    }
    long forward_width_j() const {
        long d = 0;
        for (auto& b : bands) d = std::max(d, b.offset.j);
        return d;
    }
    /// First grade index from which every band is purely periodic.
    long periodic_from(const ShiftFamily<R>& fam) const {
        long p = fam.first();
        for (auto& b : bands) p = std::max(p, fam.first() + static_cast<long>(b.prefix.size()));
        return p;
    }
    long period() const {
        long l = 1;
        for (auto& b : bands) l = std::lcm(l, static_cast<long>(b.periodic.size()));
        return l;
    }
};

template <class R>
bool is_zero_matrix(const Matrix<typename R::Element>& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (!is_zero_vector<R>(m.row(i))) return false;
    return true;
}

template <class R>
bool is_identity_matrix(const Matrix<typename R::Element>& m) {
    if (m.rows() != m.cols()) return false;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (i == j ? !R::is_one(m(i, j)) : !R::is_zero(m(i, j))) return false;
    return true;
}

/// Grades inspected when validating or recognising an eventually periodic endo:
/// all prefix grades plus two full periods (plus a run of cut-tail grades).
template <class R>
std::vector<Pos> sample_grades(const ShiftFamily<R>& fam, const BandedEndo<R>& endo) {
    std::vector<Pos> out;
    if (fam.index() == IndexKind::Grid2) return {Pos{0, 0}, Pos{1, 0}, Pos{0, 1}};
    long lo = fam.first();
    long hi = std::max(fam.tail_start(), endo.periodic_from(fam)) + 2 * endo.period();
    if (fam.cut_tail()) hi += 16;
    if (fam.index() == IndexKind::Int) {
        lo = -endo.period();
        hi = 2 * endo.period();
    }
    for (long i = lo; i <= hi; ++i) out.push_back({i, 0});
    return out;
}

/// The component map of one band at grade p as a morphism.
template <class R>
Morphism<R> band_map(const ShiftFamily<R>& fam, const Band<R>& b, Pos p) {
    return Morphism<R>(share(fam.component(p)), share(fam.component(p + b.offset)), b.at(fam, p));
}

/// Checks shapes, relation compatibility and that no map leaves the index set.
template <class R>
void validate_endo(const ShiftFamily<R>& fam, const BandedEndo<R>& endo) {
    require(!endo.bands.empty(), ErrorKind::InvalidInput, "endo needs at least one band");
    for (auto& b : endo.bands) {
        require(!b.periodic.empty(), ErrorKind::InvalidInput, "band needs a periodic pattern");
        if (fam.index() != IndexKind::Nat)
            require(b.prefix.empty(), ErrorKind::InvalidInput, "int and grid bands are purely periodic");
        if (fam.index() == IndexKind::Grid2)
            require(b.periodic.size() == 1 && b.offset.i >= 0 && b.offset.j >= 0, ErrorKind::InvalidInput,
                    "grid bands are constant and forward");
        else
            require(b.offset.j == 0, ErrorKind::InvalidInput, "1D bands have no second offset");
    }
    for (Pos p : sample_grades(fam, endo))
        for (auto& b : endo.bands) {
            Pos q = p + b.offset;
            if (!fam.in_domain(q)) {
                require(is_zero_matrix<R>(b.at(fam, p)), ErrorKind::InvalidInput,
                        "band maps grade " + p.to_string() + " outside the index set");
                continue;
            }
            band_map(fam, b, p);
        }
}

template <class R>
struct FamilySystem {
    ShiftFamily<R> family;
    BandedEndo<R> endo;
};

template <class R>
BandedEndo<R> identity_shift(std::size_t gens, Pos offset) {
    using E = typename R::Element;
    return {{Band<R>{offset, {}, {Matrix<E>::identity(gens, R::zero(), R::one())}}}};
}

/// B(M): copies of M on N with the right shift.
template <class R>
FamilySystem<R> bernoulli(const FPModule<R>& m, long first = 0) {
    ShiftFamily<R> fam(m.engine(), IndexKind::Nat, first, {}, m, FamilyKind::Bernoulli);
    return {fam, identity_shift<R>(m.generators(), {1, 0})};
}

/// B_sigma(R): components R/x^{gamma_n}, explicit prefix cuts followed by a rule.
inline FamilySystem<ValuationRing> bernoulli_sigma(const std::vector<Rational>& prefix_cuts, const CutSequence& tail,
                                                   long first = 1) {
    const Engine e = Engine::valuation();
    std::vector<FPModule<ValuationRing>> prefix;
    for (std::size_t k = 0; k < prefix_cuts.size(); ++k) {
        require(prefix_cuts[k] >= 0, ErrorKind::NotAscending, "cut values must be >= 0");
        if (k > 0)
            require(prefix_cuts[k] <= prefix_cuts[k - 1], ErrorKind::NotAscending,
                    "cut values must be non-increasing (ascending ideal chain)");
        prefix.push_back(FPModule<ValuationRing>::cyclic(e, ValElement::monomial(1, prefix_cuts[k])));
    }
    long start = first + static_cast<long>(prefix_cuts.size());
    require(tail.start() == start, ErrorKind::InvalidInput, "cut sequence must start where the prefix ends");
    if (!prefix_cuts.empty())
        require(tail.at(start) <= prefix_cuts.back(), ErrorKind::NotAscending,
                "cut values must be non-increasing (ascending ideal chain)");
    ShiftFamily<ValuationRing> fam(e, IndexKind::Nat, first, std::move(prefix), tail, FamilyKind::BernoulliSigma);
    return {fam, identity_shift<ValuationRing>(1, {1, 0})};
}

inline FamilySystem<ValuationRing> bernoulli_sigma(std::string_view rule, long first = 1) {
    return bernoulli_sigma({}, CutSequence::parse(rule, first), first);
}

/// Z-indexed copies of M with the bijective shift.
template <class R>
FamilySystem<R> two_sided(const FPModule<R>& m) {
    ShiftFamily<R> fam(m.engine(), IndexKind::Int, 0, {}, m, FamilyKind::TwoSided);
    return {fam, identity_shift<R>(m.generators(), {1, 0})};
}

/// N^2-indexed copies of M with the two coordinate shifts.
template <class R>
std::pair<ShiftFamily<R>, std::vector<BandedEndo<R>>> grid2d(const FPModule<R>& m) {
    ShiftFamily<R> fam(m.engine(), IndexKind::Grid2, 0, {}, m, FamilyKind::Grid2D);
    return {fam, {identity_shift<R>(m.generators(), {1, 0}), identity_shift<R>(m.generators(), {0, 1})}};
}

/// Direct sum of the window's components with block offsets.
template <class R>
struct Window {
    using E = typename R::Element;
    std::vector<Pos> positions;
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> sizes;
    std::map<Pos, std::size_t> slot;
    ModPtr<R> module;

    bool covers(Pos p) const { return slot.count(p) > 0; }

    std::vector<E> embed(Pos p, std::span<const E> local) const {
        auto it = slot.find(p);
        require(it != slot.end(), ErrorKind::WindowTooSmall, "grade " + p.to_string() + " outside the window");
        std::size_t k = it->second;
        require(local.size() == sizes[k], ErrorKind::InvalidInput, "element length differs from the component");
        std::vector<E> v(module->generators(), R::zero());
        for (std::size_t t = 0; t < local.size(); ++t) v[offsets[k] + t] = local[t];
        return v;
    }

    /// Generators of the whole component at p, as window rows.
    Matrix<E> component_rows(Pos p) const {
        auto it = slot.find(p);
        require(it != slot.end(), ErrorKind::WindowTooSmall, "grade " + p.to_string() + " outside the window");
        std::size_t k = it->second;
        Matrix<E> out(0, module->generators());
        for (std::size_t t = 0; t < sizes[k]; ++t) {
            std::vector<E> v(module->generators(), R::zero());
            v[offsets[k] + t] = R::one();
            out.append_row(v);
        }
        return out;
    }

    /// Local coordinates of a window element at grade p.
    std::vector<E> project(Pos p, std::span<const E> v) const {
        std::size_t k = slot.at(p);
        return std::vector<E>(v.begin() + offsets[k], v.begin() + offsets[k] + sizes[k]);
    }
};

template <class R>
Window<R> make_window(const ShiftFamily<R>& fam, std::vector<Pos> positions) {
    using E = typename R::Element;
    Window<R> w;
    std::vector<FPModule<R>> comps;
    std::size_t total = 0;
    for (Pos p : positions) {
        if (!fam.in_domain(p)) continue;
        comps.push_back(fam.component(p));
        w.slot[p] = w.positions.size();
        w.positions.push_back(p);
        w.offsets.push_back(total);
        w.sizes.push_back(comps.back().generators());
        total += comps.back().generators();
    }
    Matrix<E> rel(0, total);
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const auto& b = comps[k].relations().basis;
        for (std::size_t r = 0; r < b.rows(); ++r) {
            std::vector<E> v(total, R::zero());
            for (std::size_t t = 0; t < b.cols(); ++t) v[w.offsets[k] + t] = b(r, t);
            rel.append_row(v);
        }
    }
    w.module = share(FPModule<R>(fam.engine(), total, rel));
    return w;
}

/// Components with grade in [lo, hi] (1D families).
template <class R>
Window<R> window_range(const ShiftFamily<R>& fam, long lo, long hi) {
    std::vector<Pos> ps;
    for (long i = lo; i <= hi; ++i) ps.push_back({i, 0});
    return make_window(fam, ps);
}

/// Components in the box [i0, i1] x [j0, j1] (grid families).
template <class R>
Window<R> window_box(const ShiftFamily<R>& fam, long i0, long i1, long j0, long j1) {
    std::vector<Pos> ps;
    for (long i = i0; i <= i1; ++i)
        for (long j = j0; j <= j1; ++j) ps.push_back({i, j});
    return make_window(fam, ps);
}

/// The endo restricted to the window, with maps leaving the window dropped. It
/// agrees with the true map on every element whose image stays inside.
template <class R>
Morphism<R> truncate_endo(const Window<R>& w, const ShiftFamily<R>& fam, const BandedEndo<R>& endo) {
    using E = typename R::Element;
    const std::size_t n = w.module->generators();
    Matrix<E> f(n, n, R::zero());
    for (std::size_t k = 0; k < w.positions.size(); ++k) {
        Pos p = w.positions[k];
        for (auto& b : endo.bands) {
            Pos q = p + b.offset;
            auto it = w.slot.find(q);
            if (it == w.slot.end()) continue;
            const Matrix<E>& blk = b.at(fam, p);
            require(blk.rows() == w.sizes[k] && blk.cols() == w.sizes[it->second], ErrorKind::InvalidInput,
                    "band matrix shape differs from the components at grade " + p.to_string());
            for (std::size_t r = 0; r < blk.rows(); ++r)
                for (std::size_t c = 0; c < blk.cols(); ++c)
                    if (!R::is_zero(blk(r, c)))
                        f(w.offsets[k] + r, w.offsets[it->second] + c) = R::add(f(w.offsets[k] + r, w.offsets[it->second] + c), blk(r, c));
        }
    }
    return Morphism<R>(w.module, w.module, f);
}

/// Result of structural recognition: the family is a Bernoulli-type shift from
/// grade `tail_from` on (N index), or a bijective shift (Z index).
struct Recognition {
    FamilyKind kind = FamilyKind::Custom;
    long tail_from = 0;
};

/// Recognises "eventually Bernoulli" systems: an arbitrary finite head followed by
/// the identity shift on a constant component or along a cut sequence, with every
/// other band vanishing on the tail; and Z-indexed shifts by automorphisms.
template <class R>
std::optional<Recognition> recognize(const ShiftFamily<R>& fam, const BandedEndo<R>& endo) {
    if (fam.index() == IndexKind::Grid2) return std::nullopt;
    if (fam.index() == IndexKind::Int) {
        const Band<R>* live = nullptr;
        for (auto& b : endo.bands) {
            bool zero = std::all_of(b.periodic.begin(), b.periodic.end(), [](auto& m) { return is_zero_matrix<R>(m); });
            if (zero) continue;
            if (live || (b.offset.i != 1 && b.offset.i != -1)) return std::nullopt;
            live = &b;
        }
        if (!live) return std::nullopt;
        for (long k = 0; k < static_cast<long>(live->periodic.size()); ++k) {
            auto f = band_map(fam, *live, Pos{k, 0});
            if (!is_injective(f) || !is_surjective(f)) return std::nullopt;
        }
        return Recognition{FamilyKind::TwoSided, 0};
    }
    const long p0 = std::max(fam.tail_start(), endo.periodic_from(fam));
    bool has_shift = false;
    for (auto& b : endo.bands) {
        if (b.offset.i == 1) {
            has_shift = true;
            for (long k = 0; k < static_cast<long>(b.periodic.size()); ++k) {
                Pos p{p0 + k, 0};
                const auto& m = b.at(fam, p);
                if (fam.cut_tail()) {
                    if (!is_identity_matrix<R>(m)) return std::nullopt;
                    continue;
                }
                if (is_identity_matrix<R>(m)) continue;
                auto f = band_map(fam, b, p);
                if (!is_injective(f) || !is_surjective(f)) return std::nullopt;
            }
        } else {
            for (auto& m : b.periodic)
                if (!is_zero_matrix<R>(m)) return std::nullopt;
        }
    }
    if (!has_shift) return std::nullopt;
    return Recognition{fam.cut_tail() ? FamilyKind::BernoulliSigma : FamilyKind::Bernoulli, p0};
}

/// Exact entropy of a recognised system: L(C) for Bernoulli and bijective shifts,
/// lim gamma_n for cut sequences. A finite head adds nothing (it is L-finite). With
/// `force` on a family that is not locally L-finite the value is taken on the
/// largest L-finite part of the tail component.
template <class R>
LengthValue closed_form_value(LengthId l, const ShiftFamily<R>& fam, const BandedEndo<R>& endo, bool force = false) {
    check_pair(l, fam.engine());
    auto rec = recognize(fam, endo);
    require(rec.has_value(), ErrorKind::NotRecognized, "no closed form for this family");
    if (!fam.components_L_finite(l)) {
        require(force, ErrorKind::NotLocallyFinite, "family is not locally L-finite");
        return torsion_length(l, *fam.constant_tail());
    }
    if (auto* c = fam.constant_tail()) return length(l, *c);
    return LengthValue::rational(fam.cut_tail()->limit());
}

} // namespace entl
