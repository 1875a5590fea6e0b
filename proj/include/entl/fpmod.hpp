#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "engine.hpp"

namespace entl {

/// Finitely presented module R^g / (relation rows). The relation lattice is kept in
/// canonical echelon form and includes the implicit m*e_i rows of modular engines.
template <class R>
class FPModule {
public:
    using E = typename R::Element;

    FPModule() = default;

    FPModule(Engine engine, std::size_t gens, const Matrix<E>& relation_rows) : engine_(std::move(engine)), gens_(gens) {
        require(engine_fits<R>(engine_.kind), ErrorKind::InvalidInput, "engine does not match element type");
        Matrix<E> rows = relation_rows;
        rows.set_cols_if_empty(gens);
        require(rows.cols() == gens, ErrorKind::InvalidInput, "relation length differs from generator count");
        if constexpr (std::is_same_v<R, IntegerRing>) {
            if (engine_.has_modulus())
                for (std::size_t i = 0; i < gens; ++i) {
                    std::vector<E> r(gens, R::zero());
                    r[i] = engine_.modulus;
                    rows.append_row(r);
                }
        }
        rel_ = echelon<R>(std::move(rows));
    }

    static FPModule free(const Engine& e, std::size_t gens) { return FPModule(e, gens, Matrix<E>(0, gens)); }

    /// R / (a), one generator.
    static FPModule cyclic(const Engine& e, const E& a) {
        Matrix<E> rows(0, 1);
        if (!R::is_zero(a)) rows.append_row(std::vector<E>{a});
        return FPModule(e, 1, rows);
    }

    const Engine& engine() const { return engine_; }
    std::size_t generators() const { return gens_; }
    const Echelon<R>& relations() const { return rel_; }

    /// Canonical representative of an element modulo the relations.
    std::vector<E> reduce(std::vector<E> v) const {
        require(v.size() == gens_, ErrorKind::InvalidInput, "element length differs from generator count");
        return reduce_vector<R>(rel_, std::move(v));
    }

    bool is_zero_element(std::span<const E> v) const { return contains<R>(rel_, v); }

    std::vector<E> basis_vector(std::size_t i) const {
        std::vector<E> v(gens_, R::zero());
        v[i] = R::one();
        return v;
    }

    friend bool operator==(const FPModule& a, const FPModule& b) {
        return a.engine_ == b.engine_ && a.gens_ == b.gens_ && a.rel_.basis == b.rel_.basis;
    }

    std::string to_string() const {
        std::string out = engine_.name() + "^" + std::to_string(gens_);
        if (rel_.rank() == 0) return out;
        out += " / <";
        for (std::size_t i = 0; i < rel_.rank(); ++i) {
            if (i) out += ", ";
            out += "(";
            for (std::size_t j = 0; j < gens_; ++j) {
                if (j) out += ",";
                out += R::to_string(rel_.basis(i, j));
            }
            out += ")";
        }
        return out + ">";
    }

private:
    Engine engine_;
    std::size_t gens_ = 0;
    Echelon<R> rel_;
};

template <class R>
using ModPtr = std::shared_ptr<const FPModule<R>>;

template <class R>
ModPtr<R> share(FPModule<R> m) {
    return std::make_shared<const FPModule<R>>(std::move(m));
}

template <class R>
bool same_module(const ModPtr<R>& a, const ModPtr<R>& b) {
    return a == b || *a == *b;
}

/// Invariant factors of the presentation and the free rank.
template <class R>
std::pair<std::vector<typename R::Element>, std::size_t> module_invariants(const FPModule<R>& m) {
    auto s = smith<R>(m.relations().basis);
    std::size_t free = m.generators() - s.rank;
    return {std::move(s.invariants), free};
}

/// L(M) = sum L(R/d_i) + free_rank * L(R).
template <class R>
LengthValue length(LengthId l, const FPModule<R>& m) {
    check_pair(l, m.engine());
    auto [inv, free] = module_invariants(m);
    LengthValue total;
    for (auto& d : inv) total = lv_add(total, cyclic_length(l, m.engine(), engine_ideal<R>(m.engine(), R::ideal_of(d))));
    if (free > 0) {
        LengthValue lr = ring_length<R>(l, m.engine());
        if (lr.is_infinite()) return LengthValue::infinity();
        total = lv_add(total, lv_scale(lr, Rational(static_cast<long>(free))));
    }
    return total;
}

/// Length of the largest L-finite submodule (the torsion part for logCard and L_v).
template <class R>
LengthValue torsion_length(LengthId l, const FPModule<R>& m) {
    check_pair(l, m.engine());
    if (ring_length<R>(l, m.engine()).is_finite()) return length(l, m);
    auto [inv, free] = module_invariants(m);
    LengthValue total;
    for (auto& d : inv) total = lv_add(total, cyclic_length(l, m.engine(), engine_ideal<R>(m.engine(), R::ideal_of(d))));
    return total;
}

/// Over the supported engines an f.p. module is locally L-finite iff it is L-finite.
template <class R>
bool is_locally_L_finite(LengthId l, const FPModule<R>& m) {
    return length(l, m).is_finite();
}

/// Submodule of an f.p. module, stored as the canonical echelon basis of its
/// preimage lattice in R^g (which contains the relation lattice).
template <class R>
class Submodule {
public:
    using E = typename R::Element;

    Submodule() = default;

    static Submodule generated(ModPtr<R> ambient, const Matrix<E>& gens) {
        Matrix<E> rows = ambient->relations().basis;
        rows.set_cols_if_empty(ambient->generators());
        if (gens.rows() > 0) {
            require(gens.cols() == ambient->generators(), ErrorKind::InvalidInput,
                    "generator length differs from the ambient");
            rows.append_rows(gens);
        }
        return from_lattice(std::move(ambient), echelon<R>(std::move(rows)));
    }

    static Submodule from_lattice(ModPtr<R> ambient, Echelon<R> lattice) {
        Submodule s;
        s.ambient_ = std::move(ambient);
        s.lattice_ = std::move(lattice);
        return s;
    }

    static Submodule zero(ModPtr<R> ambient) { return from_lattice(ambient, ambient->relations()); }
    static Submodule whole(ModPtr<R> ambient) {
        std::size_t g = ambient->generators();
        return generated(ambient, Matrix<E>::identity(g, R::zero(), R::one()));
    }

    const FPModule<R>& ambient() const { return *ambient_; }
    const ModPtr<R>& ambient_ptr() const { return ambient_; }
    const Echelon<R>& lattice() const { return lattice_; }

    /// Basis rows that are non-zero in the ambient; empty for the zero submodule.
    Matrix<E> generators() const {
        Matrix<E> out(0, ambient_->generators());
        for (std::size_t i = 0; i < lattice_.rank(); ++i)
            if (!ambient_->is_zero_element(lattice_.basis.row(i))) out.append_row(lattice_.basis.row(i));
        return out;
    }

    bool contains(std::span<const E> v) const { return entl::contains<R>(lattice_, v); }
    bool is_zero() const { return lattice_.basis == ambient_->relations().basis; }

    friend bool operator==(const Submodule& a, const Submodule& b) {
        return same_module(a.ambient_, b.ambient_) && a.lattice_.basis == b.lattice_.basis;
    }

private:
    ModPtr<R> ambient_;
    Echelon<R> lattice_;
};

template <class R>
void require_same_ambient(const Submodule<R>& a, const Submodule<R>& b) {
    require(same_module(a.ambient_ptr(), b.ambient_ptr()), ErrorKind::AmbientMismatch,
            "submodules live in different modules");
}

template <class R>
Submodule<R> sub_sum(const Submodule<R>& a, const Submodule<R>& b) {
    require_same_ambient(a, b);
    Matrix<typename R::Element> rows = a.lattice().basis;
    rows.append_rows(b.lattice().basis);
    return Submodule<R>::from_lattice(a.ambient_ptr(), echelon<R>(std::move(rows)));
}

template <class R>
Submodule<R> sub_intersection(const Submodule<R>& a, const Submodule<R>& b) {
    require_same_ambient(a, b);
    using E = typename R::Element;
    Matrix<E> stacked = a.lattice().basis;
    stacked.append_rows(b.lattice().basis);
    auto null = left_nullspace<R>(stacked);
    Matrix<E> rows = a.ambient().relations().basis;
    rows.set_cols_if_empty(a.ambient().generators());
    const std::size_t ka = a.lattice().rank();
    for (std::size_t i = 0; i < null.rows(); ++i) {
        std::vector<E> v(a.ambient().generators(), R::zero());
        for (std::size_t k = 0; k < ka; ++k) {
            const E& c = null(i, k);
            if (R::is_zero(c)) continue;
            for (std::size_t j = 0; j < v.size(); ++j)
                if (!R::is_zero(a.lattice().basis(k, j))) v[j] = R::add(v[j], R::mul(c, a.lattice().basis(k, j)));
        }
        rows.append_row(v);
    }
    return Submodule<R>::from_lattice(a.ambient_ptr(), echelon<R>(std::move(rows)));
}

enum class SubOrder { Equal, Less, Greater, Incomparable };

inline std::string_view to_string(SubOrder o) {
    switch (o) {
    case SubOrder::Equal: return "Equal";
    case SubOrder::Less: return "S1<=S2";
    case SubOrder::Greater: return "S2<=S1";
    case SubOrder::Incomparable: return "Incomparable";
    }
    return "?";
}

template <class R>
bool is_contained(const Submodule<R>& a, const Submodule<R>& b) {
    for (std::size_t i = 0; i < a.lattice().rank(); ++i)
        if (!b.contains(a.lattice().basis.row(i))) return false;
    return true;
}

template <class R>
SubOrder sub_compare(const Submodule<R>& a, const Submodule<R>& b) {
    require_same_ambient(a, b);
    bool ab = is_contained(a, b), ba = is_contained(b, a);
    if (ab && ba) return SubOrder::Equal;
    if (ab) return SubOrder::Less;
    if (ba) return SubOrder::Greater;
    return SubOrder::Incomparable;
}

template <class R>
bool membership(std::span<const typename R::Element> x, const Submodule<R>& s) {
    return s.contains(x);
}

/// L(S) = L(lattice(S) / relations).
template <class R>
LengthValue length(LengthId l, const Submodule<R>& s) {
    return quotient_length<R>(l, s.ambient().engine(), s.lattice(), s.ambient().relations());
}

/// L(S2 / S1) for S1 <= S2.
template <class R>
LengthValue quotient_length(LengthId l, const Submodule<R>& big, const Submodule<R>& small) {
    require_same_ambient(big, small);
    return quotient_length<R>(l, big.ambient().engine(), big.lattice(), small.lattice());
}

/// M / S, presented by adjoining the generators of S to the relations.
template <class R>
FPModule<R> quotient(const FPModule<R>& m, const Submodule<R>& s) {
    require(s.ambient() == m, ErrorKind::AmbientMismatch, "submodule of a different module");
    return FPModule<R>(m.engine(), m.generators(), s.lattice().basis);
}

/// S as a module in its own right, with the inclusion as generator images in the ambient.
template <class R>
std::pair<FPModule<R>, Matrix<typename R::Element>> as_module(const Submodule<R>& s) {
    auto coords = coordinates<R>(s.lattice(), s.ambient().relations().basis);
    coords.set_cols_if_empty(s.lattice().rank());
    FPModule<R> m(s.ambient().engine(), s.lattice().rank(), coords);
    Matrix<typename R::Element> inc = s.lattice().basis;
    inc.set_cols_if_empty(s.ambient().generators());
    return {std::move(m), std::move(inc)};
}

/// The largest L-finite submodule: the saturation of the relation lattice for
/// length functions with L(R) = inf, the whole module otherwise.
template <class R>
Submodule<R> torsion_submodule(LengthId l, const ModPtr<R>& m) {
    if (ring_length<R>(l, m->engine()).is_finite()) return Submodule<R>::whole(m);
    const auto& b = m->relations().basis;
    const std::size_t g = m->generators();
    if (b.rows() == 0) return Submodule<R>::zero(m);
    // Right kernel N of B (columns), then saturation = {y : y*N = 0}.
    auto nt = left_nullspace<R>(b.transposed());
    if (nt.rows() == 0) return Submodule<R>::whole(m);
    auto sat = left_nullspace<R>(nt.transposed());
    sat.set_cols_if_empty(g);
    return Submodule<R>::generated(m, sat);
}

/// Homomorphism between f.p. modules; row i of `images` is the image of generator i.
template <class R>
class Morphism {
public:
    using E = typename R::Element;

    Morphism() = default;

    Morphism(ModPtr<R> src, ModPtr<R> tgt, Matrix<E> images) : src_(std::move(src)), tgt_(std::move(tgt)) {
        const std::size_t g = src_->generators(), h = tgt_->generators();
        images.set_cols_if_empty(h);
        if (g == 0 && images.rows() == 0) images = Matrix<E>(0, h);
        require(images.rows() == g && images.cols() == h, ErrorKind::InvalidInput,
                "map matrix has the wrong shape");
        for (std::size_t i = 0; i < g; ++i) {
            auto r = tgt_->reduce(std::vector<E>(images.row(i).begin(), images.row(i).end()));
            for (std::size_t j = 0; j < h; ++j) images(i, j) = std::move(r[j]);
        }
        images_ = std::move(images);
        const auto& rel = src_->relations();
        for (std::size_t k = 0; k < rel.rank(); ++k)
            require(tgt_->is_zero_element(apply_raw(rel.basis.row(k))), ErrorKind::InvalidInput,
                    "map does not respect the relations");
    }

    static Morphism identity(ModPtr<R> m) {
        auto n = m->generators();
        return Morphism(m, m, Matrix<E>::identity(n, R::zero(), R::one()));
    }
    static Morphism zero(ModPtr<R> s, ModPtr<R> t) {
        Matrix<E> z(s->generators(), t->generators(), R::zero());
        return Morphism(s, t, z);
    }
    static Morphism scalar(ModPtr<R> m, const E& c) {
        auto n = m->generators();
        Matrix<E> z(n, n, R::zero());
        for (std::size_t i = 0; i < n; ++i) z(i, i) = c;
        return Morphism(m, m, z);
    }

    const FPModule<R>& source() const { return *src_; }
    const FPModule<R>& target() const { return *tgt_; }
    const ModPtr<R>& source_ptr() const { return src_; }
    const ModPtr<R>& target_ptr() const { return tgt_; }
    const Matrix<E>& images() const { return images_; }
    bool is_endo() const { return same_module(src_, tgt_); }

    /// Image of x (row vector in source coordinates), reduced in the target.
    std::vector<E> apply(std::span<const E> x) const { return tgt_->reduce(apply_raw(x)); }

    std::vector<E> apply_raw(std::span<const E> x) const {
        std::vector<E> out(tgt_->generators(), R::zero());
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (R::is_zero(x[i])) continue;
            for (std::size_t j = 0; j < out.size(); ++j) {
                const E& f = images_(i, j);
                if (!R::is_zero(f)) out[j] = R::add(out[j], R::mul(x[i], f));
            }
        }
        return out;
    }

    friend bool operator==(const Morphism& a, const Morphism& b) {
        return same_module(a.src_, b.src_) && same_module(a.tgt_, b.tgt_) && a.images_ == b.images_;
    }

private:
    ModPtr<R> src_, tgt_;
    Matrix<E> images_;
};

/// g after f.
template <class R>
Morphism<R> compose(const Morphism<R>& g, const Morphism<R>& f) {
    require(same_module(f.target_ptr(), g.source_ptr()), ErrorKind::AmbientMismatch, "maps do not compose");
    return Morphism<R>(f.source_ptr(), g.target_ptr(), multiply<R>(f.images(), g.images()));
}

template <class R>
Morphism<R> power(const Morphism<R>& f, std::size_t n) {
    require(f.is_endo(), ErrorKind::InvalidInput, "power of a non-endomorphism");
    Morphism<R> out = Morphism<R>::identity(f.source_ptr());
    for (std::size_t i = 0; i < n; ++i) out = compose(f, out);
    return out;
}

template <class R>
Submodule<R> image(const Morphism<R>& f, const Submodule<R>& s) {
    require(same_module(s.ambient_ptr(), f.source_ptr()), ErrorKind::AmbientMismatch,
            "submodule is not in the source");
    Matrix<typename R::Element> rows(0, f.target().generators());
    for (std::size_t i = 0; i < s.lattice().rank(); ++i) rows.append_row(f.apply_raw(s.lattice().basis.row(i)));
    return Submodule<R>::generated(f.target_ptr(), rows);
}

/// {x in source : f(x) in T}.
template <class R>
Submodule<R> preimage(const Morphism<R>& f, const Submodule<R>& t) {
    require(same_module(t.ambient_ptr(), f.target_ptr()), ErrorKind::AmbientMismatch,
            "submodule is not in the target");
    using E = typename R::Element;
    const std::size_t g = f.source().generators();
    Matrix<E> stacked = f.images();
    stacked.append_rows(t.lattice().basis);
    auto null = left_nullspace<R>(stacked);
    Matrix<E> rows(0, g);
    for (std::size_t i = 0; i < null.rows(); ++i) rows.append_row(null.row(i).subspan(0, g));
    return Submodule<R>::generated(f.source_ptr(), rows);
}

template <class R>
Submodule<R> kernel(const Morphism<R>& f) {
    return preimage(f, Submodule<R>::zero(f.target_ptr()));
}

template <class R>
bool is_injective(const Morphism<R>& f) {
    return kernel(f).is_zero();
}

template <class R>
bool is_surjective(const Morphism<R>& f) {
    return image(f, Submodule<R>::whole(f.source_ptr())) == Submodule<R>::whole(f.target_ptr());
}

/// x with x * A == b, if any.
template <class R>
std::optional<std::vector<typename R::Element>> solve_left(const Matrix<typename R::Element>& a,
                                                           std::span<const typename R::Element> b) {
    using E = typename R::Element;
    Matrix<E> u;
    auto h = echelon<R>(a, &u);
    std::vector<E> q;
    auto rem = reduce_vector<R>(h, std::vector<E>(b.begin(), b.end()), &q);
    if (!is_zero_vector<R>(rem)) return std::nullopt;
    std::vector<E> x(a.rows(), R::zero());
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (R::is_zero(q[k])) continue;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (!R::is_zero(u(k, j))) x[j] = R::add(x[j], R::mul(q[k], u(k, j)));
    }
    return x;
}

/// Inverse of a bijective map; NotInvertible otherwise.
template <class R>
Morphism<R> invert(const Morphism<R>& f) {
    using E = typename R::Element;
    require(is_injective(f) && is_surjective(f), ErrorKind::NotInvertible, "map is not bijective");
    const std::size_t g = f.source().generators(), h = f.target().generators();
    Matrix<E> stacked = f.images();
    stacked.append_rows(f.target().relations().basis);
    Matrix<E> inv(h, g, R::zero());
    for (std::size_t j = 0; j < h; ++j) {
        auto x = solve_left<R>(stacked, f.target().basis_vector(j));
        require(x.has_value(), ErrorKind::NotInvertible, "generator has no preimage");
        for (std::size_t i = 0; i < g; ++i) inv(j, i) = (*x)[i];
    }
    return Morphism<R>(f.target_ptr(), f.source_ptr(), inv);
}

/// Ann(x) = {r : r x = 0}, as an engine ideal.
template <class R>
typename R::Ideal annihilator(const FPModule<R>& m, std::span<const typename R::Element> x) {
    using E = typename R::Element;
    require(x.size() == m.generators(), ErrorKind::InvalidInput, "element length differs from generator count");
    Matrix<E> stacked(0, m.generators());
    stacked.append_row(x);
    stacked.append_rows(m.relations().basis);
    auto null = left_nullspace<R>(stacked);
    typename R::Ideal ideal{};
    for (std::size_t i = 0; i < null.rows(); ++i)
        if (!R::is_zero(null(i, 0))) ideal = R::ideal_sum(ideal, R::ideal_of(null(i, 0)));
    return engine_ideal<R>(m.engine(), ideal);
}

} // namespace entl
