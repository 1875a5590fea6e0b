#pragma once

// JSON problem documents and report emission. Matrices in documents follow the
// column convention (column j is the image of generator j); internally every
// map is stored by rows, so they are transposed on the way in.

#include <memory>
#include <string>
#include <variant>

#include <json.hpp>

#include "dynamics.hpp"

namespace entl::io {

using json = nlohmann::json;

inline std::string scalar_text(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    fail(ErrorKind::InvalidInput, "expected an integer or a rational string, got " + j.dump());
}

inline Rational parse_q(const json& j) { return parse_rational(scalar_text(j)); }

inline Integer parse_z(const json& j) {
    Rational q = parse_q(j);
    require(q.get_den() == 1, ErrorKind::InvalidInput, "expected an integer, got " + j.dump());
    return q.get_num();
}

template <class R>
typename R::Element parse_element(const json& j);

template <>
inline Integer parse_element<IntegerRing>(const json& j) {
    return parse_z(j);
}

/// Valuation elements: a constant, a list of [coeff, exponent] terms, or
/// {"num": terms, "den": terms} for a fraction of valuation-0 denominator.
inline GenPoly parse_terms(const json& j) {
    require(j.is_array(), ErrorKind::InvalidInput, "expected a list of [coeff, exponent] pairs");
    std::vector<GenPoly::Term> terms;
    for (auto& t : j) {
        require(t.is_array() && t.size() == 2, ErrorKind::InvalidInput, "term must be [coeff, exponent]");
        Rational e = parse_q(t[1]);
        require(e >= 0, ErrorKind::InvalidInput, "exponents must be >= 0");
        terms.push_back({e, parse_q(t[0])});
    }
    return GenPoly::from_terms(std::move(terms));
}

template <>
inline ValElement parse_element<ValuationRing>(const json& j) {
    if (j.is_string() || j.is_number()) return ValElement::monomial(parse_q(j), 0);
    if (j.is_object()) return ValElement::fraction(parse_terms(j.at("num")), parse_terms(j.at("den")));
    return ValElement::from_poly(parse_terms(j));
}

template <class R>
std::vector<typename R::Element> parse_vector(const json& j) {
    require(j.is_array(), ErrorKind::InvalidInput, "expected a vector");
    std::vector<typename R::Element> v;
    for (auto& x : j) v.push_back(parse_element<R>(x));
    return v;
}

/// Rows as written (relations, seed generators).
template <class R>
Matrix<typename R::Element> parse_rows(const json& j, std::size_t width) {
    Matrix<typename R::Element> m(0, width);
    require(j.is_array(), ErrorKind::InvalidInput, "expected a list of rows");
    for (auto& r : j) {
        auto v = parse_vector<R>(r);
        require(v.size() == width, ErrorKind::InvalidInput, "row of length " + std::to_string(v.size()) +
                                                               ", expected " + std::to_string(width));
        m.append_row(v);
    }
    return m;
}

/// A map matrix in column convention, shape target x source, returned by rows.
template <class R>
Matrix<typename R::Element> parse_map(const json& j, std::size_t source, std::size_t target) {
    require(j.is_array(), ErrorKind::InvalidInput, "expected a matrix");
    if (target == 0 || source == 0) return Matrix<typename R::Element>(source, target, R::zero());
    auto cols = parse_rows<R>(j, source);
    require(cols.rows() == target, ErrorKind::InvalidInput,
            "map matrix needs " + std::to_string(target) + " rows (one per target generator)");
    return cols.transposed();
}

inline Engine parse_engine(const json& j) {
    const std::string e = j.at("engine").get<std::string>();
    if (e == "integers") return Engine::integers();
    if (e == "modular") return Engine::modular(parse_z(j.at("m")));
    if (e == "prime_field") return Engine::prime_field(parse_z(j.at("p")));
    if (e == "valuation") return Engine::valuation();
    fail(ErrorKind::InvalidInput, "unknown engine '" + e + "'");
}

template <class R>
FPModule<R> parse_module(const Engine& e, const json& j) {
    if (j.contains("cyclic")) return FPModule<R>::cyclic(e, parse_element<R>(j.at("cyclic")));
    const std::size_t g = j.at("generators").get<std::size_t>();
    Matrix<typename R::Element> rel(0, g);
    if (j.contains("relations")) rel = parse_rows<R>(j.at("relations"), g);
    return FPModule<R>(e, g, rel);
}

template <class R>
typename ShiftFamily<R>::Tail parse_tail(const Engine& e, const json& j, long start) {
    if (j.contains("cuts")) {
        if constexpr (std::is_same_v<R, ValuationRing>) return CutSequence::parse(j.at("cuts").get<std::string>(), start);
        else fail(ErrorKind::UnsupportedPair, "cut sequences need the valuation engine");
    }
    return parse_module<R>(e, j);
}

template <class R>
Band<R> parse_band(const json& j, const ShiftFamily<R>& fam) {
    Band<R> b;
    const json& off = j.at("offset");
    if (off.is_array()) b.offset = {off.at(0).get<long>(), off.at(1).get<long>()};
    else b.offset = {off.get<long>(), 0};
    long k = fam.index() == IndexKind::Nat ? fam.first() : 0;
    auto gens_at = [&](Pos p) { return fam.in_domain(p) ? fam.component(p).generators() : std::size_t(0); };
    if (j.contains("prefix"))
        for (auto& m : j.at("prefix")) {
            Pos p{k++, 0};
            b.prefix.push_back(parse_map<R>(m, gens_at(p), gens_at(p + b.offset)));
        }
    require(j.contains("periodic") && !j.at("periodic").empty(), ErrorKind::InvalidInput, "band needs a periodic list");
    long base = fam.index() == IndexKind::Nat ? std::max(k, fam.tail_start()) : 0;
    // Periodic entries are indexed from the end of the band prefix; shapes are
    // read off the first grade where each entry applies.
    long start = fam.index() == IndexKind::Nat ? k : 0;
    long per = static_cast<long>(j.at("periodic").size());
    for (long t = 0; t < per; ++t) {
        long g = start + t;
        while (fam.index() == IndexKind::Nat && g < base) g += per;
        Pos p{g, 0};
        b.periodic.push_back(parse_map<R>(j.at("periodic")[t], gens_at(p), gens_at(p + b.offset)));
    }
    return b;
}

template <class R>
BandedEndo<R> parse_banded(const json& j, const ShiftFamily<R>& fam) {
    BandedEndo<R> e;
    for (auto& b : j.at("bands")) e.bands.push_back(parse_band<R>(b, fam));
    return e;
}

template <class R>
struct Problem;

template <class R>
struct Embedding {
    std::shared_ptr<Problem<R>> sub;
    std::optional<Morphism<R>> fp_map;
    std::optional<FamilyEmbedding<R>> family_map;
};

template <class R>
struct Problem {
    Engine engine;
    LengthId length = LengthId::LogCard;
    std::optional<ModPtr<R>> module;
    std::optional<ShiftFamily<R>> family;
    std::vector<Morphism<R>> maps;
    std::vector<BandedEndo<R>> bands;
    std::optional<SeedArg<R>> seed;
    std::optional<SeedArg<R>> x;
    std::optional<Embedding<R>> embedding;
    std::optional<long> n;

    bool is_family() const { return family.has_value(); }

    EndoSystem<R> system() const {
        if (family) {
            require(!bands.empty(), ErrorKind::InvalidInput, "document has no endo");
            return EndoSystem<R>::family({*family, bands[0]}, length);
        }
        require(module && !maps.empty(), ErrorKind::InvalidInput, "document has no module or endo");
        return EndoSystem<R>::fp(maps[0], length);
    }
    MultiEndoSystem<R> multi() const {
        if (family) return MultiEndoSystem<R>::shift(*family, bands, length);
        return MultiEndoSystem<R>::fp(maps, length);
    }
    /// Seed from the document, defaulting to the whole module or the first grade.
    SeedArg<R> seed_or_default() const {
        if (seed) return *seed;
        if (family) {
            Pos p{family->index() == IndexKind::Nat ? family->first() : 0, 0};
            return Seed<R>::component(p);
        }
        return torsion_submodule(length, *module);
    }
};

template <class R>
std::optional<SeedArg<R>> parse_seed(const json& j, const Problem<R>& p) {
    if (p.family) {
        Seed<R> s;
        auto pos_of = [](const json& g) {
            if (g.is_array()) return Pos{g.at(0).get<long>(), g.at(1).get<long>()};
            return Pos{g.get<long>(), 0};
        };
        if (j.contains("grades"))
            for (auto& g : j.at("grades")) s.whole.push_back(pos_of(g));
        if (j.contains("elements"))
            for (auto& e : j.at("elements")) s.elements.push_back({pos_of(e.at("grade")), parse_vector<R>(e.at("coords"))});
        if (j.contains("grade")) s.elements.push_back({pos_of(j.at("grade")), parse_vector<R>(j.at("coords"))});
        for (auto& e : s.elements) {
            require(p.family->in_domain(e.pos), ErrorKind::InvalidInput, "seed grade outside the index set");
            require(e.coords.size() == p.family->component(e.pos).generators(), ErrorKind::InvalidInput,
                    "seed coordinates do not match the component at " + e.pos.to_string());
        }
        return SeedArg<R>(s);
    }
    const auto& m = *p.module;
    if (j.is_string() && j.get<std::string>() == "whole") return SeedArg<R>(Submodule<R>::whole(m));
    if (j.is_string() && j.get<std::string>() == "torsion") return SeedArg<R>(torsion_submodule(p.length, m));
    if (j.is_array() && !j.empty() && !j[0].is_array()) {
        Matrix<typename R::Element> rows(0, m->generators());
        rows.append_row(parse_vector<R>(j));
        return SeedArg<R>(Submodule<R>::generated(m, rows));
    }
    const json& gens = j.is_object() ? j.at("gens") : j;
    return SeedArg<R>(Submodule<R>::generated(m, parse_rows<R>(gens, m->generators())));
}

template <class R>
BandedEndo<R> parse_family_endo(const json& j, const ShiftFamily<R>& fam, const BandedEndo<R>& fallback) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        const std::size_t g = fam.index() == IndexKind::Nat ? fam.component({fam.first(), 0}).generators()
                                                             : fam.component({0, 0}).generators();
        if (s == "shift") return fallback;
        if (s == "identity") return identity_shift<R>(g, Pos{0, 0});
        if (s == "shift_i") return identity_shift<R>(g, Pos{1, 0});
        if (s == "shift_j") return identity_shift<R>(g, Pos{0, 1});
        if (s == "inverse_shift") return identity_shift<R>(g, Pos{-1, 0});
        fail(ErrorKind::InvalidInput, "unknown endo '" + s + "'");
    }
    return parse_banded<R>(j, fam);
}

template <class R>
Morphism<R> parse_fp_endo(const json& j, const ModPtr<R>& m) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "identity") return Morphism<R>::identity(m);
        if (s == "zero") return Morphism<R>::zero(m, m);
        fail(ErrorKind::InvalidInput, "unknown endo '" + s + "'");
    }
    if (j.is_object() && j.contains("scalar")) return Morphism<R>::scalar(m, parse_element<R>(j.at("scalar")));
    const json& mat = j.is_object() ? j.at("matrix") : j;
    return Morphism<R>(m, m, parse_map<R>(mat, m->generators(), m->generators()));
}

/// Ambient (module or family) with its endos; shared by the main body and embeddings.
template <class R>
void parse_ambient(const json& j, Problem<R>& p) {
    const json& mod = j.at("module");
    BandedEndo<R> fallback;
    if (mod.contains("family")) {
        const std::string kind = mod.at("family").get<std::string>();
        if (kind == "bernoulli") {
            auto fs = bernoulli(parse_module<R>(p.engine, mod.at("component")), mod.value("first", 0L));
            p.family = fs.family;
            fallback = fs.endo;
        } else if (kind == "two_sided") {
            auto fs = two_sided(parse_module<R>(p.engine, mod.at("component")));
            p.family = fs.family;
            fallback = fs.endo;
        } else if (kind == "grid2d") {
            auto [fam, endos] = grid2d(parse_module<R>(p.engine, mod.at("component")));
            p.family = fam;
            fallback = endos[0];
            if (!j.contains("endo") && !j.contains("endos")) p.bands = endos;
        } else if (kind == "bernoulli_sigma") {
            if constexpr (std::is_same_v<R, ValuationRing>) {
                const json& cuts = mod.at("cuts");
                long first = mod.value("first", 1L);
                std::vector<Rational> prefix;
                if (cuts.contains("prefix"))
                    for (auto& c : cuts.at("prefix")) prefix.push_back(parse_q(c));
                auto tail = CutSequence::parse(cuts.at("tail").get<std::string>(), first + static_cast<long>(prefix.size()));
                auto fs = bernoulli_sigma(prefix, tail, first);
                p.family = fs.family;
                fallback = fs.endo;
            } else {
                fail(ErrorKind::UnsupportedPair, "bernoulli_sigma needs the valuation engine");
            }
        } else if (kind == "custom") {
            const std::string idx = mod.value("index", std::string("nat"));
            IndexKind ik = idx == "nat" ? IndexKind::Nat : idx == "int" ? IndexKind::Int : IndexKind::Grid2;
            require(idx == "nat" || idx == "int" || idx == "grid2", ErrorKind::InvalidInput, "unknown index '" + idx + "'");
            long first = ik == IndexKind::Nat ? mod.value("first", 0L) : 0;
            std::vector<FPModule<R>> prefix;
            if (mod.contains("prefix"))
                for (auto& c : mod.at("prefix")) prefix.push_back(parse_module<R>(p.engine, c));
            auto tail = parse_tail<R>(p.engine, mod.at("tail"), first + static_cast<long>(prefix.size()));
            p.family = ShiftFamily<R>(p.engine, ik, first, std::move(prefix), std::move(tail), FamilyKind::Custom);
        } else {
            fail(ErrorKind::InvalidInput, "unknown family '" + kind + "'");
        }
        if (j.contains("endos"))
            for (auto& e : j.at("endos")) p.bands.push_back(parse_family_endo<R>(e, *p.family, fallback));
        else if (j.contains("endo")) p.bands.push_back(parse_family_endo<R>(j.at("endo"), *p.family, fallback));
        else if (p.bands.empty()) {
            require(!fallback.bands.empty(), ErrorKind::InvalidInput, "custom families need an explicit endo");
            p.bands.push_back(fallback);
        }
        for (auto& b : p.bands) validate_endo(*p.family, b);
        return;
    }
    p.module = share(parse_module<R>(p.engine, mod));
    if (j.contains("endos"))
        for (auto& e : j.at("endos")) p.maps.push_back(parse_fp_endo<R>(e, *p.module));
    else if (j.contains("endo")) p.maps.push_back(parse_fp_endo<R>(j.at("endo"), *p.module));
}

template <class R>
Problem<R> parse_problem_as(const json& j, const Engine& e) {
    Problem<R> p;
    p.engine = e;
    p.length = parse_length_id(j.value("length", std::string(e.kind == EngineKind::Valuation ? "lv" : "logCard")));
    check_pair(p.length, e);
    parse_ambient(j, p);
    if (j.contains("seed")) p.seed = parse_seed(j.at("seed"), p);
    if (j.contains("x")) p.x = parse_seed(j.at("x"), p);
    if (j.contains("n")) p.n = j.at("n").get<long>();
    if (j.contains("embedding")) {
        const json& emb = j.at("embedding");
        Embedding<R> em;
        em.sub = std::make_shared<Problem<R>>();
        em.sub->engine = e;
        em.sub->length = p.length;
        parse_ambient(emb, *em.sub);
        require(em.sub->is_family() == p.is_family(), ErrorKind::InvalidInput,
                "embedding and ambient must both be modules or both be families");
        if (p.is_family()) {
            FamilyEmbedding<R> fe;
            const json& m = emb.at("map");
            const auto& sf = *em.sub->family;
            auto gens = [&](const ShiftFamily<R>& f, Pos q) { return f.in_domain(q) ? f.component(q).generators() : 0; };
            long k = sf.index() == IndexKind::Nat ? sf.first() : 0;
            if (m.is_object() && m.contains("prefix"))
                for (auto& x : m.at("prefix")) {
                    Pos q{k++, 0};
                    fe.prefix.push_back(parse_map<R>(x, gens(sf, q), gens(*p.family, q)));
                }
            const json& per = m.is_object() ? m.at("periodic") : json::array({m});
            long base = sf.index() == IndexKind::Nat ? std::max({k, sf.tail_start(), p.family->tail_start()}) : 0;
            for (std::size_t t = 0; t < per.size(); ++t) {
                long g = k + static_cast<long>(t);
                while (sf.index() == IndexKind::Nat && g < base) g += static_cast<long>(per.size());
                Pos q{g, 0};
                fe.periodic.push_back(parse_map<R>(per[t], gens(sf, q), gens(*p.family, q)));
            }
            em.family_map = fe;
        } else {
            em.fp_map = Morphism<R>(*em.sub->module, *p.module,
                                    parse_map<R>(emb.at("map"), (*em.sub->module)->generators(), (*p.module)->generators()));
        }
        p.embedding = em;
    }
    return p;
}

using AnyProblem = std::variant<Problem<IntegerRing>, Problem<ValuationRing>>;

inline AnyProblem parse_problem(const json& j) {
    try {
        Engine e = parse_engine(j.at("ring"));
        if (e.kind == EngineKind::Valuation) return parse_problem_as<ValuationRing>(j, e);
        return parse_problem_as<IntegerRing>(j, e);
    } catch (const json::exception& ex) {
        fail(ErrorKind::InvalidInput, std::string("malformed document: ") + ex.what());
    }
}

// ---- emission ----

inline json lv_json(const LengthValue& v) { return v.to_string(); }

inline json to_json(const EntropyResult& r) {
    json j;
    j["lower"] = lv_json(r.lower);
    j["upper"] = lv_json(r.upper);
    j["exact"] = r.exact ? json(lv_json(*r.exact)) : json(nullptr);
    j["certificate"] = std::string(to_string(r.certificate));
    if (!r.kind.empty()) j["kind"] = r.kind;
    j["steps_used"] = r.steps_used;
    j["lower_float"] = r.lower.to_double();
    j["upper_float"] = r.upper.is_infinite() ? json("inf") : json(r.upper.to_double());
    return j;
}

inline json to_json(const ATReport& r) {
    json j;
    j["ent_N"] = to_json(r.ent_n);
    j["ent_M"] = to_json(r.ent_m);
    j["ent_Q"] = to_json(r.ent_q);
    j["verdict"] = std::string(to_string(r.verdict));
    j["forced"] = r.forced;
    if (!r.warning.empty()) j["warning"] = r.warning;
    return j;
}

inline std::string ideal_text(const IntIdeal& i) { return i.to_string(); }
inline std::string ideal_text(const IdealCut& i) { return i.to_string(); }

} // namespace entl::io
