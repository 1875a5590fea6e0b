// entl: batch front end for problem documents.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <entl/io.hpp>
#include <entl/oracle.hpp>

using namespace entl;
using io::json;

namespace {

struct Flags {
    std::string doc;
    std::size_t budget = 64;
    std::uint64_t seed = 1;
    std::size_t count = 20;
    std::string format = "json";
    bool force = false;
    long precision_bits = 256;
    long n = -1;
    std::string output;
};

constexpr int kExitInvalid = 2;
constexpr int kExitNotLocallyFinite = 3;
constexpr int kExitBoundsOnly = 4;

struct Output {
    json body;
    std::string csv;
    int code = 0;
};

json read_doc(const std::string& path) {
    std::stringstream ss;
    if (path == "-") ss << std::cin.rdbuf();
    else {
        std::ifstream in(path);
        require(in.good(), ErrorKind::InvalidInput, "cannot open " + path);
        ss << in.rdbuf();
    }
    try {
        return json::parse(ss.str());
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidInput, std::string("not valid JSON: ") + e.what());
    }
}

int code_of(const EntropyResult& r) { return r.is_exact() ? 0 : kExitBoundsOnly; }

std::string csv_float(const LengthValue& v) {
    if (v.is_infinite()) return "inf";
    std::ostringstream os;
    os.precision(12);
    os << v.to_double();
    return os.str();
}

template <class R>
std::size_t steps_for(const io::Problem<R>& p, const Flags& f, std::size_t fallback) {
    if (f.n >= 0) return static_cast<std::size_t>(f.n);
    if (p.n) return static_cast<std::size_t>(*p.n);
    return fallback;
}

template <class R>
Output cmd_length(const io::Problem<R>& p, const Flags&) {
    Output o;
    o.body["length_id"] = std::string(to_string(p.length));
    if (p.family) {
        o.body["family"] = p.family->describe();
        o.body["component_sup"] = io::lv_json(p.family->component_sup(p.length));
        o.body["locally_finite"] = p.family->components_L_finite(p.length);
        return o;
    }
    const auto& m = *p.module;
    auto [inv, free_rank] = module_invariants(*m);
    json invs = json::array();
    for (auto& d : inv) invs.push_back(R::to_string(d));
    o.body["invariants"] = invs;
    o.body["free_rank"] = free_rank;
    o.body["length"] = io::lv_json(length(p.length, *m));
    o.body["torsion_length"] = io::lv_json(torsion_length(p.length, *m));
    o.body["locally_finite"] = is_locally_L_finite(p.length, *m);
    if (p.seed) o.body["seed_length"] = io::lv_json(length(p.length, std::get<Submodule<R>>(*p.seed)));
    return o;
}

template <class R>
Output cmd_entropy(const io::Problem<R>& p, const Flags& f) {
    auto sys = p.system();
    EntropyResult r = p.seed ? entropy_of(sys, *p.seed, f.budget) : entropy(sys, f.budget, f.force);
    Output o;
    o.body = io::to_json(r);
    o.code = code_of(r);
    return o;
}

template <class R>
Output cmd_alpha(const io::Problem<R>& p, const Flags& f) {
    auto sys = p.system();
    const std::size_t n = steps_for(p, f, 16);
    auto a = alpha_seq(sys, p.seed_or_default(), n);
    Output o;
    std::ostringstream csv;
    csv << "n,alpha_exact,alpha_float,Ln_over_n_float\n";
    json rows = json::array();
    for (std::size_t k = 1; k <= n; ++k) {
        const LengthValue& al = a.alpha[k - 1];
        LengthValue ln = lv_scale(a.lengths[k - 1], Rational(1, static_cast<long>(k)));
        csv << k << "," << al.to_string() << "," << csv_float(al) << "," << csv_float(ln) << "\n";
        rows.push_back({{"n", k}, {"alpha", io::lv_json(al)}, {"L_T_n", io::lv_json(a.lengths[k - 1])}});
    }
    o.csv = csv.str();
    o.body["alpha"] = rows;
    return o;
}

template <class R>
Output cmd_colon(const io::Problem<R>& p, const Flags& f) {
    auto sys = p.system();
    const std::size_t n = steps_for(p, f, 16);
    auto c = colon_chain(sys, p.x ? *p.x : p.seed_or_default(), n);
    Output o;
    std::ostringstream csv;
    csv << "n,J_n,cyclic_length,alpha_n,match\n";
    json rows = json::array();
    for (std::size_t k = 0; k < c.J.size(); ++k) {
        bool match = c.cyclic[k] == c.alpha[k];
        csv << k << "," << io::ideal_text(c.J[k]) << "," << c.cyclic[k].to_string() << "," << c.alpha[k].to_string() << ","
            << (match ? "yes" : "no") << "\n";
        rows.push_back({{"n", k},
                        {"J_n", io::ideal_text(c.J[k])},
                        {"cyclic_length", io::lv_json(c.cyclic[k])},
                        {"alpha_n", io::lv_json(c.alpha[k])}});
    }
    o.csv = csv.str();
    o.body["chain"] = rows;
    o.body["consistent"] = c.consistent;
    return o;
}

template <class R>
Output cmd_at(const io::Problem<R>& p, const Flags& f) {
    require(p.embedding.has_value(), ErrorKind::InvalidInput, "at-check needs an \"embedding\" section");
    const auto& em = *p.embedding;
    ATReport r = p.is_family()
                     ? at_check(em.sub->system().fam(), p.system().fam(), *em.family_map, p.length, f.budget, f.force)
                     : at_check(em.sub->system(), p.system(), *em.fp_map, f.budget, f.force);
    Output o;
    o.body = io::to_json(r);
    if (!r.warning.empty()) std::cerr << "warning: " << r.warning << "\n";
    return o;
}

template <class R>
Output cmd_mult(const io::Problem<R>& p, const Flags& f) {
    auto r = multiplicity(p.system(), f.budget, f.force);
    Output o;
    o.body = io::to_json(r);
    o.code = code_of(r);
    return o;
}

template <class R>
Output cmd_multivar(const io::Problem<R>& p, const Flags& f) {
    auto ms = p.multi();
    auto r = multivar_entropy(ms, p.seed_or_default(), f.budget);
    Output o;
    o.body = io::to_json(r.result);
    json norm = json::array();
    std::ostringstream csv;
    csv << "n,normalized_exact,normalized_float\n";
    for (std::size_t k = 0; k < r.normalized.size(); ++k) {
        norm.push_back(io::lv_json(r.normalized[k]));
        csv << k + 1 << "," << r.normalized[k].to_string() << "," << csv_float(r.normalized[k]) << "\n";
    }
    o.body["normalized"] = norm;
    o.csv = csv.str();
    o.code = code_of(r.result);
    return o;
}

template <class R>
Output cmd_hyperkernel(const io::Problem<R>& p, const Flags& f) {
    auto sys = p.system();
    auto h = hyperkernel_reduce(sys, f.budget);
    Output o;
    o.body["final"] = h.final;
    o.body["steps"] = h.steps;
    o.body["kernel_length"] = io::lv_json(h.kernel_length);
    o.body["description"] = h.description;
    o.body["entropy_before"] = io::to_json(entropy(sys, f.budget, f.force));
    o.body["entropy_after"] = io::to_json(entropy(h.reduced, f.budget, f.force));
    return o;
}

template <class R>
Output cmd_auto(const io::Problem<R>& p, const Flags& f) {
    auto r = auto_entropy(p.system(), p.seed_or_default(), f.budget);
    Output o;
    o.body = io::to_json(r);
    o.code = code_of(r);
    return o;
}

/// B_sigma along gamma_n = 1 + 1/n and gamma_n = 1/n: alpha tables, closed forms, J_n.
Output cmd_uniqueness(const Flags& f) {
    Output o;
    std::ostringstream csv;
    csv << "cuts,n,alpha_exact,alpha_float,J_n\n";
    for (const char* rule : {"1 + 1/n", "1/n"}) {
        auto fs = bernoulli_sigma(rule);
        auto sys = EndoSystem<ValuationRing>::family(fs, LengthId::Lv);
        auto seed = SeedArg<ValuationRing>(Seed<ValuationRing>::component({1, 0}));
        const std::size_t n = f.n >= 0 ? static_cast<std::size_t>(f.n) : f.budget;
        auto a = alpha_seq(sys, seed, n);
        auto chain = colon_chain(sys, seed, std::min<std::size_t>(n, 16));
        json rows = json::array();
        for (std::size_t k = 1; k <= n; ++k) {
            std::string jn = k < chain.J.size() ? chain.J[k].to_string() : "";
            csv << '"' << rule << "\"," << k << "," << a.alpha[k - 1].to_string() << "," << csv_float(a.alpha[k - 1]) << ","
                << jn << "\n";
            rows.push_back({{"n", k}, {"alpha", io::lv_json(a.alpha[k - 1])}});
        }
        json block;
        block["alpha"] = rows;
        block["closed_form"] = io::lv_json(closed_form_value(LengthId::Lv, fs.family, fs.endo));
        block["seed_entropy"] = io::to_json(entropy_of(sys, seed, n));
        block["trajectory_length"] = io::lv_json(a.lengths[n - 1]);
        block["colon_chain_consistent"] = chain.consistent;
        o.body[rule] = block;
    }
    o.csv = csv.str();
    return o;
}

/// Oracle agreement and trajectory properties on seeded random systems.
Output cmd_suite(const Flags& f) {
    std::size_t length_ok = 0, traj_ok = 0, mono_ok = 0, fekete_ok = 0;
    json failures = json::array();
    for (std::size_t k = 0; k < f.count; ++k) {
        const std::uint64_t s = f.seed + k;
        oracle::InstanceSpec spec;
        spec.seed = s;
        spec.modulus = std::vector<long>{4, 6, 8, 12}[s % 4];
        auto in = oracle::gen_system(spec);
        auto m = in.module();
        if (length(LengthId::LogCard, *m) == oracle::count_length(*m)) ++length_ok;
        else failures.push_back({{"seed", s}, {"property", "length"}});
        auto sys = in.system();
        auto seed = in.seed_submodule(m);
        const std::size_t n = 6;
        auto run = run_trajectory(sys.map(), seed, LengthId::LogCard, n);
        auto brute = oracle::brute_trajectory(in.relations, in.phi, in.seed, in.gens(), in.modulus, n);
        if (oracle::matches(brute, run.T[n])) ++traj_ok;
        else failures.push_back({{"seed", s}, {"property", "trajectory"}});
        bool mono = true, fek = true;
        for (std::size_t i = 1; i + 1 < run.alpha.size(); ++i) mono = mono && run.alpha[i + 1] <= run.alpha[i];
        for (std::size_t a = 1; a < run.length.size(); ++a)
            for (std::size_t b = 1; a + b < run.length.size(); ++b)
                fek = fek && run.length[a + b] <= lv_add(run.length[a], run.length[b]);
        mono ? ++mono_ok : (failures.push_back({{"seed", s}, {"property", "alpha_monotone"}}), 0);
        fek ? ++fekete_ok : (failures.push_back({{"seed", s}, {"property", "fekete"}}), 0);
    }
    Output o;
    auto prop = [&](std::size_t ok) { return json{{"passed", ok}, {"total", f.count}, {"ok", ok == f.count}}; };
    o.body["seed"] = f.seed;
    o.body["length_vs_enumeration"] = prop(length_ok);
    o.body["trajectory_vs_closure"] = prop(traj_ok);
    o.body["alpha_monotone"] = prop(mono_ok);
    o.body["fekete"] = prop(fekete_ok);
    o.body["failures"] = failures;
    o.code = failures.empty() ? 0 : 1;
    return o;
}

template <class Fn>
Output on_problem(const Flags& f, Fn&& fn) {
    auto doc = read_doc(f.doc);
    auto problem = io::parse_problem(doc);
    return std::visit([&](const auto& p) { return fn(p); }, problem);
}

void emit(const Output& o, const Flags& f) {
    std::string text;
    if (f.format == "csv" && !o.csv.empty()) text = o.csv;
    else text = o.body.dump(2) + "\n";
    if (f.output.empty()) std::cout << text;
    else {
        std::ofstream out(f.output);
        require(out.good(), ErrorKind::InvalidInput, "cannot write " + f.output);
        out << text;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entl: algebraic entropy of module endomorphisms"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--budget", f.budget, "trajectory steps")->capture_default_str();
    app.add_option("--seed", f.seed, "first random seed (suite)")->capture_default_str();
    app.add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    app.add_flag("--force", f.force, "compute even when the module is not locally L-finite");
    app.add_option("--precision-bits", f.precision_bits, "interval precision for comparisons")->capture_default_str();
    app.add_option("-o,--output", f.output, "write the report here instead of stdout");

    struct Cmd {
        const char* name;
        const char* help;
        bool needs_doc;
    };
    const Cmd cmds[] = {
        {"length", "module invariants and lengths", true},
        {"entropy", "entropy with a certificate or sound bounds", true},
        {"alpha", "alpha sequence table", true},
        {"colon-chain", "colon ideals J_n against alpha_n", true},
        {"at-check", "addition check on an embedding", true},
        {"mult", "multiplicity symbol", true},
        {"multivar", "entropy of commuting endos over boxes", true},
        {"hyperkernel", "factor out the hyperkernel and compare entropies", true},
        {"auto-entropy", "entropy through the inverse trajectory", true},
        {"uniqueness-demo", "cut-sequence experiments end to end", false},
        {"suite", "oracle agreement on seeded random systems", false},
    };
    for (auto& c : cmds) {
        auto* sub = app.add_subcommand(c.name, c.help);
        if (c.needs_doc) sub->add_option("doc", f.doc, "problem document (JSON, '-' for stdin)")->required();
        sub->add_option("--n", f.n, "number of steps");
        if (std::string(c.name) == "suite") sub->add_option("--count", f.count, "instances")->capture_default_str();
    }
    CLI11_PARSE(app, argc, argv);
    precision_bits_setting() = f.precision_bits;
    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        Output o;
        auto run = [&](auto&& fn) { return on_problem(f, fn); };
        if (cmd == "length") o = run([&](const auto& p) { return cmd_length(p, f); });
        else if (cmd == "entropy") o = run([&](const auto& p) { return cmd_entropy(p, f); });
        else if (cmd == "alpha") o = run([&](const auto& p) { return cmd_alpha(p, f); });
        else if (cmd == "colon-chain") o = run([&](const auto& p) { return cmd_colon(p, f); });
        else if (cmd == "at-check") o = run([&](const auto& p) { return cmd_at(p, f); });
        else if (cmd == "mult") o = run([&](const auto& p) { return cmd_mult(p, f); });
        else if (cmd == "multivar") o = run([&](const auto& p) { return cmd_multivar(p, f); });
        else if (cmd == "hyperkernel") o = run([&](const auto& p) { return cmd_hyperkernel(p, f); });
        else if (cmd == "auto-entropy") o = run([&](const auto& p) { return cmd_auto(p, f); });
        else if (cmd == "uniqueness-demo") o = cmd_uniqueness(f);
        else o = cmd_suite(f);
        emit(o, f);
        return o.code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::NotLocallyFinite ? kExitNotLocallyFinite : kExitInvalid;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
