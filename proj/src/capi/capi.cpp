#include "dwitt/dwitt.h"

#include <cstring>
#include <functional>
#include <map>
#include <string>

#include <json.hpp>

#include "dwitt/acceptance.hpp"
#include "dwitt/arith.hpp"
#include "dwitt/derham.hpp"
#include "dwitt/dieudonne.hpp"
#include "dwitt/drw.hpp"
#include "dwitt/error.hpp"
#include "dwitt/matrix.hpp"
#include "dwitt/mixed.hpp"
#include "dwitt/witt.hpp"

using nlohmann::json;
using namespace dwitt;
using arith::IntMatrix;
using arith::MPoly;

struct dwitt_context {
    std::string last_error;
    std::map<std::string, unsigned long> budgets{
        {"adjunction_budget", mixed::default_adjunction_budget},
        {"span_budget", drw::default_span_budget},
        {"saturation_cap", drw::default_saturation_cap},
    };
};

struct dwitt_result {
    std::string json;
    std::string text;
    bool pass = true;
};

namespace {

constexpr int schema_version = 1;

struct Outcome {
    json result;
    bool pass;
    std::string text;  // empty: the result itself is printed

    Outcome(json r, bool ok = true, std::string t = {}) : result(std::move(r)), pass(ok), text(std::move(t)) {}
};

using Handler = std::function<Outcome(const json&, dwitt_context&)>;

// ------------------------------------------------------------ argument helpers

const json& need(const json& a, const char* key)
{
    if (!a.contains(key))
        fail(ErrorCode::Usage, std::string("missing argument \"") + key + "\"");
    return a.at(key);
}

unsigned long prime(const json& a)
{
    unsigned long p = need(a, "p").get<unsigned long>();
    if (!arith::is_prime(p))
        fail(ErrorCode::Usage, "p must be prime, got " + std::to_string(p));
    return p;
}

std::vector<std::string> vars_of(const json& a, const char* key = "variables")
{
    if (!a.contains(key))
        return {};
    const auto& v = a.at(key);
    if (v.is_string())
        return arith::parse_variable_list(v.get<std::string>());
    return v.get<std::vector<std::string>>();
}

MPoly poly(const json& v, const std::vector<std::string>& vars)
{
    return MPoly::parse(v.is_string() ? v.get<std::string>() : v.dump(), vars);
}

unsigned long budget(const json& a, const dwitt_context& ctx, const char* name)
{
    if (a.contains(name))
        return a.at(name).get<unsigned long>();
    return ctx.budgets.at(name);
}

// A Witt vector given inline ({"p", "coords", ...}) or under a key.
witt::WittVector witt_arg(const json& a, const char* key)
{
    const json& j = a.contains(key) ? a.at(key) : a;
    json w = j;
    if (!w.contains("p") && a.contains("p"))
        w["p"] = a["p"];
    if (!w.contains("variables") && a.contains("variables"))
        w["variables"] = a["variables"];
    if (!w.contains("modulus") && a.contains("modulus"))
        w["modulus"] = a["modulus"];
    if (a.contains("n") && w.at("coords").size() != a["n"].get<std::size_t>())
        fail(ErrorCode::ShapeMismatch, "expected " + a["n"].dump() + " coordinates");
    return witt::WittVector::from_json(w);
}

witt::DeltaRing delta_ring(const json& a, const char* key = "ring")
{
    const json& r = a.contains(key) ? a.at(key) : a;
    if (!r.contains("lift")) {
        json s = r;
        return witt::DeltaRing::standard(prime(s), vars_of(s));
    }
    json j = r;
    if (j.contains("variables") && j["variables"].is_string())
        j["variables"] = arith::parse_variable_list(j["variables"].get<std::string>());
    if (j["lift"].is_string())
        j["lift"] = json::array({j["lift"]});
    return witt::DeltaRing::from_json(j);
}

witt::BigWittVector series_arg(const json& a, const char* key)
{
    const json& s = need(a, key);
    const json& cs = s.is_array() ? s : s.at("coefficients");
    auto vars = s.is_object() ? vars_of(s) : vars_of(a);
    if (cs.empty())
        fail(ErrorCode::Usage, "a series needs its constant coefficient");
    witt::BigWittVector w;
    w.K = cs.size() - 1;
    for (const auto& c : cs) w.c.push_back(poly(c, vars));
    if (!(w.c[0] == MPoly::constant(1, vars)))
        fail(ErrorCode::Usage, "big Witt vectors start with 1");
    w.exact = s.is_object() && s.value("exact", false);
    return w;
}

std::string list_text(const std::vector<MPoly>& v)
{
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].to_string();
    return s + "]";
}

json strings(const std::vector<MPoly>& v)
{
    json out = json::array();
    for (const auto& q : v) out.push_back(q.to_string());
    return out;
}

std::string report_text(const witt::LawReport& r)
{
    std::string s = r.pass ? "pass" : "fail";
    for (const auto& x : r.results)
        s += "\n  " + std::string(x.pass ? "ok   " : "FAIL ") + x.law + (x.pass || x.witness.empty() ? "" : "  [" + x.witness + "]");
    return s;
}

Outcome law_outcome(const witt::LawReport& r) { return {r.to_json(), r.pass, report_text(r)}; }

json witt_out(const witt::WittVector& x) { return {{"vector", x.to_json()}, {"text", x.to_string()}}; }

dieudonne::DieudonneComplex complex_arg(const json& a, const char* key = "complex")
{
    return dieudonne::DieudonneComplex::from_json(need(a, key));
}

mixed::GradedMixedComplex mixed_arg(const json& a, const char* key = "complex")
{
    return mixed::GradedMixedComplex::from_json(need(a, key));
}

json matrices(const std::vector<IntMatrix>& ms)
{
    json out = json::array();
    for (const auto& m : ms) out.push_back(m.to_json());
    return out;
}

// ------------------------------------------------------------------ arith

Outcome arith_smith(const json& a, dwitt_context&)
{
    auto A = IntMatrix::from_json(need(a, "matrix"));
    auto S = arith::smith_decompose(A);
    json diag = json::array();
    for (const auto& v : S.diagonal()) diag.push_back(v.get_str());
    return {{{"U", S.U.to_json()}, {"D", S.D.to_json()}, {"V", S.V.to_json()}, {"rank", S.rank}, {"diagonal", diag}}};
}

Outcome arith_intersect(const json& a, dwitt_context&)
{
    auto L = arith::lattice_intersect(IntMatrix::from_json(need(a, "a")), IntMatrix::from_json(need(a, "b")));
    return {{{"basis", L.to_json()}}};
}

Outcome arith_apply_map(const json& a, dwitt_context&)
{
    auto src = vars_of(a, "source"), dst = vars_of(a, "target");
    std::vector<MPoly> images;
    for (const auto& s : need(a, "images")) images.push_back(poly(s, dst));
    arith::RingMap f(src, dst, images);
    auto q = arith::apply_map(f, poly(need(a, "poly"), src));
    return {{{"result", q.to_string()}}, true, q.to_string()};
}

Outcome arith_div_p(const json& a, dwitt_context&)
{
    auto q = arith::exact_div_p(poly(need(a, "poly"), vars_of(a)), prime(a));
    return {{{"result", q.to_string()}}, true, q.to_string()};
}

// ------------------------------------------------------------------- witt

Outcome witt_ghost(const json& a, dwitt_context&)
{
    auto g = witt::ghost(witt_arg(a, "x"));
    return {{{"ghost", strings(g)}}, true, list_text(g)};
}

Outcome witt_from_ghost(const json& a, dwitt_context&)
{
    auto vars = vars_of(a);
    std::vector<MPoly> g;
    for (const auto& c : need(a, "ghost")) g.push_back(poly(c, vars));
    auto x = witt::from_ghost(g, prime(a));
    return {witt_out(x), true, x.to_string()};
}

Outcome witt_binary(const json& a, bool add)
{
    auto x = witt_arg(a, "x"), y = witt_arg(a, "y");
    auto z = add ? witt::witt_add(x, y) : witt::witt_mul(x, y);
    return {witt_out(z), true, z.to_string()};
}

Outcome witt_unary(const json& a, witt::WittVector (*f)(const witt::WittVector&))
{
    auto z = f(witt_arg(a, "x"));
    return {witt_out(z), true, z.to_string()};
}

Outcome witt_teich(const json& a, dwitt_context&)
{
    auto vars = vars_of(a);
    mpz_class modulus = 0;
    if (a.contains("modulus"))
        modulus = a["modulus"].is_string() ? mpz_class(a["modulus"].get<std::string>())
                                            : mpz_class(a["modulus"].get<long>());
    auto z = witt::teichmuller(poly(need(a, "a"), vars), prime(a), need(a, "n").get<std::size_t>(), modulus);
    return {witt_out(z), true, z.to_string()};
}

Outcome witt_delta(const json& a, dwitt_context&)
{
    auto R = delta_ring(a);
    std::vector<MPoly> samples;
    if (a.contains("samples"))
        for (const auto& s : a["samples"]) samples.push_back(poly(s, R.variables()));
    else
        samples = witt::default_delta_samples(R);
    json deltas = json::object();
    std::string text;
    if (a.contains("a")) {
        auto d = R.delta(poly(a["a"], R.variables()));
        deltas[a["a"].is_string() ? a["a"].get<std::string>() : a["a"].dump()] = d.to_string();
        text = "delta = " + d.to_string() + "\n";
    }
    for (std::size_t i = 0; i < R.variables().size(); ++i) {
        auto d = R.delta(MPoly::variable(i, R.variables()));
        deltas[R.variables()[i]] = d.to_string();
        text += "delta(" + R.variables()[i] + ") = " + d.to_string() + "\n";
    }
    auto laws = witt::delta_laws_check(R, samples), section = witt::w2_section_check(R, samples);
    bool pass = laws.pass && section.pass;
    text += "delta laws: " + report_text(laws) + "\nW_2 section: " + report_text(section);
    return {{{"ring", R.to_json()}, {"delta", deltas}, {"laws", laws.to_json()}, {"w2_section", section.to_json()}},
            pass,
            text};
}

Outcome witt_charpoly(const json& a, dwitt_context&)
{
    auto e = witt::EndoClass::from_json(need(a, "matrix"));
    auto w = witt::char_poly_witt(e, a.value("trunc", 8u));
    return {w.to_json(), true, w.to_string()};
}

Outcome witt_bigwitt_map(const json& a, bool frobenius)
{
    auto w = series_arg(a, "series");
    unsigned m = need(a, "m").get<unsigned>();
    auto z = frobenius ? witt::bigwitt_frobenius(w, m) : witt::bigwitt_verschiebung(w, m);
    return {z.to_json(), true, z.to_string()};
}

Outcome witt_bigwitt_add(const json& a, dwitt_context&)
{
    auto z = witt::bigwitt_add(series_arg(a, "a"), series_arg(a, "b"));
    return {z.to_json(), true, z.to_string()};
}

Outcome witt_ker(const json& a, dwitt_context&)
{
    bool member = witt::ker_membership(series_arg(a, "series"), need(a, "prime_bound").get<unsigned>());
    return {{{"member", member}}, true, member ? "true" : "false"};
}

// ----------------------------------------------------------------- derham

Outcome derham_build(const json& a, dwitt_context&)
{
    auto vars = vars_of(a);
    auto C = derham::build_de_rham(vars);
    json out = C.to_json();
    if (a.contains("degree_bound")) {
        unsigned D = a["degree_bound"].get<unsigned>();
        json basis = json::array();
        for (std::size_t i = 0; i <= C.arity(); ++i) {
            json forms = json::array();
            for (const auto& f : C.monomial_basis(static_cast<int>(i), D)) forms.push_back(f.to_json());
            basis.push_back(forms);
        }
        out["monomial_basis"] = basis;
    }
    return {out};
}

Outcome derham_frob(const json& a, dwitt_context&)
{
    auto R = delta_ring(a);
    auto C = derham::build_de_rham(R.variables());
    auto DR = derham::frobenius_on_forms(C, R);
    unsigned D = a.value("degree_bound", 4u);
    auto names = C.generator_names();
    witt::LawReport rep;
    witt::LawResult dF{"d F = p F d", true, ""}, mod{"F(a) = a^p mod p", true, ""};
    json table = json::array();
    for (std::size_t i = 0; i <= C.arity(); ++i)
        for (const auto& f : C.monomial_basis(static_cast<int>(i), D)) {
            auto Ff = DR.frobenius(f);
            table.push_back({{"form", f.to_string(names)}, {"F", Ff.to_string(names)}});
            auto lhs = C.d(Ff);
            auto rhs = arith::Coefficient(static_cast<long>(R.p())) * DR.frobenius(C.d(f));
            if (dF.pass && !(lhs == rhs)) {
                dF.pass = false;
                dF.witness = f.to_string(names);
            }
            if (i == 0) {
                MPoly q = f.coefficient(0);
                auto diff = R.phi(q) - q.pow(R.p());
                if (mod.pass && diff.valuation(R.p()) < 1) {
                    mod.pass = false;
                    mod.witness = q.to_string();
                }
            }
        }
    rep.add(dF);
    rep.add(mod);
    return {{{"structure", DR.to_json()}, {"frobenius", table}, {"checks", rep.to_json()}}, rep.pass,
            report_text(rep)};
}

Outcome derham_map(const json& a, dwitt_context&)
{
    auto S = delta_ring(a, "source");
    auto T = delta_ring(a, "target");
    std::vector<MPoly> images;
    for (const auto& s : need(a, "images")) images.push_back(poly(s, T.variables()));
    arith::RingMap f(S.variables(), T.variables(), images);
    auto CS = derham::build_de_rham(S.variables()), CT = derham::build_de_rham(T.variables());
    auto source = derham::frobenius_on_forms(CS, S), target = derham::frobenius_on_forms(CT, T);
    auto m = derham::universal_da_map(S, target, f);
    auto check = derham::check_da_map(m, source, target);
    std::string text = m.to_json(CT.generator_names()).dump(2) + "\n" + (check.pass ? "commutes with d and F" : "fail");
    return {{{"map", m.to_json(CT.generator_names())}, {"check", check.to_json()}}, check.pass, text};
}

// -------------------------------------------------------------- dieudonne

Outcome dieudonne_check(const json& a, dwitt_context&) { return law_outcome(dieudonne::check_dieudonne(complex_arg(a))); }

Outcome dieudonne_eta(const json& a, dwitt_context&)
{
    auto e = dieudonne::eta_p(complex_arg(a));
    auto rep = dieudonne::check_dieudonne(e.complex);
    return {{{"complex", e.complex.to_json()}, {"basis", matrices(e.basis)}, {"alpha", matrices(e.alpha)},
             {"checks", rep.to_json()}},
            rep.pass};
}

Outcome dieudonne_is_saturated(const json& a, dwitt_context&)
{
    bool s = dieudonne::is_saturated(complex_arg(a));
    return {{{"saturated", s}}, true, s ? "saturated" : "not saturated"};
}

Outcome dieudonne_saturate(const json& a, dwitt_context& ctx)
{
    auto T = dieudonne::saturate(complex_arg(a), budget(a, ctx, "saturation_cap"));
    json out = T.to_json();
    out["result"] = T.result().to_json();
    return {out};
}

Outcome dieudonne_verschiebung(const json& a, dwitt_context&)
{
    return {{{"V", matrices(dieudonne::solve_verschiebung(complex_arg(a)))}}};
}

Outcome dieudonne_wr(const json& a, dwitt_context&)
{
    auto M = complex_arg(a);
    return {dieudonne::wr_quotient(M, need(a, "r").get<unsigned>()).to_json(M.p)};
}

Outcome dieudonne_strict(const json& a, dwitt_context&)
{
    auto rep = dieudonne::strictness_probe(complex_arg(a), a.value("r_max", dieudonne::default_strictness_rmax));
    return {rep.to_json(), true, rep.verdict};
}

Outcome dieudonne_algebra(const json& a, dwitt_context&)
{
    auto R = delta_ring(a);
    auto DR = derham::frobenius_on_forms(derham::build_de_rham(R.variables()), R);
    return law_outcome(dieudonne::check_dieudonne_algebra(dieudonne::algebra_view(DR)));
}

Outcome dieudonne_classify(const json& a, dwitt_context&)
{
    auto D = a.contains("datum") ? dieudonne::ClassificationDatum::from_json(a["datum"])
                                 : dieudonne::ClassificationDatum::de_rham(delta_ring(a));
    std::string o = a.value("orientation", std::string("derived"));
    if (o != "derived" && o != "literal")
        fail(ErrorCode::Usage, "orientation must be derived or literal");
    auto rep = dieudonne::classify_relations_check(
        D, o == "derived" ? dieudonne::RelationOrientation::Derived : dieudonne::RelationOrientation::Literal);
    return {rep.to_json(), rep.pass, report_text(rep.relations)};
}

// ------------------------------------------------------------------ mixed

Outcome mixed_check(const json& a, dwitt_context&) { return law_outcome(mixed::check_mixed(mixed_arg(a))); }

Outcome mixed_twist(const json& a, dwitt_context&) { return {mixed::p_twist(mixed_arg(a)).to_json()}; }

Outcome mixed_eta(const json& a, dwitt_context&)
{
    auto e = mixed::eta_p_mixed(mixed_arg(a));
    json basis = json::array();
    for (const auto& [b, m] : e.basis) basis.push_back({{"weight", b.first}, {"degree", b.second}, {"matrix", m.to_json()}});
    auto rep = mixed::check_mixed(e.complex);
    return {{{"complex", e.complex.to_json()}, {"basis", basis}, {"checks", rep.to_json()}}, rep.pass};
}

Outcome mixed_adjoint(const json& a, dwitt_context& ctx)
{
    auto M = mixed_arg(a, "M"), N = mixed_arg(a, "N");
    unsigned precision = a.value("precision", std::max(M.precision, N.precision));
    auto rep = mixed::adjunction_check(M, N, precision, budget(a, ctx, "adjunction_budget"));
    std::string text = "log_p |Hom([p]*M, N)| = " + std::to_string(rep.left_exponent) +
                       ", log_p |Hom(M, eta_p N)| = " + std::to_string(rep.right_exponent) +
                       (rep.pass ? ", adjunction holds" : ", adjunction fails");
    return {rep.to_json(), rep.pass, text};
}

Outcome mixed_truncate(const json& a, dwitt_context&)
{
    auto rep = mixed::beilinson_truncate(mixed_arg(a));
    return {rep.to_json()};
}

Outcome mixed_heart(const json& a, dwitt_context&)
{
    auto G = mixed::heart_embed(complex_arg(a), a.value("with_F", true));
    return {G.to_json()};
}

Outcome mixed_ddr(const json& a, dwitt_context&)
{
    auto G = mixed::ddr_mixed(delta_ring(a), need(a, "window").get<unsigned>());
    auto rep = mixed::check_mixed(G);
    return {{{"complex", G.to_json()}, {"checks", rep.to_json()}}, rep.pass};
}

// -------------------------------------------------------------------- drw

std::string lengths_text(const drw::DRWTruncation& T)
{
    std::string s;
    for (unsigned i = 0; i <= T.R.arity(); ++i) {
        s += "W_" + std::to_string(T.n) + " Omega^" + std::to_string(i) + ":";
        for (const auto& [w, l] : T.lengths(i)) s += " " + w.to_string(T.R.p) + ":" + std::to_string(l);
        s += "\n";
    }
    return s;
}

Outcome drw_compute(const json& a, dwitt_context& ctx)
{
    auto R = drw::PolyRing::parse(need(a, "ring").get<std::string>());
    unsigned n = need(a, "level").get<unsigned>();
    unsigned D = need(a, "weight_bound").get<unsigned>();
    std::string route = a.value("route", std::string("direct"));
    if (route != "direct" && route != "saturation" && route != "both")
        fail(ErrorCode::Usage, "route must be direct, saturation or both");
    drw::DirectOptions dopt;
    dopt.span_budget = budget(a, ctx, "span_budget");
    drw::SaturationOptions sopt;
    sopt.span_budget = dopt.span_budget;
    sopt.iter_cap = static_cast<unsigned>(budget(a, ctx, "saturation_cap"));
    sopt.headroom = a.value("headroom", drw::default_headroom);
    json out{{"ring", R.to_string()}, {"level", n}, {"weight_bound", D}, {"route", route}};
    bool pass = true;
    std::string text;
    auto one = [&](const drw::DRWTruncation& T, const char* name) {
        auto suite = drw::drw_identity_suite(T);
        json j = T.to_json();
        j["identities"] = suite.to_json();
        out[name] = j;
        pass = pass && suite.pass;
        text += std::string(name) + " route\n" + lengths_text(T) + "identities: " + report_text(suite) + "\n";
    };
    std::optional<drw::DRWTruncation> A, B;
    if (route != "saturation") {
        A = drw::drw_truncated(R, n, D, dopt);
        one(*A, "direct");
    }
    if (route != "direct") {
        B = drw::drw_via_saturation(R, n, D, sopt);
        one(*B, "saturation");
    }
    if (A && B) {
        auto cmp = drw::compare_routes(*A, *B);
        out["comparison"] = cmp.to_json();
        pass = pass && cmp.pass();
        text += std::string("routes ") + (cmp.pass() ? "agree" : "disagree") + "\n";
    }
    return {out, pass, text};
}

Outcome drw_witt_ring(const json& a, dwitt_context&)
{
    auto R = drw::PolyRing::parse(need(a, "ring").get<std::string>());
    auto P = drw::witt_ring_presentation(R, need(a, "level").get<unsigned>(), need(a, "weight_bound").get<unsigned>());
    return {P.to_json()};
}

// --------------------------------------------------------------- selftest

Outcome selftest(const json& a, dwitt_context& ctx)
{
    acceptance::Options o;
    o.seed = a.value("seed", acceptance::default_seed);
    o.adjunction_budget = budget(a, ctx, "adjunction_budget");
    o.span_budget = budget(a, ctx, "span_budget");
    o.saturation_cap = static_cast<unsigned>(budget(a, ctx, "saturation_cap"));
    auto crits = acceptance::selftest_criteria(o);
    bool pass = true;
    std::string text;
    for (const auto& c : crits) {
        pass = pass && (c.pass || c.skipped);
        text += c.line() + "\n";
    }
    return {acceptance::report(o, crits), pass, text};
}

const std::map<std::string, Handler>& table()
{
    static const std::map<std::string, Handler> ops{
        {"arith.smith", arith_smith},
        {"arith.intersect", arith_intersect},
        {"arith.apply_map", arith_apply_map},
        {"arith.div_p", arith_div_p},
        {"witt.ghost", witt_ghost},
        {"witt.from_ghost", witt_from_ghost},
        {"witt.add", [](const json& a, dwitt_context&) { return witt_binary(a, true); }},
        {"witt.mul", [](const json& a, dwitt_context&) { return witt_binary(a, false); }},
        {"witt.frob", [](const json& a, dwitt_context&) { return witt_unary(a, witt::frobenius); }},
        {"witt.versch", [](const json& a, dwitt_context&) { return witt_unary(a, witt::verschiebung); }},
        {"witt.teich", witt_teich},
        {"witt.delta", witt_delta},
        {"witt.charpoly", witt_charpoly},
        {"witt.bigwitt_frob", [](const json& a, dwitt_context&) { return witt_bigwitt_map(a, true); }},
        {"witt.bigwitt_versch", [](const json& a, dwitt_context&) { return witt_bigwitt_map(a, false); }},
        {"witt.bigwitt_add", witt_bigwitt_add},
        {"witt.ker", witt_ker},
        {"derham.build", derham_build},
        {"derham.frob", derham_frob},
        {"derham.map", derham_map},
        {"dieudonne.check", dieudonne_check},
        {"dieudonne.eta", dieudonne_eta},
        {"dieudonne.is_saturated", dieudonne_is_saturated},
        {"dieudonne.saturate", dieudonne_saturate},
        {"dieudonne.verschiebung", dieudonne_verschiebung},
        {"dieudonne.wr", dieudonne_wr},
        {"dieudonne.strict", dieudonne_strict},
        {"dieudonne.algebra", dieudonne_algebra},
        {"dieudonne.classify", dieudonne_classify},
        {"mixed.check", mixed_check},
        {"mixed.twist", mixed_twist},
        {"mixed.eta", mixed_eta},
        {"mixed.adjoint", mixed_adjoint},
        {"mixed.truncate", mixed_truncate},
        {"mixed.heart", mixed_heart},
        {"mixed.ddr", mixed_ddr},
        {"drw.compute", drw_compute},
        {"drw.witt_ring", drw_witt_ring},
        {"selftest", selftest},
    };
    return ops;
}

int fail_with(dwitt_context* ctx, int code, const std::string& message)
{
    if (ctx)
        ctx->last_error = message;
    return code;
}

}  // namespace

extern "C" {

const char* dwitt_version(void) { return "0.1.0"; }

const char* dwitt_status_name(int status)
{
    switch (status) {
    case DWITT_OK: return "OK";
    case DWITT_E_NULL_ARGUMENT: return "NullArgument";
    case DWITT_E_UNKNOWN_OP: return "UnknownOperation";
    case DWITT_E_INTERNAL: return "Internal";
    default:
        if (status >= DWITT_E_USAGE && status <= DWITT_E_SPAN_OVERFLOW)
            return error_code_name(static_cast<ErrorCode>(status));
        return "Unknown";
    }
}

int dwitt_status_is_usage(int status)
{
    return status == DWITT_E_USAGE || status == DWITT_E_PARSE || status == DWITT_E_ARITY_MISMATCH ||
           status == DWITT_E_SHAPE_MISMATCH || status == DWITT_E_UNKNOWN_OP || status == DWITT_E_NULL_ARGUMENT;
}

dwitt_context* dwitt_context_new(void) { return new (std::nothrow) dwitt_context(); }

void dwitt_context_free(dwitt_context* ctx) { delete ctx; }

const char* dwitt_last_error(const dwitt_context* ctx) { return ctx ? ctx->last_error.c_str() : ""; }

int dwitt_set_budget(dwitt_context* ctx, const char* name, unsigned long value)
{
    if (!ctx || !name)
        return fail_with(ctx, DWITT_E_NULL_ARGUMENT, "null argument");
    auto it = ctx->budgets.find(name);
    if (it == ctx->budgets.end())
        return fail_with(ctx, DWITT_E_USAGE, std::string("unknown budget ") + name);
    if (value == 0)
        return fail_with(ctx, DWITT_E_USAGE, std::string("budget ") + name + " must be positive");
    it->second = value;
    return DWITT_OK;
}

int dwitt_get_budget(const dwitt_context* ctx, const char* name, unsigned long* value)
{
    if (!ctx || !name || !value)
        return DWITT_E_NULL_ARGUMENT;
    auto it = ctx->budgets.find(name);
    if (it == ctx->budgets.end())
        return DWITT_E_USAGE;
    *value = it->second;
    return DWITT_OK;
}

const char* dwitt_operations(void)
{
    static const std::string names = [] {
        std::string s;
        for (const auto& [name, h] : table()) s += name + "\n";
        return s;
    }();
    return names.c_str();
}

int dwitt_call(dwitt_context* ctx, const char* op, const char* args_json, dwitt_result** out)
{
    if (!ctx || !op || !out)
        return fail_with(ctx, DWITT_E_NULL_ARGUMENT, "null argument");
    *out = nullptr;
    auto it = table().find(op);
    if (it == table().end())
        return fail_with(ctx, DWITT_E_UNKNOWN_OP, std::string("unknown operation ") + op);
    try {
        json args = args_json && *args_json ? json::parse(args_json) : json::object();
        if (!args.is_object())
            return fail_with(ctx, DWITT_E_PARSE, "arguments must be a JSON object");
        Outcome o = it->second(args, *ctx);
        json env{{"schema_version", schema_version}, {"op", op}, {"pass", o.pass}, {"result", o.result}};
        auto* r = new dwitt_result();
        r->json = env.dump(2);
        r->text = o.text.empty() ? o.result.dump(2) : o.text;
        r->pass = o.pass;
        *out = r;
        ctx->last_error.clear();
        return DWITT_OK;
    } catch (const Error& e) {
        return fail_with(ctx, static_cast<int>(e.code()), e.what());
    } catch (const json::parse_error& e) {
        return fail_with(ctx, DWITT_E_PARSE, e.what());
    } catch (const json::exception& e) {
        return fail_with(ctx, DWITT_E_USAGE, e.what());
    } catch (const std::invalid_argument& e) {
        return fail_with(ctx, DWITT_E_PARSE, e.what());
    } catch (const std::exception& e) {
        return fail_with(ctx, DWITT_E_INTERNAL, e.what());
    }
}

const char* dwitt_result_json(const dwitt_result* r) { return r ? r->json.c_str() : ""; }
const char* dwitt_result_text(const dwitt_result* r) { return r ? r->text.c_str() : ""; }
int dwitt_result_pass(const dwitt_result* r) { return r && r->pass ? 1 : 0; }
void dwitt_result_free(dwitt_result* r) { delete r; }

}
