#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>

#include "dwitt/derham.hpp"
#include "dwitt/drw.hpp"
#include "dwitt/error.hpp"
#include "dwitt/witt.hpp"

using namespace dwitt;
using namespace dwitt::drw;
using arith::MPoly;

namespace {

template <class Fn>
void expect_error(ErrorCode code, Fn&& fn)
{
    try {
        fn();
        FAIL("expected ", error_code_name(code));
    } catch (const Error& e) {
        CHECK(e.code() == code);
    }
}

long ipow_l(unsigned long p, unsigned e)
{
    long r = 1;
    while (e--) r *= static_cast<long>(p);
    return r;
}

Weight weight(std::vector<long> num, unsigned e, unsigned long p) { return Weight::make(std::move(num), e, p); }

// Exponents of the invariant factors, sorted.
std::vector<long> exponents(const std::vector<mpz_class>& invariants, unsigned long p)
{
    std::vector<long> out;
    for (const auto& q : invariants) {
        REQUIRE(q != 0);
        out.push_back(arith::valuation(q, p));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// The weight-w part of W_n(F_p[vars]) by Witt-vector arithmetic: vectors whose
// i-th coordinate is c_i x^(p^i w), with the group structure read off from
// the number of elements killed by p^t.
std::vector<long> witt_oracle(unsigned long p, const std::vector<std::string>& vars, unsigned n, const Weight& w)
{
    std::vector<std::optional<arith::Exponent>> slot(n);
    std::size_t free = 0;
    for (unsigned i = 0; i < n; ++i) {
        if (i < w.e)
            continue;
        arith::Exponent a;
        for (long v : w.num) a.push_back(static_cast<std::uint32_t>(v * ipow_l(p, i - w.e)));
        slot[i] = a;
        ++free;
    }
    std::vector<witt::WittVector> elems;
    std::vector<long> c(free, 0);
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == free) {
            witt::WittVector x = witt::WittVector::zero(p, n, vars, p);
            std::size_t used = 0;
            for (unsigned i = 0; i < n; ++i)
                if (slot[i]) {
                    long ci = c[used++];
                    x.coords[i] = ci ? MPoly::monomial(ci, *slot[i], vars) : MPoly(vars);
                }
            elems.push_back(x);
            return;
        }
        for (long v = 0; v < static_cast<long>(p); ++v) {
            c[k] = v;
            rec(k + 1);
        }
    };
    rec(0);
    // closure under addition
    for (std::size_t a = 0; a < elems.size(); a += 3)
        for (std::size_t b = 0; b < elems.size(); b += 2)
            CHECK(std::find(elems.begin(), elems.end(), witt::witt_add(elems[a], elems[b])) != elems.end());
    auto zero = witt::WittVector::zero(p, n, vars, p);
    std::vector<std::size_t> killed{1};
    for (unsigned t = 1; killed.back() < elems.size(); ++t) {
        std::size_t count = 0;
        for (const auto& x : elems) count += witt::witt_scale(x, ipow_l(p, t)) == zero;
        killed.push_back(count);
        REQUIRE(t <= n);
    }
    // r_t = number of cyclic factors of order >= p^t
    std::vector<long> out;
    std::vector<long> r;
    for (std::size_t t = 1; t < killed.size(); ++t) {
        long q = 0;
        for (std::size_t s = killed[t] / killed[t - 1]; s > 1; s /= p) ++q;
        r.push_back(q);
    }
    for (std::size_t t = 0; t < r.size(); ++t) {
        long next = t + 1 < r.size() ? r[t + 1] : 0;
        for (long k = 0; k < r[t] - next; ++k) out.push_back(static_cast<long>(t + 1));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Weights m/p^e, e < n, of total at most D, enumerated at scale p^(n-1).
std::vector<Weight> oracle_weights(unsigned long p, std::size_t d, unsigned n, unsigned D)
{
    long scale = ipow_l(p, n - 1);
    std::vector<Weight> out;
    std::vector<long> num(d, 0);
    std::function<void(std::size_t, long)> rec = [&](std::size_t v, long left) {
        if (v == d) {
            out.push_back(weight(num, n - 1, p));
            return;
        }
        for (long k = 0; k <= left; ++k) {
            num[v] = k;
            rec(v + 1, left - k);
        }
    };
    rec(0, D * scale);
    std::sort(out.begin(), out.end());
    return out;
}

// Length of the image of a structure map inside its target component.
long image_length(const DRWTruncation& T, const std::map<ComponentKey, IntMatrix>& maps, const ComponentKey& src,
                  const ComponentKey& dst)
{
    const Component* tc = T.find(dst);
    if (!tc || !T.find(src))
        return 0;
    const IntMatrix& M = maps.at(src);
    REQUIRE(M.rows() == tc->gens.cols());
    auto q = dieudonne::present(arith::hstack(tc->module.relations, M));
    return tc->module.length(T.R.p) - q.length(T.R.p);
}

// Omega of F_p[vars] per integral weight: dimension and rank of d mod p.
struct OmegaPiece {
    long dim = 0;
    long d_rank = 0;
};

std::map<std::pair<unsigned, std::vector<long>>, OmegaPiece> omega_oracle(unsigned long p,
                                                                          const std::vector<std::string>& vars,
                                                                          unsigned D)
{
    auto C = derham::build_de_rham(vars);
    std::size_t n = vars.size();
    auto weight_of = [&](const derham::Form& f) {
        auto [mask, a] = *f.terms().begin();
        auto [e, c] = *a.terms().begin();
        std::vector<long> w(n);
        for (std::size_t v = 0; v < n; ++v) w[v] = e[v] + (mask >> v & 1u);
        return std::make_pair(w, std::make_pair(mask, e));
    };
    std::map<std::pair<unsigned, std::vector<long>>, OmegaPiece> out;
    for (unsigned i = 0; i <= n; ++i) {
        std::map<std::vector<long>, std::vector<derham::Form>> src, dst;
        for (const auto& f : C.monomial_basis(static_cast<int>(i), D)) {
            auto w = weight_of(f).first;
            long tot = 0;
            for (long x : w) tot += x;
            if (tot <= static_cast<long>(D))
                src[w].push_back(f);
        }
        for (const auto& f : C.monomial_basis(static_cast<int>(i + 1), D)) dst[weight_of(f).first].push_back(f);
        for (const auto& [w, forms] : src) {
            const auto& targets = dst[w];
            IntMatrix M(targets.size(), forms.size());
            for (std::size_t c = 0; c < forms.size(); ++c) {
                auto df = C.d(forms[c]);
                for (std::size_t r = 0; r < targets.size(); ++r) {
                    auto [mask, e] = weight_of(targets[r]).second;
                    M(r, c) = df.coefficient(mask).coefficient(e).numerator();
                }
            }
            auto mod_p = IntMatrix::scalar(targets.size(), static_cast<long>(p));
            long coker = dieudonne::present(arith::hstack(mod_p, M)).length(p);
            out[{i, w}] = {static_cast<long>(forms.size()), static_cast<long>(targets.size()) - coker};
        }
    }
    return out;
}

void check_w1_is_omega(const DRWTruncation& T)
{
    unsigned long p = T.R.p;
    auto omega = omega_oracle(p, T.R.vars, T.D);
    std::size_t seen = 0;
    for (const auto& [k, c] : T.components) {
        if (k.level != 1)
            continue;
        CHECK(k.weight.e == 0);
        auto it = omega.find({k.degree, k.weight.num});
        REQUIRE(it != omega.end());
        CHECK(c.module.length(p) == it->second.dim);
        for (const auto& q : c.module.invariants) CHECK(q == static_cast<long>(p));
        ComponentKey next{1, k.degree + 1, k.weight};
        CHECK(image_length(T, T.d, k, next) == it->second.d_rank);
        ++seen;
    }
    for (const auto& [key, piece] : omega)
        if (piece.dim > 0)
            CHECK(T.find({1, key.first, weight(key.second, 0, p)}) != nullptr);
    CHECK(seen > 0);
}

void check_witt_oracle(const DRWTruncation& T, unsigned n)
{
    unsigned long p = T.R.p;
    auto lengths = T.lengths(0);
    for (const auto& w : oracle_weights(p, T.R.arity(), n, T.D)) {
        auto expected = witt_oracle(p, T.R.vars, n, w);
        long len = 0;
        for (long e : expected) len += e;
        CAPTURE(w.to_string(p));
        CHECK(lengths[w] == len);
        const Component* c = T.find({n, 0, w});
        REQUIRE(c);
        CHECK(exponents(c->module.invariants, p) == expected);
    }
}

const LawResult* law(const LawReport& r, const std::string& name)
{
    for (const auto& x : r.results)
        if (x.law == name)
            return &x;
    return nullptr;
}

}  // namespace

TEST_CASE("polynomial ring parsing and weights")
{
    auto R = PolyRing::parse("F3[x,y]");
    CHECK(R.p == 3);
    CHECK(R.arity() == 2);
    CHECK(R.to_string() == "F3[x,y]");
    CHECK(PolyRing::parse("F5").arity() == 0);
    expect_error(ErrorCode::Usage, [] { PolyRing::parse("F4[x]"); });
    expect_error(ErrorCode::Parse, [] { PolyRing::parse("Z[x]"); });

    Weight w = weight({3, 6}, 1, 3);
    CHECK(w.e == 0);
    CHECK(w.num == std::vector<long>{1, 2});
    Weight h = weight({1}, 1, 2);
    CHECK(h.total(2) == mpq_class(1, 2));
    CHECK(h.times_p(2) == weight({1}, 0, 2));
    CHECK(h.over_p(2) == weight({1}, 2, 2));
    CHECK(h.plus(h, 2) == weight({1}, 0, 2));

    auto ws = weights_up_to(PolyRing::parse("F2[x]"), 2, 1);
    CHECK(ws.size() == 5);
    CHECK(oracle_weights(2, 1, 2, 2).size() == 5);
    CHECK(oracle_weights(3, 2, 1, 2).size() == 6);
}

TEST_CASE("Witt ring presentation against Witt-coordinate arithmetic")
{
    for (unsigned long p : {2ul, 3ul}) {
        auto base = PolyRing::parse("F" + std::to_string(p));
        auto W2 = witt_ring_presentation(base, 2, 0);
        auto inv = W2.component(weight({}, 0, p)).invariants;
        REQUIRE(inv.size() == 1);
        CHECK(inv[0] == p * p);

        for (const char* vars : {"[x]", "[x,y]"}) {
            auto R = PolyRing::parse("F" + std::to_string(p) + vars);
            for (unsigned n : {1u, 2u, 3u}) {
                unsigned D = R.arity() == 1 ? 4 : 2;
                if (n == 3 && R.arity() == 2)
                    continue;
                auto P = witt_ring_presentation(R, n, D);
                auto ws = oracle_weights(p, R.arity(), n, D);
                auto got = P.weights();
                std::sort(got.begin(), got.end());
                CHECK(got == ws);
                for (const auto& w : ws) {
                    CAPTURE(w.to_string(p));
                    CHECK(exponents(P.component(w).invariants, p) == witt_oracle(p, R.vars, n, w));
                }
            }
        }
    }
    // n = 1 is the polynomial ring itself
    auto P = witt_ring_presentation(PolyRing::parse("F2[x]"), 1, 5);
    for (const auto& w : P.weights()) CHECK(P.component(w).length(2) == 1);
    CHECK(P.weights().size() == 6);
}

TEST_CASE("Witt ring presentation products")
{
    auto R = PolyRing::parse("F2[x]");
    auto P = witt_ring_presentation(R, 2, 4);
    auto index = [&](const std::string& name) {
        for (std::size_t i = 0; i < P.generators.size(); ++i)
            if (P.generators[i].name == name)
                return i;
        FAIL("no generator ", name);
        return std::size_t(0);
    };
    // [x] V[x] = V([x]^2 [x]) = V[x]^3
    std::size_t a = index("[x]"), b = index("V[x]"), c = index("V[x]^3");
    bool found = false;
    for (const auto& pr : P.products)
        if (pr.left == a && pr.right == b) {
            CHECK(pr.result == c);
            CHECK(pr.coefficient == 1);
            found = true;
        }
    CHECK(found);
    // the weight-2 and weight-1/2 pieces together: [x]^2 and 2[x]^2 = V[x^2] in weight 2, V[x] in weight 1/2
    long total = P.component(weight({2}, 0, 2)).length(2) + P.component(weight({1}, 1, 2)).length(2);
    CHECK(total == 3);
    auto j = P.to_json();
    CHECK(j["generators"].size() == P.generators.size());
}

TEST_CASE("W_1 is the de Rham complex of the polynomial ring")
{
    for (unsigned long p : {2ul, 3ul}) {
        auto R = PolyRing::parse("F" + std::to_string(p) + "[x]");
        check_w1_is_omega(drw_truncated(R, 1, 12));
        check_w1_is_omega(drw_via_saturation(R, 1, 12));
        auto R2 = PolyRing::parse("F" + std::to_string(p) + "[x,y]");
        check_w1_is_omega(drw_truncated(R2, 1, 4));
        check_w1_is_omega(drw_via_saturation(R2, 1, 4));
    }
    // level 1 of a level-2 truncation is the same complex
    check_w1_is_omega(drw_truncated(PolyRing::parse("F2[x]"), 2, 6));
}

TEST_CASE("W_2 degree zero matches the Witt-coordinate oracle")
{
    for (unsigned long p : {2ul, 3ul}) {
        auto R = PolyRing::parse("F" + std::to_string(p) + "[x]");
        check_witt_oracle(drw_truncated(R, 2, 4), 2);
        check_witt_oracle(drw_via_saturation(R, 2, 4), 2);
        check_witt_oracle(drw_via_saturation(R, 2, 3), 2);
        auto R2 = PolyRing::parse("F" + std::to_string(p) + "[x,y]");
        check_witt_oracle(drw_truncated(R2, 2, 3), 2);
    }
    check_witt_oracle(drw_truncated(PolyRing::parse("F2[x]"), 3, 3), 3);

    auto T = drw_truncated(PolyRing::parse("F2[x]"), 2, 4);
    auto l0 = T.lengths(0), l1 = T.lengths(1);
    CHECK(l0[weight({1}, 0, 2)] == 2);
    CHECK(l0[weight({1}, 1, 2)] == 1);
    CHECK(l0[weight({2}, 0, 2)] + l0[weight({1}, 1, 2)] == 3);
    CHECK(l1[weight({1}, 0, 2)] == 2);
    CHECK(l1[weight({1}, 1, 2)] == 1);
}

TEST_CASE("zero-variable ring")
{
    for (unsigned long p : {2ul, 3ul, 5ul})
        for (unsigned n : {1u, 2u, 3u}) {
            auto R = PolyRing::parse("F" + std::to_string(p));
            for (const auto& T : {drw_truncated(R, n, 2), drw_via_saturation(R, n, 2)}) {
                auto lens = T.degree_lengths();
                REQUIRE(lens.size() == 1);
                CHECK(lens[0] == static_cast<long>(n));
                const Component* c = T.find({n, 0, weight({}, 0, p)});
                REQUIRE(c);
                CHECK(exponents(c->module.invariants, p) == std::vector<long>{static_cast<long>(n)});
                CHECK(drw_identity_suite(T).pass);
            }
        }
}

TEST_CASE("routes agree")
{
    for (unsigned long p : {2ul, 3ul})
        for (const char* vars : {"", "[x]", "[x,y]"})
            for (unsigned n : {1u, 2u})
                for (unsigned D : {2u, 4u}) {
                    auto R = PolyRing::parse("F" + std::to_string(p) + vars);
                    CAPTURE(R.to_string());
                    CAPTURE(n);
                    CAPTURE(D);
                    auto A = drw_truncated(R, n, D);
                    auto B = drw_via_saturation(R, n, D);
                    auto cmp = compare_routes(A, B);
                    CHECK(cmp.pass());
                    CHECK(cmp.mismatches.empty());
                    CHECK(A.degree_lengths() == B.degree_lengths());
                    for (unsigned i = 0; i <= R.arity(); ++i) CHECK(A.lengths(i) == B.lengths(i));
                }
}

TEST_CASE("headroom does not change the saturation route")
{
    auto R = PolyRing::parse("F2[x]");
    auto A = drw_via_saturation(R, 2, 4);
    SaturationOptions more;
    more.headroom = 4;
    auto B = drw_via_saturation(R, 2, 4, more);
    CHECK(compare_routes(A, B).pass());
}

TEST_CASE("identity suite")
{
    for (unsigned long p : {2ul, 3ul})
        for (const char* vars : {"[x]", "[x,y]"}) {
            auto R = PolyRing::parse("F" + std::to_string(p) + vars);
            for (const auto& T : {drw_truncated(R, 2, 4), drw_via_saturation(R, 2, 4)}) {
                auto rep = drw_identity_suite(T);
                CAPTURE(rep.to_json().dump());
                CHECK(rep.pass);
                CHECK(rep.results.size() == 9);
            }
        }
    auto T = drw_truncated(PolyRing::parse("F2[x]"), 3, 2);
    CHECK(drw_identity_suite(T, 128, 7).pass);
}

TEST_CASE("deleting a relation breaks an identity")
{
    auto R = PolyRing::parse("F2[x]");
    auto T = drw_truncated(R, 2, 4);
    ComponentKey k{2, 1, weight({1}, 1, 2)};
    const Component* c = T.find(k);
    REQUIRE(c);
    REQUIRE(c->rel_dv.cols() > 0);
    auto broken = drop_relation(T, k, 0);
    CHECK(broken.find(k)->module.length(2) > c->module.length(2));
    auto rep = drw_identity_suite(broken);
    CHECK_FALSE(rep.pass);
    bool witnessed = false;
    for (const auto& r : rep.results)
        if (!r.pass)
            witnessed = witnessed || !r.witness.empty();
    CHECK(witnessed);
    expect_error(ErrorCode::Usage, [&] { drop_relation(T, k, c->rel_dv.cols()); });
}

TEST_CASE("F dV[x] = d[x] on generators")
{
    for (unsigned long p : {2ul, 3ul}) {
        auto R = PolyRing::parse("F" + std::to_string(p) + "[x]");
        auto T = drw_truncated(R, 2, 4);
        Weight w1 = weight({1}, 0, p), wp = weight({1}, 1, p);
        ComponentKey vx{2, 0, wp}, dvx{2, 1, wp}, x{1, 0, w1}, dx{1, 1, w1};
        auto cv = T.coordinates(vx, {mpz_class(p)});
        REQUIRE(cv);
        auto lhs = T.F.at(dvx).apply(T.d.at(vx).apply(*cv));
        auto cx = T.coordinates(x, {1});
        REQUIRE(cx);
        auto rhs = T.d.at(x).apply(*cx);
        std::vector<mpz_class> diff(lhs.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = lhs[i] - rhs[i];
        CHECK(T.is_zero_in(dx, diff));
        CHECK_FALSE(T.is_zero_in(dx, rhs));
        // F d[x] = [x]^(p-1) d[x] as forms: both are the form x dlog x at weight 1
        CHECK(T.to_form(dx, rhs) == std::vector<mpz_class>{1});
    }
}

TEST_CASE("structure maps are block diagonal in weight")
{
    auto R = PolyRing::parse("F3[x,y]");
    auto T = drw_truncated(R, 2, 3);
    unsigned long p = 3;
    auto rows_ok = [&](const std::map<ComponentKey, IntMatrix>& maps, auto target) {
        for (const auto& [k, M] : maps) {
            const Component* src = T.find(k);
            REQUIRE(src);
            CHECK(M.cols() == src->gens.cols());
            const Component* dst = T.find(target(k));
            CHECK(M.rows() == (dst ? dst->gens.cols() : 0));
        }
    };
    rows_ok(T.d, [](const ComponentKey& k) { return ComponentKey{k.level, k.degree + 1, k.weight}; });
    rows_ok(T.F, [&](const ComponentKey& k) { return ComponentKey{k.level - 1, k.degree, k.weight.times_p(p)}; });
    rows_ok(T.V, [&](const ComponentKey& k) { return ComponentKey{k.level + 1, k.degree, k.weight.over_p(p)}; });
    CHECK(T.top == 3);
    for (const auto& [k, c] : T.components) {
        CHECK(k.level >= 1);
        CHECK(k.level <= T.top);
        CHECK(k.weight.e < k.level);
        CHECK(k.weight.total(p) <= 3);
    }
}

TEST_CASE("budgets and limits")
{
    auto R = PolyRing::parse("F2[x]");
    DirectOptions tiny;
    tiny.span_budget = 1;
    expect_error(ErrorCode::SpanOverflow, [&] { drw_truncated(R, 2, 4, tiny); });
    SaturationOptions capped;
    capped.iter_cap = 1;
    expect_error(ErrorCode::IterationLimit, [&] { drw_via_saturation(R, 2, 4, capped); });
    SaturationOptions small;
    small.span_budget = 1;
    expect_error(ErrorCode::SpanOverflow, [&] { drw_via_saturation(R, 2, 4, small); });
    expect_error(ErrorCode::Usage, [&] { drw_truncated(R, 0, 4); });
}

TEST_CASE("report JSON")
{
    auto T = drw_truncated(PolyRing::parse("F2[x]"), 2, 4);
    auto j = T.to_json();
    CHECK(j["ring"] == "F2[x]");
    CHECK(j["route"] == "direct");
    CHECK(j["lengths"] == nlohmann::json(T.degree_lengths()));
    bool named = false;
    for (const auto& lv : j["levels"])
        for (const auto& dg : lv["degrees"])
            for (const auto& c : dg["components"])
                for (const auto& g : c["generators"]) named = named || g == "dV[x]";
    CHECK(named);
    CHECK(drw_via_saturation(PolyRing::parse("F2[x]"), 2, 4).to_json()["route"] == "saturation");
}
