#include <doctest.h>

#include <random>

#include "dwitt/derham.hpp"
#include "dwitt/error.hpp"

using namespace dwitt;
using namespace dwitt::derham;
using arith::RingMap;
using witt::DeltaRing;

namespace {

const std::vector<std::string> XY{"x", "y"};

MPoly P(const char* s, const std::vector<std::string>& v = XY) { return MPoly::parse(s, v); }

// Sign of sorting an index list by bubble sort; 0 on repeats.
int sort_sign(std::vector<int> idx)
{
    int s = 1;
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j + 1 < idx.size() - i; ++j) {
            if (idx[j] == idx[j + 1])
                return 0;
            if (idx[j] > idx[j + 1]) {
                std::swap(idx[j], idx[j + 1]);
                s = -s;
            }
        }
    for (std::size_t j = 0; j + 1 < idx.size(); ++j)
        if (idx[j] == idx[j + 1])
            return 0;
    return s;
}

// d(a dx_I) = sum_i da/dx_i dx_i ^ dx_I, computed on index lists.
Form d_oracle(const Form& w)
{
    std::size_t n = w.variables().size();
    Form out(w.variables(), n);
    for (const auto& [m, a] : w.terms()) {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<int> idx{static_cast<int>(i)};
            for (std::size_t j = 0; j < n; ++j)
                if (m & (1u << j))
                    idx.push_back(static_cast<int>(j));
            int s = sort_sign(idx);
            if (s == 0)
                continue;
            MPoly c = a.derivative(i);
            out.add(m | (1u << i), s > 0 ? c : -c);
        }
    }
    return out;
}

MPoly random_poly(std::mt19937& rng, const std::vector<std::string>& vars, unsigned deg)
{
    std::uniform_int_distribution<long> c(-4, 4);
    std::uniform_int_distribution<unsigned> e(0, deg);
    MPoly q(vars);
    for (int t = 0; t < 4; ++t) {
        arith::Exponent ex(vars.size());
        for (auto& x : ex) x = e(rng);
        q += MPoly::monomial(c(rng), ex, vars);
    }
    return q;
}

Form random_form(std::mt19937& rng, const DeRhamComplex& C, unsigned deg)
{
    Form w(C.variables(), C.arity());
    for (Mask m = 0; m < (Mask(1) << C.arity()); ++m) w.add(m, random_poly(rng, C.variables(), deg));
    return w;
}

}  // namespace

TEST_CASE("wedge signs")
{
    CHECK(wedge_sign(0b01, 0b10) == 1);
    CHECK(wedge_sign(0b10, 0b01) == -1);
    CHECK(wedge_sign(0b11, 0b01) == 0);
    CHECK(wedge_sign(0b110, 0b001) == 1);
    for (Mask a = 0; a < 16; ++a)
        for (Mask b = 0; b < 16; ++b) {
            if (a & b) {
                CHECK(wedge_sign(a, b) == 0);
                continue;
            }
            std::vector<int> idx;
            for (int j = 0; j < 4; ++j)
                if (a & (1u << j))
                    idx.push_back(j);
            for (int j = 0; j < 4; ++j)
                if (b & (1u << j))
                    idx.push_back(j);
            CHECK(wedge_sign(a, b) == sort_sign(idx));
        }
}

TEST_CASE("de Rham differential examples")
{
    DeRhamComplex C({"x"});
    CHECK(C.rank(0) == 1);
    CHECK(C.rank(1) == 1);
    CHECK(C.rank(2) == 0);
    CHECK(C.d(P("x^2", {"x"})) == P("2*x", {"x"}) * C.dx(0));

    DeRhamComplex D(XY);
    Form dxdy = D.dx(0).wedge(D.dx(1));
    CHECK(D.d(P("x") * D.dx(1)) == dxdy);
    CHECK(D.d(P("y") * D.dx(0)) == -dxdy);
    CHECK(D.dx(1).wedge(D.dx(0)) == -dxdy);
    CHECK(D.dx(0).wedge(D.dx(0)).is_zero());
    CHECK(D.d(P("x*y")).to_string(D.generator_names()) == "y*dx + x*dy");
}

TEST_CASE("differential agrees with the index-list oracle and squares to zero")
{
    std::mt19937 rng(11);
    DeRhamComplex C({"x", "y", "z"});
    for (int t = 0; t < 30; ++t) {
        Form w = random_form(rng, C, 3);
        CHECK(C.d(w) == d_oracle(w));
        CHECK(C.d(C.d(w)).is_zero());
    }
}

TEST_CASE("Leibniz rule for the differential")
{
    std::mt19937 rng(5);
    DeRhamComplex C({"x", "y", "z"});
    for (int t = 0; t < 20; ++t) {
        Form a = random_form(rng, C, 2), b = random_form(rng, C, 2);
        for (int i = 0; i <= 3; ++i) {
            Form ai = a.component(i);
            Form lhs = C.d(ai.wedge(b));
            Form rhs = C.d(ai).wedge(b) + (i % 2 ? -ai.wedge(C.d(b)) : ai.wedge(C.d(b)));
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("Frobenius on forms: examples")
{
    for (unsigned long p : {2ul, 3ul, 5ul}) {
        DeRhamComplex C({"x"});
        std::string img = "x^" + std::to_string(p) + " + " + std::to_string(p) + "*x";
        DeltaRing R(p, RingMap({"x"}, {"x"}, {P(img.c_str(), {"x"})}));
        auto F = frobenius_on_forms(C, R);
        // delta x = x, so F(dx) = x^(p-1) dx + dx
        MPoly expected = P(("x^" + std::to_string(p - 1) + " + 1").c_str(), {"x"});
        CHECK(F.frobenius(C.dx(0)) == expected * C.dx(0));
    }
    for (unsigned long p : {2ul, 3ul}) {
        DeRhamComplex C(XY);
        auto F = frobenius_on_forms(C, DeltaRing::standard(p, XY));
        Form dxdy = C.dx(0).wedge(C.dx(1));
        MPoly xy = P("x*y").pow(p - 1);
        CHECK(F.frobenius(dxdy) == xy * dxdy);
        CHECK(F.frobenius(C.scalar(P("x + y"))) == C.scalar(P("x").pow(p) + P("y").pow(p)));
    }
}

TEST_CASE("dF = p F d on random forms and random lifts")
{
    std::mt19937 rng(23);
    for (unsigned long p : {2ul, 3ul}) {
        DeRhamComplex C(XY);
        for (int t = 0; t < 6; ++t) {
            std::vector<MPoly> imgs;
            for (std::size_t i = 0; i < 2; ++i) {
                MPoly g = random_poly(rng, XY, 2);
                imgs.push_back(MPoly::variable(i, XY).pow(p) + Coefficient(mpz_class(p)) * g);
            }
            DeltaRing R(p, RingMap(XY, XY, imgs));
            auto F = frobenius_on_forms(C, R);
            for (int k = 0; k < 4; ++k) {
                Form w = random_form(rng, C, 2);
                CHECK(C.d(F.frobenius(w)) == Coefficient(mpz_class(p)) * F.frobenius(C.d(w)));
                Form v = random_form(rng, C, 2);
                CHECK(F.frobenius(w.wedge(v)) == F.frobenius(w).wedge(F.frobenius(v)));
                CHECK(F.frobenius(w).is_p_integral(p));
            }
            // F(dx_j) reduces to x_j^(p-1) dx_j mod p
            for (std::size_t j = 0; j < 2; ++j) {
                Form diff = F.frobenius(C.dx(j)) - MPoly::variable(j, XY).pow(p - 1) * C.dx(j);
                CHECK(diff.valuation(p) >= 0);
            }
        }
    }
}

TEST_CASE("universal map out of the de Rham complex")
{
    unsigned long p = 3;
    DeltaRing Rx = DeltaRing::standard(p, {"x"});
    DeltaRing Ry = DeltaRing::standard(p, {"y"});
    auto src = frobenius_on_forms(DeRhamComplex({"x"}), Rx);
    auto tgt = frobenius_on_forms(DeRhamComplex({"y"}), Ry);

    RingMap f({"x"}, {"y"}, {P("y^3", {"y"})});
    DAMap m = universal_da_map(Rx, tgt, f);
    CHECK(m.on_differentials[0] == P("3*y^2", {"y"}) * tgt.complex.dx(0));
    auto check = check_da_map(m, src, tgt);
    CHECK(check.pass);

    RingMap bad({"x"}, {"y"}, {P("y + 1", {"y"})});
    try {
        universal_da_map(Rx, tgt, bad);
        FAIL("expected FrobeniusMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::FrobeniusMismatch);
    }

    // Two-variable source mapped along a non-standard lift
    DeltaRing Rs(2, RingMap({"x"}, {"x"}, {P("x^2 + 2*x", {"x"})}));
    DeltaRing Rt(2, RingMap(XY, XY, {P("x^2 + 2*x"), P("y^2")}));
    auto s2 = frobenius_on_forms(DeRhamComplex({"x"}), Rs);
    auto t2 = frobenius_on_forms(DeRhamComplex(XY), Rt);
    DAMap m2 = universal_da_map(Rs, t2, RingMap({"x"}, XY, {P("x")}));
    CHECK(check_da_map(m2, s2, t2).pass);
}

TEST_CASE("form JSON round trip")
{
    DeRhamComplex C({"x", "y", "z"});
    std::mt19937 rng(3);
    for (int t = 0; t < 5; ++t) {
        Form w = random_form(rng, C, 2);
        CHECK(Form::from_json(w.to_json(), C.variables(), 3) == w);
    }
    nlohmann::json j = nlohmann::json::parse(R"([{"coeff": "x", "wedge": [1, 0]}])");
    CHECK(Form::from_json(j, C.variables(), 3) == -(P("x", C.variables()) * C.dx(0).wedge(C.dx(1))));
}
