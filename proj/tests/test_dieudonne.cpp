#include <doctest.h>

#include <random>

#include "dwitt/dieudonne.hpp"
#include "dwitt/error.hpp"

using namespace dwitt;
using namespace dwitt::dieudonne;
using arith::MPoly;
using arith::RingMap;
using witt::DeltaRing;

namespace {

IntMatrix scalar(long v) { return IntMatrix{{v}}; }

DieudonneComplex two_term(unsigned long p, long d, long F0, long F1)
{
    return DieudonneComplex::make(p, 0, {1, 1}, {scalar(d)}, {scalar(F0), scalar(F1)});
}

DieudonneComplex single(unsigned long p, int degree, IntMatrix F)
{
    std::size_t r = F.rows();
    return DieudonneComplex::make(p, degree, {r}, {}, {F});
}

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

IntMatrix random_unimodular(std::mt19937& rng, std::size_t n)
{
    IntMatrix U = IntMatrix::identity(n);
    std::uniform_int_distribution<long> c(-2, 2);
    std::uniform_int_distribution<std::size_t> idx(0, n ? n - 1 : 0);
    for (int t = 0; t < 6 && n > 1; ++t) {
        std::size_t i = idx(rng), j = idx(rng);
        if (i == j)
            continue;
        long k = c(rng);
        for (std::size_t r = 0; r < n; ++r) U(r, i) += k * U(r, j);
    }
    return U;
}

IntMatrix inverse(const IntMatrix& U) { return *arith::solve_integral(U, IntMatrix::identity(U.rows())); }

// Direct sum of pieces (Z --p^a--> Z) with F = (p^(b+1), p^b), plus isolated
// copies of Z in either degree, conjugated by random unimodular changes of basis.
DieudonneComplex random_complex(std::mt19937& rng, unsigned long p, bool saturable)
{
    std::uniform_int_distribution<int> count(1, 2), a(0, 3), b(0, 1), sgn(0, 1);
    int pieces = count(rng), solo0 = count(rng) - 1, solo1 = count(rng) - 1;
    std::size_t r0 = pieces + solo0, r1 = pieces + solo1;
    IntMatrix d(r1, r0), F0(r0, r0), F1(r1, r1);
    for (int i = 0; i < pieces; ++i) {
        long u = sgn(rng) ? 1 : -1;
        int bb = saturable ? 0 : b(rng);
        d(i, i) = arith::ipow(p, a(rng));
        F0(i, i) = u * arith::ipow(p, bb + 1);
        F1(i, i) = u * arith::ipow(p, bb);
    }
    for (int i = 0; i < solo0; ++i) F0(pieces + i, pieces + i) = saturable ? 1 : arith::ipow(p, b(rng));
    for (int i = 0; i < solo1; ++i) F1(pieces + i, pieces + i) = saturable ? 1 : arith::ipow(p, b(rng));
    IntMatrix U0 = random_unimodular(rng, r0), U1 = random_unimodular(rng, r1);
    return DieudonneComplex::make(p, 0, {r0, r1}, {U1 * d * inverse(U0)},
                                  {U0 * F0 * inverse(U0), U1 * F1 * inverse(U1)});
}

// #{y mod p : d y = 0 mod p} by enumeration.
long kernel_count_mod_p(const IntMatrix& d, unsigned long p)
{
    std::size_t n = d.cols();
    long total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= p;
    long count = 0;
    for (long code = 0; code < total; ++code) {
        std::vector<mpz_class> y(n);
        long c = code;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = c % p;
            c /= p;
        }
        auto img = d.apply(y);
        bool zero = true;
        for (auto& v : img) zero = zero && v % p == 0;
        count += zero;
    }
    return count;
}

}  // namespace

TEST_CASE("check_dieudonne examples")
{
    CHECK(check_dieudonne(DieudonneComplex::make(3, 0, {2, 1}, {}, {IntMatrix{{5, 1}, {0, 7}}, scalar(4)})).pass);
    CHECK(check_dieudonne(two_term(3, 3, 3, 1)).pass);
    auto bad = check_dieudonne(two_term(3, 3, 3, 2));
    CHECK_FALSE(bad.pass);
    CHECK(bad.results[1].witness == "degree 0 entry (0,0)");
    auto rt = DieudonneComplex::from_json(two_term(5, 5, 5, 1).to_json());
    CHECK(rt.d[0] == scalar(5));
    expect_error(ErrorCode::ShapeMismatch, [] { DieudonneComplex::make(2, 0, {1, 2}, {scalar(1)}, {}); });
}

TEST_CASE("eta_p examples")
{
    auto zero = eta_p(DieudonneComplex::zero(2));
    CHECK(zero.complex.is_zero());

    for (unsigned long p : {2ul, 3ul}) {
        // (Z --p--> Z): degree 0 is all of Z, degree 1 is pZ, and the new
        // differential in the bases (1, p) is multiplication by 1.
        auto e = eta_p(two_term(p, p, p, 1));
        CHECK(e.basis[0] == scalar(1));
        CHECK(e.basis[1] == scalar(1));
        CHECK(e.complex.d[0] == scalar(1));

        auto s = eta_p(single(p, 1, scalar(1)));
        CHECK(s.basis[0] == scalar(1));  // (eta_p M)^1 = p * (Z), stored divided by p
        CHECK(s.alpha[0] == scalar(1));
    }
}

TEST_CASE("eta_p lattices against a residue-count oracle")
{
    std::mt19937 rng(7);
    for (unsigned long p : {2ul, 3ul})
        for (int t = 0; t < 25; ++t) {
            auto M = random_complex(rng, p, t % 2);
            auto e = eta_p(M);
            long count = kernel_count_mod_p(M.d[0], p);
            mpz_class index = arith::ipow(p, M.ranks[0]) / count;
            mpz_class det = abs(e.basis[0].determinant());
            CHECK(det == index);
            auto image = M.d[0] * e.basis[0];
            CHECK(image.reduce_mod(p).is_zero());
            CHECK(check_dieudonne(e.complex).pass);
            // alpha commutes with d and F
            CHECK(e.complex.d[0] * e.alpha[0] == e.alpha[1] * M.d[0]);
            for (int k = 0; k < 2; ++k) CHECK(e.complex.F[k] * e.alpha[k] == e.alpha[k] * M.F[k]);
        }
}

TEST_CASE("saturation")
{
    CHECK(is_saturated(single(2, 0, scalar(1))));
    CHECK_FALSE(is_saturated(single(2, 0, scalar(2))));
    CHECK(is_saturated(DieudonneComplex::zero(3)));

    auto T0 = saturate(single(3, 0, scalar(1)));
    CHECK(*T0.stabilized_at == 0);

    for (unsigned long p : {2ul, 3ul}) {
        auto T = saturate(two_term(p, p, p, 1));
        REQUIRE(T.stabilized_at);
        CHECK(*T.stabilized_at <= 2);
        CHECK(is_saturated(T.result()));
    }

    expect_error(ErrorCode::IterationLimit, [] { saturate(single(2, 0, scalar(4))); });
    auto partial = saturation_tower(single(2, 0, scalar(4)), 3);
    CHECK_FALSE(partial.stabilized_at);
    CHECK(partial.stages.size() == 4);
}

TEST_CASE("saturation tower properties on random complexes")
{
    std::mt19937 rng(99);
    for (unsigned long p : {2ul, 3ul})
        for (int t = 0; t < 20; ++t) {
            auto M = random_complex(rng, p, true);
            auto T = saturate(M);
            const auto& S = T.result();
            CHECK(is_saturated(S));
            for (std::size_t k = 0; k < T.maps.size(); ++k) {
                const auto &A = T.stages[k], &B = T.stages[k + 1];
                const auto& a = T.maps[k];
                CHECK(B.d[0] * a[0] == a[1] * A.d[0]);
                for (int n = 0; n < 2; ++n) CHECK(B.F[n] * a[n] == a[n] * A.F[n]);
            }
            auto V = solve_verschiebung(S);
            for (std::size_t k = 0; k < S.length(); ++k) {
                IntMatrix pI = IntMatrix::scalar(S.ranks[k], p);
                CHECK(S.F[k] * V[k] == pI);
                CHECK(V[k] * S.F[k] == pI);
                CHECK(S.F[k].determinant() != 0);
            }
        }
}

TEST_CASE("Verschiebung")
{
    CHECK(solve_verschiebung(single(5, 0, scalar(1)))[0] == scalar(5));
    auto V = solve_verschiebung(single(3, 0, IntMatrix{{1, 1}, {0, 1}}));
    CHECK(V[0] == IntMatrix{{3, -3}, {0, 3}});
    expect_error(ErrorCode::NotSaturated, [] { solve_verschiebung(single(3, 0, scalar(3))); });
}

TEST_CASE("W_r quotients")
{
    for (unsigned long p : {2ul, 3ul}) {
        auto M = single(p, 0, scalar(1));
        CHECK(wr_quotient(M, 1).modules[0].invariants == std::vector<mpz_class>{mpz_class(p)});
        CHECK(wr_quotient(M, 3).modules[0].invariants == std::vector<mpz_class>{arith::ipow(p, 3)});
    }
    CHECK(wr_quotient(DieudonneComplex::zero(2), 2).modules.empty());
    expect_error(ErrorCode::NotSaturated, [] { wr_quotient(single(2, 0, scalar(2)), 1); });
}

TEST_CASE("W_r structure maps are well defined")
{
    std::mt19937 rng(31);
    for (unsigned long p : {2ul, 3ul})
        for (int t = 0; t < 10; ++t) {
            auto S = saturate(random_complex(rng, p, true)).result();
            auto V = solve_verschiebung(S);
            for (unsigned r = 1; r <= 3; ++r) {
                auto rel0 = wr_relations(S, V, r, 0), rel1 = wr_relations(S, V, r, 1);
                auto next0 = wr_relations(S, V, r + 1, 0), next1 = wr_relations(S, V, r + 1, 1);
                CHECK(arith::lattice_contains(rel0, next0));
                CHECK(arith::lattice_contains(rel1, next1));
                CHECK(arith::lattice_contains(rel1, S.d[0] * rel0));
                CHECK(arith::lattice_contains(next0, V[0] * rel0));
                CHECK(arith::lattice_contains(next1, V[1] * rel1));
                if (r > 1) {
                    CHECK(arith::lattice_contains(wr_relations(S, V, r - 1, 0), S.F[0] * rel0));
                    CHECK(arith::lattice_contains(wr_relations(S, V, r - 1, 1), S.F[1] * rel1));
                }
                auto W = wr_quotient(S, r), Wn = wr_quotient(S, r + 1);
                for (int k = 0; k < 2; ++k) CHECK(W.lengths(p)[k] <= Wn.lengths(p)[k]);
            }
        }
}

TEST_CASE("strictness probe")
{
    CHECK(strictness_probe(DieudonneComplex::zero(2)).strict);

    auto Z = strictness_probe(single(2, 0, scalar(1)));
    CHECK_FALSE(Z.strict);
    REQUIRE(Z.lengths.size() == default_strictness_rmax);
    for (unsigned r = 1; r <= default_strictness_rmax; ++r) CHECK(Z.lengths[r - 1][0] == r);
    REQUIRE(Z.witness_degree);
    CHECK(Z.witness[0] == 64);

    auto P = single(3, 0, scalar(1));
    P.precision = default_strictness_rmax;
    auto rep = strictness_probe(P);
    CHECK(rep.strict);
    CHECK(rep.verdict == "strict up to precision 6");

    auto Q = single(3, 0, scalar(1));
    Q.precision = 8;
    auto rq = strictness_probe(Q, 4);
    CHECK_FALSE(rq.strict);
    CHECK(rq.kernel_lengths[3][0] == 4);
}

TEST_CASE("Dieudonne algebra checks")
{
    for (unsigned long p : {2ul, 3ul}) {
        std::vector<std::string> xy{"x", "y"};
        DeltaRing R(p, RingMap(xy, xy, {MPoly::parse("x^" + std::to_string(p) + " + " + std::to_string(p) + "*y", xy),
                                        MPoly::variable(1, xy).pow(p)}));
        auto A = derham::frobenius_on_forms(derham::DeRhamComplex(xy), R);
        CHECK(check_dieudonne_algebra(algebra_view(A)).pass);
    }

    auto A = derham::frobenius_on_forms(derham::DeRhamComplex({"x"}), DeltaRing::standard(2, {"x"}));
    auto v = algebra_view(A);
    v.F = [](const Form& f) { return f; };
    auto rep = check_dieudonne_algebra(v);
    CHECK_FALSE(rep.pass);
    CHECK_FALSE(rep.results[4].pass);
    CHECK(rep.results[4].witness == "x");

    auto w = algebra_view(A);
    w.min_degree = -1;
    auto rw = check_dieudonne_algebra(w);
    CHECK_FALSE(rw.pass);
    CHECK_FALSE(rw.results[0].pass);
}

namespace {

std::vector<ClassificationDatum> classification_catalog()
{
    std::vector<ClassificationDatum> out;
    std::vector<std::string> x{"x"}, xy{"x", "y"};
    auto P = [](const char* s, const std::vector<std::string>& v) { return MPoly::parse(s, v); };

    for (unsigned long p : {2ul, 3ul}) {
        out.push_back(ClassificationDatum::de_rham(DeltaRing::standard(p, x)));
        out.push_back(ClassificationDatum::de_rham(DeltaRing::standard(p, xy)));
    }
    out.push_back(ClassificationDatum::de_rham(DeltaRing(2, RingMap(x, x, {P("x^2 + 2*x", x)}))));
    out.push_back(ClassificationDatum::de_rham(DeltaRing(3, RingMap(xy, xy, {P("x^3 + 3*y^2", xy), P("y^3", xy)}))));

    // zero mixed structure with arbitrary phi_M
    {
        DeltaRing R = DeltaRing::standard(3, x);
        ClassificationDatum D{R, 2, {{P("x", x), P("1", x)}, {P("0", x), P("2", x)}},
                              {Form(x, 2)}, {Form(x, 2), Form(x, 2)}};
        out.push_back(D);
    }
    // de Rham with phi_M doubled
    {
        auto D = ClassificationDatum::de_rham(DeltaRing::standard(2, x));
        D.phi_M[0][0] = D.phi_M[0][0] * arith::Coefficient(2);
        out.push_back(D);
    }
    // d(delta x) != 0
    {
        DeltaRing R = DeltaRing::standard(2, x);
        Form e0 = Form::generator(0, x, 2), e1 = Form::generator(1, x, 2);
        ClassificationDatum D{R, 2, {{P("x", x), P("0", x)}, {P("0", x), P("x", x)}}, {e0}, {e0.wedge(e1), Form(x, 2)}};
        out.push_back(D);
    }
    // rank-one module with delta x = x e0 and phi_M(e0) = x e0
    {
        DeltaRing R = DeltaRing::standard(2, x);
        Form e0 = Form::generator(0, x, 1);
        ClassificationDatum D{R, 1, {{P("x", x)}}, {P("x", x) * e0}, {Form(x, 1)}};
        out.push_back(D);
    }
    return out;
}

}  // namespace

TEST_CASE("classification relations")
{
    auto cat = classification_catalog();
    REQUIRE(cat.size() == 10);
    CHECK(classify_relations_check(cat[0]).pass);
    CHECK(classify_relations_check(cat[6]).pass);
    auto doubled = classify_relations_check(cat[7]);
    CHECK_FALSE(doubled.pass);
    CHECK(doubled.relations.results[0].witness == "x");

    int literal_disagreements = 0;
    for (const auto& D : cat) {
        bool algebra = check_dieudonne_algebra(assemble_classification(D)).pass;
        CHECK(classify_relations_check(D).pass == algebra);
        literal_disagreements += classify_relations_check(D, RelationOrientation::Literal).pass != algebra;
        auto rt = ClassificationDatum::from_json(D.to_json());
        CHECK(classify_relations_check(rt).pass == algebra);
    }
    CHECK(literal_disagreements > 0);
}
