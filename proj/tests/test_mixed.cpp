#include <doctest.h>

#include <functional>
#include <random>

#include "dwitt/derham.hpp"
#include "dwitt/error.hpp"
#include "dwitt/mixed.hpp"

using namespace dwitt;
using namespace dwitt::mixed;
using arith::MPoly;
using arith::RingMap;
using dieudonne::DieudonneComplex;
using witt::DeltaRing;

namespace {

IntMatrix scalar(long v) { return IntMatrix{{v}}; }

DieudonneComplex two_term(unsigned long p, long d, long F0 = 1, long F1 = 1, unsigned precision = 0)
{
    return DieudonneComplex::make(p, 0, {1, 1}, {scalar(d)}, {scalar(F0), scalar(F1)}, precision);
}

long ipow_l(long b, unsigned e)
{
    long r = 1;
    while (e--) r *= b;
    return r;
}

long mod(long v, long m) { return ((v % m) + m) % m; }

// Enumerates every assignment of the given number of unknowns mod m.
void for_each_assignment(std::size_t count, long m, const std::function<void(const std::vector<long>&)>& fn)
{
    std::vector<long> x(count, 0);
    while (true) {
        fn(x);
        std::size_t i = 0;
        while (i < count && ++x[i] == m) x[i++] = 0;
        if (i == count)
            break;
    }
}

// Dense view of a graded mixed complex over Z/m for brute-force checks.
struct Dense {
    std::vector<Bidegree> keys;
    std::map<Bidegree, std::size_t> offset;
    std::size_t dim = 0;
};

Dense dense(const GradedMixedComplex& C)
{
    Dense D;
    for (const auto& [b, r] : C.pieces) {
        D.keys.push_back(b);
        D.offset[b] = D.dim;
        D.dim += r;
    }
    return D;
}

// Block-diagonal map M -> N from a flat list of entries, plus an optional
// shifted part M(b) -> N(eps_target(b)).
using Blocks = std::map<Bidegree, std::vector<std::vector<long>>>;

std::size_t block_unknowns(const GradedMixedComplex& M, const GradedMixedComplex& N, bool shifted)
{
    std::size_t n = 0;
    for (const auto& [b, r] : M.pieces) n += r * (shifted ? N.rank(eps_target(b)) : N.rank(b));
    return n;
}

Blocks unpack(const std::vector<long>& x, std::size_t& pos, const GradedMixedComplex& M, const GradedMixedComplex& N,
              bool shifted)
{
    Blocks out;
    for (const auto& [b, r] : M.pieces) {
        std::size_t rows = shifted ? N.rank(eps_target(b)) : N.rank(b);
        std::vector<std::vector<long>> X(rows, std::vector<long>(r));
        for (auto& row : X)
            for (auto& v : row) v = x[pos++];
        out[b] = X;
    }
    return out;
}

std::vector<std::vector<long>> to_long(const IntMatrix& A)
{
    std::vector<std::vector<long>> out(A.rows(), std::vector<long>(A.cols()));
    for (std::size_t r = 0; r < A.rows(); ++r)
        for (std::size_t c = 0; c < A.cols(); ++c) out[r][c] = A(r, c).get_si();
    return out;
}

using Mat = std::vector<std::vector<long>>;

Mat mul(const Mat& a, const Mat& b, std::size_t rows, std::size_t inner, std::size_t cols)
{
    Mat out(rows, std::vector<long>(cols, 0));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t k = 0; k < inner; ++k)
            for (std::size_t j = 0; j < cols; ++j) out[i][j] += a[i][k] * b[k][j];
    return out;
}

bool zero_mod(const Mat& a, long m)
{
    for (const auto& row : a)
        for (long v : row)
            if (mod(v, m))
                return false;
    return true;
}

Mat sub(const Mat& a, const Mat& b)
{
    Mat out = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) out[i][j] -= b[i][j];
    return out;
}

Mat scale(Mat a, long s)
{
    for (auto& row : a)
        for (auto& v : row) v *= s;
    return a;
}

Mat get(const Blocks& X, Bidegree b, std::size_t rows, std::size_t cols)
{
    auto it = X.find(b);
    return it == X.end() ? Mat(rows, std::vector<long>(cols, 0)) : it->second;
}

// Brute-force count of maps [p]^k-twisted M -> N commuting with d and eps.
long brute_hom_twist(const GradedMixedComplex& M, const GradedMixedComplex& N, long m, long twist)
{
    std::size_t n = block_unknowns(M, N, false);
    long count = 0;
    for_each_assignment(n, m, [&](const std::vector<long>& x) {
        std::size_t pos = 0;
        Blocks f = unpack(x, pos, M, N, false);
        for (const auto& [b, r] : M.pieces) {
            Bidegree bd = d_target(b), be = eps_target(b);
            Mat lhs = mul(to_long(N.d_at(b)), f[b], N.rank(bd), N.rank(b), r);
            Mat rhs = mul(get(f, bd, N.rank(bd), M.rank(bd)), to_long(M.d_at(b)), N.rank(bd), M.rank(bd), r);
            if (!zero_mod(sub(lhs, rhs), m))
                return;
            lhs = mul(to_long(N.eps_at(b)), f[b], N.rank(be), N.rank(b), r);
            rhs = mul(get(f, be, N.rank(be), M.rank(be)), scale(to_long(M.eps_at(b)), twist), N.rank(be), M.rank(be), r);
            if (!zero_mod(sub(lhs, rhs), m))
                return;
        }
        ++count;
    });
    return count;
}

// Brute-force count of maps M -> eta_p N, read literally on pairs (x, y).
long brute_hom_eta(const GradedMixedComplex& M, const GradedMixedComplex& N, long m)
{
    long p = static_cast<long>(N.p);
    std::size_t nf = block_unknowns(M, N, false), ng = block_unknowns(M, N, true);
    long count = 0;
    for_each_assignment(nf + ng, m, [&](const std::vector<long>& x) {
        std::size_t pos = 0;
        Blocks f = unpack(x, pos, M, N, false);
        Blocks g = unpack(x, pos, M, N, true);
        for (const auto& [b, r] : M.pieces) {
            Bidegree bd = d_target(b), be = eps_target(b);
            std::size_t nb = N.rank(b), nbe = N.rank(be), nbd = N.rank(bd);
            // the pair (f m, g m) lies in eta_p N
            Mat ef = mul(to_long(N.eps_at(b)), f[b], nbe, nb, r);
            if (!zero_mod(sub(ef, scale(g[b], p)), m))
                return;
            if (!zero_mod(mul(to_long(N.eps_at(be)), g[b], N.rank(eps_target(be)), nbe, r), m))
                return;
            // d(x, y) = (dx, -dy)
            Mat df = mul(to_long(N.d_at(b)), f[b], nbd, nb, r);
            Mat fd = mul(get(f, bd, nbd, M.rank(bd)), to_long(M.d_at(b)), nbd, M.rank(bd), r);
            if (!zero_mod(sub(df, fd), m))
                return;
            std::size_t nbed = N.rank(d_target(be));
            Mat dg = scale(mul(to_long(N.d_at(be)), g[b], nbed, nbe, r), -1);
            Mat gd = mul(get(g, bd, nbed, M.rank(bd)), to_long(M.d_at(b)), nbed, M.rank(bd), r);
            if (!zero_mod(sub(dg, gd), m))
                return;
            // eps(x, y) = (y, 0)
            Mat fe = mul(get(f, be, nbe, M.rank(be)), to_long(M.eps_at(b)), nbe, M.rank(be), r);
            if (!zero_mod(sub(g[b], fe), m))
                return;
            std::size_t nbee = N.rank(eps_target(be));
            Mat ge = mul(get(g, be, nbee, M.rank(be)), to_long(M.eps_at(b)), nbee, M.rank(be), r);
            if (!zero_mod(ge, m))
                return;
        }
        ++count;
    });
    return count;
}

long exp_to_count(unsigned long p, std::size_t e) { return ipow_l(static_cast<long>(p), static_cast<unsigned>(e)); }

// Random graded mixed complex on three pieces over Z/p^2, by rejection.
GradedMixedComplex random_three_piece(std::mt19937& rng, unsigned long p)
{
    static const std::vector<std::vector<Bidegree>> shapes{
        {{0, 0}, {1, -1}, {2, -2}}, {{0, 0}, {0, 1}, {1, 0}}, {{0, -1}, {0, 0}, {1, -1}},
        {{0, 0}, {1, -1}, {1, 0}},  {{0, 0}, {0, 1}, {1, -1}}};
    std::uniform_int_distribution<std::size_t> pick(0, shapes.size() - 1);
    std::uniform_int_distribution<long> entry(0, static_cast<long>(p * p) - 1);
    std::uniform_int_distribution<std::size_t> rk(1, 2);
    while (true) {
        GradedMixedComplex C;
        C.p = p;
        C.precision = 2;
        for (auto b : shapes[pick(rng)]) C.pieces[b] = rk(rng);
        if (C.total_rank() > 4)
            continue;
        for (const auto& [b, r] : C.pieces) {
            auto fill = [&](std::size_t rows) {
                IntMatrix A(rows, r);
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < r; ++j) A(i, j) = entry(rng);
                return A;
            };
            if (C.rank(d_target(b)))
                C.d[b] = fill(C.rank(d_target(b)));
            if (C.rank(eps_target(b)))
                C.eps[b] = fill(C.rank(eps_target(b)));
        }
        if (check_mixed(C).pass)
            return C;
    }
}

std::vector<GradedMixedComplex> catalog(unsigned long p)
{
    long q = static_cast<long>(p);
    std::vector<GradedMixedComplex> out;
    auto heart = [&](DieudonneComplex M) {
        M.precision = 2;
        return heart_embed(M, false);
    };
    out.push_back(GradedMixedComplex{p, 2, {}, {}, {}, {}, false, {}});
    out.push_back(heart(DieudonneComplex::make(p, 0, {1}, {}, {})));
    out.push_back(heart(two_term(p, q)));
    out.push_back(heart(two_term(p, 1)));
    out.push_back(heart(two_term(p, 0)));
    out.push_back(heart(DieudonneComplex::make(p, 0, {1, 2}, {IntMatrix{{q}, {1}}}, {})));
    out.push_back(heart(DieudonneComplex::make(p, -1, {1, 1, 1}, {scalar(q), scalar(q)}, {})));
    {
        GradedMixedComplex C;
        C.p = p;
        C.precision = 2;
        C.pieces = {{{0, 0}, 1}, {{0, 1}, 1}, {{1, 0}, 1}};
        C.d[{0, 0}] = scalar(q);
        C.eps[{0, 1}] = scalar(q);
        out.push_back(C);
    }
    {
        GradedMixedComplex C;
        C.p = p;
        C.precision = 2;
        C.pieces = {{{0, -1}, 1}, {{0, 0}, 2}, {{1, -1}, 1}};
        C.d[{0, -1}] = IntMatrix{{1}, {0}};
        C.eps[{0, 0}] = IntMatrix{{0, q}};
        out.push_back(C);
    }
    {
        GradedMixedComplex C;
        C.p = p;
        C.precision = 2;
        C.pieces = {{{1, -1}, 2}, {{2, -2}, 1}};
        C.eps[{1, -1}] = IntMatrix{{q, 1}};
        out.push_back(C);
    }
    return out;
}

}  // namespace

TEST_CASE("check_mixed examples")
{
    GradedMixedComplex C;
    C.p = 3;
    C.pieces = {{{0, 0}, 2}, {{1, -1}, 1}, {{0, 1}, 1}};
    C.d[{0, 0}] = IntMatrix{{1, 5}};
    CHECK(check_mixed(C).pass);

    auto H = heart_embed(two_term(3, 3, 3, 1));
    CHECK(check_mixed(H).pass);
    H.F[{1, -1}] = scalar(3);  // eps F = F eps, off by p
    auto bad = check_mixed(H);
    CHECK_FALSE(bad.pass);
    CHECK_FALSE(bad.results[4].pass);

    CHECK(GradedMixedComplex::from_json(heart_embed(two_term(3, 3, 3, 1)).to_json()).to_json() ==
          heart_embed(two_term(3, 3, 3, 1)).to_json());
}

TEST_CASE("heart_embed and the Dieudonne relation")
{
    auto single = heart_embed(DieudonneComplex::make(2, 0, {1}, {}, {}));
    CHECK(single.pieces.size() == 1);
    CHECK(single.eps.empty());

    auto H = heart_embed(two_term(5, 5));
    CHECK(H.pieces.size() == 2);
    CHECK(H.eps.at({0, 0}) == scalar(5));

    for (long F1 : {1, 2, 5})
        for (unsigned long p : {2ul, 3ul, 5ul}) {
            auto M = DieudonneComplex::make(p, 0, {1, 1}, {scalar(p)}, {scalar(p), scalar(F1)});
            CHECK(dieudonne::check_dieudonne(M).pass == check_mixed(heart_embed(M)).pass);
        }
}

TEST_CASE("p_twist")
{
    GradedMixedComplex Z;
    Z.p = 2;
    Z.pieces = {{{0, 0}, 1}};
    CHECK(p_twist(Z).to_json() == Z.to_json());

    auto H = heart_embed(two_term(3, 1), false);
    CHECK(p_twist(H).eps.at({0, 0}) == scalar(3));
    CHECK(p_twist(p_twist(H)).eps.at({0, 0}) == scalar(9));
    CHECK(check_mixed(p_twist(H)).pass);
}

TEST_CASE("mixed decalage")
{
    GradedMixedComplex zero;
    zero.p = 2;
    CHECK(eta_p_mixed(zero).complex.pieces.empty());

    for (unsigned long p : {2ul, 3ul}) {
        auto C = heart_embed(two_term(p, p), false);
        auto E = eta_p_mixed(C).complex;
        CHECK(E.pieces == C.pieces);
        CHECK(E.eps.at({0, 0}) == scalar(1));

        GradedMixedComplex Z;
        Z.p = p;
        Z.pieces = {{{0, 0}, 2}, {{0, 1}, 1}, {{1, -1}, 1}};
        Z.d[{0, 0}] = IntMatrix{{1, 1}};
        auto EZ = eta_p_mixed(Z);
        CHECK(EZ.complex.pieces == Z.pieces);
        CHECK(EZ.complex.d == Z.d);
        for (const auto& [b, B] : EZ.basis) CHECK(B == IntMatrix::identity(Z.rank(b)));
    }
}

TEST_CASE("mixed decalage is closed and matches the pair description")
{
    std::mt19937 rng(41);
    std::uniform_int_distribution<int> e(0, 2), u(-3, 3);
    for (unsigned long p : {2ul, 3ul})
        for (int t = 0; t < 15; ++t) {
            long a = ipow_l(static_cast<long>(p), e(rng)) * (u(rng) | 1);
            long b = u(rng);
            auto M = DieudonneComplex::make(p, 0, {1, 2}, {IntMatrix{{a}, {b * static_cast<long>(p)}}},
                                            {scalar(static_cast<long>(p)), IntMatrix::identity(2)});
            auto C = heart_embed(M);
            REQUIRE(check_mixed(C).pass);
            auto R = eta_p_mixed(C);
            CHECK(check_mixed(R.complex).pass);
            for (const auto& [bd, B] : R.basis) {
                // every basis vector x has y = eps x / p integral, and eps y = 0
                IntMatrix ex = C.eps_at(bd) * B;
                CHECK(ex.reduce_mod(p).is_zero());
            }
        }
    for (unsigned long p : {2ul, 3ul}) {
        auto D = ddr_mixed(DeltaRing::standard(p, {"x", "y"}), 3);
        auto R = eta_p_mixed(D);
        CHECK(check_mixed(R.complex).pass);
        CHECK(check_mixed(p_twist(D)).pass);
    }
}

TEST_CASE("adjunction examples and brute-force Hom oracle")
{
    for (unsigned long p : {2ul, 3ul}) {
        long m = static_cast<long>(p * p);
        auto cat = catalog(p);
        auto rep0 = adjunction_check(cat[0], cat[2], 2);
        CHECK(rep0.left_exponent == 0);
        CHECK(rep0.right_exponent == 0);
        CHECK(rep0.pass);

        auto H = cat[2];  // heart of (Z/p^2 --p--> Z/p^2)
        auto rep = adjunction_check(H, H, 2);
        CHECK(rep.pass);
        CHECK(exp_to_count(p, rep.left_exponent) == brute_hom_twist(H, H, m, static_cast<long>(p)));
        CHECK(exp_to_count(p, rep.right_exponent) == brute_hom_eta(H, H, m));
    }
}

TEST_CASE("adjunction over the catalog")
{
    for (unsigned long p : {2ul, 3ul}) {
        long m = static_cast<long>(p * p);
        auto cat = catalog(p);
        REQUIRE(cat.size() == 10);
        for (const auto& C : cat) {
            CHECK(C.total_rank() <= 6);
            CHECK(check_mixed(C).pass);
        }
        int brute_checked = 0;
        for (const auto& M : cat)
            for (const auto& N : cat) {
                auto rep = adjunction_check(M, N, 2);
                CHECK(rep.pass);
                std::size_t unknowns = block_unknowns(M, N, false) + block_unknowns(M, N, true);
                if (p == 2 && unknowns <= 8) {
                    CHECK(exp_to_count(p, rep.left_exponent) == brute_hom_twist(M, N, m, 2));
                    CHECK(exp_to_count(p, rep.right_exponent) == brute_hom_eta(M, N, m));
                    ++brute_checked;
                }
            }
        if (p == 2)
            CHECK(brute_checked > 20);
    }
}

TEST_CASE("adjunction on random three-piece complexes")
{
    std::mt19937 rng(2024);
    for (unsigned long p : {2ul, 3ul})
        for (int t = 0; t < 20; ++t) {
            auto M = random_three_piece(rng, p), N = random_three_piece(rng, p);
            auto rep = adjunction_check(M, N, 2);
            CHECK(rep.counts_match);
            CHECK(rep.pass);
            if (p == 2 && block_unknowns(M, N, false) + block_unknowns(M, N, true) <= 8)
                CHECK(exp_to_count(p, rep.right_exponent) == brute_hom_eta(M, N, 4));
        }
    auto big = heart_embed(DieudonneComplex::make(2, 0, {9, 9}, {}, {}), false);
    big.precision = 2;
    try {
        adjunction_check(big, big, 2);
        FAIL("expected BudgetExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BudgetExceeded);
    }
}

TEST_CASE("heart_embed is fully faithful on Hom counts")
{
    // chain maps between two-term complexes mod p^2, by enumeration
    for (unsigned long p : {2ul, 3ul}) {
        long q = static_cast<long>(p), m = q * q;
        std::vector<DieudonneComplex> small{two_term(p, q), two_term(p, 1), two_term(p, 0),
                                            DieudonneComplex::make(p, 0, {1, 2}, {IntMatrix{{q}, {1}}}, {})};
        for (const auto& A : small)
            for (const auto& B : small) {
                std::size_t unknowns = A.ranks[0] * B.ranks[0] + A.ranks[1] * B.ranks[1];
                long count = 0;
                for_each_assignment(unknowns, m, [&](const std::vector<long>& x) {
                    IntMatrix f0(B.ranks[0], A.ranks[0]), f1(B.ranks[1], A.ranks[1]);
                    std::size_t pos = 0;
                    for (std::size_t i = 0; i < f0.rows(); ++i)
                        for (std::size_t j = 0; j < f0.cols(); ++j) f0(i, j) = x[pos++];
                    for (std::size_t i = 0; i < f1.rows(); ++i)
                        for (std::size_t j = 0; j < f1.cols(); ++j) f1(i, j) = x[pos++];
                    if ((B.d[0] * f0 - f1 * A.d[0]).reduce_mod(m).is_zero())
                        ++count;
                });
                auto hA = heart_embed(A, false), hB = heart_embed(B, false);
                CHECK(exp_to_count(p, hom_count_exponent(hA, hB, 2)) == count);
            }
    }
}

TEST_CASE("Beilinson truncation")
{
    auto H = heart_embed(two_term(3, 3));
    auto rh = beilinson_truncate(H);
    CHECK(rh.connective);
    CHECK(rh.coconnective);

    GradedMixedComplex zero;
    zero.p = 2;
    auto rz = beilinson_truncate(zero);
    CHECK(rz.connective);
    CHECK(rz.coconnective);

    GradedMixedComplex W;
    W.p = 2;
    W.pieces = {{{1, 0}, 1}};
    auto rw = beilinson_truncate(W);
    CHECK_FALSE(rw.connective);
    CHECK(rw.coconnective);
    CHECK(*rw.connective_witness == Bidegree{1, 0});
    CHECK(rw.truncation->pieces.empty());

    // weight-0 column Z --(0 2)--> Z^2 --(1 0)--> Z in degrees -1, 0, 1
    GradedMixedComplex C;
    C.p = 2;
    C.pieces = {{{0, -1}, 1}, {{0, 0}, 2}, {{0, 1}, 1}};
    C.d[{0, -1}] = IntMatrix{{0}, {2}};
    C.d[{0, 0}] = IntMatrix{{1, 0}};
    REQUIRE(check_mixed(C).pass);
    auto rc = beilinson_truncate(C);
    CHECK(rc.connective);
    CHECK(rc.coconnective);
    REQUIRE(rc.truncation);
    const auto& T = *rc.truncation;
    CHECK(check_mixed(T).pass);
    CHECK(T.rank({0, 0}) == 1);
    CHECK(T.rank({0, 1}) == 0);
    auto rt = beilinson_truncate(T);
    CHECK(rt.connective);
    // H^0 = Z/2 survives, H^1 was already zero
    REQUIRE(rt.cohomology.size() == 1);
    CHECK(rt.cohomology[0].torsion == std::vector<mpz_class>{2});

    // H^1 = Z/3 in weight 0 is above the cutoff
    GradedMixedComplex A;
    A.p = 3;
    A.pieces = {{{0, 0}, 1}, {{0, 1}, 1}};
    A.d[{0, 0}] = scalar(3);
    auto ra = beilinson_truncate(A);
    CHECK_FALSE(ra.connective);
    CHECK(*ra.connective_witness == Bidegree{0, 1});
    CHECK(ra.coconnective);
    CHECK(ra.truncation->rank({0, 0}) == 0);
    CHECK(beilinson_truncate(*ra.truncation).cohomology.empty());
}

namespace {

// The classical window complex x^a dx_I (|a| + |I| <= D) with de Rham d and projected F.
DieudonneComplex classical_window(const DeltaRing& R, unsigned D)
{
    const auto& vars = R.variables();
    derham::DeRhamComplex C(vars);
    auto DR = derham::frobenius_on_forms(C, R);
    std::size_t n = vars.size();
    std::vector<std::vector<derham::Form>> basis(n + 1);
    for (std::size_t i = 0; i <= n; ++i) basis[i] = C.monomial_basis(static_cast<int>(i), D - i);
    auto coords = [&](const derham::Form& f, const std::vector<derham::Form>& B) {
        std::vector<mpz_class> v(B.size());
        for (std::size_t k = 0; k < B.size(); ++k) {
            const auto& [mask, mono] = *B[k].terms().begin();
            auto c = f.coefficient(mask).coefficient(mono.terms().begin()->first);
            v[k] = c.numerator();
        }
        return v;
    };
    std::vector<std::size_t> ranks;
    std::vector<IntMatrix> d, F;
    for (std::size_t i = 0; i <= n; ++i) {
        ranks.push_back(basis[i].size());
        IntMatrix Fi(basis[i].size(), basis[i].size());
        for (std::size_t c = 0; c < basis[i].size(); ++c) Fi.set_column(c, coords(DR.frobenius(basis[i][c]), basis[i]));
        F.push_back(Fi);
        if (i < n) {
            IntMatrix di(basis[i + 1].size(), basis[i].size());
            for (std::size_t c = 0; c < basis[i].size(); ++c) di.set_column(c, coords(C.d(basis[i][c]), basis[i + 1]));
            d.push_back(di);
        }
    }
    return DieudonneComplex::make(R.p(), 0, ranks, d, F);
}

bool same_structure(const GradedMixedComplex& a, const GradedMixedComplex& b)
{
    if (a.pieces != b.pieces)
        return false;
    for (const auto& [k, r] : a.pieces)
        if (!(a.d_at(k) == b.d_at(k)) || !(a.eps_at(k) == b.eps_at(k)) || !(a.F_at(k) == b.F_at(k)))
            return false;
    return true;
}

}  // namespace

TEST_CASE("de Rham as a graded mixed Dieudonne complex")
{
    for (unsigned long p : {2ul, 3ul}) {
        auto R = DeltaRing::standard(p, {"x"});
        auto G = ddr_mixed(R, static_cast<unsigned>(p) + 1);
        CHECK(check_mixed(G).pass);
        // weight 1: F(dx) = x^(p-1) dx
        const auto& lab = G.labels.at({1, -1});
        std::size_t dx = std::find(lab.begin(), lab.end(), "dx") - lab.begin();
        std::string target = p == 2 ? "x*dx" : "x^2*dx";
        std::size_t img = std::find(lab.begin(), lab.end(), target) - lab.begin();
        REQUIRE(dx < lab.size());
        REQUIRE(img < lab.size());
        IntMatrix F1 = G.F.at({1, -1});
        for (std::size_t r = 0; r < F1.rows(); ++r) CHECK(F1(r, dx) == (r == img ? 1 : 0));
        // weight 0: eps is the Kahler differential, F is phi
        const auto& lab0 = G.labels.at({0, 0});
        std::size_t x = std::find(lab0.begin(), lab0.end(), "x") - lab0.begin();
        IntMatrix E0 = G.eps.at({0, 0});
        for (std::size_t r = 0; r < E0.rows(); ++r) CHECK(E0(r, x) == (lab[r] == "dx" ? 1 : 0));
        IntMatrix F0 = G.F.at({0, 0});
        std::size_t xp = std::find(lab0.begin(), lab0.end(), p == 2 ? "x^2" : "x^3") - lab0.begin();
        for (std::size_t r = 0; r < F0.rows(); ++r) CHECK(F0(r, x) == (r == xp ? 1 : 0));
    }

    for (unsigned long p : {2ul, 3ul}) {
        std::vector<std::string> xy{"x", "y"};
        DeltaRing R(p, RingMap(xy, xy, {MPoly::parse("x^" + std::to_string(p) + " + " + std::to_string(p) + "*y", xy),
                                        MPoly::variable(1, xy).pow(p)}));
        for (unsigned D : {2u, 4u}) {
            auto G = ddr_mixed(R, D);
            CHECK(check_mixed(G).pass);
            auto T = beilinson_truncate(G);
            CHECK(T.connective);
            REQUIRE(T.truncation);
            CHECK(same_structure(*T.truncation, heart_embed(classical_window(R, D))));
        }
        // two variables, window 2: weight 2 is spanned by dx^dy and F2 is the wedge square of F1
        auto G2 = ddr_mixed(R, 2);
        CHECK(G2.rank({2, -2}) == 1);
        derham::DeRhamComplex C(xy);
        auto DR = derham::frobenius_on_forms(C, R);
        auto w = DR.frobenius(C.dx(0)).wedge(DR.frobenius(C.dx(1)));
        CHECK(G2.F.at({2, -2})(0, 0) == w.coefficient(0b11).constant_term().numerator());
    }
}
