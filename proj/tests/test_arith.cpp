#include <doctest.h>

#include <numeric>
#include <functional>
#include <random>
#include <set>

#include "dwitt/arith.hpp"
#include "dwitt/error.hpp"
#include "dwitt/matrix.hpp"
#include "dwitt/modular.hpp"

using namespace dwitt;
using namespace dwitt::arith;

namespace {

MPoly P(const char* s, std::vector<std::string> vars = {"x"}) { return MPoly::parse(s, vars); }

// gcd of all k x k minors, computed by brute force over row/column subsets.
mpz_class minor_gcd(const IntMatrix& A, std::size_t k)
{
    mpz_class g = 0;
    std::vector<std::size_t> rs(k), cs(k);
    std::function<void(std::size_t, std::size_t)> pick_cols;
    std::function<void(std::size_t, std::size_t)> pick_rows = [&](std::size_t start, std::size_t depth) {
        if (depth == k) {
            pick_cols(0, 0);
            return;
        }
        for (std::size_t r = start; r < A.rows(); ++r) {
            rs[depth] = r;
            pick_rows(r + 1, depth + 1);
        }
    };
    pick_cols = [&](std::size_t start, std::size_t depth) {
        if (depth == k) {
            IntMatrix m(k, k);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) m(i, j) = A(rs[i], cs[j]);
            mpz_class d = m.determinant();
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), d.get_mpz_t());
            return;
        }
        for (std::size_t c = start; c < A.cols(); ++c) {
            cs[depth] = c;
            pick_cols(c + 1, depth + 1);
        }
    };
    pick_rows(0, 0);
    return g;
}

IntMatrix random_matrix(std::mt19937& rng, std::size_t r, std::size_t c, int bound)
{
    std::uniform_int_distribution<int> dist(-bound, bound);
    IntMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = dist(rng);
    return m;
}

MPoly random_poly(std::mt19937& rng, const std::vector<std::string>& vars, int max_deg)
{
    std::uniform_int_distribution<int> coeff(-5, 5), deg(0, max_deg), count(0, 4);
    MPoly q(vars);
    int n = count(rng);
    for (int t = 0; t < n; ++t) {
        Exponent e(vars.size());
        for (auto& x : e) x = deg(rng);
        q.add_term(e, Coefficient(coeff(rng), 1 + (rng() % 2) * 4));
    }
    return q;
}

}  // namespace

TEST_CASE("coefficient valuation and integrality")
{
    CHECK(Coefficient(12).valuation(2) == 2);
    CHECK(Coefficient(mpz_class(1), mpz_class(4)).valuation(2) == -2);
    CHECK(Coefficient(0).valuation(3) == INT_MAX);
    CHECK(Coefficient::parse("-3/6") == Coefficient(mpz_class(-1), mpz_class(2)));
    CHECK_FALSE(Coefficient(mpz_class(1), mpz_class(3)).is_p_integral(3));
    CHECK(Coefficient(mpz_class(1), mpz_class(3)).is_p_integral(2));
}

TEST_CASE("polynomial parsing and printing round trip")
{
    std::vector<std::string> v{"x", "y"};
    MPoly q = MPoly::parse("3*x^2*y - 1/5", v);
    CHECK(q.to_string() == "3*x^2*y - 1/5");
    CHECK(MPoly::parse(q.to_string(), v) == q);
    CHECK(MPoly::from_json(q.to_json()) == q);
    CHECK(P("(x+1)^2") == P("x^2 + 2*x + 1"));
    CHECK_THROWS_AS(MPoly::parse("x + z", v), Error);
}

TEST_CASE("apply_map examples")
{
    RingMap id = RingMap::identity({"x"});
    CHECK(apply_map(id, P("x^2+1")) == P("x^2+1"));
    RingMap sq({"x"}, {"x"}, {P("x^2")});
    CHECK(apply_map(sq, P("x+1")) == P("x^2+1"));
    // (x^2+2x)^2 expanded by hand: x^4 + 4x^3 + 4x^2
    RingMap lift({"x"}, {"x"}, {P("x^2+2*x")});
    CHECK(apply_map(lift, P("x^2")) == P("x^4 + 4*x^3 + 4*x^2"));
    CHECK_THROWS_AS(apply_map(sq, MPoly::parse("x*y", {"x", "y"})), Error);
}

TEST_CASE("apply_map is a ring homomorphism")
{
    std::mt19937 rng(7);
    std::vector<std::string> v{"x", "y"};
    RingMap f(v, v, {MPoly::parse("x^2 + 2*y", v), MPoly::parse("y^3 - x + 1/5", v)});
    CHECK(apply_map(f, MPoly::constant(1, v)) == MPoly::constant(1, v));
    for (int i = 0; i < 100; ++i) {
        MPoly a = random_poly(rng, v, 3), b = random_poly(rng, v, 3);
        CHECK(apply_map(f, a + b) == apply_map(f, a) + apply_map(f, b));
        CHECK(apply_map(f, a * b) == apply_map(f, a) * apply_map(f, b));
    }
}

TEST_CASE("exact_div_p")
{
    CHECK(exact_div_p(P("2*x+4"), 2) == P("x+2"));
    CHECK(exact_div_p(MPoly({"x"}), 3).is_zero());
    try {
        exact_div_p(P("3*x^2+x"), 3);
        FAIL("expected NotDivisible");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotDivisible);
    }
    std::mt19937 rng(3);
    for (int i = 0; i < 50; ++i) {
        MPoly q = random_poly(rng, {"x"}, 4) * Coefficient(3);
        CHECK(exact_div_p(q, 3) * Coefficient(3) == q);
    }
}

TEST_CASE("smith examples")
{
    auto s = smith_decompose(IntMatrix{{2, 0}, {0, 3}});
    // invariant factors from minor gcds: d1 = gcd(2,3) = 1, d1*d2 = det = 6
    IntMatrix A{{2, 0}, {0, 3}};
    CHECK(s.D(0, 0) == minor_gcd(A, 1));
    CHECK(s.D(0, 0) * s.D(1, 1) == minor_gcd(A, 2));
    CHECK(s.D == (IntMatrix{{1, 0}, {0, 6}}));
    CHECK(smith_decompose(IntMatrix::identity(3)).D == IntMatrix::identity(3));
    CHECK(smith_decompose(IntMatrix{{5}}).D == IntMatrix{{5}});
}

TEST_CASE("smith decomposition property on random matrices")
{
    std::mt19937 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t r = 1 + rng() % 5, c = 1 + rng() % 5;
        IntMatrix A = random_matrix(rng, r, c, 9);
        auto s = smith_decompose(A);
        CHECK(s.U * A * s.V == s.D);
        CHECK(abs(s.U.determinant()) == 1);
        CHECK(abs(s.V.determinant()) == 1);
        CHECK(s.D.is_diagonal());
        auto d = s.diagonal();
        mpz_class prod = 1;
        for (std::size_t i = 0; i < d.size(); ++i) {
            CHECK(d[i] >= 0);
            if (i + 1 < d.size() && d[i] != 0)
                CHECK(mpz_divisible_p(d[i + 1].get_mpz_t(), d[i].get_mpz_t()));
            if (i < s.rank) {
                prod *= d[i];
                CHECK(prod == minor_gcd(A, i + 1));
            }
        }
    }
}

TEST_CASE("lattice intersection")
{
    IntMatrix two{{2}}, three{{3}};
    auto I = lattice_intersect(two, three);
    CHECK(I.cols() == 1);
    CHECK(abs(I(0, 0)) == std::lcm(2, 3));
    CHECK(lattice_intersect(two, two) == lattice_basis(two));
    IntMatrix pz = IntMatrix::scalar(2, 5);
    CHECK(lattice_basis(lattice_intersect(IntMatrix::identity(2), pz)) == lattice_basis(pz));
}

TEST_CASE("lattice intersection property")
{
    std::mt19937 rng(5);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = 1 + rng() % 3;
        IntMatrix A = random_matrix(rng, n, 1 + rng() % 3, 6);
        IntMatrix B = random_matrix(rng, n, 1 + rng() % 3, 6);
        IntMatrix I = lattice_intersect(A, B);
        CHECK(lattice_contains(A, I));
        CHECK(lattice_contains(B, I));
        // diagonal lattices: intersection is the coordinatewise lcm
        std::vector<long> a(n), b(n);
        IntMatrix DA(n, n), DB(n, n), L(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = 1 + rng() % 12;
            b[i] = 1 + rng() % 12;
            DA(i, i) = a[i];
            DB(i, i) = b[i];
            L(i, i) = std::lcm(a[i], b[i]);
        }
        IntMatrix J = lattice_intersect(DA, DB);
        CHECK(lattice_contains(J, L));
        CHECK(lattice_contains(L, J));
    }
}

TEST_CASE("kernel, preimage and quotients")
{
    IntMatrix A{{1, 2, 3}, {2, 4, 6}};
    IntMatrix K = integer_kernel(A);
    CHECK(K.cols() == 2);
    CHECK((A * K).is_zero());
    IntMatrix M{{2, 0}, {0, 3}};
    auto inv = quotient_invariants(M);
    REQUIRE(inv.size() == 1);
    CHECK(inv[0] == 6);
    // {y : 2y in 4Z} = 2Z
    auto pre = lattice_preimage(IntMatrix{{2}}, IntMatrix{{4}});
    CHECK(pre == IntMatrix{{2}});
    auto sol = lattice_solve(IntMatrix{{2, 0}, {0, 4}}, {mpz_class(4), mpz_class(8)});
    REQUIRE(sol.has_value());
    CHECK_FALSE(lattice_contains(IntMatrix{{2, 0}, {0, 4}}, std::vector<mpz_class>{1, 0}));
}

TEST_CASE("Howell span membership against brute force")
{
    ModRing ring(2, 3);
    std::mt19937 rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t dim = 1 + rng() % 3;
        HowellSpan span(ring, dim);
        std::vector<ModVec> gens;
        for (int g = 0; g < 2; ++g) {
            ModVec v(dim);
            for (auto& x : v) x = rng() % 8;
            gens.push_back(v);
            span.insert(v);
        }
        // enumerate the span directly
        std::set<ModVec> members;
        for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b) {
                ModVec v(dim);
                for (std::size_t j = 0; j < dim; ++j) v[j] = (a * gens[0][j] + b * gens[1][j]) % 8;
                members.insert(v);
            }
        std::size_t len = 0;
        for (std::size_t s = members.size(); s > 1; s /= 2) ++len;
        CHECK(span.span_length() == len);
        ModVec v(dim, 0);
        std::function<void(std::size_t)> walk = [&](std::size_t j) {
            if (j == dim) {
                CHECK(span.contains(v) == (members.count(v) > 0));
                return;
            }
            for (int x = 0; x < 8; ++x) {
                v[j] = x;
                walk(j + 1);
            }
        };
        walk(0);
        std::size_t qlen = 0;
        for (unsigned e : span.quotient_exponents()) qlen += e;
        CHECK(qlen == 3 * dim - len);
    }
}

TEST_CASE("solution counts over Z/p^N")
{
    ModRing ring(3, 2);
    // 3x = 0 over Z/9 has 3 solutions
    CHECK(solution_count_exponent(IntMatrix{{3}}, ring) == 1);
    CHECK(solution_count_exponent(IntMatrix{{1, 1}}, ring) == 2);
    CHECK(solution_count_exponent(IntMatrix(0, 2), ring) == 4);
}
