#include "dwitt/mixed.hpp"

#include <algorithm>
#include <set>

#include "dwitt/derham.hpp"
#include "dwitt/error.hpp"
#include "dwitt/modular.hpp"

namespace dwitt::mixed {

using arith::MPoly;

namespace {

std::string show(Bidegree b) { return "(" + std::to_string(b.first) + "," + std::to_string(b.second) + ")"; }

mpz_class modulus_of(unsigned long p, unsigned precision)
{
    return precision ? arith::ipow(mpz_class(p), precision) : mpz_class(0);
}

bool vanishes(IntMatrix A, const mpz_class& mod)
{
    if (mod > 0)
        A = A.reduce_mod(mod);
    return A.is_zero();
}

// Coordinates X with K X = Y, K of full column rank and Y in its column span.
IntMatrix coordinates_in(const IntMatrix& K, const IntMatrix& Y)
{
    if (K.cols() == 0)
        return IntMatrix(0, Y.cols());
    IntMatrix Kt = K.transpose();
    auto X = arith::solve_integral(Kt * K, Kt * Y);
    if (!X || !(K * *X == Y))
        fail(ErrorCode::NotInImage, "image does not lie in the sublattice");
    return *X;
}

}  // namespace

// ------------------------------------------------------------ complex

std::size_t GradedMixedComplex::rank(Bidegree b) const
{
    auto it = pieces.find(b);
    return it == pieces.end() ? 0 : it->second;
}

std::size_t GradedMixedComplex::total_rank() const
{
    std::size_t t = 0;
    for (const auto& [b, r] : pieces) t += r;
    return t;
}

namespace {

IntMatrix block(const std::map<Bidegree, IntMatrix>& m, Bidegree b, std::size_t rows, std::size_t cols)
{
    auto it = m.find(b);
    if (it == m.end())
        return IntMatrix(rows, cols);
    return it->second;
}

}  // namespace

IntMatrix GradedMixedComplex::d_at(Bidegree b) const { return block(d, b, rank(d_target(b)), rank(b)); }
IntMatrix GradedMixedComplex::eps_at(Bidegree b) const { return block(eps, b, rank(eps_target(b)), rank(b)); }

IntMatrix GradedMixedComplex::F_at(Bidegree b) const
{
    if (!has_F)
        return IntMatrix::identity(rank(b));
    return block(F, b, rank(b), rank(b));
}

std::vector<int> GradedMixedComplex::weights() const
{
    std::set<int> w;
    for (const auto& [b, r] : pieces) w.insert(b.first);
    return {w.begin(), w.end()};
}

void GradedMixedComplex::validate_shapes() const
{
    auto check = [&](const std::map<Bidegree, IntMatrix>& m, const char* name, auto target) {
        for (const auto& [b, A] : m) {
            std::size_t rows = rank(target(b)), cols = rank(b);
            if (A.rows() != rows || A.cols() != cols)
                fail(ErrorCode::ShapeMismatch, std::string(name) + " at " + show(b) + " must be " +
                                                   std::to_string(rows) + "x" + std::to_string(cols));
        }
    };
    check(d, "d", d_target);
    check(eps, "eps", eps_target);
    check(F, "F", [](Bidegree b) { return b; });
}

nlohmann::json GradedMixedComplex::to_json() const
{
    nlohmann::json pj = nlohmann::json::array();
    for (const auto& [b, r] : pieces) {
        nlohmann::json e{{"weight", b.first}, {"degree", b.second}, {"rank", r}};
        auto it = labels.find(b);
        if (it != labels.end())
            e["labels"] = it->second;
        pj.push_back(e);
    }
    auto mats = [](const std::map<Bidegree, IntMatrix>& m) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& [b, A] : m)
            a.push_back({{"weight", b.first}, {"degree", b.second}, {"matrix", A.to_json()}});
        return a;
    };
    nlohmann::json out{{"p", p}, {"precision", precision}, {"pieces", pj}, {"d", mats(d)}, {"eps", mats(eps)}};
    if (has_F)
        out["F"] = mats(F);
    return out;
}

GradedMixedComplex GradedMixedComplex::from_json(const nlohmann::json& j)
{
    try {
        GradedMixedComplex C;
        C.p = j.at("p").get<unsigned long>();
        if (!arith::is_prime(C.p))
            fail(ErrorCode::Usage, "p = " + std::to_string(C.p) + " is not prime");
        C.precision = j.value("precision", 0u);
        for (const auto& e : j.at("pieces")) {
            Bidegree b{e.at("weight").get<int>(), e.at("degree").get<int>()};
            std::size_t r = e.at("rank").get<std::size_t>();
            if (r)
                C.pieces[b] = r;
            if (e.contains("labels"))
                C.labels[b] = e["labels"].get<std::vector<std::string>>();
        }
        auto read = [&](const char* key, std::map<Bidegree, IntMatrix>& into, auto target) {
            if (!j.contains(key))
                return;
            for (const auto& e : j[key]) {
                Bidegree b{e.at("weight").get<int>(), e.at("degree").get<int>()};
                into[b] = IntMatrix::from_json(e.at("matrix"), C.rank(target(b)), C.rank(b));
            }
        };
        read("d", C.d, d_target);
        read("eps", C.eps, eps_target);
        if (j.contains("F")) {
            C.has_F = true;
            read("F", C.F, [](Bidegree b) { return b; });
        }
        C.validate_shapes();
        return C;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("mixed complex JSON: ") + e.what());
    }
}

LawReport check_mixed(const GradedMixedComplex& C)
{
    C.validate_shapes();
    mpz_class mod = modulus_of(C.p, C.precision);
    witt::LawResult dd{"d^2 = 0", true, ""}, ee{"eps^2 = 0", true, ""}, de{"d eps + eps d = 0", true, ""},
        Fd{"F d = d F", true, ""}, eF{"eps F = p F eps", true, ""};
    auto note = [](witt::LawResult& r, Bidegree b) {
        if (r.pass) {
            r.pass = false;
            r.witness = "at " + show(b);
        }
    };
    for (const auto& [b, r] : C.pieces) {
        Bidegree bd = d_target(b), be = eps_target(b);
        if (!vanishes(C.d_at(bd) * C.d_at(b), mod))
            note(dd, b);
        if (!vanishes(C.eps_at(be) * C.eps_at(b), mod))
            note(ee, b);
        if (!vanishes(C.d_at(be) * C.eps_at(b) + C.eps_at(bd) * C.d_at(b), mod))
            note(de, b);
        if (C.has_F) {
            if (!vanishes(C.F_at(bd) * C.d_at(b) - C.d_at(b) * C.F_at(b), mod))
                note(Fd, b);
            if (!vanishes(C.eps_at(b) * C.F_at(b) - mpz_class(C.p) * (C.F_at(be) * C.eps_at(b)), mod))
                note(eF, b);
        }
    }
    LawReport out;
    for (const auto& r : {dd, ee, de}) out.add(r);
    if (C.has_F) {
        out.add(Fd);
        out.add(eF);
    }
    return out;
}

GradedMixedComplex p_twist(const GradedMixedComplex& C)
{
    GradedMixedComplex T = C;
    for (auto& [b, A] : T.eps) A *= mpz_class(C.p);
    return T;
}

MixedEtaResult eta_p_mixed(const GradedMixedComplex& C)
{
    if (C.precision)
        fail(ErrorCode::Usage, "eta_p needs an exact complex");
    C.validate_shapes();
    MixedEtaResult out;
    GradedMixedComplex& E = out.complex;
    E.p = C.p;
    E.has_F = C.has_F;
    for (const auto& [b, r] : C.pieces) {
        std::size_t s = C.rank(eps_target(b));
        IntMatrix B = s == 0 ? IntMatrix::identity(r)
                             : arith::lattice_preimage(C.eps_at(b), IntMatrix::scalar(s, C.p));
        if (B.cols() != r)
            fail(ErrorCode::ShapeMismatch, "mixed decalage lattice lost rank");
        out.basis[b] = B;
        E.pieces[b] = r;
        if (s == 0 && C.labels.count(b))
            E.labels[b] = C.labels.at(b);
    }
    for (const auto& [b, B] : out.basis) {
        Bidegree bd = d_target(b), be = eps_target(b);
        if (E.rank(bd)) {
            IntMatrix dB = C.d_at(b) * B;
            E.d[b] = *arith::solve_integral(out.basis.at(bd), dB);
        }
        if (E.rank(be)) {
            IntMatrix y = C.eps_at(b) * B;
            for (std::size_t r = 0; r < y.rows(); ++r)
                for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) /= C.p;
            auto e = arith::solve_integral(out.basis.at(be), y);
            if (!e)
                fail(ErrorCode::NotInImage, "eps(x)/p leaves the decalage lattice at " + show(b));
            E.eps[b] = *e;
        }
        if (C.has_F) {
            auto f = arith::solve_integral(B, C.F_at(b) * B);
            if (!f)
                fail(ErrorCode::NotInImage, "F does not preserve the decalage lattice at " + show(b));
            E.F[b] = *f;
        }
    }
    return out;
}

GradedMixedComplex heart_embed(const dieudonne::DieudonneComplex& M, bool with_F)
{
    M.validate_shapes();
    GradedMixedComplex H;
    H.p = M.p;
    H.precision = M.precision;
    H.has_F = with_F;
    for (std::size_t k = 0; k < M.length(); ++k) {
        int n = M.min_degree + static_cast<int>(k);
        if (M.ranks[k] == 0)
            continue;
        Bidegree b{n, -n};
        H.pieces[b] = M.ranks[k];
        if (with_F)
            H.F[b] = M.F[k];
    }
    for (std::size_t k = 0; k + 1 < M.length(); ++k) {
        int n = M.min_degree + static_cast<int>(k);
        if (M.ranks[k] && M.ranks[k + 1])
            H.eps[{n, -n}] = M.d[k];
    }
    return H;
}

// ----------------------------------------------------------- adjunction

namespace {

// Unknown matrices X_b laid out row-major; equations sum_t L_t X_t R_t = 0.
class LinearSystem {
public:
    struct Block {
        std::size_t offset, rows, cols;
    };

    void add_block(int kind, Bidegree b, std::size_t rows, std::size_t cols)
    {
        if (rows == 0 || cols == 0)
            return;
        blocks_[{kind, b}] = {size_, rows, cols};
        size_ += rows * cols;
    }
    const Block* find(int kind, Bidegree b) const
    {
        auto it = blocks_.find({kind, b});
        return it == blocks_.end() ? nullptr : &it->second;
    }
    std::size_t size() const { return size_; }
    const std::map<std::pair<int, Bidegree>, Block>& blocks() const { return blocks_; }

    struct Term {
        int kind;
        Bidegree b;
        IntMatrix L, R;
    };
    // Equation of shape rows x cols; terms whose block is absent contribute nothing.
    void add_equation(std::size_t rows, std::size_t cols, const std::vector<Term>& terms)
    {
        if (rows == 0 || cols == 0)
            return;
        std::size_t first = eqs_.size();
        eqs_.resize(first + rows * cols, std::map<std::size_t, mpz_class>{});
        for (const auto& t : terms) {
            const Block* blk = find(t.kind, t.b);
            if (!blk)
                continue;
            for (std::size_t a = 0; a < rows; ++a)
                for (std::size_t c = 0; c < cols; ++c) {
                    auto& row = eqs_[first + a * cols + c];
                    for (std::size_t k = 0; k < blk->rows; ++k) {
                        if (t.L(a, k) == 0)
                            continue;
                        for (std::size_t l = 0; l < blk->cols; ++l)
                            if (t.R(l, c) != 0)
                                row[blk->offset + k * blk->cols + l] += t.L(a, k) * t.R(l, c);
                    }
                }
        }
    }
    IntMatrix matrix() const
    {
        IntMatrix A(eqs_.size(), size_);
        for (std::size_t i = 0; i < eqs_.size(); ++i)
            for (const auto& [j, v] : eqs_[i]) A(i, j) = v;
        return A;
    }

    IntMatrix get(const std::vector<mpz_class>& x, int kind, Bidegree b, std::size_t rows, std::size_t cols) const
    {
        IntMatrix X(rows, cols);
        if (const Block* blk = find(kind, b))
            for (std::size_t k = 0; k < rows; ++k)
                for (std::size_t l = 0; l < cols; ++l) X(k, l) = x[blk->offset + k * cols + l];
        return X;
    }
    void put(std::vector<mpz_class>& x, int kind, Bidegree b, const IntMatrix& X) const
    {
        if (const Block* blk = find(kind, b))
            for (std::size_t k = 0; k < blk->rows; ++k)
                for (std::size_t l = 0; l < blk->cols; ++l) x[blk->offset + k * blk->cols + l] = X(k, l);
    }

private:
    std::map<std::pair<int, Bidegree>, Block> blocks_;
    std::size_t size_ = 0;
    std::vector<std::map<std::size_t, mpz_class>> eqs_;
};

constexpr int kF = 0, kG = 1;

IntMatrix identity_of(std::size_t n) { return IntMatrix::identity(n); }

// Maps M -> N commuting with d and with eps_N f = f (scale * eps_M).
LinearSystem strict_maps(const GradedMixedComplex& M, const GradedMixedComplex& N, long scale)
{
    LinearSystem S;
    for (const auto& [b, r] : M.pieces) S.add_block(kF, b, N.rank(b), r);
    for (const auto& [b, r] : M.pieces) {
        Bidegree bd = d_target(b), be = eps_target(b);
        S.add_equation(N.rank(bd), r,
                       {{kF, b, N.d_at(b), identity_of(r)},
                        {kF, bd, -1 * identity_of(N.rank(bd)), M.d_at(b)}});
        IntMatrix e = M.eps_at(b);
        e *= mpz_class(scale);
        S.add_equation(N.rank(be), r,
                       {{kF, b, N.eps_at(b), identity_of(r)}, {kF, be, -1 * identity_of(N.rank(be)), e}});
    }
    return S;
}

// Pairs (f, g) describing maps M -> eta_p N.
LinearSystem maps_into_eta(const GradedMixedComplex& M, const GradedMixedComplex& N)
{
    LinearSystem S;
    mpz_class p(N.p);
    for (const auto& [b, r] : M.pieces) {
        S.add_block(kF, b, N.rank(b), r);
        S.add_block(kG, b, N.rank(eps_target(b)), r);
    }
    for (const auto& [b, r] : M.pieces) {
        Bidegree bd = d_target(b), be = eps_target(b), bee = eps_target(be), bed = d_target(be);
        std::size_t nbd = N.rank(bd), nbe = N.rank(be);
        // eps_N f = p g and eps_N g = 0
        S.add_equation(nbe, r, {{kF, b, N.eps_at(b), identity_of(r)}, {kG, b, -p * identity_of(nbe), identity_of(r)}});
        S.add_equation(N.rank(bee), r, {{kG, b, N.eps_at(be), identity_of(r)}});
        // d: (d f, -d g) = (f d, g d)
        S.add_equation(nbd, r, {{kF, b, N.d_at(b), identity_of(r)}, {kF, bd, -1 * identity_of(nbd), M.d_at(b)}});
        S.add_equation(N.rank(bed), r,
                       {{kG, b, -1 * N.d_at(be), identity_of(r)},
                        {kG, bd, -1 * identity_of(N.rank(eps_target(bd))), M.d_at(b)}});
        // eps: (g, 0) = (f eps, g eps)
        S.add_equation(nbe, r, {{kG, b, identity_of(nbe), identity_of(r)},
                                {kF, be, -1 * identity_of(nbe), M.eps_at(b)}});
        S.add_equation(N.rank(bee), r, {{kG, be, identity_of(N.rank(bee)), M.eps_at(b)}});
    }
    return S;
}

// Generators of {x : A x = 0 mod m}, as vectors.
std::vector<std::vector<mpz_class>> solution_generators(const IntMatrix& A, std::size_t unknowns, const mpz_class& m)
{
    std::vector<std::vector<mpz_class>> out;
    IntMatrix K;
    if (A.rows() == 0)
        K = IntMatrix::identity(unknowns);
    else
        K = arith::integer_kernel(arith::hstack(A, IntMatrix::scalar(A.rows(), m))).rows_range(0, unknowns);
    for (std::size_t c = 0; c < K.cols(); ++c) {
        auto v = K.column(c);
        bool nonzero = false;
        for (auto& x : v) {
            x = ((x % m) + m) % m;
            nonzero = nonzero || x != 0;
        }
        if (nonzero)
            out.push_back(v);
    }
    return out;
}

bool satisfies(const IntMatrix& A, const std::vector<mpz_class>& x, const mpz_class& m)
{
    if (A.rows() == 0)
        return true;
    for (auto& v : A.apply(x))
        if (v % m != 0)
            return false;
    return true;
}

using BlockMap = std::map<Bidegree, IntMatrix>;

BlockMap as_blocks(const LinearSystem& S, const std::vector<mpz_class>& x, const GradedMixedComplex& from,
                   const GradedMixedComplex& to)
{
    BlockMap out;
    for (const auto& [b, r] : from.pieces) out[b] = S.get(x, kF, b, to.rank(b), r);
    return out;
}

// (f, f eps_M) in the layout of maps_into_eta.
std::vector<mpz_class> phi_of(const LinearSystem& R, const BlockMap& f, const GradedMixedComplex& M,
                              const GradedMixedComplex& N)
{
    std::vector<mpz_class> x(R.size());
    for (const auto& [b, r] : M.pieces) {
        if (auto own = f.find(b); own != f.end())
            R.put(x, kF, b, own->second);
        Bidegree be = eps_target(b);
        auto it = f.find(be);
        IntMatrix g = it == f.end() ? IntMatrix(N.rank(be), r) : it->second * M.eps_at(b);
        R.put(x, kG, b, g);
    }
    return x;
}

BlockMap compose(const BlockMap& a, const BlockMap& b)
{
    BlockMap out;
    for (const auto& [k, B] : b) {
        auto it = a.find(k);
        if (it != a.end())
            out[k] = it->second * B;
    }
    return out;
}

bool equal_mod(std::vector<mpz_class> a, std::vector<mpz_class> b, const mpz_class& m)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        if ((a[i] - b[i]) % m != 0)
            return false;
    return true;
}

}  // namespace

std::size_t hom_count_exponent(const GradedMixedComplex& M, const GradedMixedComplex& N, unsigned precision)
{
    if (precision == 0)
        fail(ErrorCode::Usage, "Hom counts need a finite precision");
    LinearSystem S = strict_maps(M, N, 1);
    return arith::solution_count_exponent(S.matrix(), arith::ModRing(N.p, precision));
}

nlohmann::json AdjunctionReport::to_json() const
{
    return {{"pass", pass},
            {"log_p_hom_twist", left_exponent},
            {"log_p_hom_eta", right_exponent},
            {"counts_match", counts_match},
            {"bijection", bijection},
            {"natural", natural},
            {"naturality_samples", naturality_samples}};
}

AdjunctionReport adjunction_check(const GradedMixedComplex& M, const GradedMixedComplex& N, unsigned precision,
                                  std::size_t budget)
{
    if (precision == 0)
        fail(ErrorCode::Usage, "the adjunction check needs a finite precision");
    if (M.p != N.p)
        fail(ErrorCode::ArityMismatch, "complexes over different primes");
    if (M.total_rank() + N.total_rank() > budget)
        fail(ErrorCode::BudgetExceeded, "total rank " + std::to_string(M.total_rank() + N.total_rank()) +
                                            " exceeds the budget " + std::to_string(budget));
    M.validate_shapes();
    N.validate_shapes();
    arith::ModRing ring(N.p, precision);
    mpz_class m = ring.modulus();

    AdjunctionReport rep;
    LinearSystem L = strict_maps(M, N, static_cast<long>(N.p));
    LinearSystem R = maps_into_eta(M, N);
    IntMatrix AL = L.matrix(), AR = R.matrix();
    rep.left_exponent = arith::solution_count_exponent(AL, ring);
    rep.right_exponent = arith::solution_count_exponent(AR, ring);
    rep.counts_match = rep.left_exponent == rep.right_exponent;

    auto left_gens = solution_generators(AL, L.size(), m);
    auto right_gens = solution_generators(AR, R.size(), m);
    rep.bijection = rep.counts_match;
    for (const auto& x : left_gens)
        rep.bijection = rep.bijection && satisfies(AR, phi_of(R, as_blocks(L, x, M, N), M, N), m);
    for (const auto& y : right_gens) {
        BlockMap f = as_blocks(R, y, M, N);
        std::vector<mpz_class> x(L.size());
        for (const auto& [b, F] : f) L.put(x, kF, b, F);
        rep.bijection = rep.bijection && satisfies(AL, x, m) && equal_mod(phi_of(R, f, M, N), y, m);
    }

    // Naturality against a few endomorphisms of M and N.
    LinearSystem EM = strict_maps(M, M, 1), EN = strict_maps(N, N, 1);
    auto endM = solution_generators(EM.matrix(), EM.size(), m);
    auto endN = solution_generators(EN.matrix(), EN.size(), m);
    rep.natural = true;
    std::size_t limit = 3;
    for (std::size_t i = 0; i < std::min(limit, left_gens.size()); ++i) {
        BlockMap f = as_blocks(L, left_gens[i], M, N);
        auto phi_f = phi_of(R, f, M, N);
        for (std::size_t j = 0; j < std::min(limit, endM.size()); ++j) {
            BlockMap u = as_blocks(EM, endM[j], M, M);
            // Phi(f u) against Phi(f) u
            auto lhs = phi_of(R, compose(f, u), M, N);
            std::vector<mpz_class> rhs(R.size());
            for (const auto& [b, r] : M.pieces) {
                R.put(rhs, kF, b, R.get(phi_f, kF, b, N.rank(b), r) * u.at(b));
                R.put(rhs, kG, b, R.get(phi_f, kG, b, N.rank(eps_target(b)), r) * u.at(b));
            }
            rep.natural = rep.natural && equal_mod(lhs, rhs, m);
            ++rep.naturality_samples;
        }
        for (std::size_t j = 0; j < std::min(limit, endN.size()); ++j) {
            BlockMap v = as_blocks(EN, endN[j], N, N);
            // Phi(v f) against eta_p(v) Phi(f), where eta_p(v)(x, y) = (v x, v y)
            auto lhs = phi_of(R, compose(v, f), M, N);
            std::vector<mpz_class> rhs(R.size());
            for (const auto& [b, r] : M.pieces) {
                Bidegree be = eps_target(b);
                IntMatrix vb = v.count(b) ? v.at(b) : IntMatrix(N.rank(b), N.rank(b));
                IntMatrix vbe = v.count(be) ? v.at(be) : IntMatrix(N.rank(be), N.rank(be));
                R.put(rhs, kF, b, vb * R.get(phi_f, kF, b, N.rank(b), r));
                R.put(rhs, kG, b, vbe * R.get(phi_f, kG, b, N.rank(be), r));
            }
            rep.natural = rep.natural && equal_mod(lhs, rhs, m);
            ++rep.naturality_samples;
        }
    }
    rep.pass = rep.counts_match && rep.bijection && rep.natural;
    return rep;
}

// ------------------------------------------------------------ Beilinson

nlohmann::json BeilinsonReport::to_json() const
{
    nlohmann::json H = nlohmann::json::array();
    for (const auto& h : cohomology) {
        nlohmann::json t = nlohmann::json::array();
        for (const auto& q : h.torsion) t.push_back(q.get_str());
        H.push_back({{"weight", h.at.first}, {"degree", h.at.second}, {"free_rank", h.free_rank},
                     {"torsion", t}, {"length", h.length}});
    }
    nlohmann::json out{{"t_connective", connective}, {"t_coconnective", coconnective}, {"cohomology", H}};
    if (connective_witness)
        out["connective_witness"] = show(*connective_witness);
    if (coconnective_witness)
        out["coconnective_witness"] = show(*coconnective_witness);
    out["truncation"] = truncation ? truncation->to_json() : nlohmann::json(nullptr);
    return out;
}

namespace {

IntMatrix kernel_basis(const IntMatrix& d)
{
    if (d.rows() == 0 || d.is_zero())
        return IntMatrix::identity(d.cols());
    return arith::lattice_basis(arith::integer_kernel(d));
}

}  // namespace

BeilinsonReport beilinson_truncate(const GradedMixedComplex& C)
{
    C.validate_shapes();
    BeilinsonReport rep;
    std::set<Bidegree> positions;
    for (const auto& [b, r] : C.pieces) {
        positions.insert(b);
        positions.insert(d_target(b));
    }
    for (Bidegree b : positions) {
        CohomologyGroup h;
        h.at = b;
        Bidegree prev{b.first, b.second - 1};
        std::size_t r = C.rank(b);
        if (r == 0)
            continue;
        if (C.precision) {
            arith::ModRing ring(C.p, C.precision);
            long ker = static_cast<long>(arith::solution_count_exponent(C.d_at(b), ring));
            long ker_prev = static_cast<long>(arith::solution_count_exponent(C.d_at(prev), ring));
            long image = static_cast<long>(C.precision * C.rank(prev)) - ker_prev;
            h.length = ker - image;
        } else {
            IntMatrix K = kernel_basis(C.d_at(b));
            IntMatrix coords = coordinates_in(K, C.d_at(prev));
            for (const auto& q : arith::quotient_invariants(coords)) {
                if (q == 0)
                    ++h.free_rank;
                else {
                    h.torsion.push_back(q);
                    h.length += arith::valuation(q, C.p);
                }
            }
        }
        if (h.is_zero())
            continue;
        int n = b.first, i = b.second;
        if (i > -n && rep.connective) {
            rep.connective = false;
            rep.connective_witness = b;
        }
        if (i < -n && rep.coconnective) {
            rep.coconnective = false;
            rep.coconnective_witness = b;
        }
        rep.cohomology.push_back(h);
    }
    if (C.precision)
        return rep;

    GradedMixedComplex T;
    T.p = C.p;
    T.has_F = C.has_F;
    std::map<Bidegree, IntMatrix> basis;
    for (const auto& [b, r] : C.pieces) {
        int n = b.first, i = b.second;
        if (i > -n)
            continue;
        IntMatrix B = i < -n ? IntMatrix::identity(r) : kernel_basis(C.d_at(b));
        if (B.cols() == 0)
            continue;
        basis[b] = B;
        T.pieces[b] = B.cols();
        if (B == IntMatrix::identity(r) && C.labels.count(b))
            T.labels[b] = C.labels.at(b);
    }
    for (const auto& [b, B] : basis) {
        Bidegree bd = d_target(b), be = eps_target(b);
        if (basis.count(bd)) {
            IntMatrix X = coordinates_in(basis.at(bd), C.d_at(b) * B);
            if (!X.is_zero())
                T.d[b] = X;
        }
        if (basis.count(be)) {
            IntMatrix X = coordinates_in(basis.at(be), C.eps_at(b) * B);
            if (!X.is_zero())
                T.eps[b] = X;
        }
        if (C.has_F)
            T.F[b] = coordinates_in(B, C.F_at(b) * B);
    }
    rep.truncation = T;
    return rep;
}

// -------------------------------------------------------------- de Rham

GradedMixedComplex ddr_mixed(const witt::DeltaRing& R, unsigned D)
{
    const auto& vars = R.variables();
    derham::DeRhamComplex C(vars);
    auto DR = derham::frobenius_on_forms(C, R);
    std::size_t n = vars.size();

    using Key = std::pair<derham::Mask, arith::Exponent>;
    std::vector<std::vector<Key>> basis(n + 1);
    std::vector<std::map<Key, std::size_t>> index(n + 1);
    GradedMixedComplex G;
    G.p = R.p();
    G.has_F = true;
    for (std::size_t i = 0; i <= n && i <= D; ++i) {
        for (const auto& f : C.monomial_basis(static_cast<int>(i), D - static_cast<unsigned>(i))) {
            const auto& [mask, poly] = *f.terms().begin();
            Key k{mask, poly.terms().begin()->first};
            index[i][k] = basis[i].size();
            basis[i].push_back(k);
        }
        Bidegree b{static_cast<int>(i), -static_cast<int>(i)};
        G.pieces[b] = basis[i].size();
        std::vector<std::string> lab;
        for (const auto& [mask, e] : basis[i])
            lab.push_back(derham::Form::monomial(MPoly::monomial(1, e, vars), mask, n).to_string(C.generator_names()));
        G.labels[b] = lab;
    }

    auto to_column = [&](const derham::Form& f, std::size_t i, IntMatrix& M, std::size_t col, bool project) {
        for (const auto& [mask, poly] : f.terms())
            for (const auto& [e, c] : poly.terms()) {
                auto it = index[i].find({mask, e});
                if (it == index[i].end()) {
                    if (project)
                        continue;
                    fail(ErrorCode::ShapeMismatch, "form leaves the weight window");
                }
                if (!c.is_integer())
                    fail(ErrorCode::InvalidLift, "the lift has non-integral coefficients; the window needs integral matrices");
                M(it->second, col) = c.numerator();
            }
    };

    for (std::size_t i = 0; i < basis.size(); ++i) {
        Bidegree b{static_cast<int>(i), -static_cast<int>(i)};
        std::size_t r = basis[i].size();
        if (r == 0)
            continue;
        IntMatrix F(r, r);
        IntMatrix E(i + 1 < basis.size() ? basis[i + 1].size() : 0, r);
        for (std::size_t c = 0; c < r; ++c) {
            const auto& [mask, e] = basis[i][c];
            derham::Form w = derham::Form::monomial(MPoly::monomial(1, e, vars), mask, n);
            to_column(DR.frobenius(w), i, F, c, true);
            if (E.rows())
                to_column(C.d(w), i + 1, E, c, false);
        }
        G.F[b] = F;
        if (E.rows() && !E.is_zero())
            G.eps[b] = E;
    }
    return G;
}

}  // namespace dwitt::mixed
