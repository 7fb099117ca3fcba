#include "dwitt/dieudonne.hpp"

#include "dwitt/error.hpp"

namespace dwitt::dieudonne {

using arith::Coefficient;
using arith::MPoly;

namespace {

IntMatrix power(const IntMatrix& A, unsigned e)
{
    IntMatrix R = IntMatrix::identity(A.rows());
    for (unsigned i = 0; i < e; ++i) R = R * A;
    return R;
}

bool is_unimodular(const IntMatrix& A)
{
    if (A.rows() != A.cols())
        return false;
    if (A.rows() == 0)
        return true;
    mpz_class det = A.determinant();
    return det == 1 || det == -1;
}

IntMatrix divide_exact(IntMatrix A, const mpz_class& q)
{
    for (std::size_t r = 0; r < A.rows(); ++r)
        for (std::size_t c = 0; c < A.cols(); ++c) {
            if (A(r, c) % q != 0)
                fail(ErrorCode::NotDivisible, "entry " + A(r, c).get_str() + " is not divisible by " + q.get_str());
            A(r, c) /= q;
        }
    return A;
}

IntMatrix solve_or(const IntMatrix& B, const IntMatrix& Y, ErrorCode code, const std::string& what)
{
    auto X = arith::solve_integral(B, Y);
    if (!X)
        fail(code, what);
    return *X;
}

// First nonzero entry of A (reduced mod m when m > 0), as "(row,col)".
std::optional<std::string> first_nonzero(IntMatrix A, const mpz_class& m)
{
    if (m > 0)
        A = A.reduce_mod(m);
    for (std::size_t r = 0; r < A.rows(); ++r)
        for (std::size_t c = 0; c < A.cols(); ++c)
            if (A(r, c) != 0)
                return "(" + std::to_string(r) + "," + std::to_string(c) + ")";
    return std::nullopt;
}

mpz_class modulus_of(const DieudonneComplex& M)
{
    return M.precision ? arith::ipow(mpz_class(M.p), M.precision) : mpz_class(0);
}

}  // namespace

// ------------------------------------------------------------ complex

std::size_t DieudonneComplex::rank(int n) const
{
    if (n < min_degree || n > max_degree())
        return 0;
    return ranks[static_cast<std::size_t>(n - min_degree)];
}

bool DieudonneComplex::is_zero() const
{
    for (auto r : ranks)
        if (r)
            return false;
    return true;
}

DieudonneComplex DieudonneComplex::zero(unsigned long p)
{
    DieudonneComplex M;
    M.p = p;
    return M;
}

DieudonneComplex DieudonneComplex::make(unsigned long p, int min_degree, std::vector<std::size_t> ranks,
                                        std::vector<IntMatrix> d, std::vector<IntMatrix> F, unsigned precision)
{
    if (!arith::is_prime(p))
        fail(ErrorCode::Usage, "p = " + std::to_string(p) + " is not prime");
    DieudonneComplex M;
    M.p = p;
    M.min_degree = min_degree;
    M.ranks = std::move(ranks);
    M.precision = precision;
    std::size_t n = M.ranks.size();
    if (d.empty() && n > 1)
        for (std::size_t k = 0; k + 1 < n; ++k) d.emplace_back(M.ranks[k + 1], M.ranks[k]);
    if (F.empty())
        for (std::size_t k = 0; k < n; ++k) F.push_back(IntMatrix::identity(M.ranks[k]));
    M.d = std::move(d);
    M.F = std::move(F);
    M.validate_shapes();
    return M;
}

void DieudonneComplex::validate_shapes() const
{
    std::size_t n = ranks.size();
    if (d.size() != (n ? n - 1 : 0))
        fail(ErrorCode::ShapeMismatch, "expected " + std::to_string(n ? n - 1 : 0) + " differentials");
    if (F.size() != n)
        fail(ErrorCode::ShapeMismatch, "expected one Frobenius matrix per degree");
    for (std::size_t k = 0; k < n; ++k) {
        if (F[k].rows() != ranks[k] || F[k].cols() != ranks[k])
            fail(ErrorCode::ShapeMismatch, "F in degree " + std::to_string(min_degree + static_cast<int>(k)) +
                                               " must be " + std::to_string(ranks[k]) + "x" + std::to_string(ranks[k]));
        if (k + 1 < n && (d[k].rows() != ranks[k + 1] || d[k].cols() != ranks[k]))
            fail(ErrorCode::ShapeMismatch, "d from degree " + std::to_string(min_degree + static_cast<int>(k)) +
                                               " must be " + std::to_string(ranks[k + 1]) + "x" +
                                               std::to_string(ranks[k]));
    }
}

nlohmann::json DieudonneComplex::to_json() const
{
    nlohmann::json dj = nlohmann::json::array(), fj = nlohmann::json::array();
    for (const auto& m : d) dj.push_back(m.to_json());
    for (const auto& m : F) fj.push_back(m.to_json());
    return {{"p", p}, {"min_degree", min_degree}, {"ranks", ranks}, {"d", dj}, {"F", fj}, {"precision", precision}};
}

DieudonneComplex DieudonneComplex::from_json(const nlohmann::json& j)
{
    try {
        unsigned long p = j.at("p").get<unsigned long>();
        int lo = j.value("min_degree", 0);
        auto ranks = j.at("ranks").get<std::vector<std::size_t>>();
        std::vector<IntMatrix> d, F;
        if (j.contains("d"))
            for (std::size_t k = 0; k < j["d"].size(); ++k)
                d.push_back(IntMatrix::from_json(j["d"][k], k + 1 < ranks.size() ? ranks[k + 1] : 0,
                                                 k < ranks.size() ? ranks[k] : 0));
        if (j.contains("F"))
            for (std::size_t k = 0; k < j["F"].size(); ++k) {
                std::size_t r = k < ranks.size() ? ranks[k] : 0;
                F.push_back(IntMatrix::from_json(j["F"][k], r, r));
            }
        return make(p, lo, ranks, d, F, j.value("precision", 0u));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("complex JSON: ") + e.what());
    }
}

LawReport check_dieudonne(const DieudonneComplex& M)
{
    M.validate_shapes();
    mpz_class mod = modulus_of(M);
    LawReport out;
    LawResult dd{"d o d = 0", true, ""}, dF{"d F = p F d", true, ""};
    for (std::size_t k = 0; k + 1 < M.length(); ++k) {
        int n = M.min_degree + static_cast<int>(k);
        if (k + 2 < M.length() && dd.pass)
            if (auto w = first_nonzero(M.d[k + 1] * M.d[k], mod)) {
                dd.pass = false;
                dd.witness = "degree " + std::to_string(n) + " entry " + *w;
            }
        if (dF.pass)
            if (auto w = first_nonzero(M.d[k] * M.F[k] - mpz_class(M.p) * (M.F[k + 1] * M.d[k]), mod)) {
                dF.pass = false;
                dF.witness = "degree " + std::to_string(n) + " entry " + *w;
            }
    }
    out.add(dd);
    out.add(dF);
    return out;
}

// ---------------------------------------------------------------- eta_p

std::vector<IntMatrix> eta_p_lattices(const std::vector<std::size_t>& ranks, const std::vector<IntMatrix>& d,
                                      unsigned long p)
{
    std::vector<IntMatrix> out;
    for (std::size_t k = 0; k < ranks.size(); ++k) {
        if (k + 1 == ranks.size() || ranks[k + 1] == 0 || ranks[k] == 0) {
            out.push_back(IntMatrix::identity(ranks[k]));
            continue;
        }
        IntMatrix B = arith::lattice_preimage(d[k], IntMatrix::scalar(ranks[k + 1], p));
        if (B.cols() != ranks[k])
            fail(ErrorCode::ShapeMismatch, "decalage lattice lost rank");
        out.push_back(B);
    }
    return out;
}

EtaResult eta_p(const DieudonneComplex& M)
{
    if (M.precision)
        fail(ErrorCode::Usage, "eta_p needs an exact complex");
    M.validate_shapes();
    EtaResult out;
    out.basis = eta_p_lattices(M.ranks, M.d, M.p);
    std::size_t n = M.length();
    std::vector<IntMatrix> d, F;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        IntMatrix image = divide_exact(M.d[k] * out.basis[k], M.p);
        d.push_back(solve_or(out.basis[k + 1], image, ErrorCode::NotInImage,
                             "d does not preserve the decalage lattices"));
    }
    for (std::size_t k = 0; k < n; ++k) {
        F.push_back(solve_or(out.basis[k], M.F[k] * out.basis[k], ErrorCode::NotInImage,
                             "F does not preserve the decalage lattice"));
        out.alpha.push_back(solve_or(out.basis[k], M.F[k], ErrorCode::NotInImage,
                                     "F does not land in the decalage lattice; the complex is not Dieudonne"));
    }
    out.complex = DieudonneComplex::make(M.p, M.min_degree, M.ranks, d, F);
    return out;
}

bool is_saturated(const DieudonneComplex& M0)
{
    DieudonneComplex M = M0;
    M.precision = 0;
    try {
        EtaResult e = eta_p(M);
        for (const auto& a : e.alpha)
            if (!is_unimodular(a))
                return false;
        return true;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NotInImage)
            return false;
        throw;
    }
}

nlohmann::json SaturationTower::to_json() const
{
    nlohmann::json st = nlohmann::json::array(), mp = nlohmann::json::array();
    for (const auto& s : stages) st.push_back(s.to_json());
    for (const auto& m : maps) {
        nlohmann::json one = nlohmann::json::array();
        for (const auto& a : m) one.push_back(a.to_json());
        mp.push_back(one);
    }
    nlohmann::json out{{"stages", st}, {"maps", mp}};
    out["stabilized_at"] = stabilized_at ? nlohmann::json(*stabilized_at) : nlohmann::json(nullptr);
    return out;
}

SaturationTower saturation_tower(const DieudonneComplex& M, std::size_t max_iter)
{
    SaturationTower T;
    T.stages.push_back(M);
    for (std::size_t k = 0;; ++k) {
        EtaResult e = eta_p(T.stages.back());
        bool iso = true;
        for (const auto& a : e.alpha) iso = iso && is_unimodular(a);
        if (iso) {
            T.stabilized_at = k;
            break;
        }
        if (k == max_iter)
            break;
        T.stages.push_back(e.complex);
        T.maps.push_back(e.alpha);
    }
    return T;
}

SaturationTower saturate(const DieudonneComplex& M, std::size_t max_iter)
{
    SaturationTower T = saturation_tower(M, max_iter);
    if (!T.stabilized_at)
        fail(ErrorCode::IterationLimit,
             "saturation did not stabilize within " + std::to_string(max_iter) + " iterations");
    return T;
}

std::vector<IntMatrix> solve_verschiebung(const DieudonneComplex& M)
{
    if (!is_saturated(M))
        fail(ErrorCode::NotSaturated, "V is only defined on saturated complexes");
    std::vector<IntMatrix> V;
    for (std::size_t k = 0; k < M.length(); ++k)
        V.push_back(solve_or(M.F[k], IntMatrix::scalar(M.ranks[k], M.p), ErrorCode::NotSaturated,
                             "p F^-1 is not integral"));
    return V;
}

// ------------------------------------------------------------- W_r

long PresentedModule::length(unsigned long p) const
{
    long total = 0;
    for (const auto& q : invariants) {
        if (q == 0)
            return -1;
        total += arith::valuation(q, p);
    }
    return total;
}

nlohmann::json PresentedModule::to_json(unsigned long p) const
{
    nlohmann::json inv = nlohmann::json::array();
    for (const auto& q : invariants) inv.push_back(q.get_str());
    long len = length(p);
    return {{"generators", generators}, {"relations", relations.to_json()}, {"invariants", inv},
            {"length", len < 0 ? nlohmann::json(nullptr) : nlohmann::json(len)}};
}

PresentedModule present(const IntMatrix& relations)
{
    PresentedModule m;
    m.generators = relations.rows();
    m.relations = relations;
    m.invariants = arith::quotient_invariants(relations);
    return m;
}

IntMatrix wr_relations(const DieudonneComplex& M, const std::vector<IntMatrix>& V, unsigned r, std::size_t k)
{
    IntMatrix rel = power(V[k], r);
    if (k > 0)
        rel = arith::hstack(rel, M.d[k - 1] * power(V[k - 1], r));
    if (M.precision)
        rel = arith::hstack(rel, IntMatrix::scalar(M.ranks[k], modulus_of(M)));
    return rel;
}

std::vector<long> WrQuotient::lengths(unsigned long p) const
{
    std::vector<long> out;
    for (const auto& m : modules) out.push_back(m.length(p));
    return out;
}

nlohmann::json WrQuotient::to_json(unsigned long p) const
{
    nlohmann::json mods = nlohmann::json::array();
    for (const auto& m : modules) mods.push_back(m.to_json(p));
    auto mats = [](const std::vector<IntMatrix>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& m : v) a.push_back(m.to_json());
        return a;
    };
    return {{"r", r}, {"min_degree", min_degree}, {"modules", mods}, {"lengths", lengths(p)},
            {"d", mats(d)}, {"F", mats(F)}, {"V", mats(V)}};
}

WrQuotient wr_quotient(const DieudonneComplex& M, unsigned r)
{
    if (r == 0)
        fail(ErrorCode::Usage, "W_r needs r >= 1");
    WrQuotient W;
    W.r = r;
    W.min_degree = M.min_degree;
    W.V = solve_verschiebung(M);
    W.d = M.d;
    W.F = M.F;
    for (std::size_t k = 0; k < M.length(); ++k) W.modules.push_back(present(wr_relations(M, W.V, r, k)));
    return W;
}

// ------------------------------------------------------- strictness

nlohmann::json StrictnessReport::to_json() const
{
    nlohmann::json out{{"strict", strict}, {"verdict", verdict}, {"r_max", r_max}, {"lengths", lengths}};
    if (!kernel_lengths.empty())
        out["kernel_lengths"] = kernel_lengths;
    if (witness_degree) {
        nlohmann::json w = nlohmann::json::array();
        for (const auto& v : witness) w.push_back(v.get_str());
        out["witness"] = {{"degree", *witness_degree}, {"element", w}};
    }
    return out;
}

StrictnessReport strictness_probe(const DieudonneComplex& M, unsigned r_max)
{
    if (r_max == 0)
        fail(ErrorCode::Usage, "strictness probe needs r_max >= 1");
    StrictnessReport rep;
    rep.r_max = r_max;
    auto V = solve_verschiebung(M);
    for (unsigned r = 1; r <= r_max; ++r) {
        std::vector<long> len, ker;
        for (std::size_t k = 0; k < M.length(); ++k) {
            long l = present(wr_relations(M, V, r, k)).length(M.p);
            len.push_back(l);
            if (M.precision)
                ker.push_back(static_cast<long>(M.precision * M.ranks[k]) - l);
        }
        rep.lengths.push_back(len);
        if (M.precision)
            rep.kernel_lengths.push_back(ker);
    }
    if (M.is_zero()) {
        rep.strict = true;
        rep.verdict = "strict";
        return rep;
    }

    auto set_witness = [&](std::size_t k, const IntMatrix& rel, const mpz_class& mod) {
        for (std::size_t c = 0; c < rel.cols(); ++c) {
            auto col = rel.column(c);
            bool nonzero = false;
            for (auto& v : col) {
                if (mod > 0)
                    v = ((v % mod) + mod) % mod;
                nonzero = nonzero || v != 0;
            }
            if (nonzero) {
                rep.witness_degree = M.min_degree + static_cast<int>(k);
                rep.witness = col;
                return;
            }
        }
    };

    if (M.precision) {
        for (unsigned r = 1; r <= r_max; ++r) {
            bool injective = true;
            for (long k : rep.kernel_lengths[r - 1]) injective = injective && k == 0;
            if (injective) {
                rep.strict = true;
                rep.verdict = "strict up to precision " + std::to_string(r_max);
                return rep;
            }
        }
        rep.verdict = "not strict up to r = " + std::to_string(r_max) + ": M -> W_r M is not injective";
        for (std::size_t k = 0; k < M.length() && !rep.witness_degree; ++k)
            if (rep.kernel_lengths[r_max - 1][k] > 0)
                set_witness(k, wr_relations(M, V, r_max, k), modulus_of(M));
        return rep;
    }

    bool grows = false;
    for (std::size_t k = 0; k < M.length(); ++k)
        if (r_max > 1 && rep.lengths[r_max - 1][k] > rep.lengths[r_max - 2][k])
            grows = true;
    rep.verdict = grows ? "not strict: W_r M keeps growing through r = " + std::to_string(r_max) +
                              ", so the limit is a p-completion and M -> W_r M never becomes injective"
                        : "not strict: M is nonzero and free but every W_r M is finite and stable";
    for (std::size_t k = 0; k < M.length() && !rep.witness_degree; ++k)
        if (M.ranks[k])
            set_witness(k, wr_relations(M, V, r_max, k), 0);
    return rep;
}

// ---------------------------------------------------------- algebras

namespace {

std::string show(const DieudonneAlgebraView& A, const Form& f) { return f.to_string(A.generator_names); }

Form power_of(const DieudonneAlgebraView& A, const Form& a, unsigned long e)
{
    Form r = Form::scalar(MPoly::constant(1, a.variables()), a.generators());
    for (unsigned long i = 0; i < e; ++i) r = A.wedge(r, a);
    return r;
}

}  // namespace

DieudonneAlgebraView algebra_view(const derham::DieudonneDeRham& A)
{
    DieudonneAlgebraView v;
    v.p = A.p();
    v.min_degree = 0;
    const auto& C = A.complex;
    v.d = [C](const Form& f) { return C.d(f); };
    v.F = [A](const Form& f) { return A.frobenius(f); };
    v.wedge = [](const Form& a, const Form& b) { return a.wedge(b); };
    v.generator_names = C.generator_names();
    const auto& vars = C.variables();
    for (std::size_t i = 0; i < vars.size(); ++i) {
        MPoly x = MPoly::variable(i, vars);
        v.samples.push_back(C.scalar(x));
        v.samples.push_back(C.dx(i));
        for (std::size_t j = 0; j < vars.size(); ++j) {
            MPoly y = MPoly::variable(j, vars);
            v.samples.push_back(C.scalar(x * y + MPoly::constant(1, vars)));
            v.samples.push_back(y * C.dx(i));
            if (i < j)
                v.samples.push_back(C.dx(i).wedge(C.dx(j)));
        }
    }
    return v;
}

LawReport check_dieudonne_algebra(const DieudonneAlgebraView& A)
{
    LawReport out;
    LawResult cocon{"coconnective", A.min_degree >= 0, ""};
    if (!cocon.pass)
        cocon.witness = "nonzero term in degree " + std::to_string(A.min_degree);
    LawResult dd{"d o d = 0", true, ""}, dF{"d F = p F d", true, ""}, mult{"F multiplicative", true, ""},
        modp{"F(a) = a^p mod p in degree 0", true, ""};
    Coefficient p(mpz_class(A.p));
    for (const auto& a : A.samples) {
        if (dd.pass && !A.d(A.d(a)).is_zero()) {
            dd.pass = false;
            dd.witness = show(A, a);
        }
        if (dF.pass && A.d(A.F(a)) != p * A.F(A.d(a))) {
            dF.pass = false;
            dF.witness = show(A, a);
        }
        Form a0 = a.component(0);
        if (modp.pass && !a0.is_zero() && (A.F(a0) - power_of(A, a0, A.p)).valuation(A.p) < 1) {
            modp.pass = false;
            modp.witness = show(A, a0);
        }
        for (const auto& b : A.samples) {
            if (!mult.pass)
                break;
            if (A.F(A.wedge(a, b)) != A.wedge(A.F(a), A.F(b))) {
                mult.pass = false;
                mult.witness = show(A, a) + " , " + show(A, b);
            }
        }
    }
    for (auto r : {cocon, dd, dF, mult, modp}) out.add(r);
    return out;
}

// ------------------------------------------------------ classification

std::vector<std::string> ClassificationDatum::generator_names() const
{
    std::vector<std::string> out;
    for (std::size_t j = 0; j < rank; ++j) out.push_back("e" + std::to_string(j));
    return out;
}

derham::ExteriorDerivation ClassificationDatum::derivation() const
{
    return derham::ExteriorDerivation(base.variables(), rank, delta, d);
}

derham::FormFrobenius ClassificationDatum::frobenius() const
{
    const auto& vars = base.variables();
    if (phi_M.size() != rank)
        fail(ErrorCode::ShapeMismatch, "phi_M must be " + std::to_string(rank) + "x" + std::to_string(rank));
    std::vector<Form> images;
    for (std::size_t j = 0; j < rank; ++j) {
        Form img(vars, rank);
        for (std::size_t k = 0; k < rank; ++k) {
            if (phi_M[k].size() != rank)
                fail(ErrorCode::ShapeMismatch, "phi_M must be square");
            img.add(derham::Mask(1) << k, phi_M[k][j]);
        }
        images.push_back(img);
    }
    return derham::FormFrobenius(base.lift(), images);
}

ClassificationDatum ClassificationDatum::de_rham(const witt::DeltaRing& R)
{
    derham::DeRhamComplex C(R.variables());
    auto DR = derham::frobenius_on_forms(C, R);
    std::size_t n = C.arity();
    ClassificationDatum D{R, n, {}, {}, {}};
    D.phi_M.assign(n, std::vector<MPoly>(n, MPoly(R.variables())));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
            D.phi_M[k][j] = DR.F.on_generators()[j].coefficient(derham::Mask(1) << k);
    for (std::size_t i = 0; i < n; ++i) {
        D.delta.push_back(C.dx(i));
        D.d.push_back(Form(R.variables(), n));
    }
    return D;
}

ClassificationDatum ClassificationDatum::from_json(const nlohmann::json& j)
{
    try {
        witt::DeltaRing base = witt::DeltaRing::from_json(j);
        const auto& vars = base.variables();
        std::size_t m = j.at("rank").get<std::size_t>();
        ClassificationDatum D{base, m, {}, {}, {}};
        for (const auto& row : j.at("phi_M")) {
            std::vector<MPoly> r;
            for (const auto& s : row) r.push_back(MPoly::parse(s.get<std::string>(), vars));
            D.phi_M.push_back(r);
        }
        for (const auto& f : j.at("delta")) D.delta.push_back(Form::from_json(f, vars, m));
        for (const auto& f : j.at("d")) D.d.push_back(Form::from_json(f, vars, m));
        D.derivation();
        D.frobenius();
        return D;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("classification datum JSON: ") + e.what());
    }
}

nlohmann::json ClassificationDatum::to_json() const
{
    nlohmann::json j = base.to_json();
    j["rank"] = rank;
    nlohmann::json pm = nlohmann::json::array(), dl = nlohmann::json::array(), dd = nlohmann::json::array();
    for (const auto& row : phi_M) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& q : row) r.push_back(q.to_string());
        pm.push_back(r);
    }
    for (const auto& f : delta) dl.push_back(f.to_json());
    for (const auto& f : d) dd.push_back(f.to_json());
    j["phi_M"] = pm;
    j["delta"] = dl;
    j["d"] = dd;
    return j;
}

DieudonneAlgebraView assemble_classification(const ClassificationDatum& D)
{
    auto der = D.derivation();
    auto fr = D.frobenius();
    DieudonneAlgebraView v;
    v.p = D.p();
    v.min_degree = 0;
    v.d = [der](const Form& f) { return der.apply(f); };
    v.F = [fr](const Form& f) { return fr.apply(f); };
    v.wedge = [](const Form& a, const Form& b) { return a.wedge(b); };
    v.generator_names = D.generator_names();
    const auto& vars = D.base.variables();
    std::size_t m = D.rank;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        MPoly x = MPoly::variable(i, vars);
        v.samples.push_back(Form::scalar(x, m));
        for (std::size_t k = 0; k < vars.size(); ++k)
            v.samples.push_back(Form::scalar(x * MPoly::variable(k, vars) + MPoly::constant(1, vars), m));
        for (std::size_t j = 0; j < m; ++j) v.samples.push_back(x * Form::generator(j, vars, m));
    }
    for (std::size_t j = 0; j < m; ++j) {
        v.samples.push_back(Form::generator(j, vars, m));
        for (std::size_t k = j + 1; k < m; ++k)
            v.samples.push_back(Form::generator(j, vars, m).wedge(Form::generator(k, vars, m)));
    }
    return v;
}

nlohmann::json ClassificationReport::to_json() const
{
    nlohmann::json out{{"pass", pass}, {"relations", relations.to_json()}};
    if (algebra)
        out["algebra"] = algebra->to_json();
    return out;
}

ClassificationReport classify_relations_check(const ClassificationDatum& D, RelationOrientation orientation)
{
    auto der = D.derivation();
    auto fr = D.frobenius();
    const auto& vars = D.base.variables();
    auto names = D.generator_names();
    Coefficient p(mpz_class(D.p()));
    bool literal = orientation == RelationOrientation::Literal;

    ClassificationReport rep;
    LawResult on_vars{literal ? "phi_M(delta x) = p delta(phi_A x)" : "delta(phi_A x) = p phi_M(delta x)", true, ""};
    LawResult on_gens{literal ? "(phi_M ^ phi_M)(d e) = p d(phi_M e)" : "d(phi_M e) = p (phi_M ^ phi_M)(d e)", true,
                      ""};
    LawResult square{"d o delta = 0 and d o d = 0", true, ""};

    auto relation = [&](const Form& g, LawResult& law, const std::string& name) {
        Form DF = der.apply(fr.apply(g)), FD = fr.apply(der.apply(g));
        bool ok = literal ? FD == p * DF : DF == p * FD;
        if (!ok && law.pass) {
            law.pass = false;
            law.witness = name;
        }
        if (square.pass && !der.apply(der.apply(g)).is_zero()) {
            square.pass = false;
            square.witness = name;
        }
    };
    for (std::size_t i = 0; i < vars.size(); ++i)
        relation(Form::scalar(MPoly::variable(i, vars), D.rank), on_vars, vars[i]);
    for (std::size_t j = 0; j < D.rank; ++j) relation(Form::generator(j, vars, D.rank), on_gens, names[j]);
    rep.relations.add(on_vars);
    rep.relations.add(on_gens);
    rep.relations.add(square);
    rep.pass = rep.relations.pass;
    if (rep.pass) {
        rep.algebra = check_dieudonne_algebra(assemble_classification(D));
        rep.pass = rep.algebra->pass;
    }
    return rep;
}

}  // namespace dwitt::dieudonne
