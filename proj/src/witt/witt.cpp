#include "dwitt/witt.hpp"

#include "dwitt/error.hpp"

#include <map>
#include <mutex>
#include <sstream>

namespace dwitt::witt {

using arith::binomial;
using arith::ipow;

namespace {

const std::vector<std::string> kNoVars;

MPoly scaled(const MPoly& q, const mpz_class& k) { return q * Coefficient(k); }

MPoly divide_checked(const MPoly& q, const mpz_class& d, unsigned long p)
{
    MPoly r = q * Coefficient(mpz_class(1), d);
    if (!r.is_p_integral(p))
        fail(ErrorCode::NotInImage, "ghost vector is not in the image: remainder " + q.to_string() +
                                        " is not divisible by " + d.get_str());
    return r;
}

void require_compatible(const WittVector& x, const WittVector& y)
{
    if (x.p != y.p)
        fail(ErrorCode::ShapeMismatch, "Witt vectors for different primes");
    if (x.length() != y.length())
        fail(ErrorCode::ShapeMismatch, "Witt vectors of different lengths " +
                                           std::to_string(x.length()) + " and " + std::to_string(y.length()));
    if (x.modulus != y.modulus)
        fail(ErrorCode::ShapeMismatch, "Witt vectors over different coefficient rings");
}

// Bring both vectors onto one variable list (constants promote).
void unify(WittVector& x, WittVector& y)
{
    const auto& vx = x.variables();
    const auto& vy = y.variables();
    if (vx == vy)
        return;
    if (vx.empty()) {
        for (auto& c : x.coords) c = c.with_variables(vy);
    } else if (vy.empty()) {
        for (auto& c : y.coords) c = c.with_variables(vx);
    } else {
        fail(ErrorCode::ArityMismatch, "Witt vectors over different polynomial rings");
    }
}

WittVector lifted(const WittVector& x)
{
    WittVector l = x;
    l.modulus = 0;
    for (auto& c : l.coords) c = c.reduce_mod(x.modulus);
    return l;
}

WittVector reduced(WittVector x, const mpz_class& modulus)
{
    x.modulus = modulus;
    if (modulus != 0)
        for (auto& c : x.coords) c = c.reduce_mod(modulus);
    return x;
}

// Ghost polynomial w_k in the given coordinates.
MPoly ghost_component(const std::vector<MPoly>& a, unsigned long p, std::size_t k,
                      const std::vector<std::string>& vars)
{
    MPoly w(vars);
    mpz_class pi = 1;
    for (std::size_t i = 0; i <= k; ++i) {
        w += scaled(a[i].pow(ipow(p, k - i).get_ui()), pi);
        pi *= p;
    }
    return w;
}

std::vector<MPoly> invert_ghost(const std::vector<MPoly>& g, unsigned long p,
                                const std::vector<std::string>& vars)
{
    std::vector<MPoly> a;
    mpz_class pk = 1;
    for (std::size_t k = 0; k < g.size(); ++k) {
        MPoly r = g[k];
        mpz_class pi = 1;
        for (std::size_t i = 0; i < k; ++i) {
            r -= scaled(a[i].pow(ipow(p, k - i).get_ui()), pi);
            pi *= p;
        }
        a.push_back(k == 0 ? r : divide_checked(r, pk, p));
        if (a.back().variables() != vars && a.back().is_constant())
            a.back() = MPoly::constant(a.back().constant_term(), vars);
        pk *= p;
    }
    return a;
}

std::mutex universal_mutex;
std::map<std::pair<unsigned long, std::size_t>, UniversalPolynomials> universal_cache;

UniversalPolynomials generate_universal(unsigned long p, std::size_t n)
{
    std::vector<std::string> vars;
    for (std::size_t i = 0; i < n; ++i) vars.push_back("a" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i) vars.push_back("b" + std::to_string(i));
    std::vector<MPoly> a, b;
    for (std::size_t i = 0; i < n; ++i) {
        a.push_back(MPoly::variable(i, vars));
        b.push_back(MPoly::variable(n + i, vars));
    }
    std::vector<MPoly> gs, gp;
    for (std::size_t k = 0; k < n; ++k) {
        MPoly wa = ghost_component(a, p, k, vars), wb = ghost_component(b, p, k, vars);
        gs.push_back(wa + wb);
        gp.push_back(wa * wb);
    }
    UniversalPolynomials u{p, n, invert_ghost(gs, p, vars), invert_ghost(gp, p, vars)};
    for (const auto* family : {&u.sum, &u.product})
        for (const auto& q : *family)
            for (const auto& [e, c] : q.terms())
                if (!c.is_integer())
                    fail(ErrorCode::NotInImage, "universal Witt polynomial with non-integral coefficient");
    return u;
}

WittVector apply_universal(const std::vector<MPoly>& family, const WittVector& x, const WittVector& y)
{
    std::vector<MPoly> images = x.coords;
    images.insert(images.end(), y.coords.begin(), y.coords.end());
    WittVector r{x.p, {}, 0};
    for (const auto& q : family) r.coords.push_back(q.substitute(images));
    for (auto& c : r.coords)
        if (c.variables() != x.variables())
            c = c.with_variables(x.variables());
    return r;
}

template <typename Op>
WittVector via_ghost(const WittVector& x, const WittVector& y, Op op)
{
    auto gx = ghost(x), gy = ghost(y);
    std::vector<MPoly> g;
    for (std::size_t k = 0; k < gx.size(); ++k) g.push_back(op(gx[k], gy[k]));
    WittVector r = from_ghost(g, x.p);
    for (auto& c : r.coords)
        if (c.variables() != x.variables())
            c = c.with_variables(x.variables());
    return r;
}

}  // namespace

// ------------------------------------------------------------------ vectors

const std::vector<std::string>& WittVector::variables() const
{
    return coords.empty() ? kNoVars : coords.front().variables();
}

WittVector WittVector::zero(unsigned long p, std::size_t n, std::vector<std::string> vars,
                            const mpz_class& modulus)
{
    return WittVector{p, std::vector<MPoly>(n, MPoly(vars)), modulus};
}

WittVector WittVector::from_integers(unsigned long p, const std::vector<long>& coords,
                                     const mpz_class& modulus)
{
    WittVector w{p, {}, modulus};
    for (long c : coords) w.coords.push_back(MPoly::constant(c));
    return modulus != 0 ? reduced(w, modulus) : w;
}

nlohmann::json WittVector::to_json() const
{
    nlohmann::json coords_j = nlohmann::json::array();
    for (const auto& c : coords) coords_j.push_back(c.to_string());
    nlohmann::json j{{"p", p}, {"n", length()}, {"coords", coords_j}, {"variables", variables()}};
    if (modulus != 0)
        j["modulus"] = modulus.get_str();
    return j;
}

WittVector WittVector::from_json(const nlohmann::json& j)
{
    WittVector w;
    w.p = j.at("p").get<unsigned long>();
    if (!arith::is_prime(w.p))
        fail(ErrorCode::Usage, "p must be prime");
    std::vector<std::string> vars = j.value("variables", std::vector<std::string>{});
    if (j.contains("modulus")) {
        const auto& m = j["modulus"];
        w.modulus = m.is_string() ? mpz_class(m.get<std::string>()) : mpz_class(m.get<long>());
    }
    for (const auto& c : j.at("coords")) {
        std::string text = c.is_string() ? c.get<std::string>() : c.dump();
        w.coords.push_back(MPoly::parse(text, vars));
    }
    return w.modulus != 0 ? reduced(w, w.modulus) : w;
}

std::string WittVector::to_string() const
{
    std::string s = "(";
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (i)
            s += ", ";
        s += coords[i].to_string();
    }
    return s + ")";
}

bool operator==(const WittVector& a, const WittVector& b)
{
    return a.p == b.p && a.modulus == b.modulus && a.coords == b.coords;
}

std::vector<MPoly> ghost(const WittVector& x)
{
    std::vector<MPoly> g;
    for (std::size_t k = 0; k < x.length(); ++k) {
        MPoly w = ghost_component(x.coords, x.p, k, x.variables());
        g.push_back(x.modulus != 0 ? w.reduce_mod(x.modulus) : w);
    }
    return g;
}

WittVector from_ghost(const std::vector<MPoly>& g, unsigned long p)
{
    const auto& vars = g.empty() ? kNoVars : g.front().variables();
    for (const auto& q : g)
        if (!q.is_p_integral(p))
            fail(ErrorCode::NotInImage, "ghost component " + q.to_string() + " is not p-integral");
    return WittVector{p, invert_ghost(g, p, vars), 0};
}

unsigned long universal_threshold() { return 9; }

std::optional<UniversalPolynomials> universal_polynomials(unsigned long p, std::size_t n)
{
    if (n == 0 || ipow(p, n - 1) > universal_threshold())
        return std::nullopt;
    std::lock_guard<std::mutex> lock(universal_mutex);
    auto key = std::make_pair(p, n);
    auto it = universal_cache.find(key);
    if (it == universal_cache.end())
        it = universal_cache.emplace(key, generate_universal(p, n)).first;
    return it->second;
}

WittVector witt_add(const WittVector& x0, const WittVector& y0)
{
    require_compatible(x0, y0);
    WittVector x = x0, y = y0;
    unify(x, y);
    if (x.modulus != 0)
        return reduced(witt_add(lifted(x), lifted(y)), x.modulus);
    if (auto u = universal_polynomials(x.p, x.length()))
        return apply_universal(u->sum, x, y);
    return via_ghost(x, y, [](const MPoly& a, const MPoly& b) { return a + b; });
}

WittVector witt_mul(const WittVector& x0, const WittVector& y0)
{
    require_compatible(x0, y0);
    WittVector x = x0, y = y0;
    unify(x, y);
    if (x.modulus != 0)
        return reduced(witt_mul(lifted(x), lifted(y)), x.modulus);
    if (auto u = universal_polynomials(x.p, x.length()))
        return apply_universal(u->product, x, y);
    return via_ghost(x, y, [](const MPoly& a, const MPoly& b) { return a * b; });
}

WittVector witt_scale(const WittVector& x, long k)
{
    if (x.modulus != 0)
        return reduced(witt_scale(lifted(x), k), x.modulus);
    return via_ghost(x, x, [k](const MPoly& a, const MPoly&) { return a * Coefficient(k); });
}

WittVector witt_neg(const WittVector& x) { return witt_scale(x, -1); }

WittVector frobenius(const WittVector& x)
{
    if (x.length() < 2)
        fail(ErrorCode::ShapeMismatch, "Frobenius needs a Witt vector of length at least 2");
    if (x.modulus != 0)
        return reduced(frobenius(lifted(x)), x.modulus);
    auto g = ghost(x);
    g.erase(g.begin());
    WittVector r = from_ghost(g, x.p);
    for (auto& c : r.coords)
        if (c.variables() != x.variables())
            c = c.with_variables(x.variables());
    return r;
}

WittVector verschiebung(const WittVector& x)
{
    WittVector r = x;
    r.coords.insert(r.coords.begin(), MPoly(x.variables()));
    return r;
}

WittVector teichmuller(const MPoly& a, unsigned long p, std::size_t n, const mpz_class& modulus)
{
    WittVector w = WittVector::zero(p, n, a.variables(), modulus);
    if (n > 0)
        w.coords[0] = a;
    return modulus != 0 ? reduced(w, modulus) : w;
}

WittVector restrict_length(const WittVector& x, std::size_t n)
{
    if (n > x.length())
        fail(ErrorCode::ShapeMismatch, "cannot restrict to a longer length");
    WittVector r = x;
    r.coords.resize(n);
    return r;
}

// --------------------------------------------------------------- delta rings

DeltaRing::DeltaRing(unsigned long p, arith::RingMap lift) : p_(p), lift_(std::move(lift))
{
    if (!arith::is_prime(p))
        fail(ErrorCode::Usage, "p must be prime, got " + std::to_string(p));
    if (lift_.source() != lift_.target())
        fail(ErrorCode::InvalidLift, "a Frobenius lift must be an endomorphism");
    const auto& vars = lift_.source();
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const MPoly& img = lift_.images()[i];
        if (!img.is_p_integral(p))
            fail(ErrorCode::InvalidLift, "lift image of " + vars[i] + " has a denominator divisible by p");
        MPoly diff = img - MPoly::variable(i, vars).pow(p);
        if (diff.valuation(p) < 1)
            fail(ErrorCode::InvalidLift, "phi(" + vars[i] + ") - " + vars[i] + "^" + std::to_string(p) +
                                             " = " + diff.to_string() + " is not divisible by p");
    }
}

DeltaRing DeltaRing::standard(unsigned long p, const std::vector<std::string>& vars)
{
    std::vector<MPoly> images;
    for (std::size_t i = 0; i < vars.size(); ++i) images.push_back(MPoly::variable(i, vars).pow(p));
    return DeltaRing(p, arith::RingMap(vars, vars, images));
}

DeltaRing DeltaRing::from_json(const nlohmann::json& j)
{
    unsigned long p = j.at("p").get<unsigned long>();
    auto vars = j.value("variables", std::vector<std::string>{});
    if (!j.contains("lift"))
        return standard(p, vars);
    std::vector<MPoly> images;
    for (const auto& s : j["lift"]) images.push_back(MPoly::parse(s.get<std::string>(), vars));
    if (images.size() != vars.size())
        fail(ErrorCode::ArityMismatch, "lift needs one image per variable");
    return DeltaRing(p, arith::RingMap(vars, vars, images));
}

MPoly DeltaRing::delta(const MPoly& a) const
{
    if (!a.is_p_integral(p_))
        fail(ErrorCode::InvalidLift, "element " + a.to_string() + " is not p-integral");
    MPoly x = a.variables() == variables() ? a : a.with_variables(variables());
    return arith::exact_div_p(phi(x) - x.pow(p_), p_);
}

nlohmann::json DeltaRing::to_json() const
{
    nlohmann::json lift = nlohmann::json::array();
    for (const auto& q : lift_.images()) lift.push_back(q.to_string());
    return {{"p", p_}, {"variables", variables()}, {"lift", lift}};
}

MPoly delta_of(const DeltaRing& R, const MPoly& a) { return R.delta(a); }

void LawReport::add(LawResult r)
{
    pass = pass && r.pass;
    results.push_back(std::move(r));
}

nlohmann::json LawReport::to_json() const
{
    nlohmann::json laws = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json j{{"law", r.law}, {"pass", r.pass}};
        if (!r.pass)
            j["witness"] = r.witness;
        laws.push_back(j);
    }
    return {{"pass", pass}, {"laws", laws}};
}

std::vector<MPoly> default_delta_samples(const DeltaRing& R)
{
    const auto& v = R.variables();
    std::vector<MPoly> s{MPoly(v), MPoly::constant(1, v), MPoly::constant(2, v),
                         MPoly::constant(static_cast<long>(R.p()) + 1, v)};
    for (std::size_t i = 0; i < v.size(); ++i) {
        MPoly x = MPoly::variable(i, v);
        s.push_back(x);
        s.push_back(x + MPoly::constant(1, v));
        s.push_back(x.pow(2) * Coefficient(3) - MPoly::constant(1, v));
    }
    if (v.size() >= 2)
        s.push_back(MPoly::variable(0, v) * MPoly::variable(1, v));
    return s;
}

namespace {

MPoly binomial_correction(const MPoly& a, const MPoly& b, unsigned long p)
{
    MPoly r(a.variables());
    for (unsigned long i = 1; i < p; ++i)
        r += a.pow(i) * b.pow(p - i) * Coefficient(mpz_class(binomial(p, i) / p));
    return r;
}

std::string pair_witness(const MPoly& a, const MPoly& b)
{
    return "a = " + a.to_string() + ", b = " + b.to_string();
}

}  // namespace

LawReport delta_laws_check(const DeltaRing& R, const std::vector<MPoly>& samples0,
                           const DeltaOperator& delta_op)
{
    DeltaOperator delta = delta_op ? delta_op : [&R](const MPoly& a) { return R.delta(a); };
    const auto& v = R.variables();
    const unsigned long p = R.p();
    std::vector<MPoly> samples;
    for (const auto& s : samples0) samples.push_back(s.variables() == v ? s : s.with_variables(v));

    LawReport report;
    MPoly d0 = delta(MPoly(v)), d1 = delta(MPoly::constant(1, v));
    report.add({"delta(0) = 0", d0.is_zero(), "delta(0) = " + d0.to_string()});
    report.add({"delta(1) = 0", d1.is_zero(), "delta(1) = " + d1.to_string()});

    LawResult sum{"delta(a+b) = delta(a) + delta(b) - sum_i C(p,i)/p a^i b^(p-i)", true, {}};
    LawResult prod{"delta(ab) = a^p delta(b) + b^p delta(a) + p delta(a) delta(b)", true, {}};
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = i; j < samples.size(); ++j) {
            const MPoly &a = samples[i], &b = samples[j];
            MPoly da = delta(a), db = delta(b);
            if (sum.pass && delta(a + b) != da + db - binomial_correction(a, b, p)) {
                sum.pass = false;
                sum.witness = pair_witness(a, b);
            }
            MPoly rhs = a.pow(p) * db + b.pow(p) * da + da * db * Coefficient(static_cast<long>(p));
            if (prod.pass && delta(a * b) != rhs) {
                prod.pass = false;
                prod.witness = pair_witness(a, b);
            }
        }
    report.add(sum);
    report.add(prod);
    return report;
}

LawReport w2_section_check(const DeltaRing& R, const std::vector<MPoly>& samples0,
                           const DeltaOperator& delta_op)
{
    DeltaOperator delta = delta_op ? delta_op : [&R](const MPoly& a) { return R.delta(a); };
    const auto& v = R.variables();
    std::vector<MPoly> samples;
    for (const auto& s : samples0) samples.push_back(s.variables() == v ? s : s.with_variables(v));
    auto section = [&](const MPoly& a) { return WittVector{R.p(), {a, delta(a)}, 0}; };

    LawReport report;
    WittVector one = teichmuller(MPoly::constant(1, v), R.p(), 2);
    report.add({"s(1) = 1", section(MPoly::constant(1, v)) == one,
                "s(1) = " + section(MPoly::constant(1, v)).to_string()});
    LawResult add{"s(a+b) = s(a) + s(b) in W_2", true, {}};
    LawResult mul{"s(ab) = s(a) s(b) in W_2", true, {}};
    LawResult split{"w_0(s(a)) = a", true, {}};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const MPoly& a = samples[i];
        if (split.pass && ghost(section(a))[0] != a) {
            split.pass = false;
            split.witness = "a = " + a.to_string();
        }
        for (std::size_t j = i; j < samples.size(); ++j) {
            const MPoly& b = samples[j];
            if (add.pass && section(a + b) != witt_add(section(a), section(b))) {
                add.pass = false;
                add.witness = pair_witness(a, b);
            }
            if (mul.pass && section(a * b) != witt_mul(section(a), section(b))) {
                mul.pass = false;
                mul.witness = pair_witness(a, b);
            }
        }
    }
    report.add(split);
    report.add(add);
    report.add(mul);
    return report;
}

// ------------------------------------------------------------ big Witt

BigWittVector BigWittVector::one(std::size_t K, std::vector<std::string> vars)
{
    BigWittVector w{K, std::vector<MPoly>(K + 1, MPoly(vars)), true};
    w.c[0] = MPoly::constant(1, vars);
    return w;
}

bool BigWittVector::is_one() const
{
    for (std::size_t k = 1; k < c.size(); ++k)
        if (!c[k].is_zero())
            return false;
    return true;
}

bool operator==(const BigWittVector& a, const BigWittVector& b)
{
    return a.K == b.K && a.c == b.c;
}

std::string BigWittVector::to_string() const
{
    std::ostringstream out;
    out << "1";
    for (std::size_t k = 1; k < c.size(); ++k) {
        if (c[k].is_zero())
            continue;
        std::string s = c[k].to_string();
        bool simple = c[k].size() == 1;
        if (simple && s[0] == '-')
            out << " - " << (s == "-1" ? "" : s.substr(1) + "*");
        else
            out << " + " << (s == "1" ? "" : (simple ? s : "(" + s + ")") + "*");
        out << "t";
        if (k > 1)
            out << "^" << k;
    }
    if (!exact)
        out << " + O(t^" << K + 1 << ")";
    return out.str();
}

nlohmann::json BigWittVector::to_json() const
{
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& q : c) cs.push_back(q.to_string());
    return {{"truncation", K}, {"coefficients", cs}, {"exact", exact}, {"series", to_string()}};
}

EndoClass EndoClass::from_int(const arith::IntMatrix& a)
{
    if (a.rows() != a.cols())
        fail(ErrorCode::ShapeMismatch, "endomorphism matrix must be square");
    EndoClass e;
    e.m.assign(a.rows(), std::vector<MPoly>(a.cols()));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) e.m[i][j] = MPoly::constant(Coefficient(a(i, j)));
    return e;
}

EndoClass EndoClass::from_json(const nlohmann::json& j)
{
    EndoClass e;
    const nlohmann::json& rows = j.is_object() ? j.at("matrix") : j;
    if (j.is_object())
        e.vars = j.value("variables", std::vector<std::string>{});
    for (const auto& r : rows) {
        if (r.size() != rows.size())
            fail(ErrorCode::ShapeMismatch, "endomorphism matrix must be square");
        std::vector<MPoly> row;
        for (const auto& x : r)
            row.push_back(MPoly::parse(x.is_string() ? x.get<std::string>() : x.dump(), e.vars));
        e.m.push_back(row);
    }
    return e;
}

EndoClass EndoClass::direct_sum(const EndoClass& o) const
{
    std::vector<std::string> v = vars.empty() ? o.vars : vars;
    std::size_t r = rank(), s = o.rank();
    EndoClass e{PolyMatrix(r + s, std::vector<MPoly>(r + s, MPoly(v))), v};
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) e.m[i][j] = m[i][j].with_variables(v);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j) e.m[r + i][r + j] = o.m[i][j].with_variables(v);
    return e;
}

namespace {

PolyMatrix matmul(const PolyMatrix& a, const PolyMatrix& b, const std::vector<std::string>& v)
{
    std::size_t n = a.size();
    PolyMatrix c(n, std::vector<MPoly>(n, MPoly(v)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            if (a[i][k].is_zero())
                continue;
            for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
        }
    return c;
}

}  // namespace

EndoClass EndoClass::power(unsigned e) const
{
    std::size_t n = rank();
    EndoClass r{PolyMatrix(n, std::vector<MPoly>(n, MPoly(vars))), vars};
    for (std::size_t i = 0; i < n; ++i) r.m[i][i] = MPoly::constant(1, vars);
    for (unsigned k = 0; k < e; ++k) r.m = matmul(r.m, m, vars);
    return r;
}

BigWittVector char_poly_witt(const EndoClass& e, std::size_t K)
{
    if (K == 0)
        fail(ErrorCode::Usage, "truncation must be at least 1");
    const std::size_t n = e.rank();
    const auto& v = e.vars;
    BigWittVector w = BigWittVector::one(K, v);
    w.exact = n <= K;
    if (n == 0)
        return w;
    // Faddeev-LeVerrier: det(1 - tA) = 1 + c_{n-1} t + ... + c_0 t^n.
    PolyMatrix A = e.m;
    for (auto& row : A)
        for (auto& x : row)
            if (x.variables() != v)
                x = x.with_variables(v);
    PolyMatrix M(n, std::vector<MPoly>(n, MPoly(v)));
    std::vector<MPoly> coeff(n + 1, MPoly(v));
    for (std::size_t k = 1; k <= n; ++k) {
        if (k == 1) {
            for (std::size_t i = 0; i < n; ++i) M[i][i] = MPoly::constant(1, v);
        } else {
            M = matmul(A, M, v);
            for (std::size_t i = 0; i < n; ++i) M[i][i] += coeff[k - 1];
        }
        PolyMatrix AM = matmul(A, M, v);
        MPoly tr(v);
        for (std::size_t i = 0; i < n; ++i) tr += AM[i][i];
        coeff[k] = tr * Coefficient(mpz_class(-1), mpz_class(k));
    }
    for (std::size_t k = 1; k <= std::min(n, K); ++k) w.c[k] = coeff[k];
    return w;
}

BigWittVector bigwitt_add(const BigWittVector& a, const BigWittVector& b)
{
    std::size_t K = std::min(a.K, b.K);
    std::vector<std::string> v = a.c.front().variables();
    if (v.empty())
        v = b.c.front().variables();
    BigWittVector r = BigWittVector::one(K, v);
    r.c[0] = MPoly(v);
    std::size_t deg_a = 0, deg_b = 0;
    for (std::size_t i = 0; i <= a.K; ++i)
        if (!a.c[i].is_zero())
            deg_a = i;
    for (std::size_t i = 0; i <= b.K; ++i)
        if (!b.c[i].is_zero())
            deg_b = i;
    for (std::size_t i = 0; i <= K; ++i)
        for (std::size_t j = 0; i + j <= K; ++j) r.c[i + j] += a.c[i] * b.c[j];
    r.exact = a.exact && b.exact && deg_a + deg_b <= K;
    return r;
}

std::vector<MPoly> bigwitt_ghost(const BigWittVector& w, std::size_t count)
{
    if (count > w.K && !w.exact)
        fail(ErrorCode::ShapeMismatch, "ghost components beyond the truncation of an inexact series");
    const auto& v = w.c.front().variables();
    auto coeff = [&](std::size_t k) { return k <= w.K ? w.c[k] : MPoly(v); };
    std::vector<MPoly> g(count + 1, MPoly(v));
    for (std::size_t n = 1; n <= count; ++n) {
        MPoly s = coeff(n) * Coefficient(-static_cast<long>(n));
        for (std::size_t j = 1; j < n; ++j) s -= g[j] * coeff(n - j);
        g[n] = s;
    }
    g.erase(g.begin());
    return g;
}

BigWittVector bigwitt_from_ghost(const std::vector<MPoly>& g, std::size_t K, std::vector<std::string> v)
{
    if (g.size() < K)
        fail(ErrorCode::ShapeMismatch, "not enough ghost components for the truncation");
    BigWittVector w = BigWittVector::one(K, v);
    w.exact = false;
    for (std::size_t n = 1; n <= K; ++n) {
        MPoly s(v);
        for (std::size_t j = 1; j <= n; ++j) s += g[j - 1] * w.c[n - j];
        w.c[n] = s * Coefficient(mpz_class(-1), mpz_class(n));
    }
    return w;
}

BigWittVector bigwitt_frobenius(const BigWittVector& w, unsigned m)
{
    if (m == 0)
        fail(ErrorCode::Usage, "Frobenius index must be positive");
    std::size_t K = w.exact ? w.K : w.K / m;
    const auto& v = w.c.front().variables();
    if (K == 0)
        return BigWittVector{0, {MPoly::constant(1, v)}, false};
    auto g = bigwitt_ghost(w, m * K);
    std::vector<MPoly> h;
    for (std::size_t n = 1; n <= K; ++n) h.push_back(g[m * n - 1]);
    BigWittVector r = bigwitt_from_ghost(h, K, v);
    r.exact = w.exact;
    return r;
}

BigWittVector bigwitt_verschiebung(const BigWittVector& w, unsigned m)
{
    if (m == 0)
        fail(ErrorCode::Usage, "Verschiebung index must be positive");
    const auto& v = w.c.front().variables();
    BigWittVector r = BigWittVector::one(w.K, v);
    std::size_t deg = 0;
    for (std::size_t k = 1; k <= w.K; ++k) {
        if (w.c[k].is_zero())
            continue;
        deg = k;
        if (k * m <= w.K)
            r.c[k * m] = w.c[k];
    }
    r.exact = w.exact && deg * m <= w.K;
    return r;
}

bool ker_membership(const BigWittVector& w, unsigned prime_bound)
{
    for (unsigned p = 2; p <= prime_bound; ++p)
        if (arith::is_prime(p) && !bigwitt_frobenius(w, p).is_one())
            return false;
    return true;
}

}  // namespace dwitt::witt
