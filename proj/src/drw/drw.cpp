#include "dwitt/drw.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <regex>
#include <set>

#include "dwitt/error.hpp"

namespace dwitt::drw {

using arith::ipow;

namespace {

bool is_prime(unsigned long p)
{
    if (p < 2)
        return false;
    for (unsigned long q = 2; q * q <= p; ++q)
        if (p % q == 0)
            return false;
    return true;
}

long ipow_l(unsigned long p, unsigned e)
{
    long r = 1;
    while (e--) r *= static_cast<long>(p);
    return r;
}

// Subsets of `support` with `size` elements, ascending as masks.
std::vector<unsigned> subsets(unsigned support, unsigned size)
{
    std::vector<unsigned> out;
    for (unsigned m = support;; m = (m - 1) & support) {
        if (static_cast<unsigned>(__builtin_popcount(m)) == size)
            out.push_back(m);
        if (m == 0)
            break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t index_of(const std::vector<unsigned>& basis, unsigned mask)
{
    return static_cast<std::size_t>(std::lower_bound(basis.begin(), basis.end(), mask) - basis.begin());
}

// Sign of e_a ^ e_b against e_(a|b) for disjoint masks.
int wedge_sign(unsigned a, unsigned b)
{
    int swaps = 0;
    for (unsigned j = 0; j < 32; ++j)
        if (b >> j & 1u)
            swaps += __builtin_popcount(a >> (j + 1));
    return swaps % 2 ? -1 : 1;
}

IntMatrix column_matrix(const std::vector<std::vector<mpz_class>>& cols, std::size_t rows)
{
    IntMatrix M(rows, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) M.set_column(c, cols[c]);
    return M;
}

// p^e times d_w, as an integer matrix from degree i to i + 1.
IntMatrix scaled_d(const Weight& w, unsigned i)
{
    unsigned supp = w.mask();
    auto src = subsets(supp, i), dst = subsets(supp, i + 1);
    IntMatrix D(dst.size(), src.size());
    for (std::size_t c = 0; c < src.size(); ++c)
        for (unsigned v = 0; v < w.num.size(); ++v) {
            if (!(supp >> v & 1u) || (src[c] >> v & 1u))
                continue;
            D(index_of(dst, src[c] | 1u << v), c) += wedge_sign(1u << v, src[c]) * w.num[v];
        }
    return D;
}

// d_w applied to the columns of X (exact).
IntMatrix apply_d(const Weight& w, unsigned i, const IntMatrix& X, unsigned long p)
{
    IntMatrix Y = scaled_d(w, i) * X;
    mpz_class q = ipow(p, w.e);
    for (std::size_t r = 0; r < Y.rows(); ++r)
        for (std::size_t c = 0; c < Y.cols(); ++c) {
            if (!mpz_divisible_p(Y(r, c).get_mpz_t(), q.get_mpz_t()))
                fail(ErrorCode::NotDivisible, "d leaves the integral forms");
            mpz_divexact(Y(r, c).get_mpz_t(), Y(r, c).get_mpz_t(), q.get_mpz_t());
        }
    return Y;
}

// {y integral : d_w y integral}
IntMatrix integral_forms(const Weight& w, unsigned i, unsigned long p)
{
    std::size_t n = subsets(w.mask(), i).size(), m = subsets(w.mask(), i + 1).size();
    if (m == 0 || w.e == 0)
        return IntMatrix::identity(n);
    return arith::lattice_preimage(scaled_d(w, i), IntMatrix::scalar(m, ipow(p, w.e)));
}

std::string fraction(long num, unsigned e, unsigned long p)
{
    mpq_class q(num, ipow(p, e));
    q.canonicalize();
    return q.get_den() == 1 ? q.get_num().get_str() : "(" + q.get_str() + ")";
}

// [x]^a[y]^b for an exponent vector.
std::string teichmuller_name(const std::vector<long>& a, const std::vector<std::string>& vars, bool& single)
{
    std::string s;
    int factors = 0;
    for (std::size_t v = 0; v < a.size(); ++v) {
        if (a[v] == 0)
            continue;
        ++factors;
        s += "[" + vars[v] + "]";
        if (a[v] != 1)
            s += "^" + std::to_string(a[v]);
    }
    single = factors <= 1;
    return factors ? s : "1";
}

std::string witt_name(unsigned j, const std::vector<long>& a, const std::vector<std::string>& vars)
{
    bool single = true;
    std::string t = teichmuller_name(a, vars, single);
    if (j == 0)
        return t;
    std::string v = j == 1 ? "V" : "V^" + std::to_string(j);
    return single ? v + t : v + "(" + t + ")";
}

std::string form_name(const Weight& w, unsigned mask, const mpz_class& coef, const PolyRing& R)
{
    std::string mono;
    for (std::size_t v = 0; v < w.num.size(); ++v) {
        if (w.num[v] == 0)
            continue;
        if (!mono.empty())
            mono += "*";
        mono += R.vars[v];
        std::string ex = fraction(w.num[v], w.e, R.p);
        if (ex != "1")
            mono += "^" + ex;
    }
    std::string dl;
    for (std::size_t v = 0; v < w.num.size(); ++v)
        if (mask >> v & 1u)
            dl += (dl.empty() ? "" : " ") + std::string("dlog ") + R.vars[v];
    std::string body = mono.empty() ? dl : (dl.empty() ? mono : mono + " " + dl);
    if (body.empty())
        body = "1";
    if (coef == 1)
        return body;
    if (coef == -1)
        return "-" + body;
    return coef.get_str() + "*" + body;
}

std::string generic_name(const Weight& w, unsigned i, const std::vector<mpz_class>& col, const PolyRing& R)
{
    auto basis = subsets(w.mask(), i);
    std::string s;
    for (std::size_t k = 0; k < col.size(); ++k) {
        if (col[k] == 0)
            continue;
        std::string t = form_name(w, basis[k], col[k], R);
        if (!s.empty())
            s += t[0] == '-' ? " - " + t.substr(1) : " + " + t;
        else
            s = t;
    }
    return s.empty() ? "0" : s;
}

std::optional<std::vector<mpz_class>> smith_solve(const arith::SmithDecomposition& S, const std::vector<mpz_class>& v)
{
    std::vector<mpz_class> Uv = S.U.apply(v);
    std::vector<mpz_class> y(S.V.rows(), 0);
    for (std::size_t i = 0; i < Uv.size(); ++i) {
        if (i < S.rank) {
            const mpz_class& dii = S.D(i, i);
            if (!mpz_divisible_p(Uv[i].get_mpz_t(), dii.get_mpz_t()))
                return std::nullopt;
            mpz_divexact(y[i].get_mpz_t(), Uv[i].get_mpz_t(), dii.get_mpz_t());
        } else if (Uv[i] != 0) {
            return std::nullopt;
        }
    }
    return S.V.apply(y);
}

// Shared by both routes: relations, closure assertion and the presented module.
void finish_component(Component& c, const IntMatrix& rel_v, const IntMatrix& rel_dv)
{
    c.rel_v = arith::lattice_basis(rel_v);
    c.rel_dv = arith::lattice_basis(rel_dv);
    IntMatrix rel = arith::hstack(c.rel_v, c.rel_dv);
    c.module = dieudonne::present(arith::lattice_preimage(c.gens, rel));
    c.smith = arith::smith_decompose(c.gens);
}

}  // namespace

// --------------------------------------------------------------- rings

std::string PolyRing::to_string() const
{
    std::string s = "F" + std::to_string(p);
    if (vars.empty())
        return s;
    s += "[";
    for (std::size_t i = 0; i < vars.size(); ++i) s += (i ? "," : "") + vars[i];
    return s + "]";
}

PolyRing PolyRing::parse(const std::string& text)
{
    static const std::regex re(R"(\s*F_?(\d+)\s*(?:\[\s*([A-Za-z]\w*(?:\s*,\s*[A-Za-z]\w*)*)?\s*\])?\s*)");
    std::smatch m;
    if (!std::regex_match(text, m, re))
        fail(ErrorCode::Parse, "cannot parse ring '" + text + "', expected e.g. F2[x,y]");
    PolyRing R;
    R.p = std::stoul(m[1]);
    if (!is_prime(R.p))
        fail(ErrorCode::Usage, "characteristic " + m[1].str() + " is not prime");
    std::string list = m[2];
    std::regex var(R"([A-Za-z]\w*)");
    for (auto it = std::sregex_iterator(list.begin(), list.end(), var); it != std::sregex_iterator(); ++it) {
        std::string v = it->str();
        if (std::find(R.vars.begin(), R.vars.end(), v) != R.vars.end())
            fail(ErrorCode::Parse, "repeated variable " + v);
        R.vars.push_back(v);
    }
    if (R.vars.size() > 8)
        fail(ErrorCode::Usage, "at most 8 variables are supported");
    return R;
}

// -------------------------------------------------------------- weights

Weight Weight::make(std::vector<long> num, unsigned e, unsigned long p)
{
    long q = static_cast<long>(p);
    while (e > 0 && std::all_of(num.begin(), num.end(), [q](long v) { return v % q == 0; })) {
        for (auto& v : num) v /= q;
        --e;
    }
    return Weight{std::move(num), e};
}

mpq_class Weight::total(unsigned long p) const
{
    mpq_class t(std::accumulate(num.begin(), num.end(), 0L), ipow(p, e));
    t.canonicalize();
    return t;
}

mpq_class Weight::at(std::size_t v, unsigned long p) const
{
    mpq_class t(num[v], ipow(p, e));
    t.canonicalize();
    return t;
}

Weight Weight::times_p(unsigned long p) const
{
    if (e > 0)
        return Weight{num, e - 1};
    std::vector<long> n = num;
    for (auto& v : n) v *= static_cast<long>(p);
    return Weight{n, 0};
}

Weight Weight::over_p(unsigned long p) const { return is_zero() ? *this : Weight::make(num, e + 1, p); }

Weight Weight::plus(const Weight& o, unsigned long p) const
{
    unsigned E = std::max(e, o.e);
    std::vector<long> n(num.size());
    for (std::size_t v = 0; v < n.size(); ++v) n[v] = num[v] * ipow_l(p, E - e) + o.num[v] * ipow_l(p, E - o.e);
    return Weight::make(n, E, p);
}

bool Weight::is_zero() const
{
    return std::all_of(num.begin(), num.end(), [](long v) { return v == 0; });
}

unsigned Weight::mask() const
{
    unsigned m = 0;
    for (std::size_t v = 0; v < num.size(); ++v)
        if (num[v])
            m |= 1u << v;
    return m;
}

std::string Weight::to_string(unsigned long p) const
{
    if (num.size() == 1)
        return total(p).get_str();
    std::string s = "(";
    for (std::size_t v = 0; v < num.size(); ++v) s += (v ? "," : "") + at(v, p).get_str();
    return s + ")";
}

bool operator<(const Weight& a, const Weight& b)
{
    // compare totals num/p^e without knowing p: cross-multiplication needs p, so
    // order by (e, num) which is a strict total order on normalized weights.
    return std::tie(a.e, a.num) < std::tie(b.e, b.num);
}

bool operator==(const Weight& a, const Weight& b) { return a.e == b.e && a.num == b.num; }

std::vector<Weight> weights_up_to(const PolyRing& R, unsigned D, unsigned max_e)
{
    long scale = ipow_l(R.p, max_e), bound = static_cast<long>(D) * scale;
    std::set<Weight> seen;
    std::vector<long> num(R.arity(), 0);
    std::function<void(std::size_t, long)> rec = [&](std::size_t v, long left) {
        if (v == num.size()) {
            seen.insert(Weight::make(num, max_e, R.p));
            return;
        }
        for (long k = 0; k <= left; ++k) {
            num[v] = k;
            rec(v + 1, left - k);
        }
        num[v] = 0;
    };
    rec(0, bound);
    std::vector<Weight> out(seen.begin(), seen.end());
    std::stable_sort(out.begin(), out.end(), [&](const Weight& a, const Weight& b) {
        mpq_class ta = a.total(R.p), tb = b.total(R.p);
        if (ta != tb)
            return ta < tb;
        return a < b;
    });
    return out;
}

// ------------------------------------------------------------- W_n(R)

namespace {

std::vector<std::vector<long>> monomials_up_to(std::size_t arity, long degree)
{
    std::vector<std::vector<long>> out;
    std::vector<long> a(arity, 0);
    std::function<void(std::size_t, long)> rec = [&](std::size_t v, long left) {
        if (v == arity) {
            out.push_back(a);
            return;
        }
        for (long k = 0; k <= left; ++k) {
            a[v] = k;
            rec(v + 1, left - k);
        }
        a[v] = 0;
    };
    rec(0, degree);
    std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return std::accumulate(x.begin(), x.end(), 0L) < std::accumulate(y.begin(), y.end(), 0L);
    });
    return out;
}

}  // namespace

WittPolyPresentation witt_ring_presentation(const PolyRing& R, unsigned n, unsigned D)
{
    if (n == 0)
        fail(ErrorCode::Usage, "Witt length must be at least 1");
    WittPolyPresentation P;
    P.R = R;
    P.n = n;
    P.D = D;
    std::map<std::pair<unsigned, std::vector<long>>, std::size_t> index;
    for (unsigned j = 0; j < n; ++j)
        for (auto& a : monomials_up_to(R.arity(), static_cast<long>(D) * ipow_l(R.p, j))) {
            WittGenerator g{j, a, Weight::make(a, j, R.p), witt_name(j, a, R.vars)};
            index[{j, a}] = P.generators.size();
            P.generators.push_back(g);
        }
    std::size_t N = P.generators.size();
    std::vector<std::vector<mpz_class>> rels;
    long q = static_cast<long>(R.p);
    for (std::size_t k = 0; k < N; ++k) {
        const auto& g = P.generators[k];
        std::vector<mpz_class> col(N, 0);
        col[k] = ipow(R.p, n - g.j);
        rels.push_back(col);
        if (g.j > 0 && std::all_of(g.monomial.begin(), g.monomial.end(), [q](long v) { return v % q == 0; })) {
            // V^j[m^p] = V^(j-1)(V F [m]) = p V^(j-1)[m]
            std::vector<long> root = g.monomial;
            for (auto& v : root) v /= q;
            std::vector<mpz_class> c(N, 0);
            c[k] = 1;
            c[index.at({g.j - 1, root})] -= q;
            rels.push_back(c);
        }
    }
    P.relations = column_matrix(rels, N);
    // V^i[m] V^j[m'] = p^i V^j([m]^(p^(j-i)) [m']) for i <= j
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = a; b < N; ++b) {
            const auto *x = &P.generators[a], *y = &P.generators[b];
            if (x->j > y->j)
                std::swap(x, y);
            std::vector<long> m(R.arity());
            long raise = ipow_l(R.p, y->j - x->j);
            for (std::size_t v = 0; v < m.size(); ++v) m[v] = x->monomial[v] * raise + y->monomial[v];
            auto it = index.find({y->j, m});
            if (it == index.end())
                continue;
            P.products.push_back({a, b, it->second, ipow(R.p, x->j)});
        }
    return P;
}

std::vector<Weight> WittPolyPresentation::weights() const
{
    std::set<Weight> s;
    for (const auto& g : generators) s.insert(g.weight);
    std::vector<Weight> out(s.begin(), s.end());
    std::stable_sort(out.begin(), out.end(),
                     [&](const Weight& a, const Weight& b) { return a.total(R.p) < b.total(R.p); });
    return out;
}

PresentedModule WittPolyPresentation::component(const Weight& w) const
{
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < generators.size(); ++k)
        if (generators[k].weight == w)
            rows.push_back(k);
    std::vector<std::vector<mpz_class>> cols;
    for (std::size_t c = 0; c < relations.cols(); ++c) {
        bool touches = false;
        for (auto r : rows) touches = touches || relations(r, c) != 0;
        if (!touches)
            continue;
        std::vector<mpz_class> col;
        for (auto r : rows) col.push_back(relations(r, c));
        cols.push_back(col);
    }
    return dieudonne::present(column_matrix(cols, rows.size()));
}

nlohmann::json WittPolyPresentation::to_json() const
{
    nlohmann::json gens = nlohmann::json::array(), comps = nlohmann::json::array(), prods = nlohmann::json::array();
    for (const auto& g : generators)
        gens.push_back({{"name", g.name}, {"V", g.j}, {"monomial", g.monomial}, {"weight", g.weight.to_string(R.p)}});
    for (const auto& w : weights()) {
        auto m = component(w);
        comps.push_back({{"weight", w.to_string(R.p)}, {"module", m.to_json(R.p)}});
    }
    for (const auto& pr : products)
        prods.push_back({{"left", generators[pr.left].name},
                         {"right", generators[pr.right].name},
                         {"coefficient", pr.coefficient.get_str()},
                         {"result", generators[pr.result].name}});
    return {{"ring", R.to_string()}, {"n", n},          {"weight_bound", D},
            {"generators", gens},    {"components", comps}, {"products", prods}};
}

// --------------------------------------------------------- truncations

const Component* DRWTruncation::find(const ComponentKey& k) const
{
    auto it = components.find(k);
    return it == components.end() ? nullptr : &it->second;
}

std::optional<std::vector<mpz_class>> DRWTruncation::coordinates(const ComponentKey& k,
                                                                 const std::vector<mpz_class>& form) const
{
    const Component* c = find(k);
    if (!c)
        return std::nullopt;
    return smith_solve(c->smith, form);
}

std::vector<mpz_class> DRWTruncation::to_form(const ComponentKey& k, const std::vector<mpz_class>& coords) const
{
    return find(k)->gens.apply(coords);
}

bool DRWTruncation::is_zero_in(const ComponentKey& k, const std::vector<mpz_class>& coords) const
{
    const Component* c = find(k);
    return !c || arith::lattice_contains(c->module.relations, coords);
}

std::map<Weight, long> DRWTruncation::lengths(unsigned degree) const
{
    std::map<Weight, long> out;
    for (const auto& [k, c] : components)
        if (k.level == n && k.degree == degree)
            out[k.weight] = c.module.length(R.p);
    return out;
}

std::vector<long> DRWTruncation::degree_lengths() const
{
    std::vector<long> out(R.arity() + 1, 0);
    for (const auto& [k, c] : components)
        if (k.level == n)
            out[k.degree] += c.module.length(R.p);
    return out;
}

nlohmann::json DRWTruncation::to_json() const
{
    nlohmann::json levels = nlohmann::json::array();
    for (unsigned r = 1; r <= top; ++r) {
        nlohmann::json degs = nlohmann::json::array();
        for (unsigned i = 0; i <= R.arity(); ++i) {
            nlohmann::json comps = nlohmann::json::array();
            long total = 0;
            for (const auto& [k, c] : components) {
                if (k.level != r || k.degree != i)
                    continue;
                nlohmann::json j{{"weight", k.weight.to_string(R.p)},
                                 {"generators", c.names},
                                 {"invariants", c.module.to_json(R.p)["invariants"]},
                                 {"length", c.module.length(R.p)}};
                total += c.module.length(R.p);
                auto put = [&](const char* name, const std::map<ComponentKey, IntMatrix>& maps) {
                    auto it = maps.find(k);
                    if (it != maps.end())
                        j[name] = it->second.to_json();
                };
                put("d", d);
                put("F", F);
                put("V", V);
                comps.push_back(j);
            }
            degs.push_back({{"degree", i}, {"length", total}, {"components", comps}});
        }
        levels.push_back({{"level", r}, {"degrees", degs}});
    }
    return {{"ring", R.to_string()},
            {"level", n},
            {"weight_bound", D},
            {"route", route == Route::Direct ? "direct" : "saturation"},
            {"lengths", degree_lengths()},
            {"levels", levels}};
}

namespace {

struct Builder {
    DRWTruncation& T;
    std::size_t budget;
    std::size_t spent = 0;

    std::vector<mpz_class> form_d(const Weight& w, unsigned i, const std::vector<mpz_class>& x) const
    {
        IntMatrix X(x.size(), 1);
        X.set_column(0, x);
        return apply_d(w, i, X, T.R.p).column(0);
    }

    // Structure maps on generators, computed through form coordinates.
    void build_maps()
    {
        unsigned long p = T.R.p;
        for (const auto& [k, c] : T.components) {
            auto store = [&](std::map<ComponentKey, IntMatrix>& into, const ComponentKey& tk,
                             const std::function<std::vector<mpz_class>(const std::vector<mpz_class>&)>& f) {
                const Component* t = T.find(tk);
                if (!t)
                    return;
                IntMatrix M(t->gens.cols(), c.gens.cols());
                for (std::size_t g = 0; g < c.gens.cols(); ++g) {
                    auto y = T.coordinates(tk, f(c.gens.column(g)));
                    if (!y)
                        fail(ErrorCode::NotInImage, "structure map leaves the lattice at weight " +
                                                        tk.weight.to_string(p) + ", degree " +
                                                        std::to_string(tk.degree));
                    M.set_column(g, *y);
                }
                into[k] = M;
            };
            if (k.degree < T.R.arity())
                store(T.d, {k.level, k.degree + 1, k.weight},
                      [&](const std::vector<mpz_class>& x) { return form_d(k.weight, k.degree, x); });
            if (k.level >= 2)
                store(T.F, {k.level - 1, k.degree, k.weight.times_p(p)},
                      [](const std::vector<mpz_class>& x) { return x; });
            if (k.level < T.top)
                store(T.V, {k.level + 1, k.degree, k.weight.over_p(p)}, [p](std::vector<mpz_class> x) {
                    for (auto& v : x) v *= static_cast<long>(p);
                    return x;
                });
        }
    }
};

// ---- direct route: products V^e[m] dV^e1[m1] ... dV^ei[mi]

struct DirectBuilder : Builder {
    std::map<std::pair<Weight, unsigned>, std::pair<IntMatrix, std::vector<std::string>>> cache;

    // Atom dV^e(u)[x^(p^e u)] has form coordinates u_v on dlog x_v; the
    // degree-zero factor V^e[x^(p^e w0)] has coordinate p^e.
    std::string atom_name(const Weight& u, bool differential) const
    {
        std::vector<long> a = u.num;
        return (differential ? "d" : "") + witt_name(u.e, a, T.R.vars);
    }

    // Products of one degree-zero atom and i differential atoms of total
    // weight w, all with denominators dividing that of w, kept while they
    // enlarge the span. Enumeration stops once the span reaches the forms
    // with integral d, which contain every such product.
    std::pair<IntMatrix, std::vector<std::string>> span(const Weight& w, unsigned i)
    {
        auto key = std::make_pair(w, i);
        if (auto it = cache.find(key); it != cache.end())
            return it->second;
        unsigned long p = T.R.p;
        std::size_t d = T.R.arity();
        auto basis = subsets(w.mask(), i);
        std::size_t N = basis.size();
        IntMatrix bound = integral_forms(w, i, p);
        std::vector<std::vector<mpz_class>> kept;
        std::vector<std::string> names;
        IntMatrix current(N, 0);
        bool full = N == 0;

        // atoms u <= w, u != 0, as numerators over p^(w.e)
        struct Atom {
            std::vector<long> scaled;
            long size;
            Weight u;
        };
        std::vector<Atom> atoms;
        if (i > 0) {
            std::vector<long> u(d, 0);
            std::function<void(std::size_t)> rec = [&](std::size_t v) {
                if (v == d) {
                    long size = std::accumulate(u.begin(), u.end(), 0L);
                    if (size > 0)
                        atoms.push_back({u, size, Weight::make(u, w.e, p)});
                    return;
                }
                for (long k = 0; k <= w.num[v]; ++k) {
                    u[v] = k;
                    rec(v + 1);
                }
                u[v] = 0;
            };
            rec(0);
            std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
                return std::tie(a.u.e, a.size) < std::tie(b.u.e, b.size);
            });
        }

        std::vector<std::size_t> pick;
        std::vector<long> used(d, 0);
        std::function<void(std::size_t)> rec = [&](std::size_t from) {
            if (full)
                return;
            if (pick.size() == i) {
                std::vector<long> rest(d);
                for (std::size_t v = 0; v < d; ++v) rest[v] = w.num[v] - used[v];
                Weight w0 = Weight::make(rest, w.e, p);
                if (++spent > budget)
                    fail(ErrorCode::SpanOverflow, "bounded-weight spanning set exceeds the budget of " +
                                                      std::to_string(budget) + " products");
                // p^e(w0) times the wedge of the atoms' coordinate vectors
                std::map<unsigned, mpz_class> form{{0u, ipow(p, w0.e)}};
                for (auto idx : pick) {
                    const Weight& u = atoms[idx].u;
                    std::map<unsigned, mpz_class> next;
                    for (const auto& [mask, c] : form)
                        for (std::size_t v = 0; v < d; ++v) {
                            if (u.num[v] == 0 || (mask >> v & 1u))
                                continue;
                            next[mask | 1u << v] += c * u.num[v] * wedge_sign(mask, 1u << v);
                        }
                    form.swap(next);
                }
                std::vector<mpz_class> vec(N, 0);
                for (const auto& [mask, c] : form) vec[index_of(basis, mask)] += c;
                if (std::all_of(vec.begin(), vec.end(), [](const mpz_class& x) { return x == 0; }))
                    return;
                if (current.cols() && arith::lattice_contains(current, vec))
                    return;
                kept.push_back(vec);
                std::string name = w0.is_zero() ? "" : atom_name(w0, false);
                for (auto idx : pick) name += (name.empty() ? "" : "*") + atom_name(atoms[idx].u, true);
                names.push_back(name.empty() ? "1" : name);
                current = arith::lattice_basis(column_matrix(kept, N));
                full = arith::lattice_contains(current, bound);
                return;
            }
            for (std::size_t k = from; k < atoms.size() && !full; ++k) {
                const auto& a = atoms[k].scaled;
                bool fits = true;
                for (std::size_t v = 0; v < d && fits; ++v) fits = used[v] + a[v] <= w.num[v];
                if (!fits)
                    continue;
                for (std::size_t v = 0; v < d; ++v) used[v] += a[v];
                pick.push_back(k);
                rec(k + 1);
                pick.pop_back();
                for (std::size_t v = 0; v < d; ++v) used[v] -= a[v];
            }
        };
        rec(0);
        auto out = std::make_pair(column_matrix(kept, N), names);
        cache[key] = out;
        return out;
    }

    void build()
    {
        unsigned long p = T.R.p;
        for (unsigned r = 1; r <= T.top; ++r)
            for (const auto& w : weights_up_to(T.R, T.D, r - 1)) {
                unsigned s = static_cast<unsigned>(__builtin_popcount(w.mask()));
                Weight lifted = w;
                for (unsigned t = 0; t < r; ++t) lifted = lifted.times_p(p);
                for (unsigned i = 0; i <= s; ++i) {
                    auto [G, names] = span(w, i);
                    if (G.cols() == 0)
                        continue;
                    Component c;
                    c.gens = G;
                    c.names = names;
                    mpz_class pr = ipow(p, r);
                    IntMatrix rv = span(lifted, i).first;
                    rv *= pr;
                    IntMatrix rdv(G.rows(), 0);
                    if (i > 0) {
                        IntMatrix src = span(lifted, i - 1).first;
                        src *= pr;
                        rdv = apply_d(w, i - 1, src, p);
                    }
                    finish_component(c, rv, rdv);
                    T.components[{r, i, w}] = c;
                }
                // a second closure pass under d adds nothing
                for (unsigned i = 1; i <= s; ++i) {
                    const Component *a = T.find({r, i - 1, w}), *b = T.find({r, i, w});
                    if (!a || !b)
                        continue;
                    IntMatrix prev = arith::hstack(a->rel_v, a->rel_dv);
                    if (!arith::lattice_contains(arith::hstack(b->rel_v, b->rel_dv), apply_d(w, i - 1, prev, p)))
                        fail(ErrorCode::NotInImage, "relations are not closed under d at weight " + w.to_string(p));
                }
            }
        build_maps();
    }
};

// ---- saturation route: iterated decalage of the integral lift

struct SaturationBuilder : Builder {
    unsigned headroom;
    unsigned iter_cap;
    std::map<Weight, std::vector<IntMatrix>> cache;

    // Lattices of the weight-w component of the saturation, one per degree.
    const std::vector<IntMatrix>& saturated(const Weight& w)
    {
        if (auto it = cache.find(w); it != cache.end())
            return it->second;
        unsigned long p = T.R.p;
        unsigned s = static_cast<unsigned>(__builtin_popcount(w.mask()));
        unsigned J = w.e + headroom;
        if (J > iter_cap)
            fail(ErrorCode::IterationLimit, "weight " + w.to_string(p) + " needs " + std::to_string(J) +
                                                " decalage steps, over the cap of " + std::to_string(iter_cap));
        if (++spent > budget)
            fail(ErrorCode::SpanOverflow, "saturation route exceeds the component budget");
        // integral weight a = p^J w, where Omega of the lift is spanned by x^a dlog x_I
        Weight a = w;
        for (unsigned t = 0; t < J; ++t) a = a.times_p(p);
        std::vector<std::size_t> ranks;
        std::vector<IntMatrix> basis, delta;
        for (unsigned i = 0; i <= s; ++i) {
            ranks.push_back(subsets(w.mask(), i).size());
            basis.push_back(IntMatrix::identity(ranks.back()));
            if (i < s)
                delta.push_back(scaled_d(a, i));
        }
        for (unsigned t = 0; t < J; ++t) {
            auto L = dieudonne::eta_p_lattices(ranks, delta, p);
            std::vector<IntMatrix> next;
            for (unsigned i = 0; i < s; ++i) {
                IntMatrix img = delta[i] * L[i];
                mpz_class q = p;
                for (std::size_t r = 0; r < img.rows(); ++r)
                    for (std::size_t c = 0; c < img.cols(); ++c)
                        mpz_divexact(img(r, c).get_mpz_t(), img(r, c).get_mpz_t(), q.get_mpz_t());
                auto x = arith::solve_integral(L[i + 1], img);
                if (!x)
                    fail(ErrorCode::NotInImage, "decalage differential is not integral");
                next.push_back(*x);
            }
            for (unsigned i = 0; i <= s; ++i) basis[i] = basis[i] * L[i];
            delta = next;
        }
        for (auto& B : basis) B = arith::lattice_basis(B);
        return cache[w] = basis;
    }

    // F identifies weight w with {y in weight p w : d y in p (weight p w)}.
    void check_saturated(const Weight& w)
    {
        unsigned long p = T.R.p;
        const auto lo = saturated(w);
        const auto hi = saturated(w.times_p(p));
        Weight pw = w.times_p(p);
        for (std::size_t i = 0; i < lo.size(); ++i) {
            IntMatrix expect = hi[i];
            if (i + 1 < lo.size()) {
                IntMatrix dimg = apply_d(pw, static_cast<unsigned>(i), hi[i], p);
                IntMatrix target = hi[i + 1];
                target *= mpz_class(p);
                expect = hi[i] * arith::lattice_preimage(dimg, target);
            }
            if (!(arith::lattice_basis(expect) == lo[i]))
                fail(ErrorCode::NotSaturated, "F is not onto {y : dy in p M} at weight " + w.to_string(p));
        }
    }

    void build()
    {
        unsigned long p = T.R.p;
        for (unsigned r = 1; r <= T.top; ++r)
            for (const auto& w : weights_up_to(T.R, T.D, r - 1)) {
                check_saturated(w);
                const auto& E = saturated(w);
                Weight lifted = w;
                for (unsigned t = 0; t < r; ++t) lifted = lifted.times_p(p);
                const auto Elift = saturated(lifted);
                mpz_class pr = ipow(p, r);
                for (unsigned i = 0; i < E.size(); ++i) {
                    Component c;
                    c.gens = E[i];
                    for (std::size_t g = 0; g < E[i].cols(); ++g)
                        c.names.push_back(generic_name(w, i, E[i].column(g), T.R));
                    IntMatrix rv = Elift[i];
                    rv *= pr;
                    IntMatrix rdv(E[i].rows(), 0);
                    if (i > 0) {
                        IntMatrix src = Elift[i - 1];
                        src *= pr;
                        rdv = apply_d(w, i - 1, src, p);
                    }
                    finish_component(c, rv, rdv);
                    T.components[{r, i, w}] = c;
                }
            }
        build_maps();
    }
};

void check_args(const PolyRing& R, unsigned n)
{
    if (n == 0)
        fail(ErrorCode::Usage, "level must be at least 1");
    if (!is_prime(R.p))
        fail(ErrorCode::Usage, "characteristic must be prime");
}

}  // namespace

DRWTruncation drw_truncated(const PolyRing& R, unsigned n, unsigned D, const DirectOptions& opt)
{
    check_args(R, n);
    DRWTruncation T;
    T.R = R;
    T.n = n;
    T.D = D;
    T.top = n + 1;
    T.route = Route::Direct;
    DirectBuilder b{{T, opt.span_budget}, {}};
    b.build();
    return T;
}

DRWTruncation drw_via_saturation(const PolyRing& R, unsigned n, unsigned D, const SaturationOptions& opt)
{
    check_args(R, n);
    DRWTruncation T;
    T.R = R;
    T.n = n;
    T.D = D;
    T.top = n + 1;
    T.route = Route::Saturation;
    SaturationBuilder b{{T, opt.span_budget}, opt.headroom, opt.iter_cap, {}};
    b.build();
    return T;
}

DRWTruncation drop_relation(const DRWTruncation& T, const ComponentKey& k, std::size_t column)
{
    DRWTruncation out = T;
    auto it = out.components.find(k);
    if (it == out.components.end())
        fail(ErrorCode::Usage, "no such component");
    Component& c = it->second;
    if (column >= c.rel_dv.cols())
        fail(ErrorCode::Usage, "relation index out of range");
    IntMatrix kept(c.rel_dv.rows(), 0);
    for (std::size_t j = 0; j < c.rel_dv.cols(); ++j)
        if (j != column)
            kept = arith::hstack(kept, c.rel_dv.columns(j, 1));
    IntMatrix rel = arith::hstack(c.rel_v, kept);
    c.rel_dv = kept;
    c.module = dieudonne::present(arith::lattice_preimage(c.gens, rel));
    return out;
}

// ------------------------------------------------------------ comparison

nlohmann::json RouteComparison::to_json() const
{
    return {{"invariants_match", invariants_match}, {"maps_match", maps_match}, {"pass", pass()},
            {"mismatches", mismatches}};
}

RouteComparison compare_routes(const DRWTruncation& a, const DRWTruncation& b)
{
    RouteComparison out;
    unsigned long p = a.R.p;
    auto where = [p](const ComponentKey& k) {
        return "level " + std::to_string(k.level) + " degree " + std::to_string(k.degree) + " weight " +
               k.weight.to_string(p);
    };
    std::set<ComponentKey> keys;
    for (const auto& [k, c] : a.components) keys.insert(k);
    for (const auto& [k, c] : b.components) keys.insert(k);
    for (const auto& k : keys) {
        const Component *ca = a.find(k), *cb = b.find(k);
        std::vector<mpz_class> ia = ca ? ca->module.invariants : std::vector<mpz_class>{};
        std::vector<mpz_class> ib = cb ? cb->module.invariants : std::vector<mpz_class>{};
        if (ia != ib) {
            out.invariants_match = false;
            out.mismatches.push_back("invariants differ at " + where(k));
            continue;
        }
        if (!ca || !cb)
            continue;
        // the generators of a, read in both presentations, have the same images
        auto check = [&](const char* name, const std::map<ComponentKey, IntMatrix>& ma,
                         const std::map<ComponentKey, IntMatrix>& mb, const ComponentKey& tk) {
            auto ita = ma.find(k), itb = mb.find(k);
            if ((ita == ma.end()) != (itb == mb.end())) {
                out.maps_match = false;
                out.mismatches.push_back(std::string(name) + " defined on one side only at " + where(k));
                return;
            }
            if (ita == ma.end())
                return;
            for (std::size_t g = 0; g < ca->gens.cols(); ++g) {
                auto x = ca->gens.column(g);
                auto xb = b.coordinates(k, x);
                if (!xb) {
                    out.maps_match = false;
                    out.mismatches.push_back("generator " + ca->names[g] + " missing from the other route at " +
                                             where(k));
                    return;
                }
                std::vector<mpz_class> unit(ca->gens.cols(), 0);
                unit[g] = 1;
                auto ya = a.to_form(tk, ita->second.apply(unit));
                auto yb = b.to_form(tk, itb->second.apply(*xb));
                std::vector<mpz_class> diff(ya.size());
                for (std::size_t r = 0; r < ya.size(); ++r) diff[r] = ya[r] - yb[r];
                auto cd = b.coordinates(tk, diff);
                if (!cd || !b.is_zero_in(tk, *cd)) {
                    out.maps_match = false;
                    out.mismatches.push_back(std::string(name) + " differs on " + ca->names[g] + " at " + where(k));
                }
            }
        };
        check("d", a.d, b.d, {k.level, k.degree + 1, k.weight});
        if (k.level >= 2)
            check("F", a.F, b.F, {k.level - 1, k.degree, k.weight.times_p(p)});
        check("V", a.V, b.V, {k.level + 1, k.degree, k.weight.over_p(p)});
    }
    return out;
}

// --------------------------------------------------------- identity suite

namespace {

struct Element {
    ComponentKey key;
    std::vector<mpz_class> coords;
};

struct Evaluator {
    const DRWTruncation& T;
    unsigned long p;

    std::optional<Element> apply(const std::map<ComponentKey, IntMatrix>& maps, const Element& x,
                                 const ComponentKey& target) const
    {
        auto it = maps.find(x.key);
        if (it == maps.end())
            return std::nullopt;
        return Element{target, it->second.apply(x.coords)};
    }
    std::optional<Element> d(const Element& x) const
    {
        return apply(T.d, x, {x.key.level, x.key.degree + 1, x.key.weight});
    }
    std::optional<Element> F(const Element& x) const
    {
        if (x.key.level < 2)
            return std::nullopt;
        return apply(T.F, x, {x.key.level - 1, x.key.degree, x.key.weight.times_p(p)});
    }
    std::optional<Element> V(const Element& x) const
    {
        return apply(T.V, x, {x.key.level + 1, x.key.degree, x.key.weight.over_p(p)});
    }

    // Product through form coordinates.
    std::optional<Element> mul(const Element& x, const Element& y) const
    {
        if (x.key.level != y.key.level)
            return std::nullopt;
        Weight w = x.key.weight.plus(y.key.weight, p);
        ComponentKey k{x.key.level, x.key.degree + y.key.degree, w};
        if (w.total(p) > T.D || k.degree > T.R.arity())
            return std::nullopt;
        if (!T.find(x.key) || !T.find(y.key))
            return element(k, std::vector<mpz_class>(subsets(w.mask(), k.degree).size(), 0));
        auto fx = T.to_form(x.key, x.coords), fy = T.to_form(y.key, y.coords);
        auto bx = subsets(x.key.weight.mask(), x.key.degree), by = subsets(y.key.weight.mask(), y.key.degree);
        auto bz = subsets(w.mask(), k.degree);
        std::vector<mpz_class> z(bz.size(), 0);
        for (std::size_t a = 0; a < bx.size(); ++a)
            for (std::size_t b = 0; b < by.size(); ++b)
                if (!(bx[a] & by[b]) && fx[a] != 0 && fy[b] != 0)
                    z[index_of(bz, bx[a] | by[b])] += wedge_sign(bx[a], by[b]) * fx[a] * fy[b];
        return element(k, z);
    }

    // An element given by form coordinates; zero when the component is absent.
    std::optional<Element> element(const ComponentKey& k, const std::vector<mpz_class>& form) const
    {
        if (!T.find(k)) {
            // inside the window a missing component is the zero module
            if (k.weight.total(p) <= T.D && k.level <= T.top && k.level >= 1)
                return Element{k, {}};
            return std::nullopt;
        }
        auto c = T.coordinates(k, form);
        if (!c)
            return std::nullopt;
        return Element{k, *c};
    }

    bool equal(const Element& a, const Element& b) const
    {
        if (!(a.key == b.key))
            return false;
        if (!T.find(a.key))
            return true;
        std::vector<mpz_class> diff(a.coords.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a.coords[i] - b.coords[i];
        return T.is_zero_in(a.key, diff);
    }

    Element scaled(Element x, long s) const
    {
        for (auto& v : x.coords) v *= s;
        return x;
    }
};

std::string describe(const ComponentKey& k, const std::string& name, unsigned long p)
{
    return name + " (level " + std::to_string(k.level) + ", degree " + std::to_string(k.degree) + ", weight " +
           k.weight.to_string(p) + ")";
}

}  // namespace

LawReport drw_identity_suite(const DRWTruncation& T, std::size_t product_samples, unsigned seed)
{
    unsigned long p = T.R.p;
    long q = static_cast<long>(p);
    Evaluator ev{T, p};
    LawReport rep;

    std::vector<std::pair<Element, std::string>> gens;
    for (const auto& [k, c] : T.components)
        for (std::size_t g = 0; g < c.gens.cols(); ++g) {
            std::vector<mpz_class> unit(c.gens.cols(), 0);
            unit[g] = 1;
            gens.push_back({Element{k, unit}, c.names[g]});
        }

    auto run = [&](const std::string& law, const std::function<std::optional<bool>(const Element&)>& test) {
        LawResult r{law, true, ""};
        for (const auto& [x, name] : gens) {
            auto ok = test(x);
            if (ok && !*ok) {
                r.pass = false;
                r.witness = describe(x.key, name, p);
                break;
            }
        }
        rep.add(r);
    };

    run("F d V = d", [&](const Element& x) -> std::optional<bool> {
        auto v = ev.V(x);
        if (!v)
            return std::nullopt;
        auto dv = ev.d(*v);
        auto rhs = ev.d(x);
        if (!dv || !rhs)
            return std::nullopt;
        auto lhs = ev.F(*dv);
        if (!lhs)
            return std::nullopt;
        return ev.equal(*lhs, *rhs);
    });
    run("F V = p", [&](const Element& x) -> std::optional<bool> {
        auto v = ev.V(x);
        if (!v)
            return std::nullopt;
        auto fv = ev.F(*v);
        if (!fv)
            return std::nullopt;
        return ev.equal(*fv, ev.scaled(x, q));
    });
    run("V F = p", [&](const Element& x) -> std::optional<bool> {
        auto f = ev.F(x);
        if (!f)
            return std::nullopt;
        auto vf = ev.V(*f);
        if (!vf)
            return std::nullopt;
        return ev.equal(*vf, ev.scaled(x, q));
    });
    run("d F = p F d", [&](const Element& x) -> std::optional<bool> {
        auto f = ev.F(x), dx = ev.d(x);
        if (!f || !dx)
            return std::nullopt;
        auto df = ev.d(*f), fd = ev.F(*dx);
        if (!df || !fd)
            return std::nullopt;
        return ev.equal(*df, ev.scaled(*fd, q));
    });

    // F d[x] = [x]^(p-1) d[x]
    {
        LawResult r{"F d[x] = [x]^(p-1) d[x]", true, ""};
        for (unsigned level = 2; level <= T.top && r.pass; ++level)
            for (std::size_t v = 0; v < T.R.arity() && r.pass; ++v) {
                std::vector<long> unit(T.R.arity(), 0);
                unit[v] = 1;
                Weight w1{unit, 0};
                auto dx = ev.element({level, 1, w1}, {1});
                if (!dx)
                    continue;
                auto f = ev.F(*dx);
                auto rhs = ev.element({level - 1, 1, w1.times_p(p)}, {1});
                if (!f || !rhs)
                    continue;
                if (!ev.equal(*f, *rhs)) {
                    r.pass = false;
                    r.witness = "d[" + T.R.vars[v] + "] at level " + std::to_string(level);
                }
            }
        rep.add(r);
    }

    // Product identities on generator pairs, sampled when there are many.
    std::mt19937 rng(seed);
    auto pairs = [&](const std::function<bool(const Element&, const Element&)>& admissible) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t a = 0; a < gens.size(); ++a)
            for (std::size_t b = 0; b < gens.size(); ++b)
                if (admissible(gens[a].first, gens[b].first))
                    out.push_back({a, b});
        if (out.size() > product_samples) {
            std::shuffle(out.begin(), out.end(), rng);
            out.resize(product_samples);
            std::sort(out.begin(), out.end());
        }
        return out;
    };
    auto run_pairs = [&](const std::string& law, const std::function<bool(const Element&, const Element&)>& admissible,
                         const std::function<std::optional<bool>(const Element&, const Element&)>& test) {
        LawResult r{law, true, ""};
        for (auto [a, b] : pairs(admissible)) {
            auto ok = test(gens[a].first, gens[b].first);
            if (ok && !*ok) {
                r.pass = false;
                r.witness = describe(gens[a].first.key, gens[a].second, p) + " and " +
                            describe(gens[b].first.key, gens[b].second, p);
                break;
            }
        }
        rep.add(r);
    };

    run_pairs(
        "x V(y) = V(F(x) y)",
        [&](const Element& x, const Element& y) { return x.key.level >= 2 && y.key.level + 1 == x.key.level; },
        [&](const Element& x, const Element& y) -> std::optional<bool> {
            auto vy = ev.V(y), fx = ev.F(x);
            if (!vy || !fx)
                return std::nullopt;
            auto lhs = ev.mul(x, *vy), prod = ev.mul(*fx, y);
            if (!lhs || !prod)
                return std::nullopt;
            auto rhs = ev.V(*prod);
            if (!rhs)
                return std::nullopt;
            return ev.equal(*lhs, *rhs);
        });
    run_pairs(
        "V(x dy) = V(x) dV(y)",
        [&](const Element& x, const Element& y) {
            return x.key.degree == 0 && y.key.degree == 0 && x.key.level == y.key.level && x.key.level < T.top;
        },
        [&](const Element& x, const Element& y) -> std::optional<bool> {
            auto dy = ev.d(y);
            if (!dy)
                return std::nullopt;
            auto xdy = ev.mul(x, *dy);
            if (!xdy)
                return std::nullopt;
            auto lhs = ev.V(*xdy);
            auto vx = ev.V(x), vy = ev.V(y);
            if (!lhs || !vx || !vy)
                return std::nullopt;
            auto dvy = ev.d(*vy);
            if (!dvy)
                return std::nullopt;
            auto rhs = ev.mul(*vx, *dvy);
            if (!rhs)
                return std::nullopt;
            return ev.equal(*lhs, *rhs);
        });
    {
        LawResult r{"d[x] V(y) = V([x]^(p-1) d[x] y)", true, ""};
        for (const auto& [y, name] : gens) {
            if (y.key.level >= T.top || !r.pass)
                continue;
            for (std::size_t v = 0; v < T.R.arity() && r.pass; ++v) {
                std::vector<long> unit(T.R.arity(), 0);
                unit[v] = 1;
                Weight w1{unit, 0};
                auto dx = ev.element({y.key.level + 1, 1, w1}, {1});
                auto xdx = ev.element({y.key.level, 1, w1.times_p(p)}, {1});
                auto vy = ev.V(y);
                if (!dx || !xdx || !vy)
                    continue;
                auto lhs = ev.mul(*dx, *vy), prod = ev.mul(*xdx, y);
                if (!lhs || !prod)
                    continue;
                auto rhs = ev.V(*prod);
                if (!rhs)
                    continue;
                if (!ev.equal(*lhs, *rhs)) {
                    r.pass = false;
                    r.witness = "d[" + T.R.vars[v] + "] with " + describe(y.key, name, p);
                }
            }
        }
        rep.add(r);
    }

    // d, F and V send relations to relations.
    {
        LawResult r{"d, F, V descend to the quotients", true, ""};
        for (const auto& [k, c] : T.components) {
            const IntMatrix& rel = c.module.relations;
            for (std::size_t j = 0; j < rel.cols() && r.pass; ++j) {
                Element x{k, rel.column(j)};
                for (auto img : {ev.d(x), ev.F(x), ev.V(x)}) {
                    if (img && T.find(img->key) && !T.is_zero_in(img->key, img->coords)) {
                        r.pass = false;
                        r.witness = "relation " + std::to_string(j) + " at level " + std::to_string(k.level) +
                                    ", degree " + std::to_string(k.degree) + ", weight " + k.weight.to_string(p);
                        break;
                    }
                }
            }
            if (!r.pass)
                break;
        }
        rep.add(r);
    }
    return rep;
}

}  // namespace dwitt::drw
