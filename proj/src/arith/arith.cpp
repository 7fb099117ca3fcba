#include "dwitt/arith.hpp"

#include "dwitt/error.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <sstream>

namespace dwitt::arith {

// ---------------------------------------------------------------- integers

int valuation(const mpz_class& n, unsigned long p)
{
    if (n == 0)
        return INT_MAX;
    mpz_class m = abs(n);
    int v = 0;
    while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
        mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
        ++v;
    }
    return v;
}

mpz_class ipow(const mpz_class& base, unsigned long e)
{
    mpz_class r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

bool is_prime(unsigned long n)
{
    if (n < 2)
        return false;
    for (unsigned long d = 2; d * d <= n; ++d)
        if (n % d == 0)
            return false;
    return true;
}

mpz_class binomial(unsigned long n, unsigned long k)
{
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

// ------------------------------------------------------------- Coefficient

Coefficient::Coefficient(const mpz_class& num, const mpz_class& den)
{
    if (den == 0)
        fail(ErrorCode::Parse, "zero denominator");
    q_ = mpq_class(num, den);
    q_.canonicalize();
}

Coefficient Coefficient::parse(std::string_view text)
{
    std::string s(text);
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos)
            return Coefficient(mpz_class(s));
        return Coefficient(mpz_class(s.substr(0, slash)), mpz_class(s.substr(slash + 1)));
    } catch (const std::invalid_argument&) {
        fail(ErrorCode::Parse, "bad rational literal '" + s + "'");
    }
}

int Coefficient::valuation(unsigned long p) const
{
    if (is_zero())
        return INT_MAX;
    return arith::valuation(q_.get_num(), p) - arith::valuation(q_.get_den(), p);
}

Coefficient& Coefficient::operator/=(const Coefficient& o)
{
    if (o.is_zero())
        fail(ErrorCode::NotDivisible, "division by zero");
    q_ /= o.q_;
    return *this;
}

std::string Coefficient::to_string() const { return q_.get_str(); }

// ------------------------------------------------------------------ MPoly

bool GrlexGreater::operator()(const Exponent& a, const Exponent& b) const
{
    std::uint64_t da = 0, db = 0;
    for (auto e : a) da += e;
    for (auto e : b) db += e;
    if (da != db)
        return da > db;
    return a > b;
}

MPoly MPoly::constant(const Coefficient& c, std::vector<std::string> vars)
{
    MPoly r(std::move(vars));
    if (!c.is_zero())
        r.terms_.emplace(Exponent(r.vars_.size(), 0), c);
    return r;
}

MPoly MPoly::variable(std::size_t index, std::vector<std::string> vars)
{
    if (index >= vars.size())
        fail(ErrorCode::ArityMismatch, "variable index out of range");
    Exponent e(vars.size(), 0);
    e[index] = 1;
    return monomial(1, std::move(e), std::move(vars));
}

MPoly MPoly::monomial(const Coefficient& c, Exponent e, std::vector<std::string> vars)
{
    if (e.size() != vars.size())
        fail(ErrorCode::ArityMismatch, "exponent arity does not match variables");
    MPoly r(std::move(vars));
    if (!c.is_zero())
        r.terms_.emplace(std::move(e), c);
    return r;
}

bool MPoly::is_constant() const
{
    return terms_.empty() ||
           (terms_.size() == 1 &&
            std::all_of(terms_.begin()->first.begin(), terms_.begin()->first.end(),
                        [](auto e) { return e == 0; }));
}

Coefficient MPoly::constant_term() const { return coefficient(Exponent(vars_.size(), 0)); }

Coefficient MPoly::coefficient(const Exponent& e) const
{
    auto it = terms_.find(e);
    return it == terms_.end() ? Coefficient() : it->second;
}

long MPoly::total_degree() const
{
    if (terms_.empty())
        return -1;
    long d = 0;
    for (auto e : terms_.begin()->first) d += e;
    return d;
}

void MPoly::add_term(const Exponent& e, const Coefficient& c)
{
    if (e.size() != vars_.size())
        fail(ErrorCode::ArityMismatch, "term arity does not match variables");
    if (c.is_zero())
        return;
    auto [it, inserted] = terms_.emplace(e, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero())
            terms_.erase(it);
    }
}

void MPoly::align_with(const MPoly& other)
{
    if (vars_ == other.vars_)
        return;
    if (vars_.empty() && is_constant()) {
        Coefficient c = constant_term();
        *this = constant(c, other.vars_);
        return;
    }
    if (other.vars_.empty())
        return;
    fail(ErrorCode::ArityMismatch, "polynomials over different variable lists");
}

MPoly MPoly::operator-() const
{
    MPoly r = *this;
    for (auto& [e, c] : r.terms_) c = -c;
    return r;
}

MPoly& MPoly::operator+=(const MPoly& o)
{
    align_with(o);
    if (o.vars_ != vars_ && !o.terms_.empty())
        return *this += o.with_variables(vars_);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
}

MPoly& MPoly::operator-=(const MPoly& o) { return *this += -o; }

MPoly operator*(const MPoly& a, const MPoly& b)
{
    if (a.vars_ != b.vars_) {
        if (a.is_constant() && a.vars_.empty())
            return b * a.constant_term();
        if (b.is_constant() && b.vars_.empty())
            return a * b.constant_term();
        fail(ErrorCode::ArityMismatch, "polynomials over different variable lists");
    }
    MPoly r(a.vars_);
    const std::size_t n = a.vars_.size();
    Exponent e(n);
    for (const auto& [ea, ca] : a.terms_)
        for (const auto& [eb, cb] : b.terms_) {
            for (std::size_t i = 0; i < n; ++i) e[i] = ea[i] + eb[i];
            r.add_term(e, ca * cb);
        }
    return r;
}

MPoly& MPoly::operator*=(const MPoly& o) { return *this = *this * o; }

MPoly& MPoly::operator*=(const Coefficient& c)
{
    if (c.is_zero()) {
        terms_.clear();
        return *this;
    }
    for (auto& [e, v] : terms_) v *= c;
    return *this;
}

bool operator==(const MPoly& a, const MPoly& b)
{
    if (a.vars_ == b.vars_)
        return a.terms_ == b.terms_;
    if (a.is_constant() && b.is_constant())
        return a.constant_term() == b.constant_term();
    return false;
}

MPoly MPoly::pow(unsigned long e) const
{
    MPoly result = constant(1, vars_);
    MPoly base = *this;
    while (e) {
        if (e & 1)
            result *= base;
        e >>= 1;
        if (e)
            base *= base;
    }
    return result;
}

MPoly MPoly::derivative(std::size_t var) const
{
    if (var >= vars_.size())
        fail(ErrorCode::ArityMismatch, "derivative variable out of range");
    MPoly r(vars_);
    for (const auto& [e, c] : terms_) {
        if (e[var] == 0)
            continue;
        Exponent f = e;
        --f[var];
        r.add_term(f, c * Coefficient(static_cast<long>(e[var])));
    }
    return r;
}

Coefficient MPoly::evaluate(const std::vector<Coefficient>& point) const
{
    if (point.size() != vars_.size())
        fail(ErrorCode::ArityMismatch, "evaluation point has wrong arity");
    mpq_class acc = 0;
    for (const auto& [e, c] : terms_) {
        mpq_class t = c.value();
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0)
                continue;
            mpq_class v = point[i].value();
            mpz_class num, den;
            mpz_pow_ui(num.get_mpz_t(), v.get_num_mpz_t(), e[i]);
            mpz_pow_ui(den.get_mpz_t(), v.get_den_mpz_t(), e[i]);
            t *= mpq_class(num, den);
        }
        acc += t;
    }
    return Coefficient(acc);
}

MPoly MPoly::substitute(const std::vector<MPoly>& images) const
{
    if (images.size() != vars_.size())
        fail(ErrorCode::ArityMismatch, "substitution needs one image per variable");
    std::vector<std::string> target;
    for (const auto& im : images)
        if (!im.vars_.empty()) {
            if (!target.empty() && im.vars_ != target)
                fail(ErrorCode::ArityMismatch, "substitution images over different rings");
            target = im.vars_;
        }
    // Power caches: images[i]^k built on demand.
    std::vector<std::vector<MPoly>> powers(images.size());
    auto power = [&](std::size_t i, std::uint32_t k) -> const MPoly& {
        auto& cache = powers[i];
        if (cache.empty())
            cache.push_back(constant(1, target));
        while (cache.size() <= k)
            cache.push_back(cache.back() * images[i].with_variables(target));
        return cache[k];
    };
    MPoly r(target);
    for (const auto& [e, c] : terms_) {
        MPoly t = constant(c, target);
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i])
                t *= power(i, e[i]);
        r += t;
    }
    return r;
}

MPoly MPoly::with_variables(const std::vector<std::string>& vars) const
{
    if (vars == vars_)
        return *this;
    std::vector<std::size_t> where(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        auto it = std::find(vars.begin(), vars.end(), vars_[i]);
        if (it == vars.end()) {
            bool used = std::any_of(terms_.begin(), terms_.end(),
                                    [i](const auto& t) { return t.first[i] != 0; });
            if (used)
                fail(ErrorCode::ArityMismatch, "variable '" + vars_[i] + "' not in target ring");
            where[i] = SIZE_MAX;
        } else {
            where[i] = static_cast<std::size_t>(it - vars.begin());
        }
    }
    MPoly r(vars);
    for (const auto& [e, c] : terms_) {
        Exponent f(vars.size(), 0);
        for (std::size_t i = 0; i < e.size(); ++i)
            if (where[i] != SIZE_MAX)
                f[where[i]] = e[i];
        r.add_term(f, c);
    }
    return r;
}

int MPoly::valuation(unsigned long p) const
{
    int v = INT_MAX;
    for (const auto& [e, c] : terms_) v = std::min(v, c.valuation(p));
    return v;
}

MPoly MPoly::reduce_mod(const mpz_class& m) const
{
    MPoly r(vars_);
    for (const auto& [e, c] : terms_) {
        mpz_class inv;
        if (mpz_invert(inv.get_mpz_t(), c.denominator().get_mpz_t(), m.get_mpz_t()) == 0)
            fail(ErrorCode::NotDivisible, "coefficient denominator not invertible modulo " + m.get_str());
        mpz_class v = (c.numerator() * inv) % m;
        if (v < 0)
            v += m;
        r.add_term(e, Coefficient(v));
    }
    return r;
}

std::string MPoly::to_string() const
{
    if (terms_.empty())
        return "0";
    std::ostringstream out;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        mpq_class v = c.value();
        bool neg = v < 0;
        mpq_class a = abs(v);
        if (first)
            out << (neg ? "-" : "");
        else
            out << (neg ? " - " : " + ");
        first = false;
        bool unit = true;
        for (auto x : e) unit = unit && x == 0;
        bool wrote = false;
        if (a != 1 || unit) {
            out << a.get_str();
            wrote = true;
        }
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] == 0)
                continue;
            if (wrote)
                out << '*';
            out << vars_[i];
            if (e[i] > 1)
                out << '^' << e[i];
            wrote = true;
        }
    }
    return out.str();
}

nlohmann::json MPoly::to_json() const
{
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [e, c] : terms_)
        terms.push_back({{"coeff", c.to_string()}, {"exp", e}});
    return {{"variables", vars_}, {"terms", terms}};
}

MPoly MPoly::from_json(const nlohmann::json& j)
{
    try {
        MPoly r(j.at("variables").get<std::vector<std::string>>());
        for (const auto& t : j.at("terms")) {
            Coefficient c = t.at("coeff").is_string()
                                ? Coefficient::parse(t.at("coeff").get<std::string>())
                                : Coefficient(t.at("coeff").get<long>());
            r.add_term(t.at("exp").get<Exponent>(), c);
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("polynomial JSON: ") + e.what());
    }
}

// ------------------------------------------------------------------ parser

namespace {

class PolyParser {
public:
    PolyParser(std::string_view text, const std::vector<std::string>& vars)
        : s_(text), vars_(vars) {}

    MPoly parse()
    {
        MPoly r = expr();
        skip();
        if (pos_ != s_.size())
            error("unexpected '" + std::string(1, s_[pos_]) + "'");
        return r;
    }

private:
    std::string_view s_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;

    [[noreturn]] void error(const std::string& msg) const
    {
        fail(ErrorCode::Parse, "polynomial '" + std::string(s_) + "' at " +
                                   std::to_string(pos_) + ": " + msg);
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    MPoly expr()
    {
        MPoly r = term();
        for (;;) {
            if (eat('+'))
                r += term();
            else if (eat('-'))
                r -= term();
            else
                return r;
        }
    }

    MPoly term()
    {
        MPoly r = unary();
        for (;;) {
            if (eat('*')) {
                r *= unary();
            } else if (eat('/')) {
                MPoly d = unary();
                if (!d.is_constant() || d.is_zero())
                    error("division by a non-constant or zero");
                r *= Coefficient(1) / d.constant_term();
            } else {
                return r;
            }
        }
    }

    MPoly unary()
    {
        if (eat('-'))
            return -unary();
        if (eat('+'))
            return unary();
        MPoly base = primary();
        if (eat('^')) {
            skip();
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_)
                error("expected exponent");
            return base.pow(std::stoul(std::string(s_.substr(start, pos_ - start))));
        }
        return base;
    }

    MPoly primary()
    {
        skip();
        if (pos_ >= s_.size())
            error("unexpected end");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            MPoly r = expr();
            if (!eat(')'))
                error("expected ')'");
            return r;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            return MPoly::constant(Coefficient(mpz_class(std::string(s_.substr(start, pos_ - start)))), vars_);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string name(s_.substr(start, pos_ - start));
            auto it = std::find(vars_.begin(), vars_.end(), name);
            if (it == vars_.end())
                error("unknown variable '" + name + "'");
            return MPoly::variable(static_cast<std::size_t>(it - vars_.begin()), vars_);
        }
        error("unexpected '" + std::string(1, c) + "'");
    }
};

}  // namespace

MPoly MPoly::parse(std::string_view text, std::vector<std::string> vars)
{
    return PolyParser(text, vars).parse().with_variables(vars);
}

std::vector<std::string> parse_variable_list(std::string_view text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty())
                out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            if (out[i] == out[j])
                fail(ErrorCode::Parse, "duplicate variable '" + out[i] + "'");
    return out;
}

// -------------------------------------------------------- division by p

MPoly exact_div(const MPoly& q, const Coefficient& c, unsigned long p)
{
    int need = c.valuation(p);
    MPoly r(q.variables());
    for (const auto& [e, v] : q.terms()) {
        if (v.valuation(p) < need)
            fail(ErrorCode::NotDivisible,
                 "coefficient " + v.to_string() + " of " + q.to_string() + " is not divisible by " +
                     c.to_string());
        r.add_term(e, v / c);
    }
    return r;
}

MPoly exact_div_p(const MPoly& q, unsigned long p)
{
    return exact_div(q, Coefficient(static_cast<long>(p)), p);
}

// ---------------------------------------------------------------- RingMap

RingMap::RingMap(std::vector<std::string> source, std::vector<std::string> target,
                 std::vector<MPoly> images)
    : source_(std::move(source)), target_(std::move(target)), images_(std::move(images))
{
    if (images_.size() != source_.size())
        fail(ErrorCode::ArityMismatch, "ring map needs one image per source variable");
    for (auto& im : images_) im = im.with_variables(target_);
}

RingMap RingMap::identity(const std::vector<std::string>& vars)
{
    std::vector<MPoly> ims;
    for (std::size_t i = 0; i < vars.size(); ++i) ims.push_back(MPoly::variable(i, vars));
    return RingMap(vars, vars, std::move(ims));
}

MPoly RingMap::apply(const MPoly& q) const
{
    if (q.arity() != source_.size() && !(q.arity() == 0 && q.is_constant()))
        fail(ErrorCode::ArityMismatch, "polynomial arity " + std::to_string(q.arity()) +
                                           " does not match map source arity " +
                                           std::to_string(source_.size()));
    if (q.arity() == 0)
        return MPoly::constant(q.constant_term(), target_);
    if (q.variables() != source_)
        fail(ErrorCode::ArityMismatch, "polynomial variables do not match map source");
    if (source_.empty())
        return MPoly::constant(q.constant_term(), target_);
    MPoly r = q.substitute(images_);
    return r.with_variables(target_);
}

RingMap RingMap::compose(const RingMap& inner) const
{
    if (inner.target_ != source_)
        fail(ErrorCode::ArityMismatch, "composition of incompatible ring maps");
    std::vector<MPoly> ims;
    for (const auto& im : inner.images_) ims.push_back(apply(im));
    return RingMap(inner.source_, target_, std::move(ims));
}

nlohmann::json RingMap::to_json() const
{
    nlohmann::json ims = nlohmann::json::array();
    for (const auto& im : images_) ims.push_back(im.to_string());
    return {{"source", source_}, {"target", target_}, {"images", ims}};
}

MPoly apply_map(const RingMap& f, const MPoly& q) { return f.apply(q); }

}  // namespace dwitt::arith
