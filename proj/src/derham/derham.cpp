#include "dwitt/derham.hpp"

#include "dwitt/error.hpp"

#include <algorithm>
#include <bit>
#include <climits>
#include <sstream>

namespace dwitt::derham {

int popcount(Mask m) { return std::popcount(m); }

int wedge_sign(Mask a, Mask b)
{
    if (a & b)
        return 0;
    int inversions = 0;
    for (Mask r = a; r; r &= r - 1) {
        int i = std::countr_zero(r);
        inversions += std::popcount(b & ((Mask(1) << i) - 1));
    }
    return inversions % 2 ? -1 : 1;
}

// ------------------------------------------------------------------ Form

Form Form::scalar(const MPoly& a, std::size_t gens)
{
    Form f(a.variables(), gens);
    f.add(0, a);
    return f;
}

Form Form::generator(std::size_t j, std::vector<std::string> vars, std::size_t gens)
{
    Form f(vars, gens);
    f.add(Mask(1) << j, MPoly::constant(1, vars));
    return f;
}

Form Form::monomial(const MPoly& a, Mask mask, std::size_t gens)
{
    Form f(a.variables(), gens);
    f.add(mask, a);
    return f;
}

MPoly Form::coefficient(Mask m) const
{
    auto it = terms_.find(m);
    return it == terms_.end() ? MPoly(vars_) : it->second;
}

int Form::degree() const
{
    int d = -1;
    for (const auto& [m, a] : terms_) d = std::max(d, popcount(m));
    return d;
}

bool Form::is_homogeneous() const
{
    int d = degree();
    for (const auto& [m, a] : terms_)
        if (popcount(m) != d)
            return false;
    return true;
}

Form Form::component(int degree) const
{
    Form f(vars_, gens_);
    for (const auto& [m, a] : terms_)
        if (popcount(m) == degree)
            f.terms_.emplace(m, a);
    return f;
}

void Form::add(Mask m, const MPoly& a0)
{
    if (gens_ < 32 && (m >> gens_) != 0)
        fail(ErrorCode::ShapeMismatch, "wedge index beyond the number of generators");
    if (a0.is_zero())
        return;
    MPoly a = a0;
    if (a.variables() != vars_) {
        if (a.is_constant() && a.variables().empty())
            a = MPoly::constant(a.constant_term(), vars_);
        else if (terms_.empty() && vars_.empty())
            vars_ = a.variables();
        else
            a = a.with_variables(vars_);
    }
    auto [it, inserted] = terms_.emplace(m, a);
    if (!inserted) {
        it->second += a;
        if (it->second.is_zero())
            terms_.erase(it);
    }
}

Form Form::operator-() const
{
    Form f = *this;
    for (auto& [m, a] : f.terms_) a = -a;
    return f;
}

Form& Form::operator+=(const Form& o)
{
    if (gens_ == 0 && terms_.empty())
        gens_ = o.gens_;
    if (vars_.empty() && terms_.empty())
        vars_ = o.vars_;
    for (const auto& [m, a] : o.terms_) add(m, a);
    return *this;
}

Form operator*(const MPoly& a, const Form& f)
{
    Form r(f.vars_.empty() ? a.variables() : f.vars_, f.gens_);
    if (a.is_zero())
        return r;
    for (const auto& [m, c] : f.terms_) r.add(m, a * c);
    return r;
}

Form operator*(const Coefficient& c, const Form& f)
{
    Form r(f.vars_, f.gens_);
    if (c.is_zero())
        return r;
    for (const auto& [m, a] : f.terms_) r.add(m, a * c);
    return r;
}

bool operator==(const Form& a, const Form& b)
{
    if (a.terms_.size() != b.terms_.size())
        return false;
    for (const auto& [m, x] : a.terms_) {
        auto it = b.terms_.find(m);
        if (it == b.terms_.end() || !(it->second == x))
            return false;
    }
    return true;
}

Form Form::wedge(const Form& o) const
{
    Form r(vars_.empty() ? o.vars_ : vars_, std::max(gens_, o.gens_));
    for (const auto& [ma, a] : terms_)
        for (const auto& [mb, b] : o.terms_) {
            int s = wedge_sign(ma, mb);
            if (s == 0)
                continue;
            MPoly c = a * b;
            r.add(ma | mb, s > 0 ? c : -c);
        }
    return r;
}

bool Form::is_p_integral(unsigned long p) const { return valuation(p) >= 0; }

int Form::valuation(unsigned long p) const
{
    int v = INT_MAX;
    for (const auto& [m, a] : terms_) v = std::min(v, a.valuation(p));
    return v;
}

std::string Form::to_string(const std::vector<std::string>& names) const
{
    if (terms_.empty())
        return "0";
    std::ostringstream out;
    bool first = true;
    // descending exterior degree, then mask order
    std::vector<std::pair<Mask, const MPoly*>> order;
    for (const auto& [m, a] : terms_) order.emplace_back(m, &a);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& x, const auto& y) { return popcount(x.first) < popcount(y.first); });
    for (const auto& [m, a] : order) {
        std::string coeff = a->to_string();
        std::string wedge;
        for (std::size_t j = 0; j < gens_; ++j)
            if (m & (Mask(1) << j))
                wedge += (wedge.empty() ? "" : "^") + (j < names.size() ? names[j] : "e" + std::to_string(j));
        std::string term;
        if (wedge.empty())
            term = coeff;
        else if (coeff == "1")
            term = wedge;
        else if (coeff == "-1")
            term = "-" + wedge;
        else if (a->size() == 1)
            term = coeff + "*" + wedge;
        else
            term = "(" + coeff + ")*" + wedge;
        if (!first) {
            if (term[0] == '-')
                out << " - " << term.substr(1);
            else
                out << " + " << term;
        } else {
            out << term;
        }
        first = false;
    }
    return out.str();
}

nlohmann::json Form::to_json() const
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [m, a] : terms_) {
        nlohmann::json idx = nlohmann::json::array();
        for (std::size_t j = 0; j < gens_; ++j)
            if (m & (Mask(1) << j))
                idx.push_back(j);
        out.push_back({{"coeff", a.to_string()}, {"wedge", idx}});
    }
    return out;
}

Form Form::from_json(const nlohmann::json& j, const std::vector<std::string>& vars, std::size_t gens)
{
    Form f(vars, gens);
    for (const auto& t : j) {
        Mask m = 0;
        std::vector<std::size_t> idx = t.at("wedge").get<std::vector<std::size_t>>();
        // reorder into increasing order, tracking the sign
        int sign = 1;
        for (std::size_t i : idx) {
            if (i >= gens)
                fail(ErrorCode::ShapeMismatch, "wedge index out of range");
            Mask b = Mask(1) << i;
            int s = wedge_sign(m, b);
            if (s == 0) {
                m = 0;
                sign = 0;
                break;
            }
            sign *= s;
            m |= b;
        }
        if (sign == 0)
            continue;
        MPoly a = MPoly::parse(t.at("coeff").get<std::string>(), vars);
        f.add(m, sign > 0 ? a : -a);
    }
    return f;
}

// ------------------------------------------------------------ derivation

ExteriorDerivation::ExteriorDerivation(std::vector<std::string> vars, std::size_t gens,
                                       std::vector<Form> on_vars, std::vector<Form> on_gens)
    : vars_(std::move(vars)), gens_(gens), on_vars_(std::move(on_vars)), on_gens_(std::move(on_gens))
{
    if (on_vars_.size() != vars_.size() || on_gens_.size() != gens_)
        fail(ErrorCode::ArityMismatch, "derivation data does not match the ring");
    for (const auto& f : on_vars_)
        if (!f.is_zero() && (!f.is_homogeneous() || f.degree() != 1))
            fail(ErrorCode::ShapeMismatch, "derivation of a variable must be a 1-form");
    for (const auto& f : on_gens_)
        if (!f.is_zero() && (!f.is_homogeneous() || f.degree() != 2))
            fail(ErrorCode::ShapeMismatch, "derivation of a generator must be a 2-form");
}

Form ExteriorDerivation::of_scalar(const MPoly& a0) const
{
    MPoly a = a0.variables() == vars_ ? a0 : a0.with_variables(vars_);
    Form r(vars_, gens_);
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        MPoly da = a.derivative(i);
        if (!da.is_zero())
            r += da * on_vars_[i];
    }
    return r;
}

Form ExteriorDerivation::of_mask(Mask m) const
{
    if (m == 0)
        return Form(vars_, gens_);
    int j = std::countr_zero(m);
    Mask rest = m & (m - 1);
    Form ej = Form::generator(j, vars_, gens_);
    Form erest = Form::monomial(MPoly::constant(1, vars_), rest, gens_);
    // D(e_j ^ rest) = D(e_j) ^ rest - e_j ^ D(rest)
    return on_gens_[j].wedge(erest) - ej.wedge(of_mask(rest));
}

Form ExteriorDerivation::apply(const Form& f) const
{
    Form r(vars_, gens_);
    std::map<Mask, Form> cache;
    for (const auto& [m, a] : f.terms()) {
        Form em = Form::monomial(MPoly::constant(1, vars_), m, gens_);
        r += of_scalar(a).wedge(em);
        auto it = cache.find(m);
        if (it == cache.end())
            it = cache.emplace(m, of_mask(m)).first;
        r += a * it->second;
    }
    return r;
}

// ------------------------------------------------------------- Frobenius

FormFrobenius::FormFrobenius(arith::RingMap phi, std::vector<Form> on_gens)
    : phi_(std::move(phi)), on_gens_(std::move(on_gens))
{
}

Form FormFrobenius::apply(const Form& f) const
{
    const auto& vars = phi_.target();
    std::size_t gens = on_gens_.size();
    Form r(vars, gens);
    std::map<Mask, Form> cache;
    for (const auto& [m, a] : f.terms()) {
        auto it = cache.find(m);
        if (it == cache.end()) {
            Form w = Form::scalar(MPoly::constant(1, vars), gens);
            for (std::size_t j = 0; j < gens; ++j)
                if (m & (Mask(1) << j))
                    w = w.wedge(on_gens_[j]);
            it = cache.emplace(m, w).first;
        }
        r += phi_.apply(a) * it->second;
    }
    return r;
}

// ----------------------------------------------------------- de Rham

DeRhamComplex::DeRhamComplex(std::vector<std::string> vars) : vars_(std::move(vars))
{
    if (vars_.size() > 16)
        fail(ErrorCode::BudgetExceeded, "too many variables for the exterior algebra");
    std::size_t n = vars_.size();
    std::vector<Form> on_vars, on_gens;
    for (std::size_t i = 0; i < n; ++i) {
        on_vars.push_back(Form::generator(i, vars_, n));
        on_gens.push_back(Form(vars_, n));
    }
    der_ = ExteriorDerivation(vars_, n, on_vars, on_gens);
}

std::size_t DeRhamComplex::rank(int i) const
{
    if (i < 0 || static_cast<std::size_t>(i) > arity())
        return 0;
    return arith::binomial(arity(), i).get_ui();
}

std::vector<std::string> DeRhamComplex::generator_names() const
{
    std::vector<std::string> names;
    for (const auto& v : vars_) names.push_back("d" + v);
    return names;
}

Form DeRhamComplex::dx(std::size_t i) const { return Form::generator(i, vars_, arity()); }

namespace {

void exponents_up_to(std::size_t n, unsigned bound, arith::Exponent& cur, std::size_t pos,
                     std::vector<arith::Exponent>& out)
{
    if (pos == n) {
        out.push_back(cur);
        return;
    }
    unsigned used = 0;
    for (std::size_t i = 0; i < pos; ++i) used += cur[i];
    for (unsigned e = 0; used + e <= bound; ++e) {
        cur[pos] = e;
        exponents_up_to(n, bound, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

}  // namespace

std::vector<Form> DeRhamComplex::monomial_basis(int degree, unsigned poly_degree) const
{
    std::vector<Form> out;
    std::size_t n = arity();
    std::vector<arith::Exponent> exps;
    arith::Exponent cur(n, 0);
    exponents_up_to(n, poly_degree, cur, 0, exps);
    for (Mask m = 0; m < (Mask(1) << n); ++m) {
        if (popcount(m) != degree)
            continue;
        for (const auto& e : exps) out.push_back(Form::monomial(MPoly::monomial(1, e, vars_), m, n));
    }
    return out;
}

nlohmann::json DeRhamComplex::to_json() const
{
    nlohmann::json ranks = nlohmann::json::array();
    for (std::size_t i = 0; i <= arity(); ++i) ranks.push_back(rank(static_cast<int>(i)));
    nlohmann::json d = nlohmann::json::object();
    for (std::size_t i = 0; i < arity(); ++i) d[vars_[i]] = dx(i).to_string(generator_names());
    return {{"variables", vars_}, {"generators", generator_names()}, {"ranks", ranks}, {"d", d}};
}

DeRhamComplex build_de_rham(const std::vector<std::string>& vars) { return DeRhamComplex(vars); }

DieudonneDeRham frobenius_on_forms(const DeRhamComplex& C, const witt::DeltaRing& R)
{
    if (R.variables() != C.variables())
        fail(ErrorCode::ArityMismatch, "lift and de Rham complex live on different rings");
    const auto& vars = C.variables();
    std::vector<Form> on_gens;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        MPoly x = MPoly::variable(i, vars);
        on_gens.push_back(x.pow(R.p() - 1) * C.dx(i) + C.d(R.delta(x)));
    }
    return DieudonneDeRham{C, R, FormFrobenius(R.lift(), on_gens)};
}

nlohmann::json DieudonneDeRham::to_json() const
{
    nlohmann::json F = nlohmann::json::object();
    auto names = complex.generator_names();
    for (std::size_t i = 0; i < complex.arity(); ++i) {
        F[complex.variables()[i]] = lift.lift().images()[i].to_string();
        F[names[i]] = this->F.on_generators()[i].to_string(names);
    }
    return {{"p", p()}, {"complex", complex.to_json()}, {"frobenius", F}};
}

// ------------------------------------------------------------ DA maps

Form DAMap::apply(const Form& w) const
{
    const auto& tv = f.target();
    Form r(tv, target_gens);
    for (const auto& [m, a] : w.terms()) {
        Form img = Form::scalar(f.apply(a), target_gens);
        for (std::size_t j = 0; j < on_differentials.size(); ++j)
            if (m & (Mask(1) << j))
                img = img.wedge(on_differentials[j]);
        r += img;
    }
    return r;
}

nlohmann::json DAMap::to_json(const std::vector<std::string>& names) const
{
    nlohmann::json out = nlohmann::json::object();
    for (std::size_t i = 0; i < f.source().size(); ++i) {
        out[f.source()[i]] = f.images()[i].to_string();
        out["d" + f.source()[i]] = on_differentials[i].to_string(names);
    }
    return out;
}

nlohmann::json MapCheck::to_json() const { return {{"pass", pass}, {"failures", failures}}; }

DAMap universal_da_map(const witt::DeltaRing& R, const DieudonneDeRham& target, const arith::RingMap& f)
{
    if (f.source() != R.variables())
        fail(ErrorCode::ArityMismatch, "map source does not match the lift's ring");
    if (f.target() != target.complex.variables())
        fail(ErrorCode::ArityMismatch, "map target does not match the target complex");
    if (R.p() != target.p())
        fail(ErrorCode::FrobeniusMismatch, "source and target use different primes");
    for (std::size_t i = 0; i < f.source().size(); ++i) {
        MPoly x = MPoly::variable(i, f.source());
        MPoly lhs = f.apply(R.phi(x));
        MPoly rhs = target.lift.phi(f.images()[i]);
        if (lhs != rhs)
            fail(ErrorCode::FrobeniusMismatch, "f(phi(" + f.source()[i] + ")) = " + lhs.to_string() +
                                                   " but phi(f(" + f.source()[i] + ")) = " + rhs.to_string());
    }
    DAMap m{f, {}, target.complex.arity()};
    for (const auto& img : f.images()) m.on_differentials.push_back(target.complex.d(img));
    return m;
}

MapCheck check_da_map(const DAMap& m, const DieudonneDeRham& source, const DieudonneDeRham& target)
{
    MapCheck out;
    const auto& C = source.complex;
    auto names = C.generator_names();
    std::vector<Form> gens;
    for (std::size_t i = 0; i < C.arity(); ++i) {
        gens.push_back(C.scalar(MPoly::variable(i, C.variables())));
        gens.push_back(C.dx(i));
    }
    std::vector<Form> samples = gens;
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i; j < gens.size(); ++j) samples.push_back(gens[i].wedge(gens[j]));
    for (const auto& w : samples) {
        if (m.apply(C.d(w)) != target.complex.d(m.apply(w)))
            out.failures.push_back("d does not commute on " + w.to_string(names));
        if (m.apply(source.frobenius(w)) != target.frobenius(m.apply(w)))
            out.failures.push_back("F does not commute on " + w.to_string(names));
    }
    out.pass = out.failures.empty();
    return out;
}

}  // namespace dwitt::derham
