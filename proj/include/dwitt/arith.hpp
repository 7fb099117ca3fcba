#pragma once

// Exact coefficients and sparse multivariate polynomials.
//
// Coefficients are rationals; the ring Z_(p) is the subring of p-integral
// ones and is enforced at the points where it matters (lift validation,
// exact division by p, ghost inversion). Polynomials keep their terms in
// graded lexicographic order, largest first, so printed output is stable.

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dwitt::arith {

using Integer = mpz_class;

class Coefficient {
public:
    Coefficient() = default;
    Coefficient(long v) : q_(v) {}
    Coefficient(const mpz_class& v) : q_(v) {}
    Coefficient(const mpq_class& v) : q_(v) { q_.canonicalize(); }
    Coefficient(const mpz_class& num, const mpz_class& den);

    static Coefficient parse(std::string_view text);

    const mpq_class& value() const { return q_; }
    mpz_class numerator() const { return q_.get_num(); }
    mpz_class denominator() const { return q_.get_den(); }

    bool is_zero() const { return sgn(q_) == 0; }
    bool is_one() const { return q_ == 1; }
    bool is_integer() const { return q_.get_den() == 1; }

    // p-adic valuation; zero has valuation INT_MAX.
    int valuation(unsigned long p) const;
    bool is_p_integral(unsigned long p) const { return valuation(p) >= 0; }

    std::string to_string() const;

    Coefficient operator-() const { return Coefficient(mpq_class(-q_)); }
    Coefficient& operator+=(const Coefficient& o) { q_ += o.q_; return *this; }
    Coefficient& operator-=(const Coefficient& o) { q_ -= o.q_; return *this; }
    Coefficient& operator*=(const Coefficient& o) { q_ *= o.q_; return *this; }
    Coefficient& operator/=(const Coefficient& o);

    friend Coefficient operator+(Coefficient a, const Coefficient& b) { return a += b; }
    friend Coefficient operator-(Coefficient a, const Coefficient& b) { return a -= b; }
    friend Coefficient operator*(Coefficient a, const Coefficient& b) { return a *= b; }
    friend Coefficient operator/(Coefficient a, const Coefficient& b) { return a /= b; }
    friend bool operator==(const Coefficient& a, const Coefficient& b) { return a.q_ == b.q_; }
    friend bool operator<(const Coefficient& a, const Coefficient& b) { return a.q_ < b.q_; }

private:
    mpq_class q_{0};
};

int valuation(const mpz_class& n, unsigned long p);
mpz_class ipow(const mpz_class& base, unsigned long e);
bool is_prime(unsigned long n);
mpz_class binomial(unsigned long n, unsigned long k);

using Exponent = std::vector<std::uint32_t>;

// Graded lex, descending: higher total degree first, then lex with x0 > x1 > ...
struct GrlexGreater {
    bool operator()(const Exponent& a, const Exponent& b) const;
};

class MPoly {
public:
    using TermMap = std::map<Exponent, Coefficient, GrlexGreater>;

    MPoly() = default;
    explicit MPoly(std::vector<std::string> vars) : vars_(std::move(vars)) {}

    static MPoly constant(const Coefficient& c, std::vector<std::string> vars = {});
    static MPoly variable(std::size_t index, std::vector<std::string> vars);
    static MPoly monomial(const Coefficient& c, Exponent e, std::vector<std::string> vars);
    static MPoly parse(std::string_view text, std::vector<std::string> vars);

    const std::vector<std::string>& variables() const { return vars_; }
    std::size_t arity() const { return vars_.size(); }
    const TermMap& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Coefficient constant_term() const;
    Coefficient coefficient(const Exponent& e) const;
    long total_degree() const;

    void add_term(const Exponent& e, const Coefficient& c);

    MPoly operator-() const;
    MPoly& operator+=(const MPoly& o);
    MPoly& operator-=(const MPoly& o);
    MPoly& operator*=(const MPoly& o);
    MPoly& operator*=(const Coefficient& c);
    friend MPoly operator+(MPoly a, const MPoly& b) { return a += b; }
    friend MPoly operator-(MPoly a, const MPoly& b) { return a -= b; }
    friend MPoly operator*(const MPoly& a, const MPoly& b);
    friend MPoly operator*(MPoly a, const Coefficient& c) { return a *= c; }
    friend MPoly operator*(const Coefficient& c, MPoly a) { return a *= c; }
    friend bool operator==(const MPoly& a, const MPoly& b);

    MPoly pow(unsigned long e) const;
    MPoly derivative(std::size_t var) const;
    Coefficient evaluate(const std::vector<Coefficient>& point) const;
    // Simultaneous substitution x_i -> images[i]; all images share a variable list.
    MPoly substitute(const std::vector<MPoly>& images) const;
    // Same polynomial viewed over a larger (or reordered) variable list.
    MPoly with_variables(const std::vector<std::string>& vars) const;

    // Smallest p-adic valuation among coefficients (INT_MAX for zero).
    int valuation(unsigned long p) const;
    bool is_p_integral(unsigned long p) const { return valuation(p) >= 0; }
    // Coefficientwise reduction into [0, m) for p-integral coefficients.
    MPoly reduce_mod(const mpz_class& m) const;

    std::string to_string() const;
    nlohmann::json to_json() const;
    static MPoly from_json(const nlohmann::json& j);

private:
    std::vector<std::string> vars_;
    TermMap terms_;

    void align_with(const MPoly& other);
};

// Throws NotDivisible unless every coefficient has p-valuation >= 1.
MPoly exact_div_p(const MPoly& q, unsigned long p);
MPoly exact_div(const MPoly& q, const Coefficient& c, unsigned long p);

class RingMap {
public:
    RingMap() = default;
    RingMap(std::vector<std::string> source, std::vector<std::string> target,
            std::vector<MPoly> images);

    static RingMap identity(const std::vector<std::string>& vars);

    const std::vector<std::string>& source() const { return source_; }
    const std::vector<std::string>& target() const { return target_; }
    const std::vector<MPoly>& images() const { return images_; }

    MPoly apply(const MPoly& q) const;
    RingMap compose(const RingMap& inner) const;  // this o inner

    nlohmann::json to_json() const;

private:
    std::vector<std::string> source_;
    std::vector<std::string> target_;
    std::vector<MPoly> images_;
};

MPoly apply_map(const RingMap& f, const MPoly& q);

std::vector<std::string> parse_variable_list(std::string_view text);

}  // namespace dwitt::arith
