#pragma once

// Exterior algebras over polynomial rings, de Rham complexes and the
// Frobenius induced on forms by a lift.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dwitt/arith.hpp"
#include "dwitt/witt.hpp"

namespace dwitt::derham {

using arith::Coefficient;
using arith::MPoly;

using Mask = std::uint32_t;

// sign of e_a ^ e_b relative to e_{a|b}; 0 when the supports overlap.
int wedge_sign(Mask a, Mask b);
int popcount(Mask m);

// Element of A (x) Lambda(e_0..e_{m-1}), A = Q[vars] with Z_(p) coefficients.
class Form {
public:
    Form() = default;
    Form(std::vector<std::string> vars, std::size_t gens) : vars_(std::move(vars)), gens_(gens) {}

    static Form scalar(const MPoly& a, std::size_t gens);
    static Form generator(std::size_t j, std::vector<std::string> vars, std::size_t gens);
    static Form monomial(const MPoly& a, Mask mask, std::size_t gens);

    const std::vector<std::string>& variables() const { return vars_; }
    std::size_t generators() const { return gens_; }
    const std::map<Mask, MPoly>& terms() const { return terms_; }
    MPoly coefficient(Mask m) const;

    bool is_zero() const { return terms_.empty(); }
    // Highest exterior degree present, -1 for zero.
    int degree() const;
    bool is_homogeneous() const;
    Form component(int degree) const;

    void add(Mask m, const MPoly& a);
    Form operator-() const;
    Form& operator+=(const Form& o);
    Form& operator-=(const Form& o) { return *this += -o; }
    friend Form operator+(Form a, const Form& b) { return a += b; }
    friend Form operator-(Form a, const Form& b) { return a -= b; }
    friend Form operator*(const MPoly& a, const Form& f);
    friend Form operator*(const Coefficient& c, const Form& f);
    friend bool operator==(const Form& a, const Form& b);

    Form wedge(const Form& o) const;
    bool is_p_integral(unsigned long p) const;
    int valuation(unsigned long p) const;

    std::string to_string(const std::vector<std::string>& gen_names) const;
    // [{"coeff": poly, "wedge": [indices]}]
    nlohmann::json to_json() const;
    static Form from_json(const nlohmann::json& j, const std::vector<std::string>& vars, std::size_t gens);

private:
    std::vector<std::string> vars_;
    std::size_t gens_ = 0;
    std::map<Mask, MPoly> terms_;
};

// Degree-one derivation D on A (x) Lambda(M), determined by D(x_i) in Lambda^1
// and D(e_j) in Lambda^2, extended by the graded Leibniz rule.
class ExteriorDerivation {
public:
    ExteriorDerivation() = default;
    ExteriorDerivation(std::vector<std::string> vars, std::size_t gens, std::vector<Form> on_vars,
                       std::vector<Form> on_gens);

    const std::vector<std::string>& variables() const { return vars_; }
    std::size_t generators() const { return gens_; }
    const std::vector<Form>& on_variables() const { return on_vars_; }
    const std::vector<Form>& on_generators() const { return on_gens_; }

    Form of_scalar(const MPoly& a) const;
    Form apply(const Form& f) const;

private:
    std::vector<std::string> vars_;
    std::size_t gens_ = 0;
    std::vector<Form> on_vars_, on_gens_;
    Form of_mask(Mask m) const;
};

// Graded ring endomorphism: phi on A, semilinear images of the generators.
class FormFrobenius {
public:
    FormFrobenius() = default;
    FormFrobenius(arith::RingMap phi, std::vector<Form> on_gens);

    const arith::RingMap& phi() const { return phi_; }
    const std::vector<Form>& on_generators() const { return on_gens_; }
    Form apply(const Form& f) const;

private:
    arith::RingMap phi_;
    std::vector<Form> on_gens_;
};

class DeRhamComplex {
public:
    explicit DeRhamComplex(std::vector<std::string> vars);

    const std::vector<std::string>& variables() const { return vars_; }
    std::size_t arity() const { return vars_.size(); }
    // Rank of Omega^i as a free A-module.
    std::size_t rank(int i) const;
    std::vector<std::string> generator_names() const;

    Form d(const Form& f) const { return der_.apply(f); }
    Form d(const MPoly& a) const { return der_.of_scalar(a); }
    Form dx(std::size_t i) const;
    Form scalar(const MPoly& a) const { return Form::scalar(a, arity()); }
    const ExteriorDerivation& derivation() const { return der_; }

    // x^a dx_I with |a| <= poly_degree, over all I of size `degree`.
    std::vector<Form> monomial_basis(int degree, unsigned poly_degree) const;

    nlohmann::json to_json() const;

private:
    std::vector<std::string> vars_;
    ExteriorDerivation der_;
};

DeRhamComplex build_de_rham(const std::vector<std::string>& vars);

struct DieudonneDeRham {
    DeRhamComplex complex;
    witt::DeltaRing lift;
    FormFrobenius F;

    unsigned long p() const { return lift.p(); }
    Form frobenius(const Form& f) const { return F.apply(f); }
    nlohmann::json to_json() const;
};

// F(dx) = x^(p-1) dx + d(delta x), extended as a graded ring map.
DieudonneDeRham frobenius_on_forms(const DeRhamComplex& C, const witt::DeltaRing& R);

struct DAMap {
    arith::RingMap f;
    std::vector<Form> on_differentials;  // images of dx_i
    std::size_t target_gens = 0;

    Form apply(const Form& w) const;
    nlohmann::json to_json(const std::vector<std::string>& target_gen_names) const;
};

struct MapCheck {
    bool pass = true;
    std::vector<std::string> failures;
    nlohmann::json to_json() const;
};

// The Dieudonne-algebra map Omega_R -> target extending f; FrobeniusMismatch
// unless f o phi_R = phi_T o f on generators.
DAMap universal_da_map(const witt::DeltaRing& R, const DieudonneDeRham& target, const arith::RingMap& f);
// Commutation with d and F on x_i, dx_i and their pairwise products.
MapCheck check_da_map(const DAMap& m, const DieudonneDeRham& source, const DieudonneDeRham& target);

}  // namespace dwitt::derham
