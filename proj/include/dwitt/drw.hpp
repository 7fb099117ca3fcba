#pragma once

// Weight-bounded truncated de Rham-Witt complexes of F_p[x_1..x_d].
//
// Every weight component is modelled inside the rational forms x^w dlog x_I,
// w in Z[1/p]^d, I a subset of supp(w): an element is its coordinate vector on
// these basis forms. V^j[x^a] has coordinate p^j on x^(a/p^j), F is the identity
// on coordinates (weight w -> p w), V multiplies by p (weight w -> w/p) and d is
// wedging with w. A component of W_r Omega^i is a lattice of such vectors modulo
// the images of V^r and d V^r.

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "dwitt/dieudonne.hpp"
#include "dwitt/matrix.hpp"
#include "dwitt/witt.hpp"

namespace dwitt::drw {

using arith::IntMatrix;
using dieudonne::PresentedModule;
using witt::LawReport;
using witt::LawResult;

// F_p[vars]; parsed from "F2[x]", "F3[x,y]" or "F5".
struct PolyRing {
    unsigned long p = 2;
    std::vector<std::string> vars;

    std::size_t arity() const { return vars.size(); }
    std::string to_string() const;
    static PolyRing parse(const std::string& text);
};

// A weight in Z[1/p]^d, stored as num / p^e with e minimal.
struct Weight {
    std::vector<long> num;
    unsigned e = 0;

    static Weight make(std::vector<long> num, unsigned e, unsigned long p);
    mpq_class total(unsigned long p) const;
    mpq_class at(std::size_t v, unsigned long p) const;
    Weight times_p(unsigned long p) const;
    Weight over_p(unsigned long p) const;
    Weight plus(const Weight& o, unsigned long p) const;
    bool is_zero() const;
    unsigned mask() const;  // support
    std::string to_string(unsigned long p) const;
    friend bool operator<(const Weight& a, const Weight& b);
    friend bool operator==(const Weight& a, const Weight& b);
};

// Weights with total <= D and denominator at most p^max_e, ordered by total.
std::vector<Weight> weights_up_to(const PolyRing& R, unsigned D, unsigned max_e);

// ------------------------------------------------------------ W_n(R)

struct WittGenerator {
    unsigned j = 0;             // V^j
    std::vector<long> monomial;  // exponent of [x]
    Weight weight;
    std::string name;
};

struct WittProduct {
    std::size_t left = 0, right = 0, result = 0;
    mpz_class coefficient;
};

struct WittPolyPresentation {
    PolyRing R;
    unsigned n = 1;
    unsigned D = 0;
    std::vector<WittGenerator> generators;
    IntMatrix relations;  // columns are relations among the generators
    std::vector<WittProduct> products;

    // Presented module on the generators of one weight.
    PresentedModule component(const Weight& w) const;
    std::vector<Weight> weights() const;
    nlohmann::json to_json() const;
};

// Generators V^j[m] with j < n and weight(m)/p^j <= D; relations
// V^j[m^p] = p V^(j-1)[m] and p^(n-j) V^j[m] = 0; products from x V(y) = V(F(x) y).
WittPolyPresentation witt_ring_presentation(const PolyRing& R, unsigned n, unsigned D);

// ------------------------------------------------------- truncations

struct ComponentKey {
    unsigned level = 1;
    unsigned degree = 0;
    Weight weight;
    friend bool operator<(const ComponentKey& a, const ComponentKey& b)
    {
        return std::tie(a.level, a.degree, a.weight) < std::tie(b.level, b.degree, b.weight);
    }
    friend bool operator==(const ComponentKey& a, const ComponentKey& b)
    {
        return a.level == b.level && a.degree == b.degree && a.weight == b.weight;
    }
};

struct Component {
    IntMatrix gens;   // columns: generators in form coordinates
    std::vector<std::string> names;
    IntMatrix rel_v;  // images of V^r
    IntMatrix rel_dv; // images of d V^r
    PresentedModule module;  // on the generators
    arith::SmithDecomposition smith;  // of gens, for coordinates
    std::size_t rank() const { return gens.rows(); }
};

enum class Route { Direct, Saturation };

struct DRWTruncation {
    PolyRing R;
    unsigned n = 1;
    unsigned D = 0;
    unsigned top = 2;  // levels 1..top are stored, top = n + 1
    Route route = Route::Direct;
    std::map<ComponentKey, Component> components;
    // Structure maps in generator coordinates, keyed by source component.
    std::map<ComponentKey, IntMatrix> d, F, V;

    const Component* find(const ComponentKey& k) const;
    // Coordinates of a form vector on the generators of k, if it lies in their span.
    std::optional<std::vector<mpz_class>> coordinates(const ComponentKey& k, const std::vector<mpz_class>& form) const;
    std::vector<mpz_class> to_form(const ComponentKey& k, const std::vector<mpz_class>& coords) const;
    bool is_zero_in(const ComponentKey& k, const std::vector<mpz_class>& coords) const;

    // Lengths of W_n Omega^i per weight (level n only).
    std::map<Weight, long> lengths(unsigned degree) const;
    std::vector<long> degree_lengths() const;
    nlohmann::json to_json() const;
};

constexpr std::size_t default_span_budget = 200000;
constexpr unsigned default_headroom = 2;
constexpr unsigned default_saturation_cap = 8;

struct DirectOptions {
    std::size_t span_budget = default_span_budget;
};

DRWTruncation drw_truncated(const PolyRing& R, unsigned n, unsigned D, const DirectOptions& opt = {});

struct SaturationOptions {
    unsigned headroom = default_headroom;
    unsigned iter_cap = default_saturation_cap;
    std::size_t span_budget = default_span_budget;
};

DRWTruncation drw_via_saturation(const PolyRing& R, unsigned n, unsigned D, const SaturationOptions& opt = {});

// Removes one column of the d V^r relations of a component and recomputes it.
DRWTruncation drop_relation(const DRWTruncation& T, const ComponentKey& k, std::size_t column);

struct RouteComparison {
    bool invariants_match = true;
    bool maps_match = true;
    std::vector<std::string> mismatches;
    bool pass() const { return invariants_match && maps_match; }
    nlohmann::json to_json() const;
};

RouteComparison compare_routes(const DRWTruncation& a, const DRWTruncation& b);

// F d V = d, F V = p, V F = p, d F = p F d, F d[x] = [x]^(p-1) d[x],
// x V(y) = V(F(x) y), V(x dy) = V(x) dV(y), (d[x]) V(y) = V([x]^(p-1) d[x] y),
// and that d, F, V descend to the quotients.
LawReport drw_identity_suite(const DRWTruncation& T, std::size_t product_samples = 64, unsigned seed = 1);

}  // namespace dwitt::drw
