#pragma once

// Dieudonne complexes of finite free Z-modules: the decalage eta_p, the
// saturation tower, V, the quotients W_r and a finite strictness probe.
// Dieudonne algebras are checked through a sampled graded-ring view.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dwitt/derham.hpp"
#include "dwitt/matrix.hpp"
#include "dwitt/witt.hpp"

namespace dwitt::dieudonne {

using arith::IntMatrix;
using witt::LawReport;
using witt::LawResult;

// Degrees min_degree .. min_degree + ranks.size() - 1. d[k] maps degree
// min_degree + k to the next one (rows = target rank); F[k] is square.
// Column vectors throughout. precision == 0 means exact over Z, otherwise
// every module is (Z/p^precision)^rank and the matrices are integer lifts.
struct DieudonneComplex {
    unsigned long p = 2;
    int min_degree = 0;
    std::vector<std::size_t> ranks;
    std::vector<IntMatrix> d;
    std::vector<IntMatrix> F;
    unsigned precision = 0;

    std::size_t length() const { return ranks.size(); }
    int max_degree() const { return min_degree + static_cast<int>(ranks.size()) - 1; }
    // Rank in an arbitrary degree (0 outside the support).
    std::size_t rank(int n) const;
    bool is_zero() const;

    static DieudonneComplex zero(unsigned long p);
    // Fills missing d/F with zero/identity matrices of the right shape.
    static DieudonneComplex make(unsigned long p, int min_degree, std::vector<std::size_t> ranks,
                                 std::vector<IntMatrix> d, std::vector<IntMatrix> F, unsigned precision = 0);

    void validate_shapes() const;
    nlohmann::json to_json() const;
    static DieudonneComplex from_json(const nlohmann::json& j);
};

// d o d = 0 and d F = p F d, entrywise (mod p^precision when set).
LawReport check_dieudonne(const DieudonneComplex& M);

struct EtaResult {
    DieudonneComplex complex;
    // Basis of (eta_p M)^n divided by p^n, as columns in M^n.
    std::vector<IntMatrix> basis;
    // alpha_n : M^n -> (eta_p M)^n in the new basis.
    std::vector<IntMatrix> alpha;
};

EtaResult eta_p(const DieudonneComplex& M);
// Only the lattices {y : d y in p M} and the rescaled differential.
std::vector<IntMatrix> eta_p_lattices(const std::vector<std::size_t>& ranks, const std::vector<IntMatrix>& d,
                                      unsigned long p);

bool is_saturated(const DieudonneComplex& M);

struct SaturationTower {
    std::vector<DieudonneComplex> stages;
    std::vector<std::vector<IntMatrix>> maps;  // maps[k] : stages[k] -> stages[k+1]
    std::optional<std::size_t> stabilized_at;

    const DieudonneComplex& result() const { return stages.at(stabilized_at.value_or(stages.size() - 1)); }
    nlohmann::json to_json() const;
};

constexpr std::size_t default_saturation_cap = 8;

// IterationLimit when the cap is hit; saturation_tower returns the partial tower instead.
SaturationTower saturate(const DieudonneComplex& M, std::size_t max_iter = default_saturation_cap);
SaturationTower saturation_tower(const DieudonneComplex& M, std::size_t max_iter = default_saturation_cap);

// V_n = p F_n^{-1}; NotSaturated unless M is saturated.
std::vector<IntMatrix> solve_verschiebung(const DieudonneComplex& M);

// Z^generators / column span of relations.
struct PresentedModule {
    std::size_t generators = 0;
    IntMatrix relations;
    std::vector<mpz_class> invariants;  // nontrivial invariant factors, 0 for free summands

    // log_p of the order; -1 when infinite.
    long length(unsigned long p) const;
    nlohmann::json to_json(unsigned long p) const;
};

PresentedModule present(const IntMatrix& relations);

// W_r M = M / (V^r M + d V^r M). d acts W_r -> W_r, F acts W_r -> W_{r-1},
// V acts W_r -> W_{r+1}; all three act on generators by the matrices of M.
struct WrQuotient {
    unsigned r = 1;
    int min_degree = 0;
    std::vector<PresentedModule> modules;
    std::vector<IntMatrix> d, F, V;

    std::vector<long> lengths(unsigned long p) const;
    nlohmann::json to_json(unsigned long p) const;
};

WrQuotient wr_quotient(const DieudonneComplex& M, unsigned r);
// Relations of W_r in one degree, given V.
IntMatrix wr_relations(const DieudonneComplex& M, const std::vector<IntMatrix>& V, unsigned r, std::size_t k);

struct StrictnessReport {
    bool strict = false;
    std::string verdict;
    unsigned r_max = 0;
    // lengths[r-1][k]: log_p |W_r^{min_degree+k}|, -1 if infinite
    std::vector<std::vector<long>> lengths;
    // log_p of ker(M -> W_r M) per stage and degree (precision complexes only)
    std::vector<std::vector<long>> kernel_lengths;
    std::optional<int> witness_degree;
    std::vector<mpz_class> witness;

    nlohmann::json to_json() const;
};

constexpr unsigned default_strictness_rmax = 6;

StrictnessReport strictness_probe(const DieudonneComplex& M, unsigned r_max = default_strictness_rmax);

// --------------------------------------------------------------- algebras

using derham::Form;

// A sampled graded commutative ring with d and F; wedge is the product.
struct DieudonneAlgebraView {
    unsigned long p = 2;
    int min_degree = 0;
    std::function<Form(const Form&)> d;
    std::function<Form(const Form&)> F;
    std::function<Form(const Form&, const Form&)> wedge;
    std::vector<Form> samples;
    std::vector<std::string> generator_names;
};

DieudonneAlgebraView algebra_view(const derham::DieudonneDeRham& A);

// Coconnectivity, d^2 = 0, dF = pFd, F multiplicative, F(a) = a^p mod p in degree 0.
LawReport check_dieudonne_algebra(const DieudonneAlgebraView& A);

struct ClassificationDatum {
    witt::DeltaRing base;
    std::size_t rank = 0;
    std::vector<std::vector<arith::MPoly>> phi_M;  // phi_M(e_j) = sum_k phi_M[k][j] e_k
    std::vector<Form> delta;                       // images of the variables in M
    std::vector<Form> d;                           // images of e_j in Lambda^2 M

    unsigned long p() const { return base.p(); }
    std::vector<std::string> generator_names() const;
    derham::ExteriorDerivation derivation() const;
    derham::FormFrobenius frobenius() const;

    // A = Z_(p)[x], M = Omega_A with its de Rham structure.
    static ClassificationDatum de_rham(const witt::DeltaRing& R);
    static ClassificationDatum from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

enum class RelationOrientation { Derived, Literal };

struct ClassificationReport {
    bool pass = true;
    LawReport relations;
    std::optional<LawReport> algebra;
    nlohmann::json to_json() const;
};

// The assembled structure on the exterior algebra of M over A.
DieudonneAlgebraView assemble_classification(const ClassificationDatum& D);
// Relations on generators:
//   Derived: delta(phi_A x) = p phi_M(delta x), d(phi_M e) = p (phi_M ^ phi_M)(d e)
//   Literal: phi_M(delta x) = p delta(phi_A x), (phi_M ^ phi_M)(d e) = p d(phi_M e)
// together with d(delta x) = 0 and d(d e) = 0.
ClassificationReport classify_relations_check(const ClassificationDatum& D,
                                              RelationOrientation orientation = RelationOrientation::Derived);

}  // namespace dwitt::dieudonne
