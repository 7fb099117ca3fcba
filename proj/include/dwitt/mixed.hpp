#pragma once

// Graded mixed complexes: bigraded free modules with d of bidegree (0, +1)
// and eps of bidegree (+1, -1), optionally with a Frobenius of bidegree (0, 0).

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dwitt/dieudonne.hpp"
#include "dwitt/matrix.hpp"
#include "dwitt/witt.hpp"

namespace dwitt::mixed {

using arith::IntMatrix;
using witt::LawReport;

// (weight, degree)
using Bidegree = std::pair<int, int>;

inline Bidegree d_target(Bidegree b) { return {b.first, b.second + 1}; }
inline Bidegree eps_target(Bidegree b) { return {b.first + 1, b.second - 1}; }

// Modules are Z^rank (precision 0) or (Z/p^precision)^rank. Missing d, eps
// or F blocks are zero; F is present when has_F is set.
struct GradedMixedComplex {
    unsigned long p = 2;
    unsigned precision = 0;
    std::map<Bidegree, std::size_t> pieces;
    std::map<Bidegree, IntMatrix> d, eps, F;
    bool has_F = false;
    std::map<Bidegree, std::vector<std::string>> labels;

    std::size_t rank(Bidegree b) const;
    std::size_t total_rank() const;
    // Blocks with the right shape, zero when absent.
    IntMatrix d_at(Bidegree b) const;
    IntMatrix eps_at(Bidegree b) const;
    IntMatrix F_at(Bidegree b) const;
    std::vector<int> weights() const;

    void validate_shapes() const;
    nlohmann::json to_json() const;
    static GradedMixedComplex from_json(const nlohmann::json& j);
};

// d^2 = 0, eps^2 = 0, d eps + eps d = 0, and with F: F d = d F, eps F = p F eps.
LawReport check_mixed(const GradedMixedComplex& C);

GradedMixedComplex p_twist(const GradedMixedComplex& C);

// Pairs (x, y) in C(w,i) + C(w+1,i-1) with eps x = p y and eps y = 0, with
// d(x,y) = (dx, -dy), eps(x,y) = (y, 0), F(x,y) = (Fx, p Fy). Each piece is
// stored through its x-coordinates, so eps becomes eps/p on a sublattice.
struct MixedEtaResult {
    GradedMixedComplex complex;
    std::map<Bidegree, IntMatrix> basis;  // columns: x-coordinates in C(w,i)
};
MixedEtaResult eta_p_mixed(const GradedMixedComplex& C);

// Degree n of M goes to (weight n, degree -n); eps is the differential of M
// and the mixed d vanishes. F is carried over when with_F is set.
GradedMixedComplex heart_embed(const dieudonne::DieudonneComplex& M, bool with_F = true);

// ----------------------------------------------------------- adjunction

constexpr std::size_t default_adjunction_budget = 16;

// log_p of the number of strict graded mixed maps M -> N over Z/p^precision.
std::size_t hom_count_exponent(const GradedMixedComplex& M, const GradedMixedComplex& N, unsigned precision);

struct AdjunctionReport {
    std::size_t left_exponent = 0;   // log_p |Hom([p]* M, N)|
    std::size_t right_exponent = 0;  // log_p |Hom(M, eta_p N)|
    bool counts_match = false;
    bool bijection = false;
    bool natural = false;
    std::size_t naturality_samples = 0;
    bool pass = false;
    nlohmann::json to_json() const;
};

// Both Hom sets are solved as linear systems over Z/p^precision; f -> (f, f eps)
// is checked on generators in both directions and against sampled endomorphisms.
AdjunctionReport adjunction_check(const GradedMixedComplex& M, const GradedMixedComplex& N, unsigned precision,
                                  std::size_t budget = default_adjunction_budget);

// ------------------------------------------------------------ Beilinson

struct CohomologyGroup {
    Bidegree at;
    std::size_t free_rank = 0;
    std::vector<mpz_class> torsion;
    long length = 0;  // log_p of the order of the torsion part (precision complexes: of the whole group)
    bool is_zero() const { return free_rank == 0 && length == 0 && torsion.empty(); }
};

struct BeilinsonReport {
    std::vector<CohomologyGroup> cohomology;  // nonzero groups only
    bool connective = true;                   // H^i(C(n)) = 0 for i > -n
    bool coconnective = true;                 // H^i(C(n)) = 0 for i < -n
    std::optional<Bidegree> connective_witness, coconnective_witness;
    // Per weight n: degrees < -n unchanged, ker d in degree -n, nothing above.
    std::optional<GradedMixedComplex> truncation;
    nlohmann::json to_json() const;
};

BeilinsonReport beilinson_truncate(const GradedMixedComplex& C);

// -------------------------------------------------------------- de Rham

// Omega^i of Z_(p)[vars] in weight i, degree -i, restricted to monomials
// x^a dx_I with |a| + |I| <= D. eps is the de Rham differential and F is the
// Frobenius on forms followed by projection onto the window.
GradedMixedComplex ddr_mixed(const witt::DeltaRing& R, unsigned D);

}  // namespace dwitt::mixed
