#pragma once

// p-typical Witt vectors, delta-rings from Frobenius lifts, and truncated
// big Witt vectors.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dwitt/arith.hpp"
#include "dwitt/matrix.hpp"

namespace dwitt::witt {

using arith::Coefficient;
using arith::MPoly;

// Coordinates live in a polynomial ring over Z_(p) (modulus == 0) or over
// Z/modulus with modulus a power of p. All coordinates share one variable list.
struct WittVector {
    unsigned long p = 2;
    std::vector<MPoly> coords;
    mpz_class modulus = 0;

    std::size_t length() const { return coords.size(); }
    const std::vector<std::string>& variables() const;

    static WittVector zero(unsigned long p, std::size_t n, std::vector<std::string> vars = {},
                           const mpz_class& modulus = 0);
    static WittVector from_integers(unsigned long p, const std::vector<long>& coords,
                                    const mpz_class& modulus = 0);

    nlohmann::json to_json() const;
    static WittVector from_json(const nlohmann::json& j);
    std::string to_string() const;

    friend bool operator==(const WittVector& a, const WittVector& b);
};

std::vector<MPoly> ghost(const WittVector& x);
// Inverse of the ghost map over a p-torsion-free ring; NotInImage if the
// recursion leaves a non-p-integral coordinate.
WittVector from_ghost(const std::vector<MPoly>& g, unsigned long p);

WittVector witt_add(const WittVector& x, const WittVector& y);
WittVector witt_mul(const WittVector& x, const WittVector& y);
WittVector witt_neg(const WittVector& x);
WittVector witt_scale(const WittVector& x, long k);
WittVector frobenius(const WittVector& x);
WittVector verschiebung(const WittVector& x);
WittVector teichmuller(const MPoly& a, unsigned long p, std::size_t n, const mpz_class& modulus = 0);
// Restriction W_n -> W_{n-1}.
WittVector restrict_length(const WittVector& x, std::size_t n);

// Universal sum and product polynomials in a_0..a_{n-1}, b_0..b_{n-1}.
struct UniversalPolynomials {
    unsigned long p;
    std::size_t n;
    std::vector<MPoly> sum, product;
};
// Generated and cached for p^(n-1) <= universal_threshold(); nullopt above it.
std::optional<UniversalPolynomials> universal_polynomials(unsigned long p, std::size_t n);
unsigned long universal_threshold();

// ---------------------------------------------------------------- delta rings

class DeltaRing {
public:
    DeltaRing(unsigned long p, arith::RingMap lift);

    // The coordinate Frobenius x_i -> x_i^p.
    static DeltaRing standard(unsigned long p, const std::vector<std::string>& vars);
    static DeltaRing from_json(const nlohmann::json& j);

    unsigned long p() const { return p_; }
    const std::vector<std::string>& variables() const { return lift_.source(); }
    const arith::RingMap& lift() const { return lift_; }

    MPoly phi(const MPoly& a) const { return lift_.apply(a); }
    MPoly delta(const MPoly& a) const;

    nlohmann::json to_json() const;

private:
    unsigned long p_;
    arith::RingMap lift_;
};

using DeltaOperator = std::function<MPoly(const MPoly&)>;

MPoly delta_of(const DeltaRing& R, const MPoly& a);

struct LawResult {
    std::string law;
    bool pass = true;
    std::string witness;
};

struct LawReport {
    bool pass = true;
    std::vector<LawResult> results;
    void add(LawResult r);
    nlohmann::json to_json() const;
};

// delta(0) = 0, delta(1) = 0, the sum and product laws, on all sample pairs.
LawReport delta_laws_check(const DeltaRing& R, const std::vector<MPoly>& samples,
                           const DeltaOperator& delta = {});
// a -> (a, delta a) is a ring map into W_2 splitting the ghost component w_0.
LawReport w2_section_check(const DeltaRing& R, const std::vector<MPoly>& samples,
                           const DeltaOperator& delta = {});

// Samples used when none are supplied: generators, constants and a few products.
std::vector<MPoly> default_delta_samples(const DeltaRing& R);

// ----------------------------------------------------------- big Witt vectors

// 1 + c_1 t + ... + c_K t^K. When exact is set the series is a polynomial and
// all higher coefficients are known to vanish.
struct BigWittVector {
    std::size_t K = 0;
    std::vector<MPoly> c;  // c[0] == 1, size K + 1
    bool exact = false;

    static BigWittVector one(std::size_t K, std::vector<std::string> vars = {});
    nlohmann::json to_json() const;
    std::string to_string() const;
    bool is_one() const;

    friend bool operator==(const BigWittVector& a, const BigWittVector& b);
};

using PolyMatrix = std::vector<std::vector<MPoly>>;

struct EndoClass {
    PolyMatrix m;
    std::vector<std::string> vars;

    static EndoClass from_int(const arith::IntMatrix& a);
    static EndoClass from_json(const nlohmann::json& j);
    std::size_t rank() const { return m.size(); }
    EndoClass direct_sum(const EndoClass& o) const;
    EndoClass power(unsigned e) const;
};

BigWittVector char_poly_witt(const EndoClass& e, std::size_t K);
BigWittVector bigwitt_add(const BigWittVector& a, const BigWittVector& b);
// Ghost components g_1..g_K of -t d/dt log w.
std::vector<MPoly> bigwitt_ghost(const BigWittVector& w, std::size_t count);
BigWittVector bigwitt_from_ghost(const std::vector<MPoly>& g, std::size_t K, std::vector<std::string> vars);
BigWittVector bigwitt_frobenius(const BigWittVector& w, unsigned m);
BigWittVector bigwitt_verschiebung(const BigWittVector& w, unsigned m);
bool ker_membership(const BigWittVector& w, unsigned prime_bound);

}  // namespace dwitt::witt
