#pragma once

// Linear algebra over Z/p^N with small moduli (p^N < 2^31), dense rows.

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "dwitt/arith.hpp"
#include "dwitt/matrix.hpp"

namespace dwitt::arith {

using ModVec = std::vector<std::int64_t>;

class ModRing {
public:
    ModRing(unsigned long p, unsigned N);

    unsigned long p() const { return p_; }
    unsigned N() const { return N_; }
    std::int64_t modulus() const { return mod_; }
    std::int64_t pow(unsigned e) const { return e >= N_ ? 0 : pw_[e]; }

    std::int64_t reduce(std::int64_t v) const;
    std::int64_t reduce(const mpz_class& v) const;
    std::int64_t mul(std::int64_t a, std::int64_t b) const { return reduce(a * b); }
    // p-adic valuation of a nonzero residue; N for zero.
    unsigned valuation(std::int64_t v) const;
    // Inverse of a unit residue.
    std::int64_t inverse(std::int64_t u) const;

private:
    unsigned long p_;
    unsigned N_;
    std::int64_t mod_;
    std::vector<std::int64_t> pw_;
};

// Submodule of (Z/p^N)^dim kept in Howell form: pivot rows have leading
// entry p^v, and the span is closed under the annihilator multiples, so a
// vector lies in the span iff it reduces to zero.
class HowellSpan {
public:
    HowellSpan(const ModRing& ring, std::size_t dim);

    std::size_t dim() const { return dim_; }
    const ModRing& ring() const { return ring_; }

    bool insert(ModVec v);
    bool contains(ModVec v) const;
    // Reduced representative (zero iff v lies in the span).
    ModVec reduce(ModVec v) const;

    std::size_t pivot_count() const { return rows_.size(); }
    std::vector<ModVec> rows() const;
    // log_p of the order of the span.
    std::size_t span_length() const;
    // Exponents e > 0 of the cyclic factors Z/p^e of the quotient, ascending.
    std::vector<unsigned> quotient_exponents() const;

private:
    ModRing ring_;
    std::size_t dim_;
    std::map<std::size_t, ModVec> rows_;

    void normalize(ModVec& v, std::size_t c) const;
};

// Valuations of the diagonal of a Smith form over Z/p^N (entries < N only).
std::vector<unsigned> local_smith_valuations(std::vector<ModVec> rows, std::size_t cols,
                                             const ModRing& ring);

// log_p of #{x in (Z/p^N)^cols : A x = 0}.
std::size_t solution_count_exponent(const IntMatrix& A, const ModRing& ring);

}  // namespace dwitt::arith
