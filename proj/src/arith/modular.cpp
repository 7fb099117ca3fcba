#include "dwitt/modular.hpp"

#include "dwitt/error.hpp"

#include <algorithm>

namespace dwitt::arith {

ModRing::ModRing(unsigned long p, unsigned N) : p_(p), N_(N)
{
    if (p < 2 || N == 0)
        fail(ErrorCode::Usage, "modulus p^N needs p >= 2 and N >= 1");
    mpz_class m = ipow(mpz_class(p), N);
    if (m >= (mpz_class(1) << 31))
        fail(ErrorCode::BudgetExceeded, "modulus p^N too large for word arithmetic");
    mod_ = m.get_si();
    pw_.resize(N);
    pw_[0] = 1;
    for (unsigned i = 1; i < N; ++i) pw_[i] = pw_[i - 1] * static_cast<std::int64_t>(p);
}

std::int64_t ModRing::reduce(std::int64_t v) const
{
    v %= mod_;
    return v < 0 ? v + mod_ : v;
}

std::int64_t ModRing::reduce(const mpz_class& v) const
{
    mpz_class r;
    mpz_fdiv_r_ui(r.get_mpz_t(), v.get_mpz_t(), static_cast<unsigned long>(mod_));
    return r.get_si();
}

unsigned ModRing::valuation(std::int64_t v) const
{
    v = reduce(v);
    if (v == 0)
        return N_;
    unsigned e = 0;
    while (v % static_cast<std::int64_t>(p_) == 0) {
        v /= static_cast<std::int64_t>(p_);
        ++e;
    }
    return e;
}

std::int64_t ModRing::inverse(std::int64_t u) const
{
    mpz_class a = reduce(u), m = mod_, r;
    if (!mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()))
        fail(ErrorCode::NotDivisible, "residue is not a unit");
    return r.get_si();
}

HowellSpan::HowellSpan(const ModRing& ring, std::size_t dim) : ring_(ring), dim_(dim) {}

void HowellSpan::normalize(ModVec& v, std::size_t c) const
{
    unsigned e = ring_.valuation(v[c]);
    std::int64_t u = v[c] / ring_.pow(e);
    if (u == 1)
        return;
    std::int64_t inv = ring_.inverse(u);
    for (auto& x : v) x = ring_.mul(x, inv);
}

static void axpy(ModVec& r, std::int64_t k, const ModVec& row, const ModRing& ring, std::size_t from)
{
    if (k == 0)
        return;
    for (std::size_t j = from; j < r.size(); ++j)
        if (row[j] != 0)
            r[j] = ring.reduce(r[j] - ring.mul(k, row[j]));
}

bool HowellSpan::insert(ModVec v)
{
    if (v.size() != dim_)
        fail(ErrorCode::ShapeMismatch, "vector length differs from span dimension");
    for (auto& x : v) x = ring_.reduce(x);
    bool grew = false;
    std::vector<ModVec> work{std::move(v)};
    while (!work.empty()) {
        ModVec r = std::move(work.back());
        work.pop_back();
        for (std::size_t c = 0; c < dim_; ++c) {
            if (r[c] == 0)
                continue;
            normalize(r, c);
            unsigned e = ring_.valuation(r[c]);
            auto it = rows_.find(c);
            if (it == rows_.end()) {
                ModVec ann = r;
                std::int64_t k = ring_.pow(ring_.N() - e);
                for (auto& x : ann) x = ring_.mul(x, k);
                rows_.emplace(c, std::move(r));
                grew = true;
                if (e > 0)
                    work.push_back(std::move(ann));
                break;
            }
            unsigned pe = ring_.valuation(it->second[c]);
            if (pe > e) {
                std::swap(r, it->second);
                grew = true;
                ModVec ann = it->second;
                std::int64_t k = ring_.pow(ring_.N() - e);
                for (auto& x : ann) x = ring_.mul(x, k);
                if (e > 0)
                    work.push_back(std::move(ann));
                std::swap(pe, e);
            }
            axpy(r, ring_.pow(e - pe), it->second, ring_, c);
        }
    }
    return grew;
}

ModVec HowellSpan::reduce(ModVec v) const
{
    if (v.size() != dim_)
        fail(ErrorCode::ShapeMismatch, "vector length differs from span dimension");
    for (auto& x : v) x = ring_.reduce(x);
    for (const auto& [c, row] : rows_) {
        if (v[c] == 0)
            continue;
        unsigned e = ring_.valuation(v[c]);
        unsigned pe = ring_.valuation(row[c]);
        if (pe > e)
            continue;
        std::int64_t u = v[c] / ring_.pow(e);
        axpy(v, ring_.mul(u, ring_.pow(e - pe)), row, ring_, c);
    }
    return v;
}

bool HowellSpan::contains(ModVec v) const
{
    v = reduce(std::move(v));
    return std::all_of(v.begin(), v.end(), [](std::int64_t x) { return x == 0; });
}

std::vector<ModVec> HowellSpan::rows() const
{
    std::vector<ModVec> out;
    for (const auto& [c, r] : rows_) out.push_back(r);
    return out;
}

std::size_t HowellSpan::span_length() const
{
    std::size_t len = 0;
    for (const auto& [c, r] : rows_) len += ring_.N() - ring_.valuation(r[c]);
    return len;
}

std::vector<unsigned> HowellSpan::quotient_exponents() const
{
    std::vector<unsigned> vals = local_smith_valuations(rows(), dim_, ring_);
    std::vector<unsigned> out;
    for (unsigned v : vals)
        if (v > 0)
            out.push_back(v);
    for (std::size_t i = vals.size(); i < dim_; ++i) out.push_back(ring_.N());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<unsigned> local_smith_valuations(std::vector<ModVec> rows, std::size_t cols,
                                             const ModRing& ring)
{
    std::vector<unsigned> out;
    for (auto& r : rows)
        for (auto& x : r) x = ring.reduce(x);
    std::size_t t = 0;
    while (t < rows.size()) {
        std::size_t br = rows.size(), bc = cols;
        unsigned best = ring.N();
        for (std::size_t i = t; i < rows.size() && best > 0; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                if (rows[i][j] != 0) {
                    unsigned e = ring.valuation(rows[i][j]);
                    if (e < best) {
                        best = e;
                        br = i;
                        bc = j;
                        if (e == 0)
                            break;
                    }
                }
        if (br == rows.size())
            break;
        std::swap(rows[t], rows[br]);
        ModVec& piv = rows[t];
        std::int64_t u = piv[bc] / ring.pow(best);
        std::int64_t inv = ring.inverse(u);
        for (auto& x : piv) x = ring.mul(x, inv);
        for (std::size_t i = t + 1; i < rows.size(); ++i) {
            if (rows[i][bc] == 0)
                continue;
            std::int64_t k = rows[i][bc] / ring.pow(best);
            axpy(rows[i], k, piv, ring, 0);
        }
        // Clearing the rest of the pivot row only touches that row, and the
        // pivot column is now zero below it: drop both.
        for (std::size_t i = t + 1; i < rows.size(); ++i) rows[i][bc] = 0;
        out.push_back(best);
        ++t;
    }
    return out;
}

std::size_t solution_count_exponent(const IntMatrix& A, const ModRing& ring)
{
    std::vector<ModVec> rows(A.rows(), ModVec(A.cols()));
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) rows[i][j] = ring.reduce(A(i, j));
    std::vector<unsigned> vals = local_smith_valuations(std::move(rows), A.cols(), ring);
    std::size_t e = 0;
    for (unsigned v : vals) e += v;
    return e + ring.N() * (A.cols() - vals.size());
}

}  // namespace dwitt::arith
