#include "dwitt/matrix.hpp"

#include "dwitt/error.hpp"

#include <algorithm>
#include <sstream>

namespace dwitt::arith {

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<long>> rows)
{
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    a_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_)
            fail(ErrorCode::ShapeMismatch, "ragged matrix literal");
        for (long v : r) a_.emplace_back(v);
    }
}

IntMatrix IntMatrix::identity(std::size_t n) { return scalar(n, 1); }

IntMatrix IntMatrix::scalar(std::size_t n, const mpz_class& s)
{
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = s;
    return m;
}

IntMatrix IntMatrix::from_json(const nlohmann::json& j, std::size_t rows, std::size_t cols)
{
    IntMatrix m = j.is_null() ? IntMatrix(rows, cols) : from_json(j);
    if (j.is_array() && j.empty())
        m = IntMatrix(rows, cols);
    if (m.rows() != rows || m.cols() != cols)
        fail(ErrorCode::ShapeMismatch, "matrix is " + std::to_string(m.rows()) + "x" +
                                           std::to_string(m.cols()) + ", expected " +
                                           std::to_string(rows) + "x" + std::to_string(cols));
    return m;
}

IntMatrix IntMatrix::from_json(const nlohmann::json& j)
{
    if (!j.is_array())
        fail(ErrorCode::Parse, "matrix must be a row-major array of arrays");
    std::size_t r = j.size();
    std::size_t c = r ? j[0].size() : 0;
    IntMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        if (!j[i].is_array() || j[i].size() != c)
            fail(ErrorCode::Parse, "ragged matrix rows");
        for (std::size_t k = 0; k < c; ++k) {
            const auto& v = j[i][k];
            if (v.is_string())
                m(i, k) = mpz_class(v.get<std::string>());
            else if (v.is_number_integer())
                m(i, k) = v.get<long>();
            else
                fail(ErrorCode::Parse, "matrix entries must be integers");
        }
    }
    return m;
}

std::vector<mpz_class> IntMatrix::column(std::size_t c) const
{
    std::vector<mpz_class> v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
}

void IntMatrix::set_column(std::size_t c, const std::vector<mpz_class>& v)
{
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

IntMatrix IntMatrix::columns(std::size_t first, std::size_t count) const
{
    IntMatrix m(rows_, count);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < count; ++c) m(r, c) = (*this)(r, first + c);
    return m;
}

IntMatrix IntMatrix::rows_range(std::size_t first, std::size_t count) const
{
    IntMatrix m(count, cols_);
    for (std::size_t r = 0; r < count; ++r)
        for (std::size_t c = 0; c < cols_; ++c) m(r, c) = (*this)(first + r, c);
    return m;
}

bool IntMatrix::is_zero() const
{
    return std::all_of(a_.begin(), a_.end(), [](const mpz_class& v) { return v == 0; });
}

bool IntMatrix::is_diagonal() const
{
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            if (r != c && (*this)(r, c) != 0)
                return false;
    return true;
}

IntMatrix IntMatrix::transpose() const
{
    IntMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

IntMatrix IntMatrix::reduce_mod(const mpz_class& m) const
{
    IntMatrix t = *this;
    for (auto& v : t.a_) {
        v %= m;
        if (v < 0)
            v += m;
    }
    return t;
}

IntMatrix& IntMatrix::operator*=(const mpz_class& s)
{
    for (auto& v : a_) v *= s;
    return *this;
}

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b)
{
    if (a.cols_ != b.rows_)
        fail(ErrorCode::ShapeMismatch, "matrix product " + std::to_string(a.rows_) + "x" +
                                           std::to_string(a.cols_) + " * " +
                                           std::to_string(b.rows_) + "x" + std::to_string(b.cols_));
    IntMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const mpz_class& x = a(i, k);
            if (x == 0)
                continue;
            for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += x * b(k, j);
        }
    return c;
}

IntMatrix operator+(const IntMatrix& a, const IntMatrix& b)
{
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
        fail(ErrorCode::ShapeMismatch, "matrix sum of different shapes");
    IntMatrix c = a;
    for (std::size_t i = 0; i < c.a_.size(); ++i) c.a_[i] += b.a_[i];
    return c;
}

IntMatrix operator-(const IntMatrix& a, const IntMatrix& b)
{
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
        fail(ErrorCode::ShapeMismatch, "matrix difference of different shapes");
    IntMatrix c = a;
    for (std::size_t i = 0; i < c.a_.size(); ++i) c.a_[i] -= b.a_[i];
    return c;
}

bool operator==(const IntMatrix& a, const IntMatrix& b)
{
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
}

std::vector<mpz_class> IntMatrix::apply(const std::vector<mpz_class>& v) const
{
    if (v.size() != cols_)
        fail(ErrorCode::ShapeMismatch, "matrix-vector size mismatch");
    std::vector<mpz_class> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) out[i] += (*this)(i, k) * v[k];
    return out;
}

mpz_class IntMatrix::determinant() const
{
    if (rows_ != cols_)
        fail(ErrorCode::ShapeMismatch, "determinant of a non-square matrix");
    const std::size_t n = rows_;
    if (n == 0)
        return 1;
    IntMatrix m = *this;
    mpz_class prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m(k, k) == 0) {
            std::size_t r = k + 1;
            while (r < n && m(r, k) == 0) ++r;
            if (r == n)
                return 0;
            for (std::size_t c = 0; c < n; ++c) std::swap(m(k, c), m(r, c));
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) {
                mpz_class t = m(i, j) * m(k, k) - m(i, k) * m(k, j);
                mpz_divexact(t.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
                m(i, j) = t;
            }
        prev = m(k, k);
    }
    return sign * m(n - 1, n - 1);
}

nlohmann::json IntMatrix::to_json() const
{
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t r = 0; r < rows_; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < cols_; ++c) {
            const mpz_class& v = (*this)(r, c);
            if (v.fits_slong_p())
                row.push_back(v.get_si());
            else
                row.push_back(v.get_str());
        }
        out.push_back(row);
    }
    return out;
}

std::string IntMatrix::to_string() const { return to_json().dump(); }

IntMatrix hstack(const IntMatrix& a, const IntMatrix& b)
{
    if (a.rows() != b.rows())
        fail(ErrorCode::ShapeMismatch, "hstack of matrices with different row counts");
    IntMatrix m(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) m(r, c) = a(r, c);
        for (std::size_t c = 0; c < b.cols(); ++c) m(r, a.cols() + c) = b(r, c);
    }
    return m;
}

IntMatrix vstack(const IntMatrix& a, const IntMatrix& b)
{
    if (a.cols() != b.cols())
        fail(ErrorCode::ShapeMismatch, "vstack of matrices with different column counts");
    IntMatrix m(a.rows() + b.rows(), a.cols());
    for (std::size_t c = 0; c < a.cols(); ++c) {
        for (std::size_t r = 0; r < a.rows(); ++r) m(r, c) = a(r, c);
        for (std::size_t r = 0; r < b.rows(); ++r) m(a.rows() + r, c) = b(r, c);
    }
    return m;
}

IntMatrix block_diagonal(const IntMatrix& a, const IntMatrix& b)
{
    IntMatrix m(a.rows() + b.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) m(r, c) = a(r, c);
    for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c) m(a.rows() + r, a.cols() + c) = b(r, c);
    return m;
}

// ------------------------------------------------------------------ Smith

std::vector<mpz_class> SmithDecomposition::diagonal() const
{
    std::vector<mpz_class> d;
    for (std::size_t i = 0; i < std::min(D.rows(), D.cols()); ++i) d.push_back(D(i, i));
    return d;
}

namespace {

void swap_rows(IntMatrix& m, std::size_t a, std::size_t b)
{
    if (a == b)
        return;
    for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(a, c), m(b, c));
}

void swap_cols(IntMatrix& m, std::size_t a, std::size_t b)
{
    if (a == b)
        return;
    for (std::size_t r = 0; r < m.rows(); ++r) std::swap(m(r, a), m(r, b));
}

// row[dst] += k * row[src]
void add_row(IntMatrix& m, std::size_t dst, std::size_t src, const mpz_class& k)
{
    for (std::size_t c = 0; c < m.cols(); ++c)
        if (m(src, c) != 0)
            m(dst, c) += k * m(src, c);
}

void add_col(IntMatrix& m, std::size_t dst, std::size_t src, const mpz_class& k)
{
    for (std::size_t r = 0; r < m.rows(); ++r)
        if (m(r, src) != 0)
            m(r, dst) += k * m(r, src);
}

}  // namespace

SmithDecomposition smith_decompose(const IntMatrix& A)
{
    const std::size_t m = A.rows(), n = A.cols();
    SmithDecomposition s{IntMatrix::identity(m), A, IntMatrix::identity(n), 0};
    IntMatrix& D = s.D;
    std::size_t t = 0;
    for (; t < std::min(m, n); ++t) {
        for (;;) {
            // Smallest nonzero entry of the trailing block becomes the pivot.
            std::size_t pr = m, pc = n;
            for (std::size_t i = t; i < m; ++i)
                for (std::size_t j = t; j < n; ++j)
                    if (D(i, j) != 0 && (pr == m || mpz_cmpabs(D(i, j).get_mpz_t(), D(pr, pc).get_mpz_t()) < 0)) {
                        pr = i;
                        pc = j;
                    }
            if (pr == m)
                goto done;
            swap_rows(D, t, pr);
            swap_rows(s.U, t, pr);
            swap_cols(D, t, pc);
            swap_cols(s.V, t, pc);
            bool clean = true;
            for (std::size_t i = t + 1; i < m; ++i) {
                if (D(i, t) == 0)
                    continue;
                mpz_class q;
                mpz_tdiv_q(q.get_mpz_t(), D(i, t).get_mpz_t(), D(t, t).get_mpz_t());
                add_row(D, i, t, -q);
                add_row(s.U, i, t, -q);
                clean = clean && D(i, t) == 0;
            }
            for (std::size_t j = t + 1; j < n; ++j) {
                if (D(t, j) == 0)
                    continue;
                mpz_class q;
                mpz_tdiv_q(q.get_mpz_t(), D(t, j).get_mpz_t(), D(t, t).get_mpz_t());
                add_col(D, j, t, -q);
                add_col(s.V, j, t, -q);
                clean = clean && D(t, j) == 0;
            }
            if (!clean)
                continue;
            // Divisibility: fold an offending row into the pivot row and retry.
            bool divides = true;
            for (std::size_t i = t + 1; i < m && divides; ++i)
                for (std::size_t j = t + 1; j < n; ++j)
                    if (!mpz_divisible_p(D(i, j).get_mpz_t(), D(t, t).get_mpz_t())) {
                        add_row(D, t, i, 1);
                        add_row(s.U, t, i, 1);
                        divides = false;
                        break;
                    }
            if (divides)
                break;
        }
        if (D(t, t) < 0) {
            for (std::size_t c = 0; c < n; ++c) D(t, c) = -D(t, c);
            for (std::size_t c = 0; c < m; ++c) s.U(t, c) = -s.U(t, c);
        }
    }
done:
    s.rank = t;
    return s;
}

// ---------------------------------------------------------------- Hermite

namespace {

// Row-style HNF of B in place (rows are generators); returns number of nonzero rows.
std::size_t row_hermite(IntMatrix& B)
{
    const std::size_t m = B.rows(), n = B.cols();
    std::size_t row = 0;
    for (std::size_t c = 0; c < n && row < m; ++c) {
        for (;;) {
            std::size_t best = m;
            for (std::size_t r = row; r < m; ++r)
                if (B(r, c) != 0 && (best == m || mpz_cmpabs(B(r, c).get_mpz_t(), B(best, c).get_mpz_t()) < 0))
                    best = r;
            if (best == m)
                break;
            swap_rows(B, row, best);
            bool done = true;
            for (std::size_t r = row + 1; r < m; ++r) {
                if (B(r, c) == 0)
                    continue;
                mpz_class q;
                mpz_fdiv_q(q.get_mpz_t(), B(r, c).get_mpz_t(), B(row, c).get_mpz_t());
                add_row(B, r, row, -q);
                done = done && B(r, c) == 0;
            }
            if (done)
                break;
        }
        if (B(row, c) == 0)
            continue;
        if (B(row, c) < 0)
            for (std::size_t k = 0; k < n; ++k) B(row, k) = -B(row, k);
        for (std::size_t r = 0; r < row; ++r) {
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), B(r, c).get_mpz_t(), B(row, c).get_mpz_t());
            if (q != 0)
                add_row(B, r, row, -q);
        }
        ++row;
    }
    return row;
}

}  // namespace

IntMatrix hermite_columns(const IntMatrix& A)
{
    IntMatrix B = A.transpose();
    std::size_t r = row_hermite(B);
    return B.rows_range(0, r).transpose();
}

IntMatrix lattice_basis(const IntMatrix& A)
{
    if (A.cols() == 0)
        return IntMatrix(A.rows(), 0);
    return hermite_columns(A);
}

IntMatrix integer_kernel(const IntMatrix& A)
{
    if (A.rows() == 0)
        return IntMatrix::identity(A.cols());
    SmithDecomposition s = smith_decompose(A);
    return s.V.columns(s.rank, A.cols() - s.rank);
}

std::optional<std::vector<mpz_class>> lattice_solve(const IntMatrix& A, const std::vector<mpz_class>& v)
{
    if (v.size() != A.rows())
        fail(ErrorCode::ShapeMismatch, "lattice membership: vector of wrong length");
    IntMatrix H = lattice_basis(A);
    std::vector<mpz_class> residual = v;
    std::vector<mpz_class> coords(H.cols());
    std::size_t row = 0;
    for (std::size_t k = 0; k < H.cols(); ++k) {
        while (row < H.rows() && H(row, k) == 0) {
            if (residual[row] != 0)
                return std::nullopt;
            ++row;
        }
        if (!mpz_divisible_p(residual[row].get_mpz_t(), H(row, k).get_mpz_t()))
            return std::nullopt;
        mpz_class c;
        mpz_divexact(c.get_mpz_t(), residual[row].get_mpz_t(), H(row, k).get_mpz_t());
        coords[k] = c;
        if (c != 0)
            for (std::size_t r = row; r < H.rows(); ++r) residual[r] -= c * H(r, k);
        ++row;
    }
    for (; row < residual.size(); ++row)
        if (residual[row] != 0)
            return std::nullopt;
    return coords;
}

bool lattice_contains(const IntMatrix& A, const std::vector<mpz_class>& v)
{
    return lattice_solve(A, v).has_value();
}

bool lattice_contains(const IntMatrix& A, const IntMatrix& B)
{
    IntMatrix H = lattice_basis(A);
    for (std::size_t c = 0; c < B.cols(); ++c)
        if (!lattice_solve(H, B.column(c)))
            return false;
    return true;
}

IntMatrix lattice_intersect(const IntMatrix& gens1, const IntMatrix& gens2)
{
    if (gens1.rows() != gens2.rows())
        fail(ErrorCode::ShapeMismatch, "lattice_intersect: different ambient ranks");
    if (gens1.cols() == 0 || gens2.cols() == 0)
        return IntMatrix(gens1.rows(), 0);
    IntMatrix neg = gens2;
    neg *= -1;
    IntMatrix K = integer_kernel(hstack(gens1, neg));
    IntMatrix top = K.rows_range(0, gens1.cols());
    return lattice_basis(gens1 * top);
}

IntMatrix lattice_preimage(const IntMatrix& A, const IntMatrix& L)
{
    if (A.rows() != L.rows())
        fail(ErrorCode::ShapeMismatch, "lattice_preimage: shape mismatch");
    IntMatrix neg = L;
    neg *= -1;
    IntMatrix K = integer_kernel(hstack(A, neg));
    return lattice_basis(K.rows_range(0, A.cols()));
}

std::vector<mpz_class> quotient_invariants(const IntMatrix& A)
{
    std::vector<mpz_class> out;
    if (A.cols() == 0) {
        out.assign(A.rows(), 0);
        return out;
    }
    SmithDecomposition s = smith_decompose(A);
    for (std::size_t i = 0; i < s.rank; ++i)
        if (s.D(i, i) != 1)
            out.push_back(s.D(i, i));
    for (std::size_t i = s.rank; i < A.rows(); ++i) out.push_back(0);
    return out;
}

}  // namespace dwitt::arith

namespace dwitt::arith {

std::optional<IntMatrix> solve_integral(const IntMatrix& B, const IntMatrix& Y)
{
    std::size_t n = B.rows();
    if (B.cols() != n || Y.rows() != n)
        fail(ErrorCode::ShapeMismatch, "solve_integral: shape mismatch");
    std::size_t m = Y.cols();
    std::vector<std::vector<mpq_class>> a(n, std::vector<mpq_class>(n + m));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) a[r][c] = B(r, c);
        for (std::size_t c = 0; c < m; ++c) a[r][n + c] = Y(r, c);
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && a[piv][c] == 0) ++piv;
        if (piv == n)
            fail(ErrorCode::NotInImage, "solve_integral: singular basis matrix");
        std::swap(a[piv], a[c]);
        mpq_class inv = 1 / a[c][c];
        for (auto& v : a[c]) v *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || a[r][c] == 0)
                continue;
            mpq_class f = a[r][c];
            for (std::size_t k = c; k < n + m; ++k) a[r][k] -= f * a[c][k];
        }
    }
    IntMatrix X(n, m);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c) {
            a[r][n + c].canonicalize();
            if (a[r][n + c].get_den() != 1)
                return std::nullopt;
            X(r, c) = a[r][n + c].get_num();
        }
    return X;
}

}  // namespace dwitt::arith
