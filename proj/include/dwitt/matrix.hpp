#pragma once

// Dense integer matrices and the lattice algorithms built on them.

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dwitt::arith {

class IntMatrix {
public:
    IntMatrix() = default;
    IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}
    IntMatrix(std::initializer_list<std::initializer_list<long>> rows);

    static IntMatrix identity(std::size_t n);
    static IntMatrix scalar(std::size_t n, const mpz_class& s);
    static IntMatrix from_json(const nlohmann::json& j, std::size_t rows, std::size_t cols);
    static IntMatrix from_json(const nlohmann::json& j);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    mpz_class& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    const mpz_class& operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    std::vector<mpz_class> column(std::size_t c) const;
    void set_column(std::size_t c, const std::vector<mpz_class>& v);
    IntMatrix columns(std::size_t first, std::size_t count) const;
    IntMatrix rows_range(std::size_t first, std::size_t count) const;

    bool is_zero() const;
    bool is_diagonal() const;
    IntMatrix transpose() const;
    IntMatrix reduce_mod(const mpz_class& m) const;
    IntMatrix& operator*=(const mpz_class& s);

    friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b);
    friend IntMatrix operator*(const mpz_class& s, IntMatrix a) { return a *= s; }
    friend IntMatrix operator+(const IntMatrix& a, const IntMatrix& b);
    friend IntMatrix operator-(const IntMatrix& a, const IntMatrix& b);
    friend bool operator==(const IntMatrix& a, const IntMatrix& b);
    std::vector<mpz_class> apply(const std::vector<mpz_class>& v) const;

    mpz_class determinant() const;

    nlohmann::json to_json() const;
    std::string to_string() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<mpz_class> a_;
};

IntMatrix hstack(const IntMatrix& a, const IntMatrix& b);
IntMatrix vstack(const IntMatrix& a, const IntMatrix& b);
IntMatrix block_diagonal(const IntMatrix& a, const IntMatrix& b);

struct SmithDecomposition {
    IntMatrix U, D, V;  // U * A * V == D
    std::size_t rank = 0;
    std::vector<mpz_class> diagonal() const;
};

SmithDecomposition smith_decompose(const IntMatrix& A);

// Column-style Hermite normal form: returns H = A * U (U unimodular) whose
// nonzero columns are in echelon form with positive pivots and reduced
// entries to the left of each pivot row. Zero columns are dropped.
IntMatrix hermite_columns(const IntMatrix& A);

// Basis (as columns) of the Z-lattice spanned by the columns of A.
IntMatrix lattice_basis(const IntMatrix& A);
// Basis of {x : A x = 0}.
IntMatrix integer_kernel(const IntMatrix& A);
// Membership of v in the column lattice of A; returns coordinates if so.
std::optional<std::vector<mpz_class>> lattice_solve(const IntMatrix& A, const std::vector<mpz_class>& v);
bool lattice_contains(const IntMatrix& A, const std::vector<mpz_class>& v);
bool lattice_contains(const IntMatrix& A, const IntMatrix& B);
IntMatrix lattice_intersect(const IntMatrix& gens1, const IntMatrix& gens2);
// {y : A y in column lattice of L}
IntMatrix lattice_preimage(const IntMatrix& A, const IntMatrix& L);

// Invariant factors of Z^n / (column lattice of A), trivial ones (=1) omitted;
// free summands are reported as 0.
std::vector<mpz_class> quotient_invariants(const IntMatrix& A);

// X with B X = Y for square nonsingular B, when X is integral.
std::optional<IntMatrix> solve_integral(const IntMatrix& B, const IntMatrix& Y);

}  // namespace dwitt::arith
