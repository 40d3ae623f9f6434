#ifndef HVB_MATRIX_HPP
#define HVB_MATRIX_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "hvb/field.hpp"

namespace hvb {

using Vec = std::vector<Elem>;

// Dense exact matrix over a fixed field.  Elimination-based queries (rank,
// kernel, solve, inverse) all go through one reduced-row-echelon routine; the
// internal pivot strategy is sparsity-aware for speed, but the result is the
// canonical RREF, which is basis-independent, so every downstream output is
// reproducible bit for bit.
class ExactMatrix {
public:
    ExactMatrix(Field field, std::size_t rows, std::size_t cols);
    static ExactMatrix identity(const Field& field, std::size_t n);

    const Field& field() const { return field_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Elem& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const Elem& at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
    void set(std::size_t i, std::size_t j, const Elem& v) { a_[i * cols_ + j] = v; }
    void set_int(std::size_t i, std::size_t j, long v) { a_[i * cols_ + j] = field_.from_int(v); }

    bool is_zero() const;
    bool is_identity() const;
    bool operator==(const ExactMatrix& o) const;
    bool operator!=(const ExactMatrix& o) const { return !(*this == o); }

    ExactMatrix add(const ExactMatrix& o) const;
    ExactMatrix sub(const ExactMatrix& o) const;
    ExactMatrix neg() const;
    ExactMatrix mul(const ExactMatrix& o) const;
    ExactMatrix scalar_mul(const Elem& c) const;
    ExactMatrix transpose() const;
    ExactMatrix pow(std::uint64_t e) const;

    // Kronecker product with the left factor major: entry ((i1,i2),(j1,j2))
    // of A (x) B sits at row i1*B.rows+i2, column j1*B.cols+j2.
    ExactMatrix kronecker(const ExactMatrix& o) const;
    ExactMatrix direct_sum(const ExactMatrix& o) const;

    Vec apply(const Vec& v) const;                 // matrix * column vector
    Vec apply_transposed(const Vec& v) const;      // row vector * matrix

    std::size_t rank() const;
    // Rows of the result form the canonical kernel basis: one vector per free
    // column in ascending order, each with a 1 in its free position.
    ExactMatrix kernel_basis() const;
    // Canonical reduced row echelon form together with its pivot columns.
    std::pair<ExactMatrix, std::vector<std::size_t>> rref() const;
    // Particular solution of M x = b with all free variables zero (pivots are
    // the lexicographically first usable columns); nullopt if inconsistent.
    std::optional<Vec> solve(const Vec& rhs) const;
    ExactMatrix inverse() const;                   // throws input_error if singular
    std::optional<ExactMatrix> try_inverse() const;

    // Rows selected / stacked utilities used by submodule bookkeeping.
    ExactMatrix row_slice(const std::vector<std::size_t>& rows) const;
    ExactMatrix vstack(const ExactMatrix& o) const;
    ExactMatrix hstack(const ExactMatrix& o) const;

private:
    Field field_;
    std::size_t rows_, cols_;
    std::vector<Elem> a_;
};

} // namespace hvb

#endif
