#include "hvb/matrix.hpp"

#include <algorithm>
#include <list>

#include "hvb/errors.hpp"

namespace hvb {

ExactMatrix::ExactMatrix(Field field, std::size_t rows, std::size_t cols)
    : field_(std::move(field)), rows_(rows), cols_(cols), a_(rows * cols, field_.zero()) {}

ExactMatrix ExactMatrix::identity(const Field& field, std::size_t n) {
    ExactMatrix m(field, n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = field.one();
    return m;
}

bool ExactMatrix::is_zero() const {
    for (const auto& v : a_)
        if (!field_.is_zero(v)) return false;
    return true;
}

bool ExactMatrix::is_identity() const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) {
            if (i == j ? !field_.is_one(at(i, j)) : !field_.is_zero(at(i, j)))
                return false;
        }
    return true;
}

bool ExactMatrix::operator==(const ExactMatrix& o) const {
    if (field_ != o.field_ || rows_ != o.rows_ || cols_ != o.cols_) return false;
    for (std::size_t i = 0; i < a_.size(); ++i)
        if (!field_.eq(a_[i], o.a_[i])) return false;
    return true;
}

ExactMatrix ExactMatrix::add(const ExactMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_ || field_ != o.field_)
        throw input_error("matrix shape or field mismatch in add");
    ExactMatrix r(field_, rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = field_.add(a_[i], o.a_[i]);
    return r;
}

ExactMatrix ExactMatrix::sub(const ExactMatrix& o) const { return add(o.neg()); }

ExactMatrix ExactMatrix::neg() const {
    ExactMatrix r(field_, rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = field_.neg(a_[i]);
    return r;
}

ExactMatrix ExactMatrix::mul(const ExactMatrix& o) const {
    if (cols_ != o.rows_ || field_ != o.field_)
        throw input_error("matrix shape or field mismatch in mul");
    ExactMatrix r(field_, rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            const Elem& x = at(i, k);
            if (field_.is_zero(x)) continue;
            for (std::size_t j = 0; j < o.cols_; ++j) {
                const Elem& y = o.at(k, j);
                if (field_.is_zero(y)) continue;
                r.at(i, j) = field_.add(r.at(i, j), field_.mul(x, y));
            }
        }
    return r;
}

ExactMatrix ExactMatrix::scalar_mul(const Elem& c) const {
    ExactMatrix r(field_, rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = field_.mul(a_[i], c);
    return r;
}

ExactMatrix ExactMatrix::transpose() const {
    ExactMatrix r(field_, cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
    return r;
}

ExactMatrix ExactMatrix::pow(std::uint64_t e) const {
    if (rows_ != cols_) throw input_error("pow requires a square matrix");
    ExactMatrix base = *this;
    ExactMatrix r = identity(field_, rows_);
    while (e) {
        if (e & 1) r = r.mul(base);
        e >>= 1;
        if (e) base = base.mul(base);
    }
    return r;
}

ExactMatrix ExactMatrix::kronecker(const ExactMatrix& o) const {
    if (field_ != o.field_) throw input_error("field mismatch in kronecker");
    ExactMatrix r(field_, rows_ * o.rows_, cols_ * o.cols_);
    for (std::size_t i1 = 0; i1 < rows_; ++i1)
        for (std::size_t j1 = 0; j1 < cols_; ++j1) {
            const Elem& x = at(i1, j1);
            if (field_.is_zero(x)) continue;
            for (std::size_t i2 = 0; i2 < o.rows_; ++i2)
                for (std::size_t j2 = 0; j2 < o.cols_; ++j2)
                    r.at(i1 * o.rows_ + i2, j1 * o.cols_ + j2) = field_.mul(x, o.at(i2, j2));
        }
    return r;
}

ExactMatrix ExactMatrix::direct_sum(const ExactMatrix& o) const {
    if (field_ != o.field_) throw input_error("field mismatch in direct_sum");
    ExactMatrix r(field_, rows_ + o.rows_, cols_ + o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r.at(i, j) = at(i, j);
    for (std::size_t i = 0; i < o.rows_; ++i)
        for (std::size_t j = 0; j < o.cols_; ++j) r.at(rows_ + i, cols_ + j) = o.at(i, j);
    return r;
}

Vec ExactMatrix::apply(const Vec& v) const {
    if (v.size() != cols_) throw input_error("vector length mismatch in apply");
    Vec r(rows_, field_.zero());
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) {
            if (field_.is_zero(at(i, j)) || field_.is_zero(v[j])) continue;
            r[i] = field_.add(r[i], field_.mul(at(i, j), v[j]));
        }
    return r;
}

Vec ExactMatrix::apply_transposed(const Vec& v) const {
    if (v.size() != rows_) throw input_error("vector length mismatch in apply_transposed");
    Vec r(cols_, field_.zero());
    for (std::size_t i = 0; i < rows_; ++i) {
        if (field_.is_zero(v[i])) continue;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (field_.is_zero(at(i, j))) continue;
            r[j] = field_.add(r[j], field_.mul(v[i], at(i, j)));
        }
    }
    return r;
}

namespace {

// Sparse row: sorted (column, value) pairs, values nonzero.
using SRow = std::vector<std::pair<std::size_t, Elem>>;

SRow axpy(const Field& F, const SRow& a, const Elem& c, const SRow& b) {
    // a + c*b with cancellation removal
    SRow r;
    r.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            r.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            Elem v = F.mul(c, b[j].second);
            if (!F.is_zero(v)) r.emplace_back(b[j].first, std::move(v));
            ++j;
        } else {
            Elem v = F.add(a[i].second, F.mul(c, b[j].second));
            if (!F.is_zero(v)) r.emplace_back(a[i].first, std::move(v));
            ++i; ++j;
        }
    }
    return r;
}

struct Echelon {
    // Pivot rows in ascending pivot-column order, fully reduced (RREF).
    std::vector<SRow> rows;
    std::vector<std::size_t> pivots;
};

// Rational rows, denominators cleared.  Elimination over the integers with
// per-row content stripping sidesteps the canonicalization gcds that mpq
// arithmetic performs on every single operation; on the fat-entried systems
// the decomposition engine produces this is worth an order of magnitude.
using ZRow = std::vector<std::pair<std::size_t, mpz_class>>;

void strip_content(ZRow& r) {
    if (r.empty()) return;
    mpz_class g = 0;
    for (const auto& [c, v] : r) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
        if (g == 1) return;
    }
    for (auto& [c, v] : r) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), g.get_mpz_t());
}

// a*x + b*y, sparse merge, zero entries dropped
ZRow zaxpy(const mpz_class& a, const ZRow& x, const mpz_class& b, const ZRow& y) {
    ZRow r;
    r.reserve(x.size() + y.size());
    std::size_t i = 0, j = 0;
    mpz_class v;
    while (i < x.size() || j < y.size()) {
        if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
            mpz_mul(v.get_mpz_t(), a.get_mpz_t(), x[i].second.get_mpz_t());
            if (v != 0) r.emplace_back(x[i].first, v);
            ++i;
        } else if (i == x.size() || y[j].first < x[i].first) {
            mpz_mul(v.get_mpz_t(), b.get_mpz_t(), y[j].second.get_mpz_t());
            if (v != 0) r.emplace_back(y[j].first, v);
            ++j;
        } else {
            mpz_mul(v.get_mpz_t(), a.get_mpz_t(), x[i].second.get_mpz_t());
            mpz_addmul(v.get_mpz_t(), b.get_mpz_t(), y[j].second.get_mpz_t());
            if (v != 0) r.emplace_back(x[i].first, v);
            ++i;
            ++j;
        }
    }
    return r;
}

Echelon echelonize_rational(const Field& F, std::vector<SRow> work) {
    std::vector<ZRow> zwork(work.size());
    for (std::size_t i = 0; i < work.size(); ++i) {
        mpz_class den = 1;
        for (const auto& [c, v] : work[i])
            mpz_lcm(den.get_mpz_t(), den.get_mpz_t(),
                    std::get<mpq_class>(v).get_den().get_mpz_t());
        ZRow zr;
        zr.reserve(work[i].size());
        for (const auto& [c, v] : work[i]) {
            const mpq_class& q = std::get<mpq_class>(v);
            mpz_class t;
            mpz_divexact(t.get_mpz_t(), den.get_mpz_t(), q.get_den().get_mpz_t());
            t *= q.get_num();
            zr.emplace_back(c, std::move(t));
        }
        strip_content(zr);
        zwork[i] = std::move(zr);
    }

    std::vector<ZRow> pivot_rows;
    std::vector<std::size_t> pivot_cols;
    std::list<std::size_t> active;
    for (std::size_t i = 0; i < zwork.size(); ++i)
        if (!zwork[i].empty()) active.push_back(i);

    while (!active.empty()) {
        auto best = active.begin();
        for (auto it = std::next(active.begin()); it != active.end(); ++it) {
            const ZRow& cand = zwork[*it];
            const ZRow& cur = zwork[*best];
            if (cand.size() < cur.size() ||
                (cand.size() == cur.size() && cand.front().first < cur.front().first))
                best = it;
        }
        std::size_t rix = *best;
        active.erase(best);
        ZRow row = std::move(zwork[rix]);
        std::size_t pc = row.front().first;
        const mpz_class& pv = row.front().second;
        for (auto it = active.begin(); it != active.end();) {
            ZRow& other = zwork[*it];
            auto hit = std::lower_bound(other.begin(), other.end(), pc,
                                        [](const auto& e, std::size_t c) { return e.first < c; });
            if (hit != other.end() && hit->first == pc) {
                mpz_class coef = -hit->second;
                other = zaxpy(pv, other, coef, row);
                strip_content(other);
                if (other.empty()) { it = active.erase(it); continue; }
            }
            ++it;
        }
        pivot_rows.push_back(std::move(row));
        pivot_cols.push_back(pc);
    }

    std::vector<std::size_t> order(pivot_rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pivot_cols[a] < pivot_cols[b]; });
    std::vector<ZRow> zrows;
    std::vector<std::size_t> pivots;
    for (std::size_t i : order) {
        zrows.push_back(std::move(pivot_rows[i]));
        pivots.push_back(pivot_cols[i]);
    }
    for (std::size_t i = zrows.size(); i-- > 0;) {
        std::size_t pc = pivots[i];
        const mpz_class& pv = zrows[i].front().second;
        for (std::size_t j = 0; j < i; ++j) {
            ZRow& other = zrows[j];
            auto hit = std::lower_bound(other.begin(), other.end(), pc,
                                        [](const auto& e, std::size_t c) { return e.first < c; });
            if (hit != other.end() && hit->first == pc) {
                mpz_class coef = -hit->second;
                other = zaxpy(pv, other, coef, zrows[i]);
                strip_content(other);
            }
        }
    }

    // unit pivots restore the canonical RREF the generic path produces
    Echelon ech;
    ech.pivots = std::move(pivots);
    ech.rows.reserve(zrows.size());
    for (const ZRow& zr : zrows) {
        const mpz_class& pv = zr.front().second;
        SRow sr;
        sr.reserve(zr.size());
        for (const auto& [c, v] : zr) {
            mpq_class q(v, pv);
            q.canonicalize();
            sr.emplace_back(c, Elem(std::move(q)));
        }
        ech.rows.push_back(std::move(sr));
    }
    return ech;
}

// Compute the canonical RREF of the sparse row set.  Pivot rows are chosen
// by fewest nonzeros first (a cheap Markowitz variant that keeps fill-in low
// on the commutator systems this feeds); the final back-substitution makes
// the output the unique RREF regardless of that choice.
Echelon echelonize(const Field& F, std::vector<SRow> work) {
    if (F.is_rational()) return echelonize_rational(F, std::move(work));
    std::vector<SRow> pivot_rows;
    std::vector<std::size_t> pivot_cols;
    std::list<std::size_t> active;
    for (std::size_t i = 0; i < work.size(); ++i)
        if (!work[i].empty()) active.push_back(i);

    while (!active.empty()) {
        auto best = active.begin();
        for (auto it = std::next(active.begin()); it != active.end(); ++it) {
            const SRow& cand = work[*it];
            const SRow& cur = work[*best];
            if (cand.size() < cur.size() ||
                (cand.size() == cur.size() && cand.front().first < cur.front().first))
                best = it;
        }
        std::size_t rix = *best;
        active.erase(best);
        SRow row = std::move(work[rix]);
        std::size_t pc = row.front().first;
        Elem lead_inv = F.inv(row.front().second);
        for (auto& [c, v] : row) v = F.mul(v, lead_inv);
        for (auto it = active.begin(); it != active.end();) {
            SRow& other = work[*it];
            auto hit = std::lower_bound(other.begin(), other.end(), pc,
                                        [](const auto& e, std::size_t c) { return e.first < c; });
            if (hit != other.end() && hit->first == pc) {
                other = axpy(F, other, F.neg(hit->second), row);
                if (other.empty()) { it = active.erase(it); continue; }
            }
            ++it;
        }
        pivot_rows.push_back(std::move(row));
        pivot_cols.push_back(pc);
    }

    // Sort by pivot column, then clear each pivot column from the other rows.
    std::vector<std::size_t> order(pivot_rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pivot_cols[a] < pivot_cols[b]; });
    Echelon ech;
    for (std::size_t i : order) {
        ech.rows.push_back(std::move(pivot_rows[i]));
        ech.pivots.push_back(pivot_cols[i]);
    }
    for (std::size_t i = ech.rows.size(); i-- > 0;) {
        std::size_t pc = ech.pivots[i];
        for (std::size_t j = 0; j < i; ++j) {
            SRow& other = ech.rows[j];
            auto hit = std::lower_bound(other.begin(), other.end(), pc,
                                        [](const auto& e, std::size_t c) { return e.first < c; });
            if (hit != other.end() && hit->first == pc)
                other = axpy(F, other, F.neg(hit->second), ech.rows[i]);
        }
    }
    return ech;
}

std::vector<SRow> to_sparse(const ExactMatrix& m) {
    std::vector<SRow> rows(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (!m.field().is_zero(m.at(i, j))) rows[i].emplace_back(j, m.at(i, j));
    return rows;
}

} // namespace

std::size_t ExactMatrix::rank() const {
    return echelonize(field_, to_sparse(*this)).pivots.size();
}

std::pair<ExactMatrix, std::vector<std::size_t>> ExactMatrix::rref() const {
    Echelon ech = echelonize(field_, to_sparse(*this));
    ExactMatrix r(field_, ech.rows.size(), cols_);
    for (std::size_t i = 0; i < ech.rows.size(); ++i)
        for (const auto& [c, v] : ech.rows[i]) r.at(i, c) = v;
    return {r, ech.pivots};
}

ExactMatrix ExactMatrix::kernel_basis() const {
    Echelon ech = echelonize(field_, to_sparse(*this));
    std::vector<bool> is_pivot(cols_, false);
    for (std::size_t c : ech.pivots) is_pivot[c] = true;
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < cols_; ++c)
        if (!is_pivot[c]) free_cols.push_back(c);
    ExactMatrix k(field_, free_cols.size(), cols_);
    for (std::size_t fi = 0; fi < free_cols.size(); ++fi) {
        std::size_t f = free_cols[fi];
        k.at(fi, f) = field_.one();
        for (std::size_t i = 0; i < ech.pivots.size(); ++i) {
            auto hit = std::lower_bound(ech.rows[i].begin(), ech.rows[i].end(), f,
                                        [](const auto& e, std::size_t c) { return e.first < c; });
            if (hit != ech.rows[i].end() && hit->first == f)
                k.at(fi, ech.pivots[i]) = field_.neg(hit->second);
        }
    }
    return k;
}

std::optional<Vec> ExactMatrix::solve(const Vec& rhs) const {
    if (rhs.size() != rows_) throw input_error("rhs length mismatch in solve");
    ExactMatrix aug(field_, rows_, cols_ + 1);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) aug.at(i, j) = at(i, j);
        aug.at(i, cols_) = rhs[i];
    }
    Echelon ech = echelonize(field_, to_sparse(aug));
    Vec x(cols_, field_.zero());
    for (std::size_t i = 0; i < ech.pivots.size(); ++i) {
        if (ech.pivots[i] == cols_) return std::nullopt;  // 0 = 1 row
        auto hit = std::lower_bound(ech.rows[i].begin(), ech.rows[i].end(), cols_,
                                    [](const auto& e, std::size_t c) { return e.first < c; });
        if (hit != ech.rows[i].end() && hit->first == cols_)
            x[ech.pivots[i]] = hit->second;
    }
    return x;
}

ExactMatrix ExactMatrix::inverse() const {
    auto inv = try_inverse();
    if (!inv) throw input_error("matrix is not invertible");
    return *inv;
}

std::optional<ExactMatrix> ExactMatrix::try_inverse() const {
    if (rows_ != cols_) return std::nullopt;
    ExactMatrix aug = hstack(identity(field_, rows_));
    auto [r, pivots] = aug.rref();
    if (pivots.size() != rows_) return std::nullopt;
    for (std::size_t i = 0; i < rows_; ++i)
        if (pivots[i] != i) return std::nullopt;
    ExactMatrix inv(field_, rows_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < rows_; ++j) inv.at(i, j) = r.at(i, rows_ + j);
    return inv;
}

ExactMatrix ExactMatrix::row_slice(const std::vector<std::size_t>& rows) const {
    ExactMatrix r(field_, rows.size(), cols_);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols_; ++j) r.at(i, j) = at(rows[i], j);
    return r;
}

ExactMatrix ExactMatrix::vstack(const ExactMatrix& o) const {
    if (cols_ != o.cols_ || field_ != o.field_)
        throw input_error("shape or field mismatch in vstack");
    ExactMatrix r(field_, rows_ + o.rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r.at(i, j) = at(i, j);
    for (std::size_t i = 0; i < o.rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r.at(rows_ + i, j) = o.at(i, j);
    return r;
}

ExactMatrix ExactMatrix::hstack(const ExactMatrix& o) const {
    if (rows_ != o.rows_ || field_ != o.field_)
        throw input_error("shape or field mismatch in hstack");
    ExactMatrix r(field_, rows_, cols_ + o.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) r.at(i, j) = at(i, j);
        for (std::size_t j = 0; j < o.cols_; ++j) r.at(i, cols_ + j) = o.at(i, j);
    }
    return r;
}

} // namespace hvb
