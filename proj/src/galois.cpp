#include "hvb/galois.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "hvb/errors.hpp"

namespace hvb {

namespace {

using UMat = std::vector<std::vector<std::uint64_t>>;

void internal_check(bool ok, const char* what) {
    if (!ok) throw std::logic_error(std::string("internal consistency failure: ") + what);
}

std::uint64_t umod(long long v, std::uint64_t n) {
    if (n == 1) return 0;
    long long m = v % static_cast<long long>(n);
    if (m < 0) m += static_cast<long long>(n);
    return static_cast<std::uint64_t>(m);
}

std::string point_str(const GPoint& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(x[i]);
    }
    return s + ")";
}

// Reduce a signed input matrix to the canonical form of a homomorphism
// between the given products: entry (i,j) taken mod dst_orders[i].  Also
// enforces well-definedness, which for products of cyclic groups says entry
// (i,j) must kill src_orders[j] mod dst_orders[i].
UMat reduce_hom(const IntMat& f, const std::vector<std::uint64_t>& src_orders,
                const std::vector<std::uint64_t>& dst_orders, const char* what) {
    if (f.size() != dst_orders.size())
        throw input_error(std::string(what) + " has the wrong number of rows");
    UMat out(dst_orders.size(), std::vector<std::uint64_t>(src_orders.size(), 0));
    for (std::size_t i = 0; i < dst_orders.size(); ++i) {
        if (f[i].size() != src_orders.size())
            throw input_error(std::string(what) + " has a row of the wrong length");
        for (std::size_t j = 0; j < src_orders.size(); ++j) {
            std::uint64_t v = umod(f[i][j], dst_orders[i]);
            if ((static_cast<unsigned __int128>(v) * src_orders[j]) % dst_orders[i] != 0)
                throw input_error(std::string(what) + " is not well defined: entry (" +
                                  std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                  ") does not kill the source order");
            out[i][j] = v;
        }
    }
    return out;
}

// Composition g after f of canonical homomorphisms, rows reduced mod the
// final target's orders.  Independent of lifts because each factor is well
// defined, so the result is again canonical.
UMat compose(const UMat& g, const UMat& f, const std::vector<std::uint64_t>& dst_orders) {
    std::size_t rows = g.size();
    std::size_t mid = f.size();
    std::size_t cols = mid ? f[0].size() : 0;
    UMat out(rows, std::vector<std::uint64_t>(cols, 0));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            unsigned __int128 acc = 0;
            for (std::size_t l = 0; l < mid; ++l)
                acc += static_cast<unsigned __int128>(g[i][l]) * f[l][j];
            out[i][j] = static_cast<std::uint64_t>(acc % dst_orders[i]);
        }
    return out;
}

UMat identity_mat(std::size_t k) {
    UMat out(k, std::vector<std::uint64_t>(k, 0));
    for (std::size_t i = 0; i < k; ++i) out[i][i] = 1;
    return out;
}

std::vector<std::uint64_t> flatten(const UMat& m) {
    std::vector<std::uint64_t> out;
    for (const auto& row : m) out.insert(out.end(), row.begin(), row.end());
    return out;
}

bool is_power_of(std::uint64_t q, std::uint64_t p) {
    if (q == 0) return false;
    while (q % p == 0) q /= p;
    return q == 1;
}

void validate_point(const GaloisModule& m, const CharacterPoint& x, const char* where) {
    if (!m.point_in_range(x.coords))
        throw input_error(std::string(where) + ": point " + point_str(x.coords) +
                          " is out of range for the given orders");
    if (m.characteristic()) {
        if (!is_power_of(x.insep_degree, *m.characteristic()))
            throw input_error(std::string(where) + ": inseparable degree " +
                              std::to_string(x.insep_degree) + " is not a power of " +
                              std::to_string(*m.characteristic()));
    } else if (x.insep_degree != 1) {
        throw input_error(std::string(where) +
                          ": nontrivial inseparable degree over characteristic zero");
    }
}

// ---------------------------------------------------------------------------
// Integer linear algebra for fibers.  Solving f*y = x in a product of cyclic
// groups is the integer system [f | diag(orders)] * (y, t) = x; we
// diagonalize with unimodular row and column operations, read off one
// solution and a lattice basis of the homogeneous solutions, and close the
// projected solution set inside the source group.
// ---------------------------------------------------------------------------

struct ZMat {
    std::size_t rows = 0, cols = 0;
    std::vector<mpz_class> a;
    ZMat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}
    mpz_class& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const mpz_class& at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    static ZMat identity(std::size_t n) {
        ZMat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }
};

// Diagonalize A in place as U * A_in * V, returning the rank.  Plain
// diagonal form, no divisibility chain; that is all solving needs.
std::size_t diagonalize(ZMat& A, ZMat& U, ZMat& V) {
    U = ZMat::identity(A.rows);
    V = ZMat::identity(A.cols);
    std::size_t t = 0;
    while (t < A.rows && t < A.cols) {
        std::size_t pi = t, pj = t;
        bool found = false;
        for (std::size_t i = t; i < A.rows; ++i)
            for (std::size_t j = t; j < A.cols; ++j) {
                if (A.at(i, j) == 0) continue;
                if (!found ||
                    mpz_cmpabs(A.at(i, j).get_mpz_t(), A.at(pi, pj).get_mpz_t()) < 0) {
                    pi = i;
                    pj = j;
                    found = true;
                }
            }
        if (!found) break;
        if (pi != t) {
            for (std::size_t j = 0; j < A.cols; ++j) std::swap(A.at(pi, j), A.at(t, j));
            for (std::size_t j = 0; j < A.rows; ++j) std::swap(U.at(pi, j), U.at(t, j));
        }
        if (pj != t)
            for (std::size_t i = 0; i < A.rows; ++i) std::swap(A.at(i, pj), A.at(i, t));
        if (pj != t)
            for (std::size_t i = 0; i < A.cols; ++i) std::swap(V.at(i, pj), V.at(i, t));
        bool clean = false;
        while (!clean) {
            clean = true;
            for (std::size_t i = t + 1; i < A.rows; ++i) {
                if (A.at(i, t) == 0) continue;
                mpz_class q = A.at(i, t) / A.at(t, t);
                if (q != 0) {
                    for (std::size_t j = 0; j < A.cols; ++j) A.at(i, j) -= q * A.at(t, j);
                    for (std::size_t j = 0; j < A.rows; ++j) U.at(i, j) -= q * U.at(t, j);
                }
                if (A.at(i, t) != 0) {
                    // remainder smaller than the pivot; promote it and restart
                    for (std::size_t j = 0; j < A.cols; ++j) std::swap(A.at(i, j), A.at(t, j));
                    for (std::size_t j = 0; j < A.rows; ++j) std::swap(U.at(i, j), U.at(t, j));
                    clean = false;
                }
            }
            if (!clean) continue;
            for (std::size_t j = t + 1; j < A.cols; ++j) {
                if (A.at(t, j) == 0) continue;
                mpz_class q = A.at(t, j) / A.at(t, t);
                if (q != 0) {
                    for (std::size_t i = 0; i < A.rows; ++i) A.at(i, j) -= q * A.at(i, t);
                    for (std::size_t i = 0; i < A.cols; ++i) V.at(i, j) -= q * V.at(i, t);
                }
                if (A.at(t, j) != 0) {
                    for (std::size_t i = 0; i < A.rows; ++i) std::swap(A.at(i, j), A.at(i, t));
                    for (std::size_t i = 0; i < A.cols; ++i) std::swap(V.at(i, j), V.at(i, t));
                    clean = false;
                }
            }
        }
        ++t;
    }
    return t;
}

struct AffineSolutions {
    std::vector<mpz_class> particular;          // one solution, length = cols
    std::vector<std::vector<mpz_class>> kernel;  // lattice basis of A z = 0
};

// Solve A z = b over the integers; nullopt when there is no solution.
std::optional<AffineSolutions> solve_integer(ZMat A, const std::vector<mpz_class>& b) {
    std::size_t rows = A.rows, cols = A.cols;
    ZMat U(0, 0), V(0, 0);
    std::size_t rank = diagonalize(A, U, V);
    std::vector<mpz_class> ub(rows, 0);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < rows; ++j) ub[i] += U.at(i, j) * b[j];
    std::vector<mpz_class> w(cols, 0);
    for (std::size_t i = 0; i < rows; ++i) {
        if (i < rank) {
            mpz_class q, r;
            mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), ub[i].get_mpz_t(),
                        A.at(i, i).get_mpz_t());
            if (r != 0) return std::nullopt;
            w[i] = q;
        } else if (ub[i] != 0) {
            return std::nullopt;
        }
    }
    AffineSolutions out;
    out.particular.assign(cols, 0);
    for (std::size_t i = 0; i < cols; ++i)
        for (std::size_t j = 0; j < rank; ++j) out.particular[i] += V.at(i, j) * w[j];
    for (std::size_t j = rank; j < cols; ++j) {
        std::vector<mpz_class> v(cols);
        for (std::size_t i = 0; i < cols; ++i) v[i] = V.at(i, j);
        out.kernel.push_back(std::move(v));
    }
    return out;
}

GPoint reduce_point(const std::vector<mpz_class>& z, const std::vector<std::uint64_t>& orders) {
    GPoint out(orders.size());
    for (std::size_t i = 0; i < orders.size(); ++i)
        out[i] = mpz_fdiv_ui(z[i].get_mpz_t(), orders[i]);
    return out;
}

void check_galois_compatible(const GaloisModule& src, const GaloisModule& dst) {
    if (src.num_generators() != dst.num_generators())
        throw input_error("source and target present different Galois quotients "
                          "(generator counts differ)");
    if (src.characteristic() != dst.characteristic())
        throw input_error("source and target declare different characteristics");
}

// Shared by apply_hom and fiber_of: canonical form of f plus the
// equivariance check against paired generators.
UMat checked_hom(const IntMat& f, const GaloisModule& src, const GaloisModule& dst) {
    check_galois_compatible(src, dst);
    UMat fc = reduce_hom(f, src.orders(), dst.orders(), "homomorphism");
    for (std::size_t t = 0; t < src.num_generators(); ++t) {
        UMat lhs = compose(fc, src.generators()[t], dst.orders());
        UMat rhs = compose(dst.generators()[t], fc, dst.orders());
        for (std::size_t i = 0; i < dst.num_factors(); ++i)
            for (std::size_t j = 0; j < src.num_factors(); ++j)
                if (lhs[i][j] != rhs[i][j]) {
                    GPoint e(src.num_factors(), 0);
                    e[j] = 1;
                    throw input_error(
                        "homomorphism is not Galois-equivariant: generator " +
                        std::to_string(t + 1) + " disagrees at point " + point_str(e));
                }
    }
    return fc;
}

}  // namespace

GaloisModule::GaloisModule(std::vector<std::uint64_t> orders, std::vector<IntMat> generators,
                           std::optional<std::uint32_t> p)
    : orders_(std::move(orders)), p_(p) {
    for (std::uint64_t n : orders_)
        if (n == 0) throw input_error("cyclic order 0 is not a finite group");
    if (p_ && *p_ < 2) throw input_error("characteristic must be at least 2");
    std::size_t k = orders_.size();
    gens_.reserve(generators.size());
    for (std::size_t t = 0; t < generators.size(); ++t) {
        UMat g = reduce_hom(generators[t], orders_, orders_,
                            ("generator " + std::to_string(t + 1)).c_str());
        // injectivity on a finite group is bijectivity; a nontrivial kernel
        // of [g | diag(orders)] projected to the first k coordinates means
        // some nonzero point dies
        ZMat A(k, 2 * k);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) A.at(i, j) = g[i][j];
            A.at(i, k + i) = orders_[i];
        }
        auto sol = solve_integer(A, std::vector<mpz_class>(k, 0));
        internal_check(sol.has_value(), "homogeneous integer system lost its zero solution");
        for (const auto& v : sol->kernel) {
            std::vector<mpz_class> head(v.begin(), v.begin() + k);
            GPoint q = reduce_point(head, orders_);
            if (std::any_of(q.begin(), q.end(), [](std::uint64_t c) { return c != 0; }))
                throw input_error("generator " + std::to_string(t + 1) +
                                  " is not an automorphism: it kills " + point_str(q));
        }
        gens_.push_back(std::move(g));
    }

    // close the generated group, identity first
    constexpr std::size_t kGroupCap = 100000;
    std::set<std::vector<std::uint64_t>> seen;
    group_.push_back(identity_mat(k));
    seen.insert(flatten(group_[0]));
    for (std::size_t head = 0; head < group_.size(); ++head) {
        for (const auto& g : gens_) {
            UMat next = compose(group_[head], g, orders_);
            if (seen.insert(flatten(next)).second) {
                if (group_.size() >= kGroupCap)
                    throw input_error("Galois group closure exceeds 100000 elements");
                group_.push_back(std::move(next));
            }
        }
    }

    // every generator is invertible, so its inverse must already be in the
    // closed group; locating it is the promised verification
    for (std::size_t t = 0; t < gens_.size(); ++t) {
        bool found = false;
        for (const auto& h : group_) {
            if (compose(gens_[t], h, orders_) != identity_mat(k)) continue;
            if (compose(h, gens_[t], orders_) != identity_mat(k)) continue;
            found = true;
            break;
        }
        internal_check(found, "automorphism inverse missing from the closed group");
    }
}

std::uint64_t GaloisModule::size() const {
    const unsigned __int128 limit = static_cast<unsigned __int128>(1) << 63;
    unsigned __int128 total = 1;
    for (std::uint64_t n : orders_) {
        if (total > limit / n) throw input_error("module size overflows");
        total *= n;
    }
    return static_cast<std::uint64_t>(total);
}

GPoint GaloisModule::act(const UMat& m, const GPoint& x) const {
    std::size_t k = orders_.size();
    GPoint out(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        unsigned __int128 acc = 0;
        for (std::size_t j = 0; j < k; ++j)
            acc += static_cast<unsigned __int128>(m[i][j]) * x[j];
        out[i] = static_cast<std::uint64_t>(acc % orders_[i]);
    }
    return out;
}

bool GaloisModule::point_in_range(const GPoint& x) const {
    if (x.size() != orders_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] >= orders_[i]) return false;
    return true;
}

CharacterOrbit orbit_of(const GaloisModule& m, const CharacterPoint& x) {
    validate_point(m, x, "orbit_of");
    std::set<GPoint> seen;
    std::vector<GPoint> queue{x.coords};
    seen.insert(x.coords);
    for (std::size_t head = 0; head < queue.size(); ++head)
        for (const auto& g : m.generators()) {
            GPoint y = m.act(g, queue[head]);
            if (seen.insert(y).second) queue.push_back(y);
        }
    CharacterOrbit orbit;
    orbit.points.assign(seen.begin(), seen.end());
    orbit.sep_degree = orbit.points.size();
    orbit.insep_degree = x.insep_degree;
    return orbit;
}

CharacterPoint apply_hom(const IntMat& f, const GaloisModule& src, const GaloisModule& dst,
                         const CharacterPoint& x, std::uint64_t insep_collapse) {
    UMat fc = checked_hom(f, src, dst);
    validate_point(src, x, "apply_hom");
    if (insep_collapse == 0 || x.insep_degree % insep_collapse != 0)
        throw input_error("inseparable collapse " + std::to_string(insep_collapse) +
                          " does not divide the degree " + std::to_string(x.insep_degree));
    std::size_t kd = dst.num_factors();
    GPoint out(kd, 0);
    for (std::size_t i = 0; i < kd; ++i) {
        unsigned __int128 acc = 0;
        for (std::size_t j = 0; j < src.num_factors(); ++j)
            acc += static_cast<unsigned __int128>(fc[i][j]) * x.coords[j];
        out[i] = static_cast<std::uint64_t>(acc % dst.orders()[i]);
    }
    CharacterPoint y{std::move(out), x.insep_degree / insep_collapse};
    validate_point(dst, y, "apply_hom image");
    return y;
}

std::vector<CharacterPoint> fiber_of(const IntMat& f, const GaloisModule& src,
                                     const GaloisModule& dst, const CharacterPoint& x) {
    UMat fc = checked_hom(f, src, dst);
    validate_point(dst, x, "fiber_of");
    std::size_t ks = src.num_factors();
    std::size_t kd = dst.num_factors();
    ZMat A(kd, ks + kd);
    for (std::size_t i = 0; i < kd; ++i) {
        for (std::size_t j = 0; j < ks; ++j) A.at(i, j) = fc[i][j];
        A.at(i, ks + i) = dst.orders()[i];
    }
    std::vector<mpz_class> b(kd);
    for (std::size_t i = 0; i < kd; ++i) b[i] = static_cast<unsigned long>(x.coords[i]);
    auto sol = solve_integer(A, b);
    if (!sol) return {};

    std::vector<mpz_class> head(sol->particular.begin(), sol->particular.begin() + ks);
    GPoint y0 = reduce_point(head, src.orders());
    std::vector<GPoint> steps;
    for (const auto& v : sol->kernel) {
        std::vector<mpz_class> vh(v.begin(), v.begin() + ks);
        steps.push_back(reduce_point(vh, src.orders()));
    }
    constexpr std::size_t kFiberCap = 100000;
    std::set<GPoint> seen{y0};
    std::vector<GPoint> queue{y0};
    for (std::size_t pos = 0; pos < queue.size(); ++pos)
        for (const auto& s : steps) {
            GPoint y(ks);
            for (std::size_t i = 0; i < ks; ++i)
                y[i] = (queue[pos][i] + s[i]) % src.orders()[i];
            if (seen.insert(y).second) {
                if (queue.size() >= kFiberCap)
                    throw input_error("fiber exceeds 100000 points");
                queue.push_back(std::move(y));
            }
        }

    std::vector<CharacterPoint> out;
    out.reserve(seen.size());
    for (const auto& y : seen) {
        // this really is a preimage
        GPoint img(kd, 0);
        for (std::size_t i = 0; i < kd; ++i) {
            unsigned __int128 acc = 0;
            for (std::size_t j = 0; j < ks; ++j)
                acc += static_cast<unsigned __int128>(fc[i][j]) * y[j];
            img[i] = static_cast<std::uint64_t>(acc % dst.orders()[i]);
        }
        internal_check(img == x.coords, "fiber point does not map to the base point");
        out.push_back(CharacterPoint{y, x.insep_degree});
    }
    return out;
}

}  // namespace hvb
