#include "hvb/nilmod.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

#include "hvb/errors.hpp"
#include "hvb/poly.hpp"
#include "hvb/rng.hpp"

namespace hvb {

namespace {

void internal_check(bool ok, const char* what) {
    if (!ok) throw std::logic_error(std::string("internal consistency failure: ") + what);
}

void check_same_context(const NilModule& a, const NilModule& b) {
    if (a.field != b.field) throw input_error("modules live over different fields");
    if (a.flavor != b.flavor) throw input_error("modules have different flavors");
    if (a.g != b.g) throw input_error("modules have different generator counts");
}

// The parts that measure distance from the trivial action: X_i additively,
// X_i - I multiplicatively.  These are the nilpotent matrices all filtration
// arguments run on.
std::vector<ExactMatrix> nilpotent_parts(const NilModule& m) {
    if (m.flavor == Flavor::Additive) return m.mats;
    std::vector<ExactMatrix> out;
    out.reserve(m.mats.size());
    ExactMatrix id = ExactMatrix::identity(m.field, m.rank);
    for (const auto& x : m.mats) out.push_back(x.sub(id));
    return out;
}

Vec vec_of(const ExactMatrix& m) {
    Vec v;
    v.reserve(m.rows() * m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) v.push_back(m.at(i, j));
    return v;
}

// Solutions Z of Z A_i = B_i Z for all i, as a canonically ordered basis of
// (rb x ra) matrices.  No validity checks; callers guarantee shapes.
std::vector<ExactMatrix> intertwiner_basis(const Field& F,
                                           const std::vector<ExactMatrix>& A,
                                           std::size_t ra,
                                           const std::vector<ExactMatrix>& B,
                                           std::size_t rb) {
    std::size_t g = A.size();
    std::size_t n = ra * rb;
    if (n == 0) return {};
    ExactMatrix sys(F, g * n, n);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t u = 0; u < rb; ++u) {
            for (std::size_t v = 0; v < ra; ++v) {
                std::size_t row = i * n + u * ra + v;
                for (std::size_t w = 0; w < ra; ++w) {
                    const Elem& x = A[i].at(w, v);
                    if (F.is_zero(x)) continue;
                    Elem& slot = sys.at(row, u * ra + w);
                    slot = F.add(slot, x);
                }
                for (std::size_t w = 0; w < rb; ++w) {
                    const Elem& y = B[i].at(u, w);
                    if (F.is_zero(y)) continue;
                    Elem& slot = sys.at(row, w * ra + v);
                    slot = F.sub(slot, y);
                }
            }
        }
    }
    ExactMatrix ker = sys.kernel_basis();
    std::vector<ExactMatrix> out;
    out.reserve(ker.rows());
    for (std::size_t t = 0; t < ker.rows(); ++t) {
        ExactMatrix z(F, rb, ra);
        for (std::size_t u = 0; u < rb; ++u)
            for (std::size_t w = 0; w < ra; ++w) z.set(u, w, ker.at(t, u * ra + w));
        out.push_back(std::move(z));
    }
    return out;
}

Elem trace_of(const ExactMatrix& m) {
    const Field& F = m.field();
    Elem t = F.zero();
    for (std::size_t i = 0; i < m.rows(); ++i) t = F.add(t, m.at(i, i));
    return t;
}

// trace(a*b) without forming the product.
Elem trace_of_product(const ExactMatrix& a, const ExactMatrix& b) {
    const Field& F = a.field();
    Elem t = F.zero();
    for (std::size_t u = 0; u < a.rows(); ++u)
        for (std::size_t v = 0; v < a.cols(); ++v) {
            const Elem& x = a.at(u, v);
            if (F.is_zero(x)) continue;
            const Elem& y = b.at(v, u);
            if (F.is_zero(y)) continue;
            t = F.add(t, F.mul(x, y));
        }
    return t;
}

// Minimal polynomial by one kernel computation on the Krylov matrix of
// powers I, phi, ..., phi^r.  The first canonical kernel vector has its free
// coordinate at the lowest dependent power, which is exactly the degree.
Poly min_poly(const ExactMatrix& phi) {
    const Field& F = phi.field();
    std::size_t r = phi.rows();
    internal_check(r > 0, "minimal polynomial of an empty matrix");
    std::vector<ExactMatrix> pw;
    pw.push_back(ExactMatrix::identity(F, r));
    for (std::size_t k = 0; k < r; ++k) pw.push_back(pw.back().mul(phi));
    ExactMatrix kry(F, r * r, r + 1);
    for (std::size_t j = 0; j <= r; ++j) {
        std::size_t idx = 0;
        for (std::size_t u = 0; u < r; ++u)
            for (std::size_t v = 0; v < r; ++v) kry.set(idx++, j, pw[j].at(u, v));
    }
    ExactMatrix ker = kry.kernel_basis();
    internal_check(ker.rows() > 0, "Cayley-Hamilton bound violated");
    std::vector<Elem> coeffs;
    std::size_t deg = 0;
    for (std::size_t j = r + 1; j-- > 0;)
        if (!F.is_zero(ker.at(0, j))) { deg = j; break; }
    Elem lead_inv = F.inv(ker.at(0, deg));
    for (std::size_t j = 0; j <= deg; ++j) coeffs.push_back(F.mul(ker.at(0, j), lead_inv));
    return Poly(F, std::move(coeffs));
}

ExactMatrix eval_at_matrix(const Poly& f, const ExactMatrix& m) {
    const Field& F = m.field();
    std::size_t r = m.rows();
    ExactMatrix acc(F, r, r);
    for (int i = f.degree(); i >= 0; --i) {
        acc = acc.mul(m);
        Elem c = f.coeff(static_cast<std::size_t>(i));
        if (!F.is_zero(c))
            for (std::size_t j = 0; j < r; ++j) acc.at(j, j) = F.add(acc.at(j, j), c);
    }
    return acc;
}

Poly poly_pow(const Poly& f, unsigned e) {
    Poly acc = Poly::one(f.field());
    for (unsigned i = 0; i < e; ++i) acc = acc.mul(f);
    return acc;
}

// Columns of the kernel of m, as a (cols x dim) matrix.
ExactMatrix kernel_columns(const ExactMatrix& m) {
    return m.kernel_basis().transpose();
}

// Coordinates of the columns of w in the independent column family b;
// requires span(w) inside span(b).
ExactMatrix coords_in_basis(const ExactMatrix& b, const ExactMatrix& w) {
    std::size_t s = b.cols();
    auto [red, pivots] = b.hstack(w).rref();
    internal_check(pivots.size() == s, "vectors escape the invariant subspace");
    for (std::size_t i = 0; i < s; ++i)
        internal_check(pivots[i] == i, "column family is not independent");
    const Field& F = b.field();
    ExactMatrix c(F, s, w.cols());
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < w.cols(); ++j) c.set(i, j, red.at(i, s + j));
    return c;
}

// Fitting split along one endomorphism: if its minimal polynomial has at
// least two coprime parts, the primary kernels decompose the space.  The
// parts of an uncertified factorization are still pairwise coprime, so the
// split is genuine either way.  factor_certified reports whether the
// factorization itself was certified irreducible.
std::optional<std::vector<ExactMatrix>> try_primary_split(const ExactMatrix& phi,
                                                          Rng& rng,
                                                          bool& factor_certified) {
    factor_certified = true;
    Poly mu = min_poly(phi);
    if (mu.degree() <= 1) return std::nullopt;
    Factorization fz;
    try {
        fz = factor(mu, rng.next());
    } catch (const inconclusive_error&) {
        factor_certified = false;
        return std::nullopt;
    }
    factor_certified = fz.certified;
    if (fz.parts.size() < 2) return std::nullopt;
    std::vector<ExactMatrix> bases;
    std::size_t total = 0;
    for (const auto& [pi, e] : fz.parts) {
        ExactMatrix n = eval_at_matrix(poly_pow(pi, e), phi);
        ExactMatrix cols = kernel_columns(n);
        internal_check(cols.cols() > 0, "primary component collapsed");
        total += cols.cols();
        bases.push_back(std::move(cols));
    }
    internal_check(total == phi.rows(), "primary components do not fill the space");
    return bases;
}

ExactMatrix random_combination(const std::vector<ExactMatrix>& basis, Rng& rng) {
    const Field& F = basis[0].field();
    std::size_t r = basis[0].rows();
    ExactMatrix acc(F, r, r);
    for (const auto& e : basis) {
        Elem c = F.is_rational() ? F.from_int(rng.small(3))
                                 : F.elem_at(rng.below(F.order()));
        if (F.is_zero(c)) continue;
        acc = acc.add(e.scalar_mul(c));
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Cyclic-summand projection.
//
// When End(M)/rad is a matrix algebra (M isotypic), generic endomorphisms
// have primary minimal polynomials, so Fitting splits never fire even though
// M is decomposable.  Attack the module directly instead: take the
// submodule U generated by a random vector and solve the linear system for
// an equivariant projection pi with pi restricted to U the identity.  The
// system is solvable exactly when U is a direct summand, and then e = incl
// after pi is an idempotent endomorphism whose kernels split M.  Everything
// is exact linear algebra over the coefficient field; when no generated
// submodule is a summand the tier simply reports nothing.
// ---------------------------------------------------------------------------

// Column basis of the smallest invariant subspace containing u.
ExactMatrix generated_submodule(const Field& F, const std::vector<ExactMatrix>& mats,
                                const Vec& u) {
    std::size_t r = u.size();
    ExactMatrix rows(F, 1, r);
    for (std::size_t j = 0; j < r; ++j) rows.set(0, j, u[j]);
    auto reduce = [](const ExactMatrix& m) {
        auto [red, pivots] = m.rref();
        std::vector<std::size_t> keep(pivots.size());
        for (std::size_t i = 0; i < pivots.size(); ++i) keep[i] = i;
        return red.row_slice(keep);
    };
    rows = reduce(rows);
    while (true) {
        ExactMatrix bigger = rows;
        for (const auto& x : mats) {
            ExactMatrix xt(F, rows.rows(), r);
            for (std::size_t t = 0; t < rows.rows(); ++t) {
                Vec v(r);
                for (std::size_t j = 0; j < r; ++j) v[j] = rows.at(t, j);
                Vec xv = x.apply(v);
                for (std::size_t j = 0; j < r; ++j) xt.set(t, j, xv[j]);
            }
            bigger = bigger.vstack(xt);
        }
        ExactMatrix next = reduce(bigger);
        if (next.rows() == rows.rows()) break;
        rows = std::move(next);
    }
    return rows.transpose();
}

std::optional<std::vector<ExactMatrix>> try_cyclic_split(const Field& F,
                                                         const std::vector<ExactMatrix>& mats,
                                                         std::size_t r, Rng& rng) {
    std::size_t g = mats.size();
    for (int attempt = 0; attempt < 12; ++attempt) {
        Vec u(r);
        for (std::size_t j = 0; j < r; ++j)
            u[j] = F.is_rational() ? F.from_int(rng.small(3))
                                   : F.elem_at(rng.below(F.order()));
        ExactMatrix b = generated_submodule(F, mats, u);
        std::size_t s = b.cols();
        if (s == 0 || s == r) continue;
        std::vector<ExactMatrix> act;
        act.reserve(g);
        for (const auto& x : mats) act.push_back(coords_in_basis(b, x.mul(b)));
        // unknown projection P (s x r), row-major: equivariance P X_i = A_i P,
        // then the splitting condition P B = I_s
        std::size_t n = s * r;
        ExactMatrix sys(F, g * n + s * s, n);
        Vec rhs(g * n + s * s, F.zero());
        for (std::size_t i = 0; i < g; ++i)
            for (std::size_t a = 0; a < s; ++a)
                for (std::size_t c = 0; c < r; ++c) {
                    std::size_t row = i * n + a * r + c;
                    for (std::size_t w = 0; w < r; ++w) {
                        const Elem& x = mats[i].at(w, c);
                        if (F.is_zero(x)) continue;
                        Elem& slot = sys.at(row, a * r + w);
                        slot = F.add(slot, x);
                    }
                    for (std::size_t w = 0; w < s; ++w) {
                        const Elem& y = act[i].at(a, w);
                        if (F.is_zero(y)) continue;
                        Elem& slot = sys.at(row, w * r + c);
                        slot = F.sub(slot, y);
                    }
                }
        for (std::size_t a = 0; a < s; ++a)
            for (std::size_t c = 0; c < s; ++c) {
                std::size_t row = g * n + a * s + c;
                for (std::size_t w = 0; w < r; ++w) {
                    const Elem& x = b.at(w, c);
                    if (F.is_zero(x)) continue;
                    sys.at(row, a * r + w) = F.add(sys.at(row, a * r + w), x);
                }
                if (a == c) rhs[row] = F.one();
            }
        auto sol = sys.solve(rhs);
        if (!sol) continue;
        ExactMatrix proj(F, s, r);
        for (std::size_t a = 0; a < s; ++a)
            for (std::size_t w = 0; w < r; ++w) proj.set(a, w, (*sol)[a * r + w]);
        ExactMatrix e = b.mul(proj);
        internal_check(e.mul(e) == e, "splitting projection is not idempotent");
        std::vector<ExactMatrix> bases;
        bases.push_back(kernel_columns(e));
        bases.push_back(kernel_columns(ExactMatrix::identity(F, r).sub(e)));
        internal_check(bases[0].cols() + bases[1].cols() == r,
                       "projection kernels do not fill the space");
        internal_check(bases[0].cols() > 0 && bases[1].cols() > 0,
                       "projection split is trivial");
        return bases;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// The splitting search.  Returns column bases of two or more complementary
// submodules, or nullopt with `certified` reporting whether indecomposability
// was actually proved.
//
// Why a failed scan can certify: non-splitting endomorphisms (those with
// primary minimal polynomial) form a proper linear subspace of End(M)
// whenever End(M)/rad is commutative with at least two simple components, so
// scanning a full basis either finds a splitter or rules that case out.
// What remains is End/rad a field (indecomposable, certified) or a
// noncommutative semisimple part, which is attacked by cyclic-summand
// projection and, over small finite algebras, by exhaustive scan.
// ---------------------------------------------------------------------------
std::optional<std::vector<ExactMatrix>> find_split(const Field& F,
                                                   const std::vector<ExactMatrix>& mats,
                                                   std::size_t r,
                                                   Rng& rng,
                                                   bool& certified) {
    certified = false;
    if (r == 1) { certified = true; return std::nullopt; }

    std::vector<ExactMatrix> E = intertwiner_basis(F, mats, r, mats, r);
    std::size_t d = E.size();
    internal_check(d >= 1, "endomorphism algebra lost its identity");
    if (d == 1) { certified = true; return std::nullopt; }

    bool ignored = false;

    // random small combinations split typical composites in one or two tries
    for (int t = 0; t < 8; ++t) {
        ExactMatrix phi = random_combination(E, rng);
        if (phi.is_zero()) continue;
        if (auto s = try_primary_split(phi, rng, ignored)) return s;
    }

    // basis scan; a complete clean scan is what the certification below rests on
    std::size_t scan_cap = 64;
    bool full_scan = d <= scan_cap;
    bool scan_clean = true;
    for (std::size_t k = 0; k < std::min(d, scan_cap); ++k) {
        bool fc = true;
        if (auto s = try_primary_split(E[k], rng, fc)) return s;
        scan_clean = scan_clean && fc;
    }

    // pairwise products catch splitters that no single basis element exposes
    std::size_t budget = 64;
    for (std::size_t i = 0; i < d && budget; ++i)
        for (std::size_t j = i + 1; j < d && budget; ++j) {
            --budget;
            ExactMatrix phi = E[i].mul(E[j]);
            if (phi.is_zero()) continue;
            if (auto s = try_primary_split(phi, rng, ignored)) return s;
        }

    // trace Gram matrix: cheap, and over Q its rank is dim End/rad
    ExactMatrix gram(F, d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            Elem t = trace_of_product(E[i], E[j]);
            gram.set(i, j, t);
            gram.set(j, i, t);
        }

    if (F.is_rational()) {
        if (gram.rank() == 1) { certified = true; return std::nullopt; }

        // commutator test, gated by cost; commutators landing in the radical
        // mean End/rad is commutative
        bool know_comm = false, comm = false;
        double cost = 0.5 * double(d) * double(d) * double(r) * double(r) * double(r);
        if (cost <= 8e6) {
            know_comm = true;
            comm = true;
            for (std::size_t i = 0; i < d && comm; ++i)
                for (std::size_t j = i + 1; j < d && comm; ++j) {
                    ExactMatrix c = E[i].mul(E[j]).sub(E[j].mul(E[i]));
                    if (c.is_zero()) continue;
                    for (std::size_t k = 0; k < d && comm; ++k)
                        if (!F.is_zero(trace_of_product(c, E[k]))) comm = false;
                }
        }
        if (know_comm && comm && full_scan && scan_clean) {
            certified = true;
            return std::nullopt;
        }
        if (auto s = try_cyclic_split(F, mats, r, rng)) return s;
        return std::nullopt;  // uncertified
    }

    // finite field: if End(M) is commutative a clean full scan certifies
    // (End/rad is then a finite field exactly when no splitter exists)
    double cost = 0.5 * double(d) * double(d) * double(r) * double(r) * double(r);
    if (cost <= 8e6) {
        bool comm = true;
        for (std::size_t i = 0; i < d && comm; ++i)
            for (std::size_t j = i + 1; j < d && comm; ++j)
                if (E[i].mul(E[j]) != E[j].mul(E[i])) comm = false;
        if (comm && full_scan && scan_clean) {
            certified = true;
            return std::nullopt;
        }
    }

    if (auto s = try_cyclic_split(F, mats, r, rng)) return s;

    // small algebra over a small field: scan every endomorphism up to scalar.
    // An idempotent exists in End(M) iff M decomposes, so exhaustion decides.
    double total = 1;
    for (std::size_t k = 0; k < d && total <= 4096; ++k) total *= double(F.order());
    if (total <= 4096 && r <= 16) {
        std::uint64_t q = F.order();
        // odometer over coefficient tuples with leading coefficient 1
        std::vector<std::uint64_t> tup(d, 0);
        for (std::size_t lead = 0; lead < d; ++lead) {
            // tuples with tup[lead] == 1 and tup[k] == 0 for k < lead
            std::fill(tup.begin(), tup.end(), 0);
            tup[lead] = 1;
            bool done = false;
            while (!done) {
                ExactMatrix cand(F, r, r);
                for (std::size_t k = lead; k < d; ++k) {
                    if (tup[k] == 0) continue;
                    cand = cand.add(E[k].scalar_mul(F.elem_at(tup[k])));
                }
                if (auto s = try_primary_split(cand, rng, ignored)) return s;
                // advance positions lead+1..d-1
                std::size_t pos = d;
                done = true;
                while (pos-- > lead + 1) {
                    if (++tup[pos] < q) { done = false; break; }
                    tup[pos] = 0;
                }
            }
        }
        certified = true;  // every endomorphism has a primary minimal polynomial
        return std::nullopt;
    }
    return std::nullopt;  // uncertified
}

struct Leaf {
    std::vector<ExactMatrix> mats;
    ExactMatrix embed;  // columns embed the leaf into the original space
    bool certified = true;
};

void split_rec(const Field& F, const std::vector<ExactMatrix>& mats,
               const ExactMatrix& embed, Rng& rng, std::vector<Leaf>& out) {
    std::size_t r = embed.cols();
    if (r == 0) return;
    bool certified = false;
    auto split = find_split(F, mats, r, rng, certified);
    if (!split) {
        out.push_back({mats, embed, certified});
        return;
    }
    for (const auto& b : *split) {
        std::vector<ExactMatrix> sub;
        sub.reserve(mats.size());
        for (const auto& x : mats) sub.push_back(coords_in_basis(b, x.mul(b)));
        split_rec(F, sub, embed.mul(b), rng, out);
    }
}

// Invertible intertwiner search between two matrix tuples of equal size.
// For certified indecomposables this is complete: when the modules are
// isomorphic the non-isomorphisms form a proper subspace of Hom, which
// cannot contain a whole basis.
std::optional<ExactMatrix> iso_scan(const Field& F,
                                    const std::vector<ExactMatrix>& A,
                                    const std::vector<ExactMatrix>& B,
                                    std::size_t r, Rng& rng) {
    if (r == 0) return ExactMatrix::identity(F, 0);
    std::vector<ExactMatrix> H = intertwiner_basis(F, A, r, B, r);
    if (H.empty()) return std::nullopt;
    for (const auto& h : H)
        if (h.try_inverse()) return h;
    std::size_t tries = std::min<std::size_t>(24 + 8 * H.size(), 160);
    for (std::size_t t = 0; t < tries; ++t) {
        ExactMatrix w = random_combination(H, rng);
        if (auto inv = w.try_inverse()) { (void)inv; return w; }
    }
    if (F.is_finite()) {
        double total = 1;
        for (std::size_t k = 0; k < H.size() && total <= 4096; ++k) total *= double(F.order());
        if (total <= 4096) {
            std::uint64_t q = F.order();
            std::size_t h = H.size();
            std::vector<std::uint64_t> tup(h, 0);
            for (std::size_t lead = 0; lead < h; ++lead) {
                std::fill(tup.begin(), tup.end(), 0);
                tup[lead] = 1;
                bool done = false;
                while (!done) {
                    ExactMatrix w(F, r, r);
                    for (std::size_t k = lead; k < h; ++k) {
                        if (tup[k] == 0) continue;
                        w = w.add(H[k].scalar_mul(F.elem_at(tup[k])));
                    }
                    if (w.try_inverse()) return w;
                    std::size_t pos = h;
                    done = true;
                    while (pos-- > lead + 1) {
                        if (++tup[pos] < q) { done = false; break; }
                        tup[pos] = 0;
                    }
                }
            }
        }
    }
    return std::nullopt;
}

std::size_t loewy_of(const Field& F, const std::vector<ExactMatrix>& nilparts,
                     std::size_t r) {
    if (r == 0) return 0;
    auto nonzero_rows = [&](const ExactMatrix& m) {
        auto [red, pivots] = m.rref();
        std::vector<std::size_t> keep(pivots.size());
        for (std::size_t i = 0; i < pivots.size(); ++i) keep[i] = i;
        return red.row_slice(keep);
    };
    ExactMatrix cur(F, 0, r * r);
    {
        ExactMatrix rows(F, nilparts.size(), r * r);
        for (std::size_t i = 0; i < nilparts.size(); ++i) {
            Vec v = vec_of(nilparts[i]);
            for (std::size_t j = 0; j < v.size(); ++j) rows.set(i, j, v[j]);
        }
        cur = nonzero_rows(rows);
    }
    std::size_t depth = 1;
    while (cur.rows() > 0) {
        ++depth;
        internal_check(depth <= r + 1, "nilpotency filtration does not terminate");
        ExactMatrix rows(F, cur.rows() * nilparts.size(), r * r);
        std::size_t at = 0;
        for (std::size_t t = 0; t < cur.rows(); ++t) {
            ExactMatrix w(F, r, r);
            for (std::size_t u = 0; u < r; ++u)
                for (std::size_t v = 0; v < r; ++v) w.set(u, v, cur.at(t, u * r + v));
            for (const auto& n : nilparts) {
                Vec prod = vec_of(n.mul(w));
                for (std::size_t j = 0; j < prod.size(); ++j) rows.set(at, j, prod[j]);
                ++at;
            }
        }
        cur = nonzero_rows(rows);
    }
    return depth;
}

std::vector<std::vector<std::size_t>> rank_profiles(const Field& F,
                                                    const std::vector<ExactMatrix>& nilparts) {
    std::vector<std::vector<std::size_t>> out;
    out.reserve(nilparts.size());
    for (const auto& n : nilparts) {
        std::vector<std::size_t> prof;
        ExactMatrix p = n;
        while (!p.is_zero()) {
            prof.push_back(p.rank());
            p = p.mul(n);
        }
        out.push_back(std::move(prof));
    }
    return out;
}

// Canonical ordering of summand matrix tuples: rank, then socle filtration
// length, then per-generator rank profiles, then entrywise comparison.
int cmp_mats(const Field& F, Flavor flavor,
             const std::vector<ExactMatrix>& A, const std::vector<ExactMatrix>& B) {
    std::size_t ra = A.empty() ? 0 : A[0].rows();
    std::size_t rb = B.empty() ? 0 : B[0].rows();
    if (ra != rb) return ra < rb ? -1 : 1;
    auto nil = [&](const std::vector<ExactMatrix>& m) {
        if (flavor == Flavor::Additive) return m;
        std::vector<ExactMatrix> out;
        ExactMatrix id = ExactMatrix::identity(F, ra);
        for (const auto& x : m) out.push_back(x.sub(id));
        return out;
    };
    auto na = nil(A), nb = nil(B);
    std::size_t la = loewy_of(F, na, ra), lb = loewy_of(F, nb, ra);
    if (la != lb) return la < lb ? -1 : 1;
    auto pa = rank_profiles(F, na), pb = rank_profiles(F, nb);
    if (pa != pb) return pa < pb ? -1 : 1;
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t u = 0; u < ra; ++u)
            for (std::size_t v = 0; v < ra; ++v) {
                int c = F.cmp(A[i].at(u, v), B[i].at(u, v));
                if (c) return c;
            }
    return 0;
}

}  // namespace

NilModule trivial_module(const Field& field, Flavor flavor, std::size_t g,
                         std::size_t rank) {
    if (g == 0) throw input_error("generator count must be at least 1");
    if (flavor == Flavor::MultiplicativeUnipotent && field.characteristic() == 0)
        throw input_error("multiplicative unipotent modules require positive characteristic");
    ExactMatrix gen = flavor == Flavor::Additive ? ExactMatrix(field, rank, rank)
                                                 : ExactMatrix::identity(field, rank);
    return NilModule{field, flavor, g, rank, std::vector<ExactMatrix>(g, gen)};
}

std::vector<std::string> validate(const NilModule& m) {
    if (m.g == 0) throw input_error("generator count must be at least 1");
    if (m.flavor == Flavor::MultiplicativeUnipotent && m.field.characteristic() == 0)
        throw input_error("multiplicative unipotent modules require positive characteristic");
    if (m.mats.size() != m.g)
        throw input_error("expected " + std::to_string(m.g) + " generator matrices, got " +
                          std::to_string(m.mats.size()));
    for (const auto& x : m.mats) {
        if (x.field() != m.field)
            throw input_error("generator matrix over a different field than the module");
        if (x.rows() != m.rank || x.cols() != m.rank)
            throw input_error("generator matrices must be " + std::to_string(m.rank) + " x " +
                              std::to_string(m.rank));
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < m.g; ++i)
        for (std::size_t j = i + 1; j < m.g; ++j)
            if (m.mats[i].mul(m.mats[j]) != m.mats[j].mul(m.mats[i]))
                out.push_back("generators " + std::to_string(i + 1) + " and " +
                              std::to_string(j + 1) + " do not commute");
    if (m.rank > 0) {
        ExactMatrix id = ExactMatrix::identity(m.field, m.rank);
        for (std::size_t i = 0; i < m.g; ++i) {
            if (m.flavor == Flavor::Additive) {
                if (!m.mats[i].pow(m.rank).is_zero())
                    out.push_back("generator " + std::to_string(i + 1) + " is not nilpotent");
            } else {
                if (!m.mats[i].sub(id).pow(m.rank).is_zero())
                    out.push_back("generator " + std::to_string(i + 1) + " is not unipotent");
            }
        }
    }
    return out;
}

void require_valid(const NilModule& m) {
    std::vector<std::string> v = validate(m);
    if (v.empty()) return;
    std::string msg = "invalid module: ";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) msg += "; ";
        msg += v[i];
    }
    throw input_error(msg);
}

NilModule direct_sum(const NilModule& a, const NilModule& b) {
    check_same_context(a, b);
    require_valid(a);
    require_valid(b);
    std::vector<ExactMatrix> mats;
    mats.reserve(a.g);
    for (std::size_t i = 0; i < a.g; ++i) mats.push_back(a.mats[i].direct_sum(b.mats[i]));
    return NilModule{a.field, a.flavor, a.g, a.rank + b.rank, std::move(mats)};
}

NilModule tensor(const NilModule& a, const NilModule& b) {
    check_same_context(a, b);
    require_valid(a);
    require_valid(b);
    std::vector<ExactMatrix> mats;
    mats.reserve(a.g);
    ExactMatrix ia = ExactMatrix::identity(a.field, a.rank);
    ExactMatrix ib = ExactMatrix::identity(b.field, b.rank);
    for (std::size_t i = 0; i < a.g; ++i) {
        if (a.flavor == Flavor::Additive)
            mats.push_back(a.mats[i].kronecker(ib).add(ia.kronecker(b.mats[i])));
        else
            mats.push_back(a.mats[i].kronecker(b.mats[i]));
    }
    return NilModule{a.field, a.flavor, a.g, a.rank * b.rank, std::move(mats)};
}

NilModule dual(const NilModule& a) {
    require_valid(a);
    std::vector<ExactMatrix> mats;
    mats.reserve(a.g);
    for (const auto& x : a.mats) {
        if (a.flavor == Flavor::Additive)
            mats.push_back(x.neg().transpose());
        else
            mats.push_back(x.inverse().transpose());
    }
    return NilModule{a.field, a.flavor, a.g, a.rank, std::move(mats)};
}

NilModule hom_module(const NilModule& a, const NilModule& b) {
    return tensor(dual(a), b);
}

std::vector<ExactMatrix> hom_basis(const NilModule& a, const NilModule& b) {
    check_same_context(a, b);
    require_valid(a);
    require_valid(b);
    return intertwiner_basis(a.field, a.mats, a.rank, b.mats, b.rank);
}

std::size_t hom_dim(const NilModule& a, const NilModule& b) {
    return hom_basis(a, b).size();
}

DecompositionReport decompose(const NilModule& m, std::uint64_t seed) {
    require_valid(m);
    const Field& F = m.field;
    DecompositionReport rep{{}, ExactMatrix::identity(F, m.rank), true};
    if (m.rank == 0) return rep;

    Rng rng(seed ^ 0x6b72756c6c736368ULL);
    std::vector<Leaf> leaves;
    split_rec(F, m.mats, ExactMatrix::identity(F, m.rank), rng, leaves);

    // group leaves by isomorphism; the scan is complete for certified leaves
    // and still sound (never merges distinct classes) for uncertified ones
    struct Group {
        std::vector<std::size_t> members;
        std::vector<ExactMatrix> to_first;  // witness: member coords -> first member coords
    };
    std::vector<Group> groups;
    for (std::size_t idx = 0; idx < leaves.size(); ++idx) {
        const Leaf& lf = leaves[idx];
        std::size_t r = lf.embed.cols();
        bool placed = false;
        for (auto& grp : groups) {
            const Leaf& head = leaves[grp.members[0]];
            if (head.embed.cols() != r) continue;
            Rng sub = rng.fork();
            if (auto w = iso_scan(F, lf.mats, head.mats, r, sub)) {
                grp.members.push_back(idx);
                grp.to_first.push_back(std::move(*w));
                placed = true;
                break;
            }
        }
        if (!placed) {
            Group g;
            g.members.push_back(idx);
            g.to_first.push_back(ExactMatrix::identity(F, r));
            groups.push_back(std::move(g));
        }
    }

    // representative: canonically smallest member; re-aim witnesses at it
    struct Ordered {
        std::size_t rep;                     // leaf index of the representative
        std::vector<std::size_t> members;
        std::vector<ExactMatrix> to_rep;
        bool certified;
    };
    std::vector<Ordered> ordered;
    for (auto& grp : groups) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < grp.members.size(); ++k)
            if (cmp_mats(F, m.flavor, leaves[grp.members[k]].mats,
                         leaves[grp.members[best]].mats) < 0)
                best = k;
        Ordered o;
        o.rep = grp.members[best];
        o.members = grp.members;
        ExactMatrix to_first_inv = grp.to_first[best].inverse();
        for (auto& w : grp.to_first) o.to_rep.push_back(to_first_inv.mul(w));
        o.certified = false;
        for (std::size_t idx : grp.members) o.certified = o.certified || leaves[idx].certified;
        ordered.push_back(std::move(o));
    }
    std::sort(ordered.begin(), ordered.end(), [&](const Ordered& x, const Ordered& y) {
        return cmp_mats(F, m.flavor, leaves[x.rep].mats, leaves[y.rep].mats) < 0;
    });

    std::optional<ExactMatrix> q;
    std::size_t total = 0;
    for (std::size_t gi = 0; gi < ordered.size(); ++gi) {
        const Ordered& o = ordered[gi];
        std::size_t r = leaves[o.rep].embed.cols();
        total += r * o.members.size();
        for (std::size_t k = 0; k < o.members.size(); ++k) {
            ExactMatrix block = leaves[o.members[k]].embed.mul(o.to_rep[k].inverse());
            q = q ? q->hstack(block) : block;
        }
        rep.certified = rep.certified && o.certified;
        rep.summands.push_back(Summand{NilModule{F, m.flavor, m.g, r, leaves[o.rep].mats},
                                       o.members.size(), o.certified});
    }
    internal_check(total == m.rank, "summand ranks do not add up");
    rep.basechange = q->inverse();

    // verify the advertised conjugation identity before returning
    ExactMatrix expected(F, m.rank, m.rank);
    for (std::size_t i = 0; i < m.g; ++i) {
        std::size_t off = 0;
        for (const auto& s : rep.summands)
            for (std::size_t c = 0; c < s.multiplicity; ++c) {
                for (std::size_t u = 0; u < s.module.rank; ++u)
                    for (std::size_t v = 0; v < s.module.rank; ++v)
                        expected.set(off + u, off + v, s.module.mats[i].at(u, v));
                off += s.module.rank;
            }
        ExactMatrix got = rep.basechange.mul(m.mats[i]).mul(*q);
        internal_check(got == expected, "base change does not block-diagonalize");
    }
    return rep;
}

std::optional<ExactMatrix> iso_witness(const NilModule& a, const NilModule& b,
                                       std::uint64_t seed) {
    check_same_context(a, b);
    require_valid(a);
    require_valid(b);
    if (a.rank != b.rank) return std::nullopt;
    const Field& F = a.field;
    if (a.rank == 0) return ExactMatrix::identity(F, 0);
    auto na = nilpotent_parts(a), nb = nilpotent_parts(b);
    if (rank_profiles(F, na) != rank_profiles(F, nb)) return std::nullopt;

    Rng rng(seed ^ 0x69736f7363616eULL);
    if (auto w = iso_scan(F, a.mats, b.mats, a.rank, rng)) return w;

    DecompositionReport da = decompose(a, seed);
    DecompositionReport db = decompose(b, seed);
    if (!da.certified || !db.certified)
        throw inconclusive_error(
            "isomorphism undecided: a decomposition has uncertified summands");

    // match summand classes; complete because representatives are certified
    if (da.summands.size() != db.summands.size()) return std::nullopt;
    std::vector<std::size_t> match(da.summands.size());
    std::vector<bool> used(db.summands.size(), false);
    std::vector<ExactMatrix> bridges;
    for (std::size_t i = 0; i < da.summands.size(); ++i) {
        const Summand& sa = da.summands[i];
        bool found = false;
        for (std::size_t j = 0; j < db.summands.size() && !found; ++j) {
            if (used[j]) continue;
            const Summand& sb = db.summands[j];
            if (sa.multiplicity != sb.multiplicity || sa.module.rank != sb.module.rank)
                continue;
            Rng sub = rng.fork();
            if (auto w = iso_scan(F, sa.module.mats, sb.module.mats, sa.module.rank, sub)) {
                match[i] = j;
                used[j] = true;
                bridges.push_back(std::move(*w));
                found = true;
            }
        }
        if (!found) return std::nullopt;
    }

    // block offsets on each side
    auto offsets = [](const DecompositionReport& rep) {
        std::vector<std::vector<std::size_t>> out;
        std::size_t off = 0;
        for (const auto& s : rep.summands) {
            std::vector<std::size_t> per;
            for (std::size_t c = 0; c < s.multiplicity; ++c) {
                per.push_back(off);
                off += s.module.rank;
            }
            out.push_back(std::move(per));
        }
        return out;
    };
    auto offa = offsets(da), offb = offsets(db);
    ExactMatrix wd(F, a.rank, a.rank);
    for (std::size_t i = 0; i < da.summands.size(); ++i) {
        const ExactMatrix& z = bridges[i];
        for (std::size_t c = 0; c < da.summands[i].multiplicity; ++c) {
            std::size_t ro = offb[match[i]][c], co = offa[i][c];
            for (std::size_t u = 0; u < z.rows(); ++u)
                for (std::size_t v = 0; v < z.cols(); ++v) wd.set(ro + u, co + v, z.at(u, v));
        }
    }
    ExactMatrix w = db.basechange.inverse().mul(wd).mul(da.basechange);
    for (std::size_t i = 0; i < a.g; ++i)
        internal_check(w.mul(a.mats[i]) == b.mats[i].mul(w),
                       "assembled witness fails to intertwine");
    internal_check(w.try_inverse().has_value(), "assembled witness is singular");
    return w;
}

bool is_isomorphic(const NilModule& a, const NilModule& b, std::uint64_t seed) {
    return iso_witness(a, b, seed).has_value();
}

std::vector<std::size_t> ext_dims(const NilModule& a, const NilModule& b,
                                  std::size_t max_degree) {
    check_same_context(a, b);
    require_valid(a);
    require_valid(b);
    if (a.flavor != Flavor::Additive || a.field.characteristic() != 0)
        throw regime_error(
            "ext groups are computed for the additive flavor over characteristic zero only");
    const Field& F = a.field;
    std::size_t g = a.g;
    NilModule h = hom_module(a, b);
    std::size_t dd = h.rank;
    std::vector<std::size_t> out(max_degree + 1, 0);
    if (dd == 0) return out;

    // exterior algebra bookkeeping: masks of each degree in increasing order
    std::vector<std::vector<std::uint32_t>> masks(g + 1);
    for (std::uint32_t s = 0; s < (1u << g); ++s)
        masks[static_cast<std::size_t>(std::popcount(s))].push_back(s);

    std::size_t top = std::min(max_degree, g > 0 ? g - 1 : 0);
    std::vector<std::size_t> dranks(g, 0);
    for (std::size_t i = 0; i <= top && i + 1 <= g; ++i) {
        std::size_t rows = dd * masks[i + 1].size();
        std::size_t cols = dd * masks[i].size();
        ExactMatrix dmat(F, rows, cols);
        for (std::size_t sp = 0; sp < masks[i].size(); ++sp) {
            std::uint32_t s = masks[i][sp];
            for (std::size_t k = 0; k < g; ++k) {
                if (s & (1u << k)) continue;
                std::uint32_t t = s | (1u << k);
                std::size_t tp = static_cast<std::size_t>(
                    std::lower_bound(masks[i + 1].begin(), masks[i + 1].end(), t) -
                    masks[i + 1].begin());
                bool negative = std::popcount(s & ((1u << k) - 1)) % 2 == 1;
                const ExactMatrix& z = h.mats[k];
                for (std::size_t u = 0; u < dd; ++u)
                    for (std::size_t v = 0; v < dd; ++v) {
                        const Elem& x = z.at(u, v);
                        if (F.is_zero(x)) continue;
                        dmat.set(tp * dd + u, sp * dd + v, negative ? F.neg(x) : x);
                    }
            }
        }
        dranks[i] = dmat.rank();
    }
    for (std::size_t i = 0; i <= max_degree; ++i) {
        std::size_t ci = i <= g ? dd * masks[i].size() : 0;
        std::size_t ri = (i + 1 <= g && i <= top) ? dranks[i] : 0;
        std::size_t rim1 = (i >= 1 && i - 1 <= top) ? dranks[i - 1] : 0;
        out[i] = ci - ri - rim1;
    }
    return out;
}

std::size_t loewy_length(const NilModule& m) {
    require_valid(m);
    return loewy_of(m.field, nilpotent_parts(m), m.rank);
}

std::size_t power_order(const NilModule& m) {
    require_valid(m);
    if (m.flavor != Flavor::MultiplicativeUnipotent)
        throw regime_error("power order is defined for the multiplicative flavor only");
    std::uint32_t p = m.field.characteristic();
    std::size_t best = 0;
    for (const auto& x : m.mats) {
        std::size_t n = 0;
        ExactMatrix y = x;
        while (!y.is_identity()) {
            y = y.pow(p);
            ++n;
            internal_check(n <= 200, "unipotent order does not stabilize");
        }
        best = std::max(best, n);
    }
    return best;
}

} // namespace hvb
