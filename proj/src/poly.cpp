#include "hvb/poly.hpp"

#include <algorithm>
#include <optional>
#include <tuple>

#include "hvb/errors.hpp"
#include "hvb/matrix.hpp"
#include "hvb/rng.hpp"

namespace hvb {

void Poly::trim() {
    while (!c_.empty() && field_.is_zero(c_.back())) c_.pop_back();
}

bool Poly::is_one() const { return c_.size() == 1 && field_.is_one(c_[0]); }

Elem Poly::coeff(std::size_t i) const {
    return i < c_.size() ? c_[i] : field_.zero();
}

bool Poly::operator==(const Poly& o) const {
    if (field_ != o.field_ || c_.size() != o.c_.size()) return false;
    for (std::size_t i = 0; i < c_.size(); ++i)
        if (!field_.eq(c_[i], o.c_[i])) return false;
    return true;
}

Poly Poly::add(const Poly& o) const {
    std::vector<Elem> r(std::max(c_.size(), o.c_.size()), field_.zero());
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] = c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] = field_.add(r[i], o.c_[i]);
    return Poly(field_, std::move(r));
}

Poly Poly::sub(const Poly& o) const { return add(o.neg()); }

Poly Poly::neg() const {
    std::vector<Elem> r(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] = field_.neg(c_[i]);
    return Poly(field_, std::move(r));
}

Poly Poly::mul(const Poly& o) const {
    if (is_zero() || o.is_zero()) return Poly(field_);
    std::vector<Elem> r(c_.size() + o.c_.size() - 1, field_.zero());
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (field_.is_zero(c_[i])) continue;
        for (std::size_t j = 0; j < o.c_.size(); ++j)
            r[i + j] = field_.add(r[i + j], field_.mul(c_[i], o.c_[j]));
    }
    return Poly(field_, std::move(r));
}

Poly Poly::scalar_mul(const Elem& k) const {
    std::vector<Elem> r(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] = field_.mul(c_[i], k);
    return Poly(field_, std::move(r));
}

std::pair<Poly, Poly> Poly::divmod(const Poly& d) const {
    if (d.is_zero()) throw input_error("polynomial division by zero");
    if (degree() < d.degree()) return {Poly(field_), *this};
    Elem lead_inv = field_.inv(d.lead());
    std::vector<Elem> rem = c_;
    std::size_t dn = d.c_.size();
    std::vector<Elem> quot(c_.size() - dn + 1, field_.zero());
    for (std::size_t shift = quot.size(); shift-- > 0;) {
        Elem q = field_.mul(rem[shift + dn - 1], lead_inv);
        if (field_.is_zero(q)) continue;
        quot[shift] = q;
        for (std::size_t j = 0; j < dn; ++j)
            rem[shift + j] = field_.sub(rem[shift + j], field_.mul(q, d.c_[j]));
    }
    return {Poly(field_, std::move(quot)), Poly(field_, std::move(rem))};
}

Poly Poly::div_exact(const Poly& d) const {
    auto [q, r] = divmod(d);
    if (!r.is_zero()) throw input_error("polynomial division was not exact");
    return q;
}

Poly Poly::monic() const {
    if (is_zero()) return *this;
    return scalar_mul(field_.inv(lead()));
}

Poly Poly::derivative() const {
    if (c_.size() <= 1) return Poly(field_);
    std::vector<Elem> r(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i)
        r[i - 1] = field_.mul(c_[i], field_.from_int(static_cast<long>(i)));
    return Poly(field_, std::move(r));
}

Elem Poly::eval(const Elem& at) const {
    Elem r = field_.zero();
    for (std::size_t i = c_.size(); i-- > 0;) r = field_.add(field_.mul(r, at), c_[i]);
    return r;
}

Poly Poly::scale_arg(const Elem& k) const {
    std::vector<Elem> r(c_.size());
    Elem pw = field_.one();
    for (std::size_t i = 0; i < c_.size(); ++i) {
        r[i] = field_.mul(c_[i], pw);
        pw = field_.mul(pw, k);
    }
    return Poly(field_, std::move(r));
}

Poly Poly::pow_mod(std::uint64_t e, const Poly& modulus) const {
    Poly base = mod(modulus);
    Poly r = Poly::one(field_);
    while (e) {
        if (e & 1) r = r.mul(base).mod(modulus);
        base = base.mul(base).mod(modulus);
        e >>= 1;
    }
    return r;
}

Poly Poly::gcd(Poly a, Poly b) {
    while (!b.is_zero()) {
        Poly r = a.mod(b);
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

std::tuple<Poly, Poly, Poly> Poly::ext_gcd(const Poly& a, const Poly& b) {
    const Field& F = a.field();
    Poly r0 = a, r1 = b;
    Poly s0 = Poly::one(F), s1 = Poly::zero(F);
    Poly t0 = Poly::zero(F), t1 = Poly::one(F);
    while (!r1.is_zero()) {
        auto [q, r] = r0.divmod(r1);
        r0 = r1; r1 = r;
        Poly ns = s0.sub(q.mul(s1)); s0 = s1; s1 = ns;
        Poly nt = t0.sub(q.mul(t1)); t0 = t1; t1 = nt;
    }
    Elem li = F.inv(r0.lead());
    return {r0.scalar_mul(li), s0.scalar_mul(li), t0.scalar_mul(li)};
}

namespace {

// Coefficient-wise p-th root of f(x) = g(x^p); valid whenever f' = 0.
Poly pth_root_poly(const Poly& f) {
    const Field& F = f.field();
    std::uint32_t p = F.characteristic();
    std::vector<Elem> r;
    for (int i = 0; i <= f.degree(); i += static_cast<int>(p))
        r.push_back(F.pth_root(f.coeff(static_cast<std::size_t>(i))));
    return Poly(F, std::move(r));
}

int poly_cmp(const Poly& a, const Poly& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree() ? -1 : 1;
    for (int i = 0; i <= a.degree(); ++i) {
        int c = a.field().cmp(a.coeff(static_cast<std::size_t>(i)),
                              b.coeff(static_cast<std::size_t>(i)));
        if (c) return c;
    }
    return 0;
}

// ---- Berlekamp over GF(q) ------------------------------------------------

std::vector<Poly> berlekamp_squarefree(const Poly& f, std::uint64_t seed) {
    const Field& F = f.field();
    int n = f.degree();
    if (n <= 1) return {f};
    std::uint64_t q = F.order();

    // Frobenius matrix: column j holds x^(j*q) mod f.
    Poly xq = Poly::x(F).pow_mod(q, f);
    ExactMatrix M(F, static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    Poly col = Poly::one(F);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= col.degree(); ++i)
            M.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                col.coeff(static_cast<std::size_t>(i));
        col = col.mul_mod(xq, f);
    }
    ExactMatrix ker =
        M.sub(ExactMatrix::identity(F, static_cast<std::size_t>(n))).kernel_basis();
    std::size_t k = ker.rows();  // number of irreducible factors
    if (k <= 1) return {f};

    auto row_poly = [&](std::size_t i) {
        std::vector<Elem> c(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j)
            c[static_cast<std::size_t>(j)] = ker.at(i, static_cast<std::size_t>(j));
        return Poly(F, std::move(c));
    };

    std::vector<Poly> factors = {f};
    auto try_split_with = [&](const Poly& w) {
        if (w.is_zero() || factors.size() >= k) return;
        std::vector<Poly> next;
        for (const Poly& u : factors) {
            if (u.degree() <= 1) {
                next.push_back(u);
                continue;
            }
            Poly g = Poly::gcd(u, w.mod(u));
            if (g.degree() > 0 && g.degree() < u.degree()) {
                next.push_back(g);
                next.push_back(u.div_exact(g));
            } else {
                next.push_back(u);
            }
        }
        factors = std::move(next);
    };

    if (q <= 1024) {
        // Deterministic split: exhaust v - c over basis vectors and constants.
        for (std::size_t vi = 0; vi < k && factors.size() < k; ++vi) {
            Poly v = row_poly(vi);
            if (v.is_constant()) continue;
            for (std::uint64_t ci = 0; ci < q && factors.size() < k; ++ci)
                try_split_with(v.sub(Poly::constant(F, F.elem_at(ci))));
        }
    } else {
        // Seeded splitting elements drawn from the Berlekamp subalgebra.
        Rng rng(seed ^ 0x9d2c5680cafef00dULL);
        int rounds = 0;
        while (factors.size() < k && rounds++ < 512) {
            std::vector<Elem> mix(static_cast<std::size_t>(n), F.zero());
            for (std::size_t vi = 0; vi < k; ++vi) {
                Elem c = F.elem_at(rng.below(q));
                for (int j = 0; j < n; ++j)
                    mix[static_cast<std::size_t>(j)] =
                        F.add(mix[static_cast<std::size_t>(j)],
                              F.mul(c, ker.at(vi, static_cast<std::size_t>(j))));
            }
            Poly rho(F, std::move(mix));
            if (rho.is_constant()) continue;
            if (q % 2 == 1) {
                try_split_with(rho.pow_mod((q - 1) / 2, f).sub(Poly::one(F)));
            } else {
                // trace map in characteristic 2
                Poly t = rho, acc = rho;
                for (std::uint64_t m = 2; m < q; m <<= 1) {
                    t = t.mul_mod(t, f);
                    acc = acc.add(t);
                }
                try_split_with(acc);
            }
        }
        if (factors.size() < k)
            throw inconclusive_error("finite-field factor splitting stalled");
    }
    std::sort(factors.begin(), factors.end(),
              [](const Poly& a, const Poly& b) { return poly_cmp(a, b) < 0; });
    return factors;
}

// ---- rational factorization ----------------------------------------------

using ZV = std::vector<mpz_class>;  // integer coefficients, low first

void zv_trim(ZV& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

ZV zv_mod(ZV a, const mpz_class& M) {
    for (auto& c : a) {
        c %= M;
        if (c < 0) c += M;
    }
    zv_trim(a);
    return a;
}

ZV zv_mul(const ZV& a, const ZV& b, const mpz_class& M) {
    if (a.empty() || b.empty()) return {};
    ZV r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    return zv_mod(std::move(r), M);
}

ZV zv_add(const ZV& a, const ZV& b, const mpz_class& M) {
    ZV r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return zv_mod(std::move(r), M);
}

ZV zv_sub(const ZV& a, const ZV& b, const mpz_class& M) {
    ZV r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    return zv_mod(std::move(r), M);
}

// Division by a monic divisor in (Z/M)[x].
std::pair<ZV, ZV> zv_divmod_monic(ZV a, const ZV& d, const mpz_class& M) {
    if (d.empty() || d.back() != 1)
        throw input_error("internal: modular divisor must be monic");
    if (a.size() < d.size()) return {{}, zv_mod(std::move(a), M)};
    std::size_t dn = d.size();
    ZV q(a.size() - dn + 1, 0);
    for (std::size_t shift = q.size(); shift-- > 0;) {
        mpz_class c = a[shift + dn - 1] % M;
        if (c < 0) c += M;
        if (c == 0) continue;
        q[shift] = c;
        for (std::size_t j = 0; j < dn; ++j) a[shift + j] -= c * d[j];
    }
    return {zv_mod(std::move(q), M), zv_mod(std::move(a), M)};
}

// One quadratic Hensel step: a factorization and Bezout pair valid mod m
// become valid mod m^2.  Requires f = g*h, s*g + t*h = 1 (mod m), g, h monic.
void hensel_step(const ZV& f, ZV& g, ZV& h, ZV& s, ZV& t, const mpz_class& m) {
    mpz_class M = m * m;
    ZV e = zv_sub(zv_mod(f, M), zv_mul(g, h, M), M);
    auto [q, r] = zv_divmod_monic(zv_mul(s, e, M), h, M);
    ZV g1 = zv_add(zv_add(g, zv_mul(t, e, M), M), zv_mul(q, g, M), M);
    ZV h1 = zv_add(h, r, M);
    ZV b = zv_sub(zv_add(zv_mul(s, g1, M), zv_mul(t, h1, M), M), ZV{1}, M);
    auto [c, d] = zv_divmod_monic(zv_mul(s, b, M), h1, M);
    s = zv_sub(s, d, M);
    t = zv_sub(zv_sub(t, zv_mul(t, b, M), M), zv_mul(c, g1, M), M);
    g = std::move(g1);
    h = std::move(h1);
}

ZV zv_from_gf(const Poly& f) {
    ZV r(static_cast<std::size_t>(f.degree() + 1));
    for (int i = 0; i <= f.degree(); ++i)
        r[static_cast<std::size_t>(i)] =
            std::get<GFVec>(f.coeff(static_cast<std::size_t>(i)))[0];
    return r;
}

// Lift pairwise coprime monic factors of f from mod p to mod target (a power
// of p) with a balanced product tree.
std::vector<ZV> hensel_tree(const ZV& f, std::vector<ZV> factors, std::uint32_t p,
                            const mpz_class& target) {
    if (factors.size() == 1) return {zv_mod(f, target)};
    mpz_class P(p);
    std::size_t half = factors.size() / 2;
    std::vector<ZV> left(factors.begin(), factors.begin() + static_cast<long>(half));
    std::vector<ZV> right(factors.begin() + static_cast<long>(half), factors.end());
    ZV A = {1}, B = {1};
    for (const ZV& g : left) A = zv_mul(A, g, P);
    for (const ZV& g : right) B = zv_mul(B, g, P);

    // Bezout pair over GF(p), computed with field polynomials.
    Field Fp = Field::finite(p);
    auto to_poly = [&](const ZV& v) {
        std::vector<Elem> c(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            c[i] = Fp.from_int(static_cast<long>(mpz_class(v[i] % p).get_si()));
        return Poly(Fp, std::move(c));
    };
    auto [bez_gcd, sp, tp] = Poly::ext_gcd(to_poly(A), to_poly(B));
    if (!bez_gcd.is_one())
        throw input_error("internal: modular factors are not coprime");
    ZV s = zv_from_gf(sp), t = zv_from_gf(tp);

    mpz_class m(p);
    while (m < target) {
        hensel_step(f, A, B, s, t, m);
        m *= m;
    }
    std::vector<ZV> out = hensel_tree(zv_mod(A, target), std::move(left), p, target);
    std::vector<ZV> rgt = hensel_tree(zv_mod(B, target), std::move(right), p, target);
    out.insert(out.end(), rgt.begin(), rgt.end());
    return out;
}

// Exact division test of monic integer polynomials; quotient when exact.
std::optional<ZV> zdiv_exact(const ZV& a, const ZV& b) {
    if (b.empty() || b.back() != 1 || a.size() < b.size()) return std::nullopt;
    ZV rem = a;
    std::size_t bn = b.size();
    ZV q(a.size() - bn + 1, 0);
    for (std::size_t shift = q.size(); shift-- > 0;) {
        mpz_class c = rem[shift + bn - 1];
        if (c == 0) continue;
        q[shift] = c;
        for (std::size_t j = 0; j < bn; ++j) rem[shift + j] -= c * b[j];
    }
    for (const auto& c : rem)
        if (c != 0) return std::nullopt;
    return q;
}

mpz_class zv_height(const ZV& f) {
    mpz_class h = 0;
    for (const auto& c : f) {
        mpz_class a = abs(c);
        if (a > h) h = a;
    }
    return h;
}

struct ZFactors {
    std::vector<ZV> parts;
    bool certified;
};

// Factor a monic squarefree integer polynomial.  Degree-set pruning across a
// few good primes certifies many irreducibles before any lifting happens;
// otherwise Hensel-lift the factorization with the fewest modular factors and
// recombine subsets, bounded by subset_cap trial products.
ZFactors factor_squarefree_monic_int(ZV F, std::uint64_t seed, std::size_t subset_cap) {
    int n = static_cast<int>(F.size()) - 1;
    if (n <= 1) return {{std::move(F)}, true};

    static const std::uint32_t primes[] = {
        3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,
        53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109,
        113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179};

    struct ModFact {
        std::uint32_t p;
        std::vector<Poly> factors;
    };
    std::vector<ModFact> usable;
    std::vector<char> allowed(static_cast<std::size_t>(n) + 1, 1);
    for (std::uint32_t p : primes) {
        if (usable.size() >= 4) break;
        Field Fp = Field::finite(p);
        std::vector<Elem> c(F.size());
        for (std::size_t i = 0; i < F.size(); ++i)
            c[i] = Fp.from_int(static_cast<long>(mpz_class(F[i] % p).get_si()));
        Poly fp(Fp, std::move(c));
        if (Poly::gcd(fp, fp.derivative()).degree() != 0) continue;  // bad prime
        std::vector<Poly> fac = berlekamp_squarefree(fp, seed);
        if (fac.size() == 1) return {{std::move(F)}, true};
        // degrees attainable by products of the modular factors
        std::vector<char> mask(static_cast<std::size_t>(n) + 1, 0);
        mask[0] = 1;
        for (const Poly& g : fac)
            for (int d = n - g.degree(); d >= 0; --d)
                if (mask[static_cast<std::size_t>(d)])
                    mask[static_cast<std::size_t>(d + g.degree())] = 1;
        for (int d = 0; d <= n; ++d)
            allowed[static_cast<std::size_t>(d)] =
                static_cast<char>(allowed[static_cast<std::size_t>(d)] &&
                                  mask[static_cast<std::size_t>(d)]);
        bool proper = false;
        for (int d = 1; d < n; ++d)
            if (allowed[static_cast<std::size_t>(d)]) proper = true;
        if (!proper) return {{std::move(F)}, true};
        usable.push_back({p, std::move(fac)});
    }
    if (usable.empty())
        throw inconclusive_error("no usable prime for rational factorization");

    ModFact* best = &usable[0];
    for (auto& mf : usable)
        if (mf.factors.size() < best->factors.size()) best = &mf;
    std::uint32_t p = best->p;

    // Coefficient bound for monic factors (Mignotte, rounded up generously),
    // doubled to cover the signed symmetric range.
    mpz_class bound = zv_height(F) * static_cast<unsigned long>(n + 1);
    mpz_class two_pow;
    mpz_ui_pow_ui(two_pow.get_mpz_t(), 2, static_cast<unsigned long>(n + 1));
    bound *= two_pow;
    mpz_class target(p);
    while (target <= 2 * bound) target *= p;

    std::vector<ZV> mods;
    mods.reserve(best->factors.size());
    for (const Poly& g : best->factors) mods.push_back(zv_from_gf(g));
    std::vector<ZV> pool = hensel_tree(zv_mod(F, target), std::move(mods), p, target);

    auto symmetric = [&](ZV v) {
        mpz_class half = target / 2;
        for (auto& c : v)
            if (c > half) c -= target;
        return v;
    };

    std::vector<ZV> found;
    ZV rest = F;
    std::size_t trials = 0;
    bool capped = false;

    std::size_t size = 1;
    while (!capped && size <= pool.size() / 2) {
        std::vector<std::size_t> idx(size);
        for (std::size_t i = 0; i < size; ++i) idx[i] = i;
        bool split = false;
        while (!capped && !split) {
            int dsum = 0;
            for (std::size_t i : idx) dsum += static_cast<int>(pool[i].size()) - 1;
            if (dsum < static_cast<int>(rest.size()) - 1 &&
                allowed[static_cast<std::size_t>(dsum)]) {
                if (++trials > subset_cap) {
                    capped = true;
                    break;
                }
                ZV cand = {1};
                for (std::size_t i : idx) cand = zv_mul(cand, pool[i], target);
                cand = symmetric(cand);
                if (auto quot = zdiv_exact(rest, cand)) {
                    found.push_back(cand);
                    rest = *quot;
                    for (std::size_t i = idx.size(); i-- > 0;)
                        pool.erase(pool.begin() + static_cast<long>(idx[i]));
                    split = true;  // restart this size over the reduced pool
                    break;
                }
            }
            // next index combination, lexicographic
            std::size_t i = size;
            bool advanced = false;
            while (i-- > 0) {
                if (idx[i] + (size - i) < pool.size()) {
                    ++idx[i];
                    for (std::size_t j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
                    advanced = true;
                    break;
                }
            }
            if (!advanced) break;
        }
        if (!split) ++size;
    }

    ZFactors out;
    out.certified = !capped;
    out.parts = std::move(found);
    if (static_cast<int>(rest.size()) - 1 > 0) out.parts.push_back(std::move(rest));
    std::sort(out.parts.begin(), out.parts.end(), [](const ZV& a, const ZV& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        for (std::size_t i = a.size(); i-- > 0;)
            if (a[i] != b[i]) return a[i] < b[i];
        return false;
    });
    return out;
}

// Monic squarefree rational polynomial -> monic rational factors, through the
// monic integer model g(y) = D^n f(y/D) with D the coefficient denominator lcm.
std::pair<std::vector<Poly>, bool> factor_squarefree_rational(const Poly& f,
                                                              std::uint64_t seed,
                                                              std::size_t subset_cap) {
    const Field& F = f.field();
    int n = f.degree();
    if (n <= 1) return {{f}, true};
    mpz_class D = 1;
    for (int i = 0; i < n; ++i) {
        mpq_class ci = std::get<mpq_class>(f.coeff(static_cast<std::size_t>(i)));
        mpz_lcm(D.get_mpz_t(), D.get_mpz_t(), ci.get_den().get_mpz_t());
    }
    ZV g(static_cast<std::size_t>(n) + 1);
    mpz_class pw = 1;
    for (int i = n; i >= 0; --i) {
        mpq_class scaled =
            std::get<mpq_class>(f.coeff(static_cast<std::size_t>(i))) * mpq_class(pw);
        g[static_cast<std::size_t>(i)] = scaled.get_num();  // denominator is 1 by choice of D
        pw *= D;
    }
    ZFactors zf = factor_squarefree_monic_int(std::move(g), seed, subset_cap);
    std::vector<Poly> out;
    Elem Dq = F.from_rational(mpq_class(D));
    for (const ZV& h : zf.parts) {
        std::vector<Elem> c(h.size());
        for (std::size_t i = 0; i < h.size(); ++i)
            c[i] = F.from_rational(mpq_class(h[i]));
        out.push_back(Poly(F, std::move(c)).scale_arg(Dq).monic());
    }
    return {std::move(out), zf.certified};
}

}  // namespace

std::vector<std::pair<Poly, unsigned>> squarefree_decomposition(const Poly& f_in) {
    Poly f = f_in.monic();
    std::vector<std::pair<Poly, unsigned>> out;
    if (f.degree() < 1) return out;
    const Field& F = f.field();
    if (F.characteristic() == 0) {
        // Yun's algorithm
        Poly g = Poly::gcd(f, f.derivative());
        Poly c = f.div_exact(g);
        Poly d = f.derivative().div_exact(g).sub(c.derivative());
        unsigned i = 1;
        while (c.degree() > 0) {
            Poly pi = Poly::gcd(c, d);
            if (pi.degree() > 0) out.emplace_back(pi, i);
            c = c.div_exact(pi);
            d = d.div_exact(pi).sub(c.derivative());
            ++i;
        }
        return out;
    }
    // Characteristic p: extract the multiplicities prime to p, then recurse
    // on the p-th power part via coefficient-wise p-th roots.
    std::uint32_t p = F.characteristic();
    Poly c = Poly::gcd(f, f.derivative());
    Poly w = f.div_exact(c);
    unsigned i = 1;
    while (w.degree() > 0) {
        Poly y = Poly::gcd(w, c);
        Poly z = w.div_exact(y);
        if (z.degree() > 0) out.emplace_back(z, i);
        w = y;
        c = c.div_exact(y);
        ++i;
    }
    if (c.degree() > 0) {
        for (auto& [h, mult] : squarefree_decomposition(pth_root_poly(c)))
            out.emplace_back(h, mult * p);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return poly_cmp(a.first, b.first) < 0;
    });
    return out;
}

Factorization factor(const Poly& monic_f, std::uint64_t seed, std::size_t subset_cap) {
    Poly f = monic_f.monic();
    Factorization out;
    if (f.degree() < 1) return out;
    for (const auto& [g, mult] : squarefree_decomposition(f)) {
        if (f.field().is_finite()) {
            for (const Poly& h : berlekamp_squarefree(g, seed))
                out.parts.emplace_back(h, mult);
        } else {
            auto [parts, certified] = factor_squarefree_rational(g, seed, subset_cap);
            for (const Poly& h : parts) out.parts.emplace_back(h, mult);
            out.certified = out.certified && certified;
        }
    }
    std::sort(out.parts.begin(), out.parts.end(), [](const auto& a, const auto& b) {
        if (a.first.degree() != b.first.degree())
            return a.first.degree() < b.first.degree();
        if (a.second != b.second) return a.second < b.second;
        return poly_cmp(a.first, b.first) < 0;
    });
    return out;
}

}  // namespace hvb
