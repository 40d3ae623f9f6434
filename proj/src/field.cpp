#include "hvb/field.hpp"

#include <algorithm>

#include "hvb/errors.hpp"

namespace hvb {

namespace {

bool is_prime_u32(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// --- dense polynomials over GF(p), coefficients low first, used only for
// --- validating extension moduli.  Small degrees, no performance concerns.
using PPoly = std::vector<std::uint64_t>;

void ptrim(PPoly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

PPoly pmulmod(const PPoly& a, const PPoly& b, const PPoly& mod, std::uint64_t p) {
    if (a.empty() || b.empty()) return {};
    PPoly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            r[i + j] = (r[i + j] + a[i] * b[j]) % p;
    // reduce by monic mod
    std::size_t dm = mod.size() - 1;
    for (std::size_t i = r.size(); i-- > dm;) {
        std::uint64_t c = r[i];
        if (!c) continue;
        r[i] = 0;
        for (std::size_t j = 0; j < dm; ++j)
            r[i - dm + j] = (r[i - dm + j] + (p - 1) * c % p * mod[j]) % p;
    }
    r.resize(dm);
    ptrim(r);
    return r;
}

PPoly ppowmod(PPoly base, mpz_class e, const PPoly& mod, std::uint64_t p) {
    PPoly r = {1};
    while (e > 0) {
        if (mpz_odd_p(e.get_mpz_t())) r = pmulmod(r, base, mod, p);
        base = pmulmod(base, base, mod, p);
        e >>= 1;
    }
    return r;
}

PPoly pgcd(PPoly a, PPoly b, std::uint64_t p) {
    ptrim(a); ptrim(b);
    while (!b.empty()) {
        // a mod b, with b made monic on the fly
        std::uint64_t lead = b.back();
        if (lead != 1) {
            // monic-scale b by lead^{-1} via Fermat
            std::uint64_t li = 1, e = p - 2, base = lead;
            while (e) { if (e & 1) li = li * base % p; base = base * base % p; e >>= 1; }
            for (auto& c : b) c = c * li % p;
        }
        while (a.size() >= b.size() && !a.empty()) {
            std::uint64_t c = a.back();
            std::size_t shift = a.size() - b.size();
            for (std::size_t j = 0; j < b.size(); ++j)
                a[shift + j] = (a[shift + j] + (p - 1) * c % p * b[j]) % p;
            ptrim(a);
        }
        std::swap(a, b);
    }
    ptrim(a);
    return a;
}

// Deterministic irreducibility test for a monic degree-m polynomial over
// GF(p): f is irreducible iff x^{p^m} = x mod f and, for every prime divisor
// d of m, gcd(x^{p^{m/d}} - x, f) = 1.  Polynomial in log(p^m); no
// enumeration of candidate divisors is needed even for large p.
bool gfp_irreducible(const std::vector<std::uint32_t>& f32, std::uint64_t p) {
    PPoly f(f32.begin(), f32.end());
    std::size_t m = f.size() - 1;
    PPoly x = {0, 1};
    mpz_class pm;
    mpz_ui_pow_ui(pm.get_mpz_t(), p, m);
    PPoly xpm = ppowmod(x, pm, f, p);
    ptrim(xpm);
    PPoly xr = x;
    ptrim(xr);
    if (xpm != xr) return false;
    for (std::size_t d = 2; d <= m; ++d) {
        if (m % d != 0 || !is_prime_u32(d)) continue;
        mpz_class pe;
        mpz_ui_pow_ui(pe.get_mpz_t(), p, m / d);
        PPoly g = ppowmod(x, pe, f, p);
        // g - x
        if (g.size() < 2) g.resize(2, 0);
        g[1] = (g[1] + p - 1) % p;
        ptrim(g);
        PPoly h = pgcd(g, f, p);
        if (h.size() != 1) return false;
    }
    return true;
}

const GFVec& as_gf(const Elem& a) { return std::get<GFVec>(a); }
const mpq_class& as_q(const Elem& a) { return std::get<mpq_class>(a); }

// First monic irreducible of degree m over GF(p) in base-p index order, used
// when a caller asks for GF(p^m) without naming a modulus.
std::vector<std::uint32_t> default_modulus(std::uint32_t p, std::uint32_t m) {
    std::uint64_t limit = 1;
    bool capped = false;
    for (std::uint32_t i = 0; i < m; ++i) {
        if (limit > (std::uint64_t(1) << 20) / p) { capped = true; break; }
        limit *= p;
    }
    if (capped) limit = std::uint64_t(1) << 20;
    for (std::uint64_t idx = 0; idx < limit; ++idx) {
        std::vector<std::uint32_t> f(m + 1, 0);
        std::uint64_t v = idx;
        for (std::uint32_t i = 0; i < m; ++i) {
            f[i] = static_cast<std::uint32_t>(v % p);
            v /= p;
        }
        f[m] = 1;
        if (gfp_irreducible(f, p)) return f;
    }
    throw input_error("no default modulus found; pass one explicitly");
}

} // namespace

Field Field::rationals() {
    FieldSpec s;
    s.kind = FieldKind::Rational;
    return Field(std::move(s));
}

Field Field::finite(std::uint32_t p, std::uint32_t m, std::vector<std::uint32_t> modulus) {
    FieldSpec s;
    s.kind = FieldKind::Finite;
    s.p = p;
    s.m = m;
    if (m >= 2 && modulus.empty())
        s.modulus = default_modulus(p, m);
    else
        s.modulus = std::move(modulus);
    return from_spec(s);
}

Field Field::from_spec(const FieldSpec& spec) {
    if (spec.kind == FieldKind::Rational) {
        if (spec.p != 0 || spec.m != 1 || !spec.modulus.empty())
            throw input_error("rational field spec must not carry p, m or modulus");
        return Field(spec);
    }
    if (spec.p < 2 || spec.p > 0x7fffffffu || !is_prime_u32(spec.p))
        throw input_error("field characteristic must be a prime below 2^31, got " +
                          std::to_string(spec.p));
    if (spec.m < 1 || spec.m > 12)
        throw input_error("extension degree m must lie in [1,12], got " +
                          std::to_string(spec.m));
    if (spec.m == 1) {
        if (!spec.modulus.empty())
            throw input_error("prime field GF(p) takes no modulus");
    } else {
        if (spec.modulus.size() != spec.m + 1)
            throw input_error("modulus must have degree m = " + std::to_string(spec.m));
        for (auto c : spec.modulus)
            if (c >= spec.p)
                throw input_error("modulus coefficients must be reduced mod p");
        if (spec.modulus.back() != 1)
            throw input_error("modulus must be monic");
        if (!gfp_irreducible(spec.modulus, spec.p))
            throw input_error("modulus is reducible over GF(" + std::to_string(spec.p) + ")");
    }
    return Field(spec);
}

void Field::check_rational() const {
    if (!is_rational()) throw input_error("operation requires the rational field");
}

void Field::check_finite() const {
    if (!is_finite()) throw input_error("operation requires a finite field");
}

std::uint64_t Field::order() const {
    check_finite();
    std::uint64_t r = 1;
    for (std::uint32_t i = 0; i < spec_.m; ++i) {
        if (r > (std::uint64_t(1) << 62) / spec_.p)
            throw input_error("field order exceeds the supported 2^62 bound");
        r *= spec_.p;
    }
    return r;
}

Elem Field::zero() const {
    if (is_rational()) return mpq_class(0);
    return GFVec(spec_.m, 0);
}

Elem Field::one() const { return from_int(1); }

Elem Field::from_int(long v) const {
    if (is_rational()) return mpq_class(v);
    GFVec r(spec_.m, 0);
    long red = v % static_cast<long>(spec_.p);
    if (red < 0) red += spec_.p;
    r[0] = static_cast<std::uint32_t>(red);
    return r;
}

Elem Field::from_rational(const mpq_class& v) const {
    check_rational();
    mpq_class c = v;
    c.canonicalize();
    return c;
}

Elem Field::from_coeffs(const GFVec& v) const {
    check_finite();
    if (v.size() != spec_.m)
        throw input_error("finite field element must have exactly m = " +
                          std::to_string(spec_.m) + " coefficients");
    for (auto c : v)
        if (c >= spec_.p) throw input_error("element coefficient not reduced mod p");
    return v;
}

bool Field::is_zero(const Elem& a) const {
    if (is_rational()) return sgn(as_q(a)) == 0;
    for (auto c : as_gf(a)) if (c) return false;
    return true;
}

bool Field::is_one(const Elem& a) const { return eq(a, one()); }

bool Field::eq(const Elem& a, const Elem& b) const {
    if (is_rational()) return as_q(a) == as_q(b);
    return as_gf(a) == as_gf(b);
}

Elem Field::add(const Elem& a, const Elem& b) const {
    if (is_rational()) {
        mpq_class r = as_q(a) + as_q(b);
        r.canonicalize();
        return r;
    }
    GFVec r = as_gf(a);
    const GFVec& y = as_gf(b);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] += y[i];
        if (r[i] >= spec_.p) r[i] -= spec_.p;
    }
    return r;
}

Elem Field::sub(const Elem& a, const Elem& b) const { return add(a, neg(b)); }

Elem Field::neg(const Elem& a) const {
    if (is_rational()) return mpq_class(-as_q(a));
    GFVec r = as_gf(a);
    for (auto& c : r) c = c ? spec_.p - c : 0;
    return r;
}

Elem Field::mul(const Elem& a, const Elem& b) const {
    if (is_rational()) {
        mpq_class r = as_q(a) * as_q(b);
        r.canonicalize();
        return r;
    }
    const GFVec& x = as_gf(a);
    const GFVec& y = as_gf(b);
    const std::uint64_t p = spec_.p;
    if (spec_.m == 1) return GFVec{static_cast<std::uint32_t>(std::uint64_t(x[0]) * y[0] % p)};
    std::vector<std::uint64_t> prod(2 * spec_.m - 1, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!x[i]) continue;
        for (std::size_t j = 0; j < y.size(); ++j)
            prod[i + j] = (prod[i + j] + std::uint64_t(x[i]) * y[j]) % p;
    }
    for (std::size_t i = prod.size(); i-- > spec_.m;) {
        std::uint64_t c = prod[i];
        if (!c) continue;
        prod[i] = 0;
        for (std::size_t j = 0; j < spec_.m; ++j)
            prod[i - spec_.m + j] =
                (prod[i - spec_.m + j] + (p - 1) * c % p * spec_.modulus[j]) % p;
    }
    GFVec r(spec_.m);
    for (std::size_t i = 0; i < spec_.m; ++i) r[i] = static_cast<std::uint32_t>(prod[i]);
    return r;
}

Elem Field::inv(const Elem& a) const {
    if (is_zero(a)) throw input_error("division by zero");
    if (is_rational()) {
        mpq_class r = 1 / as_q(a);
        r.canonicalize();
        return r;
    }
    // Extended Euclid in GF(p)[x] against the modulus (or plain Fermat for m=1).
    const std::uint64_t p = spec_.p;
    if (spec_.m == 1) {
        std::uint64_t r = 1, base = as_gf(a)[0], e = p - 2;
        while (e) { if (e & 1) r = r * base % p; base = base * base % p; e >>= 1; }
        return GFVec{static_cast<std::uint32_t>(r)};
    }
    using P = std::vector<std::uint64_t>;
    auto trim = [](P& f) { while (!f.empty() && f.back() == 0) f.pop_back(); };
    auto scalar_inv = [p](std::uint64_t v) {
        std::uint64_t r = 1, e = p - 2;
        while (e) { if (e & 1) r = r * v % p; v = v * v % p; e >>= 1; }
        return r;
    };
    P r0(spec_.modulus.begin(), spec_.modulus.end());
    P r1(as_gf(a).begin(), as_gf(a).end());
    trim(r1);
    P t0 = {}, t1 = {1};
    while (!r1.empty()) {
        // divide r0 by r1
        P q;
        P rem = r0;
        std::uint64_t li = scalar_inv(r1.back());
        while (rem.size() >= r1.size() && !rem.empty()) {
            std::uint64_t c = rem.back() * li % p;
            std::size_t shift = rem.size() - r1.size();
            if (q.size() < shift + 1) q.resize(shift + 1, 0);
            q[shift] = (q[shift] + c) % p;
            for (std::size_t j = 0; j < r1.size(); ++j)
                rem[shift + j] = (rem[shift + j] + (p - 1) * c % p * r1[j]) % p;
            trim(rem);
        }
        // (r0, r1) <- (r1, rem); (t0, t1) <- (t1, t0 - q t1)
        P qt(q.size() + t1.size(), 0);
        if (!q.empty() && !t1.empty()) {
            qt.assign(q.size() + t1.size() - 1, 0);
            for (std::size_t i = 0; i < q.size(); ++i)
                for (std::size_t j = 0; j < t1.size(); ++j)
                    qt[i + j] = (qt[i + j] + q[i] * t1[j]) % p;
        } else {
            qt.clear();
        }
        P nt(std::max(t0.size(), qt.size()), 0);
        for (std::size_t i = 0; i < nt.size(); ++i) {
            std::uint64_t u = i < t0.size() ? t0[i] : 0;
            std::uint64_t v = i < qt.size() ? qt[i] : 0;
            nt[i] = (u + p - v % p) % p;
        }
        trim(nt);
        r0 = r1; r1 = rem;
        t0 = t1; t1 = nt;
    }
    // r0 is the gcd, a nonzero constant since the modulus is irreducible.
    std::uint64_t gi = scalar_inv(r0[0]);
    GFVec out(spec_.m, 0);
    for (std::size_t i = 0; i < t0.size() && i < spec_.m; ++i)
        out[i] = static_cast<std::uint32_t>(t0[i] * gi % p);
    return out;
}

Elem Field::div(const Elem& a, const Elem& b) const { return mul(a, inv(b)); }

Elem Field::pth_root(const Elem& a) const {
    check_finite();
    // Frobenius x -> x^p is an automorphism of GF(p^m) of order m, so the
    // p-th root is x^(p^(m-1)).
    Elem r = a;
    for (std::uint32_t i = 0; i + 1 < spec_.m; ++i) {
        Elem s = r;
        for (std::uint32_t j = 1; j < spec_.p; ++j) s = mul(s, r);
        r = s;
    }
    return r;
}

Elem Field::elem_at(std::uint64_t index) const {
    check_finite();
    GFVec r(spec_.m, 0);
    for (std::uint32_t i = 0; i < spec_.m; ++i) {
        r[i] = static_cast<std::uint32_t>(index % spec_.p);
        index /= spec_.p;
    }
    if (index != 0) throw input_error("element index out of range");
    return r;
}

std::uint64_t Field::index_of(const Elem& a) const {
    check_finite();
    const GFVec& v = as_gf(a);
    std::uint64_t r = 0;
    for (std::size_t i = v.size(); i-- > 0;) r = r * spec_.p + v[i];
    return r;
}

int Field::cmp(const Elem& a, const Elem& b) const {
    if (is_rational()) return ::cmp(as_q(a), as_q(b));
    const GFVec& x = as_gf(a);
    const GFVec& y = as_gf(b);
    if (x < y) return -1;
    if (y < x) return 1;
    return 0;
}

std::string Field::to_string(const Elem& a) const {
    if (is_rational()) return as_q(a).get_str();
    const GFVec& v = as_gf(a);
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s + "]";
}

} // namespace hvb
