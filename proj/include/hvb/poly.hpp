#ifndef HVB_POLY_HPP
#define HVB_POLY_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "hvb/field.hpp"

namespace hvb {

// Dense univariate polynomial over a Field, coefficients stored lowest degree
// first and kept free of trailing zeros.  The zero polynomial has degree -1.
class Poly {
public:
    explicit Poly(Field field) : field_(std::move(field)) {}
    Poly(Field field, std::vector<Elem> coeffs)
        : field_(std::move(field)), c_(std::move(coeffs)) { trim(); }

    static Poly zero(const Field& f) { return Poly(f); }
    static Poly one(const Field& f) { return Poly(f, {f.one()}); }
    static Poly x(const Field& f) { return Poly(f, {f.zero(), f.one()}); }
    static Poly constant(const Field& f, const Elem& c) { return Poly(f, {c}); }

    const Field& field() const { return field_; }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    bool is_one() const;
    bool is_constant() const { return c_.size() <= 1; }
    Elem coeff(std::size_t i) const;  // zero beyond the stored degree
    const std::vector<Elem>& coeffs() const { return c_; }
    const Elem& lead() const { return c_.back(); }

    bool operator==(const Poly& o) const;
    bool operator!=(const Poly& o) const { return !(*this == o); }

    Poly add(const Poly& o) const;
    Poly sub(const Poly& o) const;
    Poly neg() const;
    Poly mul(const Poly& o) const;
    Poly scalar_mul(const Elem& k) const;
    // Quotient and remainder; requires an invertible leading coefficient in
    // the divisor (always true over a field for nonzero divisors).
    std::pair<Poly, Poly> divmod(const Poly& d) const;
    Poly mod(const Poly& d) const { return divmod(d).second; }
    Poly div_exact(const Poly& d) const;
    Poly monic() const;
    Poly derivative() const;
    Elem eval(const Elem& at) const;
    // f(k*x): used to move between a monic rational polynomial and its
    // integer model.
    Poly scale_arg(const Elem& k) const;
    Poly pow_mod(std::uint64_t e, const Poly& modulus) const;
    Poly mul_mod(const Poly& o, const Poly& modulus) const { return mul(o).mod(modulus); }

    static Poly gcd(Poly a, Poly b);  // monic gcd

    // (g, s, t) with s*a + t*b = g and g the monic gcd.
    static std::tuple<Poly, Poly, Poly> ext_gcd(const Poly& a, const Poly& b);

private:
    void trim();
    Field field_;
    std::vector<Elem> c_;
};

struct Factorization {
    // Monic factors with multiplicities, product equal to the monic input.
    std::vector<std::pair<Poly, unsigned>> parts;
    // True when every listed factor is certified irreducible.  Over finite
    // fields this always holds; over Q the recombination search is capped,
    // and a capped-out run returns its partial split uncertified.
    bool certified = true;
};

// Squarefree decomposition of a monic polynomial: pairwise coprime monic
// squarefree parts with multiplicities (Yun in characteristic zero, the
// p-th-root variant in characteristic p).
std::vector<std::pair<Poly, unsigned>> squarefree_decomposition(const Poly& f);

// Full factorization of a monic polynomial.  Finite fields use Berlekamp
// with deterministic splitting for small q and seeded splitting otherwise.
// Over Q: squarefree split, modular degree-set pruning across several primes
// (which certifies many irreducibles without lifting), then Hensel lifting
// with subset recombination bounded by subset_cap.
Factorization factor(const Poly& monic_f, std::uint64_t seed, std::size_t subset_cap = 4096);

} // namespace hvb

#endif
