#ifndef HVB_FIELD_HPP
#define HVB_FIELD_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <gmpxx.h>

namespace hvb {

enum class FieldKind { Rational, Finite };

// Coefficient vector of a residue class in GF(p^m), least degree first,
// always of length exactly m with entries reduced mod p.
using GFVec = std::vector<std::uint32_t>;

// A field element.  Which alternative is active is determined by the Field
// the element belongs to; elements are meaningless without their field.
using Elem = std::variant<mpq_class, GFVec>;

struct FieldSpec {
    FieldKind kind = FieldKind::Rational;
    std::uint32_t p = 0;            // characteristic, Finite only
    std::uint32_t m = 1;            // extension degree, Finite only
    std::vector<std::uint32_t> modulus;  // monic degree-m polynomial, low first; m > 1 only

    bool operator==(const FieldSpec& o) const {
        return kind == o.kind && p == o.p && m == o.m && modulus == o.modulus;
    }
    bool operator!=(const FieldSpec& o) const { return !(*this == o); }
};

// Exact field arithmetic over Q (arbitrary precision) or GF(p^m).
// Construction validates everything: p prime, m in [1,12], the modulus monic
// of degree m and irreducible over GF(p).  All operations are total on valid
// elements and deterministic.
class Field {
public:
    static Field rationals();
    // For m >= 2 an omitted modulus picks a canonical default: the first
    // monic irreducible of degree m in base-p coefficient order.
    static Field finite(std::uint32_t p, std::uint32_t m = 1,
                        std::vector<std::uint32_t> modulus = {});
    static Field from_spec(const FieldSpec& spec);

    const FieldSpec& spec() const { return spec_; }
    FieldKind kind() const { return spec_.kind; }
    bool is_rational() const { return spec_.kind == FieldKind::Rational; }
    bool is_finite() const { return spec_.kind == FieldKind::Finite; }
    std::uint32_t characteristic() const { return is_rational() ? 0 : spec_.p; }
    // Characteristic exponent: 1 in characteristic zero, p otherwise.
    std::uint32_t char_exponent() const { return is_rational() ? 1 : spec_.p; }

    // Field size for finite fields; throws for Q.  Guarded against overflow
    // (p^m always fits: p < 2^31, m <= 12 is validated only when p^m < 2^63).
    std::uint64_t order() const;

    Elem zero() const;
    Elem one() const;
    Elem from_int(long v) const;
    Elem from_rational(const mpq_class& v) const;   // Q only
    Elem from_coeffs(const GFVec& v) const;          // Finite only, validates length/range

    bool is_zero(const Elem& a) const;
    bool is_one(const Elem& a) const;
    bool eq(const Elem& a, const Elem& b) const;

    Elem add(const Elem& a, const Elem& b) const;
    Elem sub(const Elem& a, const Elem& b) const;
    Elem neg(const Elem& a) const;
    Elem mul(const Elem& a, const Elem& b) const;
    Elem inv(const Elem& a) const;                   // throws input_error on zero
    Elem div(const Elem& a, const Elem& b) const;

    // p-th root (finite fields only; Frobenius is bijective so this is exact).
    Elem pth_root(const Elem& a) const;

    // Enumeration of GF(p^m): index i in [0, order()) maps to the element
    // whose coefficient vector is i written in base p, low digit first.
    Elem elem_at(std::uint64_t index) const;
    std::uint64_t index_of(const Elem& a) const;

    // Total order on elements used wherever a deterministic tiebreak is
    // needed (pivoting, canonical sorting).  Rational: numeric order.
    // Finite: lexicographic on coefficient vectors.
    int cmp(const Elem& a, const Elem& b) const;

    std::string to_string(const Elem& a) const;

    bool operator==(const Field& o) const { return spec_ == o.spec_; }
    bool operator!=(const Field& o) const { return spec_ != o.spec_; }

private:
    explicit Field(FieldSpec spec) : spec_(std::move(spec)) {}
    void check_rational() const;
    void check_finite() const;

    FieldSpec spec_;
};

} // namespace hvb

#endif
