#ifndef HVB_NILMOD_HPP
#define HVB_NILMOD_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hvb/field.hpp"
#include "hvb/matrix.hpp"

namespace hvb {

// A module for the unipotent part of the fundamental group scheme, realized
// concretely: g commuting r x r matrices over a coefficient field.
//
// Additive flavor: the matrices are nilpotent; this is the vector group case
// and the only flavor with an Ext theory here (characteristic zero).
// MultiplicativeUnipotent flavor: the matrices are unipotent over a field of
// positive characteristic; tensor products follow the group-like rule.
enum class Flavor { Additive, MultiplicativeUnipotent };

struct NilModule {
    Field field;
    Flavor flavor = Flavor::Additive;
    std::size_t g = 1;     // number of generators
    std::size_t rank = 0;  // matrix size r
    std::vector<ExactMatrix> mats;
};

// Rank-r module with trivial action: zero matrices (additive) or identity
// matrices (multiplicative).
NilModule trivial_module(const Field& field, Flavor flavor, std::size_t g,
                         std::size_t rank);

// Structural checks (field agreement, matrix shapes, commutation, and
// nilpotence or unipotence per flavor).  Returns human-readable violations,
// empty when the module is valid.  A multiplicative module over a field of
// characteristic zero is a structural error and throws instead.
std::vector<std::string> validate(const NilModule& m);
void require_valid(const NilModule& m);  // throws input_error listing violations

NilModule direct_sum(const NilModule& a, const NilModule& b);

// Additive: generator i acts as X_i (x) I + I (x) Y_i.
// Multiplicative: generator i acts as X_i (x) Y_i.
NilModule tensor(const NilModule& a, const NilModule& b);

// Additive: -X_i transposed.  Multiplicative: inverse transposed.
NilModule dual(const NilModule& a);

// tensor(dual(a), b); the internal Hom object.
NilModule hom_module(const NilModule& a, const NilModule& b);

// Basis of the space of intertwiners Z with Z X_i = Y_i Z, one matrix per
// basis element, in the canonical order produced by the kernel of the
// stacked linear system.  Shapes are (b.rank x a.rank).
std::vector<ExactMatrix> hom_basis(const NilModule& a, const NilModule& b);

std::size_t hom_dim(const NilModule& a, const NilModule& b);

// Invertible intertwiner from a to b when one exists: the witness W
// satisfies W X_i = Y_i W, so conjugation by W carries a's matrices to b's.
std::optional<ExactMatrix> iso_witness(const NilModule& a, const NilModule& b,
                                       std::uint64_t seed);
bool is_isomorphic(const NilModule& a, const NilModule& b, std::uint64_t seed);

struct Summand {
    NilModule module;
    std::size_t multiplicity = 1;
    // True when the endomorphism ring was proved local.  Uncertified leaves
    // can appear only outside the supported certification regimes and are
    // still genuine direct summands, just not proved indecomposable.
    bool certified = true;
};

struct DecompositionReport {
    std::vector<Summand> summands;
    // basechange * X_i * basechange^{-1} is block diagonal, the blocks being
    // the summand matrices repeated per multiplicity, in listed order.
    ExactMatrix basechange;
    bool certified = true;  // every summand certified indecomposable
};

// Krull-Schmidt decomposition.  Splitting proceeds by Fitting decompositions
// of endomorphisms with reducible minimal polynomials, scanned over a basis
// of End(m), pairwise products and seeded random combinations; isotypic
// modules that defeat the Fitting search are split by projecting onto a
// cyclic submodule generated from a random vector (an exact idempotent comes
// out of a linear system whenever that submodule is a direct summand).  A
// leaf is certified indecomposable when its endomorphism ring is proved
// local; see the notes in the implementation for the exact criteria.
DecompositionReport decompose(const NilModule& m, std::uint64_t seed);

// dim Ext^i(a, b) for i = 0..max_degree via the Koszul complex of the
// internal Hom module.  Additive flavor over characteristic zero only;
// anything else raises regime_error.
std::vector<std::size_t> ext_dims(const NilModule& a, const NilModule& b,
                                  std::size_t max_degree);

// Nilpotency index of the ideal spanned by the generators' nilpotent parts
// (X_i additive, X_i - I multiplicative); 1 for the trivial module.
std::size_t loewy_length(const NilModule& m);

// Least n with X_i^(p^n) = I for every generator; multiplicative flavor
// only, additive raises regime_error.
std::size_t power_order(const NilModule& m);

} // namespace hvb

#endif
