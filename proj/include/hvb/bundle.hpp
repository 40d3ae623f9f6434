#ifndef HVB_BUNDLE_HPP
#define HVB_BUNDLE_HPP

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "hvb/field.hpp"
#include "hvb/galois.hpp"
#include "hvb/nilmod.hpp"

namespace hvb {

// Everything a bundle needs to know about its base: the dimension of the
// abelian variety, the ground field (Q in characteristic zero, GF(p^m)
// otherwise), the p-rank, whether the field is separably closed, and the
// finite torsion level the character coordinates live in.
//
// Module-level data is meaningful in exactly two regimes: characteristic
// zero (additive modules at rational orbits) and ordinary characteristic p
// over a separably closed field (multiplicatively unipotent modules, which
// needs p_rank equal to g).  Everywhere else summands are rank-only.
struct GroundContext {
    std::size_t g = 1;
    Field field;
    std::size_t p_rank = 0;
    bool sep_closed = false;
    GaloisModule level;
};

bool module_data_supported(const GroundContext& ctx);
Flavor implied_flavor(const GroundContext& ctx);

// throws input_error when the pieces contradict each other
void require_valid(const GroundContext& ctx);
bool same_context(const GroundContext& a, const GroundContext& b);

// A summand whose only retained information is its rank over the residue
// field.  Used for inseparable orbits and for unsupported regimes; rank 1
// still pins the module (a rank one datum is necessarily trivial), anything
// larger is genuinely opaque.
struct RankOnly {
    std::uint64_t rank = 0;
};

using BundleData = std::variant<NilModule, RankOnly>;

std::uint64_t data_rank(const BundleData& d);

struct BundleSummand {
    CharacterOrbit orbit;
    BundleData data;
};

// A homogeneous bundle as a formal sum of (orbit, module data) summands.
// Canonical form keeps orbits pairwise distinct and sorted by least point
// (then by inseparable degree); rank-zero summands are dropped, and a
// rank-only line at a rational orbit in a module-data regime is promoted to
// the trivial module it must be.
struct HomogBundle {
    GroundContext context;
    std::vector<BundleSummand> summands;
};

// Validates everything (context consistency, orbits genuinely closed and
// sorted, inseparable degrees legal, module data valid and living over the
// right field at a rational orbit) and returns the canonical form.
// input_error on any violation.
HomogBundle make_bundle(GroundContext context, std::vector<BundleSummand> summands);

// The irreducible bundle E(x) attached to an orbit: one summand of rank
// s * q built from a trivial line over the residue field.
HomogBundle irreducible_bundle(const GroundContext& ctx, const CharacterOrbit& orbit);

// total rank over the ground field: sum of s * q * rank(data)
std::uint64_t bundle_rank(const HomogBundle& e);

// One block of the category per orbit.  In a module-data regime the block's
// module is handed to the Krull-Schmidt engine; elsewhere the rank is all
// there is to report.
struct BundleBlock {
    CharacterOrbit orbit;
    std::variant<DecompositionReport, RankOnly> content;
};

// Blocks in canonical orbit order.  seed drives the decomposition search in
// each block (deterministically, independent per block).
std::vector<BundleBlock> block_decompose(const HomogBundle& e, std::uint64_t seed);

// Tensor product.  Orbit labels add: each pair of summands contributes one
// summand per diagonal-action orbit of the product set, placed at the orbit
// of the pointwise sum, with multiplicity (product orbit size) / s of the
// target orbit.  Module data tensors through nilmod when both sides carry
// it; any rank-only factor makes the result rank-only.  Requires separable
// orbits (q = 1) on both sides, else regime_error.
HomogBundle tensor_bundles(const HomogBundle& a, const HomogBundle& b);

// Orbitwise negation with dualized module data; a rank-preserving involution.
HomogBundle dual_bundle(const HomogBundle& e);

// dim Ext^i(a, b) over the ground field for i = 0..max_degree.  Orbits that
// differ contribute nothing in any degree; a matching orbit contributes
// s * q times the residue-field dimensions from nilmod.  Positive degrees
// need characteristic zero (regime_error otherwise), and a matching summand
// whose data is rank-only of rank >= 2 is undecidable (regime_error).
std::vector<std::uint64_t> hom_ext_dims(const HomogBundle& a, const HomogBundle& b,
                                        std::size_t max_degree);

// Classification flags.  semisimple is the verdict for the data actually
// stored: trivial module data (and rank-only lines) everywhere; an opaque
// rank-only summand of rank >= 2 reports false.  essentially_finite is
// always true at a finite level; the witness exponent is the least n with
// n * x = 0 across all orbit points, so pulling back along multiplication
// by n trivializes every orbit label.
struct Classification {
    bool semisimple = false;
    bool unipotent = false;
    bool essentially_finite = true;
    std::uint64_t witness_exponent = 1;
    bool irreducible = false;
};

Classification classify(const HomogBundle& e);

// The semisimplicity criterion for a single block, from the order of the
// unipotent group scheme acting and the field degrees [K:k] and [L:k] of
// the character's field of definition and its separable part: the block is
// semisimple exactly when U is finite of order [K:L].  nullopt means U is
// infinite (the characteristic zero vector group).  L_deg must divide
// K_deg, else input_error.
bool block_semisimplicity_test(std::optional<std::uint64_t> u_order, std::uint64_t k_deg,
                               std::uint64_t l_deg);

}  // namespace hvb

#endif
