#ifndef HVB_ISOGENY_HPP
#define HVB_ISOGENY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hvb/bundle.hpp"
#include "hvb/galois.hpp"
#include "hvb/nilmod.hpp"

namespace hvb {

// An isogeny phi: A -> B, described by what the functors need: the dual map
// on truncated character groups (phi-hat goes from B's level to A's level)
// and the structure of the kernel N, split into its multiplicative part
// (order = number of geometric points of ker phi-hat, by duality), the
// cyclic orders of the etale unipotent part, and the order of the
// infinitesimal part.  The degree is the product of the three.
//
// In characteristic zero every kernel is multiplicative type, so the
// unipotent factor list must be empty and the infinitesimal order 1.
struct IsogenyData {
    GroundContext src_ctx;  // A
    GroundContext dst_ctx;  // B
    IntMat dual_map;        // dst level -> src level
    std::uint64_t mult_kernel_order = 1;
    std::vector<std::uint64_t> unip_etale_factors;
    std::uint64_t infinitesimal_order = 1;
};

IsogenyData identity_isogeny(const GroundContext& ctx);

std::uint64_t isogeny_degree(const IsogenyData& iso);

// phi-hat is separable exactly when the kernel of phi has no unipotent part.
bool is_separable(const IsogenyData& iso);

// Violations as human-readable strings: context mismatches, kernel parts
// that are not p-powers, a dual map that is ill defined or not equivariant,
// or a point count of ker phi-hat at the working level that contradicts the
// declared multiplicative order.  Empty means valid.
std::vector<std::string> validate(const IsogenyData& iso);
void require_valid(const IsogenyData& iso);

// phi = phi_u after phi_m with multiplicative kernel first.  On truncated
// points the purely inseparable dual of phi_u is a bijection, so the
// intermediate variety is modeled on B's level: the first factor carries the
// whole dual map and the multiplicative kernel, the second has identity dual
// map and the unipotent parts.  Degrees multiply back to deg(phi).
std::pair<IsogenyData, IsogenyData> factor_isogeny(const IsogenyData& iso);

// Restriction along the isogeny: each summand at an orbit y of B-hat lands
// at the orbit of phi-hat(y) with the rank multiplied by the fiber size
// s_y / s_x of the orbit map (declared inseparable degrees ride along, so
// [k(y):k(x)] = s_y/s_x in this model).  Module data moves unchanged when
// phi is separable; trivial data stays trivial always; nontrivial data
// across an inseparable isogeny degrades to rank-only.  Total rank is
// preserved.
HomogBundle pullback(const IsogenyData& iso, const HomogBundle& f);

// One block of a pushforward: an orbit of B-hat in the fiber of the input
// orbit, the block's rank over the ground field, an indecomposability
// verdict (true only when guaranteed: inputs of datum rank 1), and a matrix
// model when one exists (module-data regime with a rational target orbit
// and a kernel whose unipotent part is etale cyclic).
struct PushforwardBlock {
    CharacterOrbit orbit;
    std::uint64_t rank = 0;
    bool indecomposable = false;
    std::optional<NilModule> module;
};

struct PushforwardReport {
    GroundContext context;  // where the blocks live
    std::vector<PushforwardBlock> blocks;
    std::uint64_t total_rank = 0;
    std::uint64_t block_count = 0;  // exact, even when the block list is capped
    bool truncated = false;
};

// Reassemble a report into a bundle (module data when present, rank-only
// otherwise).  Refuses truncated reports.
HomogBundle bundle_of(const PushforwardReport& report);

// Induction along the isogeny.  For each summand orbit x of E the fiber of
// phi-hat over x is computed at the working level and must show all
// mult_kernel_order points, else input_error names a sufficient level.
// Fiber points group into Gamma-orbits y; each contributes one block of
// rank s_y * q_x * rank(data) * (unipotent kernel order), with the
// unipotent part inducing the regular representation of its cyclic group:
// the matrix model is a block cyclic shift whose wrap-around entry is the
// first generator of the input datum.  total_rank = deg(phi) * rank(E).
PushforwardReport pushforward(const IsogenyData& iso, const HomogBundle& e);

// Pushforward along the n-th power of Frobenius over a separably closed
// field of characteristic p: p^{n r} blocks (r the p-rank), each of rank
// p^{n (g - r)}, labeled by the etale p^n-torsion points translated by
// l_point when given.  The block list is capped at 4096 entries;
// block_count always holds the exact number.  regime_error if p = 1.
PushforwardReport frobenius_pushforward(const GroundContext& ctx, std::uint32_t n,
                                        const std::optional<CharacterPoint>& l_point);

}  // namespace hvb

#endif
