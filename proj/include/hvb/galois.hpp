#ifndef HVB_GALOIS_HPP
#define HVB_GALOIS_HPP

#include <cstdint>
#include <optional>
#include <vector>

namespace hvb {

// Coordinates of a torsion point in Z/n_1 x ... x Z/n_k, entry i in [0, n_i).
using GPoint = std::vector<std::uint64_t>;

// Integer matrix acting on such a product, row i read mod n_i.  Signed
// entries are accepted on input (so <-1> is written [[-1]]) and reduced to
// the canonical nonnegative representative internally.
using IntMat = std::vector<std::vector<long long>>;

// A finite level of the character group: the n-torsion Z/n_1 x ... x Z/n_k
// together with a finite group of automorphisms through which the Galois
// group acts on that level.  The optional characteristic records which
// torsion is visible (inseparable degrees must be powers of it; they are 1
// when it is absent).
//
// Construction validates everything: each generator must be a well-defined
// endomorphism (entry (i,j) kills n_j mod n_i) and an automorphism, proved
// by locating its inverse in the generated group.  That group is closed up
// front, cached, and capped at 100000 elements.
class GaloisModule {
public:
    GaloisModule(std::vector<std::uint64_t> orders, std::vector<IntMat> generators,
                 std::optional<std::uint32_t> p = std::nullopt);

    const std::vector<std::uint64_t>& orders() const { return orders_; }
    std::size_t num_factors() const { return orders_.size(); }
    std::optional<std::uint32_t> characteristic() const { return p_; }

    // canonically reduced generators, in the order given at construction
    const std::vector<std::vector<std::vector<std::uint64_t>>>& generators() const {
        return gens_;
    }
    std::size_t num_generators() const { return gens_.size(); }

    // the whole generated group, identity first, then discovery order
    const std::vector<std::vector<std::vector<std::uint64_t>>>& group() const {
        return group_;
    }

    // total number of points at this level
    std::uint64_t size() const;

    GPoint act(const std::vector<std::vector<std::uint64_t>>& m, const GPoint& x) const;
    bool point_in_range(const GPoint& x) const;

private:
    std::vector<std::uint64_t> orders_;
    std::vector<std::vector<std::vector<std::uint64_t>>> gens_;
    std::vector<std::vector<std::vector<std::uint64_t>>> group_;
    std::optional<std::uint32_t> p_;
};

// One character at some finite level, with its inseparable degree q.  The
// coordinates determine the separable side; q is extra arithmetic input (it
// cannot be computed from coordinates) and must be a power of the
// characteristic, or exactly 1 when the module carries none.
struct CharacterPoint {
    GPoint coords;
    std::uint64_t insep_degree = 1;
};

// A full Galois orbit.  points is lexicographically sorted and closed under
// the group; sep_degree is its size s, and s * insep_degree is the degree
// [k(x):k] of the field of definition.
struct CharacterOrbit {
    std::vector<GPoint> points;
    std::uint64_t sep_degree = 1;
    std::uint64_t insep_degree = 1;
};

// Orbit of x under the module's group.  Out-of-range coordinates or an
// inconsistent insep_degree raise input_error.
CharacterOrbit orbit_of(const GaloisModule& m, const CharacterPoint& x);

// Image of x under a homomorphism f: src -> dst given as a k_dst x k_src
// integer matrix.  f must be well defined mod the orders and must commute
// with the Galois action, checked generator by generator (src and dst list
// their generators for the same Galois elements, in the same order); a
// failure names the offending generator and a point where the squares do
// not commute.  The image's insep_degree is x's divided by insep_collapse
// (which must divide it exactly).
CharacterPoint apply_hom(const IntMat& f, const GaloisModule& src, const GaloisModule& dst,
                         const CharacterPoint& x, std::uint64_t insep_collapse = 1);

// All preimages of x under f, empty when x is not in the image.  The result
// is stable under the stabilizer of x and has size |ker f| whenever it is
// nonempty; points are lexicographically sorted and keep x's insep_degree.
std::vector<CharacterPoint> fiber_of(const IntMat& f, const GaloisModule& src,
                                     const GaloisModule& dst, const CharacterPoint& x);

}  // namespace hvb

#endif
