#ifndef HVB_RNG_HPP
#define HVB_RNG_HPP

#include <cstdint>

namespace hvb {

// splitmix64: tiny deterministic generator with a fully specified update, so
// seeded runs produce identical bytes on every platform.  std::mt19937_64 is
// portable too, but the standard distributions on top of it are not; we avoid
// the whole question by reducing raw words ourselves.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform-ish value in [0, n); modulo bias is irrelevant for the search
    // heuristics these feed.
    std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

    // Small signed integer in [-span, span].
    long small(long span) {
        return static_cast<long>(below(2 * static_cast<std::uint64_t>(span) + 1)) - span;
    }

    // Derive an independent stream (for nested seeded searches).
    Rng fork() { return Rng(next() ^ 0xa5a5a5a5a5a5a5a5ULL); }

private:
    std::uint64_t state_;
};

} // namespace hvb

#endif
