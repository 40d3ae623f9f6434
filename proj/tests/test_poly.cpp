#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hvb/errors.hpp"
#include "hvb/poly.hpp"
#include "hvb/rng.hpp"

using namespace hvb;

namespace {

Poly from_ints(const Field& F, std::initializer_list<long> cs) {
    std::vector<Elem> v;
    for (long c : cs) v.push_back(F.from_int(c));
    return Poly(F, std::move(v));
}

Poly product(const Factorization& fz, const Field& F) {
    Poly p = Poly::one(F);
    for (const auto& [g, m] : fz.parts)
        for (unsigned i = 0; i < m; ++i) p = p.mul(g);
    return p;
}

Poly random_monic(const Field& F, int deg, Rng& rng) {
    std::vector<Elem> v(static_cast<std::size_t>(deg) + 1);
    for (int i = 0; i < deg; ++i) {
        if (F.is_rational())
            v[static_cast<std::size_t>(i)] = F.from_int(rng.small(6));
        else
            v[static_cast<std::size_t>(i)] = F.elem_at(rng.below(F.order()));
    }
    v[static_cast<std::size_t>(deg)] = F.one();
    return Poly(F, std::move(v));
}

} // namespace

TEST_CASE("arithmetic and division basics") {
    Field Q = Field::rationals();
    Poly f = from_ints(Q, {-1, 0, 1});       // x^2 - 1
    Poly g = from_ints(Q, {1, 1});           // x + 1
    CHECK(f.div_exact(g) == from_ints(Q, {-1, 1}));
    auto [q, r] = f.divmod(from_ints(Q, {0, 1}));  // divide by x
    CHECK(q == from_ints(Q, {0, 1}));
    CHECK(r == from_ints(Q, {-1}));
    CHECK(f.eval(Q.from_int(3)) == Q.from_int(8));
    CHECK(f.derivative() == from_ints(Q, {0, 2}));
    CHECK_THROWS_AS(f.div_exact(from_ints(Q, {1, 1, 1})), input_error);

    // scale_arg: f(2x) = 4x^2 - 1
    CHECK(f.scale_arg(Q.from_int(2)) == from_ints(Q, {-1, 0, 4}));
}

TEST_CASE("random division identities over several fields") {
    for (auto spec : {Field::rationals(), Field::finite(2), Field::finite(7),
                      Field::finite(3, 2)}) {
        Rng rng(99);
        for (int trial = 0; trial < 20; ++trial) {
            Poly a = random_monic(spec, 1 + static_cast<int>(rng.below(6)), rng);
            Poly b = random_monic(spec, 1 + static_cast<int>(rng.below(4)), rng);
            auto [q, r] = a.divmod(b);
            CHECK(q.mul(b).add(r) == a);
            CHECK(r.degree() < b.degree());
            CHECK(Poly::gcd(a.mul(b), b) == b.monic());
        }
    }
}

TEST_CASE("gcd and extended consistency") {
    Field Q = Field::rationals();
    Poly a = from_ints(Q, {-1, 1});                    // x - 1
    Poly b = from_ints(Q, {-2, 1});                    // x - 2
    Poly c = from_ints(Q, {3, 1});                     // x + 3
    CHECK(Poly::gcd(a.mul(b), a.mul(c)) == a);
    CHECK(Poly::gcd(b, c).is_one());
    CHECK(Poly::gcd(Poly::zero(Q), b) == b);
}

TEST_CASE("squarefree decomposition in characteristic zero") {
    Field Q = Field::rationals();
    Poly a = from_ints(Q, {-1, 1});
    Poly b = from_ints(Q, {-2, 1});
    Poly f = a.mul(a).mul(b);  // (x-1)^2 (x-2)
    auto sq = squarefree_decomposition(f);
    REQUIRE(sq.size() == 2);
    CHECK(sq[0].first == b);
    CHECK(sq[0].second == 1);
    CHECK(sq[1].first == a);
    CHECK(sq[1].second == 2);

    // squarefree input comes back whole
    auto sq2 = squarefree_decomposition(a.mul(b));
    REQUIRE(sq2.size() == 1);
    CHECK(sq2[0].first == a.mul(b));
    CHECK(sq2[0].second == 1);
}

TEST_CASE("squarefree decomposition in characteristic p") {
    Field F3 = Field::finite(3);
    Poly x = Poly::x(F3);
    Poly a = from_ints(F3, {1, 1});  // x + 1

    // x^3 (x+1): multiplicity 3 lands in the p-th power part
    Poly f = x.mul(x).mul(x).mul(a);
    auto sq = squarefree_decomposition(f);
    REQUIRE(sq.size() == 2);
    CHECK(sq[0].first == a);
    CHECK(sq[0].second == 1);
    CHECK(sq[1].first == x);
    CHECK(sq[1].second == 3);

    // (x+1)^4 = ((x+1)^p)^1 * (x+1): mixed multiplicity 4 = 3 + 1
    Poly g = a.mul(a).mul(a).mul(a);
    auto sq4 = squarefree_decomposition(g);
    REQUIRE(sq4.size() == 1);
    CHECK(sq4[0].first == a);
    CHECK(sq4[0].second == 4);
}

TEST_CASE("berlekamp over small prime fields") {
    Field F2 = Field::finite(2);
    // x^2 + x = x(x+1)
    Factorization fz = factor(from_ints(F2, {0, 1, 1}), 0);
    REQUIRE(fz.parts.size() == 2);
    CHECK(fz.certified);
    CHECK(product(fz, F2) == from_ints(F2, {0, 1, 1}));

    // x^2 + x + 1 is irreducible over GF(2)
    Factorization irr = factor(from_ints(F2, {1, 1, 1}), 0);
    REQUIRE(irr.parts.size() == 1);
    CHECK(irr.parts[0].second == 1);

    // x^4 + 1 = (x+1)^4 over GF(2)
    Factorization rep = factor(from_ints(F2, {1, 0, 0, 0, 1}), 0);
    REQUIRE(rep.parts.size() == 1);
    CHECK(rep.parts[0].first == from_ints(F2, {1, 1}));
    CHECK(rep.parts[0].second == 4);

    Field F3 = Field::finite(3);
    // x^2 + 1 = (x+i)(x-i) has no roots mod 3: irreducible
    CHECK(factor(from_ints(F3, {1, 0, 1}), 0).parts.size() == 1);
    // x^2 - 1 = (x-1)(x+1)
    CHECK(factor(from_ints(F3, {-1, 0, 1}), 0).parts.size() == 2);
}

TEST_CASE("berlekamp over an extension field") {
    // Over GF(9), x^2 + 1 splits since -1 is a square there.
    Field F9 = Field::finite(3, 2);
    Factorization fz = factor(from_ints(F9, {1, 0, 1}), 0);
    REQUIRE(fz.parts.size() == 2);
    CHECK(product(fz, F9) == from_ints(F9, {1, 0, 1}));
    for (const auto& [g, m] : fz.parts) {
        CHECK(g.degree() == 1);
        CHECK(m == 1);
    }
}

TEST_CASE("random finite field products refactor correctly") {
    for (auto F : {Field::finite(2), Field::finite(5), Field::finite(2, 3)}) {
        Rng rng(7);
        for (int trial = 0; trial < 15; ++trial) {
            Poly f = random_monic(F, 2 + static_cast<int>(rng.below(5)), rng);
            if (f.coeff(0) == F.zero()) f = f.add(Poly::one(F));
            Factorization fz = factor(f, trial);
            CHECK(fz.certified);
            CHECK(product(fz, F) == f.monic());
            // every reported part must be irreducible: re-factoring is a fixed point
            for (const auto& [g, m] : fz.parts)
                CHECK(factor(g, trial).parts.size() == 1);
        }
    }
}

TEST_CASE("rational factorization splits and certifies") {
    Field Q = Field::rationals();

    // (t^2 - 2)(t^2 - 3) = t^4 - 5 t^2 + 6
    Poly f = from_ints(Q, {6, 0, -5, 0, 1});
    Factorization fz = factor(f, 0);
    REQUIRE(fz.parts.size() == 2);
    CHECK(fz.certified);
    CHECK(product(fz, Q) == f);
    CHECK(fz.parts[0].first == from_ints(Q, {-3, 0, 1}));
    CHECK(fz.parts[1].first == from_ints(Q, {-2, 0, 1}));

    // t^2 - 2 and t^2 - t - 1 are irreducible
    for (auto g : {from_ints(Q, {-2, 0, 1}), from_ints(Q, {-1, -1, 1})}) {
        Factorization r = factor(g, 0);
        REQUIRE(r.parts.size() == 1);
        CHECK(r.certified);
        CHECK(r.parts[0].first == g);
    }

    // x^4 + 1 is irreducible over Q but splits mod every prime; the subset
    // recombination must prove it whole
    Poly c8 = from_ints(Q, {1, 0, 0, 0, 1});
    Factorization r8 = factor(c8, 0);
    REQUIRE(r8.parts.size() == 1);
    CHECK(r8.certified);

    // full split with repeats: x^2 (x-1)^3 (x+2)
    Poly big = from_ints(Q, {0, 0, 1})
                   .mul(from_ints(Q, {-1, 1}))
                   .mul(from_ints(Q, {-1, 1}))
                   .mul(from_ints(Q, {-1, 1}))
                   .mul(from_ints(Q, {2, 1}));
    Factorization rb = factor(big, 0);
    CHECK(rb.certified);
    CHECK(product(rb, Q) == big.monic());
    REQUIRE(rb.parts.size() == 3);
    CHECK(rb.parts[0].second == 1);  // x + 2
    CHECK(rb.parts[1].second == 2);  // x
    CHECK(rb.parts[2].second == 3);  // x - 1
}

TEST_CASE("rational factorization handles denominators") {
    Field Q = Field::rationals();
    // (x - 1/2)(x + 1/3), monic with fractional coefficients
    Poly a(Q, {Q.from_rational(mpq_class(-1, 2)), Q.one()});
    Poly b(Q, {Q.from_rational(mpq_class(1, 3)), Q.one()});
    Poly f = a.mul(b);
    Factorization fz = factor(f, 0);
    REQUIRE(fz.parts.size() == 2);
    CHECK(fz.certified);
    CHECK(product(fz, Q) == f);
}

TEST_CASE("random rational products refactor to irreducibles") {
    Field Q = Field::rationals();
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        Poly f = random_monic(Q, 2 + static_cast<int>(rng.below(3)), rng)
                     .mul(random_monic(Q, 1 + static_cast<int>(rng.below(3)), rng));
        Factorization fz = factor(f, trial);
        CHECK(fz.certified);
        CHECK(product(fz, Q) == f.monic());
        for (const auto& [g, m] : fz.parts) {
            Factorization again = factor(g, trial + 1);
            CHECK(again.parts.size() == 1);
        }
    }
}

TEST_CASE("factorization output is deterministic") {
    Field Q = Field::rationals();
    Poly f = from_ints(Q, {6, 0, -5, 0, 1});
    Factorization a = factor(f, 0);
    Factorization b = factor(f, 12345);  // seed must not change a rational run
    REQUIRE(a.parts.size() == b.parts.size());
    for (std::size_t i = 0; i < a.parts.size(); ++i) {
        CHECK(a.parts[i].first == b.parts[i].first);
        CHECK(a.parts[i].second == b.parts[i].second);
    }
}
