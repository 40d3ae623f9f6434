#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hvb/errors.hpp"
#include "hvb/field.hpp"
#include "hvb/matrix.hpp"
#include "hvb/rng.hpp"

using namespace hvb;

namespace {

Elem random_elem(const Field& F, Rng& rng) {
    if (F.is_rational()) {
        long num = rng.small(20);
        long den = 1 + static_cast<long>(rng.below(9));
        mpq_class q(num, den);
        q.canonicalize();
        return q;
    }
    return F.elem_at(rng.below(F.order()));
}

void check_field_axioms(const Field& F, std::uint64_t seed) {
    Rng rng(seed);
    for (int iter = 0; iter < 200; ++iter) {
        Elem a = random_elem(F, rng);
        Elem b = random_elem(F, rng);
        Elem c = random_elem(F, rng);
        CHECK(F.eq(F.add(a, b), F.add(b, a)));
        CHECK(F.eq(F.mul(a, b), F.mul(b, a)));
        CHECK(F.eq(F.add(F.add(a, b), c), F.add(a, F.add(b, c))));
        CHECK(F.eq(F.mul(F.mul(a, b), c), F.mul(a, F.mul(b, c))));
        CHECK(F.eq(F.mul(a, F.add(b, c)), F.add(F.mul(a, b), F.mul(a, c))));
        CHECK(F.eq(F.add(a, F.zero()), a));
        CHECK(F.eq(F.mul(a, F.one()), a));
        CHECK(F.is_zero(F.add(a, F.neg(a))));
        if (!F.is_zero(a)) {
            CHECK(F.is_one(F.mul(a, F.inv(a))));
            CHECK(F.eq(F.div(b, a), F.mul(b, F.inv(a))));
        }
    }
}

ExactMatrix random_matrix(const Field& F, std::size_t r, std::size_t c, Rng& rng) {
    ExactMatrix m(F, r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            if (rng.below(3) != 0) m.at(i, j) = random_elem(F, rng);
    return m;
}

} // namespace

TEST_CASE("field construction validates its arguments") {
    CHECK_NOTHROW(Field::finite(2));
    CHECK_NOTHROW(Field::finite(3));
    CHECK_NOTHROW(Field::finite(1000003));
    CHECK_THROWS_AS(Field::finite(4), input_error);
    CHECK_THROWS_AS(Field::finite(1), input_error);
    CHECK_THROWS_AS(Field::finite(2, 13), input_error);

    // x^2 + x + 1 is irreducible over GF(2); x^2 + 1 = (x+1)^2 is not.
    CHECK_NOTHROW(Field::finite(2, 2, {1, 1, 1}));
    CHECK_THROWS_AS(Field::finite(2, 2, {1, 0, 1}), input_error);
    // x^2 + 1 is irreducible over GF(3).
    CHECK_NOTHROW(Field::finite(3, 2, {1, 0, 1}));
    // x^3 + x + 1 over GF(2).
    CHECK_NOTHROW(Field::finite(2, 3, {1, 1, 0, 1}));
    // non-monic rejected
    CHECK_THROWS_AS(Field::finite(5, 2, {2, 0, 2}), input_error);
}

TEST_CASE("rational arithmetic normalizes") {
    Field Q = Field::rationals();
    Elem a = Q.from_rational(mpq_class(2, 6));
    Elem b = Q.from_rational(mpq_class(1, 3));
    CHECK(Q.eq(a, b));
    CHECK(Q.to_string(Q.add(a, b)) == "2/3");
    CHECK(Q.to_string(Q.mul(Q.from_int(-4), Q.inv(Q.from_int(6)))) == "-2/3");
}

TEST_CASE("field axioms hold on sampled elements") {
    check_field_axioms(Field::rationals(), 11);
    check_field_axioms(Field::finite(2), 12);
    check_field_axioms(Field::finite(3), 13);
    check_field_axioms(Field::finite(2, 3, {1, 1, 0, 1}), 14);
    check_field_axioms(Field::finite(3, 2, {1, 0, 1}), 15);
    check_field_axioms(Field::finite(7, 2, {3, 1, 1}), 16);
}

TEST_CASE("GF(9) multiplicative order and Frobenius") {
    Field F = Field::finite(3, 2, {1, 0, 1});
    // every nonzero element satisfies a^8 = 1
    for (std::uint64_t i = 1; i < 9; ++i) {
        Elem a = F.elem_at(i);
        Elem p = F.one();
        for (int k = 0; k < 8; ++k) p = F.mul(p, a);
        CHECK(F.is_one(p));
        // p-th root inverts cubing
        Elem cube = F.mul(F.mul(a, a), a);
        CHECK(F.eq(F.pth_root(cube), a));
    }
}

TEST_CASE("rank, kernel and solve on fixed examples") {
    Field Q = Field::rationals();

    // The 2x2 zero matrix has rank 0 and a full kernel.
    ExactMatrix z(Q, 2, 2);
    CHECK(z.rank() == 0);
    CHECK(z.kernel_basis().rows() == 2);

    // [[1,2],[2,4]] has rank 1, kernel spanned by (-2, 1).
    ExactMatrix m(Q, 2, 2);
    m.set_int(0, 0, 1); m.set_int(0, 1, 2);
    m.set_int(1, 0, 2); m.set_int(1, 1, 4);
    CHECK(m.rank() == 1);
    ExactMatrix k = m.kernel_basis();
    REQUIRE(k.rows() == 1);
    CHECK(Q.eq(k.at(0, 0), Q.from_int(-2)));
    CHECK(Q.eq(k.at(0, 1), Q.from_int(1)));

    // Solve picks the particular solution with free variables zero.
    Vec rhs = {Q.from_int(3), Q.from_int(6)};
    auto x = m.solve(rhs);
    REQUIRE(x.has_value());
    CHECK(Q.eq((*x)[0], Q.from_int(3)));
    CHECK(Q.is_zero((*x)[1]));

    Vec bad = {Q.from_int(1), Q.from_int(0)};
    CHECK_FALSE(m.solve(bad).has_value());
}

TEST_CASE("rank-nullity and solve consistency on random matrices") {
    for (auto F : {Field::rationals(), Field::finite(2), Field::finite(3, 2, {1, 0, 1})}) {
        Rng rng(99);
        for (int iter = 0; iter < 40; ++iter) {
            std::size_t r = 1 + rng.below(6), c = 1 + rng.below(6);
            ExactMatrix m = random_matrix(F, r, c, rng);
            std::size_t rk = m.rank();
            ExactMatrix ker = m.kernel_basis();
            CHECK(rk + ker.rows() == c);
            for (std::size_t i = 0; i < ker.rows(); ++i) {
                Vec v(c);
                for (std::size_t j = 0; j < c; ++j) v[j] = ker.at(i, j);
                for (const Elem& e : m.apply(v)) CHECK(F.is_zero(e));
            }
            // M x = M y for a random y must be solvable, and the residual zero.
            Vec y(c);
            for (std::size_t j = 0; j < c; ++j) y[j] = random_elem(F, rng);
            Vec b = m.apply(y);
            auto x = m.solve(b);
            REQUIRE(x.has_value());
            Vec bx = m.apply(*x);
            for (std::size_t i = 0; i < r; ++i) CHECK(F.eq(bx[i], b[i]));
        }
    }
}

TEST_CASE("rref is canonical under row scrambling") {
    Field F = Field::finite(3);
    Rng rng(7);
    for (int iter = 0; iter < 25; ++iter) {
        ExactMatrix m = random_matrix(F, 4, 5, rng);
        auto [r1, p1] = m.rref();
        // permute and rescale rows, same row space
        ExactMatrix m2(F, 4, 5);
        std::vector<std::size_t> perm = {2, 0, 3, 1};
        for (std::size_t i = 0; i < 4; ++i) {
            Elem c = F.from_int(1 + static_cast<long>(rng.below(2)));
            for (std::size_t j = 0; j < 5; ++j) m2.at(i, j) = F.mul(c, m.at(perm[i], j));
        }
        auto [r2, p2] = m2.rref();
        CHECK(p1 == p2);
        CHECK(r1 == r2);
    }
}

TEST_CASE("inverse round-trips and rejects singular input") {
    Field Q = Field::rationals();
    Rng rng(5);
    for (int iter = 0; iter < 20; ++iter) {
        std::size_t n = 1 + rng.below(5);
        ExactMatrix m = random_matrix(Q, n, n, rng);
        auto inv = m.try_inverse();
        if (inv) {
            CHECK(m.mul(*inv).is_identity());
            CHECK(inv->mul(m).is_identity());
        } else {
            CHECK(m.rank() < n);
        }
    }
    ExactMatrix s(Q, 2, 2);
    s.set_int(0, 0, 1); s.set_int(0, 1, 1);
    s.set_int(1, 0, 1); s.set_int(1, 1, 1);
    CHECK_THROWS_AS(s.inverse(), input_error);
}

TEST_CASE("kronecker ordering is left-factor major") {
    Field Q = Field::rationals();
    ExactMatrix a(Q, 2, 2), b(Q, 2, 2);
    a.set_int(0, 1, 1);             // a = E12
    b.set_int(0, 0, 1); b.set_int(1, 1, 2);
    ExactMatrix k = a.kronecker(b);
    // block (0,1) of the result equals b scaled by a[0][1]
    CHECK(Q.eq(k.at(0, 2), Q.from_int(1)));
    CHECK(Q.eq(k.at(1, 3), Q.from_int(2)));
    CHECK(Q.is_zero(k.at(2, 0)));
}
