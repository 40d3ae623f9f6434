#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <vector>

#include "hvb/errors.hpp"
#include "hvb/field.hpp"
#include "hvb/matrix.hpp"
#include "hvb/nilmod.hpp"
#include "hvb/rng.hpp"

using namespace hvb;

namespace {

// Nilpotent Jordan block: ones on the superdiagonal.
ExactMatrix jordan_nil(const Field& F, std::size_t n) {
    ExactMatrix m(F, n, n);
    for (std::size_t i = 0; i + 1 < n; ++i) m.set_int(i, i + 1, 1);
    return m;
}

NilModule jordan_module(const Field& F, std::size_t n) {
    return NilModule{F, Flavor::Additive, 1, n, {jordan_nil(F, n)}};
}

NilModule unipotent_jordan_module(const Field& F, std::size_t n) {
    ExactMatrix m = ExactMatrix::identity(F, n).add(jordan_nil(F, n));
    return NilModule{F, Flavor::MultiplicativeUnipotent, 1, n, {m}};
}

// Oracle: Jordan type of a single nilpotent matrix from its rank sequence.
// multiplicity of J_k is rank(X^{k-1}) - 2 rank(X^k) + rank(X^{k+1}).
std::map<std::size_t, std::size_t> jordan_type(const ExactMatrix& x) {
    std::size_t n = x.rows();
    std::vector<std::size_t> rk;
    rk.push_back(n);
    ExactMatrix p = x;
    while (true) {
        rk.push_back(p.rank());
        if (rk.back() == 0) break;
        p = p.mul(x);
    }
    while (rk.size() < n + 2) rk.push_back(0);
    std::map<std::size_t, std::size_t> type;
    for (std::size_t k = 1; k <= n; ++k) {
        std::size_t m = rk[k - 1] - 2 * rk[k] + rk[k + 1];
        if (m > 0) type[k] = m;
    }
    return type;
}

// Oracle: intertwiner space dimension by an independently assembled linear
// system, laid out column-major (the library uses row-major).
std::size_t brute_hom_dim(const NilModule& a, const NilModule& b) {
    const Field& F = a.field;
    std::size_t ra = a.rank, rb = b.rank, n = ra * rb;
    if (n == 0) return 0;
    ExactMatrix sys(F, a.g * n, n);
    // unknown Z (rb x ra) stored column-major: Z(u,w) at index w*rb + u
    for (std::size_t i = 0; i < a.g; ++i)
        for (std::size_t u = 0; u < rb; ++u)
            for (std::size_t v = 0; v < ra; ++v) {
                std::size_t row = i * n + v * rb + u;
                for (std::size_t w = 0; w < ra; ++w)
                    sys.at(row, w * rb + u) =
                        F.add(sys.at(row, w * rb + u), a.mats[i].at(w, v));
                for (std::size_t w = 0; w < rb; ++w)
                    sys.at(row, v * rb + w) =
                        F.sub(sys.at(row, v * rb + w), b.mats[i].at(u, w));
            }
    return n - sys.rank();
}

ExactMatrix random_invertible(const Field& F, std::size_t n, Rng& rng) {
    while (true) {
        ExactMatrix p(F, n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                Elem c = F.is_rational() ? F.from_int(rng.small(3))
                                         : F.elem_at(rng.below(F.order()));
                p.set(i, j, c);
            }
        if (p.try_inverse()) return p;
    }
}

NilModule conjugate(const NilModule& m, const ExactMatrix& p) {
    ExactMatrix pi = p.inverse();
    std::vector<ExactMatrix> mats;
    for (const auto& x : m.mats) mats.push_back(p.mul(x).mul(pi));
    return NilModule{m.field, m.flavor, m.g, m.rank, std::move(mats)};
}

// Random valid module: direct sum of Jordan-type pieces, conjugated.  For
// g > 1 each generator acts as a polynomial in the same block (commuting by
// construction).
NilModule random_module(const Field& F, Flavor fl, std::size_t g, std::size_t max_rank,
                        Rng& rng) {
    std::vector<ExactMatrix> gens(g, ExactMatrix(F, 0, 0));
    std::size_t total = 0;
    bool first = true;
    while (total == 0 || (total < max_rank && rng.below(2) == 0)) {
        std::size_t n = 1 + rng.below(std::min<std::uint64_t>(3, max_rank - total));
        ExactMatrix nl = jordan_nil(F, n);
        for (std::size_t i = 0; i < g; ++i) {
            ExactMatrix x(F, n, n);
            ExactMatrix pw = nl;
            for (std::size_t e = 1; e < n && e <= 2; ++e) {
                long c = rng.small(2);
                if (c != 0) x = x.add(pw.scalar_mul(F.from_int(c)));
                pw = pw.mul(nl);
            }
            if (fl == Flavor::MultiplicativeUnipotent)
                x = x.add(ExactMatrix::identity(F, n));
            gens[i] = first ? x : gens[i].direct_sum(x);
        }
        total += n;
        first = false;
    }
    NilModule m{F, fl, g, total, std::move(gens)};
    return conjugate(m, random_invertible(F, total, rng));
}

}  // namespace

TEST_CASE("validate accepts and reports correctly") {
    Field Q = Field::rationals();
    NilModule ok{Q, Flavor::Additive, 2, 1, {ExactMatrix(Q, 1, 1), ExactMatrix(Q, 1, 1)}};
    CHECK(validate(ok).empty());

    NilModule notnil{Q, Flavor::Additive, 1, 2, {ExactMatrix::identity(Q, 2)}};
    auto v = validate(notnil);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("not nilpotent") != std::string::npos);

    ExactMatrix x1(Q, 3, 3), x2(Q, 3, 3);
    x1.set_int(0, 1, 1);                      // E_12
    x2.set_int(0, 2, 1); x2.set_int(1, 0, 1); // E_13 + E_21
    NilModule noncomm{Q, Flavor::Additive, 2, 3, {x1, x2}};
    auto w = validate(noncomm);
    REQUIRE(w.size() >= 1);
    CHECK(w[0].find("do not commute") != std::string::npos);

    CHECK_THROWS_AS(validate(NilModule{Q, Flavor::MultiplicativeUnipotent, 1, 1,
                                       {ExactMatrix::identity(Q, 1)}}),
                    input_error);
    CHECK_THROWS_AS(validate(NilModule{Q, Flavor::Additive, 2, 1, {ExactMatrix(Q, 1, 1)}}),
                    input_error);

    Field F2 = Field::finite(2);
    auto uni = unipotent_jordan_module(F2, 2);
    CHECK(validate(uni).empty());
    NilModule notuni{F2, Flavor::MultiplicativeUnipotent, 1, 2, {jordan_nil(F2, 2)}};
    auto u = validate(notuni);
    REQUIRE(u.size() == 1);
    CHECK(u[0].find("not unipotent") != std::string::npos);
}

TEST_CASE("direct sum ranks and blocks") {
    Field Q = Field::rationals();
    NilModule a = jordan_module(Q, 2), b = jordan_module(Q, 1);
    NilModule s = direct_sum(a, b);
    CHECK(s.rank == 3);
    CHECK(validate(s).empty());
    ExactMatrix expect(Q, 3, 3);
    expect.set_int(0, 1, 1);  // J2 block on top, zero block below
    CHECK(s.mats[0] == expect);
}

TEST_CASE("direct sum with the zero module returns the same matrices") {
    Field Q = Field::rationals();
    NilModule a = jordan_module(Q, 3);
    NilModule z{Q, Flavor::Additive, 1, 0, {ExactMatrix(Q, 0, 0)}};
    NilModule s = direct_sum(a, z);
    CHECK(s.rank == 3);
    CHECK(s.mats[0] == a.mats[0]);
    NilModule s2 = direct_sum(jordan_module(Q, 2), jordan_module(Q, 3));
    CHECK(s2.rank == 5);
}

TEST_CASE("tensor rank and the Clebsch-Gordan shape for J2 x J2") {
    Field Q = Field::rationals();
    NilModule a = jordan_module(Q, 2);
    NilModule t = tensor(a, a);
    CHECK(t.rank == 4);
    CHECK(validate(t).empty());
    auto type = jordan_type(t.mats[0]);
    std::map<std::size_t, std::size_t> expect{{3, 1}, {1, 1}};
    CHECK(type == expect);

    // unit object
    NilModule one = trivial_module(Q, Flavor::Additive, 1, 1);
    CHECK(tensor(a, one).mats[0] == a.mats[0]);
}

TEST_CASE("multiplicative tensor over GF(2)") {
    Field F2 = Field::finite(2);
    NilModule u = unipotent_jordan_module(F2, 2);
    NilModule t = tensor(u, u);
    CHECK(t.rank == 4);
    CHECK(validate(t).empty());
    ExactMatrix nil = t.mats[0].sub(ExactMatrix::identity(F2, 4));
    CHECK(nil.mul(nil).is_zero());
    CHECK(nil.rank() == 2);  // two rank-2 unipotent blocks
}

TEST_CASE("dual conventions") {
    Field Q = Field::rationals();
    NilModule a = jordan_module(Q, 3);
    NilModule d = dual(a);
    CHECK(d.mats[0] == a.mats[0].neg().transpose());
    CHECK(dual(d).mats[0] == a.mats[0]);  // involution on the nose
    CHECK(is_isomorphic(a, d, 7));        // single blocks are self-dual

    NilModule tr = trivial_module(Q, Flavor::Additive, 2, 3);
    CHECK(dual(tr).mats[0] == tr.mats[0]);
    CHECK(dual(tr).mats[1] == tr.mats[1]);

    Field F3 = Field::finite(3);
    NilModule u = unipotent_jordan_module(F3, 2);
    NilModule du = dual(u);
    CHECK(du.mats[0] == u.mats[0].inverse().transpose());
    CHECK(validate(du).empty());
    CHECK(dual(du).mats[0] == u.mats[0]);
}

TEST_CASE("hom_module matches tensor of dual") {
    Field Q = Field::rationals();
    NilModule a = jordan_module(Q, 2), b = jordan_module(Q, 3);
    NilModule h = hom_module(a, b);
    CHECK(h.rank == 6);
    CHECK(h.mats[0] == tensor(dual(a), b).mats[0]);

    NilModule one = trivial_module(Q, Flavor::Additive, 1, 1);
    CHECK(hom_module(one, b).mats[0] == b.mats[0]);
    CHECK(hom_module(a, one).mats[0] == dual(a).mats[0]);

    // hom(J2,J2) = J2 x J2 up to the self-duality of J2
    auto type = jordan_type(hom_module(a, a).mats[0]);
    std::map<std::size_t, std::size_t> expect{{3, 1}, {1, 1}};
    CHECK(type == expect);
}

TEST_CASE("hom_dim against the brute-force system") {
    Field Q = Field::rationals();
    NilModule one = trivial_module(Q, Flavor::Additive, 1, 1);
    CHECK(hom_dim(one, one) == 1);
    NilModule a = jordan_module(Q, 2), b = jordan_module(Q, 3);
    CHECK(hom_dim(a, b) == 2);
    CHECK(brute_hom_dim(a, b) == 2);

    Rng rng(2024);
    for (int iter = 0; iter < 12; ++iter) {
        Field F = iter % 2 ? Field::rationals() : Field::finite(iter % 4 ? 3 : 2);
        Flavor fl = F.is_rational() || iter % 3 ? Flavor::Additive
                                                : Flavor::MultiplicativeUnipotent;
        std::size_t g = 1 + rng.below(2);
        NilModule x = random_module(F, fl, g, 4, rng);
        NilModule y = random_module(F, fl, g, 4, rng);
        CHECK(hom_dim(x, y) == brute_hom_dim(x, y));
        CHECK(hom_dim(x, y) == hom_dim(dual(y), dual(x)));
        // hom basis elements really intertwine
        for (const auto& z : hom_basis(x, y))
            for (std::size_t i = 0; i < g; ++i)
                CHECK(z.mul(x.mats[i]) == y.mats[i].mul(z));
    }
}

TEST_CASE("hom_dim equals invariants of the hom module") {
    Rng rng(5150);
    for (int iter = 0; iter < 8; ++iter) {
        Field F = iter % 2 ? Field::rationals() : Field::finite(5);
        std::size_t g = 1 + rng.below(2);
        NilModule x = random_module(F, Flavor::Additive, g, 4, rng);
        NilModule y = random_module(F, Flavor::Additive, g, 4, rng);
        NilModule h = hom_module(x, y);
        // invariants: common kernel of the hom-module generators
        std::optional<ExactMatrix> stacked;
        for (const auto& z : h.mats) stacked = stacked ? stacked->vstack(z) : z;
        std::size_t inv = h.rank - stacked->rank();
        CHECK(hom_dim(x, y) == inv);
    }
}

TEST_CASE("ext dims of the trivial module are binomials") {
    Field Q = Field::rationals();
    NilModule t3 = trivial_module(Q, Flavor::Additive, 3, 1);
    CHECK(ext_dims(t3, t3, 3) == std::vector<std::size_t>{1, 3, 3, 1});
    NilModule t1 = trivial_module(Q, Flavor::Additive, 1, 1);
    CHECK(ext_dims(t1, t1, 1) == std::vector<std::size_t>{1, 1});
    // beyond the top degree everything vanishes
    NilModule t2 = trivial_module(Q, Flavor::Additive, 2, 1);
    CHECK(ext_dims(t2, t2, 4) == std::vector<std::size_t>{1, 2, 1, 0, 0});
    NilModule t4 = trivial_module(Q, Flavor::Additive, 4, 1);
    auto e4 = ext_dims(t4, t4, 4);
    CHECK(e4 == std::vector<std::size_t>{1, 4, 6, 4, 1});
}

TEST_CASE("ext dims for J2 against the trivial module") {
    Field Q = Field::rationals();
    NilModule a = jordan_module(Q, 2), b = jordan_module(Q, 1);
    auto e = ext_dims(a, b, 1);
    // oracle: two-term complex M --X--> M with M = dual(J2)
    ExactMatrix x = dual(a).mats[0];
    std::size_t rk = x.rank();
    CHECK(e == std::vector<std::size_t>{2 - rk, 2 - rk});
    CHECK(e == std::vector<std::size_t>{1, 1});
}

TEST_CASE("ext regime errors") {
    Field F2 = Field::finite(2);
    NilModule u = unipotent_jordan_module(F2, 2);
    CHECK_THROWS_AS(ext_dims(u, u, 1), regime_error);
    NilModule addp{F2, Flavor::Additive, 1, 2, {jordan_nil(F2, 2)}};
    CHECK(validate(addp).empty());
    CHECK_THROWS_AS(ext_dims(addp, addp, 1), regime_error);
}

TEST_CASE("ext properties on random modules") {
    Rng rng(31337);
    Field Q = Field::rationals();
    for (int iter = 0; iter < 8; ++iter) {
        std::size_t g = 1 + rng.below(3);
        NilModule x = random_module(Q, Flavor::Additive, g, 3, rng);
        NilModule y = random_module(Q, Flavor::Additive, g, 3, rng);
        auto e = ext_dims(x, y, g);
        CHECK(e[0] == hom_dim(x, y));
        long euler = 0;
        for (std::size_t i = 0; i <= g; ++i)
            euler += (i % 2 ? -1L : 1L) * static_cast<long>(e[i]);
        CHECK(euler == 0);
    }
}

TEST_CASE("loewy length") {
    Field Q = Field::rationals();
    CHECK(loewy_length(trivial_module(Q, Flavor::Additive, 2, 3)) == 1);
    CHECK(loewy_length(jordan_module(Q, 1)) == 1);
    CHECK(loewy_length(jordan_module(Q, 2)) == 2);
    CHECK(loewy_length(jordan_module(Q, 5)) == 5);
    NilModule a = jordan_module(Q, 2);
    CHECK(loewy_length(tensor(a, a)) == 3);
    NilModule z{Q, Flavor::Additive, 1, 0, {ExactMatrix(Q, 0, 0)}};
    CHECK(loewy_length(z) == 0);

    Field F2 = Field::finite(2);
    CHECK(loewy_length(unipotent_jordan_module(F2, 2)) == 2);
    CHECK(loewy_length(trivial_module(F2, Flavor::MultiplicativeUnipotent, 1, 4)) == 1);
}

TEST_CASE("power order") {
    Field F2 = Field::finite(2);
    CHECK(power_order(trivial_module(F2, Flavor::MultiplicativeUnipotent, 1, 3)) == 0);
    CHECK(power_order(unipotent_jordan_module(F2, 2)) == 1);

    // regular representation of Z/4: cyclic shift of rank 4 over GF(2)
    ExactMatrix shift(F2, 4, 4);
    for (std::size_t i = 0; i < 4; ++i) shift.set_int((i + 1) % 4, i, 1);
    NilModule reg{F2, Flavor::MultiplicativeUnipotent, 1, 4, {shift}};
    CHECK(validate(reg).empty());
    // oracle: direct power computation
    CHECK(shift.pow(2) != ExactMatrix::identity(F2, 4));
    CHECK(shift.pow(4) == ExactMatrix::identity(F2, 4));
    CHECK(power_order(reg) == 2);

    Field Q = Field::rationals();
    CHECK_THROWS_AS(power_order(jordan_module(Q, 2)), regime_error);
}

TEST_CASE("context mismatches raise input errors") {
    Field Q = Field::rationals();
    Field F2 = Field::finite(2);
    NilModule a = jordan_module(Q, 2);
    NilModule b{F2, Flavor::Additive, 1, 2, {jordan_nil(F2, 2)}};
    CHECK_THROWS_AS(tensor(a, b), input_error);
    NilModule c{Q, Flavor::Additive, 2, 2, {jordan_nil(Q, 2), ExactMatrix(Q, 2, 2)}};
    CHECK_THROWS_AS(direct_sum(a, c), input_error);
    CHECK_THROWS_AS(hom_dim(a, c), input_error);
}

TEST_CASE("tensor distributes over direct sums up to isomorphism") {
    Rng rng(90210);
    Field Q = Field::rationals();
    for (int iter = 0; iter < 4; ++iter) {
        NilModule x = random_module(Q, Flavor::Additive, 1, 2, rng);
        NilModule y = random_module(Q, Flavor::Additive, 1, 2, rng);
        NilModule z = random_module(Q, Flavor::Additive, 1, 2, rng);
        NilModule lhs = tensor(x, direct_sum(y, z));
        NilModule rhs = direct_sum(tensor(x, y), tensor(x, z));
        CHECK(lhs.rank == rhs.rank);
        CHECK(is_isomorphic(lhs, rhs, 42 + iter));
    }
}
