#include "hvb/isogeny.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hvb/errors.hpp"

namespace hvb {

namespace {

void internal_check(bool ok, const char* what) {
    if (!ok) throw std::logic_error(std::string("internal consistency failure: ") + what);
}

std::string point_str(const GPoint& x) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) os << ',';
        os << x[i];
    }
    os << ')';
    return os.str();
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
    const std::uint64_t limit = std::uint64_t(1) << 62;
    if (b != 0 && a > limit / b) throw input_error(what);
    return a * b;
}

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t e, const char* what) {
    std::uint64_t out = 1;
    for (std::uint64_t i = 0; i < e; ++i) out = checked_mul(out, base, what);
    return out;
}

bool is_p_power(std::uint64_t v, std::uint64_t p) {
    if (v == 0) return false;
    while (v % p == 0) v /= p;
    return v == 1;
}

std::uint64_t lcm_u64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t g = std::gcd(a, b);
    return checked_mul(a / g, b, "torsion order overflows");
}

// least n with n * x = 0 at this level
std::uint64_t point_order(const GaloisModule& m, const GPoint& x) {
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::uint64_t ord = m.orders()[i];
        n = lcm_u64(n, ord / std::gcd(ord, x[i]));
    }
    return n;
}

IntMat identity_map(std::size_t k) {
    IntMat f(k, std::vector<long long>(k, 0));
    for (std::size_t i = 0; i < k; ++i) f[i][i] = 1;
    return f;
}

bool orbit_less(const CharacterOrbit& a, const CharacterOrbit& b) {
    if (a.points != b.points) return a.points < b.points;
    return a.insep_degree < b.insep_degree;
}

bool data_is_trivial(const BundleData& d) {
    if (const auto* ro = std::get_if<RankOnly>(&d)) return ro->rank <= 1;
    const auto& m = std::get<NilModule>(d);
    NilModule t = trivial_module(m.field, m.flavor, m.g, m.rank);
    for (std::size_t i = 0; i < m.mats.size(); ++i)
        if (!(m.mats[i] == t.mats[i])) return false;
    return true;
}

// A known-trivial datum is materialized as an actual module where one can
// live; past a size bound the matrices would be pure ballast, so the rank
// alone is kept (the summand stays canonical: only rank-one data is ever
// promoted).
BundleData trivial_data(const GroundContext& ctx, const CharacterOrbit& orbit,
                        std::uint64_t rank) {
    if (rank <= 1024 && module_data_supported(ctx) && orbit.sep_degree == 1 &&
        orbit.insep_degree == 1)
        return trivial_module(ctx.field, implied_flavor(ctx), ctx.g,
                              static_cast<std::size_t>(rank));
    return RankOnly{rank};
}

// Induction along a cyclic unipotent quotient of order n (a p-power): the
// coset of the distinguished first generator advances a block index, and
// going all the way around applies that generator's original matrix.  For
// the trivial input module this is the plain cyclic-shift permutation, the
// regular representation of Z/n.
NilModule induce_cyclic(const NilModule& d, std::uint64_t n) {
    internal_check(!d.mats.empty(), "induction needs at least one generator");
    const Field& F = d.field;
    std::size_t r = d.rank;
    std::size_t big = static_cast<std::size_t>(n) * r;
    const ExactMatrix& x1 = d.mats[0];

    ExactMatrix shift(F, big, big);
    for (std::uint64_t i = 0; i + 1 < n; ++i)
        for (std::size_t u = 0; u < r; ++u)
            shift.set_int(static_cast<std::size_t>(i + 1) * r + u,
                          static_cast<std::size_t>(i) * r + u, 1);
    for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = 0; b < r; ++b)
            shift.set(a, static_cast<std::size_t>(n - 1) * r + b, x1.at(a, b));

    std::vector<ExactMatrix> mats;
    mats.push_back(std::move(shift));
    for (std::size_t j = 1; j < d.mats.size(); ++j) {
        ExactMatrix mj(F, big, big);
        for (std::uint64_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < r; ++a)
                for (std::size_t b = 0; b < r; ++b)
                    mj.set(static_cast<std::size_t>(i) * r + a,
                           static_cast<std::size_t>(i) * r + b, d.mats[j].at(a, b));
        mats.push_back(std::move(mj));
    }
    return NilModule{F, d.flavor, d.g, big, std::move(mats)};
}

}  // namespace

IsogenyData identity_isogeny(const GroundContext& ctx) {
    require_valid(ctx);
    return IsogenyData{ctx, ctx, identity_map(ctx.level.num_factors()), 1, {}, 1};
}

std::uint64_t isogeny_degree(const IsogenyData& iso) {
    std::uint64_t d = iso.mult_kernel_order;
    for (std::uint64_t f : iso.unip_etale_factors)
        d = checked_mul(d, f, "isogeny degree overflows");
    return checked_mul(d, iso.infinitesimal_order, "isogeny degree overflows");
}

bool is_separable(const IsogenyData& iso) {
    return iso.unip_etale_factors.empty() && iso.infinitesimal_order == 1;
}

std::vector<std::string> validate(const IsogenyData& iso) {
    require_valid(iso.src_ctx);
    require_valid(iso.dst_ctx);
    std::vector<std::string> out;

    if (iso.src_ctx.g != iso.dst_ctx.g)
        out.push_back("isogenous varieties must have the same dimension");
    if (!(iso.src_ctx.field == iso.dst_ctx.field))
        out.push_back("source and target live over different ground fields");
    if (iso.src_ctx.p_rank != iso.dst_ctx.p_rank)
        out.push_back("an isogeny preserves the p-rank, but the contexts disagree");
    if (iso.src_ctx.sep_closed != iso.dst_ctx.sep_closed)
        out.push_back("source and target disagree about separable closure");

    std::uint64_t p = iso.src_ctx.field.char_exponent();
    if (iso.mult_kernel_order == 0)
        out.push_back("the multiplicative kernel order must be positive");
    if (p == 1) {
        if (!iso.unip_etale_factors.empty())
            out.push_back("unipotent kernel parts cannot occur in characteristic zero");
        if (iso.infinitesimal_order != 1)
            out.push_back("infinitesimal kernel parts cannot occur in characteristic zero");
    } else {
        for (std::size_t i = 0; i < iso.unip_etale_factors.size(); ++i) {
            std::uint64_t f = iso.unip_etale_factors[i];
            if (f < p || !is_p_power(f, p))
                out.push_back("unipotent factor " + std::to_string(i + 1) + " is " +
                              std::to_string(f) + ", not a positive power of " +
                              std::to_string(p));
        }
        if (!is_p_power(iso.infinitesimal_order, p))
            out.push_back("the infinitesimal order " + std::to_string(iso.infinitesimal_order) +
                          " is not a power of " + std::to_string(p));
    }

    // the dual map must be a well-defined equivariant homomorphism from the
    // target's level to the source's; the galois layer knows how to witness
    // a failure, so borrow its message
    bool map_ok = false;
    try {
        GPoint zero(iso.dst_ctx.level.num_factors(), 0);
        apply_hom(iso.dual_map, iso.dst_ctx.level, iso.src_ctx.level, CharacterPoint{zero, 1});
        map_ok = true;
    } catch (const input_error& e) {
        out.push_back(std::string("dual map: ") + e.what());
    }

    if (map_ok) {
        GPoint zero(iso.src_ctx.level.num_factors(), 0);
        auto ker = fiber_of(iso.dual_map, iso.dst_ctx.level, iso.src_ctx.level,
                            CharacterPoint{zero, 1});
        if (ker.size() != iso.mult_kernel_order)
            out.push_back("the dual map has " + std::to_string(ker.size()) +
                          " kernel points at the working level but the declared "
                          "multiplicative kernel order is " +
                          std::to_string(iso.mult_kernel_order) +
                          " (raise the level if torsion is truncated)");
    }
    return out;
}

void require_valid(const IsogenyData& iso) {
    auto bad = validate(iso);
    if (bad.empty()) return;
    std::string msg = "invalid isogeny data";
    for (const auto& b : bad) msg += "; " + b;
    throw input_error(msg);
}

std::pair<IsogenyData, IsogenyData> factor_isogeny(const IsogenyData& iso) {
    require_valid(iso);
    // The intermediate variety is modeled on the target's level: the dual of
    // the unipotent half is purely inseparable, hence a bijection on the
    // truncated points, and we pin it to the identity.  The multiplicative
    // half then carries the entire dual map.
    IsogenyData m{iso.src_ctx, iso.dst_ctx, iso.dual_map, iso.mult_kernel_order, {}, 1};
    IsogenyData u{iso.dst_ctx, iso.dst_ctx, identity_map(iso.dst_ctx.level.num_factors()),
                  1, iso.unip_etale_factors, iso.infinitesimal_order};
    return {std::move(m), std::move(u)};
}

HomogBundle pullback(const IsogenyData& iso, const HomogBundle& f) {
    require_valid(iso);
    HomogBundle cf = make_bundle(f.context, f.summands);
    if (!same_context(cf.context, iso.dst_ctx))
        throw input_error("pullback needs a bundle on the isogeny's target variety");

    bool sep = is_separable(iso);
    std::vector<BundleSummand> out;
    for (const auto& s : cf.summands) {
        CharacterPoint y{s.orbit.points.front(), s.orbit.insep_degree};
        CharacterPoint x = apply_hom(iso.dual_map, iso.dst_ctx.level, iso.src_ctx.level, y);
        CharacterOrbit ox = orbit_of(iso.src_ctx.level, x);
        internal_check(s.orbit.sep_degree % ox.sep_degree == 0,
                       "a pullback orbit must cover the image orbit evenly");
        std::uint64_t mult = s.orbit.sep_degree / ox.sep_degree;
        std::uint64_t r = data_rank(s.data);

        if (data_is_trivial(s.data)) {
            out.push_back({ox, trivial_data(iso.src_ctx, ox,
                                            checked_mul(mult, r, "pullback rank overflows"))});
        } else if (sep && std::holds_alternative<NilModule>(s.data)) {
            // a nontrivial matrix model forces a rational orbit, whose image
            // is again rational, so the module restricts unchanged
            internal_check(mult == 1, "a rational orbit cannot cover with multiplicity");
            out.push_back({ox, s.data});
        } else {
            out.push_back({ox, RankOnly{checked_mul(mult, r, "pullback rank overflows")}});
        }
    }
    HomogBundle res = make_bundle(iso.src_ctx, std::move(out));
    internal_check(bundle_rank(res) == bundle_rank(cf), "pullback must preserve total rank");
    return res;
}

HomogBundle bundle_of(const PushforwardReport& report) {
    if (report.truncated)
        throw input_error("the block list was truncated at " +
                          std::to_string(report.blocks.size()) +
                          " of " + std::to_string(report.block_count) +
                          " blocks and cannot be reassembled into a bundle");
    std::vector<BundleSummand> ss;
    for (const auto& b : report.blocks) {
        std::uint64_t w = b.orbit.sep_degree * b.orbit.insep_degree;
        internal_check(w != 0 && b.rank % w == 0,
                       "a block's rank must be a multiple of its orbit weight");
        if (b.module) {
            internal_check(b.module->rank * w == b.rank, "block module rank mismatch");
            ss.push_back({b.orbit, *b.module});
        } else {
            ss.push_back({b.orbit, RankOnly{b.rank / w}});
        }
    }
    HomogBundle out = make_bundle(report.context, std::move(ss));
    internal_check(bundle_rank(out) == report.total_rank,
                   "reassembled bundle rank disagrees with the report");
    return out;
}

PushforwardReport pushforward(const IsogenyData& iso, const HomogBundle& e) {
    require_valid(iso);
    HomogBundle ce = make_bundle(e.context, e.summands);
    if (!same_context(ce.context, iso.src_ctx))
        throw input_error("pushforward needs a bundle on the isogeny's source variety");

    const GaloisModule& bhat = iso.dst_ctx.level;
    const GaloisModule& ahat = iso.src_ctx.level;
    std::uint64_t deg = isogeny_degree(iso);
    std::uint64_t deg_u = deg / iso.mult_kernel_order;
    bool modreg = module_data_supported(iso.dst_ctx);
    bool cyclic_kernel = iso.unip_etale_factors.size() <= 1 && iso.infinitesimal_order == 1;

    PushforwardReport rep{iso.dst_ctx, {}, 0, 0, false};
    for (const auto& s : ce.summands) {
        CharacterPoint x0{s.orbit.points.front(), s.orbit.insep_degree};
        auto fib = fiber_of(iso.dual_map, bhat, ahat, x0);
        if (fib.size() != iso.mult_kernel_order) {
            std::uint64_t need = checked_mul(point_order(ahat, x0.coords), iso.mult_kernel_order,
                                             "required torsion level overflows");
            throw input_error(
                "insufficient torsion level: the dual-map fiber over " + point_str(x0.coords) +
                " shows " + std::to_string(fib.size()) + " of " +
                std::to_string(iso.mult_kernel_order) +
                " kernel translates; a target level whose exponent is a multiple of " +
                std::to_string(need) + " is sufficient");
        }

        std::uint64_t r = data_rank(s.data);
        std::uint64_t sx = s.orbit.sep_degree;
        std::uint64_t qx = s.orbit.insep_degree;

        // fiber points sharing a Galois orbit belong to one block
        std::map<std::vector<GPoint>, CharacterOrbit> groups;
        for (const auto& y : fib) {
            CharacterOrbit oy = orbit_of(bhat, y);
            auto key = oy.points;
            groups.emplace(std::move(key), std::move(oy));
        }

        std::uint64_t covered = 0;
        for (const auto& [key, oy] : groups) {
            internal_check(oy.sep_degree % sx == 0,
                           "a fiber orbit must cover the base orbit evenly");
            covered += oy.sep_degree / sx;

            PushforwardBlock b;
            b.orbit = oy;
            b.rank = checked_mul(checked_mul(oy.sep_degree, qx, "pushforward rank overflows"),
                                 checked_mul(r, deg_u, "pushforward rank overflows"),
                                 "pushforward rank overflows");
            b.indecomposable = (r == 1);
            if (modreg && cyclic_kernel && oy.sep_degree == 1 && oy.insep_degree == 1) {
                if (const auto* nm = std::get_if<NilModule>(&s.data)) {
                    b.module = iso.unip_etale_factors.empty()
                                   ? *nm
                                   : induce_cyclic(*nm, iso.unip_etale_factors.front());
                }
            }
            rep.blocks.push_back(std::move(b));
        }
        internal_check(covered == iso.mult_kernel_order,
                       "fiber orbits must account for every kernel translate");
    }

    std::sort(rep.blocks.begin(), rep.blocks.end(),
              [](const PushforwardBlock& a, const PushforwardBlock& b) {
                  return orbit_less(a.orbit, b.orbit);
              });
    rep.block_count = rep.blocks.size();
    for (const auto& b : rep.blocks) rep.total_rank += b.rank;
    internal_check(rep.total_rank == checked_mul(deg, bundle_rank(ce),
                                                 "pushforward rank overflows"),
                   "pushforward rank must be the degree times the input rank");
    return rep;
}

PushforwardReport frobenius_pushforward(const GroundContext& ctx, std::uint32_t n,
                                        const std::optional<CharacterPoint>& l_point) {
    require_valid(ctx);
    std::uint64_t p = ctx.field.char_exponent();
    if (p == 1)
        throw regime_error("Frobenius pushforward needs positive characteristic");
    if (!ctx.sep_closed)
        throw regime_error("Frobenius pushforward is computed over a separably closed field");

    GPoint base(ctx.level.num_factors(), 0);
    if (l_point) {
        if (l_point->insep_degree != 1)
            throw input_error("the translating point must be rational (q = 1)");
        if (!ctx.level.point_in_range(l_point->coords))
            throw input_error("the translating point does not live at the working level");
        base = l_point->coords;
    }

    std::uint64_t g = ctx.g;
    std::uint64_t r = ctx.p_rank;
    PushforwardReport rep{ctx, {}, 0, 0, false};

    std::uint64_t block_rank =
        checked_pow(p, std::uint64_t(n) * (g - r), "Frobenius block rank overflows");
    std::uint64_t block_count =
        checked_pow(p, std::uint64_t(n) * r, "Frobenius block count overflows");
    rep.block_count = block_count;
    rep.total_rank = checked_mul(block_rank, block_count, "Frobenius total rank overflows");

    // the labels fill the etale p^n-torsion, one cyclic factor per
    // p-divisible coordinate of the level
    std::vector<std::size_t> pcoords;
    for (std::size_t i = 0; i < ctx.level.num_factors(); ++i)
        if (ctx.level.orders()[i] % p == 0) pcoords.push_back(i);
    if (pcoords.size() != r)
        throw input_error("the level has " + std::to_string(pcoords.size()) +
                          " p-divisible coordinates but the p-rank is " + std::to_string(r));

    std::uint64_t pn = 1;
    if (n > 0 && r > 0) {
        pn = checked_pow(p, n, "Frobenius torsion order overflows");
        for (std::size_t i : pcoords)
            if (ctx.level.orders()[i] % pn != 0)
                throw input_error("insufficient torsion level: coordinate " +
                                  std::to_string(i + 1) + " has order " +
                                  std::to_string(ctx.level.orders()[i]) +
                                  " but Frobenius to the " + std::to_string(n) +
                                  " needs " + std::to_string(pn) + "-torsion");
    }

    // per varying coordinate, the label values in increasing order
    std::vector<std::vector<std::uint64_t>> values;
    for (std::size_t i : pcoords) {
        std::uint64_t ord = ctx.level.orders()[i];
        std::uint64_t step = ord / pn;
        std::vector<std::uint64_t> v;
        v.reserve(static_cast<std::size_t>(pn));
        for (std::uint64_t c = 0; c < pn; ++c) v.push_back((base[i] + c * step) % ord);
        std::sort(v.begin(), v.end());
        values.push_back(std::move(v));
    }

    const std::uint64_t cap = 4096;
    std::uint64_t emit = std::min(block_count, cap);
    rep.truncated = block_count > cap;

    std::optional<NilModule> line;
    if (module_data_supported(ctx))
        line = trivial_module(ctx.field, implied_flavor(ctx), ctx.g,
                              static_cast<std::size_t>(block_rank));

    std::vector<std::size_t> odo(pcoords.size(), 0);
    for (std::uint64_t k = 0; k < emit; ++k) {
        GPoint coords = base;
        for (std::size_t j = 0; j < pcoords.size(); ++j) coords[pcoords[j]] = values[j][odo[j]];
        PushforwardBlock b;
        b.orbit = orbit_of(ctx.level, CharacterPoint{coords, 1});
        internal_check(b.orbit.sep_degree == 1, "Frobenius labels must be rational");
        b.rank = block_rank;
        b.indecomposable = true;
        b.module = line;
        rep.blocks.push_back(std::move(b));
        // odometer, last coordinate fastest, so labels come out in
        // lexicographic order and a capped list holds the least ones
        for (std::size_t j = pcoords.size(); j-- > 0;) {
            if (++odo[j] < values[j].size()) break;
            odo[j] = 0;
        }
    }
    return rep;
}

}  // namespace hvb
