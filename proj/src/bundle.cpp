#include "hvb/bundle.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "hvb/errors.hpp"

namespace hvb {

namespace {

void internal_check(bool ok, const char* what) {
    if (!ok) throw std::logic_error(std::string("internal consistency failure: ") + what);
}

int cmp_orbit(const CharacterOrbit& a, const CharacterOrbit& b) {
    if (a.points != b.points) return a.points < b.points ? -1 : 1;
    if (a.insep_degree != b.insep_degree) return a.insep_degree < b.insep_degree ? -1 : 1;
    return 0;
}

std::uint64_t orbit_weight(const CharacterOrbit& o) {
    return o.sep_degree * o.insep_degree;
}

bool data_is_module(const BundleData& d) { return std::holds_alternative<NilModule>(d); }

// merge data of two summands sharing an orbit; a rank-only part of rank at
// least 2 is opaque, so any such participant degrades the sum to rank-only
BundleData merge_data(BundleData a, BundleData b) {
    if (data_is_module(a) && data_is_module(b))
        return direct_sum(std::get<NilModule>(a), std::get<NilModule>(b));
    return RankOnly{data_rank(a) + data_rank(b)};
}

// validate one orbit against the level and return its canonical form
CharacterOrbit checked_orbit(const GroundContext& ctx, const CharacterOrbit& o) {
    if (o.points.empty()) throw input_error("orbit has no points");
    std::set<GPoint> given(o.points.begin(), o.points.end());
    if (given.size() != o.points.size()) throw input_error("orbit has repeated points");
    CharacterOrbit canonical = orbit_of(ctx.level, CharacterPoint{o.points[0], o.insep_degree});
    if (std::set<GPoint>(canonical.points.begin(), canonical.points.end()) != given)
        throw input_error("orbit is not closed under the Galois action");
    if (o.sep_degree != canonical.sep_degree)
        throw input_error("orbit lists a separable degree different from its size");
    return canonical;
}

void check_data(const GroundContext& ctx, const CharacterOrbit& orbit, const BundleData& d) {
    if (!data_is_module(d)) return;
    const NilModule& m = std::get<NilModule>(d);
    if (!module_data_supported(ctx))
        throw regime_error("module data is not supported in this regime; use rank-only summands");
    if (orbit.sep_degree != 1 || orbit.insep_degree != 1)
        throw regime_error("module data needs a rational separable orbit");
    if (m.field != ctx.field) throw input_error("module data must live over the ground field");
    if (m.g != ctx.g)
        throw input_error("module data has the wrong number of generators for the dimension");
    if (m.flavor != implied_flavor(ctx))
        throw input_error("module data has the wrong flavor for this context");
    require_valid(m);
}

HomogBundle canon(const HomogBundle& e) { return make_bundle(e.context, e.summands); }

std::uint64_t lcm_u64(std::uint64_t a, std::uint64_t b) {
    unsigned __int128 l = static_cast<unsigned __int128>(a) / std::gcd(a, b) * b;
    if (l > (static_cast<unsigned __int128>(1) << 63))
        throw input_error("torsion witness exponent overflows");
    return static_cast<std::uint64_t>(l);
}

std::uint64_t point_order(const GPoint& x, const std::vector<std::uint64_t>& orders) {
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < x.size(); ++i)
        n = lcm_u64(n, orders[i] / std::gcd(orders[i], x[i]));
    return n;
}

bool data_trivial(const BundleData& d) {
    if (!data_is_module(d)) return data_rank(d) <= 1;
    const NilModule& m = std::get<NilModule>(d);
    NilModule t = trivial_module(m.field, m.flavor, m.g, m.rank);
    for (std::size_t i = 0; i < m.mats.size(); ++i)
        if (!(m.mats[i] == t.mats[i])) return false;
    return true;
}

}  // namespace

bool module_data_supported(const GroundContext& ctx) {
    if (ctx.field.char_exponent() == 1) return true;
    return ctx.p_rank == ctx.g && ctx.sep_closed;
}

Flavor implied_flavor(const GroundContext& ctx) {
    return ctx.field.char_exponent() == 1 ? Flavor::Additive
                                          : Flavor::MultiplicativeUnipotent;
}

void require_valid(const GroundContext& ctx) {
    if (ctx.g == 0) throw input_error("the dimension g must be at least 1");
    std::uint32_t p = ctx.field.char_exponent();
    if (p == 1) {
        if (ctx.p_rank != 0)
            throw input_error("the p-rank has no meaning in characteristic zero; use 0");
        if (ctx.level.characteristic())
            throw input_error("the level declares a characteristic but the field has none");
    } else {
        if (ctx.p_rank > ctx.g) throw input_error("the p-rank cannot exceed the dimension");
        if (!ctx.level.characteristic() || *ctx.level.characteristic() != p)
            throw input_error("the level must declare the same characteristic as the field");
    }
    if (ctx.sep_closed && ctx.level.group().size() != 1)
        throw input_error(
            "a separably closed ground field leaves no Galois action on the level");
}

bool same_context(const GroundContext& a, const GroundContext& b) {
    return a.g == b.g && a.field == b.field && a.p_rank == b.p_rank &&
           a.sep_closed == b.sep_closed && a.level.orders() == b.level.orders() &&
           a.level.generators() == b.level.generators() &&
           a.level.characteristic() == b.level.characteristic();
}

std::uint64_t data_rank(const BundleData& d) {
    if (data_is_module(d)) return std::get<NilModule>(d).rank;
    return std::get<RankOnly>(d).rank;
}

HomogBundle make_bundle(GroundContext context, std::vector<BundleSummand> summands) {
    require_valid(context);
    std::vector<BundleSummand> work;
    work.reserve(summands.size());
    for (auto& s : summands) {
        if (data_rank(s.data) == 0) continue;
        CharacterOrbit orbit = checked_orbit(context, s.orbit);
        check_data(context, orbit, s.data);
        BundleData data = std::move(s.data);
        // a line is never opaque: at a rational separable orbit in a
        // module-data regime it is the trivial module
        if (!data_is_module(data) && data_rank(data) == 1 && orbit.sep_degree == 1 &&
            orbit.insep_degree == 1 && module_data_supported(context))
            data = trivial_module(context.field, implied_flavor(context), context.g, 1);
        work.push_back(BundleSummand{std::move(orbit), std::move(data)});
    }
    std::stable_sort(work.begin(), work.end(), [](const BundleSummand& a, const BundleSummand& b) {
        return cmp_orbit(a.orbit, b.orbit) < 0;
    });
    std::vector<BundleSummand> merged;
    for (auto& s : work) {
        if (!merged.empty() && cmp_orbit(merged.back().orbit, s.orbit) == 0)
            merged.back().data = merge_data(std::move(merged.back().data), std::move(s.data));
        else
            merged.push_back(std::move(s));
    }
    return HomogBundle{std::move(context), std::move(merged)};
}

HomogBundle irreducible_bundle(const GroundContext& ctx, const CharacterOrbit& orbit) {
    return make_bundle(ctx, {BundleSummand{orbit, RankOnly{1}}});
}

std::uint64_t bundle_rank(const HomogBundle& e) {
    HomogBundle c = canon(e);
    std::uint64_t total = 0;
    for (const auto& s : c.summands) total += orbit_weight(s.orbit) * data_rank(s.data);
    return total;
}

std::vector<BundleBlock> block_decompose(const HomogBundle& e, std::uint64_t seed) {
    HomogBundle c = canon(e);
    std::vector<BundleBlock> blocks;
    blocks.reserve(c.summands.size());
    for (std::size_t i = 0; i < c.summands.size(); ++i) {
        const auto& s = c.summands[i];
        if (data_is_module(s.data)) {
            std::uint64_t block_seed = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
            blocks.push_back(
                BundleBlock{s.orbit, decompose(std::get<NilModule>(s.data), block_seed)});
        } else {
            blocks.push_back(BundleBlock{s.orbit, std::get<RankOnly>(s.data)});
        }
    }
    return blocks;
}

HomogBundle tensor_bundles(const HomogBundle& a, const HomogBundle& b) {
    HomogBundle ca = canon(a);
    HomogBundle cb = canon(b);
    if (!same_context(ca.context, cb.context))
        throw input_error("tensor factors live over different contexts");
    const GroundContext& ctx = ca.context;
    for (const auto& s : ca.summands)
        if (s.orbit.insep_degree != 1)
            throw regime_error("tensor products need separable orbits (q = 1)");
    for (const auto& s : cb.summands)
        if (s.orbit.insep_degree != 1)
            throw regime_error("tensor products need separable orbits (q = 1)");

    const auto& orders = ctx.level.orders();
    std::size_t k = orders.size();
    std::vector<BundleSummand> acc;
    for (const auto& sa : ca.summands)
        for (const auto& sb : cb.summands) {
            // split the product of the two orbits into diagonal orbits
            std::set<std::pair<GPoint, GPoint>> remaining;
            for (const auto& u : sa.orbit.points)
                for (const auto& v : sb.orbit.points) remaining.insert({u, v});
            while (!remaining.empty()) {
                std::set<std::pair<GPoint, GPoint>> po;
                std::vector<std::pair<GPoint, GPoint>> queue{*remaining.begin()};
                po.insert(queue[0]);
                for (std::size_t h = 0; h < queue.size(); ++h)
                    for (const auto& g : ctx.level.generators()) {
                        std::pair<GPoint, GPoint> next{ctx.level.act(g, queue[h].first),
                                                       ctx.level.act(g, queue[h].second)};
                        if (po.insert(next).second) queue.push_back(next);
                    }
                for (const auto& pr : po) remaining.erase(pr);

                GPoint w(k);
                for (std::size_t i = 0; i < k; ++i)
                    w[i] = (queue[0].first[i] + queue[0].second[i]) % orders[i];
                CharacterOrbit target = orbit_of(ctx.level, CharacterPoint{w, 1});
                internal_check(po.size() % target.sep_degree == 0,
                               "product orbit size is not a multiple of the sum orbit size");
                std::uint64_t mult = po.size() / target.sep_degree;

                if (data_is_module(sa.data) && data_is_module(sb.data)) {
                    internal_check(mult == 1 && target.sep_degree == 1,
                                   "module data tensor landed on a non-rational orbit");
                    acc.push_back(BundleSummand{
                        target,
                        tensor(std::get<NilModule>(sa.data), std::get<NilModule>(sb.data))});
                } else {
                    std::uint64_t r = mult * data_rank(sa.data) * data_rank(sb.data);
                    // two trivial factors stay trivial, so when the sum orbit
                    // can carry module data nothing is actually unknown
                    if (data_trivial(sa.data) && data_trivial(sb.data) &&
                        target.sep_degree == 1 && module_data_supported(ctx))
                        acc.push_back(BundleSummand{
                            target, trivial_module(ctx.field, implied_flavor(ctx), ctx.g,
                                                   static_cast<std::size_t>(r))});
                    else
                        acc.push_back(BundleSummand{target, RankOnly{r}});
                }
            }
        }
    HomogBundle out = make_bundle(ctx, std::move(acc));
    internal_check(bundle_rank(out) == bundle_rank(ca) * bundle_rank(cb),
                   "tensor product rank bookkeeping failed");
    return out;
}

HomogBundle dual_bundle(const HomogBundle& e) {
    HomogBundle c = canon(e);
    const auto& orders = c.context.level.orders();
    std::vector<BundleSummand> out;
    out.reserve(c.summands.size());
    for (const auto& s : c.summands) {
        CharacterOrbit neg;
        neg.insep_degree = s.orbit.insep_degree;
        neg.sep_degree = s.orbit.sep_degree;
        for (const auto& p : s.orbit.points) {
            GPoint q(p.size());
            for (std::size_t i = 0; i < p.size(); ++i) q[i] = (orders[i] - p[i]) % orders[i];
            neg.points.push_back(std::move(q));
        }
        std::sort(neg.points.begin(), neg.points.end());
        BundleData data = s.data;
        if (data_is_module(data)) data = dual(std::get<NilModule>(data));
        out.push_back(BundleSummand{std::move(neg), std::move(data)});
    }
    return make_bundle(c.context, std::move(out));
}

std::vector<std::uint64_t> hom_ext_dims(const HomogBundle& a, const HomogBundle& b,
                                        std::size_t max_degree) {
    HomogBundle ca = canon(a);
    HomogBundle cb = canon(b);
    if (!same_context(ca.context, cb.context))
        throw input_error("hom and ext need bundles over the same context");
    const GroundContext& ctx = ca.context;
    bool char_zero = ctx.field.char_exponent() == 1;
    if (max_degree >= 1 && !char_zero)
        throw regime_error(
            "ext dimensions in positive degree are available in characteristic zero only");

    auto residue_module = [&](const BundleSummand& s) -> NilModule {
        if (data_is_module(s.data)) return std::get<NilModule>(s.data);
        if (data_rank(s.data) == 1)
            // a line is trivial over its residue field; model it over the
            // ground field, whose hom and ext dimensions coincide
            return trivial_module(ctx.field, implied_flavor(ctx), ctx.g, 1);
        throw regime_error("hom and ext against an opaque rank-only summand of rank " +
                           std::to_string(data_rank(s.data)) + " are undecidable");
    };

    std::vector<std::uint64_t> dims(max_degree + 1, 0);
    for (const auto& sa : ca.summands)
        for (const auto& sb : cb.summands) {
            if (cmp_orbit(sa.orbit, sb.orbit) != 0) continue;  // blocks do not interact
            NilModule da = residue_module(sa);
            NilModule db = residue_module(sb);
            std::uint64_t scale = orbit_weight(sa.orbit);
            if (char_zero) {
                std::vector<std::size_t> res = ext_dims(da, db, max_degree);
                for (std::size_t i = 0; i <= max_degree; ++i) dims[i] += scale * res[i];
            } else {
                dims[0] += scale * hom_dim(da, db);
            }
        }
    return dims;
}

Classification classify(const HomogBundle& e) {
    HomogBundle c = canon(e);
    Classification out;
    out.semisimple = true;
    out.unipotent = true;
    out.essentially_finite = true;
    out.witness_exponent = 1;
    for (const auto& s : c.summands) {
        if (!data_trivial(s.data)) out.semisimple = false;
        for (const auto& p : s.orbit.points) {
            bool zero = std::all_of(p.begin(), p.end(), [](std::uint64_t x) { return x == 0; });
            if (!zero) out.unipotent = false;
            out.witness_exponent =
                lcm_u64(out.witness_exponent, point_order(p, c.context.level.orders()));
        }
    }
    out.irreducible = c.summands.size() == 1 && data_rank(c.summands[0].data) == 1;
    return out;
}

bool block_semisimplicity_test(std::optional<std::uint64_t> u_order, std::uint64_t k_deg,
                               std::uint64_t l_deg) {
    if (k_deg == 0 || l_deg == 0) throw input_error("field degrees must be positive");
    if (k_deg % l_deg != 0)
        throw input_error("the separable degree must divide the full degree");
    return u_order.has_value() && *u_order == k_deg / l_deg;
}

}  // namespace hvb
