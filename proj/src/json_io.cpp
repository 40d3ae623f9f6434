#include "hvb/json_io.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hvb/errors.hpp"

namespace hvb {

namespace {

const Json& need(const Json& j, const char* key) {
    if (!j.is_object()) throw input_error(std::string("expected an object holding '") + key + "'");
    auto it = j.find(key);
    if (it == j.end()) throw input_error(std::string("missing key '") + key + "'");
    return *it;
}

std::uint64_t as_u64(const Json& j, const char* what) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) {
        auto v = j.get<std::int64_t>();
        if (v >= 0) return static_cast<std::uint64_t>(v);
    }
    throw input_error(std::string(what) + " must be a nonnegative integer");
}

std::int64_t as_i64(const Json& j, const char* what) {
    if (j.is_number_integer() || j.is_number_unsigned()) {
        if (j.is_number_unsigned() && j.get<std::uint64_t>() > std::uint64_t(INT64_MAX))
            throw input_error(std::string(what) + " is too large");
        return j.get<std::int64_t>();
    }
    throw input_error(std::string(what) + " must be an integer");
}

bool as_bool(const Json& j, const char* what) {
    if (!j.is_boolean()) throw input_error(std::string(what) + " must be a boolean");
    return j.get<bool>();
}

std::string as_str(const Json& j, const char* what) {
    if (!j.is_string()) throw input_error(std::string(what) + " must be a string");
    return j.get<std::string>();
}

const Json& as_array(const Json& j, const char* what) {
    if (!j.is_array()) throw input_error(std::string(what) + " must be an array");
    return j;
}

std::vector<std::uint64_t> u64_list(const Json& j, const char* what) {
    std::vector<std::uint64_t> out;
    for (const auto& v : as_array(j, what)) out.push_back(as_u64(v, what));
    return out;
}

}  // namespace

Json parse_envelope(const std::string& text) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw input_error("input is not valid JSON");
    if (!j.is_object()) throw input_error("the top level must be an object with a version field");
    auto it = j.find("v");
    if (it == j.end()) throw input_error("missing schema version field 'v'");
    if (!it->is_number_integer() && !it->is_number_unsigned())
        throw input_error("schema version must be an integer");
    if (as_u64(*it, "schema version") != kSchemaVersion)
        throw input_error("unsupported schema version " + it->dump() + " (this tool reads v" +
                          std::to_string(kSchemaVersion) + ")");
    return j;
}

std::string dump_canonical(const Json& j) { return j.dump(2) + "\n"; }

PayloadKind payload_kind(const Json& j) {
    if (!j.is_object()) throw input_error("the payload must be an object");
    if (j.contains("mats")) return PayloadKind::Module;
    if (j.contains("summands")) return PayloadKind::Bundle;
    if (j.contains("dual_map")) return PayloadKind::Isogeny;
    if (j.contains("orders")) return PayloadKind::Level;
    throw input_error(
        "cannot tell what the file describes: expected one of the keys "
        "'mats' (module), 'summands' (bundle), 'dual_map' (isogeny), 'orders' (level)");
}

Json elem_to_json(const Field& f, const Elem& e) {
    if (f.is_rational()) {
        const auto& q = std::get<mpq_class>(e);
        if (q.get_den() == 1 && mpz_fits_slong_p(q.get_num().get_mpz_t()))
            return Json(static_cast<std::int64_t>(q.get_num().get_si()));
        return Json(q.get_str());
    }
    const auto& v = std::get<GFVec>(e);
    Json out = Json::array();
    for (auto c : v) out.push_back(c);
    return out;
}

Elem elem_from_json(const Field& f, const Json& j) {
    if (f.is_rational()) {
        if (j.is_number_integer() || j.is_number_unsigned()) {
            if (j.is_number_unsigned() && j.get<std::uint64_t>() > std::uint64_t(INT64_MAX))
                return f.from_rational(mpq_class(j.dump()));
            return f.from_int(static_cast<long>(j.get<std::int64_t>()));
        }
        if (j.is_string()) {
            mpq_class q;
            try {
                q = mpq_class(j.get<std::string>());
            } catch (const std::invalid_argument&) {
                throw input_error("'" + j.get<std::string>() + "' is not a rational number");
            }
            if (q.get_den() == 0) throw input_error("a rational cannot have denominator zero");
            q.canonicalize();
            return f.from_rational(q);
        }
        throw input_error("a rational entry must be an integer or an \"a/b\" string");
    }
    GFVec v;
    for (const auto& c : as_array(j, "a finite field entry"))
        v.push_back(static_cast<std::uint32_t>(as_u64(c, "a finite field coefficient")));
    return f.from_coeffs(v);
}

Json to_json(const FieldSpec& s) {
    Json j;
    if (s.kind == FieldKind::Rational) {
        j["kind"] = "Q";
        return j;
    }
    j["kind"] = "GF";
    j["p"] = s.p;
    j["m"] = s.m;
    if (!s.modulus.empty()) {
        Json mod = Json::array();
        for (auto c : s.modulus) mod.push_back(c);
        j["modulus"] = mod;
    }
    return j;
}

FieldSpec field_spec_from_json(const Json& j) {
    std::string kind = as_str(need(j, "kind"), "field kind");
    if (kind == "Q") return FieldSpec{};
    if (kind != "GF") throw input_error("unknown field kind '" + kind + "' (expected Q or GF)");
    FieldSpec s;
    s.kind = FieldKind::Finite;
    s.p = static_cast<std::uint32_t>(as_u64(need(j, "p"), "field characteristic"));
    s.m = j.contains("m") ? static_cast<std::uint32_t>(as_u64(j.at("m"), "extension degree")) : 1;
    if (j.contains("modulus"))
        for (const auto& c : as_array(j.at("modulus"), "field modulus"))
            s.modulus.push_back(static_cast<std::uint32_t>(as_u64(c, "a modulus coefficient")));
    return s;
}

Json matrix_to_json(const ExactMatrix& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(elem_to_json(m.field(), m.at(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

ExactMatrix matrix_from_json(const Field& f, const Json& j) {
    const Json& rows = as_array(j, "a matrix");
    std::size_t r = rows.size();
    std::size_t c = r == 0 ? 0 : as_array(rows[0], "a matrix row").size();
    ExactMatrix m(f, r, c);
    for (std::size_t i = 0; i < r; ++i) {
        const Json& row = as_array(rows[i], "a matrix row");
        if (row.size() != c) throw input_error("matrix rows have uneven lengths");
        for (std::size_t k = 0; k < c; ++k) m.set(i, k, elem_from_json(f, row[k]));
    }
    return m;
}

Json to_json(const NilModule& m) {
    Json j;
    j["field"] = to_json(m.field.spec());
    j["flavor"] = m.flavor == Flavor::Additive ? "additive" : "unipotent";
    j["g"] = m.g;
    j["rank"] = m.rank;
    Json mats = Json::array();
    for (const auto& x : m.mats) mats.push_back(matrix_to_json(x));
    j["mats"] = mats;
    return j;
}

NilModule nilmodule_from_json(const Json& j) {
    Field f = Field::from_spec(field_spec_from_json(need(j, "field")));
    std::string fl = as_str(need(j, "flavor"), "flavor");
    Flavor flavor;
    if (fl == "additive")
        flavor = Flavor::Additive;
    else if (fl == "unipotent")
        flavor = Flavor::MultiplicativeUnipotent;
    else
        throw input_error("unknown flavor '" + fl + "' (expected additive or unipotent)");
    std::size_t g = static_cast<std::size_t>(as_u64(need(j, "g"), "g"));
    std::size_t rank = static_cast<std::size_t>(as_u64(need(j, "rank"), "rank"));
    std::vector<ExactMatrix> mats;
    for (const auto& x : as_array(need(j, "mats"), "mats")) mats.push_back(matrix_from_json(f, x));
    return NilModule{std::move(f), flavor, g, rank, std::move(mats)};
}

Json to_json(const GaloisModule& m) {
    Json j;
    Json orders = Json::array();
    for (auto n : m.orders()) orders.push_back(n);
    j["orders"] = orders;
    Json gamma = Json::array();
    for (const auto& gen : m.generators()) {
        Json mat = Json::array();
        for (const auto& row : gen) {
            Json r = Json::array();
            for (auto v : row) r.push_back(v);
            mat.push_back(std::move(r));
        }
        gamma.push_back(std::move(mat));
    }
    j["gamma"] = gamma;
    j["p"] = m.characteristic() ? Json(*m.characteristic()) : Json(nullptr);
    return j;
}

GaloisModule galois_from_json(const Json& j) {
    auto orders = u64_list(need(j, "orders"), "orders");
    std::vector<IntMat> gens;
    if (j.contains("gamma"))
        for (const auto& mat : as_array(j.at("gamma"), "gamma")) {
            IntMat g;
            for (const auto& row : as_array(mat, "a gamma matrix")) {
                std::vector<long long> r;
                for (const auto& v : as_array(row, "a gamma matrix row"))
                    r.push_back(as_i64(v, "a gamma entry"));
                g.push_back(std::move(r));
            }
            gens.push_back(std::move(g));
        }
    std::optional<std::uint32_t> p;
    if (j.contains("p") && !j.at("p").is_null())
        p = static_cast<std::uint32_t>(as_u64(j.at("p"), "level characteristic"));
    return GaloisModule(std::move(orders), std::move(gens), p);
}

Json to_json(const CharacterPoint& x) {
    Json j;
    Json coords = Json::array();
    for (auto c : x.coords) coords.push_back(c);
    j["coords"] = coords;
    j["q"] = x.insep_degree;
    return j;
}

CharacterPoint character_point_from_json(const Json& j) {
    CharacterPoint x{u64_list(need(j, "coords"), "coords"), 1};
    if (j.contains("q")) x.insep_degree = as_u64(j.at("q"), "q");
    return x;
}

Json to_json(const CharacterOrbit& o) {
    Json j;
    Json pts = Json::array();
    for (const auto& p : o.points) {
        Json c = Json::array();
        for (auto v : p) c.push_back(v);
        pts.push_back(std::move(c));
    }
    j["points"] = pts;
    j["q"] = o.insep_degree;
    return j;
}

CharacterOrbit orbit_from_json(const Json& j) {
    CharacterOrbit o;
    for (const auto& p : as_array(need(j, "points"), "orbit points"))
        o.points.push_back(u64_list(p, "an orbit point"));
    o.sep_degree = o.points.size();
    o.insep_degree = j.contains("q") ? as_u64(j.at("q"), "q") : 1;
    return o;
}

Json to_json(const GroundContext& ctx) {
    Json j;
    j["g"] = ctx.g;
    j["field"] = to_json(ctx.field.spec());
    j["p_rank"] = ctx.p_rank;
    j["sep_closed"] = ctx.sep_closed;
    j["level"] = to_json(ctx.level);
    return j;
}

GroundContext context_from_json(const Json& j) {
    return GroundContext{
        static_cast<std::size_t>(as_u64(need(j, "g"), "g")),
        Field::from_spec(field_spec_from_json(need(j, "field"))),
        static_cast<std::size_t>(as_u64(need(j, "p_rank"), "p_rank")),
        as_bool(need(j, "sep_closed"), "sep_closed"),
        galois_from_json(need(j, "level"))};
}

Json to_json(const HomogBundle& e) {
    Json j;
    j["context"] = to_json(e.context);
    Json ss = Json::array();
    for (const auto& s : e.summands) {
        Json one;
        one["orbit"] = to_json(s.orbit);
        Json data;
        if (const auto* m = std::get_if<NilModule>(&s.data))
            data["module"] = to_json(*m);
        else
            data["rank_only"] = std::get<RankOnly>(s.data).rank;
        one["data"] = data;
        ss.push_back(std::move(one));
    }
    j["summands"] = ss;
    return j;
}

HomogBundle bundle_from_json(const Json& j) {
    GroundContext ctx = context_from_json(need(j, "context"));
    std::vector<BundleSummand> ss;
    for (const auto& s : as_array(need(j, "summands"), "summands")) {
        CharacterOrbit orbit = orbit_from_json(need(s, "orbit"));
        const Json& data = need(s, "data");
        bool has_module = data.contains("module");
        bool has_rank = data.contains("rank_only");
        if (has_module == has_rank)
            throw input_error("summand data must carry exactly one of 'module' or 'rank_only'");
        if (has_module)
            ss.push_back({std::move(orbit), nilmodule_from_json(data.at("module"))});
        else
            ss.push_back({std::move(orbit), RankOnly{as_u64(data.at("rank_only"), "rank_only")}});
    }
    return make_bundle(std::move(ctx), std::move(ss));
}

Json to_json(const IsogenyData& iso) {
    Json j;
    j["src"] = to_json(iso.src_ctx);
    j["dst"] = to_json(iso.dst_ctx);
    Json f = Json::array();
    for (const auto& row : iso.dual_map) {
        Json r = Json::array();
        for (auto v : row) r.push_back(v);
        f.push_back(std::move(r));
    }
    j["dual_map"] = f;
    j["mult_kernel_order"] = iso.mult_kernel_order;
    Json uf = Json::array();
    for (auto v : iso.unip_etale_factors) uf.push_back(v);
    j["unip_etale_factors"] = uf;
    j["infinitesimal_order"] = iso.infinitesimal_order;
    return j;
}

IsogenyData isogeny_from_json(const Json& j) {
    IntMat f;
    for (const auto& row : as_array(need(j, "dual_map"), "dual_map")) {
        std::vector<long long> r;
        for (const auto& v : as_array(row, "a dual_map row"))
            r.push_back(as_i64(v, "a dual_map entry"));
        f.push_back(std::move(r));
    }
    std::uint64_t mult = j.contains("mult_kernel_order")
                             ? as_u64(j.at("mult_kernel_order"), "mult_kernel_order")
                             : 1;
    std::vector<std::uint64_t> uf;
    if (j.contains("unip_etale_factors"))
        uf = u64_list(j.at("unip_etale_factors"), "unip_etale_factors");
    std::uint64_t inf = j.contains("infinitesimal_order")
                            ? as_u64(j.at("infinitesimal_order"), "infinitesimal_order")
                            : 1;
    return IsogenyData{context_from_json(need(j, "src")), context_from_json(need(j, "dst")),
                       std::move(f), mult, std::move(uf), inf};
}

Json to_json(const DecompositionReport& r) {
    Json j;
    Json ss = Json::array();
    for (const auto& s : r.summands) {
        Json one;
        one["module"] = to_json(s.module);
        one["multiplicity"] = s.multiplicity;
        one["certified"] = s.certified;
        ss.push_back(std::move(one));
    }
    j["summands"] = ss;
    j["basechange"] = matrix_to_json(r.basechange);
    j["certified"] = r.certified;
    return j;
}

Json to_json(const BundleBlock& b) {
    Json j;
    j["orbit"] = to_json(b.orbit);
    if (const auto* rep = std::get_if<DecompositionReport>(&b.content))
        j["report"] = to_json(*rep);
    else
        j["rank_only"] = std::get<RankOnly>(b.content).rank;
    return j;
}

Json to_json(const PushforwardReport& r) {
    Json j;
    j["context"] = to_json(r.context);
    Json blocks = Json::array();
    for (const auto& b : r.blocks) {
        Json one;
        one["orbit"] = to_json(b.orbit);
        one["rank"] = b.rank;
        one["indecomposable"] = b.indecomposable;
        if (b.module) one["module"] = to_json(*b.module);
        blocks.push_back(std::move(one));
    }
    j["blocks"] = blocks;
    j["block_count"] = r.block_count;
    j["total_rank"] = r.total_rank;
    j["truncated"] = r.truncated;
    return j;
}

Json to_json(const Classification& c) {
    Json j;
    j["semisimple"] = c.semisimple;
    j["unipotent"] = c.unipotent;
    j["essentially_finite"] = c.essentially_finite;
    j["witness_exponent"] = c.witness_exponent;
    j["irreducible"] = c.irreducible;
    return j;
}

}  // namespace hvb
