// Batch front-end for the homogeneous bundle library.  Reads JSON object
// descriptions, dispatches to the library, and prints either canonical JSON
// (default) or a space-padded table.  Exit codes: 0 success, 1 invalid
// input, 2 unsupported regime.  Diagnostics go to stderr, payload to stdout.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "hvb/bundle.hpp"
#include "hvb/errors.hpp"
#include "hvb/galois.hpp"
#include "hvb/isogeny.hpp"
#include "hvb/json_io.hpp"
#include "hvb/nilmod.hpp"

namespace {

using namespace hvb;

bool g_stdin_used = false;

std::string read_input(const std::string& path) {
    if (path == "-") {
        if (g_stdin_used) throw input_error("stdin can be read for at most one input");
        g_stdin_used = true;
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw input_error("cannot read input file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Json load_json(const std::string& path) { return parse_envelope(read_input(path)); }

void emit(const Json& j) { std::cout << dump_canonical(j); }

Json stamped(Json j) {
    j["v"] = kSchemaVersion;
    return j;
}

std::uint64_t level_exponent(const GaloisModule& m) {
    std::uint64_t e = 1;
    for (std::uint64_t o : m.orders()) e = std::lcm(e, o);
    return e;
}

// --level asserts the working torsion level; any input whose declared level
// exponent does not divide it is refused rather than silently extended.
void check_working_level(const GaloisModule& m, std::uint64_t requested) {
    if (requested == 0) return;
    std::uint64_t e = level_exponent(m);
    if (e == 0 || requested % e != 0)
        throw input_error("declared torsion level has exponent " + std::to_string(e) +
                          ", which does not divide the requested working level " +
                          std::to_string(requested));
}

std::string point_str(const GPoint& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(x[i]);
    }
    return s + ")";
}

std::string orbit_label(const CharacterOrbit& o) {
    std::string s = "{";
    for (std::size_t i = 0; i < o.points.size(); ++i) {
        if (i) s += ",";
        s += point_str(o.points[i]);
    }
    s += "}";
    if (o.insep_degree > 1) s += " q=" + std::to_string(o.insep_degree);
    return s;
}

std::string field_str(const FieldSpec& s) {
    if (s.kind == FieldKind::Rational) return "Q";
    if (s.m == 1) return "GF(" + std::to_string(s.p) + ")";
    return "GF(" + std::to_string(s.p) + "^" + std::to_string(s.m) + ")";
}

void print_table(const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c)
            if (r[c].size() > width[c]) width[c] = r[c].size();
    auto line = [&](const std::vector<std::string>& r) {
        std::string out;
        for (std::size_t c = 0; c < r.size(); ++c) {
            out += r[c];
            if (c + 1 < r.size()) out += std::string(width[c] - r[c].size() + 2, ' ');
        }
        std::cout << out << "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
}

const std::vector<std::string> kBlockHeader = {"orbit", "rank", "indecomposable", "loewy"};

void module_table(const NilModule& m) {
    std::cout << "field: " << field_str(m.field.spec()) << "\n";
    std::cout << "flavor: " << (m.flavor == Flavor::Additive ? "additive" : "unipotent") << "\n";
    std::cout << "g: " << m.g << "\n";
    std::cout << "rank: " << m.rank << "\n";
    if (m.rank > 0) std::cout << "loewy: " << loewy_length(m) << "\n";
}

void bundle_table(const HomogBundle& e) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : e.summands) {
        std::uint64_t w = s.orbit.sep_degree * s.orbit.insep_degree;
        const NilModule* nm = std::get_if<NilModule>(&s.data);
        rows.push_back({orbit_label(s.orbit), std::to_string(w * data_rank(s.data)),
                        nm && nm->rank == 1 ? "yes" : "-",
                        nm ? std::to_string(loewy_length(*nm)) : "-"});
    }
    print_table(kBlockHeader, rows);
    std::cout << "total_rank: " << bundle_rank(e) << "\n";
}

void report_table(const PushforwardReport& rep) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& b : rep.blocks)
        rows.push_back({orbit_label(b.orbit), std::to_string(b.rank),
                        b.indecomposable ? "yes" : "-",
                        b.module ? std::to_string(loewy_length(*b.module)) : "-"});
    print_table(kBlockHeader, rows);
    std::cout << "block_count: " << rep.block_count << "\n";
    std::cout << "total_rank: " << rep.total_rank << "\n";
    if (rep.truncated) std::cout << "truncated: yes (listing capped)\n";
}

void blocks_table(const std::vector<BundleBlock>& blocks) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& b : blocks) {
        std::uint64_t w = b.orbit.sep_degree * b.orbit.insep_degree;
        if (const auto* rep = std::get_if<DecompositionReport>(&b.content)) {
            std::uint64_t residue = 0;
            std::size_t loewy = 0;
            for (const auto& s : rep->summands) {
                residue += static_cast<std::uint64_t>(s.multiplicity) * s.module.rank;
                loewy = std::max(loewy, loewy_length(s.module));
            }
            bool single = rep->summands.size() == 1 && rep->summands[0].multiplicity == 1 &&
                          rep->summands[0].certified;
            rows.push_back({orbit_label(b.orbit), std::to_string(w * residue),
                            single ? "yes" : "-", std::to_string(loewy)});
        } else {
            std::uint64_t r = std::get<RankOnly>(b.content).rank;
            rows.push_back({orbit_label(b.orbit), std::to_string(w * r),
                            r == 1 ? "yes" : "-", r == 1 ? "1" : "-"});
        }
    }
    print_table(kBlockHeader, rows);
}

void decomposition_table(const DecompositionReport& rep) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : rep.summands)
        rows.push_back({std::to_string(s.module.rank), std::to_string(s.multiplicity),
                        std::to_string(loewy_length(s.module)), s.certified ? "yes" : "no"});
    print_table({"rank", "multiplicity", "loewy", "certified"}, rows);
    std::cout << "certified: " << (rep.certified ? "yes" : "no") << "\n";
}

void classification_table(const Classification& c) {
    std::cout << "semisimple: " << (c.semisimple ? "yes" : "no") << "\n";
    std::cout << "unipotent: " << (c.unipotent ? "yes" : "no") << "\n";
    std::cout << "essentially_finite: " << (c.essentially_finite ? "yes" : "no") << "\n";
    std::cout << "witness_exponent: " << c.witness_exponent << "\n";
    std::cout << "irreducible: " << (c.irreducible ? "yes" : "no") << "\n";
}

std::vector<std::uint64_t> parse_csv(const std::string& s, const char* what) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &pos);
        } catch (...) {
            pos = 0;
        }
        if (item.empty() || pos != item.size())
            throw input_error(std::string(what) + ": '" + item +
                              "' is not a nonnegative integer");
        out.push_back(v);
    }
    return out;
}

std::string kind_str(PayloadKind k) {
    switch (k) {
        case PayloadKind::Module: return "module";
        case PayloadKind::Bundle: return "bundle";
        case PayloadKind::Isogeny: return "isogeny";
        case PayloadKind::Level: return "level";
    }
    return "unknown";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"homogeneous vector bundles on abelian varieties, by the numbers"};
    app.require_subcommand(1);

    std::string format = "json";
    std::uint64_t seed = 0;
    std::uint64_t working_level = 0;
    std::uint64_t max_degree = 0;
    bool max_degree_set = false;
    std::vector<std::string> files;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"json", "table"}));
        sub->add_option("--seed", seed, "seed for randomized searches (default 0)");
        sub->add_option("--level", working_level,
                        "assert the working torsion level; inputs whose level exponent does "
                        "not divide it are rejected");
        return sub;
    };
    auto with_files = [&](CLI::App* sub, int n, const char* what) {
        sub->add_option("inputs", files, what)->expected(n);
        return add_common(sub);
    };

    auto* c_validate = with_files(app.add_subcommand("validate", "check a file and list violations"), 1, "file to check");
    auto* c_sum = with_files(app.add_subcommand("sum", "direct sum of two modules or two bundles"), 2, "two module or two bundle files");
    auto* c_tensor = with_files(app.add_subcommand("tensor", "tensor product"), 2, "two module or two bundle files");
    auto* c_dual = with_files(app.add_subcommand("dual", "dual object"), 1, "module or bundle file");
    auto* c_hom = with_files(app.add_subcommand("hom", "dimension of the hom space"), 2, "two module or two bundle files");
    auto* c_ext = with_files(app.add_subcommand("ext", "ext dimensions up to --max-degree"), 2, "two module or two bundle files");
    c_ext->add_option("--max-degree", max_degree, "highest ext degree (default g)")
        ->capture_default_str();
    c_ext->callback([&] { max_degree_set = c_ext->count("--max-degree") > 0; });
    auto* c_decompose = with_files(app.add_subcommand("decompose", "Krull-Schmidt decomposition of a module"), 1, "module file");
    auto* c_blocks = with_files(app.add_subcommand("blocks", "per-orbit block decomposition of a bundle"), 1, "bundle file");
    auto* c_classify = with_files(app.add_subcommand("classify", "semisimplicity and friends"), 1, "bundle file");
    auto* c_pullback = with_files(app.add_subcommand("pullback", "pull a bundle back along an isogeny"), 2, "isogeny file, then bundle file");
    auto* c_pushforward = with_files(app.add_subcommand("pushforward", "push a bundle forward along an isogeny"), 2, "isogeny file, then bundle file");
    auto* c_factor = with_files(app.add_subcommand("factor", "split an isogeny into multiplicative and unipotent halves"), 1, "isogeny file");

    auto* c_frobenius = add_common(app.add_subcommand("frobenius", "push a line bundle through the n-th Frobenius"));
    std::uint64_t fr_g = 1, fr_r = 0, fr_p = 0, fr_n = 1;
    std::string fr_l, fr_orders;
    c_frobenius->add_option("--g", fr_g, "dimension of the variety")->required();
    c_frobenius->add_option("--r", fr_r, "p-rank")->required();
    c_frobenius->add_option("--p", fr_p, "characteristic")->required();
    c_frobenius->add_option("--n", fr_n, "Frobenius power (default 1)");
    c_frobenius->add_option("--l", fr_l,
                            "rational point twisting the line bundle, comma separated");
    c_frobenius->add_option("--orders", fr_orders, "torsion level orders, comma separated");

    auto* c_orbit = with_files(app.add_subcommand("orbit", "Galois orbit of a character point"), 1, "level file");
    std::string orbit_point;
    std::uint64_t orbit_q = 1;
    c_orbit->add_option("--point", orbit_point, "character coordinates, comma separated")
        ->required();
    c_orbit->add_option("--q", orbit_q, "inseparable degree riding along (default 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    bool table = false;

    // Two-input verbs act on whatever both files turn out to be, as long as
    // the kinds agree.
    auto load_pair = [&](PayloadKind& kind) {
        Json a = load_json(files[0]);
        Json b = load_json(files[1]);
        kind = payload_kind(a);
        if (payload_kind(b) != kind)
            throw input_error("inputs must be two modules or two bundles, not a mixture");
        return std::make_pair(a, b);
    };
    auto module_pair = [&](const Json& a, const Json& b) {
        NilModule ma = nilmodule_from_json(a);
        NilModule mb = nilmodule_from_json(b);
        require_valid(ma);
        require_valid(mb);
        return std::make_pair(ma, mb);
    };
    auto bundle_pair = [&](const Json& a, const Json& b) {
        HomogBundle ea = bundle_from_json(a);
        HomogBundle eb = bundle_from_json(b);
        check_working_level(ea.context.level, working_level);
        check_working_level(eb.context.level, working_level);
        return std::make_pair(ea, eb);
    };
    auto emit_module = [&](const NilModule& m) {
        if (table)
            module_table(m);
        else
            emit(stamped(to_json(m)));
    };
    auto emit_bundle = [&](const HomogBundle& e) {
        if (table)
            bundle_table(e);
        else
            emit(stamped(to_json(e)));
    };
    auto load_isogeny = [&](const std::string& path) {
        IsogenyData iso = isogeny_from_json(load_json(path));
        require_valid(iso);
        check_working_level(iso.src_ctx.level, working_level);
        check_working_level(iso.dst_ctx.level, working_level);
        return iso;
    };

    try {
        table = format == "table";

        if (c_validate->parsed()) {
            Json j = load_json(files[0]);
            PayloadKind kind = payload_kind(j);
            std::vector<std::string> violations;
            try {
                switch (kind) {
                    case PayloadKind::Module: {
                        NilModule m = nilmodule_from_json(j);
                        violations = validate(m);
                        break;
                    }
                    case PayloadKind::Bundle:
                        bundle_from_json(j);  // make_bundle throws on any defect
                        break;
                    case PayloadKind::Isogeny: {
                        IsogenyData iso = isogeny_from_json(j);
                        violations = validate(iso);
                        break;
                    }
                    case PayloadKind::Level:
                        galois_from_json(j);  // the constructor checks everything
                        break;
                }
            } catch (const input_error& e) {
                violations.push_back(e.what());
            }
            if (table) {
                std::cout << "kind: " << kind_str(kind) << "\n";
                std::cout << "valid: " << (violations.empty() ? "yes" : "no") << "\n";
                for (const auto& v : violations) std::cout << "- " << v << "\n";
            } else {
                emit(stamped(Json{{"kind", kind_str(kind)},
                                  {"valid", violations.empty()},
                                  {"violations", violations}}));
            }
            return 0;
        }

        if (c_sum->parsed() || c_tensor->parsed()) {
            bool is_sum = c_sum->parsed();
            PayloadKind kind;
            auto [a, b] = load_pair(kind);
            if (kind == PayloadKind::Module) {
                auto [ma, mb] = module_pair(a, b);
                emit_module(is_sum ? direct_sum(ma, mb) : tensor(ma, mb));
            } else if (kind == PayloadKind::Bundle) {
                auto [ea, eb] = bundle_pair(a, b);
                if (is_sum) {
                    if (!same_context(ea.context, eb.context))
                        throw input_error("bundle sum needs both bundles over the same context");
                    std::vector<BundleSummand> all = ea.summands;
                    all.insert(all.end(), eb.summands.begin(), eb.summands.end());
                    emit_bundle(make_bundle(ea.context, std::move(all)));
                } else {
                    emit_bundle(tensor_bundles(ea, eb));
                }
            } else {
                throw input_error("sum and tensor read module or bundle files");
            }
            return 0;
        }

        if (c_dual->parsed()) {
            Json j = load_json(files[0]);
            PayloadKind kind = payload_kind(j);
            if (kind == PayloadKind::Module) {
                NilModule m = nilmodule_from_json(j);
                require_valid(m);
                emit_module(dual(m));
            } else if (kind == PayloadKind::Bundle) {
                HomogBundle e = bundle_from_json(j);
                check_working_level(e.context.level, working_level);
                emit_bundle(dual_bundle(e));
            } else {
                throw input_error("dual reads a module or bundle file");
            }
            return 0;
        }

        if (c_hom->parsed() || c_ext->parsed()) {
            bool is_hom = c_hom->parsed();
            PayloadKind kind;
            auto [a, b] = load_pair(kind);
            Json out;
            if (kind == PayloadKind::Module) {
                auto [ma, mb] = module_pair(a, b);
                if (is_hom)
                    out = Json(hom_dim(ma, mb));
                else
                    out = Json(ext_dims(ma, mb, max_degree_set ? max_degree : ma.g));
            } else if (kind == PayloadKind::Bundle) {
                auto [ea, eb] = bundle_pair(a, b);
                std::uint64_t top = is_hom ? 0 : (max_degree_set ? max_degree : ea.context.g);
                auto dims = hom_ext_dims(ea, eb, top);
                out = is_hom ? Json(dims[0]) : Json(dims);
            } else {
                throw input_error("hom and ext read module or bundle files");
            }
            if (table) {
                std::string line;
                if (out.is_array())
                    for (const auto& d : out) line += (line.empty() ? "" : " ") + d.dump();
                else
                    line = out.dump();
                std::cout << line << "\n";
            } else {
                emit(out);
            }
            return 0;
        }

        if (c_decompose->parsed()) {
            Json j = load_json(files[0]);
            if (payload_kind(j) != PayloadKind::Module)
                throw input_error(
                    "decompose reads a module file; for bundles use the blocks verb");
            NilModule m = nilmodule_from_json(j);
            require_valid(m);
            DecompositionReport rep = decompose(m, seed);
            if (table)
                decomposition_table(rep);
            else
                emit(stamped(to_json(rep)));
            return 0;
        }

        if (c_blocks->parsed()) {
            Json j = load_json(files[0]);
            if (payload_kind(j) != PayloadKind::Bundle)
                throw input_error("blocks reads a bundle file");
            HomogBundle e = bundle_from_json(j);
            check_working_level(e.context.level, working_level);
            auto blocks = block_decompose(e, seed);
            if (table) {
                blocks_table(blocks);
            } else {
                Json out = Json::array();
                for (const auto& b : blocks) out.push_back(to_json(b));
                emit(out);
            }
            return 0;
        }

        if (c_classify->parsed()) {
            Json j = load_json(files[0]);
            if (payload_kind(j) != PayloadKind::Bundle)
                throw input_error("classify reads a bundle file");
            HomogBundle e = bundle_from_json(j);
            check_working_level(e.context.level, working_level);
            Classification c = classify(e);
            if (table)
                classification_table(c);
            else
                emit(stamped(to_json(c)));
            return 0;
        }

        if (c_pullback->parsed()) {
            IsogenyData iso = load_isogeny(files[0]);
            HomogBundle f = bundle_from_json(load_json(files[1]));
            emit_bundle(pullback(iso, f));
            return 0;
        }

        if (c_pushforward->parsed()) {
            IsogenyData iso = load_isogeny(files[0]);
            HomogBundle e = bundle_from_json(load_json(files[1]));
            PushforwardReport rep = pushforward(iso, e);
            if (table)
                report_table(rep);
            else
                emit(stamped(to_json(rep)));
            return 0;
        }

        if (c_factor->parsed()) {
            IsogenyData iso = load_isogeny(files[0]);
            auto [m, u] = factor_isogeny(iso);
            if (table) {
                print_table({"half", "degree", "mult_kernel", "unip_factors", "infinitesimal"},
                            {{"mult", std::to_string(isogeny_degree(m)),
                              std::to_string(m.mult_kernel_order), "-", "1"},
                             {"unip", std::to_string(isogeny_degree(u)), "1",
                              [&] {
                                  std::string s;
                                  for (auto f : u.unip_etale_factors)
                                      s += (s.empty() ? "" : ",") + std::to_string(f);
                                  return s.empty() ? std::string("-") : s;
                              }(),
                              std::to_string(u.infinitesimal_order)}});
            } else {
                emit(stamped(Json{{"mult", to_json(m)}, {"unip", to_json(u)}}));
            }
            return 0;
        }

        if (c_frobenius->parsed()) {
            if (fr_p == 0 || fr_p > 0xffffffffULL)
                throw input_error("--p must be a positive prime below 2^32");
            std::vector<std::uint64_t> orders = parse_csv(fr_orders, "--orders");
            if (orders.empty()) {
                // default level: one p-power coordinate per unit of p-rank,
                // just enough p^n-torsion for the requested power
                std::uint64_t o = 1;
                for (std::uint64_t i = 0; i < std::max<std::uint64_t>(fr_n, 1); ++i) o *= fr_p;
                orders.assign(fr_r, o);
                if (orders.empty()) orders = {1};
            }
            GroundContext ctx{static_cast<std::size_t>(fr_g),
                              Field::finite(static_cast<std::uint32_t>(fr_p)),
                              static_cast<std::size_t>(fr_r), true,
                              GaloisModule(orders, {}, static_cast<std::uint32_t>(fr_p))};
            check_working_level(ctx.level, working_level);
            std::optional<CharacterPoint> l;
            if (!fr_l.empty()) l = CharacterPoint{parse_csv(fr_l, "--l"), 1};
            PushforwardReport rep =
                frobenius_pushforward(ctx, static_cast<std::uint32_t>(fr_n), l);
            if (table)
                report_table(rep);
            else
                emit(stamped(to_json(rep)));
            return 0;
        }

        if (c_orbit->parsed()) {
            Json j = load_json(files[0]);
            if (payload_kind(j) != PayloadKind::Level)
                throw input_error("orbit reads a level file (orders and gamma)");
            GaloisModule level = galois_from_json(j);
            check_working_level(level, working_level);
            CharacterOrbit o =
                orbit_of(level, CharacterPoint{parse_csv(orbit_point, "--point"), orbit_q});
            if (table) {
                std::string pts;
                for (const auto& x : o.points) pts += (pts.empty() ? "" : " ") + point_str(x);
                std::cout << "points: " << pts << "\n";
                std::cout << "sep_degree: " << o.sep_degree << "\n";
                std::cout << "q: " << o.insep_degree << "\n";
            } else {
                emit(stamped(to_json(o)));
            }
            return 0;
        }

        throw input_error("no verb selected");
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const regime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const inconclusive_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
