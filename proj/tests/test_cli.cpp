// Drives the installed binary end to end.  The test runner passes the
// binary's path as the last command line argument (see CMakeLists.txt).
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hvb/json_io.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_binary;
fs::path g_dir;

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path write_file(const std::string& name, const std::string& content) {
    fs::path p = g_dir / name;
    std::ofstream f(p, std::ios::binary);
    f << content;
    return p;
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args, const std::string& stdin_data = "") {
    fs::path out = g_dir / "stdout.tmp";
    fs::path err = g_dir / "stderr.tmp";
    std::string cmd = g_binary + " " + args + " >" + out.string() + " 2>" + err.string();
    if (!stdin_data.empty()) {
        write_file("stdin.tmp", stdin_data);
        cmd += " <" + (g_dir / "stdin.tmp").string();
    }
    int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

const char* kTrivialG3 =
    R"({"v":1,"field":{"kind":"Q"},"flavor":"additive","g":3,"rank":1,"mats":[[[0]],[[0]],[[0]]]})";

const char* kMultMod =
    R"({"v":1,"field":{"kind":"GF","p":2,"m":1},"flavor":"unipotent","g":1,"rank":1,"mats":[[[[1]]]]})";

const char* kJordan2 =
    R"({"v":1,"field":{"kind":"Q"},"flavor":"additive","g":1,"rank":2,"mats":[[[0,1],[0,0]]]})";

std::string ctx_q_level2() {
    return R"({"g":1,"field":{"kind":"Q"},"p_rank":0,"sep_closed":false,)"
           R"("level":{"orders":[2],"gamma":[],"p":null}})";
}

std::string bundle_line(const std::string& ctx, const std::string& coords) {
    return std::string(R"({"v":1,"context":)") + ctx +
           R"(,"summands":[{"orbit":{"points":[)" + coords +
           R"(],"q":1},"data":{"rank_only":1}}]})";
}

std::string identity_isogeny_json(const std::string& ctx) {
    return std::string(R"({"v":1,"src":)") + ctx + R"(,"dst":)" + ctx +
           R"(,"dual_map":[[1]],"mult_kernel_order":1,"unip_etale_factors":[],)"
           R"("infinitesimal_order":1})";
}

}  // namespace

TEST_CASE("ext prints the exterior algebra dimensions") {
    fs::path f = write_file("trivial_g3.json", kTrivialG3);
    RunResult r = run_cli("ext --max-degree 3 " + f.string() + " " + f.string());
    CHECK(r.code == 0);
    CHECK(hvb::Json::parse(r.out) == hvb::Json::parse("[1,3,3,1]"));

    RunResult again = run_cli("ext --max-degree 3 " + f.string() + " " + f.string());
    CHECK(again.out == r.out);  // byte identical rerun

    // default max degree is g
    RunResult dflt = run_cli("ext " + f.string() + " " + f.string());
    CHECK(hvb::Json::parse(dflt.out) == hvb::Json::parse("[1,3,3,1]"));
}

TEST_CASE("ext refuses the multiplicative flavor with exit two") {
    fs::path f = write_file("mult.json", kMultMod);
    RunResult r = run_cli("ext " + f.string() + " " + f.string());
    CHECK(r.code == 2);
    CHECK(r.out.empty());
    CHECK(r.err.find("additive flavor") != std::string::npos);
}

TEST_CASE("frobenius matches the worked example") {
    RunResult r = run_cli("frobenius --g 2 --r 1 --p 2 --n 1");
    CHECK(r.code == 0);
    hvb::Json j = hvb::Json::parse(r.out);
    CHECK(j.at("v") == 1);
    CHECK(j.at("block_count") == 2);
    CHECK(j.at("total_rank") == 4);
    for (const auto& b : j.at("blocks")) CHECK(b.at("rank") == 2);

    RunResult t = run_cli("frobenius --g 2 --r 1 --p 2 --n 1 --format table");
    CHECK(t.code == 0);
    CHECK(t.out.find("orbit") != std::string::npos);
    CHECK(t.out.find("block_count: 2") != std::string::npos);
}

TEST_CASE("unknown verbs and bad envelopes exit one") {
    RunResult r = run_cli("conjugate whatever.json");
    CHECK(r.code == 1);

    fs::path f = write_file("v2.json", R"({"v":2,"mats":[]})");
    RunResult v = run_cli("validate " + f.string());
    CHECK(v.code == 1);
    CHECK(v.err.find("unsupported schema version") != std::string::npos);

    RunResult missing = run_cli("dual /nonexistent/nope.json");
    CHECK(missing.code == 1);
    CHECK(missing.err.find("cannot read") != std::string::npos);
}

TEST_CASE("stdin works for a single dash input") {
    RunResult r = run_cli("validate -", kTrivialG3);
    CHECK(r.code == 0);
    hvb::Json j = hvb::Json::parse(r.out);
    CHECK(j.at("kind") == "module");
    CHECK(j.at("valid") == true);
    CHECK(j.at("violations").empty());
}

TEST_CASE("validate reports semantic violations without failing") {
    // declared rank disagrees with the matrices
    std::string broken =
        R"({"v":1,"field":{"kind":"Q"},"flavor":"additive","g":1,"rank":3,"mats":[[[0,1],[0,0]]]})";
    fs::path f = write_file("broken.json", broken);
    RunResult r = run_cli("validate " + f.string());
    CHECK(r.code == 0);
    hvb::Json j = hvb::Json::parse(r.out);
    CHECK(j.at("valid") == false);
    CHECK(!j.at("violations").empty());
}

TEST_CASE("decompose is seeded and refuses bundles") {
    fs::path f = write_file("j2.json", kJordan2);
    RunResult a = run_cli("decompose --seed 7 " + f.string());
    RunResult b = run_cli("decompose --seed 7 " + f.string());
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    hvb::Json j = hvb::Json::parse(a.out);
    CHECK(j.at("summands").size() == 1);
    CHECK(j.at("certified") == true);

    fs::path bf = write_file("line.json", bundle_line(ctx_q_level2(), "[0]"));
    RunResult bad = run_cli("decompose " + bf.string());
    CHECK(bad.code == 1);
    CHECK(bad.err.find("blocks") != std::string::npos);
}

TEST_CASE("bundle verbs round-trip their JSON output") {
    std::string ctx = ctx_q_level2();
    fs::path fa = write_file("la.json", bundle_line(ctx, "[0]"));
    fs::path fb = write_file("lb.json", bundle_line(ctx, "[1]"));

    RunResult sum = run_cli("sum " + fa.string() + " " + fb.string());
    CHECK(sum.code == 0);
    hvb::Json parsed = hvb::parse_envelope(sum.out);
    hvb::HomogBundle e = hvb::bundle_from_json(parsed);
    CHECK(hvb::bundle_rank(e) == 2);
    // canonical serialization: re-emitting the parsed value reproduces the bytes
    hvb::Json restamped = hvb::to_json(e);
    restamped["v"] = 1;
    CHECK(hvb::dump_canonical(restamped) == sum.out);

    RunResult ten = run_cli("tensor " + fa.string() + " " + fb.string());
    CHECK(ten.code == 0);
    CHECK(hvb::bundle_rank(hvb::bundle_from_json(hvb::parse_envelope(ten.out))) == 1);

    RunResult dual = run_cli("dual " + fb.string());
    CHECK(dual.code == 0);

    RunResult hom = run_cli("hom " + fa.string() + " " + fa.string());
    CHECK(hom.code == 0);
    CHECK(hvb::Json::parse(hom.out) == hvb::Json(1));

    RunResult mixed = run_cli("sum " + fa.string() + " " +
                              write_file("m.json", kJordan2).string());
    CHECK(mixed.code == 1);
    CHECK(mixed.err.find("mixture") != std::string::npos);
}

TEST_CASE("classify and blocks read bundles") {
    fs::path f = write_file("lc.json", bundle_line(ctx_q_level2(), "[1]"));
    RunResult c = run_cli("classify " + f.string());
    CHECK(c.code == 0);
    hvb::Json j = hvb::Json::parse(c.out);
    CHECK(j.at("semisimple") == true);
    CHECK(j.at("irreducible") == true);

    RunResult b = run_cli("blocks " + f.string());
    CHECK(b.code == 0);
    hvb::Json arr = hvb::Json::parse(b.out);
    CHECK(arr.is_array());
    CHECK(arr.size() == 1);

    RunResult wrong = run_cli("classify " + write_file("m2.json", kJordan2).string());
    CHECK(wrong.code == 1);
}

TEST_CASE("isogeny verbs move bundles between varieties") {
    std::string ctx = ctx_q_level2();
    fs::path iso = write_file("id_iso.json", identity_isogeny_json(ctx));
    fs::path line = write_file("ld.json", bundle_line(ctx, "[1]"));

    RunResult push = run_cli("pushforward " + iso.string() + " " + line.string());
    CHECK(push.code == 0);
    hvb::Json rep = hvb::Json::parse(push.out);
    CHECK(rep.at("block_count") == 1);
    CHECK(rep.at("total_rank") == 1);

    RunResult pull = run_cli("pullback " + iso.string() + " " + line.string());
    CHECK(pull.code == 0);
    hvb::HomogBundle back = hvb::bundle_from_json(hvb::parse_envelope(pull.out));
    hvb::HomogBundle orig = hvb::bundle_from_json(hvb::parse_envelope(slurp(line)));
    CHECK(hvb::to_json(back) == hvb::to_json(orig));
    CHECK(hvb::bundle_rank(back) == 1);

    RunResult fac = run_cli("factor " + iso.string());
    CHECK(fac.code == 0);
    hvb::Json both = hvb::Json::parse(fac.out);
    CHECK(both.contains("mult"));
    CHECK(both.contains("unip"));
}

TEST_CASE("the level flag cross-checks declared torsion") {
    fs::path f = write_file("le.json", bundle_line(ctx_q_level2(), "[1]"));
    CHECK(run_cli("classify --level 4 " + f.string()).code == 0);
    RunResult bad = run_cli("classify --level 3 " + f.string());
    CHECK(bad.code == 1);
    CHECK(bad.err.find("working level") != std::string::npos);
}

TEST_CASE("orbit expands a point under the declared symmetries") {
    fs::path lvl = write_file("lvl.json", R"({"v":1,"orders":[5],"gamma":[[[-1]]],"p":null})");
    RunResult r = run_cli("orbit --point 2 " + lvl.string());
    CHECK(r.code == 0);
    hvb::Json j = hvb::Json::parse(r.out);
    CHECK(j.at("points") == hvb::Json::parse("[[2],[3]]"));
    CHECK(j.at("q") == 1);

    RunResult t = run_cli("orbit --point 2 --format table " + lvl.string());
    CHECK(t.code == 0);
    CHECK(t.out.find("points: (2) (3)") != std::string::npos);
    CHECK(t.out.find("sep_degree: 2") != std::string::npos);
}

int run_all(int argc, char** argv) {
    doctest::Context ctx;
    if (argc >= 2 && argv[argc - 1][0] != '-') {
        g_binary = argv[argc - 1];
        --argc;
    }
    ctx.applyCommandLine(argc, argv);
    if (g_binary.empty()) {
        std::fprintf(stderr, "usage: test_cli [doctest options] <path to hvb binary>\n");
        return 1;
    }
    g_dir = fs::temp_directory_path() / "hvb_cli_test";
    fs::create_directories(g_dir);
    return ctx.run();
}

int main(int argc, char** argv) { return run_all(argc, argv); }
