#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bcbound/cli.hpp"
#include "bcbound/formats.hpp"
#include "bcbound/textexpr.hpp"
#include "oracles.hpp"
#include "scheme_fixtures.hpp"

using namespace bcbound;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = FIXTURES_DIR;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("bcbound_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int value = 0;
        return value;
    }
};

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("channel files round-trip bit-exactly") {
    TempDir dir;
    auto ch = oracle::random_channel(3, 2, 2, 123);
    std::string first = dir.file("ch1.json");
    std::string second = dir.file("ch2.json");
    save_channel(ch, first);
    Channel loaded = load_channel(first);
    CHECK((loaded.law() == ch.law()).all());
    save_channel(loaded, second);
    CHECK(slurp(first) == slurp(second));
}

TEST_CASE("scheme files round-trip for both kinds") {
    TempDir dir;
    SchemeVariant priv = fixtures::random_private({2, 2, 2, 2, 0}, 2, 9);
    std::string p1 = dir.file("p1.json"), p2 = dir.file("p2.json");
    save_scheme(priv, p1);
    SchemeVariant back = load_scheme(p1);
    save_scheme(back, p2);
    CHECK(slurp(p1) == slurp(p2));
    CHECK((std::get<PrivateScheme>(back).p_x_given_uvw ==
           std::get<PrivateScheme>(priv).p_x_given_uvw)
              .all());

    SchemeVariant common = fixtures::random_common({2, 2, 2, 2, 2}, 2, 5, true);
    std::string c1 = dir.file("c1.json"), c2 = dir.file("c2.json");
    save_scheme(common, c1);
    SchemeVariant cback = load_scheme(c1);
    save_scheme(cback, c2);
    CHECK(slurp(c1) == slurp(c2));
    CHECK(std::get<CommonScheme>(cback).x_map == std::get<CommonScheme>(common).x_map);
}

TEST_CASE("code and config files round-trip") {
    TempDir dir;
    BlockCode code;
    code.n = 2;
    code.m0_card = 2;
    code.m1_card = 2;
    code.m2_card = 2;
    for (int i = 0; i < 8; ++i) code.encoder.push_back({i % 2, (i >> 1) % 2});
    std::string f1 = dir.file("code1.json"), f2 = dir.file("code2.json");
    save_code(code, f1);
    BlockCode back = load_code(f1);
    save_code(back, f2);
    CHECK(slurp(f1) == slurp(f2));
    CHECK(back.encoder == code.encoder);
    CHECK(back.m0_card == 2);

    ScanConfig cfg;
    cfg.search.cards = {2, 2, 1, 1, 0};
    cfg.search.restarts = 3;
    cfg.search.seed = 77;
    Eigen::VectorXd l(2);
    l << 0.25, 1.0;
    cfg.lambda_sweep.push_back(l);
    std::string g1 = dir.file("cfg1.json"), g2 = dir.file("cfg2.json");
    save_scan_config(cfg, g1);
    ScanConfig cback = load_scan_config(g1);
    save_scan_config(cback, g2);
    CHECK(slurp(g1) == slurp(g2));
    CHECK(cback.search.seed == 77);
    CHECK(cback.lambda_sweep.size() == 1);
    CHECK(cback.lambda_sweep[0][0] == 0.25);
}

TEST_CASE("malformed channel law names the offending input row") {
    TempDir dir;
    spit(dir.file("bad.json"),
         R"({"x": 2, "y1": 2, "y2": 2,
             "law": [[[0.5, 0.5], [0.0, 0.0]], [[0.4, 0.4], [0.05, 0.05]]]})");
    CHECK_THROWS_WITH_AS(load_channel(dir.file("bad.json")),
                         doctest::Contains("row 1"), ParseError);
    auto result = cli({"info", "--channel", dir.file("bad.json"), "--scheme",
                       kFixtures + "/scheme_degenerate.json"});
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("row 1") != std::string::npos);
}

TEST_CASE("info reports the corner rates and zero residuals") {
    auto result = cli({"info", "--channel", kFixtures + "/channel_product.json", "--scheme",
                       kFixtures + "/scheme_product_corner.json"});
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("R1 = I(U;Y1|W1) = 1") != std::string::npos);
    CHECK(result.out.find("R2 = I(V;Y2|W2) = 1") != std::string::npos);
    CHECK(result.out.find("residual norm_inf = 0") != std::string::npos);

    auto degenerate = cli({"info", "--channel", kFixtures + "/channel_bsc01_pair.json",
                           "--scheme", kFixtures + "/scheme_degenerate.json"});
    CHECK(degenerate.exit_code == 0);
    CHECK(degenerate.out.find("R1 = I(U;Y1|W1) = 0") != std::string::npos);
}

TEST_CASE("scan finds the product-channel corner and is byte-deterministic") {
    TempDir dir;
    spit(dir.file("cfg.json"), R"({
        "cards": {"u": 2, "v": 2, "w1": 1, "w2": 1},
        "restarts": 6, "max_iters": 800, "seed": 19,
        "lambda_sweep": [[1, 0], [0, 1], [1, 1]]
    })");
    auto first = cli({"scan", "--channel", kFixtures + "/channel_product.json", "--config",
                      dir.file("cfg.json"), "--out", dir.file("a.csv")});
    REQUIRE(first.exit_code == 0);
    std::string csv = slurp(dir.file("a.csv"));
    CHECK(csv.find("lambda1,lambda2,R1,R2,residual_inf,seed") == 0);

    bool corner = false;
    std::istringstream rows(csv);
    std::string row;
    std::getline(rows, row);  // header
    while (std::getline(rows, row)) {
        double l1, l2, r1, r2;
        std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf", &l1, &l2, &r1, &r2);
        corner = corner || (r1 >= 0.99 && r2 >= 0.99);
    }
    CHECK(corner);

    auto second = cli({"scan", "--channel", kFixtures + "/channel_product.json", "--config",
                       dir.file("cfg.json"), "--out", dir.file("b.csv")});
    REQUIRE(second.exit_code == 0);
    CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));
    CHECK(first.out == second.out);
}

TEST_CASE("scan rejects restarts=0 at config validation") {
    TempDir dir;
    spit(dir.file("cfg.json"), R"({
        "cards": {"u": 2, "v": 2, "w1": 1, "w2": 1},
        "restarts": 0, "seed": 1, "lambda_sweep": [[1, 1]]
    })");
    auto result = cli({"scan", "--channel", kFixtures + "/channel_product.json", "--config",
                       dir.file("cfg.json")});
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("restarts") != std::string::npos);
}

TEST_CASE("claim1 passes on the product channel via the CLI") {
    TempDir dir;
    spit(dir.file("cfg.json"), R"({
        "cards": {"u": 2, "v": 2, "w1": 1, "w2": 1},
        "restarts": 3, "max_iters": 400, "seed": 3,
        "lambda_sweep": [[1, 0], [1, 1]]
    })");
    auto result = cli({"claim", "--channel", kFixtures + "/channel_product.json", "--config",
                       dir.file("cfg.json"), "--which", "claim1", "--out",
                       dir.file("claim.csv")});
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("claim HOLDS") != std::string::npos);
    CHECK(slurp(dir.file("claim.csv")).find("index,min_slack,residual_inf,verdict") == 0);

    // A claim2 request against a private config is a config error.
    auto mismatch = cli({"claim", "--channel", kFixtures + "/channel_product.json",
                         "--config", dir.file("cfg.json"), "--which", "claim2"});
    CHECK(mismatch.exit_code == 2);
}

TEST_CASE("claim2 respects the New-Jersey typo policy flag") {
    TempDir dir;
    spit(dir.file("cfg.json"), R"({
        "cards": {"t": 1, "u": 2, "v": 2, "w1": 1, "w2": 1},
        "deterministic_x": true,
        "restarts": 2, "max_iters": 300, "seed": 2,
        "lambda_sweep": [[0, 1, 1]]
    })");
    auto corrected = cli({"claim", "--channel", kFixtures + "/channel_product.json",
                          "--config", dir.file("cfg.json"), "--which", "claim2"});
    CHECK(corrected.exit_code == 0);
    CHECK(corrected.out.find("(corrected mode)") != std::string::npos);

    // Literal mode evaluates the two suspect lines exactly as printed; the
    // report flags the mode, and points may legitimately fall outside.
    auto literal = cli({"claim", "--channel", kFixtures + "/channel_product.json",
                        "--config", dir.file("cfg.json"), "--which", "claim2", "--mode",
                        "literal"});
    CHECK((literal.exit_code == 0 || literal.exit_code == 4));
    CHECK(literal.out.find("(literal mode)") != std::string::npos);
}

TEST_CASE("prove: bundled fixture, trivial targets, and witnesses") {
    auto fixture = cli({"prove", "--constraints", kFixtures + "/claim1_constraints.txt",
                        "--target-file", kFixtures + "/claim1_target.txt"});
    CHECK(fixture.exit_code == 0);
    CHECK(fixture.out.find("ShannonProvable") != std::string::npos);

    auto trivial = cli({"prove", "--target", "I(A;B) >= 0"});
    CHECK(trivial.exit_code == 0);

    auto falsifiable = cli({"prove", "--target", "-H(A) >= 0"});
    CHECK(falsifiable.exit_code == 5);
    CHECK(falsifiable.out.find("NotProvable") != std::string::npos);
    CHECK(falsifiable.out.find("H(A) = 1") != std::string::npos);

    auto equality = cli({"prove", "--target", "H(A,B) = H(A) + H(B)"});
    CHECK(equality.exit_code == 5);  // independence is not implied

    auto syntax = cli({"prove", "--target", "I(A;B >= 0"});
    CHECK(syntax.exit_code == 2);

    auto certified = cli({"prove", "--certify", "claim1-exchange-ablation"});
    CHECK(certified.exit_code == 5);
    CHECK(certified.out.find("witness") != std::string::npos);
}

TEST_CASE("multiletter command: identity code passes, oversized code hits the cap") {
    auto pass = cli({"multiletter", "--code", kFixtures + "/code_identity_n2_product.json",
                     "--channel", kFixtures + "/channel_product.json"});
    CHECK(pass.exit_code == 0);
    CHECK(pass.out.find("zero-error receivers: (true, true)") != std::string::npos);

    auto noisy = cli({"multiletter", "--code", kFixtures + "/code_repetition_n2.json",
                      "--channel", kFixtures + "/channel_bsc01_pair.json"});
    CHECK(noisy.exit_code == 0);
    CHECK(noisy.out.find("zero-error receivers: (false, false)") != std::string::npos);

    auto capped = cli({"multiletter", "--code", kFixtures + "/code_overlength_n9.json",
                       "--channel", kFixtures + "/channel_bsc01_pair.json"});
    CHECK(capped.exit_code == 3);

    auto mismatch = cli({"multiletter", "--code", kFixtures + "/code_identity_n1.json",
                         "--channel", kFixtures + "/channel_product.json", "--n", "2"});
    CHECK(mismatch.exit_code == 2);
}

TEST_CASE("multiletter command handles common-message codes") {
    TempDir dir;
    spit(dir.file("code_m0.json"),
         R"({"n": 1, "m0": 2, "m1": 2, "m2": 2,
             "encoder": [[[[0],[1]],[[1],[0]]],[[[1],[0]],[[0],[1]]]]})");
    auto result = cli({"multiletter", "--code", dir.file("code_m0.json"), "--channel",
                       kFixtures + "/channel_bsc01_pair.json"});
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("single-letter identification skipped") != std::string::npos);
}

TEST_CASE("expression parser diagnostics") {
    CHECK_THROWS_WITH_AS(parse_prover_problem("", "I(A;B;C) >= 0"),
                         doctest::Contains("two-argument"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_prover_problem("I(A;B) >= 0", "I(A;B) >= 0"),
                         doctest::Contains("equalities"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_prover_problem("", "H(A) >= 1"),
                         doctest::Contains("constant"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_prover_problem("", "H(A) + >= 0"),
                         doctest::Contains("line 1"), std::invalid_argument);

    // Coefficients, both relation spellings, and comments all parse.
    auto problem = parse_prover_problem("# comment\n2 H(A) - 2*H(A) == 0\n",
                                        "0.5 * I(A;B|C) + 0.5 I(A;B|C) <= H(A)");
    CHECK(problem.constraints.equalities.size() == 1);
    CHECK(problem.constraints.equalities[0].empty());
    CHECK(problem.target_kind == TargetKind::kNonneg);
}
