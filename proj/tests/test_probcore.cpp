#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bcbound/probcore.hpp"
#include "oracles.hpp"

using namespace bcbound;

namespace {

JointDist single_var(const std::string& name, std::vector<double> pmf) {
    Eigen::ArrayXd mass = Eigen::Map<Eigen::ArrayXd>(pmf.data(), pmf.size());
    return JointDist({{name, static_cast<int>(pmf.size())}}, mass);
}

// X uniform bit observed through a BSC(p): joint over (X, Y).
JointDist bsc_joint(double p) {
    Eigen::ArrayXd mass(4);
    mass << 0.5 * (1 - p), 0.5 * p, 0.5 * p, 0.5 * (1 - p);
    return JointDist({{"X", 2}, {"Y", 2}}, mass);
}

}  // namespace

TEST_CASE("entropy closed forms") {
    CHECK(entropy(single_var("A", {0.5, 0.5}), {"A"}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(entropy(single_var("A", {1.0, 0.0}), {"A"}) == doctest::Approx(0.0).epsilon(1e-12));

    // -0.9 log2 0.9 - 0.1 log2 0.1, frozen from the closed form.
    double expected = 0.46899559358928122;
    CHECK(std::abs(entropy(single_var("A", {0.9, 0.1}), {"A"}) - expected) < 1e-12);
    CHECK(entropy(single_var("A", {0.9, 0.1}), {"A"}) == doctest::Approx(0.4690).epsilon(1e-4));
    CHECK(std::abs(oracle::binary_entropy(0.1) - expected) < 1e-12);
}

TEST_CASE("entropy input validation") {
    auto d = single_var("A", {0.5, 0.5});
    CHECK_THROWS_AS(entropy(d, {}), std::invalid_argument);
    CHECK_THROWS_AS(entropy(d, {"B"}), std::invalid_argument);
}

TEST_CASE("joint distribution validation") {
    Eigen::ArrayXd bad(2);
    bad << 0.7, 0.7;
    CHECK_THROWS_AS(JointDist({{"A", 2}}, bad), std::invalid_argument);
    Eigen::ArrayXd neg(2);
    neg << 1.1, -0.1;
    CHECK_THROWS_AS(JointDist({{"A", 2}}, neg), std::invalid_argument);
    Eigen::ArrayXd ok(2);
    ok << 0.5, 0.5;
    CHECK_THROWS_AS(JointDist({{"A", 2}, {"A", 2}}, ok), std::invalid_argument);
    CHECK_THROWS_AS(JointDist({{"A", 0}}, ok), std::invalid_argument);
    // Tiny negative rounding is clamped, not rejected.
    Eigen::ArrayXd tiny(2);
    tiny << 1.0 + 5e-13, -5e-13;
    JointDist d({{"A", 2}}, tiny);
    CHECK(d.mass()[1] == 0.0);
}

TEST_CASE("channel validation") {
    Eigen::ArrayXd law(8);
    law.setZero();
    law[0] = 1.0;
    law[4] = 0.9;  // row x=1 sums to 0.9
    CHECK_THROWS_AS(Channel(2, 2, 2, law), std::invalid_argument);
    law[4] = 1.0;
    Channel ch(2, 2, 2, law);
    CHECK(ch(1, 0, 0) == 1.0);
}

TEST_CASE("conditional mutual information basics") {
    // Product distribution: I(A;B) = 0.
    Eigen::ArrayXd prod(6);
    double pa[2] = {0.3, 0.7}, pb[3] = {0.2, 0.5, 0.3};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 3; ++b) prod[a * 3 + b] = pa[a] * pb[b];
    JointDist dp({{"A", 2}, {"B", 3}}, prod);
    CHECK(cond_mutual_info(dp, {"A"}, {"B"}) == doctest::Approx(0.0).epsilon(1e-12));

    // B an exact copy of a uniform bit A: I(A;B) = H(A) = 1.
    Eigen::ArrayXd copy(4);
    copy << 0.5, 0.0, 0.0, 0.5;
    JointDist dc({{"A", 2}, {"B", 2}}, copy);
    CHECK(cond_mutual_info(dc, {"A"}, {"B"}) == doctest::Approx(1.0).epsilon(1e-12));

    // Uniform bit through BSC(0.1): I(X;Y) = 1 - h(0.1), frozen closed form.
    double expected = 1.0 - 0.46899559358928122;
    CHECK(std::abs(cond_mutual_info(bsc_joint(0.1), {"X"}, {"Y"}) - expected) < 1e-12);
    CHECK(cond_mutual_info(bsc_joint(0.1), {"X"}, {"Y"}) ==
          doctest::Approx(0.5310).epsilon(1e-4));
}

TEST_CASE("cond_mutual_info rejects overlapping primary groups") {
    auto d = oracle::random_joint({{"A", 2}, {"B", 2}, {"C", 2}}, 7);
    CHECK_THROWS_AS(cond_mutual_info(d, {"A", "B"}, {"B"}, {}), std::invalid_argument);
    CHECK_THROWS_AS(cond_mutual_info(d, {"A"}, {"Z"}), std::invalid_argument);
    // Group form allows overlap: I(A,B;B) = H(B) + I(A;B) >= 0 evaluates.
    CHECK(mutual_info_groups(d, {"A", "B"}, {"B"}) >= 0.0);
}

TEST_CASE("marginalize matches brute-force oracle") {
    auto d = oracle::random_joint({{"A", 2}, {"B", 3}, {"C", 2}, {"D", 2}}, 42);
    for (auto keep : {Names{"B"}, Names{"A", "C"}, Names{"B", "D"}, Names{"A", "B", "D"}}) {
        JointDist m = marginalize(d, keep);
        auto ref = oracle::ref_marginal(d, keep);
        REQUIRE(static_cast<std::size_t>(m.size()) == ref.size());
        Eigen::Index i = 0;
        for (const auto& [key, p] : ref) {
            CHECK(m.mass()[i] == doctest::Approx(p).epsilon(1e-14));
            ++i;
        }
    }
}

TEST_CASE("marginal of a product distribution is the factor") {
    Eigen::ArrayXd prod(4);
    double pa[2] = {0.25, 0.75}, pb[2] = {0.6, 0.4};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) prod[a * 2 + b] = pa[a] * pb[b];
    JointDist d({{"A", 2}, {"B", 2}}, prod);
    JointDist ma = marginalize(d, {"A"});
    CHECK(ma.mass()[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(ma.mass()[1] == doctest::Approx(0.75).epsilon(1e-15));

    Eigen::ArrayXd unif = Eigen::ArrayXd::Constant(4, 0.25);
    JointDist du({{"A", 2}, {"B", 2}}, unif);
    JointDist mu = marginalize(du, {"B"});
    CHECK(mu.mass()[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("entropy is stable under marginalization") {
    auto d = oracle::random_joint({{"A", 2}, {"B", 2}, {"C", 3}}, 99);
    for (auto keep : {Names{"A"}, Names{"A", "C"}, Names{"B", "C"}}) {
        double h_direct = entropy(d, keep);
        double h_marg = entropy(marginalize(d, keep), keep);
        CHECK(std::abs(h_direct - h_marg) <= 1e-12);
    }
}

TEST_CASE("chain rule H(A,B) = H(A) + H(B|A)") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        auto d = oracle::random_joint({{"A", 2}, {"B", 3}, {"C", 2}}, seed);
        double lhs = entropy(d, {"A", "B"});
        double rhs = entropy(d, {"A"}) + entropy(d, {"A", "B"}) - entropy(d, {"A"});
        CHECK(std::abs(lhs - rhs) < 1e-10);
        // Conditional entropy via CMI route: H(B|A) = H(AB) - H(A).
        double hba = entropy(d, {"A", "B"}) - entropy(d, {"A"});
        double via_oracle = oracle::ref_entropy(d, {"A", "B"}) - oracle::ref_entropy(d, {"A"});
        CHECK(std::abs(hba - via_oracle) < 1e-10);
        CHECK(std::abs(entropy(d, {"A", "B", "C"}) -
                       oracle::ref_entropy(d, {"A", "B", "C"})) < 1e-10);
    }
}

TEST_CASE("nonnegativity over all disjoint triples of five binary variables") {
    std::vector<VariableSpec> vars = {{"A", 2}, {"B", 2}, {"C", 2}, {"D", 2}, {"E", 2}};
    Names names = {"A", "B", "C", "D", "E"};
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        auto d = oracle::random_joint(vars, seed);
        // Assign each variable to group A, B, C, or none: 4^5 combinations.
        for (int assign = 0; assign < 1024; ++assign) {
            Names ga, gb, gc;
            int code = assign;
            for (int v = 0; v < 5; ++v) {
                switch (code % 4) {
                    case 1: ga.push_back(names[v]); break;
                    case 2: gb.push_back(names[v]); break;
                    case 3: gc.push_back(names[v]); break;
                    default: break;
                }
                code /= 4;
            }
            if (ga.empty() || gb.empty()) continue;
            // Raw four-entropy combination must not dip below -1e-12.
            double raw = oracle::ref_cmi(d, ga, gb, gc);
            CHECK(raw >= -1e-12);
            CHECK(cond_mutual_info(d, ga, gb, gc) >= 0.0);
        }
    }
}

TEST_CASE("Csiszar sum identity as a pure identity") {
    // Sequences A_1..A_n, B_1..B_n plus side variable K on random joints.
    for (int n : {2, 3}) {
        std::vector<VariableSpec> vars;
        for (int i = 1; i <= n; ++i) vars.push_back({"A" + std::to_string(i), 2});
        for (int i = 1; i <= n; ++i) vars.push_back({"B" + std::to_string(i), 2});
        vars.push_back({"K", 2});
        for (std::uint64_t seed : {21u, 22u, 23u}) {
            auto d = oracle::random_joint(vars, seed + n);
            double lhs = 0.0, rhs = 0.0;
            for (int i = 1; i <= n; ++i) {
                Names b_suffix, a_prefix, cond;
                for (int j = i + 1; j <= n; ++j) b_suffix.push_back("B" + std::to_string(j));
                for (int j = 1; j < i; ++j) a_prefix.push_back("A" + std::to_string(j));
                if (!b_suffix.empty()) {
                    cond = a_prefix;
                    cond.push_back("K");
                    lhs += cond_mutual_info(d, b_suffix, {"A" + std::to_string(i)}, cond);
                }
                if (!a_prefix.empty()) {
                    cond = b_suffix;
                    cond.push_back("K");
                    rhs += cond_mutual_info(d, a_prefix, {"B" + std::to_string(i)}, cond);
                }
            }
            CHECK(std::abs(lhs - rhs) < 1e-10);
        }
    }
}

TEST_CASE("support cap is enforced") {
    std::vector<VariableSpec> vars;
    for (int i = 0; i < 40; ++i) vars.push_back({"V" + std::to_string(i), 4});
    CHECK_THROWS_AS(JointDist(vars, Eigen::ArrayXd::Zero(1)), SupportCapExceeded);
}
