#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bcbound/search.hpp"
#include "oracles.hpp"
#include "scheme_fixtures.hpp"
#include "gradient_check.hpp"

using namespace bcbound;

namespace {

SearchConfig small_config() {
    SearchConfig cfg;
    cfg.cards = {2, 2, 2, 2, 0};
    cfg.restarts = 4;
    cfg.max_iters = 400;
    cfg.seed = 7;
    return cfg;
}

bool schemes_equal(const SchemeVariant& a, const SchemeVariant& b) {
    if (a.index() != b.index()) return false;
    if (std::holds_alternative<PrivateScheme>(a)) {
        const auto& x = std::get<PrivateScheme>(a);
        const auto& y = std::get<PrivateScheme>(b);
        return (x.p_u == y.p_u).all() && (x.p_v == y.p_v).all() &&
               (x.p_w_given_uv == y.p_w_given_uv).all() &&
               (x.p_x_given_uvw == y.p_x_given_uvw).all();
    }
    const auto& x = std::get<CommonScheme>(a);
    const auto& y = std::get<CommonScheme>(b);
    return (x.p_t == y.p_t).all() && (x.p_u == y.p_u).all() && (x.p_v == y.p_v).all() &&
           (x.p_w_given_tuv == y.p_w_given_tuv).all() && x.x_map == y.x_map;
}

}  // namespace

TEST_CASE("sampled schemes are deterministic in the seed") {
    SchemeCards cards{2, 2, 2, 2, 0};
    auto a = sample_scheme(cards, 2, 42);
    auto b = sample_scheme(cards, 2, 42);
    CHECK(schemes_equal(a, b));
    auto c = sample_scheme(cards, 2, 43);
    CHECK(!schemes_equal(a, c));

    // All-singleton cards give the unique degenerate scheme.
    auto d = sample_scheme({1, 1, 1, 1, 0}, 2, 5);
    const auto& ds = std::get<PrivateScheme>(d);
    CHECK(ds.p_u.size() == 1);
    CHECK(ds.p_u[0] == 1.0);

    // Strict positivity of every factor entry.
    const auto& as = std::get<PrivateScheme>(a);
    CHECK(as.p_w_given_uv.minCoeff() > 0.0);
    CHECK(as.p_x_given_uvw.minCoeff() > 0.0);
}

TEST_CASE("logit round trip preserves schemes") {
    auto scheme = sample_scheme({2, 2, 2, 2, 0}, 2, 11);
    ParamSpace ps = param_space_for(scheme);
    auto back = scheme_of(ps, logits_of(ps, scheme));
    const auto& x = std::get<PrivateScheme>(scheme);
    const auto& y = std::get<PrivateScheme>(back);
    CHECK(((x.p_w_given_uv - y.p_w_given_uv).abs() < 1e-12).all());
    CHECK(((x.p_x_given_uvw - y.p_x_given_uvw).abs() < 1e-12).all());
}

TEST_CASE("refine: all-singleton scheme is immediately feasible") {
    auto cfg = small_config();
    SchemeVariant s = fixtures::degenerate_private(2);
    auto result = refine_to_constraints(s, oracle::bsc_pair_channel(0.1), cfg);
    CHECK(result.success);
    CHECK(result.residual_inf <= 1e-12);
    CHECK(result.trace.front() <= 1e-12);
}

TEST_CASE("refine: perturbed corner scheme reconverges") {
    auto cfg = small_config();
    SchemeVariant corner = fixtures::product_corner_private();
    ParamSpace ps = param_space_for(corner);
    Eigen::VectorXd logits = logits_of(ps, corner);
    std::mt19937_64 rng(3);
    for (Eigen::Index i = 0; i < logits.size(); ++i)
        logits[i] += (oracle::uniform01(rng) - 0.5) * 2e-3;
    SchemeVariant perturbed = scheme_of(ps, logits);
    auto result = refine_to_constraints(perturbed, oracle::product_channel(), cfg);
    CHECK(result.success);
    CHECK(result.residual_inf <= 1e-6);
}

TEST_CASE("refine: random 2x2x2 channel succeeds within 50 restarts") {
    auto cfg = small_config();
    auto ch = oracle::random_channel(2, 2, 2, 99);
    int successes = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto s = sample_scheme(cfg.cards, 2, derive_seed(cfg.seed, 0, seed));
        auto result = refine_to_constraints(s, ch, cfg);
        if (result.success) ++successes;
    }
    CHECK(successes >= 1);
    MESSAGE("refine successes out of 50: ", successes);
}

TEST_CASE("maximize: clean parallel binary channels reach R1 = 1") {
    // Y1 = Y2 = X, U binary, everything else singleton: the manifold is the
    // whole parameter space and max I(U;Y1) is the channel capacity 1.
    auto cfg = small_config();
    cfg.cards = {2, 1, 1, 1, 0};
    auto ch = fixtures::clean_common_channel();
    Eigen::VectorXd lambda(2);
    lambda << 1.0, 0.0;
    double best = 0.0;
    for (std::uint64_t r = 0; r < 4; ++r) {
        auto s = sample_scheme(cfg.cards, 2, derive_seed(3, 0, r));
        auto refined = refine_to_constraints(s, ch, cfg);
        REQUIRE(refined.success);
        auto maxed = maximize_weighted_rate(refined.scheme, ch, lambda, cfg);
        REQUIRE(maxed.feasible);
        best = std::max(best, maxed.rate[0]);
    }
    CHECK(best >= 1.0 - 1e-3);
}

TEST_CASE("maximize: BSC(0.1) ceiling is recovered") {
    auto cfg = small_config();
    cfg.cards = {2, 1, 1, 1, 0};
    cfg.max_iters = 2000;
    auto ch = oracle::bsc_pair_channel(0.1);
    Eigen::VectorXd lambda(2);
    lambda << 1.0, 0.0;
    double ceiling = 1.0 - oracle::binary_entropy(0.1);
    double best = 0.0;
    for (std::uint64_t r = 0; r < 6; ++r) {
        auto s = sample_scheme(cfg.cards, 2, derive_seed(13, 0, r));
        auto refined = refine_to_constraints(s, ch, cfg);
        REQUIRE(refined.success);
        auto maxed = maximize_weighted_rate(refined.scheme, ch, lambda, cfg);
        REQUIRE(maxed.feasible);
        best = std::max(best, maxed.rate[0]);
    }
    CHECK(std::abs(best - ceiling) <= 1e-3);
}

TEST_CASE("maximize: zero weights return a feasible point with zero objective") {
    auto cfg = small_config();
    SchemeVariant s = fixtures::product_corner_private();
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(2);
    auto maxed = maximize_weighted_rate(s, oracle::product_channel(), lambda, cfg);
    CHECK(maxed.feasible);
    CHECK(maxed.residual_inf <= cfg.constraint_tol);
}

TEST_CASE("analytic gradients match central finite differences at feasible points") {
    auto cfg = small_config();
    auto ch = oracle::random_channel(2, 2, 2, 55);
    SchemeObjective obj(make_param_space(cfg.cards, 2, false), ch);
    Eigen::VectorXd lambda(2);
    lambda << 1.0, 0.7;

    int checked = 0;
    for (std::uint64_t seed = 0; seed < 200 && checked < 20; ++seed) {
        auto refined = refine_to_constraints(
            sample_scheme(cfg.cards, 2, derive_seed(101, 0, seed)), ch, cfg);
        if (!refined.success) continue;
        Eigen::VectorXd logits = gradcheck::near_tolerance_point(
            obj, logits_of(obj.space(), refined.scheme), cfg.constraint_tol, seed + 1);
        auto report = gradcheck::check_gradients(obj, logits, lambda, cfg.constraint_tol);
        if (!report.feasible) continue;
        ++checked;
        CHECK(report.penalty_rel <= 1e-4);
        CHECK(report.rate_rel <= 1e-4);
    }
    CHECK(checked == 20);
}

TEST_CASE("gradients also check out for deterministic-X common schemes") {
    SearchConfig cfg;
    cfg.cards = {2, 2, 2, 2, 2};
    cfg.max_iters = 300;
    auto ch = oracle::random_channel(2, 2, 2, 77);
    auto scheme = sample_scheme(cfg.cards, 2, 5, true);
    SchemeObjective obj(param_space_for(scheme), ch);
    Eigen::VectorXd logits = logits_of(obj.space(), scheme);
    Eigen::VectorXd lambda(3);
    lambda << 0.5, 1.0, 1.0;
    Eigen::VectorXd analytic;
    obj.value(logits, lambda, 2.0, &analytic);
    const double h = 1e-5;
    Eigen::VectorXd fd(logits.size());
    for (Eigen::Index j = 0; j < logits.size(); ++j) {
        Eigen::VectorXd up = logits, dn = logits;
        up[j] += h;
        dn[j] -= h;
        fd[j] = (obj.value(up, lambda, 2.0) - obj.value(dn, lambda, 2.0)) / (2 * h);
    }
    double scale = std::max({analytic.cwiseAbs().maxCoeff(), fd.cwiseAbs().maxCoeff(), 1e-12});
    CHECK((analytic - fd).cwiseAbs().maxCoeff() / scale <= 1e-4);
}

TEST_CASE("scan: product channel sweep reaches the known corner") {
    SearchConfig cfg;
    cfg.cards = {2, 2, 1, 1, 0};
    cfg.restarts = 6;
    cfg.max_iters = 800;
    cfg.seed = 19;
    std::vector<Eigen::VectorXd> sweep;
    for (auto [l1, l2] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}) {
        Eigen::VectorXd l(2);
        l << l1, l2;
        sweep.push_back(l);
    }
    auto sample = scan_region(oracle::product_channel(), cfg, sweep);
    REQUIRE(!sample.points.empty());
    auto front = frontier(sample, FrontierMode::kHull);
    std::vector<Eigen::Vector2d> hull;
    for (const auto& p : front) hull.emplace_back(p[0], p[1]);
    CHECK(hull_dominates(hull, {1.0 - 1e-2, 1.0 - 1e-2}));
}

TEST_CASE("scan with all-singleton cards samples only the origin") {
    SearchConfig cfg;
    cfg.cards = {1, 1, 1, 1, 0};
    cfg.restarts = 2;
    cfg.max_iters = 50;
    cfg.seed = 5;
    Eigen::VectorXd l(2);
    l << 1.0, 1.0;
    auto sample = scan_region(oracle::bsc_pair_channel(0.1), cfg, {l});
    REQUIRE(sample.points.size() == 2);  // every restart is trivially feasible
    for (const auto& p : sample.points) {
        CHECK(p.rate[0] <= 1e-12);
        CHECK(p.rate[1] <= 1e-12);
    }
}

TEST_CASE("scan determinism: identical seeds give identical samples") {
    SearchConfig cfg;
    cfg.cards = {2, 2, 2, 2, 0};
    cfg.restarts = 3;
    cfg.max_iters = 300;
    cfg.seed = 23;
    std::vector<Eigen::VectorXd> sweep;
    Eigen::VectorXd l(2);
    l << 1.0, 1.0;
    sweep.push_back(l);
    auto ch = oracle::random_channel(2, 2, 2, 5);
    auto a = scan_region(ch, cfg, sweep);
    auto b = scan_region(ch, cfg, sweep);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].rate == b.points[i].rate);  // bitwise
        CHECK(a.points[i].residual_inf == b.points[i].residual_inf);
        CHECK(a.points[i].seed == b.points[i].seed);
    }
    // Parallel execution must not change the result.
    cfg.jobs = 4;
    auto c = scan_region(ch, cfg, sweep);
    REQUIRE(c.points.size() == a.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i)
        CHECK(a.points[i].rate == c.points[i].rate);
}

TEST_CASE("every scanned point passes the inclusion check") {
    SearchConfig cfg;
    cfg.cards = {2, 2, 2, 2, 0};
    cfg.restarts = 4;
    cfg.max_iters = 400;
    cfg.seed = 31;
    std::vector<Eigen::VectorXd> sweep;
    Eigen::VectorXd l(2);
    l << 1.0, 0.5;
    sweep.push_back(l);
    auto ch = oracle::random_channel(2, 2, 2, 7);
    auto sample = scan_region(ch, cfg, sweep);
    for (const auto& pt : sample.points) {
        const auto& scheme =
            std::get<PrivateScheme>(sample.schemes[static_cast<std::size_t>(pt.scheme_index)]);
        auto report = claim_check(scheme, ch);
        CHECK(report.pass);
    }
    MESSAGE("scan feasible points: ", sample.points.size(), " of ", sample.total_restarts);
}

TEST_CASE("config validation rejects bad settings") {
    SearchConfig cfg = small_config();
    cfg.restarts = 0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = small_config();
    cfg.constraint_tol = 0.0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = small_config();
    cfg.penalty_schedule.clear();
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = small_config();
    cfg.rate_weights = Eigen::VectorXd::Constant(2, -1.0);
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}
