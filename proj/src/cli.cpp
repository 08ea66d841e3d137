#include "bcbound/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "bcbound/formats.hpp"
#include "bcbound/multiletter.hpp"
#include "bcbound/prover.hpp"
#include "bcbound/regions.hpp"
#include "bcbound/search.hpp"
#include "bcbound/simplex.hpp"
#include "bcbound/textexpr.hpp"

namespace bcbound {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitResource = 3;
constexpr int kExitClaimFalsified = 4;
constexpr int kExitNotProvable = 5;

struct GlobalOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<int> jobs;
    std::string cards;  // "u,v,w1,w2[,t]"
    std::string mode = "corrected";
    std::string out_path;
};

SchemeCards parse_cards(const std::string& text) {
    std::vector<int> parts;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) parts.push_back(std::stoi(item));
    if (parts.size() != 4 && parts.size() != 5)
        throw ParseError("--cards expects u,v,w1,w2 or u,v,w1,w2,t");
    SchemeCards cards{parts[0], parts[1], parts[2], parts[3], 0};
    if (parts.size() == 5) cards.t = parts[4];
    return cards;
}

NjMode parse_mode(const std::string& mode) {
    if (mode == "corrected") return NjMode::kCorrected;
    if (mode == "literal") return NjMode::kLiteral;
    throw ParseError("--mode expects 'corrected' or 'literal'");
}

void apply_overrides(ScanConfig& cfg, const GlobalOverrides& global, const Channel& ch) {
    if (global.seed) cfg.search.seed = *global.seed;
    if (global.tol) cfg.search.constraint_tol = *global.tol;
    if (global.jobs) cfg.search.jobs = *global.jobs;
    if (!global.cards.empty()) cfg.search.cards = parse_cards(global.cards);
    if (cfg.search.cards.u == 0)
        cfg.search.cards = {ch.x_card(), ch.x_card(), ch.x_card(), ch.x_card(), 0};
    validate(cfg.search);
}

void echo_config(std::ostream& out, const Channel& ch, const ScanConfig& cfg) {
    const auto& s = cfg.search;
    out << "# channel: x=" << ch.x_card() << " y1=" << ch.y1_card() << " y2=" << ch.y2_card()
        << "\n# cards: u=" << s.cards.u << " v=" << s.cards.v << " w1=" << s.cards.w1
        << " w2=" << s.cards.w2;
    if (s.cards.t >= 1)
        out << " t=" << s.cards.t << " deterministic_x=" << (s.deterministic_x ? 1 : 0);
    out << "\n# restarts=" << s.restarts << " max_iters=" << s.max_iters
        << " constraint_tol=" << format_real(s.constraint_tol) << " seed=" << s.seed
        << " jobs=" << s.jobs << "\n# sweep:";
    for (const auto& l : cfg.lambda_sweep) {
        out << " (";
        for (Eigen::Index i = 0; i < l.size(); ++i)
            out << (i ? "," : "") << format_real(l[i]);
        out << ")";
    }
    out << "\n";
}

std::string scan_csv(const RegionSample& sample, bool common) {
    std::ostringstream csv;
    csv << (common ? "lambda0,lambda1,lambda2,R0,R1,R2,residual_inf,seed"
                   : "lambda1,lambda2,R1,R2,residual_inf,seed")
        << "\n";
    for (const auto& p : sample.points) {
        for (Eigen::Index i = 0; i < p.lambda.size(); ++i)
            csv << format_real(p.lambda[i]) << ",";
        for (Eigen::Index i = 0; i < p.rate.size(); ++i) csv << format_real(p.rate[i]) << ",";
        csv << format_real(p.residual_inf) << "," << p.seed << "\n";
    }
    return csv.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << text;
}

void print_residual_table(std::ostream& out, const ConstraintResiduals& res) {
    for (const auto& e : res.entries)
        out << "  " << std::left << std::setw(56) << e.id << " lhs=" << format_real(e.lhs)
            << " rhs=" << format_real(e.rhs) << " residual=" << format_real(e.residual)
            << "\n";
    out << "residual norm_inf = " << format_real(res.norm_inf) << "\n";
}

// ---------------------------------------------------------------------------

int cmd_info(const std::string& channel_path, const std::string& scheme_path,
             std::ostream& out) {
    Channel ch = load_channel(channel_path);
    SchemeVariant scheme = load_scheme(scheme_path);
    if (std::holds_alternative<PrivateScheme>(scheme)) {
        JointDist joint = build_private_joint(std::get<PrivateScheme>(scheme), ch);
        Eigen::Vector2d rate = rate_point_private(joint);
        out << "scheme: private\n";
        out << "R1 = I(U;Y1|W1) = " << format_real(rate[0]) << "\n";
        out << "R2 = I(V;Y2|W2) = " << format_real(rate[1]) << "\n";
        print_residual_table(out, residuals_private(joint));
    } else {
        JointDist joint = build_common_joint(std::get<CommonScheme>(scheme), ch);
        Eigen::Vector3d rate = rate_point_common(joint);
        out << "scheme: common\n";
        out << "R0 = min{I(T;Y1|W1), I(T;Y2|W2)} = " << format_real(rate[0]) << "\n";
        out << "R1 = I(U;Y1|W1) = " << format_real(rate[1]) << "\n";
        out << "R2 = I(V;Y2|W2) = " << format_real(rate[2]) << "\n";
        print_residual_table(out, residuals_common(joint));
    }
    return kExitOk;
}

int cmd_scan(const std::string& channel_path, const std::string& config_path,
             const GlobalOverrides& global, std::ostream& out, std::ostream& err) {
    Channel ch = load_channel(channel_path);
    ScanConfig cfg = load_scan_config(config_path);
    apply_overrides(cfg, global, ch);
    echo_config(out, ch, cfg);

    auto start = std::chrono::steady_clock::now();
    RegionSample sample = scan_region(ch, cfg.search, cfg.lambda_sweep);
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    err << "scan: " << sample.points.size() << " feasible / " << sample.total_restarts
        << " restarts (" << sample.failed_restarts << " failed) in " << std::fixed
        << std::setprecision(2) << elapsed.count() << " s\n";

    std::string csv = scan_csv(sample, cfg.search.cards.t >= 1);
    out << csv;
    if (!global.out_path.empty()) write_file(global.out_path, csv);
    if (sample.points.empty()) {
        err << "scan: no feasible points found\n";
        return kExitResource;
    }
    return kExitOk;
}

int cmd_claim(const std::string& channel_path, const std::string& config_path,
              const std::string& which, const GlobalOverrides& global, std::ostream& out,
              std::ostream& err) {
    Channel ch = load_channel(channel_path);
    ScanConfig cfg = load_scan_config(config_path);
    apply_overrides(cfg, global, ch);
    NjMode mode = parse_mode(global.mode);
    bool want_common = which == "claim2";
    if (which != "claim1" && which != "claim2")
        throw ParseError("--which expects 'claim1' or 'claim2'");
    if (want_common != (cfg.search.cards.t >= 1))
        throw ParseError(want_common ? "claim2 needs a common-scheme config (cards.t >= 1)"
                                     : "claim1 needs a private-scheme config (no t card)");
    echo_config(out, ch, cfg);
    out << "# check: " << which << (want_common ? (mode == NjMode::kCorrected
                                                       ? " (corrected mode)"
                                                       : " (literal mode)")
                                                : "")
        << "\n";

    RegionSample sample = scan_region(ch, cfg.search, cfg.lambda_sweep);
    err << "claim: " << sample.points.size() << " feasible / " << sample.total_restarts
        << " restarts\n";
    if (sample.points.empty()) {
        err << "claim: no feasible points to check\n";
        return kExitResource;
    }

    ClaimTolerances tols;
    tols.constraint_tol = cfg.search.constraint_tol;
    std::ostringstream csv;
    csv << "index,min_slack,residual_inf,verdict\n";
    bool all_pass = true;
    double worst_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        const auto& point = sample.points[i];
        const auto& scheme = sample.schemes[static_cast<std::size_t>(point.scheme_index)];
        InclusionReport report =
            want_common ? claim_check(std::get<CommonScheme>(scheme), ch, mode, tols)
                        : claim_check(std::get<PrivateScheme>(scheme), ch, tols);
        all_pass = all_pass && report.pass;
        worst_slack = std::min(worst_slack, report.slacks.min_slack);
        out << "point " << i << ": rate=(";
        for (Eigen::Index k = 0; k < report.rate.size(); ++k)
            out << (k ? "," : "") << format_real(report.rate[k]);
        out << ") residual_inf=" << format_real(report.residual_inf)
            << " min_slack=" << format_real(report.slacks.min_slack)
            << (report.pass ? " PASS" : " FAIL") << "\n";
        if (!report.pass)
            for (const auto& entry : report.slacks.entries)
                if (entry.slack < -tols.membership_tol)
                    out << "    violated: " << entry.id
                        << " slack=" << format_real(entry.slack) << "\n";
        csv << i << "," << format_real(report.slacks.min_slack) << ","
            << format_real(report.residual_inf) << "," << (report.pass ? "pass" : "fail")
            << "\n";
    }
    out << "claim " << (all_pass ? "HOLDS" : "FALSIFIED") << " on " << sample.points.size()
        << " points; min slack = " << format_real(worst_slack) << "\n";
    if (!global.out_path.empty()) write_file(global.out_path, csv.str());
    return all_pass ? kExitOk : kExitClaimFalsified;
}

void print_verdict(std::ostream& out, const EntropySpace& space,
                   const ConstraintSet& constraints, const Verdict& verdict) {
    if (verdict.provable()) {
        out << "ShannonProvable (optimal value " << format_real(verdict.optimal_value)
            << ")\n";
        int used = 0;
        for (Eigen::Index i = 0; i < verdict.elemental_multipliers.size(); ++i)
            if (verdict.elemental_multipliers[i] > 1e-9) ++used;
        out << "  certificate: " << used << " elemental terms";
        for (Eigen::Index i = 0; i < verdict.constraint_multipliers.size(); ++i)
            if (std::abs(verdict.constraint_multipliers[i]) > 1e-9)
                out << "\n    " << format_real(verdict.constraint_multipliers[i]) << " * ["
                    << constraints.labels[static_cast<std::size_t>(i)] << "]";
        out << "\n";
        return;
    }
    out << "NotProvable (not Shannon-provable under the given constraints)\n";
    out << "  witness value: " << format_real(verdict.optimal_value) << "\n";
    out << "  witness entropy vector (nonzero coordinates):\n";
    for (Eigen::Index i = 0; i < verdict.witness.size(); ++i)
        if (std::abs(verdict.witness[i]) > 1e-9)
            out << "    H(" << space.render_mask(static_cast<std::uint32_t>(i + 1))
                << ") = " << format_real(verdict.witness[i]) << "\n";
}

int cmd_prove(const std::string& constraints_path, const std::string& target_text,
              const std::string& certify, std::ostream& out) {
    if (!certify.empty()) {
        Certification cert = [&] {
            if (certify == "claim1") return certify_claim1();
            if (certify == "claim1-ablation") return certify_claim1_ablation();
            if (certify == "claim1-exchange-ablation")
                return certify_claim1_exchange_ablation();
            throw ParseError("--certify expects claim1, claim1-ablation or "
                             "claim1-exchange-ablation");
        }();
        for (const auto& item : cert.items) {
            out << item.label << ": ";
            print_verdict(out, cert.space, cert.constraints, item.verdict);
        }
        out << (cert.all_provable ? "all targets ShannonProvable"
                                  : "some targets not Shannon-provable")
            << "\n";
        return cert.all_provable ? kExitOk : kExitNotProvable;
    }

    std::string constraints_text =
        constraints_path.empty() ? std::string() : read_text_file(constraints_path);
    ProverProblem problem = parse_prover_problem(constraints_text, target_text);
    out << "target: " << problem.target_text << "\n";
    out << "variables:";
    for (const auto& l : problem.space.labels()) out << " " << l;
    out << "\nconstraints: " << problem.constraints.equalities.size() << "\n";
    if (problem.target_kind == TargetKind::kEquality) {
        auto [fwd, bwd] = prove_equality(problem.space, problem.target, problem.constraints);
        out << ">= direction: ";
        print_verdict(out, problem.space, problem.constraints, fwd);
        out << "<= direction: ";
        print_verdict(out, problem.space, problem.constraints, bwd);
        bool ok = fwd.provable() && bwd.provable();
        out << (ok ? "equality certified" : "equality not certified") << "\n";
        return ok ? kExitOk : kExitNotProvable;
    }
    Verdict verdict = prove_nonneg(problem.space, problem.target, problem.constraints);
    print_verdict(out, problem.space, problem.constraints, verdict);
    return verdict.provable() ? kExitOk : kExitNotProvable;
}

int cmd_multiletter(const std::string& code_path, const std::string& channel_path,
                    std::optional<int> n_override, std::ostream& out) {
    Channel ch = load_channel(channel_path);
    BlockCode code = load_code(code_path);
    if (n_override && *n_override != code.n)
        throw ParseError("--n disagrees with the blocklength in the code file");

    bool all_pass = true;
    auto report = [&](const std::string& label, double deviation, double tol) {
        bool pass = deviation <= tol;
        all_pass = all_pass && pass;
        out << (pass ? "PASS " : "FAIL ") << label
            << "  (deviation " << format_real(deviation) << ")\n";
    };

    CodeJoint cj = code_joint(code, ch);
    double worst_memoryless = 0.0;
    for (double r : memoryless_residuals(code, ch))
        worst_memoryless = std::max(worst_memoryless, r);
    report("memorylessness I(Y1_i,Y2_i;rest|X_i) = 0", worst_memoryless, 1e-10);

    std::vector<Names> cond_sets = {{}, {"M1"}, {"M2"}, {"M1", "M2"}};
    if (cj.has_m0) {
        std::vector<Names> with_m0;
        for (const auto& k : cond_sets) {
            with_m0.push_back(k);
            Names plus = k;
            plus.push_back("M0");
            with_m0.push_back(plus);
        }
        cond_sets = std::move(with_m0);
    }
    double worst_csiszar = 0.0;
    for (const auto& k : cond_sets) {
        auto [lhs, rhs] = csiszar_check(cj, k);
        worst_csiszar = std::max(worst_csiszar, std::abs(lhs - rhs));
    }
    report("Csiszar sum exchange, all conditioning sets", worst_csiszar, 1e-10);

    auto [sum, endpoint] = telescope_check(cj);
    report("telescoping identity", std::abs(sum - endpoint), 1e-10);

    if (code.m0_card == 1) {
        SingleLetterResult single = identify_single_letter(code, ch);
        double worst = 0.0;
        for (int i = 0; i < 7; ++i)
            worst = std::max(worst,
                             std::abs(single.residuals.entries[static_cast<std::size_t>(i)]
                                          .residual -
                                      single.predicted[static_cast<std::size_t>(i)]));
        report("finite-n residual identities (7 constraints)", worst, 1e-10);
        double rate_dev = std::max(std::abs(single.rate[0] - single.code_rate[0]),
                                   std::abs(single.rate[1] - single.code_rate[1]));
        report("identified rate matches per-position sums", rate_dev, 1e-10);
        auto zero_error = is_zero_error(code, ch);
        out << "zero-error receivers: (" << (zero_error.first ? "true" : "false") << ", "
            << (zero_error.second ? "true" : "false") << ")\n";
        if (zero_error.first && zero_error.second)
            report("zero-error code satisfies every constraint",
                   single.residuals.norm_inf, 1e-10);
    } else {
        out << "note: single-letter identification skipped (common-message code)\n";
    }
    out << (all_pass ? "all identities hold" : "IDENTITY FAILURE") << "\n";
    return all_pass ? kExitOk : 1;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"outer-bound computations for two-receiver broadcast channels"};
    app.require_subcommand(1);

    GlobalOverrides global;
    std::string channel_path, scheme_path, config_path, code_path;
    std::string which = "claim1", constraints_path, target_text, target_file, certify;
    std::optional<int> n_override;

    auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--seed", global.seed, "override the config seed");
        sub->add_option("--tol", global.tol, "override the constraint tolerance (bits)");
        sub->add_option("--jobs", global.jobs, "parallel restart workers");
        sub->add_option("--cards", global.cards, "override cards u,v,w1,w2[,t]");
        sub->add_option("--mode", global.mode,
                        "New-Jersey typo policy: corrected (default) or literal");
        if (with_out) sub->add_option("--out", global.out_path, "write CSV to this file");
    };

    CLI::App* info = app.add_subcommand("info", "rate terms and residuals of a scheme");
    info->add_option("--channel", channel_path)->required();
    info->add_option("--scheme", scheme_path)->required();
    add_common(info, false);

    CLI::App* scan = app.add_subcommand("scan", "trace the constrained rate region");
    scan->add_option("--channel", channel_path)->required();
    scan->add_option("--config", config_path)->required();
    add_common(scan, true);

    CLI::App* claim = app.add_subcommand("claim", "empirical inclusion check");
    claim->add_option("--channel", channel_path)->required();
    claim->add_option("--config", config_path)->required();
    claim->add_option("--which", which, "claim1 (private) or claim2 (common)");
    add_common(claim, true);

    CLI::App* prove = app.add_subcommand("prove", "LP-certify an information inequality");
    prove->add_option("--constraints", constraints_path, "equality constraints file");
    prove->add_option("--target", target_text, "target statement, e.g. 'I(A;B) >= 0'");
    prove->add_option("--target-file", target_file, "file holding the target statement");
    prove->add_option("--certify", certify,
                      "bundled fixture: claim1, claim1-ablation, claim1-exchange-ablation");

    CLI::App* multi = app.add_subcommand("multiletter", "finite-blocklength identity checks");
    multi->add_option("--code", code_path)->required();
    multi->add_option("--channel", channel_path)->required();
    multi->add_option("--n", n_override, "expected blocklength (validated against the code)");

    std::vector<const char*> argv;
    argv.push_back("bcbound");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitParse;
    }

    try {
        if (info->parsed()) return cmd_info(channel_path, scheme_path, out);
        if (scan->parsed()) return cmd_scan(channel_path, config_path, global, out, err);
        if (claim->parsed())
            return cmd_claim(channel_path, config_path, which, global, out, err);
        if (prove->parsed()) {
            if (certify.empty() && target_text.empty() && target_file.empty())
                throw ParseError("prove needs --target, --target-file or --certify");
            if (!target_file.empty()) target_text = read_text_file(target_file);
            return cmd_prove(constraints_path, target_text, certify, out);
        }
        if (multi->parsed()) return cmd_multiletter(code_path, channel_path, n_override, out);
        err << "no subcommand\n";
        return kExitParse;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const SupportCapExceeded& e) {
        err << "error: " << e.what() << "\n";
        return kExitResource;
    } catch (const LpFailure& e) {
        err << "error: LP numerical failure: " << e.what() << "\n";
        return kExitResource;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace bcbound
