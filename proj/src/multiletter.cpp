#include "bcbound/multiletter.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bcbound {

namespace {

std::string seq_name(const char* base, int i) { return std::string(base) + std::to_string(i); }

Names y1_range(int from, int to) {  // inclusive 1-based range, empty if from > to
    Names out;
    for (int i = from; i <= to; ++i) out.push_back(seq_name("Y1_", i));
    return out;
}

Names y2_range(int from, int to) {
    Names out;
    for (int i = from; i <= to; ++i) out.push_back(seq_name("Y2_", i));
    return out;
}

std::size_t ipow(std::size_t base, int exp) {
    std::size_t out = 1;
    while (exp-- > 0) out *= base;
    return out;
}

int flat_message(const BlockCode& code, int m0, int m1, int m2) {
    return (m0 * code.m1_card + m1) * code.m2_card + m2;
}

}  // namespace

void validate(const BlockCode& code, const Channel& ch) {
    if (code.n < 1) throw std::invalid_argument("blocklength must be >= 1");
    if (code.n > kMaxBlocklength)
        throw SupportCapExceeded("blocklength " + std::to_string(code.n) +
                                 " exceeds the cap of " + std::to_string(kMaxBlocklength));
    if (code.m0_card < 1 || code.m1_card < 1 || code.m2_card < 1)
        throw std::invalid_argument("message cardinalities must be >= 1");
    std::size_t messages = static_cast<std::size_t>(code.m0_card) * code.m1_card * code.m2_card;
    if (code.encoder.size() != messages)
        throw std::invalid_argument("encoder table has " + std::to_string(code.encoder.size()) +
                                    " rows, expected " + std::to_string(messages));
    for (const auto& seq : code.encoder) {
        if (static_cast<int>(seq.size()) != code.n)
            throw std::invalid_argument("encoder sequence length differs from blocklength");
        for (int x : seq)
            if (x < 0 || x >= ch.x_card())
                throw std::invalid_argument("encoder symbol outside channel input alphabet");
    }
}

CodeJoint code_joint(const BlockCode& code, const Channel& ch, std::size_t support_cap) {
    validate(code, ch);
    const int n = code.n;
    const bool has_m0 = code.m0_card > 1;

    std::vector<VariableSpec> vars;
    if (has_m0) vars.push_back({"M0", code.m0_card});
    vars.push_back({"M1", code.m1_card});
    vars.push_back({"M2", code.m2_card});
    for (int i = 1; i <= n; ++i) vars.push_back({seq_name("Y1_", i), ch.y1_card()});
    for (int i = 1; i <= n; ++i) vars.push_back({seq_name("Y2_", i), ch.y2_card()});

    std::size_t y1_block = ipow(static_cast<std::size_t>(ch.y1_card()), n);
    std::size_t y2_block = ipow(static_cast<std::size_t>(ch.y2_card()), n);
    std::size_t messages = static_cast<std::size_t>(code.m0_card) * code.m1_card * code.m2_card;
    std::size_t total = messages * y1_block * y2_block;
    if (total > support_cap)
        throw SupportCapExceeded("code joint needs " + std::to_string(total) + " entries");

    double msg_mass = 1.0 / static_cast<double>(messages);
    Eigen::ArrayXd mass(static_cast<Eigen::Index>(total));
    std::vector<int> y1(static_cast<std::size_t>(n)), y2(static_cast<std::size_t>(n));
    Eigen::Index z = 0;
    for (int m0 = 0; m0 < code.m0_card; ++m0)
        for (int m1 = 0; m1 < code.m1_card; ++m1)
            for (int m2 = 0; m2 < code.m2_card; ++m2) {
                const auto& x = code.encoder[static_cast<std::size_t>(
                    flat_message(code, m0, m1, m2))];
                for (std::size_t a = 0; a < y1_block; ++a) {
                    std::size_t rest = a;
                    for (int i = n - 1; i >= 0; --i) {
                        y1[static_cast<std::size_t>(i)] =
                            static_cast<int>(rest % ch.y1_card());
                        rest /= ch.y1_card();
                    }
                    for (std::size_t b = 0; b < y2_block; ++b) {
                        rest = b;
                        for (int i = n - 1; i >= 0; --i) {
                            y2[static_cast<std::size_t>(i)] =
                                static_cast<int>(rest % ch.y2_card());
                            rest /= ch.y2_card();
                        }
                        double p = msg_mass;
                        for (int i = 0; i < n; ++i)
                            p *= ch(x[static_cast<std::size_t>(i)],
                                    y1[static_cast<std::size_t>(i)],
                                    y2[static_cast<std::size_t>(i)]);
                        mass[z++] = p;
                    }
                }
            }
    return CodeJoint{n, has_m0,
                     make_normalized_joint(std::move(vars), std::move(mass), support_cap)};
}

std::vector<double> memoryless_residuals(const BlockCode& code, const Channel& ch,
                                         std::size_t support_cap) {
    validate(code, ch);
    const int n = code.n;
    const bool has_m0 = code.m0_card > 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int pos = 1; pos <= n; ++pos) {
        // Extend the code joint with X_pos, which is a function of the
        // messages, then test I(Y1_pos, Y2_pos ; rest | X_pos).
        std::vector<VariableSpec> vars;
        if (has_m0) vars.push_back({"M0", code.m0_card});
        vars.push_back({"M1", code.m1_card});
        vars.push_back({"M2", code.m2_card});
        vars.push_back({"X", ch.x_card()});
        for (int i = 1; i <= n; ++i) vars.push_back({seq_name("Y1_", i), ch.y1_card()});
        for (int i = 1; i <= n; ++i) vars.push_back({seq_name("Y2_", i), ch.y2_card()});

        std::size_t y1_block = ipow(static_cast<std::size_t>(ch.y1_card()), n);
        std::size_t y2_block = ipow(static_cast<std::size_t>(ch.y2_card()), n);
        std::size_t messages =
            static_cast<std::size_t>(code.m0_card) * code.m1_card * code.m2_card;
        std::size_t total = messages * static_cast<std::size_t>(ch.x_card()) * y1_block * y2_block;
        if (total > support_cap)
            throw SupportCapExceeded("extended code joint needs " + std::to_string(total) +
                                     " entries");
        Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(total));
        double msg_mass = 1.0 / static_cast<double>(messages);
        std::vector<int> y1(static_cast<std::size_t>(n)), y2(static_cast<std::size_t>(n));
        for (int m0 = 0; m0 < code.m0_card; ++m0)
            for (int m1 = 0; m1 < code.m1_card; ++m1)
                for (int m2 = 0; m2 < code.m2_card; ++m2) {
                    const auto& x = code.encoder[static_cast<std::size_t>(
                        flat_message(code, m0, m1, m2))];
                    std::size_t msg = static_cast<std::size_t>(flat_message(code, m0, m1, m2));
                    std::size_t x_here =
                        static_cast<std::size_t>(x[static_cast<std::size_t>(pos - 1)]);
                    for (std::size_t a = 0; a < y1_block; ++a) {
                        std::size_t rest = a;
                        for (int i = n - 1; i >= 0; --i) {
                            y1[static_cast<std::size_t>(i)] =
                                static_cast<int>(rest % ch.y1_card());
                            rest /= ch.y1_card();
                        }
                        for (std::size_t b = 0; b < y2_block; ++b) {
                            rest = b;
                            for (int i = n - 1; i >= 0; --i) {
                                y2[static_cast<std::size_t>(i)] =
                                    static_cast<int>(rest % ch.y2_card());
                                rest /= ch.y2_card();
                            }
                            double p = msg_mass;
                            for (int i = 0; i < n; ++i)
                                p *= ch(x[static_cast<std::size_t>(i)],
                                        y1[static_cast<std::size_t>(i)],
                                        y2[static_cast<std::size_t>(i)]);
                            std::size_t z =
                                ((msg * static_cast<std::size_t>(ch.x_card()) + x_here) *
                                     y1_block +
                                 a) *
                                    y2_block +
                                b;
                            mass[static_cast<Eigen::Index>(z)] += p;
                        }
                    }
                }
        JointDist dist = make_normalized_joint(std::move(vars), std::move(mass), support_cap);
        Names rest;
        if (has_m0) rest.push_back("M0");
        rest.push_back("M1");
        rest.push_back("M2");
        for (int i = 1; i <= n; ++i)
            if (i != pos) rest.push_back(seq_name("Y1_", i));
        for (int i = 1; i <= n; ++i)
            if (i != pos) rest.push_back(seq_name("Y2_", i));
        out.push_back(cond_mutual_info(dist, {seq_name("Y1_", pos), seq_name("Y2_", pos)},
                                       rest, {"X"}));
    }
    return out;
}

std::pair<double, double> csiszar_check(const CodeJoint& joint, const Names& k) {
    const int n = joint.n;
    double lhs = 0.0, rhs = 0.0;
    for (int i = 1; i <= n; ++i) {
        Names suffix = y2_range(i + 1, n);
        Names prefix = y1_range(1, i - 1);
        if (!suffix.empty()) {
            Names cond = prefix;
            cond.insert(cond.end(), k.begin(), k.end());
            lhs += cond_mutual_info(joint.dist, suffix, {seq_name("Y1_", i)}, cond);
        }
        if (!prefix.empty()) {
            Names cond = suffix;
            cond.insert(cond.end(), k.begin(), k.end());
            rhs += cond_mutual_info(joint.dist, prefix, {seq_name("Y2_", i)}, cond);
        }
    }
    return {lhs, rhs};
}

std::pair<double, double> telescope_check(const CodeJoint& joint) {
    const int n = joint.n;
    double sum = 0.0;
    for (int i = 1; i <= n; ++i) {
        Names plus = y1_range(1, i);
        Names plus_tail = y2_range(i + 1, n);
        plus.insert(plus.end(), plus_tail.begin(), plus_tail.end());
        Names minus = y1_range(1, i - 1);
        Names minus_tail = y2_range(i, n);
        minus.insert(minus.end(), minus_tail.begin(), minus_tail.end());
        sum += cond_mutual_info(joint.dist, {"M1"}, {"M2"}, plus) -
               cond_mutual_info(joint.dist, {"M1"}, {"M2"}, minus);
    }
    double endpoint = cond_mutual_info(joint.dist, {"M1"}, {"M2"}, y1_range(1, n)) -
                      cond_mutual_info(joint.dist, {"M1"}, {"M2"}, y2_range(1, n));
    return {sum, endpoint};
}

SingleLetterResult identify_single_letter(const BlockCode& code, const Channel& ch,
                                          std::size_t support_cap) {
    validate(code, ch);
    if (code.m0_card != 1)
        throw std::invalid_argument("single-letter identification expects a private code");
    const int n = code.n;

    // Position-tagged prefix/suffix alphabets, flattened: the tag q occupies
    // offset ranges of size |Y1|^(q-1) and |Y2|^(n-q).
    std::vector<std::size_t> w1_offset(static_cast<std::size_t>(n) + 1, 0);
    std::vector<std::size_t> w2_offset(static_cast<std::size_t>(n) + 1, 0);
    std::size_t w1_card = 0, w2_card = 0;
    for (int q = 1; q <= n; ++q) {
        w1_offset[static_cast<std::size_t>(q)] = w1_card;
        w2_offset[static_cast<std::size_t>(q)] = w2_card;
        w1_card += ipow(static_cast<std::size_t>(ch.y1_card()), q - 1);
        w2_card += ipow(static_cast<std::size_t>(ch.y2_card()), n - q);
    }

    std::size_t total = static_cast<std::size_t>(code.m1_card) * code.m2_card * w1_card *
                        w2_card * static_cast<std::size_t>(ch.x_card()) *
                        static_cast<std::size_t>(ch.y1_card()) *
                        static_cast<std::size_t>(ch.y2_card());
    if (total > support_cap)
        throw SupportCapExceeded("identified joint needs " + std::to_string(total) +
                                 " entries");

    std::vector<VariableSpec> vars = {
        {"U", code.m1_card},  {"V", code.m2_card},        {"W1", static_cast<int>(w1_card)},
        {"W2", static_cast<int>(w2_card)}, {"X", ch.x_card()}, {"Y1", ch.y1_card()},
        {"Y2", ch.y2_card()}};
    Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(total));

    std::size_t y1_block = ipow(static_cast<std::size_t>(ch.y1_card()), n);
    std::size_t y2_block = ipow(static_cast<std::size_t>(ch.y2_card()), n);
    double base = 1.0 / (static_cast<double>(n) * code.m1_card * code.m2_card);
    std::vector<int> y1(static_cast<std::size_t>(n)), y2(static_cast<std::size_t>(n));
    for (int q = 1; q <= n; ++q)
        for (int m1 = 0; m1 < code.m1_card; ++m1)
            for (int m2 = 0; m2 < code.m2_card; ++m2) {
                const auto& x = code.encoder[static_cast<std::size_t>(
                    flat_message(code, 0, m1, m2))];
                for (std::size_t a = 0; a < y1_block; ++a) {
                    std::size_t rest = a;
                    for (int i = n - 1; i >= 0; --i) {
                        y1[static_cast<std::size_t>(i)] = static_cast<int>(rest % ch.y1_card());
                        rest /= ch.y1_card();
                    }
                    for (std::size_t b = 0; b < y2_block; ++b) {
                        rest = b;
                        for (int i = n - 1; i >= 0; --i) {
                            y2[static_cast<std::size_t>(i)] =
                                static_cast<int>(rest % ch.y2_card());
                            rest /= ch.y2_card();
                        }
                        double p = base;
                        for (int i = 0; i < n; ++i)
                            p *= ch(x[static_cast<std::size_t>(i)],
                                    y1[static_cast<std::size_t>(i)],
                                    y2[static_cast<std::size_t>(i)]);
                        if (p == 0.0) continue;
                        std::size_t prefix = 0;
                        for (int i = 0; i < q - 1; ++i)
                            prefix = prefix * static_cast<std::size_t>(ch.y1_card()) +
                                     static_cast<std::size_t>(y1[static_cast<std::size_t>(i)]);
                        std::size_t w1 = w1_offset[static_cast<std::size_t>(q)] + prefix;
                        std::size_t suffix = 0;
                        for (int i = q; i < n; ++i)
                            suffix = suffix * static_cast<std::size_t>(ch.y2_card()) +
                                     static_cast<std::size_t>(y2[static_cast<std::size_t>(i)]);
                        std::size_t w2 = w2_offset[static_cast<std::size_t>(q)] + suffix;
                        std::size_t z = static_cast<std::size_t>(m1);
                        z = z * static_cast<std::size_t>(code.m2_card) +
                            static_cast<std::size_t>(m2);
                        z = z * w1_card + w1;
                        z = z * w2_card + w2;
                        z = z * static_cast<std::size_t>(ch.x_card()) +
                            static_cast<std::size_t>(x[static_cast<std::size_t>(q - 1)]);
                        z = z * static_cast<std::size_t>(ch.y1_card()) +
                            static_cast<std::size_t>(y1[static_cast<std::size_t>(q - 1)]);
                        z = z * static_cast<std::size_t>(ch.y2_card()) +
                            static_cast<std::size_t>(y2[static_cast<std::size_t>(q - 1)]);
                        mass[static_cast<Eigen::Index>(z)] += p;
                    }
                }
            }

    SingleLetterResult result{make_normalized_joint(std::move(vars), std::move(mass),
                                                    support_cap),
                              {}, {}, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
    result.residuals = residuals_private(result.joint);
    result.rate = rate_point_private(result.joint);

    // Exact finite-n predictions evaluated on the code joint.
    CodeJoint cj = code_joint(code, ch, support_cap);
    double i1 = cond_mutual_info(cj.dist, {"M1"}, {"M2"}, y1_range(1, n));
    double i2 = cond_mutual_info(cj.dist, {"M1"}, {"M2"}, y2_range(1, n));
    result.predicted = {-i1 / n, -i2 / n, (i1 - i2) / n, 0.0, 0.0, 0.0, 0.0};

    double fwd = 0.0, bwd = 0.0;
    for (int i = 1; i <= n; ++i) {
        fwd += cond_mutual_info(cj.dist, {"M1"}, {seq_name("Y1_", i)}, y1_range(1, i - 1));
        bwd += cond_mutual_info(cj.dist, {"M2"}, {seq_name("Y2_", i)}, y2_range(i + 1, n));
    }
    result.code_rate = {fwd / n, bwd / n};
    return result;
}

std::pair<bool, bool> is_zero_error(const BlockCode& code, const Channel& ch,
                                    std::size_t support_cap) {
    CodeJoint cj = code_joint(code, ch, support_cap);
    const int n = cj.n;
    Names m1y = y1_range(1, n);
    m1y.push_back("M1");
    Names m2y = y2_range(1, n);
    m2y.push_back("M2");
    double h1 = entropy(cj.dist, m1y) - entropy(cj.dist, y1_range(1, n));
    double h2 = entropy(cj.dist, m2y) - entropy(cj.dist, y2_range(1, n));
    return {h1 <= 1e-10, h2 <= 1e-10};
}

}  // namespace bcbound
