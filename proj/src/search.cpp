#include "bcbound/search.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <random>
#include <thread>

namespace bcbound {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::ArrayXd sample_simplex(Eigen::Index slices, Eigen::Index symbols,
                              std::mt19937_64& rng) {
    Eigen::ArrayXd table(slices * symbols);
    for (Eigen::Index s = 0; s < slices; ++s) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < symbols; ++i) {
            table[s * symbols + i] = uniform01(rng) + 1e-6;
            sum += table[s * symbols + i];
        }
        for (Eigen::Index i = 0; i < symbols; ++i) table[s * symbols + i] /= sum;
    }
    return table;
}

constexpr double kInvLn2 = 1.4426950408889634;  // 1 / ln 2

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t sweep_index,
                          std::uint64_t restart_index) {
    return splitmix64(splitmix64(base ^ 0x5bf03635u) ^
                      splitmix64(sweep_index * 0x100000001B3ull + restart_index));
}

void validate(const SearchConfig& cfg) {
    if (cfg.restarts < 1) throw std::invalid_argument("config: restarts must be >= 1");
    if (cfg.max_iters < 1) throw std::invalid_argument("config: max_iters must be >= 1");
    if (!(cfg.constraint_tol > 0.0))
        throw std::invalid_argument("config: constraint_tol must be positive");
    if (cfg.penalty_schedule.empty())
        throw std::invalid_argument("config: penalty schedule must be nonempty");
    for (double w : cfg.penalty_schedule)
        if (!(w > 0.0)) throw std::invalid_argument("config: penalty weights must be positive");
    for (Eigen::Index i = 0; i < cfg.rate_weights.size(); ++i)
        if (cfg.rate_weights[i] < 0.0)
            throw std::invalid_argument("config: rate weights must be nonnegative");
    if (cfg.jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
}

SchemeVariant sample_scheme(const SchemeCards& cards, int x_card, std::uint64_t seed,
                            bool deterministic_x) {
    std::mt19937_64 rng(seed);
    if (cards.t >= 1) {
        CommonScheme s;
        s.cards = cards;
        s.x_card = x_card;
        s.p_t = sample_simplex(1, cards.t, rng);
        s.p_u = sample_simplex(1, cards.u, rng);
        s.p_v = sample_simplex(1, cards.v, rng);
        Eigen::Index tuv = static_cast<Eigen::Index>(cards.t) * cards.u * cards.v;
        Eigen::Index w = static_cast<Eigen::Index>(cards.w1) * cards.w2;
        s.p_w_given_tuv = sample_simplex(tuv, w, rng);
        s.deterministic_x = deterministic_x;
        if (deterministic_x) {
            s.x_map.resize(static_cast<std::size_t>(tuv * w));
            for (auto& x : s.x_map)
                x = static_cast<int>(rng() % static_cast<std::uint64_t>(x_card));
        } else {
            s.p_x_given_tuvw = sample_simplex(tuv * w, x_card, rng);
        }
        return s;
    }
    PrivateScheme s;
    s.cards = cards;
    s.x_card = x_card;
    s.p_u = sample_simplex(1, cards.u, rng);
    s.p_v = sample_simplex(1, cards.v, rng);
    Eigen::Index uv = static_cast<Eigen::Index>(cards.u) * cards.v;
    Eigen::Index w = static_cast<Eigen::Index>(cards.w1) * cards.w2;
    s.p_w_given_uv = sample_simplex(uv, w, rng);
    s.p_x_given_uvw = sample_simplex(uv * w, x_card, rng);
    return s;
}

// ----------------------------------------------------------------------------
// Parameter space

ParamSpace make_param_space(const SchemeCards& cards, int x_card, bool deterministic_x,
                            std::vector<int> x_map) {
    ParamSpace ps;
    ps.cards = cards;
    ps.x_card = x_card;
    ps.common = cards.t >= 1;
    ps.deterministic_x = ps.common && deterministic_x;
    ps.x_map = std::move(x_map);

    // Joint variable order matches the joint builders.
    if (ps.common)
        ps.joint_cards = {cards.t, cards.u, cards.v, cards.w1, cards.w2, x_card, 0, 0};
    else
        ps.joint_cards = {cards.u, cards.v, cards.w1, cards.w2, x_card, 0, 0};
    // Output cardinalities are channel-dependent; filled by the objective.

    auto add_block = [&](Eigen::Index slices, Eigen::Index symbols, std::uint32_t slice_mask,
                         std::uint32_t symbol_mask) {
        FactorBlock b;
        b.offset = ps.dim;
        b.slices = slices;
        b.symbols = symbols;
        b.slice_mask = slice_mask;
        b.symbol_mask = symbol_mask;
        ps.blocks.push_back(b);
        ps.dim += slices * symbols;
    };

    Eigen::Index w = static_cast<Eigen::Index>(cards.w1) * cards.w2;
    if (ps.common) {
        // Variables: T=0, U=1, V=2, W1=3, W2=4, X=5.
        Eigen::Index tuv = static_cast<Eigen::Index>(cards.t) * cards.u * cards.v;
        add_block(1, cards.t, 0u, 1u << 0);
        add_block(1, cards.u, 0u, 1u << 1);
        add_block(1, cards.v, 0u, 1u << 2);
        add_block(tuv, w, 0b111u, (1u << 3) | (1u << 4));
        if (!ps.deterministic_x) add_block(tuv * w, x_card, 0b11111u, 1u << 5);
    } else {
        // Variables: U=0, V=1, W1=2, W2=3, X=4.
        Eigen::Index uv = static_cast<Eigen::Index>(cards.u) * cards.v;
        add_block(1, cards.u, 0u, 1u << 0);
        add_block(1, cards.v, 0u, 1u << 1);
        add_block(uv, w, 0b11u, (1u << 2) | (1u << 3));
        add_block(uv * w, x_card, 0b1111u, 1u << 4);
    }
    return ps;
}

ParamSpace param_space_for(const SchemeVariant& scheme) {
    if (std::holds_alternative<CommonScheme>(scheme)) {
        const auto& s = std::get<CommonScheme>(scheme);
        return make_param_space(s.cards, s.x_card, s.deterministic_x, s.x_map);
    }
    const auto& s = std::get<PrivateScheme>(scheme);
    return make_param_space(s.cards, s.x_card, false);
}

namespace {

Eigen::VectorXd stacked_logits(std::initializer_list<const Eigen::ArrayXd*> tables,
                               Eigen::Index dim) {
    Eigen::VectorXd logits(dim);
    Eigen::Index at = 0;
    for (const Eigen::ArrayXd* t : tables) {
        for (Eigen::Index i = 0; i < t->size(); ++i)
            logits[at++] = std::log(std::max((*t)[i], 1e-30));
    }
    return logits;
}

Eigen::ArrayXd softmax_table(const Eigen::VectorXd& logits, const FactorBlock& b) {
    Eigen::ArrayXd table(b.slices * b.symbols);
    for (Eigen::Index s = 0; s < b.slices; ++s) {
        Eigen::Index at = b.offset + s * b.symbols;
        double peak = logits[at];
        for (Eigen::Index i = 1; i < b.symbols; ++i) peak = std::max(peak, logits[at + i]);
        double sum = 0.0;
        for (Eigen::Index i = 0; i < b.symbols; ++i) {
            table[s * b.symbols + i] = std::exp(logits[at + i] - peak);
            sum += table[s * b.symbols + i];
        }
        for (Eigen::Index i = 0; i < b.symbols; ++i) table[s * b.symbols + i] /= sum;
    }
    return table;
}

}  // namespace

Eigen::VectorXd logits_of(const ParamSpace& space, const SchemeVariant& scheme) {
    if (space.common) {
        const auto& s = std::get<CommonScheme>(scheme);
        if (space.deterministic_x)
            return stacked_logits({&s.p_t, &s.p_u, &s.p_v, &s.p_w_given_tuv}, space.dim);
        return stacked_logits({&s.p_t, &s.p_u, &s.p_v, &s.p_w_given_tuv, &s.p_x_given_tuvw},
                              space.dim);
    }
    const auto& s = std::get<PrivateScheme>(scheme);
    return stacked_logits({&s.p_u, &s.p_v, &s.p_w_given_uv, &s.p_x_given_uvw}, space.dim);
}

SchemeVariant scheme_of(const ParamSpace& space, const Eigen::VectorXd& logits) {
    if (space.common) {
        CommonScheme s;
        s.cards = space.cards;
        s.x_card = space.x_card;
        s.p_t = softmax_table(logits, space.blocks[0]);
        s.p_u = softmax_table(logits, space.blocks[1]);
        s.p_v = softmax_table(logits, space.blocks[2]);
        s.p_w_given_tuv = softmax_table(logits, space.blocks[3]);
        s.deterministic_x = space.deterministic_x;
        if (space.deterministic_x)
            s.x_map = space.x_map;
        else
            s.p_x_given_tuvw = softmax_table(logits, space.blocks[4]);
        return s;
    }
    PrivateScheme s;
    s.cards = space.cards;
    s.x_card = space.x_card;
    s.p_u = softmax_table(logits, space.blocks[0]);
    s.p_v = softmax_table(logits, space.blocks[1]);
    s.p_w_given_uv = softmax_table(logits, space.blocks[2]);
    s.p_x_given_uvw = softmax_table(logits, space.blocks[3]);
    return s;
}

// ----------------------------------------------------------------------------
// Objective

SchemeObjective::SchemeObjective(ParamSpace space, Channel channel)
    : space_(std::move(space)), channel_(std::move(channel)), common_(space_.common) {
    // Fill output cardinalities now that the channel is known.
    int base = common_ ? 6 : 5;
    space_.joint_cards[static_cast<std::size_t>(base)] = channel_.y1_card();
    space_.joint_cards[static_cast<std::size_t>(base) + 1] = channel_.y2_card();

    const auto& constraints = common_ ? common_constraints() : private_constraints();
    constraint_terms_.reserve(constraints.size());
    for (const auto& c : constraints) {
        std::vector<Term> terms;
        add_expr(terms, c.lhs, 1.0);
        add_expr(terms, c.rhs, -1.0);
        constraint_terms_.push_back(std::move(terms));
    }
    auto add_rate = [&](const Names& a, const Names& b, const Names& c) {
        std::vector<Term> terms;
        add_expr(terms, CmiSpec{a, b, c}, 1.0);
        rate_terms_.push_back(std::move(terms));
    };
    if (common_) {
        add_rate({"T"}, {"Y1"}, {"W1"});
        add_rate({"T"}, {"Y2"}, {"W2"});
    }
    add_rate({"U"}, {"Y1"}, {"W1"});
    add_rate({"V"}, {"Y2"}, {"W2"});
}

int SchemeObjective::mask_index(std::uint32_t mask) {
    for (std::size_t i = 0; i < masks_.size(); ++i)
        if (masks_[i] == mask) return static_cast<int>(i);
    masks_.push_back(mask);
    return static_cast<int>(masks_.size()) - 1;
}

void SchemeObjective::add_expr(std::vector<Term>& terms, const CmiSpec& cmi, double sign) {
    auto name_bit = [&](const std::string& n) -> std::uint32_t {
        static const Names private_order = {"U", "V", "W1", "W2", "X", "Y1", "Y2"};
        static const Names common_order = {"T", "U", "V", "W1", "W2", "X", "Y1", "Y2"};
        const Names& order = common_ ? common_order : private_order;
        for (std::size_t i = 0; i < order.size(); ++i)
            if (order[i] == n) return 1u << i;
        throw std::invalid_argument("unknown scheme variable '" + n + "'");
    };
    std::uint32_t ma = 0, mb = 0, mc = 0;
    for (const auto& n : cmi.a) ma |= name_bit(n);
    for (const auto& n : cmi.b) mb |= name_bit(n);
    for (const auto& n : cmi.c) mc |= name_bit(n);
    auto push = [&](std::uint32_t mask, double coeff) {
        if (mask == 0) return;
        terms.push_back({mask_index(mask), sign * coeff});
    };
    push(ma | mc, 1.0);
    push(mb | mc, 1.0);
    push(ma | mb | mc, -1.0);
    push(mc, -1.0);
}

namespace {

double entropy_bits(const Eigen::ArrayXd& marginal) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < marginal.size(); ++i)
        if (marginal[i] > 0.0) h -= marginal[i] * std::log2(marginal[i]);
    return h;
}

}  // namespace

Eigen::VectorXd SchemeObjective::residual_vector(const Eigen::VectorXd& logits) const {
    SchemeVariant scheme = scheme_of(space_, logits);
    JointDist joint = common_ ? build_common_joint(std::get<CommonScheme>(scheme), channel_)
                              : build_private_joint(std::get<PrivateScheme>(scheme), channel_);
    std::vector<double> h(masks_.size());
    for (std::size_t m = 0; m < masks_.size(); ++m) {
        std::vector<int> kept;
        for (int v = 0; v < joint.variable_count(); ++v)
            if (masks_[m] & (1u << v)) kept.push_back(v);
        h[m] = entropy_bits(marginal_mass(joint, kept));
    }
    Eigen::VectorXd r(constraint_terms_.size());
    for (std::size_t c = 0; c < constraint_terms_.size(); ++c) {
        double value = 0.0;
        for (const auto& t : constraint_terms_[c])
            value += t.coeff * h[static_cast<std::size_t>(t.mask_index)];
        r[static_cast<Eigen::Index>(c)] = value;
    }
    return r;
}

double SchemeObjective::residual_inf(const Eigen::VectorXd& logits) const {
    Eigen::VectorXd r = residual_vector(logits);
    return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

Eigen::VectorXd SchemeObjective::rate_point(const Eigen::VectorXd& logits) const {
    SchemeVariant scheme = scheme_of(space_, logits);
    JointDist joint = common_ ? build_common_joint(std::get<CommonScheme>(scheme), channel_)
                              : build_private_joint(std::get<PrivateScheme>(scheme), channel_);
    if (common_) return rate_point_common(joint);
    return rate_point_private(joint);
}

double SchemeObjective::value(const Eigen::VectorXd& logits, const Eigen::VectorXd& lambda,
                              double penalty_weight, Eigen::VectorXd* grad) const {
    SchemeVariant scheme = scheme_of(space_, logits);
    JointDist joint = common_ ? build_common_joint(std::get<CommonScheme>(scheme), channel_)
                              : build_private_joint(std::get<PrivateScheme>(scheme), channel_);
    const Eigen::ArrayXd& p = joint.mass();
    const int vars = joint.variable_count();
    const std::size_t nm = masks_.size();

    // Marginals and entropies for every tracked subset.
    std::vector<Eigen::ArrayXd> marg(nm);
    std::vector<double> h(nm);
    for (std::size_t m = 0; m < nm; ++m) {
        std::vector<int> kept;
        for (int v = 0; v < vars; ++v)
            if (masks_[m] & (1u << v)) kept.push_back(v);
        marg[m] = marginal_mass(joint, kept);
        h[m] = entropy_bits(marg[m]);
    }

    Eigen::VectorXd residuals(constraint_terms_.size());
    for (std::size_t c = 0; c < constraint_terms_.size(); ++c) {
        double v = 0.0;
        for (const auto& t : constraint_terms_[c])
            v += t.coeff * h[static_cast<std::size_t>(t.mask_index)];
        residuals[static_cast<Eigen::Index>(c)] = v;
    }
    std::vector<double> rate_component(rate_terms_.size());
    for (std::size_t k = 0; k < rate_terms_.size(); ++k) {
        double v = 0.0;
        for (const auto& t : rate_terms_[k])
            v += t.coeff * h[static_cast<std::size_t>(t.mask_index)];
        rate_component[k] = v;
    }

    double value = penalty_weight * residuals.squaredNorm();
    // Active rate components: for common schemes the first weight applies to
    // the smaller of the two T branches (subgradient at the kink).
    std::vector<double> rate_weight(rate_terms_.size(), 0.0);
    if (lambda.size() > 0) {
        if (common_) {
            int active_t = rate_component[0] <= rate_component[1] ? 0 : 1;
            rate_weight[static_cast<std::size_t>(active_t)] = lambda[0];
            rate_weight[2] = lambda[1];
            rate_weight[3] = lambda[2];
            value -= lambda[0] * rate_component[static_cast<std::size_t>(active_t)] +
                     lambda[1] * rate_component[2] + lambda[2] * rate_component[3];
        } else {
            rate_weight[0] = lambda[0];
            rate_weight[1] = lambda[1];
            value -= lambda[0] * rate_component[0] + lambda[1] * rate_component[1];
        }
    }
    if (!std::isfinite(value))
        throw std::runtime_error("non-finite objective; degenerate parameterization");
    if (!grad) return value;

    // Entropy-coefficient vector gamma over tracked subsets.
    std::vector<double> gamma(nm, 0.0);
    for (std::size_t c = 0; c < constraint_terms_.size(); ++c) {
        double f = 2.0 * penalty_weight * residuals[static_cast<Eigen::Index>(c)];
        if (f == 0.0) continue;
        for (const auto& t : constraint_terms_[c])
            gamma[static_cast<std::size_t>(t.mask_index)] += f * t.coeff;
    }
    for (std::size_t k = 0; k < rate_terms_.size(); ++k) {
        if (rate_weight[k] == 0.0) continue;
        for (const auto& t : rate_terms_[k])
            gamma[static_cast<std::size_t>(t.mask_index)] -= rate_weight[k] * t.coeff;
    }
    std::vector<std::size_t> active;
    for (std::size_t m = 0; m < nm; ++m)
        if (gamma[m] != 0.0) active.push_back(m);

    // Tracked flat indices: one per subset, plus slice/symbol indices of each
    // factor block, updated incrementally by a digit odometer over entries.
    const std::size_t nb = space_.blocks.size();
    std::vector<std::vector<Eigen::Index>> step(nm + 2 * nb,
                                                std::vector<Eigen::Index>(vars, 0));
    auto fill_steps = [&](std::uint32_t mask, std::vector<Eigen::Index>& s) {
        Eigen::Index stride = 1;
        for (int v = vars - 1; v >= 0; --v)
            if (mask & (1u << v)) {
                s[static_cast<std::size_t>(v)] = stride;
                stride *= space_.joint_cards[static_cast<std::size_t>(v)];
            }
    };
    for (std::size_t m = 0; m < nm; ++m) fill_steps(masks_[m], step[m]);
    for (std::size_t b = 0; b < nb; ++b) {
        fill_steps(space_.blocks[b].slice_mask, step[nm + 2 * b]);
        fill_steps(space_.blocks[b].symbol_mask, step[nm + 2 * b + 1]);
    }
    std::vector<Eigen::Index> idx(nm + 2 * nb, 0);
    std::vector<int> digit(static_cast<std::size_t>(vars), 0);
    std::vector<Eigen::ArrayXd> acc(nb);
    for (std::size_t b = 0; b < nb; ++b)
        acc[b] = Eigen::ArrayXd::Zero(space_.blocks[b].slices * space_.blocks[b].symbols);

    for (Eigen::Index z = 0; z < p.size(); ++z) {
        if (p[z] > 0.0) {
            double g = 0.0;
            for (std::size_t m : active)
                g -= gamma[m] * (std::log2(marg[m][idx[m]]) + kInvLn2);
            if (g != 0.0) {
                double pg = p[z] * g;
                for (std::size_t b = 0; b < nb; ++b)
                    acc[b][idx[nm + 2 * b] * space_.blocks[b].symbols + idx[nm + 2 * b + 1]] +=
                        pg;
            }
        }
        // Advance the odometer and all tracked indices.
        for (int v = vars - 1; v >= 0; --v) {
            auto uv = static_cast<std::size_t>(v);
            ++digit[uv];
            for (std::size_t m = 0; m < idx.size(); ++m) idx[m] += step[m][uv];
            if (digit[uv] < space_.joint_cards[uv]) break;
            for (std::size_t m = 0; m < idx.size(); ++m)
                idx[m] -= step[m][uv] * space_.joint_cards[uv];
            digit[uv] = 0;
        }
    }

    // Softmax backprop: d/d logit_{s,j} = acc_{s,j} - q_{s,j} * sum_i acc_{s,i}.
    grad->setZero(space_.dim);
    for (std::size_t b = 0; b < nb; ++b) {
        Eigen::ArrayXd q = softmax_table(logits, space_.blocks[b]);
        const auto& blk = space_.blocks[b];
        for (Eigen::Index s = 0; s < blk.slices; ++s) {
            double total = 0.0;
            for (Eigen::Index j = 0; j < blk.symbols; ++j) total += acc[b][s * blk.symbols + j];
            for (Eigen::Index j = 0; j < blk.symbols; ++j)
                (*grad)[blk.offset + s * blk.symbols + j] =
                    acc[b][s * blk.symbols + j] - q[s * blk.symbols + j] * total;
        }
    }
    return value;
}

Eigen::MatrixXd SchemeObjective::residual_jacobian(const Eigen::VectorXd& logits,
                                                   Eigen::VectorXd& residuals) const {
    SchemeVariant scheme = scheme_of(space_, logits);
    JointDist joint = common_ ? build_common_joint(std::get<CommonScheme>(scheme), channel_)
                              : build_private_joint(std::get<PrivateScheme>(scheme), channel_);
    const Eigen::ArrayXd& p = joint.mass();
    const int vars = joint.variable_count();
    const std::size_t nm = masks_.size();
    const std::size_t nc = constraint_terms_.size();
    const std::size_t nb = space_.blocks.size();

    std::vector<Eigen::ArrayXd> marg(nm);
    std::vector<double> h(nm);
    for (std::size_t m = 0; m < nm; ++m) {
        std::vector<int> kept;
        for (int v = 0; v < vars; ++v)
            if (masks_[m] & (1u << v)) kept.push_back(v);
        marg[m] = marginal_mass(joint, kept);
        h[m] = entropy_bits(marg[m]);
    }
    residuals.resize(static_cast<Eigen::Index>(nc));
    for (std::size_t c = 0; c < nc; ++c) {
        double v = 0.0;
        for (const auto& t : constraint_terms_[c])
            v += t.coeff * h[static_cast<std::size_t>(t.mask_index)];
        residuals[static_cast<Eigen::Index>(c)] = v;
    }

    std::vector<std::vector<Eigen::Index>> step(nm + 2 * nb,
                                                std::vector<Eigen::Index>(vars, 0));
    auto fill_steps = [&](std::uint32_t mask, std::vector<Eigen::Index>& s) {
        Eigen::Index stride = 1;
        for (int v = vars - 1; v >= 0; --v)
            if (mask & (1u << v)) {
                s[static_cast<std::size_t>(v)] = stride;
                stride *= space_.joint_cards[static_cast<std::size_t>(v)];
            }
    };
    for (std::size_t m = 0; m < nm; ++m) fill_steps(masks_[m], step[m]);
    for (std::size_t b = 0; b < nb; ++b) {
        fill_steps(space_.blocks[b].slice_mask, step[nm + 2 * b]);
        fill_steps(space_.blocks[b].symbol_mask, step[nm + 2 * b + 1]);
    }
    std::vector<Eigen::Index> idx(nm + 2 * nb, 0);
    std::vector<int> digit(static_cast<std::size_t>(vars), 0);

    // Per-block accumulators, one column per constraint.
    std::vector<Eigen::MatrixXd> acc(nb);
    for (std::size_t b = 0; b < nb; ++b)
        acc[b] = Eigen::MatrixXd::Zero(space_.blocks[b].slices * space_.blocks[b].symbols,
                                       static_cast<Eigen::Index>(nc));
    std::vector<double> dh(nm);
    for (Eigen::Index z = 0; z < p.size(); ++z) {
        if (p[z] > 0.0) {
            for (std::size_t m = 0; m < nm; ++m)
                dh[m] = -(std::log2(marg[m][idx[m]]) + kInvLn2);
            for (std::size_t c = 0; c < nc; ++c) {
                double g = 0.0;
                for (const auto& t : constraint_terms_[c])
                    g += t.coeff * dh[static_cast<std::size_t>(t.mask_index)];
                if (g == 0.0) continue;
                double pg = p[z] * g;
                for (std::size_t b = 0; b < nb; ++b)
                    acc[b](idx[nm + 2 * b] * space_.blocks[b].symbols + idx[nm + 2 * b + 1],
                           static_cast<Eigen::Index>(c)) += pg;
            }
        }
        for (int v = vars - 1; v >= 0; --v) {
            auto uv = static_cast<std::size_t>(v);
            ++digit[uv];
            for (std::size_t m = 0; m < idx.size(); ++m) idx[m] += step[m][uv];
            if (digit[uv] < space_.joint_cards[uv]) break;
            for (std::size_t m = 0; m < idx.size(); ++m)
                idx[m] -= step[m][uv] * space_.joint_cards[uv];
            digit[uv] = 0;
        }
    }

    Eigen::MatrixXd jac =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nc), space_.dim);
    for (std::size_t b = 0; b < nb; ++b) {
        Eigen::ArrayXd q = softmax_table(logits, space_.blocks[b]);
        const auto& blk = space_.blocks[b];
        for (Eigen::Index s = 0; s < blk.slices; ++s) {
            for (std::size_t c = 0; c < nc; ++c) {
                double total = 0.0;
                for (Eigen::Index j = 0; j < blk.symbols; ++j)
                    total += acc[b](s * blk.symbols + j, static_cast<Eigen::Index>(c));
                for (Eigen::Index j = 0; j < blk.symbols; ++j)
                    jac(static_cast<Eigen::Index>(c), blk.offset + s * blk.symbols + j) =
                        acc[b](s * blk.symbols + j, static_cast<Eigen::Index>(c)) -
                        q[s * blk.symbols + j] * total;
            }
        }
    }
    return jac;
}

// ----------------------------------------------------------------------------
// Descent engines

namespace {

// Softmax logits are gauge-invariant per slice; recentering keeps them from
// drifting to saturation.
void recenter(const ParamSpace& space, Eigen::VectorXd& logits) {
    for (const auto& blk : space.blocks)
        for (Eigen::Index s = 0; s < blk.slices; ++s) {
            Eigen::Index at = blk.offset + s * blk.symbols;
            double mean = 0.0;
            for (Eigen::Index i = 0; i < blk.symbols; ++i) mean += logits[at + i];
            mean /= static_cast<double>(blk.symbols);
            for (Eigen::Index i = 0; i < blk.symbols; ++i) logits[at + i] -= mean;
        }
}

struct DescentOutcome {
    Eigen::VectorXd logits;
    double value = 0.0;
};

// Plain gradient descent with backtracking (Armijo) line search. on_step is
// called after each accepted step; returning false stops the stage early.
DescentOutcome descend(const SchemeObjective& obj, Eigen::VectorXd logits,
                       const Eigen::VectorXd& lambda, double weight, int max_iters,
                       const std::function<bool(const Eigen::VectorXd&)>& on_step) {
    Eigen::VectorXd grad;
    double f = obj.value(logits, lambda, weight, &grad);
    double step = 1.0;
    for (int iter = 0; iter < max_iters; ++iter) {
        double g2 = grad.squaredNorm();
        if (g2 <= 1e-24) break;
        bool accepted = false;
        Eigen::VectorXd cand;
        double fc = 0.0;
        while (step >= 1e-14) {
            cand = logits - step * grad;
            fc = obj.value(cand, lambda, weight, nullptr);
            if (fc <= f - 1e-4 * step * g2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        logits.swap(cand);
        f = obj.value(logits, lambda, weight, &grad);
        step = std::min(step * 2.0, 64.0);
        if (on_step && !on_step(logits)) break;
    }
    return {std::move(logits), f};
}

// Damped Gauss-Newton (Levenberg-Marquardt) on the residual vector. Stops
// once the residual infinity norm reaches `target` or the budget runs out.
Eigen::VectorXd levenberg_refine(const SchemeObjective& obj, Eigen::VectorXd logits,
                                 int max_iters, double target,
                                 const std::function<void(const Eigen::VectorXd&, double)>&
                                     on_accept) {
    Eigen::VectorXd r;
    Eigen::MatrixXd jac = obj.residual_jacobian(logits, r);
    if (r.size() == 0) return logits;
    double f = r.squaredNorm();
    double mu = 1e-3;
    for (int iter = 0; iter < max_iters; ++iter) {
        if (r.cwiseAbs().maxCoeff() <= target) break;
        Eigen::MatrixXd jtj = jac.transpose() * jac;
        Eigen::VectorXd jtr = jac.transpose() * r;
        bool accepted = false;
        for (int tries = 0; tries < 50 && !accepted; ++tries) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal().array() += mu;
            Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
            if (!delta.allFinite()) {
                mu = std::min(mu * 4.0, 1e12);
                continue;
            }
            Eigen::VectorXd cand = logits + delta;
            Eigen::VectorXd rc = obj.residual_vector(cand);
            double fc = rc.squaredNorm();
            if (fc < f) {
                logits = std::move(cand);
                recenter(obj.space(), logits);
                jac = obj.residual_jacobian(logits, r);
                f = r.squaredNorm();
                mu = std::max(mu / 3.0, 1e-12);
                accepted = true;
            } else {
                mu = std::min(mu * 4.0, 1e12);
            }
        }
        if (!accepted) break;
        if (on_accept) on_accept(logits, r.cwiseAbs().maxCoeff());
    }
    return logits;
}

}  // namespace

RefineResult refine_to_constraints(const SchemeVariant& scheme, const Channel& ch,
                                   const SearchConfig& cfg) {
    ParamSpace ps = param_space_for(scheme);
    SchemeObjective obj(ps, ch);
    Eigen::VectorXd logits = logits_of(obj.space(), scheme);

    RefineResult result;
    result.trace.push_back(obj.residual_inf(logits));
    int budget = cfg.max_iters * static_cast<int>(cfg.penalty_schedule.size());
    logits = levenberg_refine(obj, std::move(logits), budget, 0.3 * cfg.constraint_tol,
                              [&](const Eigen::VectorXd&, double res_inf) {
                                  result.trace.push_back(res_inf);
                              });
    result.residual_inf = obj.residual_inf(logits);
    result.success = result.residual_inf <= cfg.constraint_tol;
    result.scheme = scheme_of(obj.space(), logits);
    return result;
}

MaximizeResult maximize_weighted_rate(const SchemeVariant& scheme0, const Channel& ch,
                                      const Eigen::VectorXd& lambda, const SearchConfig& cfg) {
    ParamSpace ps = param_space_for(scheme0);
    SchemeObjective obj(ps, ch);
    if (lambda.size() != obj.rate_dim())
        throw std::invalid_argument("lambda dimension does not match the scheme kind");
    Eigen::VectorXd logits = logits_of(obj.space(), scheme0);

    double r0 = obj.residual_inf(logits);
    if (r0 > 10.0 * cfg.constraint_tol)
        throw std::invalid_argument("maximize_weighted_rate: starting scheme is infeasible");

    auto weighted = [&](const Eigen::VectorXd& at) {
        Eigen::VectorXd rate = obj.rate_point(at);
        return lambda.dot(rate);
    };

    std::optional<Eigen::VectorXd> best;
    double best_objective = 0.0;
    auto consider = [&](const Eigen::VectorXd& at) {
        if (obj.residual_inf(at) <= cfg.constraint_tol) {
            double v = weighted(at);
            if (!best || v > best_objective) {
                best = at;
                best_objective = v;
            }
        }
        return true;
    };
    consider(logits);

    for (double weight : cfg.penalty_schedule) {
        auto outcome =
            descend(obj, std::move(logits), lambda, weight, cfg.max_iters, consider);
        logits = std::move(outcome.logits);
        // Pull the stage's iterate back onto the manifold before judging it.
        logits = levenberg_refine(obj, std::move(logits), cfg.max_iters,
                                  0.3 * cfg.constraint_tol,
                                  [&](const Eigen::VectorXd& at, double) { consider(at); });
        consider(logits);
    }

    MaximizeResult result;
    if (best) {
        result.scheme = scheme_of(obj.space(), *best);
        result.rate = obj.rate_point(*best);
        result.residual_inf = obj.residual_inf(*best);
        result.feasible = true;
        result.fell_back = obj.residual_inf(logits) > cfg.constraint_tol;
    } else {
        result.scheme = scheme_of(obj.space(), logits);
        result.rate = obj.rate_point(logits);
        result.residual_inf = obj.residual_inf(logits);
        result.feasible = false;
        result.fell_back = true;
    }
    return result;
}

RegionSample scan_region(const Channel& ch, const SearchConfig& cfg,
                         const std::vector<Eigen::VectorXd>& lambda_sweep) {
    validate(cfg);
    if (lambda_sweep.empty()) throw std::invalid_argument("scan_region: empty lambda sweep");

    struct TaskResult {
        bool feasible = false;
        RegionPoint point;
        SchemeVariant scheme;
    };
    const std::size_t tasks =
        lambda_sweep.size() * static_cast<std::size_t>(cfg.restarts);
    std::vector<TaskResult> slots(tasks);

    auto run_task = [&](std::size_t t) {
        std::size_t sweep_idx = t / static_cast<std::size_t>(cfg.restarts);
        std::size_t restart = t % static_cast<std::size_t>(cfg.restarts);
        std::uint64_t seed = derive_seed(cfg.seed, sweep_idx, restart);
        SchemeVariant start =
            sample_scheme(cfg.cards, ch.x_card(), seed, cfg.deterministic_x);
        RefineResult refined = refine_to_constraints(start, ch, cfg);
        if (!refined.success) return;
        MaximizeResult maxed =
            maximize_weighted_rate(refined.scheme, ch, lambda_sweep[sweep_idx], cfg);
        if (!maxed.feasible || maxed.residual_inf > cfg.constraint_tol) return;
        TaskResult& out = slots[t];
        out.feasible = true;
        out.point = RegionPoint{maxed.rate, maxed.residual_inf, lambda_sweep[sweep_idx],
                                seed, -1};
        out.scheme = std::move(maxed.scheme);
    };

    int jobs = std::min<int>(cfg.jobs, static_cast<int>(tasks));
    if (jobs <= 1) {
        for (std::size_t t = 0; t < tasks; ++t) run_task(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&] {
                while (true) {
                    std::size_t t = next.fetch_add(1);
                    if (t >= tasks) return;
                    try {
                        run_task(t);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!error) error = std::current_exception();
                        return;
                    }
                }
            });
        for (auto& th : pool) th.join();
        if (error) std::rethrow_exception(error);
    }

    RegionSample sample;
    sample.total_restarts = static_cast<int>(tasks);
    for (std::size_t t = 0; t < tasks; ++t) {
        if (!slots[t].feasible) {
            ++sample.failed_restarts;
            continue;
        }
        slots[t].point.scheme_index = static_cast<int>(sample.schemes.size());
        sample.schemes.push_back(std::move(slots[t].scheme));
        sample.points.push_back(std::move(slots[t].point));
    }
    return sample;
}

std::vector<Eigen::VectorXd> frontier(const RegionSample& sample, FrontierMode mode) {
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(sample.points.size());
    for (const auto& p : sample.points) pts.push_back(p.rate);
    if (mode == FrontierMode::kRaw) return frontier_raw(pts);
    if (pts.empty()) throw std::invalid_argument("frontier: empty sample");
    if (pts.front().size() != 2)
        throw std::invalid_argument("hull frontier supports two-dimensional samples");
    std::vector<Eigen::Vector2d> flat;
    flat.reserve(pts.size());
    for (const auto& p : pts) flat.emplace_back(p[0], p[1]);
    std::vector<Eigen::VectorXd> out;
    for (const auto& p : frontier_hull(flat)) out.push_back(p);
    return out;
}

}  // namespace bcbound
