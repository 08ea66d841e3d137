#include "bcbound/probcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace bcbound {

namespace {

std::vector<Eigen::Index> compute_strides(const std::vector<VariableSpec>& vars) {
    std::vector<Eigen::Index> strides(vars.size(), 1);
    for (int v = static_cast<int>(vars.size()) - 2; v >= 0; --v)
        strides[v] = strides[v + 1] * vars[v + 1].cardinality;
    return strides;
}

std::size_t checked_size(const std::vector<VariableSpec>& vars, std::size_t cap) {
    std::size_t total = 1;
    for (const auto& v : vars) {
        if (v.cardinality < 1)
            throw std::invalid_argument("variable '" + v.name + "' has cardinality < 1");
        total *= static_cast<std::size_t>(v.cardinality);
        if (total > cap)
            throw SupportCapExceeded("joint support exceeds cap of " + std::to_string(cap) +
                                     " entries");
    }
    return total;
}

void check_unique_names(const std::vector<VariableSpec>& vars) {
    std::set<std::string_view> seen;
    for (const auto& v : vars)
        if (!seen.insert(v.name).second)
            throw std::invalid_argument("duplicate variable name '" + v.name + "'");
}

void check_mass(Eigen::ArrayXd& mass) {
    for (Eigen::Index i = 0; i < mass.size(); ++i) {
        if (mass[i] < 0.0) {
            if (mass[i] < -kClampTol)
                throw std::invalid_argument("negative probability mass " +
                                            std::to_string(mass[i]));
            mass[i] = 0.0;
        }
    }
    double total = stable_sum(mass);
    if (std::abs(total - 1.0) > kClampTol)
        throw std::invalid_argument("probability mass sums to " + std::to_string(total) +
                                    ", not 1");
}

}  // namespace

double stable_sum(const Eigen::ArrayXd& values) {
    double sum = 0.0, comp = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        double t = sum + values[i];
        if (std::abs(sum) >= std::abs(values[i]))
            comp += (sum - t) + values[i];
        else
            comp += (values[i] - t) + sum;
        sum = t;
    }
    return sum + comp;
}

JointDist::JointDist(std::vector<VariableSpec> variables, Eigen::ArrayXd mass,
                     std::size_t support_cap)
    : vars_(std::move(variables)) {
    if (vars_.empty())
        throw std::invalid_argument("joint distribution needs at least one variable");
    check_unique_names(vars_);
    std::size_t total = checked_size(vars_, support_cap);
    if (static_cast<std::size_t>(mass.size()) != total)
        throw std::invalid_argument("mass has " + std::to_string(mass.size()) +
                                    " entries, expected " + std::to_string(total));
    check_mass(mass);
    mass_ = std::move(mass);
    strides_ = compute_strides(vars_);
}

JointDist make_normalized_joint(std::vector<VariableSpec> variables, Eigen::ArrayXd mass,
                                std::size_t support_cap) {
    for (Eigen::Index i = 0; i < mass.size(); ++i)
        if (mass[i] < 0.0 && mass[i] >= -kClampTol) mass[i] = 0.0;
    double total = stable_sum(mass);
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("built joint mass sums to " + std::to_string(total));
    if (total != 1.0) mass /= total;
    return JointDist(std::move(variables), std::move(mass), support_cap);
}

int JointDist::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].name == name) return static_cast<int>(i);
    throw std::invalid_argument("unknown variable '" + std::string(name) + "'");
}

std::vector<int> JointDist::indices_of(const Names& names) const {
    std::vector<int> idx;
    idx.reserve(names.size());
    for (const auto& n : names) idx.push_back(index_of(n));
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

Channel::Channel(int x_card, int y1_card, int y2_card, Eigen::ArrayXd law)
    : x_card_(x_card), y1_card_(y1_card), y2_card_(y2_card), law_(std::move(law)) {
    if (x_card < 1 || y1_card < 1 || y2_card < 1)
        throw std::invalid_argument("channel cardinalities must be >= 1");
    Eigen::Index expected =
        static_cast<Eigen::Index>(x_card) * y1_card * y2_card;
    if (law_.size() != expected)
        throw std::invalid_argument("channel law has wrong size");
    Eigen::Index row = static_cast<Eigen::Index>(y1_card) * y2_card;
    for (int x = 0; x < x_card; ++x) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < row; ++j) {
            double p = law_[x * row + j];
            if (p < -kClampTol)
                throw std::invalid_argument("channel law has negative entry at x=" +
                                            std::to_string(x));
            if (p < 0.0) law_[x * row + j] = 0.0;
            sum += law_[x * row + j];
        }
        if (std::abs(sum - 1.0) > kClampTol)
            throw std::invalid_argument("channel law row x=" + std::to_string(x) +
                                        " sums to " + std::to_string(sum));
    }
}

Eigen::ArrayXd marginal_mass(const JointDist& dist, const std::vector<int>& kept) {
    const int k = dist.variable_count();
    // Per-variable step of the output index as the odometer digit advances.
    std::vector<Eigen::Index> contrib(static_cast<std::size_t>(k), 0);
    Eigen::Index out_size = 1;
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
        contrib[static_cast<std::size_t>(*it)] = out_size;
        out_size *= dist.cardinality(*it);
    }
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(out_size);
    std::vector<int> digit(static_cast<std::size_t>(k), 0);
    const Eigen::ArrayXd& mass = dist.mass();
    Eigen::Index out_idx = 0;
    for (Eigen::Index z = 0; z < mass.size(); ++z) {
        out[out_idx] += mass[z];
        for (int v = k - 1; v >= 0; --v) {
            auto uv = static_cast<std::size_t>(v);
            ++digit[uv];
            out_idx += contrib[uv];
            if (digit[uv] < dist.cardinality(v)) break;
            out_idx -= contrib[uv] * dist.cardinality(v);
            digit[uv] = 0;
        }
    }
    return out;
}

JointDist marginalize(const JointDist& dist, const Names& subset) {
    if (subset.empty())
        throw std::invalid_argument("marginalize: empty variable set");
    std::vector<int> kept = dist.indices_of(subset);
    std::vector<VariableSpec> vars;
    vars.reserve(kept.size());
    for (int v : kept) vars.push_back(dist.variables()[static_cast<std::size_t>(v)]);
    return JointDist(std::move(vars), marginal_mass(dist, kept));
}

namespace {

// -sum p log2 p over a marginal, skipping zero entries.
double entropy_of_mass(const Eigen::ArrayXd& mass) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < mass.size(); ++i)
        if (mass[i] > 0.0) h -= mass[i] * std::log2(mass[i]);
    return h < 0.0 && h >= -kClampTol ? 0.0 : h;
}

double entropy_of_indices(const JointDist& dist, const std::vector<int>& idx) {
    if (idx.empty()) return 0.0;
    return entropy_of_mass(marginal_mass(dist, idx));
}

std::vector<int> union_indices(const JointDist& dist, std::initializer_list<const Names*> groups) {
    std::vector<int> idx;
    for (const Names* g : groups)
        for (const auto& n : *g) idx.push_back(dist.index_of(n));
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

}  // namespace

double entropy(const JointDist& dist, const Names& subset) {
    if (subset.empty())
        throw std::invalid_argument("entropy: empty variable set");
    return entropy_of_indices(dist, dist.indices_of(subset));
}

double mutual_info_groups(const JointDist& dist, const Names& a, const Names& b,
                          const Names& c) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("mutual information needs nonempty groups");
    double hac = entropy_of_indices(dist, union_indices(dist, {&a, &c}));
    double hbc = entropy_of_indices(dist, union_indices(dist, {&b, &c}));
    double habc = entropy_of_indices(dist, union_indices(dist, {&a, &b, &c}));
    double hc = entropy_of_indices(dist, union_indices(dist, {&c}));
    double value = hac + hbc - habc - hc;
    return value < 0.0 && value >= -kClampTol ? 0.0 : value;
}

double cond_mutual_info(const JointDist& dist, const Names& a, const Names& b,
                        const Names& c) {
    std::vector<int> ia = dist.indices_of(a), ib = dist.indices_of(b);
    std::vector<int> overlap;
    std::set_intersection(ia.begin(), ia.end(), ib.begin(), ib.end(),
                          std::back_inserter(overlap));
    if (!overlap.empty()) {
        std::ostringstream msg;
        msg << "cond_mutual_info: groups share variable '"
            << dist.variables()[static_cast<std::size_t>(overlap.front())].name << "'";
        throw std::invalid_argument(msg.str());
    }
    return mutual_info_groups(dist, a, b, c);
}

}  // namespace bcbound
