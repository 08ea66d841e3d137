// Test-only reference implementations, kept independent of the library's
// internal index arithmetic: entropies are recomputed here from scratch with
// map-based marginals and natural logs, so agreement is a two-route check.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "bcbound/probcore.hpp"

namespace oracle {

// Marginal by explicit div/mod digit decoding into a map keyed by the kept
// digits (deliberately not the library's odometer loop).
inline std::map<std::vector<int>, double> ref_marginal(const bcbound::JointDist& d,
                                                       const std::vector<std::string>& keep) {
    std::vector<int> kept;
    for (const auto& n : keep) kept.push_back(d.index_of(n));
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    std::map<std::vector<int>, double> out;
    const auto& mass = d.mass();
    for (Eigen::Index z = 0; z < mass.size(); ++z) {
        Eigen::Index rest = z;
        std::vector<int> digits(d.variable_count());
        for (int v = d.variable_count() - 1; v >= 0; --v) {
            digits[v] = static_cast<int>(rest % d.cardinality(v));
            rest /= d.cardinality(v);
        }
        std::vector<int> key;
        for (int v : kept) key.push_back(digits[v]);
        out[key] += mass[z];
    }
    return out;
}

inline double ref_entropy(const bcbound::JointDist& d, const std::vector<std::string>& keep) {
    double h = 0.0;
    for (const auto& [key, p] : ref_marginal(d, keep))
        if (p > 0.0) h -= p * std::log(p);
    return h / std::log(2.0);
}

inline double ref_cmi(const bcbound::JointDist& d, std::vector<std::string> a,
                      std::vector<std::string> b, std::vector<std::string> c = {}) {
    auto join = [](std::vector<std::string> u, const std::vector<std::string>& v) {
        for (const auto& n : v)
            if (std::find(u.begin(), u.end(), n) == u.end()) u.push_back(n);
        return u;
    };
    auto ac = join(a, c), bc = join(b, c), abc = join(join(a, b), c);
    double h = ref_entropy(d, ac) + ref_entropy(d, bc) - ref_entropy(d, abc);
    if (!c.empty()) h -= ref_entropy(d, c);
    return h;
}

inline double binary_entropy(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log2(p);
    if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

// Uniform doubles from raw 53-bit draws so test data is engine-stable.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bcbound::JointDist random_joint(const std::vector<bcbound::VariableSpec>& vars,
                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Eigen::Index n = 1;
    for (const auto& v : vars) n *= v.cardinality;
    Eigen::ArrayXd mass(n);
    for (Eigen::Index i = 0; i < n; ++i) mass[i] = uniform01(rng) + 1e-9;
    mass /= mass.sum();
    return bcbound::JointDist(vars, mass);
}

// Noiseless product channel: X = (A,B) with A = x>>1, B = x&1, Y1 = A, Y2 = B.
inline bcbound::Channel product_channel() {
    Eigen::ArrayXd law = Eigen::ArrayXd::Zero(4 * 2 * 2);
    for (int x = 0; x < 4; ++x) {
        int a = x >> 1, b = x & 1;
        law[(x * 2 + a) * 2 + b] = 1.0;
    }
    return bcbound::Channel(4, 2, 2, law);
}

// Two independent BSC(p) branches driven by the same binary input.
inline bcbound::Channel bsc_pair_channel(double p) {
    Eigen::ArrayXd law(2 * 2 * 2);
    for (int x = 0; x < 2; ++x)
        for (int y1 = 0; y1 < 2; ++y1)
            for (int y2 = 0; y2 < 2; ++y2) {
                double p1 = (y1 == x) ? 1.0 - p : p;
                double p2 = (y2 == x) ? 1.0 - p : p;
                law[(x * 2 + y1) * 2 + y2] = p1 * p2;
            }
    return bcbound::Channel(2, 2, 2, law);
}

inline bcbound::Channel random_channel(int x, int y1, int y2, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Eigen::ArrayXd law(static_cast<Eigen::Index>(x) * y1 * y2);
    Eigen::Index row = static_cast<Eigen::Index>(y1) * y2;
    for (int i = 0; i < x; ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < row; ++j) {
            law[i * row + j] = uniform01(rng) + 1e-3;
            sum += law[i * row + j];
        }
        for (Eigen::Index j = 0; j < row; ++j) law[i * row + j] /= sum;
    }
    return bcbound::Channel(x, y1, y2, law);
}

}  // namespace oracle
