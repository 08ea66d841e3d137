// Block-code fixtures for the multi-letter suites.
#pragma once

#include <cstdint>
#include <random>

#include "bcbound/multiletter.hpp"

namespace fixtures {

using namespace bcbound;

// n = 1 identity code on the product channel: x = 2*m1 + m2.
inline BlockCode identity_code_n1() {
    BlockCode code;
    code.n = 1;
    code.m1_card = 2;
    code.m2_card = 2;
    for (int m1 = 0; m1 < 2; ++m1)
        for (int m2 = 0; m2 < 2; ++m2) code.encoder.push_back({m1 * 2 + m2});
    return code;
}

// Zero-error code on the product channel for any n: message bits of m1 ride
// the Y1 component and bits of m2 the Y2 component, position by position.
inline BlockCode identity_code_product(int n) {
    BlockCode code;
    code.n = n;
    code.m1_card = 1 << n;
    code.m2_card = 1 << n;
    for (int m1 = 0; m1 < code.m1_card; ++m1)
        for (int m2 = 0; m2 < code.m2_card; ++m2) {
            std::vector<int> x(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                int a = (m1 >> (n - 1 - i)) & 1;
                int b = (m2 >> (n - 1 - i)) & 1;
                x[static_cast<std::size_t>(i)] = a * 2 + b;
            }
            code.encoder.push_back(std::move(x));
        }
    return code;
}

// Repetition of m1 across all positions; m2 is carried nowhere.
inline BlockCode repetition_code(int n) {
    BlockCode code;
    code.n = n;
    code.m1_card = 2;
    code.m2_card = 2;
    for (int m1 = 0; m1 < 2; ++m1)
        for (int m2 = 0; m2 < 2; ++m2)
            code.encoder.push_back(std::vector<int>(static_cast<std::size_t>(n), m1));
    return code;
}

inline BlockCode random_code(int n, int m1_card, int m2_card, int x_card, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    BlockCode code;
    code.n = n;
    code.m1_card = m1_card;
    code.m2_card = m2_card;
    for (int m = 0; m < m1_card * m2_card; ++m) {
        std::vector<int> x(static_cast<std::size_t>(n));
        for (auto& xi : x) xi = static_cast<int>(rng() % static_cast<std::uint64_t>(x_card));
        code.encoder.push_back(std::move(x));
    }
    return code;
}

}  // namespace fixtures
