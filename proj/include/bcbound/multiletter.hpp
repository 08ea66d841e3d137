// Finite-blocklength code joints and the multi-letter identities behind the
// constrained region: the Csiszar sum exchange, the telescoping identity, and
// the single-letter identification with its exact finite-n residual formulas.
//
// Variable naming inside code joints: M1, M2 (and M0 when present), then
// Y1_1..Y1_n and Y2_1..Y2_n. The identified single-letter joint uses the
// scheme variable set (U,V,W1,W2,X,Y1,Y2), where W1 ranges over
// position-tagged Y1 prefixes and W2 over position-tagged Y2 suffixes.
#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bcbound/schemes.hpp"

namespace bcbound {

// Hard desk-scale blocklength cap; the per-entry support cap still applies
// underneath it for larger alphabets.
inline constexpr int kMaxBlocklength = 8;

struct BlockCode {
    int n = 1;
    int m0_card = 1;  // 1 when there is no common message
    int m1_card = 1;
    int m2_card = 1;
    // Deterministic encoder: flat message index ((m0*m1_card)+m1)*m2_card+m2
    // maps to a length-n input sequence.
    std::vector<std::vector<int>> encoder;
};

void validate(const BlockCode& code, const Channel& ch);

struct CodeJoint {
    int n = 1;
    bool has_m0 = false;
    JointDist dist;
};

// Uniform independent messages pushed through the memoryless channel.
CodeJoint code_joint(const BlockCode& code, const Channel& ch,
                     std::size_t support_cap = kDefaultSupportCap);

// Per-position residuals I(Y1_i,Y2_i ; everything else | X_i); all of them
// vanish because the channel acts coordinatewise.
std::vector<double> memoryless_residuals(const BlockCode& code, const Channel& ch,
                                         std::size_t support_cap = kDefaultSupportCap);

// Csiszar sum exchange under conditioning set K (a subset of the message
// variables): returns (lhs, rhs) with
//   lhs = sum_i I(Y2_{i+1..n}; Y1_i | Y1_{1..i-1}, K)
//   rhs = sum_i I(Y1_{1..i-1}; Y2_i | Y2_{i+1..n}, K).
// The two sums agree for every code joint and every K.
std::pair<double, double> csiszar_check(const CodeJoint& joint, const Names& k);

// Telescoping identity: returns (sum, endpoint) with
//   sum      = sum_i [ I(M1;M2|Y1^i, Y2_{i+1..n}) - I(M1;M2|Y1^{i-1}, Y2_{i..n}) ]
//   endpoint = I(M1;M2|Y1^n) - I(M1;M2|Y2^n).
std::pair<double, double> telescope_check(const CodeJoint& joint);

struct SingleLetterResult {
    JointDist joint;              // identified (U,V,W1,W2,X,Y1,Y2) joint
    ConstraintResiduals residuals;
    // Exact finite-n values the first three residuals must equal, and zeros
    // for the four exchange residuals:
    //   predicted[0] = -(1/n) I(M1;M2|Y1^n)
    //   predicted[1] = -(1/n) I(M1;M2|Y2^n)
    //   predicted[2] =  (1/n) [I(M1;M2|Y1^n) - I(M1;M2|Y2^n)]
    std::array<double, 7> predicted{};
    Eigen::Vector2d rate;       // rate point of the identified joint
    Eigen::Vector2d code_rate;  // (1/n) sum_i I(M1;Y1_i|Y1^{i-1}) and the
                                // backward analogue for receiver 2
};

// Builds the time-shared single-letter joint (uniform position index folded
// into W1 and W2) and evaluates the private constraint residuals on it.
// Requires a private code (m0_card == 1).
SingleLetterResult identify_single_letter(const BlockCode& code, const Channel& ch,
                                          std::size_t support_cap = kDefaultSupportCap);

// Per-receiver zero-error flags: true iff H(M_k | Y_k^n) <= 1e-10.
std::pair<bool, bool> is_zero_error(const BlockCode& code, const Channel& ch,
                                    std::size_t support_cap = kDefaultSupportCap);

}  // namespace bcbound
