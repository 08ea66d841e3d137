// Text syntax for information expressions and constraint files.
//
//   statement := expr REL expr          REL in { >=, <=, =, == }
//   expr      := [+|-] term ((+|-) term)*
//   term      := number [* quantity] | quantity | number
//   quantity  := H(vars) | I(vars ; vars [| vars])
//   vars      := name (, name)*
//
// Lines starting with '#' and blank lines are ignored. Constraint files may
// only contain equalities; targets may be inequalities or equalities.
// Constant terms must cancel (relations against anything but 0 are not
// information expressions).
#pragma once

#include <string>

#include "bcbound/prover.hpp"

namespace bcbound {

enum class TargetKind { kNonneg, kEquality };

struct ProverProblem {
    EntropySpace space;
    ConstraintSet constraints;
    InfoExpr target;  // normalized to "target >= 0" (or "= 0" for equalities)
    TargetKind target_kind = TargetKind::kNonneg;
    std::string target_text;
};

// Parses a constraints file body plus one target statement. Variables are
// collected across both in order of first appearance. Throws
// std::invalid_argument with a line-and-column diagnostic on bad syntax.
ProverProblem parse_prover_problem(const std::string& constraints_text,
                                   const std::string& target_text);

}  // namespace bcbound
