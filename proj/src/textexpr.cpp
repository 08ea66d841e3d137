#include "bcbound/textexpr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <vector>

namespace bcbound {

namespace {

struct QuantityAst {
    bool is_entropy = true;           // H(...) vs I(...;...|...)
    std::vector<std::string> a, b, c;  // H uses only a
};

struct TermAst {
    double coeff = 1.0;
    std::optional<QuantityAst> quantity;  // absent: plain constant
};

struct RelationAst {
    std::vector<TermAst> lhs, rhs;
    char kind = '=';  // '>', '<', '='
    std::string source;
};

class LineParser {
  public:
    LineParser(const std::string& text, int line_no) : text_(text), line_(line_no) {}

    RelationAst parse() {
        RelationAst rel;
        rel.source = text_;
        rel.lhs = parse_expr();
        skip_ws();
        rel.kind = parse_relation();
        rel.rhs = parse_expr();
        skip_ws();
        if (at_ < text_.size()) fail("trailing input");
        return rel;
    }

  private:
    [[noreturn]] void fail(const std::string& what) {
        std::ostringstream msg;
        msg << "line " << line_ << ", column " << (at_ + 1) << ": " << what;
        throw std::invalid_argument(msg.str());
    }

    void skip_ws() {
        while (at_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[at_])))
            ++at_;
    }

    bool eat(char c) {
        skip_ws();
        if (at_ < text_.size() && text_[at_] == c) {
            ++at_;
            return true;
        }
        return false;
    }

    char parse_relation() {
        skip_ws();
        if (at_ + 1 < text_.size()) {
            std::string two = text_.substr(at_, 2);
            if (two == ">=") {
                at_ += 2;
                return '>';
            }
            if (two == "<=") {
                at_ += 2;
                return '<';
            }
            if (two == "==") {
                at_ += 2;
                return '=';
            }
        }
        if (at_ < text_.size() && text_[at_] == '=') {
            ++at_;
            return '=';
        }
        fail("expected '>=', '<=', '=' or '=='");
    }

    std::vector<TermAst> parse_expr() {
        std::vector<TermAst> terms;
        double sign = 1.0;
        skip_ws();
        if (eat('+')) sign = 1.0;
        else if (eat('-')) sign = -1.0;
        while (true) {
            TermAst term = parse_term();
            term.coeff *= sign;
            terms.push_back(std::move(term));
            skip_ws();
            if (eat('+')) sign = 1.0;
            else if (eat('-')) sign = -1.0;
            else break;
        }
        return terms;
    }

    TermAst parse_term() {
        skip_ws();
        TermAst term;
        if (at_ < text_.size() &&
            (std::isdigit(static_cast<unsigned char>(text_[at_])) || text_[at_] == '.')) {
            term.coeff = parse_number();
            skip_ws();
            if (eat('*')) {
                term.quantity = parse_quantity();
            } else if (at_ < text_.size() && (text_[at_] == 'H' || text_[at_] == 'I') &&
                       at_ + 1 < text_.size() && text_[at_ + 1] == '(') {
                term.quantity = parse_quantity();
            }
            return term;
        }
        term.quantity = parse_quantity();
        return term;
    }

    double parse_number() {
        const char* start = text_.c_str() + at_;
        char* end = nullptr;
        double value = std::strtod(start, &end);
        if (end == start) fail("expected a number");
        at_ += static_cast<std::size_t>(end - start);
        return value;
    }

    std::string parse_name() {
        skip_ws();
        std::size_t begin = at_;
        while (at_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[at_])) || text_[at_] == '_'))
            ++at_;
        if (at_ == begin) fail("expected a variable name");
        return text_.substr(begin, at_ - begin);
    }

    std::vector<std::string> parse_vars() {
        std::vector<std::string> names;
        names.push_back(parse_name());
        while (eat(',')) names.push_back(parse_name());
        return names;
    }

    QuantityAst parse_quantity() {
        skip_ws();
        if (at_ >= text_.size()) fail("expected H(...) or I(...)");
        char head = text_[at_];
        if (head != 'H' && head != 'I') fail("expected H(...) or I(...)");
        ++at_;
        if (!eat('(')) fail("expected '('");
        QuantityAst q;
        q.a = parse_vars();
        if (head == 'H') {
            q.is_entropy = true;
            if (!eat(')')) fail("expected ')'");
            return q;
        }
        q.is_entropy = false;
        if (!eat(';')) fail("expected ';' in I(...)");
        q.b = parse_vars();
        if (eat(';')) fail("only two-argument mutual information is supported");
        if (eat('|')) q.c = parse_vars();
        if (!eat(')')) fail("expected ')'");
        return q;
    }

    const std::string& text_;
    int line_;
    std::size_t at_ = 0;
};

std::vector<RelationAst> parse_lines(const std::string& text, int& line_no) {
    std::vector<RelationAst> out;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        bool blank = std::all_of(line.begin(), line.end(), [](unsigned char c) {
            return std::isspace(c);
        });
        if (blank) continue;
        out.push_back(LineParser(line, line_no).parse());
    }
    return out;
}

void collect_names(const std::vector<RelationAst>& relations,
                   std::vector<std::string>& names) {
    auto add = [&](const std::vector<std::string>& vars) {
        for (const auto& v : vars)
            if (std::find(names.begin(), names.end(), v) == names.end()) names.push_back(v);
    };
    for (const auto& rel : relations)
        for (const auto* side : {&rel.lhs, &rel.rhs})
            for (const auto& term : *side)
                if (term.quantity) {
                    add(term.quantity->a);
                    add(term.quantity->b);
                    add(term.quantity->c);
                }
}

// lhs - rhs as an InfoExpr; constant terms must cancel.
InfoExpr lower(const EntropySpace& space, const RelationAst& rel) {
    InfoExpr expr;
    double constant = 0.0;
    auto fold = [&](const std::vector<TermAst>& terms, double sign) {
        for (const auto& term : terms) {
            if (!term.quantity) {
                constant += sign * term.coeff;
                continue;
            }
            const auto& q = *term.quantity;
            InfoExpr piece = q.is_entropy ? entropy_expr(space, q.a)
                                          : cmi_expr(space, q.a, q.b, q.c);
            piece *= sign * term.coeff;
            expr += piece;
        }
    };
    fold(rel.lhs, 1.0);
    fold(rel.rhs, -1.0);
    if (std::abs(constant) > 1e-12)
        throw std::invalid_argument("constant terms do not cancel in '" + rel.source +
                                    "' (relations must compare against 0)");
    return expr;
}

}  // namespace

ProverProblem parse_prover_problem(const std::string& constraints_text,
                                   const std::string& target_text) {
    int line_no = 0;
    std::vector<RelationAst> constraint_asts = parse_lines(constraints_text, line_no);
    int target_line = 0;
    std::vector<RelationAst> target_asts = parse_lines(target_text, target_line);
    if (target_asts.size() != 1)
        throw std::invalid_argument("expected exactly one target statement, found " +
                                    std::to_string(target_asts.size()));

    std::vector<std::string> names;
    collect_names(constraint_asts, names);
    collect_names(target_asts, names);
    if (names.empty()) throw std::invalid_argument("no variables mentioned");

    EntropySpace space(names);
    ConstraintSet constraints;
    for (const auto& rel : constraint_asts) {
        if (rel.kind != '=')
            throw std::invalid_argument("constraints must be equalities: '" + rel.source + "'");
        constraints.add(lower(space, rel), rel.source);
    }

    const RelationAst& target = target_asts.front();
    InfoExpr expr = lower(space, target);
    if (target.kind == '<') expr *= -1.0;
    ProverProblem problem{std::move(space), std::move(constraints), std::move(expr),
                          target.kind == '=' ? TargetKind::kEquality : TargetKind::kNonneg,
                          target.source};
    return problem;
}

}  // namespace bcbound
