#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "puzzleforge/domain.hpp"
#include "puzzleforge/error.hpp"

// Constraint expression language.
//
// Positions are 1-based. Grammar (EBNF) and semantics are documented in
// docs/constraint-dsl.md.

namespace puzzleforge::dsl {

enum class NodeKind {
    Bool,
    Int,
    String,      // quoted token literal
    Ident,       // slot, bound variable, or bare token
    Not,
    Neg,
    Binary,
    Call,        // accessor or arithmetic helper: text = function name
    Quantifier,  // all / exists / exactly / atleast / atmost / count
    Range,       // lo..hi, only as a quantifier domain
    List,        // [a, b, ...]
};

enum class BinaryOp { Implies, Iff, Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub };

enum class QuantKind { All, Exists, Exactly, AtLeast, AtMost, Count };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Untyped syntax tree node. Immutable once built.
///
/// Quantifier children are `[bound?, domain, body]` where `bound` is present
/// for exactly/atleast/atmost; the bound variable name is in `text`.
struct Expr {
    NodeKind kind = NodeKind::Bool;
    SourceSpan span;
    bool flag = false;          // Bool literal
    std::int64_t number = 0;    // Int literal (non-negative)
    std::string text;           // String / Ident / Call name / quantifier variable
    BinaryOp op = BinaryOp::And;
    QuantKind quant = QuantKind::All;
    std::vector<ExprPtr> kids;
};

/// Throws DslError(Syntax) with the byte offset of the offending token.
ExprPtr parse(std::string_view source);

/// Canonical source text; parse(print(e)) is structurally equal to e.
std::string print(const Expr& expr);

/// Structural equality ignoring source spans.
bool equal(const Expr& a, const Expr& b);

std::string_view op_text(BinaryOp op);
std::string_view quant_text(QuantKind q);

// ---------------------------------------------------------------------------
// Type checking and evaluation

enum class BaseType { Bool, Int, Token, List };

struct Type {
    BaseType base = BaseType::Bool;
    std::vector<int> universe;  // sorted token ids a Token / List element may take
};

/// A constraint expression resolved against one DomainSpec.
class Program {
public:
    struct Node;

    Program() = default;

    const Expr& source() const { return *source_; }
    const ExprPtr& source_ptr() const { return source_; }
    /// Slots the expression reads, ascending.
    const std::vector<std::size_t>& slots_used() const { return slots_used_; }
    /// -1 when the expression reads no slot.
    int last_slot() const { return slots_used_.empty() ? -1 : static_cast<int>(slots_used_.back()); }

    bool eval(const Candidate& candidate) const;

private:
    friend Program check(const ExprPtr& expr, const DomainSpec& domain);

    ExprPtr source_;
    std::shared_ptr<const Node> root_;
    std::vector<std::size_t> slots_used_;
    std::size_t max_vars_ = 0;
};

/// Resolves identifiers and type-checks. Throws DslError (UnknownIdentifier, Type, Arity).
Program check(const ExprPtr& expr, const DomainSpec& domain);

/// parse + check.
Program compile(std::string_view source, const DomainSpec& domain);

bool eval(const Program& program, const Candidate& candidate);
bool eval(const Program& program, const DomainSpec& domain, const Arrangement& arrangement);

}  // namespace puzzleforge::dsl
