#include <algorithm>
#include <array>
#include <set>

#include "puzzleforge/dsl.hpp"

namespace puzzleforge::dsl {

namespace {

constexpr std::size_t kMaxNesting = 32;

enum class Op {
    Const,      // bool / int / token id in `value`
    ConstList,  // `tokens`
    Var,
    SlotList,
    SlotScalar,
    ListLit,
    Not,
    Neg,
    And,
    Or,
    Implies,
    Iff,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Abs,
    Pos,
    At,
    Val,
    Member,
    Size,
    Before,
    After,
    Quant,
};

}  // namespace

struct Program::Node {
    Op op = Op::Const;
    std::int64_t value = 0;
    int slot = -1;
    int var = -1;
    bool indexed = false;  // SlotList over a permutation or subset: index lookups are valid
    bool range = false;    // Quant over lo..hi
    bool has_bound = false;
    bool token_compare = false;
    bool permutation = false;  // SlotList over a permutation: index holds positions
    QuantKind quant = QuantKind::All;
    std::vector<int> tokens;
    std::vector<Node> kids;
};

namespace {

using Node = Program::Node;

std::string type_name(const Type& t) {
    switch (t.base) {
    case BaseType::Bool: return "boolean";
    case BaseType::Int: return "integer";
    case BaseType::Token: return "token";
    case BaseType::List: return "sequence";
    }
    return "?";
}

bool intersects(const std::vector<int>& a, const std::vector<int>& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i == *j) return true;
        if (*i < *j) ++i;
        else ++j;
    }
    return false;
}

std::vector<int> sorted(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

class Checker {
public:
    explicit Checker(const DomainSpec& domain) : domain_(domain) {}

    std::pair<Node, Type> run(const Expr& e) {
        auto [node, type] = visit(e);
        if (type.base != BaseType::Bool)
            fail(DslError::Kind::Type, e, "constraint must be boolean, got " + type_name(type));
        return {std::move(node), std::move(type)};
    }

    std::vector<std::size_t> slots_used() const { return {used_.begin(), used_.end()}; }
    std::size_t max_vars() const { return max_vars_; }

private:
    struct Binding {
        std::string name;
        Type type;
    };

    [[noreturn]] void fail(DslError::Kind kind, const Expr& at, const std::string& msg) const {
        throw DslError(kind, at.span, msg);
    }

    Type expect(const Expr& e, Node& out, BaseType base, std::string_view context) {
        auto [node, type] = visit(e);
        if (type.base != base)
            fail(DslError::Kind::Type, e,
                 std::string(context) + " expects " + type_name(Type{base, {}}) + ", got " + type_name(type));
        out = std::move(node);
        return type;
    }

    const Binding* find_var(std::string_view name) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->name == name) return &*it;
        return nullptr;
    }

    std::size_t slot_argument(const Expr& e, std::string_view fn) {
        if (e.kind != NodeKind::Ident || find_var(e.text))
            fail(DslError::Kind::Type, e, std::string(fn) + " expects a slot name");
        auto s = domain_.find_slot(e.text);
        if (!s) fail(DslError::Kind::UnknownIdentifier, e, "unknown slot '" + e.text + "'");
        used_.insert(*s);
        return *s;
    }

    // First argument of a sequence accessor. Gives a targeted message for slots of the wrong kind.
    Type sequence_argument(const Expr& e, Node& out, std::string_view fn) {
        if (e.kind == NodeKind::Ident && !find_var(e.text)) {
            if (auto s = domain_.find_slot(e.text)) {
                const auto& kind = domain_.slot(*s).kind;
                if (std::holds_alternative<AssignmentSlot>(kind) || std::holds_alternative<ScalarSlot>(kind))
                    fail(DslError::Kind::Type, e,
                         "slot '" + e.text + "' is an " + std::string(kind_name(kind)) + ", " + std::string(fn) +
                             " needs a sequence");
            }
        }
        return expect(e, out, BaseType::List, std::string(fn) + " argument 1");
    }

    void require_overlap(const Type& token, const Type& universe, const Expr& at, std::string_view what) {
        if (!intersects(token.universe, universe.universe)) {
            std::string shown = at.kind == NodeKind::Ident || at.kind == NodeKind::String ? "'" + at.text + "'"
                                                                                          : "expression";
            fail(DslError::Kind::Type, at, "token " + shown + " is out of range for " + std::string(what));
        }
    }

    void arity(const Expr& e, std::initializer_list<std::size_t> allowed) {
        for (auto n : allowed)
            if (e.kids.size() == n) return;
        std::string want;
        for (auto n : allowed) want += (want.empty() ? "" : " or ") + std::to_string(n);
        fail(DslError::Kind::Arity, e,
             e.text + " takes " + want + " argument(s), got " + std::to_string(e.kids.size()));
    }

    std::pair<Node, Type> visit(const Expr& e) {
        Node n;
        switch (e.kind) {
        case NodeKind::Bool:
            n.op = Op::Const;
            n.value = e.flag ? 1 : 0;
            return {std::move(n), Type{BaseType::Bool, {}}};
        case NodeKind::Int:
            n.op = Op::Const;
            n.value = e.number;
            return {std::move(n), Type{BaseType::Int, {}}};
        case NodeKind::String: {
            auto id = domain_.token_id(e.text);
            if (!id) fail(DslError::Kind::Type, e, "token '" + e.text + "' is out of range for every slot");
            n.op = Op::Const;
            n.value = *id;
            return {std::move(n), Type{BaseType::Token, {*id}}};
        }
        case NodeKind::Ident: return identifier(e);
        case NodeKind::Not: {
            n.op = Op::Not;
            n.kids.resize(1);
            expect(*e.kids[0], n.kids[0], BaseType::Bool, "not");
            return {std::move(n), Type{BaseType::Bool, {}}};
        }
        case NodeKind::Neg: {
            n.op = Op::Neg;
            n.kids.resize(1);
            expect(*e.kids[0], n.kids[0], BaseType::Int, "unary minus");
            return {std::move(n), Type{BaseType::Int, {}}};
        }
        case NodeKind::Binary: return binary(e);
        case NodeKind::Call: return call(e);
        case NodeKind::Quantifier: return quantifier(e);
        case NodeKind::List: {
            n.op = Op::ListLit;
            std::vector<int> universe;
            for (const auto& k : e.kids) {
                Node kid;
                auto t = expect(*k, kid, BaseType::Token, "list element");
                universe.insert(universe.end(), t.universe.begin(), t.universe.end());
                n.kids.push_back(std::move(kid));
            }
            return {std::move(n), Type{BaseType::List, sorted(std::move(universe))}};
        }
        case NodeKind::Range: fail(DslError::Kind::Type, e, "a range is only allowed as a quantifier domain");
        }
        fail(DslError::Kind::Syntax, e, "unknown node");
    }

    std::pair<Node, Type> identifier(const Expr& e) {
        Node n;
        if (const auto* b = find_var(e.text)) {
            n.op = Op::Var;
            n.var = static_cast<int>(b - scope_.data());
            return {std::move(n), b->type};
        }
        if (auto s = domain_.find_slot(e.text)) {
            used_.insert(*s);
            n.slot = static_cast<int>(*s);
            const auto& kind = domain_.slot(*s).kind;
            auto universe = sorted(domain_.element_ids(*s));
            if (std::holds_alternative<ScalarSlot>(kind)) {
                n.op = Op::SlotScalar;
                return {std::move(n), Type{BaseType::Token, std::move(universe)}};
            }
            if (std::holds_alternative<AssignmentSlot>(kind))
                fail(DslError::Kind::Type, e,
                     "slot '" + e.text + "' is an assignment; read it with val(" + e.text + ", key)");
            n.op = Op::SlotList;
            n.indexed = true;
            n.permutation = std::holds_alternative<PermutationSlot>(kind);
            return {std::move(n), Type{BaseType::List, std::move(universe)}};
        }
        if (auto id = domain_.token_id(e.text)) {
            n.op = Op::Const;
            n.value = *id;
            return {std::move(n), Type{BaseType::Token, {*id}}};
        }
        fail(DslError::Kind::UnknownIdentifier, e, "unknown identifier '" + e.text + "'");
    }

    std::pair<Node, Type> binary(const Expr& e) {
        Node n;
        n.kids.resize(2);
        const auto& l = *e.kids[0];
        const auto& r = *e.kids[1];
        auto logical = [&](Op op) {
            n.op = op;
            expect(l, n.kids[0], BaseType::Bool, op_text(e.op));
            expect(r, n.kids[1], BaseType::Bool, op_text(e.op));
            return std::pair{std::move(n), Type{BaseType::Bool, {}}};
        };
        auto arithmetic = [&](Op op, BaseType result) {
            n.op = op;
            expect(l, n.kids[0], BaseType::Int, op_text(e.op));
            expect(r, n.kids[1], BaseType::Int, op_text(e.op));
            return std::pair{std::move(n), Type{result, {}}};
        };
        switch (e.op) {
        case BinaryOp::Implies: return logical(Op::Implies);
        case BinaryOp::Iff: return logical(Op::Iff);
        case BinaryOp::Or: return logical(Op::Or);
        case BinaryOp::And: return logical(Op::And);
        case BinaryOp::Add: return arithmetic(Op::Add, BaseType::Int);
        case BinaryOp::Sub: return arithmetic(Op::Sub, BaseType::Int);
        case BinaryOp::Lt: return arithmetic(Op::Lt, BaseType::Bool);
        case BinaryOp::Le: return arithmetic(Op::Le, BaseType::Bool);
        case BinaryOp::Gt: return arithmetic(Op::Gt, BaseType::Bool);
        case BinaryOp::Ge: return arithmetic(Op::Ge, BaseType::Bool);
        case BinaryOp::Eq:
        case BinaryOp::Ne: {
            n.op = e.op == BinaryOp::Eq ? Op::Eq : Op::Ne;
            auto [ln, lt] = visit(l);
            auto [rn, rt] = visit(r);
            if (lt.base != rt.base)
                fail(DslError::Kind::Type, e, "cannot compare " + type_name(lt) + " with " + type_name(rt));
            if (lt.base == BaseType::List) fail(DslError::Kind::Type, e, "sequences cannot be compared");
            if (lt.base == BaseType::Token && !intersects(lt.universe, rt.universe)) {
                const auto& lit = rt.universe.size() == 1 ? r : l;
                const auto& other = rt.universe.size() == 1 ? lt : rt;
                require_overlap(rt.universe.size() == 1 ? rt : lt, other, lit, "the compared value");
            }
            n.token_compare = lt.base == BaseType::Token;
            n.kids[0] = std::move(ln);
            n.kids[1] = std::move(rn);
            return {std::move(n), Type{BaseType::Bool, {}}};
        }
        }
        fail(DslError::Kind::Syntax, e, "unknown operator");
    }

    std::pair<Node, Type> call(const Expr& e) {
        Node n;
        const auto& fn = e.text;
        if (fn == "abs") {
            arity(e, {1});
            n.op = Op::Abs;
            n.kids.resize(1);
            expect(*e.kids[0], n.kids[0], BaseType::Int, "abs");
            return {std::move(n), Type{BaseType::Int, {}}};
        }
        if (fn == "size") {
            arity(e, {1});
            n.op = Op::Size;
            n.kids.resize(1);
            sequence_argument(*e.kids[0], n.kids[0], fn);
            return {std::move(n), Type{BaseType::Int, {}}};
        }
        if (fn == "pos" || fn == "member" || fn == "before" || fn == "after") {
            arity(e, {2});
            n.op = fn == "pos" ? Op::Pos : fn == "member" ? Op::Member : fn == "before" ? Op::Before : Op::After;
            n.kids.resize(2);
            auto list = sequence_argument(*e.kids[0], n.kids[0], fn);
            auto tok = expect(*e.kids[1], n.kids[1], BaseType::Token, fn + " argument 2");
            require_overlap(tok, list, *e.kids[1], fn + " argument 1");
            if (n.op == Op::Pos) return {std::move(n), Type{BaseType::Int, {}}};
            if (n.op == Op::Member) return {std::move(n), Type{BaseType::Bool, {}}};
            return {std::move(n), Type{BaseType::List, list.universe}};
        }
        if (fn == "at") {
            arity(e, {2});
            n.op = Op::At;
            n.kids.resize(2);
            auto list = sequence_argument(*e.kids[0], n.kids[0], fn);
            expect(*e.kids[1], n.kids[1], BaseType::Int, "at argument 2");
            return {std::move(n), Type{BaseType::Token, list.universe}};
        }
        if (fn == "val") {
            arity(e, {1, 2});
            auto s = slot_argument(*e.kids[0], fn);
            const auto& kind = domain_.slot(s).kind;
            n.slot = static_cast<int>(s);
            if (e.kids.size() == 1) {
                if (!std::holds_alternative<ScalarSlot>(kind))
                    fail(DslError::Kind::Arity, e, "val(slot) with one argument needs a scalar slot");
                n.op = Op::SlotScalar;
                return {std::move(n), Type{BaseType::Token, sorted(domain_.element_ids(s))}};
            }
            if (!std::holds_alternative<AssignmentSlot>(kind))
                fail(DslError::Kind::Type, *e.kids[0],
                     "slot '" + e.kids[0]->text + "' is a " + std::string(kind_name(kind)) +
                         ", val(slot, key) needs an assignment");
            n.op = Op::Val;
            n.kids.resize(1);
            auto key = expect(*e.kids[1], n.kids[0], BaseType::Token, "val argument 2");
            require_overlap(key, Type{BaseType::List, sorted(domain_.element_ids(s))}, *e.kids[1],
                            "the keys of '" + domain_.slot(s).name + "'");
            return {std::move(n), Type{BaseType::Token, sorted(domain_.value_ids(s))}};
        }
        if (fn == "items") {
            arity(e, {1});
            auto s = slot_argument(*e.kids[0], fn);
            n.op = Op::ConstList;
            n.tokens = domain_.element_ids(s);
            return {std::move(n), Type{BaseType::List, sorted(domain_.element_ids(s))}};
        }
        fail(DslError::Kind::UnknownIdentifier, e, "unknown function '" + fn + "'");
    }

    std::pair<Node, Type> quantifier(const Expr& e) {
        Node n;
        n.op = Op::Quant;
        n.quant = e.quant;
        n.has_bound = e.kids.size() == 3;
        std::size_t i = 0;
        if (n.has_bound) {
            Node bound;
            expect(*e.kids[0], bound, BaseType::Int, std::string(quant_text(e.quant)) + " bound");
            n.kids.push_back(std::move(bound));
            i = 1;
        }
        const auto& var = e.text;
        if (domain_.find_slot(var)) fail(DslError::Kind::Type, e, "variable '" + var + "' shadows a slot");
        if (domain_.has_token(var)) fail(DslError::Kind::Type, e, "variable '" + var + "' shadows a token");
        if (find_var(var)) fail(DslError::Kind::Type, e, "variable '" + var + "' shadows an outer variable");
        if (scope_.size() >= kMaxNesting) fail(DslError::Kind::Type, e, "quantifiers nested too deeply");

        const auto& dom = *e.kids[i];
        Type var_type;
        if (dom.kind == NodeKind::Range) {
            n.range = true;
            Node lo;
            Node hi;
            expect(*dom.kids[0], lo, BaseType::Int, "range start");
            expect(*dom.kids[1], hi, BaseType::Int, "range end");
            n.kids.push_back(std::move(lo));
            n.kids.push_back(std::move(hi));
            var_type = Type{BaseType::Int, {}};
        } else {
            Node list;
            auto t = expect(dom, list, BaseType::List, std::string(quant_text(e.quant)) + " domain");
            n.kids.push_back(std::move(list));
            var_type = Type{BaseType::Token, t.universe};
        }

        n.var = static_cast<int>(scope_.size());
        scope_.push_back({var, var_type});
        max_vars_ = std::max(max_vars_, scope_.size());
        Node body;
        expect(*e.kids[i + 1], body, BaseType::Bool, std::string(quant_text(e.quant)) + " body");
        scope_.pop_back();
        n.kids.push_back(std::move(body));
        auto result = e.quant == QuantKind::Count ? BaseType::Int : BaseType::Bool;
        return {std::move(n), Type{result, {}}};
    }

    const DomainSpec& domain_;
    std::vector<Binding> scope_;
    std::set<std::size_t> used_;
    std::size_t max_vars_ = 0;
};

// ---------------------------------------------------------------------------

struct Context {
    const Candidate& candidate;
    std::array<std::int64_t, kMaxNesting> vars{};
};

std::int64_t scalar(const Node& n, Context& ctx);

void list(const Node& n, Context& ctx, std::vector<int>& out) {
    switch (n.op) {
    case Op::SlotList: {
        const auto& l = ctx.candidate.slots[static_cast<std::size_t>(n.slot)].list;
        out.insert(out.end(), l.begin(), l.end());
        return;
    }
    case Op::ConstList: out.insert(out.end(), n.tokens.begin(), n.tokens.end()); return;
    case Op::ListLit:
        for (const auto& k : n.kids) out.push_back(static_cast<int>(scalar(k, ctx)));
        return;
    case Op::Before:
    case Op::After: {
        std::vector<int> src;
        list(n.kids[0], ctx, src);
        auto tok = static_cast<int>(scalar(n.kids[1], ctx));
        auto it = tok < 0 ? src.end() : std::find(src.begin(), src.end(), tok);
        if (it == src.end()) return;
        if (n.op == Op::Before) out.insert(out.end(), src.begin(), it);
        else out.insert(out.end(), std::next(it), src.end());
        return;
    }
    default: return;
    }
}

const SlotState* indexed_slot(const Node& n, const Context& ctx) {
    if (n.op == Op::SlotList && n.indexed) return &ctx.candidate.slots[static_cast<std::size_t>(n.slot)];
    return nullptr;
}

std::int64_t quantify(const Node& n, Context& ctx) {
    std::size_t i = 0;
    std::int64_t bound = 0;
    if (n.has_bound) bound = scalar(n.kids[i++], ctx);
    const auto var = static_cast<std::size_t>(n.var);
    const Node& body = n.kids.back();

    std::int64_t hits = 0;
    // Returns false to stop early.
    auto step = [&](std::int64_t value) {
        ctx.vars[var] = value;
        bool b = scalar(body, ctx) != 0;
        switch (n.quant) {
        case QuantKind::All:
            if (!b) {
                hits = -1;
                return false;
            }
            return true;
        case QuantKind::Exists:
            if (b) {
                hits = 1;
                return false;
            }
            return true;
        case QuantKind::AtLeast:
            hits += b;
            return hits < bound;
        case QuantKind::Exactly:
        case QuantKind::AtMost:
            hits += b;
            return hits <= bound;
        case QuantKind::Count: hits += b; return true;
        }
        return true;
    };

    if (n.range) {
        auto lo = scalar(n.kids[i], ctx);
        auto hi = scalar(n.kids[i + 1], ctx);
        for (auto v = lo; v <= hi; ++v)
            if (!step(v)) break;
    } else {
        std::vector<int> items;
        list(n.kids[i], ctx, items);
        for (int v : items)
            if (!step(v)) break;
    }

    switch (n.quant) {
    case QuantKind::All: return hits >= 0;
    case QuantKind::Exists: return hits > 0;
    case QuantKind::Exactly: return hits == bound;
    case QuantKind::AtLeast: return hits >= bound;
    case QuantKind::AtMost: return hits <= bound;
    case QuantKind::Count: return hits;
    }
    return 0;
}

std::int64_t scalar(const Node& n, Context& ctx) {
    switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return ctx.vars[static_cast<std::size_t>(n.var)];
    case Op::SlotScalar: return ctx.candidate.slots[static_cast<std::size_t>(n.slot)].list.at(0);
    case Op::Not: return !scalar(n.kids[0], ctx);
    case Op::Neg: return -scalar(n.kids[0], ctx);
    case Op::And: return scalar(n.kids[0], ctx) && scalar(n.kids[1], ctx);
    case Op::Or: return scalar(n.kids[0], ctx) || scalar(n.kids[1], ctx);
    case Op::Implies: return !scalar(n.kids[0], ctx) || scalar(n.kids[1], ctx);
    case Op::Iff: return (scalar(n.kids[0], ctx) != 0) == (scalar(n.kids[1], ctx) != 0);
    case Op::Eq:
    case Op::Ne: {
        auto a = scalar(n.kids[0], ctx);
        auto b = scalar(n.kids[1], ctx);
        // Token -1 means "undefined" (e.g. at() past the end); it equals nothing.
        bool eq = a == b && !(n.token_compare && a < 0);
        return n.op == Op::Eq ? eq : !eq;
    }
    case Op::Lt: return scalar(n.kids[0], ctx) < scalar(n.kids[1], ctx);
    case Op::Le: return scalar(n.kids[0], ctx) <= scalar(n.kids[1], ctx);
    case Op::Gt: return scalar(n.kids[0], ctx) > scalar(n.kids[1], ctx);
    case Op::Ge: return scalar(n.kids[0], ctx) >= scalar(n.kids[1], ctx);
    case Op::Add: return scalar(n.kids[0], ctx) + scalar(n.kids[1], ctx);
    case Op::Sub: return scalar(n.kids[0], ctx) - scalar(n.kids[1], ctx);
    case Op::Abs: {
        auto v = scalar(n.kids[0], ctx);
        return v < 0 ? -v : v;
    }
    case Op::Val: {
        auto key = scalar(n.kids[0], ctx);
        if (key < 0) return -1;
        return ctx.candidate.slots[static_cast<std::size_t>(n.slot)].index[static_cast<std::size_t>(key)];
    }
    case Op::Pos: {
        auto tok = scalar(n.kids[1], ctx);
        if (tok < 0) return 0;
        if (const auto* s = indexed_slot(n.kids[0], ctx); s && n.kids[0].permutation)
            return s->index[static_cast<std::size_t>(tok)];
        std::vector<int> l;
        list(n.kids[0], ctx, l);
        auto it = std::find(l.begin(), l.end(), static_cast<int>(tok));
        return it == l.end() ? 0 : std::distance(l.begin(), it) + 1;
    }
    case Op::Member: {
        auto tok = scalar(n.kids[1], ctx);
        if (tok < 0) return 0;
        if (const auto* s = indexed_slot(n.kids[0], ctx)) return s->index[static_cast<std::size_t>(tok)] > 0;
        std::vector<int> l;
        list(n.kids[0], ctx, l);
        return std::find(l.begin(), l.end(), static_cast<int>(tok)) != l.end();
    }
    case Op::At: {
        auto idx = scalar(n.kids[1], ctx);
        if (const auto* s = indexed_slot(n.kids[0], ctx)) {
            if (idx < 1 || idx > static_cast<std::int64_t>(s->list.size())) return -1;
            return s->list[static_cast<std::size_t>(idx - 1)];
        }
        std::vector<int> l;
        list(n.kids[0], ctx, l);
        if (idx < 1 || idx > static_cast<std::int64_t>(l.size())) return -1;
        return l[static_cast<std::size_t>(idx - 1)];
    }
    case Op::Size: {
        if (const auto* s = indexed_slot(n.kids[0], ctx)) return static_cast<std::int64_t>(s->list.size());
        std::vector<int> l;
        list(n.kids[0], ctx, l);
        return static_cast<std::int64_t>(l.size());
    }
    case Op::Quant: return quantify(n, ctx);
    default: return 0;
    }
}

}  // namespace

Program check(const ExprPtr& expr, const DomainSpec& domain) {
    Checker checker(domain);
    auto [root, type] = checker.run(*expr);
    Program p;
    p.source_ = expr;
    p.root_ = std::make_shared<const Node>(std::move(root));
    p.slots_used_ = checker.slots_used();
    p.max_vars_ = checker.max_vars();
    return p;
}

Program compile(std::string_view source, const DomainSpec& domain) { return check(parse(source), domain); }

bool Program::eval(const Candidate& candidate) const {
    Context ctx{candidate, {}};
    return scalar(*root_, ctx) != 0;
}

bool eval(const Program& program, const Candidate& candidate) { return program.eval(candidate); }

bool eval(const Program& program, const DomainSpec& domain, const Arrangement& arrangement) {
    return program.eval(to_candidate(domain, arrangement));
}

}  // namespace puzzleforge::dsl
