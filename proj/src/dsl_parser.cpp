#include <cctype>
#include <optional>

#include "puzzleforge/dsl.hpp"

namespace puzzleforge::dsl {

namespace {

enum class Tok {
    End,
    Int,
    String,
    Ident,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    DotDot,
    Plus,
    Minus,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Bang,
    AndAnd,
    OrOr,
    Arrow,     // =>
    DArrow,    // <=>
};

struct Token {
    Tok kind = Tok::End;
    SourceSpan span;
    std::string text;
    std::int64_t number = 0;
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            if (pos_ >= src_.size()) {
                out.push_back({Tok::End, {pos_, pos_}, {}, 0});
                return out;
            }
            out.push_back(next());
        }
    }

private:
    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool starts(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

    [[noreturn]] void fail(std::size_t at, const std::string& msg) const {
        throw DslError(DslError::Kind::Syntax, {at, std::min(at + 1, src_.size())}, msg);
    }

    Token punct(Tok kind, std::size_t len) {
        Token t{kind, {pos_, pos_ + len}, std::string(src_.substr(pos_, len)), 0};
        pos_ += len;
        return t;
    }

    Token next() {
        const std::size_t start = pos_;
        const auto c = static_cast<unsigned char>(src_[pos_]);

        // Unicode comparison glyphs take precedence over identifier bytes.
        if (starts("≠")) return punct(Tok::Ne, 3);
        if (starts("≤")) return punct(Tok::Le, 3);
        if (starts("≥")) return punct(Tok::Ge, 3);

        if (std::isdigit(c)) {
            std::int64_t v = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                if (v > (INT64_MAX - 9) / 10) fail(start, "integer literal too large");
                v = v * 10 + (src_[pos_] - '0');
                ++pos_;
            }
            if (pos_ < src_.size() && ident_char(static_cast<unsigned char>(src_[pos_])))
                fail(pos_, "unexpected character after integer literal");
            return {Tok::Int, {start, pos_}, std::string(src_.substr(start, pos_ - start)), v};
        }
        if (ident_start(c)) {
            while (pos_ < src_.size() && ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            return {Tok::Ident, {start, pos_}, std::string(src_.substr(start, pos_ - start)), 0};
        }
        if (c == '"' || c == '\'') {
            const char quote = static_cast<char>(c);
            std::string value;
            ++pos_;
            for (;;) {
                if (pos_ >= src_.size()) fail(start, "unterminated string literal");
                char ch = src_[pos_++];
                if (ch == quote) break;
                if (ch == '\\') {
                    if (pos_ >= src_.size()) fail(start, "unterminated string literal");
                    char esc = src_[pos_++];
                    if (esc != '\\' && esc != '"' && esc != '\'') fail(pos_ - 2, "unknown escape sequence");
                    value.push_back(esc);
                    continue;
                }
                value.push_back(ch);
            }
            return {Tok::String, {start, pos_}, std::move(value), 0};
        }
        if (starts("<=>")) return punct(Tok::DArrow, 3);
        if (starts("=>")) return punct(Tok::Arrow, 2);
        if (starts("==")) return punct(Tok::Eq, 2);
        if (starts("!=")) return punct(Tok::Ne, 2);
        if (starts("<=")) return punct(Tok::Le, 2);
        if (starts(">=")) return punct(Tok::Ge, 2);
        if (starts("&&")) return punct(Tok::AndAnd, 2);
        if (starts("||")) return punct(Tok::OrOr, 2);
        if (starts("..")) return punct(Tok::DotDot, 2);
        switch (c) {
        case '(': return punct(Tok::LParen, 1);
        case ')': return punct(Tok::RParen, 1);
        case '[': return punct(Tok::LBracket, 1);
        case ']': return punct(Tok::RBracket, 1);
        case ',': return punct(Tok::Comma, 1);
        case '+': return punct(Tok::Plus, 1);
        case '-': return punct(Tok::Minus, 1);
        case '=': return punct(Tok::Eq, 1);
        case '<': return punct(Tok::Lt, 1);
        case '>': return punct(Tok::Gt, 1);
        case '!': return punct(Tok::Bang, 1);
        default: break;
        }
        fail(start, std::string("unexpected character '") + static_cast<char>(c) + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

std::optional<QuantKind> quantifier_named(std::string_view name) {
    if (name == "all") return QuantKind::All;
    if (name == "exists") return QuantKind::Exists;
    if (name == "exactly") return QuantKind::Exactly;
    if (name == "atleast") return QuantKind::AtLeast;
    if (name == "atmost") return QuantKind::AtMost;
    if (name == "count") return QuantKind::Count;
    return std::nullopt;
}

bool is_keyword(std::string_view s) {
    return s == "true" || s == "false" || s == "not" || s == "and" || s == "or" || s == "implies" ||
           s == "iff" || s == "in";
}

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(Lexer(src).run()), src_size_(src.size()) {}

    ExprPtr run() {
        auto e = expression();
        if (peek().kind != Tok::End) fail(peek(), "unexpected trailing input");
        return e;
    }

private:
    using Node = std::shared_ptr<Expr>;

    const Token& peek() const { return toks_[i_]; }
    const Token& take() { return toks_[i_++]; }
    bool peek_word(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }

    [[noreturn]] void fail(const Token& t, const std::string& msg) const {
        std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw DslError(DslError::Kind::Syntax, t.span, msg + " (found " + got + ")");
    }

    const Token& expect(Tok kind, std::string_view what) {
        if (peek().kind != kind) fail(peek(), "expected " + std::string(what));
        return take();
    }

    static Node make(NodeKind kind, SourceSpan span) {
        auto n = std::make_shared<Expr>();
        n->kind = kind;
        n->span = span;
        return n;
    }

    static Node binary(BinaryOp op, ExprPtr l, ExprPtr r) {
        auto n = make(NodeKind::Binary, {l->span.begin, r->span.end});
        n->op = op;
        n->kids = {std::move(l), std::move(r)};
        return n;
    }

    ExprPtr expression() { return implication(); }

    ExprPtr implication() {
        auto lhs = disjunction();
        std::optional<BinaryOp> op;
        if (peek_word("implies") || peek().kind == Tok::Arrow) op = BinaryOp::Implies;
        else if (peek_word("iff") || peek().kind == Tok::DArrow) op = BinaryOp::Iff;
        if (!op) return lhs;
        take();
        return binary(*op, std::move(lhs), implication());
    }

    ExprPtr disjunction() {
        auto lhs = conjunction();
        while (peek_word("or") || peek().kind == Tok::OrOr) {
            take();
            lhs = binary(BinaryOp::Or, std::move(lhs), conjunction());
        }
        return lhs;
    }

    ExprPtr conjunction() {
        auto lhs = comparison();
        while (peek_word("and") || peek().kind == Tok::AndAnd) {
            take();
            lhs = binary(BinaryOp::And, std::move(lhs), comparison());
        }
        return lhs;
    }

    std::optional<BinaryOp> comparison_op() const {
        switch (peek().kind) {
        case Tok::Eq: return BinaryOp::Eq;
        case Tok::Ne: return BinaryOp::Ne;
        case Tok::Lt: return BinaryOp::Lt;
        case Tok::Le: return BinaryOp::Le;
        case Tok::Gt: return BinaryOp::Gt;
        case Tok::Ge: return BinaryOp::Ge;
        default: return std::nullopt;
        }
    }

    ExprPtr comparison() {
        auto lhs = additive();
        auto op = comparison_op();
        if (!op) return lhs;
        take();
        auto result = binary(*op, std::move(lhs), additive());
        if (comparison_op()) fail(peek(), "comparisons do not chain; parenthesize");
        return result;
    }

    ExprPtr additive() {
        auto lhs = unary();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            auto op = take().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
            lhs = binary(op, std::move(lhs), unary());
        }
        return lhs;
    }

    ExprPtr unary() {
        if (peek_word("not") || peek().kind == Tok::Bang || peek().kind == Tok::Minus) {
            const auto& t = take();
            auto kid = unary();
            auto n = make(t.kind == Tok::Minus ? NodeKind::Neg : NodeKind::Not, {t.span.begin, kid->span.end});
            n->kids = {std::move(kid)};
            return n;
        }
        return primary();
    }

    ExprPtr primary() {
        const auto& t = peek();
        switch (t.kind) {
        case Tok::Int: {
            take();
            auto n = make(NodeKind::Int, t.span);
            n->number = t.number;
            return n;
        }
        case Tok::String: {
            take();
            auto n = make(NodeKind::String, t.span);
            n->text = t.text;
            return n;
        }
        case Tok::LParen: {
            take();
            auto e = expression();
            expect(Tok::RParen, "')'");
            return e;
        }
        case Tok::LBracket: {
            const auto& open = take();
            auto n = make(NodeKind::List, open.span);
            if (peek().kind != Tok::RBracket) {
                n->kids.push_back(expression());
                while (peek().kind == Tok::Comma) {
                    take();
                    n->kids.push_back(expression());
                }
            }
            n->span.end = expect(Tok::RBracket, "']'").span.end;
            return n;
        }
        case Tok::Ident: {
            if (t.text == "true" || t.text == "false") {
                take();
                auto n = make(NodeKind::Bool, t.span);
                n->flag = t.text == "true";
                return n;
            }
            if (is_keyword(t.text)) fail(t, "unexpected keyword");
            const auto& name = take();
            if (peek().kind != Tok::LParen) {
                auto n = make(NodeKind::Ident, name.span);
                n->text = name.text;
                return n;
            }
            if (auto q = quantifier_named(name.text)) return quantifier(name, *q);
            return call(name);
        }
        default: fail(t, "expected an expression");
        }
    }

    ExprPtr call(const Token& name) {
        expect(Tok::LParen, "'('");
        auto n = make(NodeKind::Call, name.span);
        n->text = name.text;
        if (peek().kind != Tok::RParen) {
            n->kids.push_back(expression());
            while (peek().kind == Tok::Comma) {
                take();
                n->kids.push_back(expression());
            }
        }
        n->span.end = expect(Tok::RParen, "')'").span.end;
        return n;
    }

    // all(x in D, body) / exactly(n, x in D, body) / count(x in D, body)
    ExprPtr quantifier(const Token& name, QuantKind q) {
        expect(Tok::LParen, "'('");
        auto n = make(NodeKind::Quantifier, name.span);
        n->quant = q;
        if (q == QuantKind::Exactly || q == QuantKind::AtLeast || q == QuantKind::AtMost) {
            n->kids.push_back(expression());
            expect(Tok::Comma, "',' after the quantifier bound");
        }
        const auto& var = expect(Tok::Ident, "a bound variable name");
        if (is_keyword(var.text)) fail(var, "keyword cannot be a variable name");
        n->text = var.text;
        if (!peek_word("in")) fail(peek(), "expected 'in'");
        take();
        auto domain = expression();
        if (peek().kind == Tok::DotDot) {
            take();
            auto hi = expression();
            auto range = make(NodeKind::Range, {domain->span.begin, hi->span.end});
            range->kids = {std::move(domain), std::move(hi)};
            domain = std::move(range);
        }
        n->kids.push_back(std::move(domain));
        expect(Tok::Comma, "',' before the quantifier body");
        n->kids.push_back(expression());
        n->span.end = expect(Tok::RParen, "')'").span.end;
        return n;
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    std::size_t src_size_;
};

// Printer precedence: larger binds tighter.
int precedence(const Expr& e) {
    switch (e.kind) {
    case NodeKind::Binary:
        switch (e.op) {
        case BinaryOp::Implies:
        case BinaryOp::Iff: return 0;
        case BinaryOp::Or: return 1;
        case BinaryOp::And: return 2;
        case BinaryOp::Add:
        case BinaryOp::Sub: return 4;
        default: return 3;
        }
    case NodeKind::Not:
    case NodeKind::Neg: return 5;
    default: return 6;
    }
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void print_into(const Expr& e, std::string& out);

void print_child(const Expr& kid, bool parens, std::string& out) {
    if (parens) out.push_back('(');
    print_into(kid, out);
    if (parens) out.push_back(')');
}

void print_list(const std::vector<ExprPtr>& kids, std::size_t from, std::string& out) {
    for (std::size_t i = from; i < kids.size(); ++i) {
        if (i > from) out += ", ";
        print_into(*kids[i], out);
    }
}

void print_into(const Expr& e, std::string& out) {
    switch (e.kind) {
    case NodeKind::Bool: out += e.flag ? "true" : "false"; return;
    case NodeKind::Int: out += std::to_string(e.number); return;
    case NodeKind::String: out += quote(e.text); return;
    case NodeKind::Ident: out += e.text; return;
    case NodeKind::Not:
        out += "not ";
        print_child(*e.kids[0], precedence(*e.kids[0]) < 5, out);
        return;
    case NodeKind::Neg:
        out += "-";
        print_child(*e.kids[0], precedence(*e.kids[0]) < 5, out);
        return;
    case NodeKind::Binary: {
        const int p = precedence(e);
        const bool right_assoc = p == 0;
        const bool non_assoc = p == 3;
        const int lp = precedence(*e.kids[0]);
        const int rp = precedence(*e.kids[1]);
        print_child(*e.kids[0], lp < p || (lp == p && (right_assoc || non_assoc)), out);
        out += " ";
        out += op_text(e.op);
        out += " ";
        print_child(*e.kids[1], rp < p || (rp == p && !right_assoc), out);
        return;
    }
    case NodeKind::Call:
        out += e.text;
        out += "(";
        print_list(e.kids, 0, out);
        out += ")";
        return;
    case NodeKind::Quantifier: {
        out += quant_text(e.quant);
        out += "(";
        std::size_t i = 0;
        if (e.kids.size() == 3) {
            print_into(*e.kids[0], out);
            out += ", ";
            i = 1;
        }
        out += e.text;
        out += " in ";
        print_into(*e.kids[i], out);
        out += ", ";
        print_into(*e.kids[i + 1], out);
        out += ")";
        return;
    }
    case NodeKind::Range:
        print_into(*e.kids[0], out);
        out += "..";
        print_into(*e.kids[1], out);
        return;
    case NodeKind::List:
        out += "[";
        print_list(e.kids, 0, out);
        out += "]";
        return;
    }
}

}  // namespace

std::string_view op_text(BinaryOp op) {
    switch (op) {
    case BinaryOp::Implies: return "implies";
    case BinaryOp::Iff: return "iff";
    case BinaryOp::Or: return "or";
    case BinaryOp::And: return "and";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    }
    return "?";
}

std::string_view quant_text(QuantKind q) {
    switch (q) {
    case QuantKind::All: return "all";
    case QuantKind::Exists: return "exists";
    case QuantKind::Exactly: return "exactly";
    case QuantKind::AtLeast: return "atleast";
    case QuantKind::AtMost: return "atmost";
    case QuantKind::Count: return "count";
    }
    return "?";
}

ExprPtr parse(std::string_view source) { return Parser(source).run(); }

std::string print(const Expr& expr) {
    std::string out;
    print_into(expr, out);
    return out;
}

bool equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.kids.size() != b.kids.size()) return false;
    switch (a.kind) {
    case NodeKind::Bool:
        if (a.flag != b.flag) return false;
        break;
    case NodeKind::Int:
        if (a.number != b.number) return false;
        break;
    case NodeKind::String:
    case NodeKind::Ident:
    case NodeKind::Call:
        if (a.text != b.text) return false;
        break;
    case NodeKind::Binary:
        if (a.op != b.op) return false;
        break;
    case NodeKind::Quantifier:
        if (a.quant != b.quant || a.text != b.text) return false;
        break;
    default: break;
    }
    for (std::size_t i = 0; i < a.kids.size(); ++i)
        if (!equal(*a.kids[i], *b.kids[i])) return false;
    return true;
}

}  // namespace puzzleforge::dsl
