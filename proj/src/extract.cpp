#include "puzzleforge/extract.hpp"

#include <optional>

namespace puzzleforge {

namespace {

// End of the bracketed segment opening at `begin`, one past the closing
// bracket; nullopt when brackets mismatch or never close.
std::optional<std::size_t> segment_end(std::string_view text, std::size_t begin) {
    std::string stack;
    char quote = 0;
    for (std::size_t i = begin; i < text.size(); ++i) {
        char c = text[i];
        if (quote) {
            if (c == '\\') {
                ++i;
            } else if (c == quote) {
                quote = 0;
            } else if (c == '\n') {
                return std::nullopt;
            }
            continue;
        }
        switch (c) {
        case '"':
        case '\'': quote = c; break;
        case '[':
        case '{': stack.push_back(c); break;
        case ']':
        case '}':
            if (stack.empty() || stack.back() != (c == ']' ? '[' : '{')) return std::nullopt;
            stack.pop_back();
            if (stack.empty()) return i + 1;
            break;
        default: break;
        }
    }
    return std::nullopt;
}

}  // namespace

std::string normalize_literal(std::string_view in) {
    // Pass 1: quotes.
    std::string s;
    s.reserve(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        char c = in[i];
        if (c == '"') {
            s += c;
            for (++i; i < in.size(); ++i) {
                s += in[i];
                if (in[i] == '\\' && i + 1 < in.size()) {
                    s += in[++i];
                } else if (in[i] == '"') {
                    break;
                }
            }
        } else if (c == '\'') {
            s += '"';
            for (++i; i < in.size() && in[i] != '\''; ++i) {
                if (in[i] == '\\' && i + 1 < in.size()) {
                    char next = in[++i];
                    if (next == '\'') {
                        s += '\'';
                    } else {
                        s += '\\';
                        s += next;
                    }
                } else if (in[i] == '"') {
                    s += "\\\"";
                } else {
                    s += in[i];
                }
            }
            s += '"';
        } else {
            s += c;
        }
    }
    // Pass 2: set literals.
    struct Open {
        std::size_t at;
        bool colon;
    };
    std::vector<Open> braces;
    std::vector<char> kinds;
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            braces.push_back({i, false});
            kinds.push_back('{');
        } else if (c == '[') {
            kinds.push_back('[');
        } else if (c == ':' && !kinds.empty() && kinds.back() == '{') {
            braces.back().colon = true;
        } else if (c == '}' && !kinds.empty() && kinds.back() == '{') {
            if (!braces.back().colon) {
                s[braces.back().at] = '[';
                s[i] = ']';
            }
            braces.pop_back();
            kinds.pop_back();
        } else if (c == ']' && !kinds.empty() && kinds.back() == '[') {
            kinds.pop_back();
        }
    }
    return s;
}

std::vector<json> json_segments(std::string_view text) {
    std::vector<json> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '[' && text[i] != '{') {
            ++i;
            continue;
        }
        auto end = segment_end(text, i);
        if (!end) {
            ++i;
            continue;
        }
        auto parsed = json::parse(normalize_literal(text.substr(i, *end - i)), nullptr, false);
        if (!parsed.is_discarded()) out.push_back(std::move(parsed));
        i = *end;
    }
    return out;
}

std::vector<std::string> quoted_strings(std::string_view text) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char q = text[i];
        if (q != '"' && q != '\'') continue;
        auto close = text.find(q, i + 1);
        if (close == std::string_view::npos) break;
        auto body = text.substr(i + 1, close - i - 1);
        if (body.find('\n') == std::string_view::npos) out.emplace_back(body);
        i = close;
    }
    return out;
}

}  // namespace puzzleforge
