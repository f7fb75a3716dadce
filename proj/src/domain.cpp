#include "puzzleforge/domain.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace puzzleforge {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto head = static_cast<unsigned char>(s.front());
    if (!(std::isalpha(head) || head == '_' || head >= 0x80)) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) || u == '_' || u >= 0x80;
    });
}

void require_tokens(const std::string& slot, std::string_view what, const std::vector<std::string>& tokens,
                    bool distinct) {
    if (tokens.empty()) throw DomainError("slot '" + slot + "': " + std::string(what) + " must be non-empty");
    std::set<std::string_view> seen;
    for (const auto& t : tokens) {
        if (t.empty() || trim(t) != t)
            throw DomainError("slot '" + slot + "': token '" + t + "' is empty or has surrounding whitespace");
        if (distinct && !seen.insert(t).second)
            throw DomainError("slot '" + slot + "': duplicate token '" + t + "' in " + std::string(what));
    }
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, std::uint64_t cap) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    if (p > cap) throw DomainTooLarge("domain size exceeds cap of " + std::to_string(cap));
    return static_cast<std::uint64_t>(p);
}

std::uint64_t slot_size(const SlotKind& kind, std::uint64_t cap) {
    return std::visit(
        overloaded{
            [&](const PermutationSlot& s) {
                std::uint64_t r = 1;
                for (std::uint64_t i = 2; i <= s.items.size(); ++i) r = checked_mul(r, i, cap);
                return r;
            },
            [&](const AssignmentSlot& s) {
                std::uint64_t r = 1;
                for (std::size_t i = 0; i < s.keys.size(); ++i) r = checked_mul(r, s.values.size(), cap);
                return r;
            },
            [&](const SubsetSlot& s) {
                std::uint64_t n = s.items.size();
                std::uint64_t k = std::min<std::uint64_t>(s.cardinality, n - s.cardinality);
                unsigned __int128 c = 1;
                for (std::uint64_t i = 0; i < k; ++i) {
                    c = c * (n - i) / (i + 1);
                    if (c > cap) throw DomainTooLarge("domain size exceeds cap of " + std::to_string(cap));
                }
                return static_cast<std::uint64_t>(c);
            },
            [&](const ScalarSlot& s) { return static_cast<std::uint64_t>(s.values.size()); },
        },
        kind);
}

std::vector<std::string> string_list(const json& j, std::string_view field) {
    if (!j.contains(field) || !j.at(std::string(field)).is_array())
        throw DomainError("expected string array field '" + std::string(field) + "'");
    std::vector<std::string> out;
    for (const auto& e : j.at(std::string(field))) {
        if (!e.is_string()) throw DomainError("non-string token in '" + std::string(field) + "'");
        out.push_back(e.get<std::string>());
    }
    return out;
}

}  // namespace

std::string trim(std::string_view s) {
    constexpr std::string_view ws = " \t\n\r\f\v";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

std::string_view kind_name(const SlotKind& kind) {
    return std::visit(overloaded{
                          [](const PermutationSlot&) { return std::string_view("permutation"); },
                          [](const AssignmentSlot&) { return std::string_view("assignment"); },
                          [](const SubsetSlot&) { return std::string_view("subset"); },
                          [](const ScalarSlot&) { return std::string_view("scalar"); },
                      },
                      kind);
}

DomainSpec DomainSpec::create(std::vector<Slot> slots) {
    if (slots.empty()) throw DomainError("domain must declare at least one slot");
    DomainSpec d;
    std::set<std::string> names;
    for (const auto& slot : slots) {
        if (!is_identifier(slot.name)) throw DomainError("slot name '" + slot.name + "' is not an identifier");
        if (!names.insert(slot.name).second) throw DomainError("duplicate slot name '" + slot.name + "'");
        std::visit(overloaded{
                       [&](const PermutationSlot& s) { require_tokens(slot.name, "items", s.items, true); },
                       [&](const AssignmentSlot& s) {
                           require_tokens(slot.name, "keys", s.keys, true);
                           require_tokens(slot.name, "values", s.values, true);
                       },
                       [&](const SubsetSlot& s) {
                           require_tokens(slot.name, "items", s.items, true);
                           if (s.cardinality < 1 || s.cardinality > s.items.size())
                               throw DomainError("slot '" + slot.name + "': subset cardinality out of range");
                       },
                       [&](const ScalarSlot& s) { require_tokens(slot.name, "values", s.values, true); },
                   },
                   slot.kind);
    }

    auto intern = [&](const std::string& t) {
        auto [it, inserted] = d.token_index_.try_emplace(t, static_cast<int>(d.tokens_.size()));
        if (inserted) d.tokens_.push_back(t);
        return it->second;
    };
    for (const auto& slot : slots) {
        std::vector<int> elements;
        std::vector<int> values;
        std::visit(overloaded{
                       [&](const PermutationSlot& s) {
                           for (const auto& t : s.items) elements.push_back(intern(t));
                       },
                       [&](const AssignmentSlot& s) {
                           for (const auto& t : s.keys) elements.push_back(intern(t));
                           for (const auto& t : s.values) values.push_back(intern(t));
                       },
                       [&](const SubsetSlot& s) {
                           for (const auto& t : s.items) elements.push_back(intern(t));
                       },
                       [&](const ScalarSlot& s) {
                           for (const auto& t : s.values) elements.push_back(intern(t));
                       },
                   },
                   slot.kind);
        d.element_ids_.push_back(std::move(elements));
        d.value_ids_.push_back(std::move(values));
    }
    d.slots_ = std::move(slots);
    return d;
}

std::optional<std::size_t> DomainSpec::find_slot(std::string_view name) const {
    for (std::size_t i = 0; i < slots_.size(); ++i)
        if (slots_[i].name == name) return i;
    return std::nullopt;
}

std::optional<int> DomainSpec::token_id(std::string_view token) const {
    auto it = token_index_.find(std::string(token));
    if (it == token_index_.end()) return std::nullopt;
    return it->second;
}

bool operator==(const DomainSpec& a, const DomainSpec& b) {
    return domain_to_json(a) == domain_to_json(b);
}

std::uint64_t domain_size(const DomainSpec& domain, std::uint64_t cap) {
    std::uint64_t total = 1;
    for (const auto& slot : domain.slots()) total = checked_mul(total, slot_size(slot.kind, cap), cap);
    return total;
}

json domain_to_json(const DomainSpec& domain) {
    json slots = json::array();
    for (const auto& slot : domain.slots()) {
        json s;
        s["name"] = slot.name;
        s["kind"] = kind_name(slot.kind);
        std::visit(overloaded{
                       [&](const PermutationSlot& k) { s["items"] = k.items; },
                       [&](const AssignmentSlot& k) {
                           s["keys"] = k.keys;
                           s["values"] = k.values;
                       },
                       [&](const SubsetSlot& k) {
                           s["items"] = k.items;
                           s["cardinality"] = k.cardinality;
                       },
                       [&](const ScalarSlot& k) { s["values"] = k.values; },
                   },
                   slot.kind);
        slots.push_back(std::move(s));
    }
    return json{{"slots", std::move(slots)}};
}

DomainSpec domain_from_json(const json& j) {
    if (!j.is_object() || !j.contains("slots") || !j.at("slots").is_array())
        throw DomainError("domain must be an object with a 'slots' array");
    std::vector<Slot> slots;
    for (const auto& s : j.at("slots")) {
        if (!s.is_object() || !s.contains("name") || !s.at("name").is_string() || !s.contains("kind") ||
            !s.at("kind").is_string())
            throw DomainError("slot entries need string 'name' and 'kind'");
        Slot slot;
        slot.name = s.at("name").get<std::string>();
        auto kind = s.at("kind").get<std::string>();
        if (kind == "permutation") {
            slot.kind = PermutationSlot{string_list(s, "items")};
        } else if (kind == "assignment") {
            slot.kind = AssignmentSlot{string_list(s, "keys"), string_list(s, "values")};
        } else if (kind == "subset") {
            if (!s.contains("cardinality") || !s.at("cardinality").is_number_unsigned())
                throw DomainError("subset slot '" + slot.name + "' needs a positive 'cardinality'");
            slot.kind = SubsetSlot{string_list(s, "items"), s.at("cardinality").get<std::size_t>()};
        } else if (kind == "scalar") {
            slot.kind = ScalarSlot{string_list(s, "values")};
        } else {
            throw DomainError("unknown slot kind '" + kind + "'");
        }
        slots.push_back(std::move(slot));
    }
    return DomainSpec::create(std::move(slots));
}

// ---------------------------------------------------------------------------

Candidate to_candidate(const DomainSpec& domain, const Arrangement& arrangement) {
    Candidate c;
    c.slots.resize(domain.slot_count());
    for (std::size_t i = 0; i < domain.slot_count(); ++i) {
        const auto& slot = domain.slot(i);
        auto it = arrangement.bindings.find(slot.name);
        if (it == arrangement.bindings.end()) throw DomainError("arrangement is missing slot '" + slot.name + "'");
        auto& st = c.slots[i];
        auto id = [&](const std::string& t) {
            auto v = domain.token_id(t);
            if (!v) throw DomainError("token '" + t + "' is not in the domain");
            return *v;
        };
        std::visit(overloaded{
                       [&](const PermutationSlot&) {
                           st.index.assign(domain.token_count(), 0);
                           const auto& seq = std::get<std::vector<std::string>>(it->second);
                           for (std::size_t p = 0; p < seq.size(); ++p) {
                               st.list.push_back(id(seq[p]));
                               st.index[static_cast<std::size_t>(st.list.back())] = static_cast<int>(p + 1);
                           }
                       },
                       [&](const AssignmentSlot& s) {
                           st.index.assign(domain.token_count(), -1);
                           const auto& m = std::get<std::map<std::string, std::string>>(it->second);
                           for (const auto& k : s.keys) {
                               int v = id(m.at(k));
                               st.list.push_back(v);
                               st.index[static_cast<std::size_t>(id(k))] = v;
                           }
                       },
                       [&](const SubsetSlot&) {
                           st.index.assign(domain.token_count(), 0);
                           for (const auto& t : std::get<std::vector<std::string>>(it->second))
                               st.index[static_cast<std::size_t>(id(t))] = 1;
                           for (int e : domain.element_ids(i))
                               if (st.index[static_cast<std::size_t>(e)]) st.list.push_back(e);
                       },
                       [&](const ScalarSlot&) {
                           st.index.assign(domain.token_count(), 0);
                           int v = id(std::get<std::string>(it->second));
                           st.list.push_back(v);
                           st.index[static_cast<std::size_t>(v)] = 1;
                       },
                   },
                   slot.kind);
    }
    return c;
}

Arrangement to_arrangement(const DomainSpec& domain, const Candidate& candidate) {
    Arrangement a;
    for (std::size_t i = 0; i < domain.slot_count(); ++i) {
        const auto& slot = domain.slot(i);
        const auto& st = candidate.slots.at(i);
        std::visit(overloaded{
                       [&](const AssignmentSlot& s) {
                           std::map<std::string, std::string> m;
                           for (std::size_t k = 0; k < s.keys.size(); ++k) m[s.keys[k]] = domain.token(st.list[k]);
                           a.bindings[slot.name] = std::move(m);
                       },
                       [&](const ScalarSlot&) { a.bindings[slot.name] = domain.token(st.list.at(0)); },
                       [&](const auto&) {
                           std::vector<std::string> seq;
                           for (int t : st.list) seq.push_back(domain.token(t));
                           a.bindings[slot.name] = std::move(seq);
                       },
                   },
                   slot.kind);
    }
    return a;
}

// ---------------------------------------------------------------------------

ArrangementSchema schema_of(const DomainSpec& domain) {
    ArrangementSchema schema;
    schema.bare = domain.slot_count() == 1;
    for (const auto& slot : domain.slots()) {
        SchemaField f;
        f.key = slot.name;
        std::visit(overloaded{
                       [&](const PermutationSlot& s) {
                           f.shape = JsonShape::Array;
                           f.elements = s.items;
                           f.length = s.items.size();
                           f.distinct = true;
                           f.ordered = true;
                       },
                       [&](const AssignmentSlot& s) {
                           f.shape = JsonShape::Object;
                           f.elements = s.keys;
                           f.values = s.values;
                       },
                       [&](const SubsetSlot& s) {
                           f.shape = JsonShape::Array;
                           f.elements = s.items;
                           f.length = s.cardinality;
                           f.distinct = true;
                       },
                       [&](const ScalarSlot& s) {
                           f.shape = JsonShape::String;
                           f.elements = s.values;
                       },
                   },
                   slot.kind);
        schema.fields.push_back(std::move(f));
    }
    return schema;
}

DomainSpec domain_of(const ArrangementSchema& schema) {
    std::vector<Slot> slots;
    for (const auto& f : schema.fields) {
        Slot s{f.key, ScalarSlot{}};
        switch (f.shape) {
        case JsonShape::Array:
            if (!f.distinct) throw DomainError("array field '" + f.key + "' must be distinct");
            if (f.ordered) {
                if (f.length != f.elements.size())
                    throw DomainError("ordered array field '" + f.key + "' must use every element once");
                s.kind = PermutationSlot{f.elements};
            } else {
                s.kind = SubsetSlot{f.elements, f.length};
            }
            break;
        case JsonShape::Object: s.kind = AssignmentSlot{f.elements, f.values}; break;
        case JsonShape::String: s.kind = ScalarSlot{f.elements}; break;
        }
        slots.push_back(std::move(s));
    }
    auto d = DomainSpec::create(std::move(slots));
    if (schema.bare != (d.slot_count() == 1)) throw DomainError("schema 'root' disagrees with its field count");
    return d;
}

json schema_to_json(const ArrangementSchema& schema) {
    json fields = json::array();
    for (const auto& f : schema.fields) {
        json j;
        j["key"] = f.key;
        switch (f.shape) {
        case JsonShape::Array:
            j["type"] = "array";
            j["elements"] = f.elements;
            j["length"] = f.length;
            j["distinct"] = f.distinct;
            j["ordered"] = f.ordered;
            break;
        case JsonShape::Object:
            j["type"] = "object";
            j["keys"] = f.elements;
            j["values"] = f.values;
            break;
        case JsonShape::String:
            j["type"] = "string";
            j["values"] = f.elements;
            break;
        }
        fields.push_back(std::move(j));
    }
    return json{{"root", schema.bare ? "value" : "object"}, {"fields", std::move(fields)}};
}

ArrangementSchema schema_from_json(const json& j) {
    if (!j.is_object() || !j.contains("fields") || !j.at("fields").is_array() || !j.contains("root"))
        throw DomainError("schema must be an object with 'root' and 'fields'");
    ArrangementSchema s;
    s.bare = j.at("root") == "value";
    for (const auto& fj : j.at("fields")) {
        if (!fj.is_object() || !fj.contains("key") || !fj.contains("type"))
            throw DomainError("schema field needs 'key' and 'type'");
        SchemaField f;
        f.key = fj.at("key").get<std::string>();
        auto type = fj.at("type").get<std::string>();
        if (type == "array") {
            f.shape = JsonShape::Array;
            f.elements = string_list(fj, "elements");
            f.length = fj.at("length").get<std::size_t>();
            f.distinct = fj.value("distinct", false);
            f.ordered = fj.value("ordered", false);
        } else if (type == "object") {
            f.shape = JsonShape::Object;
            f.elements = string_list(fj, "keys");
            f.values = string_list(fj, "values");
        } else if (type == "string") {
            f.shape = JsonShape::String;
            f.elements = string_list(fj, "values");
        } else {
            throw DomainError("unknown schema field type '" + type + "'");
        }
        s.fields.push_back(std::move(f));
    }
    return s;
}

namespace {

void check_field(const json& value, const SchemaField& f, const std::string& path, FormatReport& report) {
    auto add = [&](std::string p, std::string kind, std::string detail) {
        report.violations.push_back({std::move(p), std::move(kind), std::move(detail)});
    };
    auto in_range = [](const std::vector<std::string>& universe, const std::string& t) {
        return std::find(universe.begin(), universe.end(), t) != universe.end();
    };

    switch (f.shape) {
    case JsonShape::Array: {
        if (!value.is_array()) {
            add(path, "wrong shape", "expected an array");
            return;
        }
        if (value.size() != f.length)
            add(path, "length mismatch",
                "expected " + std::to_string(f.length) + " elements, got " + std::to_string(value.size()));
        std::set<std::string> seen;
        for (std::size_t i = 0; i < value.size(); ++i) {
            auto p = path + "[" + std::to_string(i) + "]";
            if (!value[i].is_string()) {
                add(p, "wrong shape", "expected a string token");
                continue;
            }
            auto t = trim(value[i].get<std::string>());
            if (!in_range(f.elements, t)) add(p, "token out of range", "'" + t + "'");
            if (f.distinct && !seen.insert(t).second) add(p, "duplicate in a distinct slot", "'" + t + "'");
        }
        return;
    }
    case JsonShape::Object: {
        if (!value.is_object()) {
            add(path, "wrong shape", "expected an object");
            return;
        }
        std::set<std::string> seen;
        for (const auto& [k, v] : value.items()) {
            auto key = trim(k);
            auto p = path + "[\"" + key + "\"]";
            if (!in_range(f.elements, key)) add(p, "token out of range", "key '" + key + "'");
            if (!seen.insert(key).second) add(p, "duplicate in a distinct slot", "key '" + key + "'");
            if (!v.is_string()) {
                add(p, "wrong shape", "expected a string value");
                continue;
            }
            auto t = trim(v.get<std::string>());
            if (!in_range(f.values, t)) add(p, "token out of range", "'" + t + "'");
        }
        for (const auto& k : f.elements)
            if (!seen.count(k)) add(path + "[\"" + k + "\"]", "missing key", "'" + k + "'");
        return;
    }
    case JsonShape::String: {
        if (!value.is_string()) {
            add(path, "wrong shape", "expected a string");
            return;
        }
        auto t = trim(value.get<std::string>());
        if (!in_range(f.elements, t)) add(path, "token out of range", "'" + t + "'");
        return;
    }
    }
}

}  // namespace

FormatReport conforms(const json& candidate, const ArrangementSchema& schema) {
    FormatReport report;
    if (schema.bare) {
        if (!schema.fields.empty()) check_field(candidate, schema.fields.front(), "$", report);
        return report;
    }
    if (!candidate.is_object()) {
        report.violations.push_back({"$", "wrong shape", "expected an object"});
        return report;
    }
    for (const auto& f : schema.fields) {
        if (!candidate.contains(f.key)) {
            report.violations.push_back({"$." + f.key, "missing key", "'" + f.key + "'"});
            continue;
        }
        check_field(candidate.at(f.key), f, "$." + f.key, report);
    }
    for (const auto& [k, v] : candidate.items()) {
        bool known = std::any_of(schema.fields.begin(), schema.fields.end(),
                                 [&](const SchemaField& f) { return f.key == k; });
        if (!known) report.violations.push_back({"$." + k, "unexpected key", "'" + k + "'"});
    }
    return report;
}

Arrangement arrangement_from_json(const DomainSpec& domain, const json& candidate) {
    auto schema = schema_of(domain);
    auto report = conforms(candidate, schema);
    if (!report.ok()) {
        const auto& v = report.violations.front();
        throw DomainError("nonconformant arrangement: " + v.kind + " at " + v.path + " " + v.detail);
    }
    Arrangement a;
    for (std::size_t i = 0; i < domain.slot_count(); ++i) {
        const auto& slot = domain.slot(i);
        const json& v = schema.bare ? candidate : candidate.at(slot.name);
        std::visit(overloaded{
                       [&](const PermutationSlot&) {
                           std::vector<std::string> seq;
                           for (const auto& e : v) seq.push_back(trim(e.get<std::string>()));
                           a.bindings[slot.name] = std::move(seq);
                       },
                       [&](const SubsetSlot& s) {
                           std::set<std::string> members;
                           for (const auto& e : v) members.insert(trim(e.get<std::string>()));
                           std::vector<std::string> seq;
                           for (const auto& item : s.items)
                               if (members.count(item)) seq.push_back(item);
                           a.bindings[slot.name] = std::move(seq);
                       },
                       [&](const AssignmentSlot&) {
                           std::map<std::string, std::string> m;
                           for (const auto& [k, val] : v.items()) m[trim(k)] = trim(val.get<std::string>());
                           a.bindings[slot.name] = std::move(m);
                       },
                       [&](const ScalarSlot&) { a.bindings[slot.name] = trim(v.get<std::string>()); },
                   },
                   slot.kind);
    }
    return a;
}

json arrangement_to_json(const DomainSpec& domain, const Arrangement& arrangement) {
    json out = json::object();
    for (const auto& slot : domain.slots()) {
        const auto& bound = arrangement.bindings.at(slot.name);
        json v;
        if (const auto* a = std::get_if<AssignmentSlot>(&slot.kind)) {
            const auto& m = std::get<std::map<std::string, std::string>>(bound);
            v = json::object();
            for (const auto& k : a->keys) v[k] = m.at(k);
        } else if (std::holds_alternative<ScalarSlot>(slot.kind)) {
            v = std::get<std::string>(bound);
        } else {
            v = std::get<std::vector<std::string>>(bound);
        }
        if (domain.slot_count() == 1) return v;
        out[slot.name] = std::move(v);
    }
    return out;
}

}  // namespace puzzleforge
