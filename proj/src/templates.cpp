#include "puzzleforge/templates.hpp"

#include <fstream>
#include <sstream>

#include "puzzleforge/store.hpp"

namespace puzzleforge {

namespace {

struct Embedded {
    const char* key;
    const char* text;
};

const Embedded kEmbedded[] = {
#include "puzzleforge/embedded_templates.inc"
};

std::string key_of(Language language, std::string_view name) {
    return std::string(language == Language::CN ? "cn/" : "en/") + std::string(name);
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
    return out;
}

}  // namespace

TemplateSet TemplateSet::builtin() {
    TemplateSet t;
    for (const auto& e : kEmbedded) t.texts_[e.key] = e.text;
    return t;
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
    auto t = builtin();
    if (!std::filesystem::is_directory(dir)) throw IoError("template directory not found: " + dir.string());
    for (const char* lang : {"en", "cn"}) {
        const auto sub = dir / lang;
        if (!std::filesystem::is_directory(sub)) continue;
        for (const auto& entry : std::filesystem::directory_iterator(sub)) {
            if (entry.path().extension() != ".txt") continue;
            t.texts_[std::string(lang) + "/" + entry.path().stem().string()] = read_text(entry.path());
        }
    }
    return t;
}

const std::string& TemplateSet::get(Language language, std::string_view name) const {
    auto it = texts_.find(key_of(language, name));
    if (it == texts_.end()) it = texts_.find(key_of(Language::EN, name));
    if (it == texts_.end()) throw PreconditionError("no prompt template named '" + std::string(name) + "'");
    return it->second;
}

json TemplateSet::hashes() const {
    json out = json::object();
    for (const auto& [k, v] : texts_) out[k] = sha256_hex(v);
    return out;
}

bool has_placeholder(std::string_view tmpl, std::string_view name) {
    return tmpl.find("[[[" + std::string(name) + "]]]") != std::string_view::npos;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        auto open = tmpl.find("[[[", i);
        if (open == std::string_view::npos) break;
        auto close = tmpl.find("]]]", open + 3);
        if (close == std::string_view::npos) break;
        std::string key(tmpl.substr(open + 3, close - open - 3));
        auto it = values.find(key);
        if (it == values.end()) throw PreconditionError("template placeholder [[[" + key + "]]] has no value");
        out.append(tmpl.substr(i, open - i));
        out += it->second;
        i = close + 3;
    }
    out.append(tmpl.substr(i));
    return out;
}

std::string describe_schema(const ArrangementSchema& schema, Language language) {
    const bool cn = language == Language::CN;
    auto field = [&](const SchemaField& f) {
        switch (f.shape) {
        case JsonShape::Array:
            if (cn)
                return std::string("JSON 数组，包含 ") + std::to_string(f.length) + " 个互不相同的元素，取自 " +
                       join(f.elements) + (f.ordered ? "；顺序有意义" : "；顺序无关");
            return "a JSON array of " + std::to_string(f.length) + " distinct tokens from " + join(f.elements) +
                   (f.ordered ? "; order matters" : "; order does not matter");
        case JsonShape::Object:
            if (cn) return "JSON 对象，键为 " + join(f.elements) + "，每个值取自 " + join(f.values);
            return "a JSON object with keys " + join(f.elements) + ", each mapped to one of " + join(f.values);
        case JsonShape::String:
            if (cn) return "一个字符串，取自 " + join(f.elements);
            return "one string from " + join(f.elements);
        }
        return std::string();
    };
    if (schema.bare) return field(schema.fields.at(0));
    std::string out = cn ? "一个 JSON 对象，包含以下键：" : "a JSON object with these keys:";
    for (const auto& f : schema.fields) out += "\n- \"" + f.key + "\": " + field(f);
    return out;
}

std::string numbered_constraints(const PuzzleSpec& puzzle) {
    std::string out;
    for (std::size_t i = 0; i < puzzle.constraints.size(); ++i)
        out += (i ? "\n" : "") + std::to_string(i + 1) + ". " + puzzle.constraints[i].text;
    return out;
}

}  // namespace puzzleforge
