#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "puzzleforge/error.hpp"

namespace puzzleforge {

using json = nlohmann::ordered_json;

inline constexpr std::uint64_t kDefaultDomainCap = 1'000'000'000ULL;

// Slot kinds. Tokens are case-sensitive exact-match strings.

/// Every item appears exactly once, in some order.
struct PermutationSlot {
    std::vector<std::string> items;
};

/// Each key maps to one of `values`.
struct AssignmentSlot {
    std::vector<std::string> keys;
    std::vector<std::string> values;
};

/// An unordered choice of exactly `cardinality` distinct items.
struct SubsetSlot {
    std::vector<std::string> items;
    std::size_t cardinality = 1;
};

/// A single token drawn from `values`.
struct ScalarSlot {
    std::vector<std::string> values;
};

using SlotKind = std::variant<PermutationSlot, AssignmentSlot, SubsetSlot, ScalarSlot>;

struct Slot {
    std::string name;
    SlotKind kind;
};

std::string_view kind_name(const SlotKind& kind);

/// Validated, immutable description of the arrangement space.
///
/// Besides the slots it owns a symbol table that numbers every token of every
/// slot universe; the evaluator and enumerator work on these ids.
class DomainSpec {
public:
    DomainSpec() = default;

    /// Validates slot invariants; throws DomainError on violation.
    static DomainSpec create(std::vector<Slot> slots);

    const std::vector<Slot>& slots() const noexcept { return slots_; }
    std::size_t slot_count() const noexcept { return slots_.size(); }
    const Slot& slot(std::size_t i) const { return slots_.at(i); }
    std::optional<std::size_t> find_slot(std::string_view name) const;

    std::size_t token_count() const noexcept { return tokens_.size(); }
    const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    std::optional<int> token_id(std::string_view token) const;
    bool has_token(std::string_view token) const { return token_id(token).has_value(); }

    /// Ids of the tokens that may appear as elements of slot `i`
    /// (items, assignment keys, or scalar values).
    const std::vector<int>& element_ids(std::size_t i) const { return element_ids_.at(i); }
    /// Ids of assignment values for slot `i`; empty for other kinds.
    const std::vector<int>& value_ids(std::size_t i) const { return value_ids_.at(i); }

    friend bool operator==(const DomainSpec& a, const DomainSpec& b);

private:
    std::vector<Slot> slots_;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> token_index_;
    std::vector<std::vector<int>> element_ids_;
    std::vector<std::vector<int>> value_ids_;
};

/// Product over slots of the per-slot cardinality. Throws DomainTooLarge if it exceeds `cap`.
std::uint64_t domain_size(const DomainSpec& domain, std::uint64_t cap = kDefaultDomainCap);

json domain_to_json(const DomainSpec& domain);
DomainSpec domain_from_json(const json& j);

// ---------------------------------------------------------------------------
// Arrangements

using SlotValue = std::variant<std::vector<std::string>,            // permutation order / subset members
                               std::map<std::string, std::string>,  // assignment
                               std::string>;                        // scalar

/// A concrete binding of every slot, keyed by slot name.
struct Arrangement {
    std::map<std::string, SlotValue, std::less<>> bindings;

    friend bool operator==(const Arrangement&, const Arrangement&) = default;
};

/// Token-id form of an arrangement used on the hot path.
///
/// For every slot, `list` holds the bound token ids (permutation order, subset
/// members in universe order, assignment values in key order, or the single
/// scalar value). `index` is a dense lookup over the whole symbol table:
/// 1-based position for permutations, 1 for subset members, the value id for
/// assignment keys, -1/0 when absent.
struct SlotState {
    std::vector<int> list;
    std::vector<int> index;
};

struct Candidate {
    std::vector<SlotState> slots;
};

Candidate to_candidate(const DomainSpec& domain, const Arrangement& arrangement);
Arrangement to_arrangement(const DomainSpec& domain, const Candidate& candidate);

// ---------------------------------------------------------------------------
// Schema

enum class JsonShape { Array, Object, String };

struct SchemaField {
    std::string key;
    JsonShape shape = JsonShape::String;
    std::vector<std::string> elements;  // array elements / object keys / string values
    std::vector<std::string> values;    // object values
    std::size_t length = 0;             // arrays only
    bool distinct = false;
    bool ordered = false;

    friend bool operator==(const SchemaField&, const SchemaField&) = default;
};

/// Canonical JSON layout of an arrangement. A single-slot domain is answered
/// with the bare slot value (`bare`), anything else with an object keyed by
/// slot name.
struct ArrangementSchema {
    bool bare = false;
    std::vector<SchemaField> fields;

    friend bool operator==(const ArrangementSchema&, const ArrangementSchema&) = default;
};

ArrangementSchema schema_of(const DomainSpec& domain);
DomainSpec domain_of(const ArrangementSchema& schema);

json schema_to_json(const ArrangementSchema& schema);
ArrangementSchema schema_from_json(const json& j);

struct FormatViolation {
    std::string path;
    std::string kind;
    std::string detail;
};

struct FormatReport {
    std::vector<FormatViolation> violations;

    bool ok() const noexcept { return violations.empty(); }
};

/// Checks a raw JSON candidate against the schema; every problem is reported.
FormatReport conforms(const json& candidate, const ArrangementSchema& schema);

/// Converts a conformant JSON candidate. Throws DomainError if it does not conform.
Arrangement arrangement_from_json(const DomainSpec& domain, const json& candidate);
json arrangement_to_json(const DomainSpec& domain, const Arrangement& arrangement);

std::string trim(std::string_view s);

}  // namespace puzzleforge
