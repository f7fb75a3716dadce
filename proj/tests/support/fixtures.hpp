#pragma once

// Puzzles transcribed from worked examples: the five-island chain, the
// athletes race, the two-year committee, and the four-day cooking roster.

#include <string>
#include <vector>

#include "puzzleforge/puzzle.hpp"

namespace puzzleforge::testing {

inline DomainSpec islands_domain() {
    return DomainSpec::create({{"order", PermutationSlot{{"E", "F", "G", "H", "I"}}}});
}

inline PuzzleSpec islands_puzzle() {
    return make_puzzle("islands", Language::EN,
                       "There are 5 volcanic islands, E, F, G, H, and I, arranged in a straight line from north to "
                       "south along a coast.",
                       islands_domain(),
                       {
                           {"c1", "F is adjacent to H and is north of H.", "pos(order, F) + 1 = pos(order, H)"},
                           {"c2", "I is adjacent to E.", "abs(pos(order, I) - pos(order, E)) = 1"},
                           {"c3", "G is somewhere north of F.", "pos(order, G) < pos(order, F)"},
                           {"c4", "G is adjacent to E.", "abs(pos(order, G) - pos(order, E)) = 1"},
                       },
                       json::array({"F", "H", "I", "E", "G"}));
}

inline DomainSpec athletes_domain() {
    std::vector<std::string> athletes{"S", "T", "U", "W", "X", "Y", "Z"};
    return DomainSpec::create({{"order", PermutationSlot{athletes}},
                               {"colors", AssignmentSlot{athletes, {"red", "green"}}}});
}

inline json athletes_sample_input() {
    return json::parse(R"({"order": ["T", "Y", "Z", "U", "W", "S", "X"],
        "colors": {"S": "red", "T": "green", "U": "red", "W": "green", "X": "red", "Y": "green", "Z": "green"}})");
}

inline PuzzleSpec athletes_puzzle() {
    return make_puzzle(
        "athletes", Language::EN,
        "There are 7 athletes in a 5 km final: S, T, U, W, X, Y and Z. Each wears either red or green, and no two "
        "athletes finish at the same time.",
        athletes_domain(),
        {
            {"c1", "Athletes who finish consecutively do not all wear red.",
             "all(i in 1..6, not (val(colors, at(order, i)) = \"red\" and val(colors, at(order, i + 1)) = \"red\"))"},
            {"c2", "Y finishes at some point before T and W.",
             "pos(order, Y) < pos(order, T) and pos(order, Y) < pos(order, W)"},
            {"c3", "Among the athletes finishing before Y, exactly two wear red.",
             "exactly(2, x in before(order, Y), val(colors, x) = \"red\")"},
            {"c4", "S is the sixth athlete to finish.", "pos(order, S) = 6"},
            {"c5", "Z finishes at some point before U.", "pos(order, Z) < pos(order, U)"},
        },
        athletes_sample_input());
}

inline DomainSpec committee_domain() {
    std::vector<std::string> people{"F", "G", "H", "I", "V", "Y", "Z"};
    return DomainSpec::create({{"committee_year1", SubsetSlot{people, 4}},
                               {"chairman_year1", ScalarSlot{people}},
                               {"committee_year2", SubsetSlot{people, 4}},
                               {"chairman_year2", ScalarSlot{people}}});
}

inline PuzzleSpec committee_puzzle() {
    return make_puzzle(
        "committee", Language::EN,
        "A committee serves two years with 4 members each year: 2 of the judges F, G, H, I and 2 of the scientists V, "
        "Y, Z. Each year one member chairs.",
        committee_domain(),
        {
            {"c0", "Each year has two judges, and the chair is a member that year.",
             "count(x in committee_year1, member([F, G, H, I], x)) = 2 and "
             "count(x in committee_year2, member([F, G, H, I], x)) = 2 and "
             "member(committee_year1, chairman_year1) and member(committee_year2, chairman_year2)"},
            {"c1", "The first-year chair leaves in year two; the second-year chair served in year one.",
             "not member(committee_year2, chairman_year1) and member(committee_year1, chairman_year2)"},
            {"c2", "G and V are never members in the same year.",
             "not (member(committee_year1, G) and member(committee_year1, V)) and "
             "not (member(committee_year2, G) and member(committee_year2, V))"},
            {"c3", "H and Y are never members in the same year.",
             "not (member(committee_year1, H) and member(committee_year1, Y)) and "
             "not (member(committee_year2, H) and member(committee_year2, Y))"},
            {"c4", "Each year exactly one of I and V is a member.",
             "not (member(committee_year1, I) iff member(committee_year1, V)) and "
             "not (member(committee_year2, I) iff member(committee_year2, V))"},
        },
        json::parse(R"({"committee_year1": ["Z", "V", "F", "G"], "chairman_year1": "G",
                        "committee_year2": ["Y", "V", "F", "H"], "chairman_year2": "F"})"));
}

inline PuzzleSpec duty_puzzle() {
    std::vector<std::string> people{"G", "H", "J", "K", "L", "M", "O"};
    auto domain = DomainSpec::create({{"day1", SubsetSlot{people, 2}},
                                      {"day2", SubsetSlot{people, 2}},
                                      {"day3", SubsetSlot{people, 2}},
                                      {"day4", SubsetSlot{people, 2}}});
    const std::string days_on =
        "count(d in 1..4, (d = 1 and member(day1, p)) or (d = 2 and member(day2, p)) or "
        "(d = 3 and member(day3, p)) or (d = 4 and member(day4, p)))";
    return make_puzzle(
        "duty", Language::EN,
        "Seven people G, H, J, K, L, M, O camp for 4 days; two of them cook each day, no pairing repeats, and exactly "
        "one person cooks on two days.",
        std::move(domain),
        {
            {"c0", "Everyone cooks at least once.", "all(p in items(day1), " + days_on + " >= 1)"},
            {"c1", "J cooks on the day after H.",
             "(member(day1, H) and member(day2, J)) or (member(day2, H) and member(day3, J)) or "
             "(member(day3, H) and member(day4, J))"},
            {"c2", "Whoever cooks twice cooks on day 4 and not on day 3.",
             "all(p in items(day1), " + days_on + " >= 2 implies (member(day4, p) and not member(day3, p)))"},
            {"c3", "G cooks on the same day as J or O.",
             "(member(day1, G) and (member(day1, J) or member(day1, O))) or "
             "(member(day2, G) and (member(day2, J) or member(day2, O))) or "
             "(member(day3, G) and (member(day3, J) or member(day3, O))) or "
             "(member(day4, G) and (member(day4, J) or member(day4, O)))"},
            {"c4", "K cooks on day 1 or day 2.", "member(day1, K) or member(day2, K)"},
            {"c5", "O cooks on day 3.", "member(day3, O)"},
        },
        json::parse(R"({"day1": ["K", "G"], "day2": ["K", "H"], "day3": ["O", "L"], "day4": ["J", "M"]})"));
}

// Model responses transcribed from annotated error cases.

inline const char* athletes_response() {
    return R"(Let's think step by step to meet all the constraints:
1. First, we know S is the sixth to reach the finish line
2. Y reached the finish line before T and W
3. Z reached the finish line before U
4. Among the athletes before Y, exactly two wore red outfits
5. No consecutive athletes can wear red
Based on these conditions, we can arrange as follows:
1. X (red)
2. T (green)
3. Y (green)
4. Z (red)
5. W (green)
6. S (red)
7. U (green)

Final solution in required format:
```
{"order": ["X", "T", "Y", "Z", "W", "S", "U"],
"colors": {"S": "red", "T": "green", "U": "green","W": "green", "X": "red", "Y": "green","Z": "red"} }
```)";
}

inline const char* islands_response() {
    return R"(Let's think through this problem step by step:
1. According to constraint (1), F is adjacent to H and is north of H.
2. According to constraint (3), G is located somewhere north of F.
3. According to constraint (4), G is adjacent to E, so E must be north of G.
4. According to constraint (2), I is adjacent to E.
5. One possible arrangement is G-E-I-F-H or I-G-E-F-H.
6. I-G-E-F-H is a valid arrangement that satisfies all constraints.
Therefore, the final arrangement is as follows:
```
['I', 'G', 'E', 'F', 'H']
```
This arrangement satisfies all the given constraints.)";
}

inline const char* committee_response() {
    return R"(Step 4: Select the chairman for the second year
From G, H, Y, Z, select one as chairman. The only eligible person is Z.
The final arrangement is as follows:
```python
committee_year1 = {"F", "I", "V", "Z"}
chairman_year1 = "F"
committee_year2 = {"G", "H", "Y", "Z"}
chairman_year2 = "Z"
```)";
}

inline const char* duty_response() {
    return R"(1. O must be scheduled on the third day, so first we set:
- inputs["day3"] = {'O', someone}
2. J must be on duty the day after H:
- inputs["day2"] = {'H', someone}
- inputs["day3"] = {'O', 'J'}
Therefore, the final arrangement is:
```
{'day1': {'K', 'L'}, 'day2': {'H', 'M'}, 'day3': {'O', 'G'}, 'day4': {'J', 'M'}}
```
This arrangement satisfies all the given constraints.)";
}

}  // namespace puzzleforge::testing
