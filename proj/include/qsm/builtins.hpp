#pragma once

// Example machines. Each printer writes the final symbol of site j-1 and a
// blank at site j, so every reachable input has the form (label, 0, 0) and
// the printed tape is a function of the label sequence alone. The tables
// are completed to unitaries over the full |L|*D^2 local space.

#include "qsm/error.hpp"
#include "qsm/rule_table.hpp"
#include "qsm/symbol.hpp"

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace qsm {

/// Deterministically prints `pattern` over and over starting at site 1.
inline RuleTable periodic_printer(Mode mode, std::string_view pattern)
{
    if (pattern.empty())
        throw Error(ErrorCode::EmptyInput, "printer pattern is empty");
    Tape symbols = parse_tape(pattern, mode);
    std::vector<std::string> labels;
    for (std::size_t r = 0; r < symbols.size(); ++r)
        labels.push_back("c" + std::to_string(r));
    RuleTableBuilder b(mode, labels, labels.front());
    for (std::size_t r = 0; r < symbols.size(); ++r) {
        auto next = static_cast<LabelId>((r + 1) % symbols.size());
        b.add(RuleInput{static_cast<LabelId>(r), Symbol::Zero, Symbol::Zero},
              {RuleOutput{next, Symbol::Zero, symbols[r], Complex{1.0, 0.0}}});
    }
    return b.complete_with_permutation().build();
}

/// Prints a 0 at site 1 while splitting into two equal-weight branches,
/// then branch A repeats `pattern_a` and branch B repeats `pattern_b` from
/// site 2 on.
///
/// Neither pattern may end in 0: the wrap-around of each cycle must write a
/// different symbol than the branching step does, otherwise two reachable
/// inputs share an output and the table cannot be an isometry.
inline RuleTable two_branch_printer(Mode mode, std::string_view pattern_a, std::string_view pattern_b)
{
    Tape a = parse_tape(pattern_a, mode);
    Tape b = parse_tape(pattern_b, mode);
    if (a.empty() || b.empty())
        throw Error(ErrorCode::EmptyInput, "branch pattern is empty");
    if (a.back() == Symbol::Zero || b.back() == Symbol::Zero)
        throw Error(ErrorCode::MalformedTable, "branch patterns must not end in 0");

    std::vector<std::string> labels{"i"};
    for (std::size_t r = 0; r < a.size(); ++r)
        labels.push_back("a" + std::to_string(r));
    for (std::size_t r = 0; r < b.size(); ++r)
        labels.push_back("b" + std::to_string(r));
    RuleTableBuilder builder(mode, labels, "i");

    const double h = 1.0 / std::sqrt(2.0);
    const LabelId a0 = builder.label("a0");
    const LabelId b0 = builder.label("b0");
    builder.add(RuleInput{0, Symbol::Zero, Symbol::Zero},
                {RuleOutput{a0, Symbol::Zero, Symbol::Zero, {h, 0}}, RuleOutput{b0, Symbol::Zero, Symbol::Zero, {h, 0}}});
    // Unreachable partner input completing the 2x2 Hadamard block.
    builder.add(RuleInput{0, Symbol::Zero, Symbol::P},
                {RuleOutput{a0, Symbol::Zero, Symbol::Zero, {h, 0}}, RuleOutput{b0, Symbol::Zero, Symbol::Zero, {-h, 0}}});

    auto add_cycle = [&](const Tape& pattern, LabelId first) {
        for (std::size_t r = 0; r < pattern.size(); ++r) {
            auto next = static_cast<LabelId>(first + (r + 1) % pattern.size());
            builder.add(RuleInput{static_cast<LabelId>(first + r), Symbol::Zero, Symbol::Zero},
                        {RuleOutput{next, Symbol::Zero, pattern[r], Complex{1.0, 0.0}}});
        }
    };
    add_cycle(a, a0);
    add_cycle(b, b0);
    return builder.complete_with_permutation().build();
}

/// Re-expresses a base-mode table over the extended alphabet. The new
/// inputs involving N are mapped bijectively onto the new outputs.
inline RuleTable lift_to_extended(const RuleTable& table)
{
    if (table.mode() == Mode::Extended)
        return table;
    RuleTableBuilder b(Mode::Extended, table.labels(), table.label_name(table.initial()));
    for (const auto& [in, outs] : table.entries())
        b.add(in, *outs);
    return b.complete_with_permutation().build();
}

inline const std::vector<std::string>& builtin_names()
{
    static const std::vector<std::string> names{"classical-enumerator", "branching-printer", "invalid-printer",
                                                "incomplete-liar"};
    return names;
}

inline RuleTable builtin(std::string_view name)
{
    if (name == "classical-enumerator")
        return periodic_printer(Mode::Base, "0P(PP)0PP");
    if (name == "branching-printer")
        return two_branch_printer(Mode::Base, "0P(PP)0PP", "0~P(PP)00P");
    if (name == "invalid-printer")
        return periodic_printer(Mode::Base, "0~P(PP)0PP");
    if (name == "incomplete-liar")
        return periodic_printer(Mode::Extended, "0~PN(~PN)");
    throw Error(ErrorCode::UnknownName, "no builtin machine named \"" + std::string(name) + "\"");
}

} // namespace qsm
