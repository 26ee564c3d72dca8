#pragma once

// Exact sparse evolution Psi(n) = U^n Psi(0).
//
// The head starts at site 2 and moves one site right per step, so after n
// steps it sits at site n+2 and only sites 1..n+1 can hold anything but 0.
// A configuration therefore stores (label, tape over sites 1..n+1) and the
// step count is tape.size() - 1.

#include "qsm/error.hpp"
#include "qsm/rule_table.hpp"
#include "qsm/symbol.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace qsm {

struct Configuration {
    LabelId label = 0;
    Tape tape{Symbol::Zero};

    std::size_t steps() const { return tape.size() - 1; }
    std::size_t head_position() const { return tape.size() + 1; }

    /// Symbol at a 1-based lattice site; sites past the stored tape are 0.
    Symbol site(std::size_t s) const { return s >= 1 && s <= tape.size() ? tape[s - 1] : Symbol::Zero; }

    friend bool operator<(const Configuration& a, const Configuration& b)
    {
        if (a.tape != b.tape)
            return a.tape < b.tape;
        return a.label < b.label;
    }
    friend bool operator==(const Configuration&, const Configuration&) = default;
};

inline std::string digest(const Configuration& c, const RuleTable& table)
{
    return table.label_name(c.label) + ":" + render(c.tape);
}

class SparseState {
public:
    using Terms = std::map<Configuration, Complex>;

    explicit SparseState(std::size_t steps = 0) : steps_(steps) {}

    SparseState(std::size_t steps, Terms terms) : steps_(steps), terms_(std::move(terms))
    {
        for (const auto& [c, amp] : terms_)
            check(c);
    }

    std::size_t steps() const noexcept { return steps_; }
    const Terms& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }

    void accumulate(const Configuration& c, Complex amp)
    {
        check(c);
        terms_[c] += amp;
    }

    /// Drops terms with |amp| <= eps. Run this only after all merging.
    void prune(double eps)
    {
        std::erase_if(terms_, [eps](const auto& kv) { return std::abs(kv.second) <= eps; });
    }

    double norm2() const
    {
        double s = 0;
        for (const auto& [c, amp] : terms_)
            s += std::norm(amp);
        return s;
    }

    Complex amplitude(const Configuration& c) const
    {
        if (c.steps() != steps_)
            throw Error(ErrorCode::StepMismatch, "configuration has " + std::to_string(c.steps()) +
                                                     " steps, state has " + std::to_string(steps_));
        auto it = terms_.find(c);
        return it == terms_.end() ? Complex{} : it->second;
    }

private:
    void check(const Configuration& c) const
    {
        if (c.tape.size() != steps_ + 1)
            throw Error(ErrorCode::StepMismatch, "tape length " + std::to_string(c.tape.size()) +
                                                     " does not match step count " + std::to_string(steps_));
    }

    std::size_t steps_;
    Terms terms_;
};

inline SparseState initial_state(const RuleTable& table)
{
    SparseState s(0);
    s.accumulate(Configuration{table.initial(), Tape{Symbol::Zero}}, Complex{1.0, 0.0});
    return s;
}

namespace detail {

// One application of U to the terms accepted by `keep`; merges duplicate
// successors before pruning so cancellations are exact.
inline SparseState apply_step(const SparseState& state, const RuleTable& table,
                              const std::function<bool(const Configuration&)>& keep, double eps)
{
    const std::size_t j = state.steps() + 2; // head site
    SparseState next(state.steps() + 1);
    for (const auto& [config, amp] : state.terms()) {
        if (keep && !keep(config))
            continue;
        Symbol cur = config.site(j);
        if (cur != Symbol::Zero)
            throw Error(ErrorCode::ContractBreach, "site under the head is not blank");
        RuleInput in{config.label, cur, config.site(j - 1)};
        const auto* outs = table.find(in);
        if (!outs)
            throw Error(ErrorCode::MissingRule, "no rule for input " + table.describe(in));
        for (const auto& o : *outs) {
            Configuration succ{o.label, config.tape};
            succ.tape.back() = o.prev; // site j-1
            succ.tape.push_back(o.cur); // site j
            next.accumulate(succ, amp * o.amp);
        }
    }
    next.prune(eps);
    return next;
}

} // namespace detail

inline SparseState step(const SparseState& state, const RuleTable& table, double eps = kEpsAmp)
{
    return detail::apply_step(state, table, nullptr, eps);
}

inline SparseState evolve_from(SparseState state, const RuleTable& table, std::size_t steps, double eps = kEpsAmp)
{
    for (std::size_t k = 0; k < steps; ++k)
        state = step(state, table, eps);
    return state;
}

inline SparseState evolve(const RuleTable& table, std::size_t n, double eps = kEpsAmp)
{
    return evolve_from(initial_state(table), table, n, eps);
}

inline Complex amplitude(const SparseState& state, const Configuration& config) { return state.amplitude(config); }

/// Runs a deterministic table as a plain automaton and returns the
/// length-(n+1) tape.
inline Tape classical_emulate(const RuleTable& table, std::size_t n)
{
    if (!is_deterministic(table))
        throw Error(ErrorCode::NotDeterministic, "classical emulation needs one unit-amplitude output per input");
    LabelId label = table.initial();
    Tape tape{Symbol::Zero};
    for (std::size_t k = 0; k < n; ++k) {
        RuleInput in{label, Symbol::Zero, tape.back()};
        const auto* outs = table.find(in);
        if (!outs)
            throw Error(ErrorCode::MissingRule, "no rule for input " + table.describe(in));
        const auto& o = outs->front();
        tape.back() = o.prev;
        tape.push_back(o.cur);
        label = o.label;
    }
    return tape;
}

/// Canonical text dump: "amp_re amp_im label tape" per term, ordered by
/// rendered tape and then label name.
inline void dump_state(const SparseState& state, const RuleTable& table, std::ostream& out)
{
    std::vector<std::tuple<std::string, std::string, Complex>> rows;
    for (const auto& [c, amp] : state.terms())
        rows.emplace_back(render(c.tape), table.label_name(c.label), amp);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    char buf[64];
    for (const auto& [tape, label, amp] : rows) {
        // %.17g round-trips doubles; +0.0 keeps "-0" out of the dump.
        std::snprintf(buf, sizeof buf, "%.17g %.17g", amp.real() + 0.0, amp.imag() + 0.0);
        out << buf << ' ' << label << ' ' << tape << '\n';
    }
}

} // namespace qsm
