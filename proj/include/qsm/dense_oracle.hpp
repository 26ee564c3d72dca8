#pragma once

// Brute-force reference: U applied as a matrix to a vector over every
// (label, tape) basis state of a fixed window of sites. Exponential in the
// window; meant for tests at small n only.

#include "qsm/error.hpp"
#include "qsm/evolution.hpp"
#include "qsm/rule_table.hpp"
#include "qsm/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qsm {

inline constexpr std::size_t kDenseMaxSteps = 6;
inline constexpr std::size_t kDenseMaxEntries = std::size_t{1} << 26;

struct DenseState {
    std::size_t window = 1; // sites 1..window
    std::size_t labels = 1;
    std::size_t d = 5;
    std::size_t steps = 0;
    std::vector<Complex> amps;

    std::size_t tape_states() const { return amps.size() / labels; }

    // Site s (1-based) is digit s-1 in base d; the label is the top digit.
    std::size_t index_of(LabelId label, const Tape& tape) const
    {
        std::size_t idx = 0, place = 1;
        for (std::size_t s = 0; s < window; ++s, place *= d)
            idx += (s < tape.size() ? qsm::index(tape[s]) : 0) * place;
        return label * tape_states() + idx;
    }

    LabelId label_of(std::size_t idx) const { return static_cast<LabelId>(idx / tape_states()); }

    Tape tape_of(std::size_t idx) const
    {
        Tape t(window);
        idx %= tape_states();
        for (std::size_t s = 0; s < window; ++s, idx /= d)
            t[s] = symbol_at(idx % d);
        return t;
    }
};

inline DenseState dense_initial(const RuleTable& table, std::size_t window)
{
    DenseState st;
    st.window = std::max<std::size_t>(window, 1);
    st.labels = table.label_count();
    st.d = alphabet_size(table.mode());
    double size = static_cast<double>(st.labels) * std::pow(static_cast<double>(st.d), static_cast<double>(st.window));
    if (size > static_cast<double>(kDenseMaxEntries))
        throw Error(ErrorCode::SizeLimit, "dense window of " + std::to_string(st.window) + " sites is too large");
    st.amps.assign(static_cast<std::size_t>(size), Complex{});
    st.amps[st.index_of(table.initial(), Tape{})] = 1.0;
    return st;
}

/// One full matrix-vector product. Columns for inputs missing from the
/// table are zero, so their amplitude is discarded.
inline DenseState dense_step(const DenseState& in, const RuleTable& table)
{
    const std::size_t j = in.steps + 2;
    if (j > in.window)
        throw Error(ErrorCode::SizeLimit, "head would leave the dense window");
    DenseState out = in;
    out.steps = in.steps + 1;
    std::fill(out.amps.begin(), out.amps.end(), Complex{});

    std::size_t place_prev = 1;
    for (std::size_t s = 1; s < j - 1; ++s)
        place_prev *= in.d;
    const std::size_t place_cur = place_prev * in.d;

    for (std::size_t idx = 0; idx < in.amps.size(); ++idx) {
        const Complex a = in.amps[idx];
        if (a == Complex{})
            continue;
        const std::size_t tape_idx = idx % in.tape_states();
        const std::size_t cur = (tape_idx / place_cur) % in.d;
        const std::size_t prev = (tape_idx / place_prev) % in.d;
        const auto* outs = table.find(RuleInput{in.label_of(idx), symbol_at(cur), symbol_at(prev)});
        if (!outs)
            continue;
        const std::size_t base = tape_idx - cur * place_cur - prev * place_prev;
        for (const auto& o : *outs) {
            std::size_t t = base + qsm::index(o.cur) * place_cur + qsm::index(o.prev) * place_prev;
            out.amps[o.label * in.tape_states() + t] += a * o.amp;
        }
    }
    return out;
}

inline DenseState dense_oracle_evolve(const RuleTable& table, std::size_t n)
{
    if (n > kDenseMaxSteps)
        throw Error(ErrorCode::SizeLimit, "dense oracle is limited to n <= " + std::to_string(kDenseMaxSteps));
    DenseState st = dense_initial(table, n + 1);
    for (std::size_t k = 0; k < n; ++k)
        st = dense_step(st, table);
    return st;
}

/// Largest |dense - sparse| over the whole dense basis. Sparse terms that
/// do not fit in the window count in full.
inline double max_deviation(const DenseState& dense, const SparseState& sparse)
{
    std::vector<Complex> diff = dense.amps;
    double extra = 0;
    for (const auto& [c, amp] : sparse.terms()) {
        bool fits = c.tape.size() <= dense.window;
        for (std::size_t s = dense.window; s < c.tape.size() && fits; ++s)
            fits = c.tape[s] == Symbol::Zero;
        if (!fits) {
            extra = std::max(extra, std::abs(amp));
            continue;
        }
        diff[dense.index_of(c.label, c.tape)] -= amp;
    }
    double worst = extra;
    for (const auto& v : diff)
        worst = std::max(worst, std::abs(v));
    return worst;
}

} // namespace qsm
