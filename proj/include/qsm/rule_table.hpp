#pragma once

// The step operator as a finite table of local matrix elements
// <l', j+1, s_j', s_{j-1}'| U |l, j, s_j, s_{j-1}>.

#include "qsm/error.hpp"
#include "qsm/symbol.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace qsm {

using Complex = std::complex<double>;
using LabelId = std::uint16_t;

struct RuleInput {
    LabelId label = 0;
    Symbol cur = Symbol::Zero;  // symbol under the head (site j)
    Symbol prev = Symbol::Zero; // symbol just behind the head (site j-1)

    friend auto operator<=>(const RuleInput&, const RuleInput&) = default;
    friend bool operator==(const RuleInput&, const RuleInput&) = default;
};

struct RuleOutput {
    LabelId label = 0;
    Symbol cur = Symbol::Zero;
    Symbol prev = Symbol::Zero;
    Complex amp{1.0, 0.0};

    RuleInput key() const { return RuleInput{label, cur, prev}; }
};

class RuleTable {
public:
    Mode mode() const noexcept { return mode_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::size_t label_count() const noexcept { return labels_.size(); }
    LabelId initial() const noexcept { return initial_; }
    const std::string& label_name(LabelId id) const { return labels_.at(id); }

    std::optional<LabelId> find_label(std::string_view name) const
    {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == name)
                return static_cast<LabelId>(i);
        return std::nullopt;
    }

    /// Size of the local input (and output) space |L| * D^2.
    std::size_t local_dimension() const
    {
        auto d = alphabet_size(mode_);
        return labels_.size() * d * d;
    }

    std::size_t flat_index(const RuleInput& in) const
    {
        auto d = alphabet_size(mode_);
        return (static_cast<std::size_t>(in.label) * d + index(in.cur)) * d + index(in.prev);
    }

    RuleInput input_at(std::size_t flat) const
    {
        auto d = alphabet_size(mode_);
        return RuleInput{static_cast<LabelId>(flat / (d * d)), symbol_at((flat / d) % d), symbol_at(flat % d)};
    }

    /// Outputs for an input, or nullptr when the table has no entry for it.
    const std::vector<RuleOutput>* find(const RuleInput& in) const
    {
        if (in.label >= labels_.size() || !in_alphabet(in.cur, mode_) || !in_alphabet(in.prev, mode_))
            return nullptr;
        const auto& slot = entries_[flat_index(in)];
        return slot ? &*slot : nullptr;
    }

    /// Defined entries in input order.
    std::vector<std::pair<RuleInput, const std::vector<RuleOutput>*>> entries() const
    {
        std::vector<std::pair<RuleInput, const std::vector<RuleOutput>*>> out;
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (entries_[i])
                out.emplace_back(input_at(i), &*entries_[i]);
        return out;
    }

    std::string describe(const RuleInput& in) const
    {
        return "(" + label_name(in.label) + ", " + to_char(in.cur) + ", " + to_char(in.prev) + ")";
    }

private:
    friend class RuleTableBuilder;

    Mode mode_ = Mode::Base;
    std::vector<std::string> labels_;
    LabelId initial_ = 0;
    std::vector<std::optional<std::vector<RuleOutput>>> entries_;
};

class RuleTableBuilder {
public:
    RuleTableBuilder(Mode mode, std::vector<std::string> labels, std::string initial)
        : mode_(mode), labels_(std::move(labels)), initial_(std::move(initial))
    {
    }

    LabelId label(std::string_view name) const
    {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == name)
                return static_cast<LabelId>(i);
        throw Error(ErrorCode::MalformedTable, "unknown head label \"" + std::string(name) + "\"");
    }

    RuleTableBuilder& add(const RuleInput& in, std::vector<RuleOutput> outs)
    {
        auto& slot = rules_[in];
        slot.insert(slot.end(), outs.begin(), outs.end());
        return *this;
    }

    RuleTableBuilder& add(std::string_view l, Symbol cur, Symbol prev,
                          std::vector<std::tuple<std::string_view, Symbol, Symbol, Complex>> outs)
    {
        std::vector<RuleOutput> converted;
        for (auto& [ol, oc, op, amp] : outs)
            converted.push_back(RuleOutput{label(ol), oc, op, amp});
        return add(RuleInput{label(l), cur, prev}, std::move(converted));
    }

    bool has(const RuleInput& in) const { return rules_.count(in) != 0; }

    /// Maps every input without an entry onto an output nobody uses yet, in
    /// index order. If the explicit entries form an isometry onto their
    /// outputs and the counts match, the completed table is unitary.
    RuleTableBuilder& complete_with_permutation(double eps = kEpsAmp)
    {
        auto d = alphabet_size(mode_);
        std::set<RuleInput> used;
        for (const auto& [in, outs] : rules_)
            for (const auto& o : outs)
                if (std::abs(o.amp) > eps)
                    used.insert(o.key());
        std::vector<RuleInput> free_out, free_in;
        for (std::size_t l = 0; l < labels_.size(); ++l)
            for (std::size_t c = 0; c < d; ++c)
                for (std::size_t p = 0; p < d; ++p) {
                    RuleInput key{static_cast<LabelId>(l), symbol_at(c), symbol_at(p)};
                    if (!used.count(key))
                        free_out.push_back(key);
                    if (!rules_.count(key))
                        free_in.push_back(key);
                }
        for (std::size_t k = 0; k < std::min(free_in.size(), free_out.size()); ++k) {
            const auto& o = free_out[k];
            rules_[free_in[k]] = {RuleOutput{o.label, o.cur, o.prev, Complex{1.0, 0.0}}};
        }
        return *this;
    }

    RuleTable build(double eps = kEpsAmp) const
    {
        if (labels_.empty())
            throw Error(ErrorCode::MalformedTable, "no head labels");
        std::set<std::string> seen(labels_.begin(), labels_.end());
        if (seen.size() != labels_.size())
            throw Error(ErrorCode::MalformedTable, "duplicate head labels");
        RuleTable t;
        t.mode_ = mode_;
        t.labels_ = labels_;
        t.initial_ = label(initial_);
        t.entries_.assign(t.local_dimension(), std::nullopt);
        for (const auto& [in, outs] : rules_) {
            check(in);
            std::map<RuleInput, Complex> merged;
            for (const auto& o : outs) {
                check(o.key());
                merged[o.key()] += o.amp;
            }
            std::vector<RuleOutput> kept;
            for (const auto& [key, amp] : merged)
                if (std::abs(amp) > eps)
                    kept.push_back(RuleOutput{key.label, key.cur, key.prev, amp});
            t.entries_[t.flat_index(in)] = std::move(kept);
        }
        return t;
    }

private:
    void check(const RuleInput& in) const
    {
        if (in.label >= labels_.size())
            throw Error(ErrorCode::MalformedTable, "dangling head label id " + std::to_string(in.label));
        if (!in_alphabet(in.cur, mode_) || !in_alphabet(in.prev, mode_))
            throw Error(ErrorCode::MalformedTable, "symbol outside the alphabet of this mode");
    }

    Mode mode_;
    std::vector<std::string> labels_;
    std::string initial_;
    std::map<RuleInput, std::vector<RuleOutput>> rules_;
};

// ---------------------------------------------------------------------------
// Isometry check

struct IsometryReport {
    bool is_isometric = false;
    double max_column_defect = 0;
    std::vector<std::pair<RuleInput, RuleInput>> offending_pairs; // capped, see validate
};

/// Checks that the columns of the |L|*D^2 local matrix are orthonormal.
/// Inputs without an entry are zero columns and therefore defects.
inline IsometryReport validate(const RuleTable& table, std::size_t max_pairs = 64)
{
    const std::size_t dim = table.local_dimension();
    for (const auto& [in, outs] : table.entries()) {
        if (in.label >= table.label_count())
            throw Error(ErrorCode::MalformedTable, "dangling input label");
        for (const auto& o : *outs)
            if (o.label >= table.label_count())
                throw Error(ErrorCode::MalformedTable, "dangling output label in " + table.describe(in));
    }
    if (table.initial() >= table.label_count())
        throw Error(ErrorCode::MalformedTable, "initial label out of range");

    // Gram matrix entries accumulate through shared output rows.
    std::vector<std::vector<std::pair<std::size_t, Complex>>> rows(dim);
    for (const auto& [in, outs] : table.entries())
        for (const auto& o : *outs)
            rows[table.flat_index(o.key())].emplace_back(table.flat_index(in), o.amp);

    std::map<std::pair<std::size_t, std::size_t>, Complex> gram;
    for (const auto& row : rows)
        for (const auto& [a, amp_a] : row)
            for (const auto& [b, amp_b] : row)
                if (a <= b)
                    gram[{a, b}] += std::conj(amp_a) * amp_b;

    IsometryReport report;
    auto note = [&](std::size_t a, std::size_t b, double defect) {
        report.max_column_defect = std::max(report.max_column_defect, defect);
        if (defect > kIsometryTol && report.offending_pairs.size() < max_pairs)
            report.offending_pairs.emplace_back(table.input_at(a), table.input_at(b));
    };
    for (std::size_t a = 0; a < dim; ++a) {
        auto it = gram.find({a, a});
        double norm = it == gram.end() ? 0.0 : it->second.real();
        note(a, a, std::abs(norm - 1.0));
    }
    for (const auto& [ab, value] : gram)
        if (ab.first != ab.second)
            note(ab.first, ab.second, std::abs(value));
    report.is_isometric = report.max_column_defect <= kIsometryTol;
    return report;
}

/// True when every entry has exactly one output of unit magnitude.
inline bool is_deterministic(const RuleTable& table, double tol = kEpsAmp)
{
    for (const auto& [in, outs] : table.entries())
        if (outs->size() != 1 || std::abs(std::abs(outs->front().amp) - 1.0) > tol)
            return false;
    return true;
}

// ---------------------------------------------------------------------------
// JSON machine-spec format

namespace detail {

inline Symbol json_symbol(const nlohmann::json& j, Mode mode)
{
    if (!j.is_string() || j.get<std::string>().size() != 1)
        throw Error(ErrorCode::ParseError, "symbols must be one-character strings, got " + j.dump());
    return symbol_from_char(j.get<std::string>()[0], mode);
}

} // namespace detail

inline RuleTable table_from_json(const nlohmann::json& j, double eps = kEpsAmp)
{
    try {
        Mode mode = mode_from_string(j.at("mode").get<std::string>());
        auto labels = j.at("head_states").get<std::vector<std::string>>();
        RuleTableBuilder b(mode, labels, j.at("initial").get<std::string>());
        for (const auto& rule : j.at("rules")) {
            RuleInput in{b.label(rule.at("l").get<std::string>()), detail::json_symbol(rule.at("cur"), mode),
                         detail::json_symbol(rule.at("prev"), mode)};
            if (b.has(in))
                throw Error(ErrorCode::MalformedTable, "duplicate rule for one input");
            std::vector<RuleOutput> outs;
            for (const auto& o : rule.at("out")) {
                const auto& amp = o.at("amp");
                if (!amp.is_array() || amp.size() != 2)
                    throw Error(ErrorCode::ParseError, "amp must be [re, im]");
                outs.push_back(RuleOutput{b.label(o.at("l").get<std::string>()), detail::json_symbol(o.at("cur"), mode),
                                          detail::json_symbol(o.at("prev"), mode),
                                          Complex{amp[0].get<double>(), amp[1].get<double>()}});
            }
            b.add(in, std::move(outs));
        }
        return b.build(eps);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

inline nlohmann::json table_to_json(const RuleTable& table)
{
    nlohmann::json rules = nlohmann::json::array();
    auto sym = [](Symbol s) { return std::string(1, to_char(s)); };
    for (const auto& [in, outs] : table.entries()) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& o : *outs)
            out.push_back({{"l", table.label_name(o.label)},
                           {"cur", sym(o.cur)},
                           {"prev", sym(o.prev)},
                           {"amp", {o.amp.real(), o.amp.imag()}}});
        rules.push_back(
            {{"l", table.label_name(in.label)}, {"cur", sym(in.cur)}, {"prev", sym(in.prev)}, {"out", out}});
    }
    return {{"mode", std::string(to_string(table.mode()))},
            {"head_states", table.labels()},
            {"initial", table.label_name(table.initial())},
            {"rules", rules}};
}

inline RuleTable load_table(const std::string& path, double eps = kEpsAmp)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::ParseError, "cannot open machine spec \"" + path + "\"");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    return table_from_json(j, eps);
}

} // namespace qsm
