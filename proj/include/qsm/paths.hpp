#pragma once

// Word-path expansion of Psi(n): the U = U_{!=0} + U_0 split, evolution
// along a fixed alternating composition, grouping of terminal tapes into
// word paths, and the path tree of frozen word events.

#include "qsm/error.hpp"
#include "qsm/evolution.hpp"
#include "qsm/language.hpp"
#include "qsm/rule_table.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qsm {

enum class Branch { Zero, NonZero };

/// Site inspected by Q^M_0 before the next step: two behind the head, or
/// site 1 while the head is still at site 2.
inline std::size_t inspected_site(std::size_t steps) { return std::max<std::size_t>(steps, 1); }

inline SparseState split_step(const SparseState& state, const RuleTable& table, Branch branch, double eps = kEpsAmp)
{
    const std::size_t site = inspected_site(state.steps());
    const bool want_zero = branch == Branch::Zero;
    return detail::apply_step(
        state, table, [&](const Configuration& c) { return (c.site(site) == Symbol::Zero) == want_zero; }, eps);
}

struct Composition {
    int nu1 = 0;
    std::vector<std::size_t> lengths;

    std::size_t total() const
    {
        std::size_t s = 0;
        for (auto h : lengths)
            s += h;
        return s;
    }

    std::string text() const
    {
        std::string out = "nu1=" + std::to_string(nu1) + " h=[";
        for (std::size_t k = 0; k < lengths.size(); ++k)
            out += (k ? "," : "") + std::to_string(lengths[k]);
        return out + "]";
    }

    friend auto operator<=>(const Composition&, const Composition&) = default;
    friend bool operator==(const Composition&, const Composition&) = default;
};

struct OperatorSplitTrace {
    std::vector<std::pair<int, std::size_t>> factors; // (nu, h) in application order
    SparseState state;
};

inline OperatorSplitTrace composition_evolve(const RuleTable& table, const Composition& comp, double eps = kEpsAmp)
{
    OperatorSplitTrace trace{{}, initial_state(table)};
    int nu = comp.nu1;
    for (auto h : comp.lengths) {
        if (h == 0)
            throw Error(ErrorCode::EmptyInput, "composition segment lengths must be at least 1");
        trace.factors.emplace_back(nu, h);
        for (std::size_t k = 0; k < h; ++k)
            trace.state = split_step(trace.state, table, nu == 0 ? Branch::Zero : Branch::NonZero, eps);
        nu = 1 - nu;
    }
    return trace;
}

/// All 2^n alternating compositions of n (a single empty one for n = 0).
inline std::vector<Composition> enumerate_compositions(std::size_t n)
{
    if (n == 0)
        return {Composition{}};
    std::vector<Composition> out;
    for (int nu1 = 0; nu1 <= 1; ++nu1) {
        // bit k of mask set: a new segment starts before step k+2
        for (std::size_t mask = 0; mask < (std::size_t{1} << (n - 1)); ++mask) {
            Composition c{nu1, {1}};
            for (std::size_t k = 0; k + 1 < n; ++k) {
                if (mask >> k & 1)
                    c.lengths.push_back(1);
                else
                    ++c.lengths.back();
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

/// The composition that can reach `config`: step k of the history saw
/// site max(1, k-1), so the nu sequence is 0 followed by the zero/nonzero
/// pattern of sites 1..n-1.
inline Composition composition_signature(const Configuration& config)
{
    const std::size_t n = config.steps();
    Composition out;
    if (n == 0)
        return out;
    std::vector<int> bits{0};
    for (std::size_t s = 1; s + 1 <= n; ++s)
        bits.push_back(config.site(s) == Symbol::Zero ? 0 : 1);
    out.nu1 = bits.front();
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (k == 0 || bits[k] != bits[k - 1])
            out.lengths.push_back(1);
        else
            ++out.lengths.back();
    }
    return out;
}

struct PathSumCheck {
    double residual = 0;
    std::size_t compositions = 0;
    std::size_t nonempty_compositions = 0;
    std::size_t signature_mismatches = 0;
};

inline constexpr std::size_t kPathSumMaxSteps = 8;

inline PathSumCheck verify_pathsum(const RuleTable& table, std::size_t n, double eps = kEpsAmp)
{
    if (n > kPathSumMaxSteps)
        throw Error(ErrorCode::SizeLimit, "path-sum verification is limited to n <= " + std::to_string(kPathSumMaxSteps));
    PathSumCheck out;
    std::map<Configuration, Complex> sum;
    for (const auto& comp : enumerate_compositions(n)) {
        auto trace = composition_evolve(table, comp, eps);
        ++out.compositions;
        if (trace.state.empty())
            continue;
        ++out.nonempty_compositions;
        for (const auto& [c, amp] : trace.state.terms()) {
            sum[c] += amp;
            if (composition_signature(c) != comp)
                ++out.signature_mismatches;
        }
    }
    auto direct = evolve(table, n, eps);
    for (const auto& [c, amp] : direct.terms())
        sum[c] -= amp;
    for (const auto& [c, diff] : sum)
        out.residual = std::max(out.residual, std::abs(diff));
    return out;
}

// ---------------------------------------------------------------------------
// Word paths

struct WordPath {
    SegmentDecomposition decomposition; // of sites 1..n
    std::vector<Word> words;
    std::vector<std::pair<Configuration, Complex>> members;
    double probability = 0;
};

/// Groups the support by the segmentation of sites 1..n; the in-flight
/// site n+1 is left out. At n = 0 site 1 stands in so the single path is
/// the initial spacer.
inline std::vector<WordPath> enumerate_word_paths(const SparseState& state)
{
    const std::size_t sites = std::max<std::size_t>(state.steps(), 1);
    std::map<Tape, WordPath> groups;
    for (const auto& [c, amp] : state.terms()) {
        Tape key(c.tape.begin(), c.tape.begin() + static_cast<std::ptrdiff_t>(sites));
        auto& path = groups[key];
        path.members.emplace_back(c, amp);
        path.probability += std::norm(amp);
    }
    std::vector<WordPath> out;
    for (auto& [key, path] : groups) {
        path.decomposition = decompose(key);
        path.words = path.decomposition.words();
        out.push_back(std::move(path));
    }
    return out;
}

inline std::vector<WordPath> enumerate_word_paths(const RuleTable& table, std::size_t n, double eps = kEpsAmp)
{
    return enumerate_word_paths(evolve(table, n, eps));
}

// ---------------------------------------------------------------------------
// Path tree

struct PathTreeNode {
    std::size_t id = 0;
    std::optional<std::size_t> parent;
    std::optional<Word> word; // empty for the root
    std::size_t start = 0, end = 0;
    std::size_t frozen_at = 0; // step at which the trailing 0 became final
    double probability = 0;
    std::vector<std::size_t> children;
};

struct PathTree {
    std::size_t steps = 0;
    std::vector<PathTreeNode> nodes;

    std::size_t leaf_count() const
    {
        return static_cast<std::size_t>(
            std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.children.empty(); }));
    }
};

/// Each support configuration contributes its sequence of frozen word
/// occurrences; shared prefixes merge into one branch.
inline PathTree build_path_tree(const SparseState& state)
{
    PathTree tree;
    tree.steps = state.steps();
    tree.nodes.push_back(PathTreeNode{});
    std::map<std::tuple<std::size_t, Word, std::size_t>, std::size_t> child_of;
    for (const auto& [c, amp] : state.terms()) {
        const double p = std::norm(amp);
        std::size_t at = 0;
        tree.nodes[0].probability += p;
        for (auto& occ : contained_occurrences(c.tape, c.head_position())) {
            auto key = std::make_tuple(at, occ.word, occ.start);
            auto it = child_of.find(key);
            if (it == child_of.end()) {
                PathTreeNode node;
                node.id = tree.nodes.size();
                node.parent = at;
                node.word = occ.word;
                node.start = occ.start;
                node.end = occ.end;
                node.frozen_at = occ.end + 1;
                it = child_of.emplace(key, node.id).first;
                tree.nodes[at].children.push_back(node.id);
                tree.nodes.push_back(std::move(node));
            }
            at = it->second;
            tree.nodes[at].probability += p;
        }
    }
    return tree;
}

namespace detail {

inline std::string node_label(const PathTreeNode& n)
{
    if (!n.word)
        return "start";
    std::ostringstream os;
    os << n.word->text() << "\\nsites " << n.start << "-" << n.end << "\\nfrozen at step " << n.frozen_at;
    return os.str();
}

} // namespace detail

inline std::string to_dot(const PathTree& tree)
{
    std::ostringstream os;
    os << "digraph word_paths {\n  node [shape=box];\n";
    char prob[32];
    for (const auto& n : tree.nodes) {
        std::snprintf(prob, sizeof prob, "%.6g", n.probability);
        os << "  n" << n.id << " [label=\"" << detail::node_label(n) << "\\np=" << prob << "\"];\n";
    }
    for (const auto& n : tree.nodes)
        for (auto c : n.children)
            os << "  n" << n.id << " -> n" << c << ";\n";
    os << "}\n";
    return os.str();
}

inline nlohmann::json to_json(const PathTree& tree)
{
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
        nlohmann::json j{{"id", n.id}, {"probability", n.probability}, {"children", n.children}};
        j["parent"] = n.parent ? nlohmann::json(*n.parent) : nlohmann::json(nullptr);
        if (n.word) {
            j["word"] = n.word->text();
            j["start"] = n.start;
            j["end"] = n.end;
            j["frozen_at"] = n.frozen_at;
        }
        nodes.push_back(std::move(j));
    }
    return {{"steps", tree.steps}, {"leaves", tree.leaf_count()}, {"nodes", nodes}};
}

} // namespace qsm
