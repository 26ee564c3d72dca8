#include "qsm/builtins.hpp"
#include "qsm/paths.hpp"
#include "support/random_machines.hpp"

#include <gtest/gtest.h>

#include <random>
#include <regex>

using namespace qsm;

namespace {

std::vector<RuleTable> machines()
{
    std::vector<RuleTable> out;
    for (const auto& name : builtin_names())
        out.push_back(builtin(name));
    std::mt19937 rng(271828);
    for (int k = 0; k < 3; ++k)
        out.push_back(testkit::random_isometric_table(rng, Mode::Base, 2));
    return out;
}

double termwise_gap(const SparseState& a, const SparseState& b)
{
    std::map<Configuration, Complex> diff;
    for (const auto& [c, amp] : a.terms())
        diff[c] += amp;
    for (const auto& [c, amp] : b.terms())
        diff[c] -= amp;
    double worst = 0;
    for (const auto& [c, d] : diff)
        worst = std::max(worst, std::abs(d));
    return worst;
}

SparseState add(const SparseState& a, const SparseState& b)
{
    SparseState out(a.steps());
    for (const auto* s : {&a, &b})
        for (const auto& [c, amp] : s->terms())
            out.accumulate(c, amp);
    return out;
}

} // namespace

TEST(SplitStep, InitialState)
{
    auto t = builtin("branching-printer");
    auto s = initial_state(t);
    EXPECT_LT(termwise_gap(split_step(s, t, Branch::Zero), step(s, t)), 1e-15);
    EXPECT_TRUE(split_step(s, t, Branch::NonZero).empty());
}

TEST(SplitStep, BranchesSumToStep)
{
    for (const auto& t : machines()) {
        auto s = initial_state(t);
        for (std::size_t n = 0; n <= 10; ++n) {
            auto z = split_step(s, t, Branch::Zero, 0.0);
            auto nz = split_step(s, t, Branch::NonZero, 0.0);
            EXPECT_LE(termwise_gap(add(z, nz), step(s, t, 0.0)), 1e-14);
            s = step(s, t);
        }
    }
}

TEST(Compositions, Enumeration)
{
    EXPECT_EQ(enumerate_compositions(0).size(), 1u);
    for (std::size_t n = 1; n <= 8; ++n) {
        auto all = enumerate_compositions(n);
        EXPECT_EQ(all.size(), std::size_t{1} << n);
        std::set<Composition> unique(all.begin(), all.end());
        EXPECT_EQ(unique.size(), all.size());
        for (const auto& c : all) {
            EXPECT_EQ(c.total(), n);
            for (auto h : c.lengths)
                EXPECT_GE(h, 1u);
        }
    }
}

TEST(Compositions, OneStepSplit)
{
    auto t = builtin("branching-printer");
    auto a = composition_evolve(t, Composition{0, {1}}).state;
    auto b = composition_evolve(t, Composition{1, {1}}).state;
    EXPECT_LE(termwise_gap(add(a, b), evolve(t, 1)), 1e-15);
}

TEST(Compositions, DeterministicMachineHasOnePath)
{
    auto t = builtin("classical-enumerator");
    const std::size_t n = 8;
    auto terminal = evolve(t, n).terms().begin()->first;
    auto sig = composition_signature(terminal);
    // sites 1..7 read 0P(PP)0, so the nu sequence is 0 | 0 1 1 1 1 1 0
    EXPECT_EQ(sig, (Composition{0, {2, 5, 1}}));
    for (const auto& c : enumerate_compositions(n)) {
        auto trace = composition_evolve(t, c);
        if (c == sig)
            EXPECT_NEAR(trace.state.norm2(), 1.0, 1e-15);
        else
            EXPECT_TRUE(trace.state.empty()) << c.text();
    }
}

TEST(Compositions, TraceRecordsFactors)
{
    auto trace = composition_evolve(builtin("branching-printer"), Composition{0, {2, 3, 1}});
    ASSERT_EQ(trace.factors.size(), 3u);
    EXPECT_EQ(trace.factors[0], (std::pair<int, std::size_t>{0, 2}));
    EXPECT_EQ(trace.factors[1], (std::pair<int, std::size_t>{1, 3}));
    EXPECT_EQ(trace.factors[2], (std::pair<int, std::size_t>{0, 1}));
    EXPECT_EQ(trace.state.steps(), 6u);
    EXPECT_THROW(composition_evolve(builtin("branching-printer"), Composition{0, {2, 0}}), Error);
}

TEST(PathSum, BranchingPrinterFourSteps)
{
    auto t = builtin("branching-printer");
    std::map<Configuration, Complex> sum;
    for (const auto& c : enumerate_compositions(4)) {
        const auto trace = composition_evolve(t, c);
        for (const auto& [conf, amp] : trace.state.terms())
            sum[conf] += amp;
    }
    SparseState total(4, sum);
    EXPECT_LE(termwise_gap(total, evolve(t, 4)), 1e-10);
}

TEST(PathSum, AllMachines)
{
    for (const auto& t : machines())
        for (std::size_t n = 0; n <= 8; ++n) {
            auto r = verify_pathsum(t, n);
            EXPECT_LE(r.residual, 1e-10) << "n=" << n;
            EXPECT_EQ(r.signature_mismatches, 0u) << "n=" << n;
            EXPECT_EQ(r.compositions, n == 0 ? 1u : std::size_t{1} << n);
        }
    EXPECT_THROW(verify_pathsum(builtin("classical-enumerator"), 9), Error);
}

TEST(PathSum, SignatureIsTheOnlyContributingComposition)
{
    std::mt19937 rng(8);
    auto t = testkit::random_isometric_table(rng, Mode::Base, 2);
    const std::size_t n = 6;
    const auto final_state = evolve(t, n);
    for (const auto& [conf, amp] : final_state.terms()) {
        auto sig = composition_signature(conf);
        for (const auto& c : enumerate_compositions(n)) {
            auto a = composition_evolve(t, c).state;
            auto it = a.terms().find(conf);
            if (c == sig) {
                ASSERT_NE(it, a.terms().end());
                EXPECT_LE(std::abs(it->second - amp), 1e-12);
            } else {
                EXPECT_EQ(it, a.terms().end());
            }
        }
    }
}

TEST(WordPaths, ClassicalEnumerator)
{
    auto paths = enumerate_word_paths(builtin("classical-enumerator"), 9);
    ASSERT_EQ(paths.size(), 1u);
    ASSERT_EQ(paths[0].words.size(), 2u);
    EXPECT_EQ(paths[0].words[0].text(), "P(PP)");
    EXPECT_EQ(paths[0].words[1].text(), "PP");
    EXPECT_NEAR(paths[0].probability, 1.0, 1e-15);
}

TEST(WordPaths, BranchingPrinter)
{
    auto t = builtin("branching-printer");
    for (std::size_t n = 9; n <= 20; ++n) {
        auto paths = enumerate_word_paths(t, n);
        ASSERT_EQ(paths.size(), 2u);
        EXPECT_NEAR(paths[0].probability, 0.5, 1e-12);
        EXPECT_NEAR(paths[1].probability, 0.5, 1e-12);
    }
}

TEST(WordPaths, InitialIsOneSpacer)
{
    auto paths = enumerate_word_paths(builtin("branching-printer"), 0);
    ASSERT_EQ(paths.size(), 1u);
    EXPECT_EQ(paths[0].decomposition.t, 1u);
    EXPECT_TRUE(paths[0].words.empty());
}

TEST(WordPaths, ProbabilitiesAndWordCounts)
{
    for (const auto& t : machines())
        for (std::size_t n = 0; n <= 9; ++n) {
            auto state = evolve(t, n);
            double total = 0;
            for (const auto& p : enumerate_word_paths(state)) {
                total += p.probability;
                EXPECT_EQ(p.words.size(), word_count_formula(p.decomposition.t, p.decomposition.nu1));
                EXPECT_LE(p.decomposition.t, std::max<std::size_t>(n, 1));
            }
            EXPECT_NEAR(total, state.norm2(), 1e-10);
        }
}

TEST(PathTree, BranchingPrinterLeaves)
{
    auto tree = build_path_tree(evolve(builtin("branching-printer"), 12));
    EXPECT_EQ(tree.leaf_count(), 2u);
    EXPECT_NEAR(tree.nodes[0].probability, 1.0, 1e-12);
    auto dot = to_dot(tree);
    EXPECT_NE(dot.find("P(PP)"), std::string::npos);
    EXPECT_NE(dot.find("~P(PP)"), std::string::npos);
    auto j = to_json(tree);
    EXPECT_EQ(j["leaves"], 2);
}

TEST(PathTree, InitialIsSingleNode)
{
    auto tree = build_path_tree(initial_state(builtin("branching-printer")));
    EXPECT_EQ(tree.nodes.size(), 1u);
    EXPECT_EQ(tree.leaf_count(), 1u);
}

TEST(PathTree, DotIsWellFormed)
{
    auto dot = to_dot(build_path_tree(evolve(builtin("branching-printer"), 20)));
    // every statement is a node declaration or an edge between declared nodes
    std::regex node(R"(^  n(\d+) \[label="[^"]*"\];$)"), edge(R"(^  n(\d+) -> n(\d+);$)");
    std::istringstream in(dot);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "digraph word_paths {");
    std::set<std::string> declared;
    std::smatch m;
    while (std::getline(in, line)) {
        if (line == "}" || line == "  node [shape=box];")
            continue;
        if (std::regex_match(line, m, node)) {
            declared.insert(m[1]);
        } else if (std::regex_match(line, m, edge)) {
            EXPECT_TRUE(declared.count(m[1]) && declared.count(m[2])) << line;
        } else {
            ADD_FAILURE() << "unexpected DOT line: " << line;
        }
    }
}
