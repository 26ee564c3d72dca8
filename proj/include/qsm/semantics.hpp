#pragma once

// Finite-horizon logic over an evolved state: printability, per-sentence
// truth status, and the machine-level validity / consistency / completeness
// report.
//
// Everything here looks only at words whose delimiting zeros are frozen,
// so a Violated verdict can never be undone by later steps.

#include "qsm/error.hpp"
#include "qsm/evolution.hpp"
#include "qsm/language.hpp"
#include "qsm/rule_table.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace qsm {

enum class TruthStatus { HoldsSoFar, Open, Violated, NoDomainYet };
enum class Semantics { PathLocal, Global };

inline std::string_view to_string(TruthStatus s)
{
    switch (s) {
    case TruthStatus::HoldsSoFar: return "holds-so-far";
    case TruthStatus::Open: return "open";
    case TruthStatus::Violated: return "violated";
    case TruthStatus::NoDomainYet: return "no-domain-yet";
    }
    return "?";
}

inline std::string_view to_string(Semantics s) { return s == Semantics::PathLocal ? "path-local" : "global"; }

inline Semantics semantics_from_string(std::string_view text)
{
    if (text == "path-local")
        return Semantics::PathLocal;
    if (text == "global")
        return Semantics::Global;
    throw Error(ErrorCode::ParseError, "semantics must be path-local or global, got \"" + std::string(text) + "\"");
}

inline constexpr std::size_t kMaxWitnesses = 16;

/// One weighted basis term as the analysis sees it.
struct TermView {
    std::string digest;
    Tape tape;
    std::size_t head = 2;
    double probability = 0;
};

inline std::vector<TermView> term_views(const SparseState& state, const RuleTable& table)
{
    std::vector<TermView> out;
    for (const auto& [c, amp] : state.terms())
        out.push_back(TermView{digest(c, table), c.tape, c.head_position(), std::norm(amp)});
    return out;
}

class Analysis {
public:
    Analysis(std::span<const TermView> terms, Mode mode) : mode_(mode)
    {
        for (const auto& t : terms)
            terms_.push_back(Entry{t.digest, t.probability, contained_words(t.tape, t.head)});
    }

    Mode mode() const noexcept { return mode_; }

    double printability(const Word& x) const
    {
        double p = 0;
        for (const auto& t : terms_)
            if (t.words.count(x))
                p += t.probability;
        return p;
    }

    bool printable(const Word& x) const { return printability(x) >= kEpsProb; }

    /// Every sentence contained in some term, regardless of length.
    std::set<Word> printed_sentences() const
    {
        std::set<Word> out;
        for (const auto& t : terms_)
            for (const auto& w : t.words)
                if (is_sentence(w, mode_))
                    out.insert(w);
        for (auto it = out.begin(); it != out.end();)
            it = printable(*it) ? std::next(it) : out.erase(it);
        return out;
    }

    struct Verdict {
        TruthStatus status = TruthStatus::NoDomainYet;
        double probability = 0;
        std::vector<std::string> witnesses;
    };

    Verdict evaluate(const SentenceForm& s, Semantics semantics) const
    {
        if (!s.is_sentence())
            throw Error(ErrorCode::NotASentence, "\"" + s.word.text() + "\" is not a sentence");
        Verdict v;
        v.probability = printability(s.word);
        if (v.probability < kEpsProb)
            return v;
        const bool negative = is_negative(s.kind);
        std::vector<std::string> holding, failing;
        for (const auto& t : terms_) {
            if (!t.words.count(s.word))
                continue;
            (t.words.count(*s.target) ? holding : failing).push_back(t.digest);
        }
        if (semantics == Semantics::PathLocal) {
            if (negative) {
                v.status = holding.empty() ? TruthStatus::HoldsSoFar : TruthStatus::Violated;
                v.witnesses = holding.empty() ? failing : holding;
            } else {
                v.status = failing.empty() ? TruthStatus::HoldsSoFar : TruthStatus::Open;
                v.witnesses = failing.empty() ? holding : failing;
            }
        } else {
            const bool target_anywhere = printable(*s.target);
            if (negative)
                v.status = target_anywhere ? TruthStatus::Violated : TruthStatus::HoldsSoFar;
            else
                v.status = target_anywhere ? TruthStatus::HoldsSoFar : TruthStatus::Open;
            if (target_anywhere) {
                for (const auto& t : terms_)
                    if (t.words.count(*s.target))
                        v.witnesses.push_back(t.digest);
            } else {
                v.witnesses = failing;
            }
        }
        std::sort(v.witnesses.begin(), v.witnesses.end());
        if (v.witnesses.size() > kMaxWitnesses)
            v.witnesses.resize(kMaxWitnesses);
        return v;
    }

    struct Inconsistency {
        Word argument;
        std::string witness;
    };

    /// Terms holding both a positive sentence and its negation.
    std::vector<Inconsistency> inconsistencies() const
    {
        std::vector<Inconsistency> out;
        for (const auto& t : terms_) {
            for (const auto& w : t.words) {
                auto form = classify(w, mode_);
                SentenceKind neg;
                if (form.kind == SentenceKind::PositiveP)
                    neg = SentenceKind::NegativeP;
                else if (form.kind == SentenceKind::PositivePN)
                    neg = SentenceKind::NegativePN;
                else
                    continue;
                if (t.words.count(make_sentence(neg, *form.argument).word))
                    out.push_back(Inconsistency{*form.argument, t.digest});
            }
        }
        return out;
    }

private:
    struct Entry {
        std::string digest;
        double probability;
        std::set<Word> words;
    };

    Mode mode_;
    std::vector<Entry> terms_;
};

inline double printability(const SparseState& state, const Word& x)
{
    double p = 0;
    for (const auto& [c, amp] : state.terms())
        if (contained_words(c.tape, c.head_position()).count(x))
            p += std::norm(amp);
    return p;
}

inline double printability(const RuleTable& table, const Word& x, std::size_t n)
{
    return printability(evolve(table, n), x);
}

inline TruthStatus truth_status(const SparseState& state, const RuleTable& table, const SentenceForm& s,
                                Semantics semantics)
{
    auto views = term_views(state, table);
    return Analysis(views, table.mode()).evaluate(s, semantics).status;
}

inline TruthStatus truth_status(const RuleTable& table, const SentenceForm& s, std::size_t n, Semantics semantics)
{
    return truth_status(evolve(table, n), table, s, semantics);
}

// ---------------------------------------------------------------------------
// Machine report

struct SentenceEntry {
    Word sentence;
    SentenceKind kind = SentenceKind::PlainWord;
    TruthStatus status = TruthStatus::NoDomainYet;
    double probability = 0;
    std::vector<std::string> witnesses;
    bool within_bound = true; // rendered length <= L
};

struct MachineReport {
    std::size_t horizon = 0;
    std::size_t max_len = 0;
    Mode mode = Mode::Base;
    Semantics semantics = Semantics::PathLocal;

    std::vector<SentenceEntry> entries; // printed sentences; all others are NoDomainYet
    std::vector<Analysis::Inconsistency> inconsistencies;

    bool consistent_so_far = true;
    bool valid_so_far = true;
    bool cannot_be_valid = false;

    std::size_t covered_words = 0;  // non-sentences X, |X| <= L, with P(X) or ~P(X) printed
    double candidate_words = 0;     // non-sentences with |X| <= L
    double completeness_coverage = 0;
    std::size_t printed_within_bound = 0;
    double sentences_within_bound = 0; // excluding the extended-mode liar sentences
    double maximal_completeness_coverage = 0;

    const SentenceEntry* find(std::string_view sentence) const
    {
        for (const auto& e : entries)
            if (e.sentence.text() == sentence)
                return &e;
        return nullptr;
    }

    TruthStatus status_of(std::string_view sentence) const
    {
        const auto* e = find(sentence);
        return e ? e->status : TruthStatus::NoDomainYet;
    }
};

/// Sentences that no valid machine can print in extended mode.
inline const std::vector<Word>& excluded_sentences()
{
    static const std::vector<Word> words{parse_word("PN(~PN)"), parse_word("~PN(~PN)")};
    return words;
}

inline MachineReport machine_report(std::span<const TermView> terms, Mode mode, std::size_t horizon,
                                    std::size_t max_len, Semantics semantics)
{
    if (max_len < 5)
        throw Error(ErrorCode::ParseError, "max sentence length must be at least 5");
    Analysis analysis(terms, mode);
    MachineReport r;
    r.horizon = horizon;
    r.max_len = max_len;
    r.mode = mode;
    r.semantics = semantics;

    std::set<Word> covered;
    for (const auto& w : analysis.printed_sentences()) {
        auto form = classify(w, mode);
        auto v = analysis.evaluate(form, semantics);
        r.entries.push_back(SentenceEntry{w, form.kind, v.status, v.probability, std::move(v.witnesses),
                                          w.size() <= max_len});
        if (v.status == TruthStatus::Violated)
            r.cannot_be_valid = true;
        if ((form.kind == SentenceKind::PositiveP || form.kind == SentenceKind::NegativeP) &&
            form.argument->size() <= max_len)
            covered.insert(*form.argument);
        if (w.size() <= max_len &&
            std::find(excluded_sentences().begin(), excluded_sentences().end(), w) == excluded_sentences().end())
            ++r.printed_within_bound;
    }

    r.inconsistencies = analysis.inconsistencies();
    r.consistent_so_far = r.inconsistencies.empty();
    if (!r.consistent_so_far)
        r.cannot_be_valid = true;
    r.valid_so_far = !r.cannot_be_valid;

    auto counts = count_words(mode, max_len);
    r.covered_words = covered.size();
    r.candidate_words = counts.non_sentences;
    r.completeness_coverage = counts.non_sentences > 0 ? r.covered_words / counts.non_sentences : 0;
    r.sentences_within_bound = counts.sentences;
    if (mode == Mode::Extended)
        for (const auto& w : excluded_sentences())
            if (w.size() <= max_len)
                r.sentences_within_bound -= 1;
    r.maximal_completeness_coverage =
        r.sentences_within_bound > 0 ? r.printed_within_bound / r.sentences_within_bound : 0;
    return r;
}

inline MachineReport machine_report(const SparseState& state, const RuleTable& table, std::size_t max_len,
                                    Semantics semantics)
{
    auto views = term_views(state, table);
    return machine_report(views, table.mode(), state.steps(), max_len, semantics);
}

inline MachineReport machine_report(const RuleTable& table, std::size_t n, std::size_t max_len, Semantics semantics)
{
    return machine_report(evolve(table, n), table, max_len, semantics);
}

inline nlohmann::json to_json(const MachineReport& r)
{
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : r.entries)
        entries.push_back({{"sentence", e.sentence.text()},
                           {"kind", std::string(to_string(e.kind))},
                           {"status", std::string(to_string(e.status))},
                           {"probability", e.probability},
                           {"within_bound", e.within_bound},
                           {"witnesses", e.witnesses}});
    nlohmann::json inconsistencies = nlohmann::json::array();
    for (const auto& i : r.inconsistencies)
        inconsistencies.push_back({{"argument", i.argument.text()}, {"witness", i.witness}});
    return {{"horizon", r.horizon},
            {"max_sentence_len", r.max_len},
            {"mode", std::string(to_string(r.mode))},
            {"semantics", std::string(to_string(r.semantics))},
            {"consistent_so_far", r.consistent_so_far},
            {"valid_so_far", r.valid_so_far},
            {"cannot_be_valid", r.cannot_be_valid},
            {"completeness_coverage", r.completeness_coverage},
            {"covered_words", r.covered_words},
            {"candidate_words", r.candidate_words},
            {"maximal_completeness_coverage", r.maximal_completeness_coverage},
            {"sentences", entries},
            {"inconsistencies", inconsistencies}};
}

/// Short human-readable verdict.
inline std::string summarize(const MachineReport& r)
{
    std::ostringstream os;
    if (r.cannot_be_valid) {
        os << "CANNOT BE VALID\n";
        for (const auto& e : r.entries)
            if (e.status == TruthStatus::Violated)
                os << "  violated: " << e.sentence.text() << " witness "
                   << (e.witnesses.empty() ? "-" : e.witnesses.front()) << '\n';
        for (const auto& i : r.inconsistencies)
            os << "  inconsistent: P(" << i.argument.text() << ") and ~P(" << i.argument.text() << ") on "
               << i.witness << '\n';
    } else {
        os << "valid-so-far\n";
    }
    os << (r.consistent_so_far ? "consistent" : "inconsistent");

    // Positive and negative sentences about the same X printed on disjoint paths.
    std::vector<std::string> split;
    for (const auto& e : r.entries) {
        if (e.kind != SentenceKind::PositiveP)
            continue;
        auto arg = classify(e.sentence, r.mode).argument;
        auto neg = make_sentence(SentenceKind::NegativeP, *arg).word.text();
        if (r.find(neg))
            split.push_back(e.sentence.text() + " and " + neg);
    }
    for (const auto& s : split)
        os << "; " << s << " both printable on disjoint paths";
    os << '\n';
    char buf[64];
    for (const auto& e : r.entries) {
        std::snprintf(buf, sizeof buf, "%.12g", e.probability);
        os << "  " << e.sentence.text() << "  " << to_string(e.status) << "  p=" << buf << '\n';
    }
    std::snprintf(buf, sizeof buf, "%.6g", r.completeness_coverage);
    os << "completeness coverage (|X| <= " << r.max_len << "): " << buf << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Self-reference in extended mode

struct IncompletenessReport {
    double liar_probability = 0; // ~PN(~PN)
    TruthStatus liar_status = TruthStatus::NoDomainYet;
    double pn_liar_probability = 0; // PN(~PN)
    TruthStatus pn_liar_status = TruthStatus::NoDomainYet;
    bool pn_liar_requires_liar = false; // PN(~PN) printed: its truth needs ~PN(~PN) printed too
    bool cannot_be_valid = false;

    std::string summary() const
    {
        if (liar_probability >= kEpsProb)
            return "~PN(~PN) printable and violated: machine cannot be valid";
        if (pn_liar_probability >= kEpsProb)
            return "PN(~PN) printable: true only if ~PN(~PN) is printed, which would make the machine invalid";
        return "~PN(~PN) and PN(~PN) unprintable so far";
    }
};

inline IncompletenessReport incompleteness_check(const SparseState& state, const RuleTable& table)
{
    if (table.mode() != Mode::Extended)
        throw Error(ErrorCode::NotExtendedMode, "incompleteness check needs the extended alphabet");
    auto views = term_views(state, table);
    Analysis a(views, Mode::Extended);
    IncompletenessReport r;
    const auto& pn_liar = excluded_sentences()[0];
    const auto& liar = excluded_sentences()[1];
    auto liar_v = a.evaluate(classify(liar, Mode::Extended), Semantics::PathLocal);
    auto pn_v = a.evaluate(classify(pn_liar, Mode::Extended), Semantics::PathLocal);
    r.liar_probability = liar_v.probability;
    r.liar_status = liar_v.status;
    r.pn_liar_probability = pn_v.probability;
    r.pn_liar_status = pn_v.status;
    r.pn_liar_requires_liar = pn_v.probability >= kEpsProb;
    r.cannot_be_valid = liar_v.status == TruthStatus::Violated;
    return r;
}

inline IncompletenessReport incompleteness_check(const RuleTable& table, std::size_t n)
{
    if (table.mode() != Mode::Extended)
        throw Error(ErrorCode::NotExtendedMode, "incompleteness check needs the extended alphabet");
    return incompleteness_check(evolve(table, n), table);
}

} // namespace qsm
