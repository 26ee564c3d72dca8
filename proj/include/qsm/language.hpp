#pragma once

// Words, sentences and the word/spacer segmentation of tapes.

#include "qsm/error.hpp"
#include "qsm/symbol.hpp"

#include <algorithm>
#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qsm {

/// A nonempty string of symbols containing no spacer.
class Word {
public:
    const std::vector<Symbol>& symbols() const noexcept { return symbols_; }
    std::size_t size() const noexcept { return symbols_.size(); }
    std::string text() const { return render(symbols_); }

    friend auto operator<=>(const Word&, const Word&) = default;
    friend bool operator==(const Word&, const Word&) = default;

private:
    explicit Word(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}

    friend Word parse_word(std::span<const Symbol> symbols);

    std::vector<Symbol> symbols_;
};

inline Word parse_word(std::span<const Symbol> symbols)
{
    if (symbols.empty())
        throw Error(ErrorCode::EmptyInput, "a word needs at least one symbol");
    if (std::find(symbols.begin(), symbols.end(), Symbol::Zero) != symbols.end())
        throw Error(ErrorCode::ContainsSpacer, "\"" + render(Tape(symbols.begin(), symbols.end())) +
                                                   "\" contains the spacer 0");
    return Word(std::vector<Symbol>(symbols.begin(), symbols.end()));
}

inline Word parse_word(std::string_view text, Mode mode = Mode::Extended)
{
    Tape symbols = parse_tape(text, mode);
    return parse_word(symbols);
}

inline Word concat(std::initializer_list<std::span<const Symbol>> parts)
{
    std::vector<Symbol> out;
    for (auto part : parts)
        out.insert(out.end(), part.begin(), part.end());
    return parse_word(out);
}

// ---------------------------------------------------------------------------
// Sentences

enum class SentenceKind { PositiveP, NegativeP, PositivePN, NegativePN, PlainWord };

inline std::string_view to_string(SentenceKind kind)
{
    switch (kind) {
    case SentenceKind::PositiveP: return "P";
    case SentenceKind::NegativeP: return "~P";
    case SentenceKind::PositivePN: return "PN";
    case SentenceKind::NegativePN: return "~PN";
    case SentenceKind::PlainWord: return "plain";
    }
    return "?";
}

inline bool is_negative(SentenceKind kind)
{
    return kind == SentenceKind::NegativeP || kind == SentenceKind::NegativePN;
}

struct SentenceForm {
    SentenceKind kind = SentenceKind::PlainWord;
    Word word;                    // the full word as printed
    std::optional<Word> argument; // X in P(X), ~P(X), PN(X), ~PN(X)
    std::optional<Word> target;   // the word whose presence the sentence talks about

    bool is_sentence() const { return kind != SentenceKind::PlainWord; }
};

namespace detail {

inline std::span<const Symbol> prefix_of(SentenceKind kind)
{
    static const Tape p{Symbol::P, Symbol::LParen};
    static const Tape np{Symbol::Tilde, Symbol::P, Symbol::LParen};
    static const Tape pn{Symbol::P, Symbol::N, Symbol::LParen};
    static const Tape npn{Symbol::Tilde, Symbol::P, Symbol::N, Symbol::LParen};
    switch (kind) {
    case SentenceKind::PositiveP: return p;
    case SentenceKind::NegativeP: return np;
    case SentenceKind::PositivePN: return pn;
    case SentenceKind::NegativePN: return npn;
    case SentenceKind::PlainWord: break;
    }
    return {};
}

// Argument X if `symbols` reads prefix + X + ")" with X nonempty.
inline std::optional<std::span<const Symbol>> match_form(std::span<const Symbol> symbols, SentenceKind kind)
{
    auto prefix = prefix_of(kind);
    if (symbols.size() < prefix.size() + 2)
        return std::nullopt;
    if (!std::equal(prefix.begin(), prefix.end(), symbols.begin()))
        return std::nullopt;
    if (symbols.back() != Symbol::RParen)
        return std::nullopt;
    return symbols.subspan(prefix.size(), symbols.size() - prefix.size() - 1);
}

inline bool is_sentence_symbols(std::span<const Symbol> symbols, Mode mode);

inline bool is_sentence_symbols(std::span<const Symbol> symbols, Mode mode)
{
    if (mode == Mode::Extended) {
        if (match_form(symbols, SentenceKind::PositivePN) || match_form(symbols, SentenceKind::NegativePN))
            return true;
    }
    for (auto kind : {SentenceKind::PositiveP, SentenceKind::NegativeP}) {
        if (auto arg = match_form(symbols, kind); arg && !is_sentence_symbols(*arg, mode))
            return true;
    }
    return false;
}

/// X(X): the word a PN(X) sentence refers to.
inline Word self_application(const Word& x)
{
    static const Tape open{Symbol::LParen};
    static const Tape close{Symbol::RParen};
    return concat({x.symbols(), open, x.symbols(), close});
}

} // namespace detail

/// Builds the sentence of the given kind around `argument`; no validity
/// check is made on the argument (use classify for that).
inline SentenceForm make_sentence(SentenceKind kind, const Word& argument)
{
    static const Tape close{Symbol::RParen};
    if (kind == SentenceKind::PlainWord)
        return SentenceForm{kind, argument, std::nullopt, std::nullopt};
    Word word = concat({detail::prefix_of(kind), argument.symbols(), close});
    bool pn = kind == SentenceKind::PositivePN || kind == SentenceKind::NegativePN;
    Word target = pn ? detail::self_application(argument) : argument;
    return SentenceForm{kind, std::move(word), argument, std::move(target)};
}

inline SentenceForm classify(const Word& word, Mode mode)
{
    const auto& symbols = word.symbols();
    if (mode == Mode::Extended) {
        for (auto kind : {SentenceKind::PositivePN, SentenceKind::NegativePN}) {
            if (auto arg = detail::match_form(symbols, kind))
                return make_sentence(kind, parse_word(*arg));
        }
    }
    for (auto kind : {SentenceKind::PositiveP, SentenceKind::NegativeP}) {
        if (auto arg = detail::match_form(symbols, kind); arg && !detail::is_sentence_symbols(*arg, mode))
            return make_sentence(kind, parse_word(*arg));
    }
    return SentenceForm{SentenceKind::PlainWord, word, std::nullopt, std::nullopt};
}

inline bool is_sentence(const Word& word, Mode mode) { return detail::is_sentence_symbols(word.symbols(), mode); }

/// The printed form of a sentence.
inline const Word& render(const SentenceForm& s) { return s.word; }

// ---------------------------------------------------------------------------
// Segmentation

struct Segment {
    bool is_word = false;
    std::size_t start = 0; // 1-based lattice site
    std::size_t length = 0;
    std::optional<Word> word;
};

struct SegmentDecomposition {
    std::size_t t = 0; // number of alternating segments
    int nu1 = 0;       // 1 if the first segment is a word
    std::vector<std::size_t> lengths;
    std::vector<Segment> segments;

    std::vector<Word> words() const
    {
        std::vector<Word> out;
        for (const auto& seg : segments)
            if (seg.is_word)
                out.push_back(*seg.word);
        return out;
    }

    friend bool operator==(const SegmentDecomposition& a, const SegmentDecomposition& b)
    {
        if (a.t != b.t || a.nu1 != b.nu1 || a.lengths != b.lengths)
            return false;
        for (std::size_t i = 0; i < a.segments.size(); ++i)
            if (a.segments[i].word != b.segments[i].word)
                return false;
        return true;
    }
};

inline SegmentDecomposition decompose(std::span<const Symbol> tape)
{
    if (tape.empty())
        throw Error(ErrorCode::EmptyInput, "cannot decompose an empty tape");
    SegmentDecomposition out;
    std::size_t i = 0;
    while (i < tape.size()) {
        bool word = tape[i] != Symbol::Zero;
        std::size_t j = i;
        while (j < tape.size() && (tape[j] != Symbol::Zero) == word)
            ++j;
        Segment seg{word, i + 1, j - i, std::nullopt};
        if (word)
            seg.word = parse_word(tape.subspan(i, j - i));
        out.segments.push_back(std::move(seg));
        out.lengths.push_back(j - i);
        i = j;
    }
    out.t = out.segments.size();
    out.nu1 = out.segments.front().is_word ? 1 : 0;
    return out;
}

/// Word count of a path with t alternating segments starting with nu1.
inline std::size_t word_count_formula(std::size_t t, int nu1)
{
    if (t % 2 == 0)
        return t / 2;
    return nu1 == 0 ? (t - 1) / 2 : (t + 1) / 2;
}

// ---------------------------------------------------------------------------
// Containment of delimited words in the frozen region

struct Occurrence {
    Word word;
    std::size_t start = 0; // first site of the word (1-based)
    std::size_t end = 0;   // last site of the word

    friend auto operator<=>(const Occurrence&, const Occurrence&) = default;
    friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

/// Every 0-delimited word whose trailing 0 sits at least two sites behind
/// the head. Sites past the end of `tape` read as 0. Words starting at
/// site 1 have no leading 0 and are never contained.
inline std::vector<Occurrence> contained_occurrences(std::span<const Symbol> tape, std::size_t head_pos)
{
    std::vector<Occurrence> out;
    if (head_pos < 2)
        return out;
    const std::size_t frozen_limit = head_pos - 2; // last site whose symbol can no longer change
    std::size_t i = 0;
    while (i < tape.size()) {
        if (tape[i] == Symbol::Zero) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < tape.size() && tape[j] != Symbol::Zero)
            ++j;
        // run occupies sites i+1 .. j; trailing 0 at site j+1
        bool leading_zero = i > 0;
        if (leading_zero && j + 1 <= frozen_limit)
            out.push_back(Occurrence{parse_word(tape.subspan(i, j - i)), i + 1, j});
        i = j;
    }
    return out;
}

inline std::set<Word> contained_words(std::span<const Symbol> tape, std::size_t head_pos)
{
    std::set<Word> out;
    for (auto& occ : contained_occurrences(tape, head_pos))
        out.insert(std::move(occ.word));
    return out;
}

// ---------------------------------------------------------------------------
// Enumeration and counting

namespace detail {

inline void words_of_length(Mode mode, std::size_t len, std::vector<Word>& out)
{
    auto lets = letters(mode);
    std::vector<std::size_t> digits(len, 0);
    std::vector<Symbol> buf(len);
    while (true) {
        for (std::size_t k = 0; k < len; ++k)
            buf[k] = lets[digits[k]];
        out.push_back(parse_word(buf));
        std::size_t k = len;
        while (k > 0) {
            --k;
            if (++digits[k] < lets.size())
                break;
            digits[k] = 0;
            if (k == 0)
                return;
        }
    }
}

} // namespace detail

/// All words of length 1..max_len, shortest first, then in symbol order.
inline std::vector<Word> enumerate_words(Mode mode, std::size_t max_len)
{
    std::vector<Word> out;
    for (std::size_t len = 1; len <= max_len; ++len)
        detail::words_of_length(mode, len, out);
    return out;
}

/// All sentences whose printed length is at most max_len.
inline std::vector<SentenceForm> enumerate_sentences(Mode mode, std::size_t max_len)
{
    std::vector<SentenceForm> out;
    for (const auto& w : enumerate_words(mode, max_len)) {
        auto form = classify(w, mode);
        if (form.is_sentence())
            out.push_back(std::move(form));
    }
    return out;
}

struct WordCounts {
    double sentences = 0;     // sentences of length <= L
    double non_sentences = 0; // words of length <= L that are not sentences
};

/// Closed-form counts, usable for bounds where explicit enumeration is too big.
inline WordCounts count_words(Mode mode, std::size_t max_len)
{
    const double letters_n = static_cast<double>(alphabet_size(mode) - 1);
    std::vector<double> total(max_len + 1, 0), sent(max_len + 1, 0);
    for (std::size_t k = 1; k <= max_len; ++k) {
        total[k] = k == 1 ? letters_n : total[k - 1] * letters_n;
        auto non_sent = [&](std::size_t len) { return len >= 1 && len < k ? total[len] - sent[len] : 0.0; };
        auto any = [&](std::size_t len) { return len >= 1 && len < k ? total[len] : 0.0; };
        double s = 0;
        if (k > 3)
            s += non_sent(k - 3); // P(X)
        if (k > 4)
            s += non_sent(k - 4); // ~P(X)
        if (mode == Mode::Extended) {
            if (k > 4)
                s += any(k - 4); // PN(X)
            if (k > 5)
                s += any(k - 5); // ~PN(X)
        }
        sent[k] = s;
    }
    WordCounts out;
    for (std::size_t k = 1; k <= max_len; ++k) {
        out.sentences += sent[k];
        out.non_sentences += total[k] - sent[k];
    }
    return out;
}

} // namespace qsm
