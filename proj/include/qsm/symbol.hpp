#pragma once

#include "qsm/error.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qsm {

// The numeric value of each symbol doubles as its basis index in
// site-local matrices, so Zero must stay first and N last.
enum class Symbol : std::uint8_t { Zero = 0, P = 1, Tilde = 2, LParen = 3, RParen = 4, N = 5 };

enum class Mode : std::uint8_t { Base, Extended };

using Tape = std::vector<Symbol>;

inline constexpr std::size_t alphabet_size(Mode mode) { return mode == Mode::Base ? 5 : 6; }

inline constexpr std::size_t index(Symbol s) { return static_cast<std::size_t>(s); }

inline constexpr Symbol symbol_at(std::size_t i) { return static_cast<Symbol>(i); }

inline constexpr bool in_alphabet(Symbol s, Mode mode) { return index(s) < alphabet_size(mode); }

inline constexpr char to_char(Symbol s)
{
    constexpr std::array<char, 6> chars{'0', 'P', '~', '(', ')', 'N'};
    return chars[index(s)];
}

inline Symbol symbol_from_char(char c, Mode mode = Mode::Extended)
{
    Symbol s{};
    switch (c) {
    case '0': s = Symbol::Zero; break;
    case 'P': s = Symbol::P; break;
    case '~': s = Symbol::Tilde; break;
    case '(': s = Symbol::LParen; break;
    case ')': s = Symbol::RParen; break;
    case 'N': s = Symbol::N; break;
    default: throw Error(ErrorCode::BadSymbol, std::string("unknown symbol character '") + c + "'");
    }
    if (!in_alphabet(s, mode))
        throw Error(ErrorCode::BadSymbol, std::string("symbol '") + c + "' requires extended mode");
    return s;
}

inline std::vector<Symbol> alphabet(Mode mode)
{
    std::vector<Symbol> out;
    for (std::size_t i = 0; i < alphabet_size(mode); ++i)
        out.push_back(symbol_at(i));
    return out;
}

/// Nonzero symbols of the alphabet, i.e. the letters words are made of.
inline std::vector<Symbol> letters(Mode mode)
{
    std::vector<Symbol> out;
    for (std::size_t i = 1; i < alphabet_size(mode); ++i)
        out.push_back(symbol_at(i));
    return out;
}

inline std::string render(const Tape& tape)
{
    std::string out;
    out.reserve(tape.size());
    for (Symbol s : tape)
        out.push_back(to_char(s));
    return out;
}

inline Tape parse_tape(std::string_view text, Mode mode = Mode::Extended)
{
    Tape out;
    out.reserve(text.size());
    for (char c : text)
        out.push_back(symbol_from_char(c, mode));
    return out;
}

inline std::string_view to_string(Mode mode) { return mode == Mode::Base ? "base" : "extended"; }

inline Mode mode_from_string(std::string_view text)
{
    if (text == "base")
        return Mode::Base;
    if (text == "extended")
        return Mode::Extended;
    throw Error(ErrorCode::ParseError, "mode must be \"base\" or \"extended\", got \"" + std::string(text) + "\"");
}

} // namespace qsm
